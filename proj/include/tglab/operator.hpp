#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include <Eigen/Dense>

#include "tglab/errors.hpp"
#include "tglab/grid.hpp"

namespace tglab {

using Complex = std::complex<double>;

/// Boundary phase twist, normalized to (-pi, pi].  theta = 0 is periodic,
/// theta = pi antiperiodic; general theta realizes psi(L) = e^{i theta} psi(0).
struct BoundaryTwist {
    double theta;

    explicit BoundaryTwist(double t = 0.0) : theta(normalize(t)) {}

    static BoundaryTwist periodic() { return BoundaryTwist(0.0); }
    static BoundaryTwist antiperiodic() { return BoundaryTwist(std::numbers::pi); }

    /// Periodic and antiperiodic twists admit a real-symmetric matrix.
    bool is_real() const { return theta == 0.0 || theta == std::numbers::pi; }

    static double normalize(double t) {
        const double two_pi = 2.0 * std::numbers::pi;
        double r = std::fmod(t, two_pi);
        if (r <= -std::numbers::pi) r += two_pi;
        if (r > std::numbers::pi) r -= two_pi;
        // snap the antiperiodic point so theta + pi keeps a real representation
        if (std::abs(r - std::numbers::pi) < 1e-15) r = std::numbers::pi;
        if (std::abs(r) < 1e-15) r = 0.0;
        if (std::abs(r + std::numbers::pi) < 1e-15) r = std::numbers::pi;
        return r;
    }
};

/// Dense three-point discretization of -d^2/dx^2 + V on the ring, with the
/// twist phase placed entirely on the single wrap-around bond
/// (total_points-1 <-> 0).  Hermitian by construction.
struct DiscreteHamiltonian {
    Grid grid;
    BoundaryTwist twist;
    Eigen::MatrixXcd matrix;

    double hermiticity_defect() const {
        const double scale = matrix.cwiseAbs().maxCoeff();
        return (matrix - matrix.adjoint()).cwiseAbs().maxCoeff() / scale;
    }
};

inline DiscreteHamiltonian assemble(const Grid& grid, const DisorderRealization& realization,
                                    BoundaryTwist twist) {
    if (!(realization.grid == grid))
        throw ContractViolation("assemble: realization was sampled on a different grid");

    const int n = grid.total_points();
    const double inv_h2 = 1.0 / (grid.spacing() * grid.spacing());
    Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(n, n);

    for (int i = 0; i < n; ++i) {
        H(i, i) = 2.0 * inv_h2 + realization.values[static_cast<std::size_t>(i)];
        if (i + 1 < n) {
            H(i, i + 1) = -inv_h2;
            H(i + 1, i) = -inv_h2;
        }
    }
    // wrap bond: row 0 couples to the continuation point e^{-i theta} psi(n-1)
    const std::complex<double> phase(std::cos(twist.theta), std::sin(twist.theta));
    H(0, n - 1) = -inv_h2 * std::conj(phase);
    H(n - 1, 0) = -inv_h2 * phase;

    return DiscreteHamiltonian{grid, twist, std::move(H)};
}

} // namespace tglab
