#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tglab/errors.hpp"
#include "tglab/operator.hpp"

namespace tglab {

/// Eigendecomposition of a discrete operator at a fixed boundary twist.
/// Energies ascend; orbital columns are h-orthonormal grid functions,
/// i.e. h * sum_i phi_j(i) conj(phi_k(i)) = delta_jk.
struct SpectralData {
    Grid grid;
    BoundaryTwist twist;
    Eigen::VectorXd energies;  // ascending
    Eigen::MatrixXcd orbitals; // column j <-> energies[j]

    /// Number of eigenvalues E_j <= mu.
    int count_below(double mu) const {
        const double* b = energies.data();
        return static_cast<int>(std::upper_bound(b, b + energies.size(), mu) - b);
    }
};

namespace detail {

// Global phase fix: rotate each column so its largest-magnitude component is
// real positive (first index on ties).  Makes downstream determinants
// reproducible run to run.
inline void fix_phases(Eigen::MatrixXcd& vecs) {
    for (Eigen::Index j = 0; j < vecs.cols(); ++j) {
        Eigen::Index imax = 0;
        vecs.col(j).cwiseAbs().maxCoeff(&imax);
        const std::complex<double> top = vecs(imax, j);
        const double mag = std::abs(top);
        if (mag > 0.0) vecs.col(j) *= std::conj(top) / mag;
    }
}

inline void verify_eigensystem(const DiscreteHamiltonian& op, const SpectralData& s) {
    const double h = s.grid.spacing();
    const int n = s.grid.total_points();

    // h-orthonormality within 1e-10
    Eigen::MatrixXcd gram = h * (s.orbitals.adjoint() * s.orbitals);
    const double ortho = (gram - Eigen::MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff();
    if (ortho > 1e-10)
        throw NumericError("diagonalize: orthonormality defect " + std::to_string(ortho));

    // residual || H phi - E phi ||_h <= 1e-9 (1 + |E|)
    Eigen::MatrixXcd resid = op.matrix * s.orbitals;
    resid.noalias() -= s.orbitals * s.energies.asDiagonal();
    const double sqrt_h = std::sqrt(h);
    for (int j = 0; j < n; ++j) {
        const double r = sqrt_h * resid.col(j).norm();
        if (r > 1e-9 * (1.0 + std::abs(s.energies[j])))
            throw NumericError("diagonalize: residual " + std::to_string(r) +
                               " at eigenvalue index " + std::to_string(j));
    }
}

} // namespace detail

/// Full dense Hermitian eigendecomposition.  Periodic/antiperiodic twists use
/// the real-symmetric representation.  Postconditions (orthonormality and
/// residual bounds) are verified before returning.
inline SpectralData diagonalize(const DiscreteHamiltonian& op) {
    const int n = op.grid.total_points();
    const double inv_sqrt_h = 1.0 / std::sqrt(op.grid.spacing());
    SpectralData s{op.grid, op.twist, {}, {}};

    if (op.twist.is_real()) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(op.matrix.real());
        if (es.info() != Eigen::Success)
            throw NumericError("diagonalize: real symmetric eigensolver failed, n = " +
                               std::to_string(n));
        s.energies = es.eigenvalues();
        s.orbitals = (es.eigenvectors() * inv_sqrt_h).cast<std::complex<double>>();
    } else {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(op.matrix);
        if (es.info() != Eigen::Success)
            throw NumericError("diagonalize: Hermitian eigensolver failed, n = " +
                               std::to_string(n));
        s.energies = es.eigenvalues();
        s.orbitals = es.eigenvectors() * inv_sqrt_h;
    }
    detail::fix_phases(s.orbitals);
    detail::verify_eigensystem(op, s);
    return s;
}

/// Per-cell mass of each eigenfunction: Phi(j, n) = sqrt(h * sum_{i in cell n}
/// |phi_j(i)|^2).  Rows sum to 1 in square.
struct LocalAmplitudes {
    Eigen::MatrixXd phi; // rows: eigenpairs, cols: cells
    std::vector<int> orbital_indices; // row -> index into the source spectrum
};

inline LocalAmplitudes local_amplitudes(const SpectralData& spec) {
    const Grid& g = spec.grid;
    const double h = g.spacing();
    const int n_eig = static_cast<int>(spec.energies.size());
    LocalAmplitudes a;
    a.phi.resize(n_eig, g.cells);
    a.orbital_indices.resize(static_cast<std::size_t>(n_eig));
    for (int j = 0; j < n_eig; ++j) {
        a.orbital_indices[static_cast<std::size_t>(j)] = j;
        for (int n = 0; n < g.cells; ++n) {
            double mass = 0.0;
            for (int i = n * g.points_per_cell; i < (n + 1) * g.points_per_cell; ++i)
                mass += std::norm(spec.orbitals(i, j));
            a.phi(j, n) = std::sqrt(h * mass);
        }
    }
    return a;
}

/// Orbital selection for the many-body state.  The boundary-condition sign is
/// fixed by parity: antiperiodic when the selected count is even, periodic
/// when odd.
struct OrbitalSelection {
    std::optional<double> mu;
    int n_plus = 0;
    int n_minus = 0;
    int count = 0;         // N (or N_mu)
    int sharp = +1;        // +1 periodic, -1 antiperiodic
    std::vector<int> indices;

    static int sharp_sign_for(int count) { return count % 2 == 1 ? +1 : -1; }
};

inline const SpectralData& sharp_spectrum(const OrbitalSelection& sel,
                                          const SpectralData& plus,
                                          const SpectralData& minus) {
    return sel.sharp > 0 ? plus : minus;
}

/// Grand-canonical selection: N_mu = min(N^+_mu, N^-_mu) lowest orbitals of
/// the sharp spectrum.  Verifies that the sharp spectrum has exactly N_mu
/// eigenvalues <= mu (a consequence of +/- interlacing).
inline OrbitalSelection select_orbitals_mu(const SpectralData& plus, const SpectralData& minus,
                                           double mu) {
    if (!(plus.grid == minus.grid))
        throw ContractViolation("select_orbitals_mu: spectra from different grids");
    OrbitalSelection sel;
    sel.mu = mu;
    sel.n_plus = plus.count_below(mu);
    sel.n_minus = minus.count_below(mu);
    sel.count = std::min(sel.n_plus, sel.n_minus);
    if (sel.count == 0)
        throw EmptySystemError("select_orbitals_mu: no orbitals below mu = " + std::to_string(mu));
    sel.sharp = OrbitalSelection::sharp_sign_for(sel.count);
    const SpectralData& sharp = sharp_spectrum(sel, plus, minus);
    if (sharp.count_below(mu) != sel.count)
        throw InvariantViolation(
            "select_orbitals_mu: sharp spectrum count " + std::to_string(sharp.count_below(mu)) +
            " != N_mu " + std::to_string(sel.count) + " (interlacing violated)");
    sel.indices.resize(static_cast<std::size_t>(sel.count));
    for (int j = 0; j < sel.count; ++j) sel.indices[static_cast<std::size_t>(j)] = j;
    return sel;
}

/// Canonical selection: lowest N orbitals of the parity-matched spectrum.
inline OrbitalSelection select_orbitals_count(const SpectralData& plus,
                                              const SpectralData& minus, int count) {
    if (count < 1 || count > plus.grid.total_points())
        throw ContractViolation("select_orbitals_count: N out of range: " + std::to_string(count));
    OrbitalSelection sel;
    sel.count = count;
    sel.sharp = OrbitalSelection::sharp_sign_for(count);
    sel.n_plus = sel.n_minus = count;
    (void)minus;
    sel.indices.resize(static_cast<std::size_t>(count));
    for (int j = 0; j < count; ++j) sel.indices[static_cast<std::size_t>(j)] = j;
    return sel;
}

/// Max relative deviation from the alternating +/- eigenvalue ordering
/// (E_j^+ <= E_j^- for odd j, >= for even j; 1-based j).  0 when the pattern
/// holds everywhere.
inline double interlacing_defect(const SpectralData& plus, const SpectralData& minus) {
    double worst = 0.0;
    for (Eigen::Index j = 0; j < plus.energies.size(); ++j) {
        const double ep = plus.energies[j];
        const double em = minus.energies[j];
        const double scale = std::max({1.0, std::abs(ep), std::abs(em)});
        const bool odd = (j % 2 == 0); // 1-based odd
        const double violation = odd ? (ep - em) : (em - ep);
        worst = std::max(worst, violation / scale);
    }
    return worst;
}

} // namespace tglab
