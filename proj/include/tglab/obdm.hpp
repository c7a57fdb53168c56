#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "tglab/errors.hpp"
#include "tglab/rng.hpp"
#include "tglab/spectral.hpp"

namespace tglab {

/// Evaluation grid for the one-body density matrix: m_s sample points per
/// unit cell, every (M/m_s)-th grid point, so every eval point lies on the
/// underlying grid.  The continuum quadrature weight per eval point is 1/m_s.
struct EvalGrid {
    Grid grid;
    int samples_per_cell; // m_s

    static EvalGrid make(const Grid& grid, int samples_per_cell) {
        if (samples_per_cell < 1 || grid.points_per_cell % samples_per_cell != 0)
            throw ConfigError("EvalGrid: m_s must divide M (got m_s = " +
                              std::to_string(samples_per_cell) + ", M = " +
                              std::to_string(grid.points_per_cell) + ")");
        return EvalGrid{grid, samples_per_cell};
    }

    int stride() const { return grid.points_per_cell / samples_per_cell; }
    int total() const { return grid.cells * samples_per_cell; }
    int grid_index(int k) const { return k * stride(); }
    double coord(int k) const { return grid.coord(grid_index(k)); }
    int cell_of(int k) const { return k / samples_per_cell; }
    double weight() const { return 1.0 / samples_per_cell; }
};

/// Streaming prefix table of orbital overlaps.  snapshot(k) holds
///   S(k)_{ab} = h * sum_{l < grid_index(k)} phi_a(l) conj(phi_b(l))
/// for the selected orbitals, for k = 0 .. total (k = total is the full-ring
/// Gram, equal to the identity up to eigensolver round-off).  Built in one
/// O(n_g N^2) pass; storage only at eval-point boundaries.
class OverlapPrefix {
public:
    OverlapPrefix(const SpectralData& spec, const OrbitalSelection& sel, const EvalGrid& eval)
        : OverlapPrefix(selected_orbitals(spec, sel), eval) {}

    /// Low-level constructor from explicit orbital columns (n_g x N).  Used
    /// directly by basis-invariance checks that mix orbitals by a unitary.
    OverlapPrefix(const Eigen::MatrixXcd& orbitals, const EvalGrid& eval)
        : eval_(eval), orbital_count_(static_cast<int>(orbitals.cols())) {
        const int n_g = eval.grid.total_points();
        if (orbitals.rows() != n_g)
            throw ContractViolation("OverlapPrefix: orbital rows do not match the grid");
        const int n = orbital_count_;
        const double h = eval.grid.spacing();
        const int stride = eval.stride();

        snapshots_.reserve(static_cast<std::size_t>(eval.total()) + 1);
        values_.resize(n, eval.total());

        Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(n, n);
        int next_eval = 0;
        for (int l = 0; l <= n_g; ++l) {
            if (next_eval * stride == l && next_eval <= eval.total() - 1) {
                snapshots_.push_back(acc);
                values_.col(next_eval) = orbitals.row(l).transpose();
                ++next_eval;
            }
            if (l == n_g) break;
            const Eigen::VectorXcd row = orbitals.row(l).transpose();
            acc.noalias() += h * (row * row.adjoint());
        }
        snapshots_.push_back(acc); // k = total: full-ring Gram
    }

    int orbital_count() const { return orbital_count_; }
    const EvalGrid& eval() const { return eval_; }
    const Eigen::MatrixXcd& snapshot(int k) const {
        return snapshots_[static_cast<std::size_t>(k)];
    }
    /// phi_a evaluated at eval point k, as a column vector over a.
    Eigen::VectorXcd orbital_values(int k) const { return values_.col(k); }

    double ring_gram_defect() const {
        const Eigen::MatrixXcd& g = snapshots_.back();
        return (g - Eigen::MatrixXcd::Identity(orbital_count_, orbital_count_))
            .cwiseAbs()
            .maxCoeff();
    }

private:
    static Eigen::MatrixXcd selected_orbitals(const SpectralData& spec,
                                              const OrbitalSelection& sel) {
        Eigen::MatrixXcd out(spec.grid.total_points(), sel.indices.size());
        for (std::size_t c = 0; c < sel.indices.size(); ++c) {
            const int j = sel.indices[c];
            if (j < 0 || j >= spec.energies.size())
                throw ContractViolation("OverlapPrefix: orbital index out of range");
            out.col(static_cast<Eigen::Index>(c)) = spec.orbitals.col(j);
        }
        return out;
    }

    EvalGrid eval_{Grid(5, 4), 1};
    int orbital_count_ = 0;
    std::vector<Eigen::MatrixXcd> snapshots_;
    Eigen::MatrixXcd values_; // N x total, orbital values at eval points
};

/// K(x,y) = I - 2 (S(j) - S(i)) for eval indices i <= j: the identity minus
/// twice the orbital Gram over [x, y).  Hermitian with spectrum in [-1, 1]
/// up to round-off; K(x,x) is the identity exactly.
inline Eigen::MatrixXcd k_matrix(const OverlapPrefix& prefix, int i, int j) {
    if (i > j)
        throw ContractViolation("k_matrix: i > j; use Hermitian symmetry instead of wrapping");
    const int n = prefix.orbital_count();
    Eigen::MatrixXcd k = Eigen::MatrixXcd::Identity(n, n);
    k.noalias() -= 2.0 * (prefix.snapshot(j) - prefix.snapshot(i));
    return k;
}

namespace detail {

// Bordered determinant evaluation of gamma(x, y) for eval indices i <= j.
//
// The exact rectangle-rule counterpart of the continuum determinant formula
// carries half-weighted interval endpoints (the pair sign function vanishes
// at coincident coordinates, as does the Slater determinant), which amounts
// to rank-one endpoint corrections of the prefix-difference Gram:
//   K_s = I - 2 (S(j) - S(i)) + h vx vx^+ - h vy vy^+ .
// gamma is then -det of K_s bordered by phi(x) in the first column and
// conj(phi(y)) in the first row; the sign and orientation are pinned by
// gamma(x,x) = sum |phi(x)|^2 and the small-N quadrature oracle.
inline Complex gamma_ordered(const OverlapPrefix& prefix, int i, int j) {
    const int n = prefix.orbital_count();
    const double h = prefix.eval().grid.spacing();
    const Eigen::VectorXcd vx = prefix.orbital_values(i);
    const Eigen::VectorXcd vy = prefix.orbital_values(j);

    Eigen::MatrixXcd core = k_matrix(prefix, i, j);
    if (i != j) {
        core.noalias() += h * (vx * vx.adjoint());
        core.noalias() -= h * (vy * vy.adjoint());
    }

    Eigen::MatrixXcd bordered = Eigen::MatrixXcd::Zero(n + 1, n + 1);
    bordered(0, 0) = Complex(0.0, 0.0);
    bordered.block(0, 1, 1, n) = vy.adjoint();      // conj(phi_b(y)) along the top row
    bordered.block(1, 0, n, 1) = vx;                // phi_a(x) down the first column
    bordered.block(1, 1, n, n) = core;

    const Complex det = bordered.partialPivLu().determinant();
    if (!std::isfinite(det.real()) || !std::isfinite(det.imag()))
        throw NumericError("gamma_point: determinant factorization produced a non-finite value");
    return -det;
}

} // namespace detail

/// One-body density matrix kernel value at a pair of eval points; internally
/// orders the pair and uses Hermitian symmetry for x > y.
inline Complex gamma_point(const OverlapPrefix& prefix, int x, int y) {
    if (x <= y) return detail::gamma_ordered(prefix, x, y);
    return std::conj(detail::gamma_ordered(prefix, y, x));
}

/// Bosonic one-body density matrix sampled on the eval grid.  Hermitian by
/// construction; quadrature weight 1/m_s per point.
struct ObdmKernel {
    EvalGrid eval;
    Eigen::MatrixXcd values;
    int orbital_countN = 0;
    int sharp = +1;

    double weight() const { return eval.weight(); }

    /// w * sum_x gamma(x, x): continuum trace, approximately the particle number.
    double weighted_trace() const { return weight() * values.diagonal().real().sum(); }

    /// Eigenvalues of the w-weighted kernel matrix (the operator spectrum of
    /// gamma under rectangle quadrature), ascending.
    Eigen::VectorXd weighted_eigenvalues() const {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(weight() * values);
        if (es.info() != Eigen::Success)
            throw NumericError("ObdmKernel: eigensolver failed on weighted kernel");
        return es.eigenvalues();
    }
};

inline ObdmKernel gamma_kernel(const OverlapPrefix& prefix, const OrbitalSelection& sel) {
    const EvalGrid& eval = prefix.eval();
    const int p = eval.total();
    ObdmKernel k{eval, Eigen::MatrixXcd(p, p), sel.count, sel.sharp};
    for (int i = 0; i < p; ++i) {
        for (int j = i; j < p; ++j) {
            const Complex g = detail::gamma_ordered(prefix, i, j);
            k.values(i, j) = g;
            k.values(j, i) = std::conj(g);
        }
    }
    return k;
}

/// Hilbert-Schmidt norm of the kernel block between unit cells n and m:
/// sqrt( sum_{x in I_n, y in I_m} |gamma(x,y)|^2 w^2 ).
inline double block_hs_norm(const ObdmKernel& kernel, int n, int m) {
    const int ms = kernel.eval.samples_per_cell;
    const int cells = kernel.eval.grid.cells;
    if (n < 0 || n >= cells || m < 0 || m >= cells)
        throw ContractViolation("block_hs_norm: cell index out of range");
    return kernel.weight() * kernel.values.block(n * ms, m * ms, ms, ms).norm();
}

/// Largest eigenvalue of the w-weighted kernel.  Dense solve up to
/// dense_threshold points, deterministic power iteration beyond.
inline double largest_eigenvalue(const ObdmKernel& kernel, int dense_threshold = 2048) {
    const int p = kernel.eval.total();
    const Eigen::MatrixXcd a = kernel.weight() * kernel.values;
    if (p <= dense_threshold) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(a);
        if (es.info() != Eigen::Success)
            throw NumericError("largest_eigenvalue: dense eigensolver failed");
        return es.eigenvalues().maxCoeff();
    }
    Eigen::VectorXcd v = Eigen::VectorXcd::Ones(p) / std::sqrt(static_cast<double>(p));
    double lambda = 0.0;
    for (int it = 0; it < 10000; ++it) {
        Eigen::VectorXcd w = a * v;
        const double nw = w.norm();
        if (nw == 0.0) return 0.0;
        w /= nw;
        const double next = std::real(Complex(w.adjoint() * (a * w)));
        if (std::abs(next - lambda) <= 1e-8 * std::max(1.0, std::abs(next))) return next;
        lambda = next;
        v = std::move(w);
    }
    throw NumericError("largest_eigenvalue: power iteration did not converge");
}

/// Momentum distribution n(k) = (1/L) sum_{x,y} e^{ik(x-y)} gamma(x,y) w^2 at
/// ring momenta k = 2 pi q / L.  Imaginary parts beyond 1e-8 signal a broken
/// Hermitian kernel.
inline std::vector<std::pair<double, double>> momentum_distribution(
    const ObdmKernel& kernel, const std::vector<int>& modes) {
    const int p = kernel.eval.total();
    const double length = kernel.eval.grid.length();
    const double w = kernel.weight();
    std::vector<std::pair<double, double>> out;
    out.reserve(modes.size());
    for (int q : modes) {
        const double k = 2.0 * std::numbers::pi * q / length;
        Eigen::VectorXcd e(p);
        for (int x = 0; x < p; ++x)
            e[x] = std::polar(1.0, k * kernel.eval.coord(x));
        const Complex val =
            (e.transpose() * kernel.values * e.conjugate())(0, 0) * (w * w / length);
        if (std::abs(val.imag()) > 1e-8)
            throw InvariantViolation("momentum_distribution: imaginary part " +
                                     std::to_string(val.imag()) + " at mode " + std::to_string(q));
        out.emplace_back(k, val.real());
    }
    return out;
}

namespace detail {

inline int sign_of(int a, int b) { return a < b ? -1 : (a > b ? 1 : 0); }

inline Complex det_cols(const Eigen::MatrixXcd& orbs, const int* pts, int n) {
    // determinant of phi_a(x_b) for the n selected orbital columns
    if (n == 1) return orbs(pts[0], 0);
    if (n == 2)
        return orbs(pts[0], 0) * orbs(pts[1], 1) - orbs(pts[1], 0) * orbs(pts[0], 1);
    // n == 3
    return orbs(pts[0], 0) * (orbs(pts[1], 1) * orbs(pts[2], 2) - orbs(pts[2], 1) * orbs(pts[1], 2)) -
           orbs(pts[0], 1) * (orbs(pts[1], 0) * orbs(pts[2], 2) - orbs(pts[2], 0) * orbs(pts[1], 2)) +
           orbs(pts[0], 2) * (orbs(pts[1], 0) * orbs(pts[2], 1) - orbs(pts[2], 0) * orbs(pts[1], 1));
}

} // namespace detail

/// Quadrature oracle for the density matrix at small particle number: builds
/// the symmetrized wavefunction
///   Psi(x_1..x_N) = (1/sqrt(N!)) det(phi_a(x_b)) prod_{j<k} sign(x_j - x_k)
/// and integrates N Psi(x, .) conj(Psi(y, .)) by the rectangle rule, with the
/// internal coordinates running over the full grid so the quadrature matches
/// the prefix-table path exactly.  x and y range over the eval grid.
/// Cost (L M)^{N-1} per point pair; restricted to N <= 3.
inline ObdmKernel brute_force_gamma(const SpectralData& spec, const OrbitalSelection& sel,
                                    const EvalGrid& eval) {
    const int n_orb = sel.count;
    if (n_orb > 3)
        throw ContractViolation("brute_force_gamma: N must be <= 3, got " + std::to_string(n_orb));

    const int n_g = spec.grid.total_points();
    const double h = spec.grid.spacing();
    Eigen::MatrixXcd orbs(n_g, n_orb);
    for (int c = 0; c < n_orb; ++c) orbs.col(c) = spec.orbitals.col(sel.indices[static_cast<std::size_t>(c)]);

    const int p = eval.total();
    ObdmKernel kernel{eval, Eigen::MatrixXcd(p, p), n_orb, sel.sharp};

    double factorial = 1.0;
    for (int i = 2; i < n_orb; ++i) factorial *= i; // (N-1)!
    const double measure = std::pow(h, n_orb - 1) / factorial;

    for (int a = 0; a < p; ++a) {
        const int gx = eval.grid_index(a);
        for (int b = a; b < p; ++b) {
            const int gy = eval.grid_index(b);
            Complex acc(0.0, 0.0);
            if (n_orb == 1) {
                acc = orbs(gx, 0) * std::conj(orbs(gy, 0));
            } else if (n_orb == 2) {
                for (int z = 0; z < n_g; ++z) {
                    const int s = detail::sign_of(z, gx) * detail::sign_of(z, gy);
                    if (s == 0) continue;
                    int px[2] = {gx, z};
                    int py[2] = {gy, z};
                    acc += static_cast<double>(s) * detail::det_cols(orbs, px, 2) *
                           std::conj(detail::det_cols(orbs, py, 2));
                }
            } else {
                for (int z1 = 0; z1 < n_g; ++z1) {
                    const int s1 = detail::sign_of(z1, gx) * detail::sign_of(z1, gy);
                    if (s1 == 0) continue;
                    for (int z2 = 0; z2 < n_g; ++z2) {
                        const int s2 = detail::sign_of(z2, gx) * detail::sign_of(z2, gy);
                        if (s2 == 0 || z1 == z2) continue;
                        int px[3] = {gx, z1, z2};
                        int py[3] = {gy, z1, z2};
                        acc += static_cast<double>(s1 * s2) * detail::det_cols(orbs, px, 3) *
                               std::conj(detail::det_cols(orbs, py, 3));
                    }
                }
            }
            const Complex g = measure * acc;
            kernel.values(a, b) = g;
            kernel.values(b, a) = std::conj(g);
        }
    }
    return kernel;
}

/// Adjugate of K computed entrywise as signed bordered determinants with unit
/// border vectors (the same orientation gamma_point uses).  For validating
/// the structural norm bound ||adj K|| <= 1; O(N^5), intended for small N.
inline Eigen::MatrixXcd adjugate_via_bordered(const Eigen::MatrixXcd& k) {
    const int n = static_cast<int>(k.rows());
    Eigen::MatrixXcd adj(n, n);
    Eigen::MatrixXcd bordered = Eigen::MatrixXcd::Zero(n + 1, n + 1);
    bordered.block(1, 1, n, n) = k;
    for (int beta = 0; beta < n; ++beta) {
        for (int alpha = 0; alpha < n; ++alpha) {
            bordered.block(0, 1, 1, n).setZero();
            bordered.block(1, 0, n, 1).setZero();
            bordered(0, 1 + beta) = Complex(1.0, 0.0);
            bordered(1 + alpha, 0) = Complex(1.0, 0.0);
            adj(beta, alpha) = -bordered.partialPivLu().determinant();
        }
    }
    return adj;
}

/// Randomized check of the structured-determinant bound
///   |det [[0, v^T, 0], [0, A, B], [w, C, D]]| <= sqrt(e) ||v|| ||w|| ||B||
/// for contractions K = [[A, B], [C, D]] with ||K|| <= 1.  K is drawn as a
/// random Hermitian scaled to unit spectral norm and conjugated by a random
/// unitary; v and w are complex Gaussians.
struct BorderedBoundReport {
    int trials = 0;
    int violations = 0;
    double max_ratio = 0.0;
    std::string worst_instance; // serialized offending instance, empty if none

    bool passed() const { return violations == 0; }
};

inline BorderedBoundReport bordered_bound_trials(int p, int q, int trials, std::uint64_t seed) {
    if (p < 1 || q < 1) throw ContractViolation("bordered_bound_trials: p, q must be >= 1");
    rng::Counter gen(seed);
    const int n = p + q;
    BorderedBoundReport report;
    report.trials = trials;

    for (int t = 0; t < trials; ++t) {
        Eigen::MatrixXcd g(n, n);
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) g(r, c) = Complex(gen.normal(), gen.normal());
        Eigen::MatrixXcd herm = 0.5 * (g + g.adjoint());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(herm);
        const double norm = es.eigenvalues().cwiseAbs().maxCoeff();
        herm /= norm;

        Eigen::MatrixXcd g2(n, n);
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) g2(r, c) = Complex(gen.normal(), gen.normal());
        Eigen::MatrixXcd unitary = Eigen::HouseholderQR<Eigen::MatrixXcd>(g2).householderQ();
        const Eigen::MatrixXcd contraction = unitary * herm * unitary.adjoint();

        Eigen::VectorXcd v(p), w(q);
        for (int r = 0; r < p; ++r) v[r] = Complex(gen.normal(), gen.normal());
        for (int r = 0; r < q; ++r) w[r] = Complex(gen.normal(), gen.normal());

        Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(1 + n, 1 + n);
        m.block(0, 1, 1, p) = v.transpose();
        m.block(1, 1, n, n) = contraction;
        m.block(1 + p, 0, q, 1) = w;

        const double lhs = std::abs(m.partialPivLu().determinant());
        const Eigen::MatrixXcd b = contraction.block(0, p, p, q);
        const double b_norm = Eigen::JacobiSVD<Eigen::MatrixXcd>(b).singularValues()(0);
        const double rhs = std::sqrt(std::numbers::e) * v.norm() * w.norm() * b_norm;

        const double ratio = rhs > 0.0 ? lhs / rhs : (lhs > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
        report.max_ratio = std::max(report.max_ratio, ratio);
        const double slack = 1e-12 * std::max(1.0, v.norm() * w.norm());
        if (lhs > rhs + slack) {
            report.violations += 1;
            if (report.worst_instance.empty()) {
                std::string s = "trial " + std::to_string(t) + ": |det| = " + std::to_string(lhs) +
                                ", bound = " + std::to_string(rhs) + ", K diag =";
                for (int r = 0; r < n; ++r)
                    s += " " + std::to_string(contraction(r, r).real());
                report.worst_instance = s;
            }
        }
    }
    return report;
}

} // namespace tglab
