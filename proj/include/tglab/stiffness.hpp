#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tglab/errors.hpp"
#include "tglab/localization.hpp"
#include "tglab/operator.hpp"
#include "tglab/spectral.hpp"

namespace tglab {

/// Ground energy at chemical potential mu under the sharp boundary condition:
/// the sum of the occupied eigenvalues.  Cross-checks the equivalent form
/// mu N - sum (mu - E_j)_+ to 1e-9 relative before returning.
inline double ground_energy(const SpectralData& sharp_spec, double mu) {
    const int n_mu = sharp_spec.count_below(mu);
    if (n_mu == 0)
        throw EmptySystemError("ground_energy: no orbitals below mu = " + std::to_string(mu));
    double direct = 0.0;
    double neg_part = 0.0;
    for (int j = 0; j < n_mu; ++j) {
        direct += sharp_spec.energies[j];
        neg_part += mu - sharp_spec.energies[j];
    }
    const double alt = mu * n_mu - neg_part;
    if (std::abs(alt - direct) > 1e-9 * std::max(1.0, std::abs(direct)))
        throw InvariantViolation("ground_energy: representation identity violated: " +
                                 std::to_string(direct) + " vs " + std::to_string(alt));
    return direct;
}

/// Everything the twisted-boundary energy computation produces, so callers
/// can reuse the diagonalizations.
struct TwistAnalysis {
    double mu;
    double theta;
    int n_mu;
    int sharp;
    double theta_shifted; // twist actually applied to the operator
    double e_zero;        // untwisted (sharp) ground energy
    double e_theta;       // sum of lowest N_mu twisted eigenvalues
    double x_ratio;       // L (e_theta - e_zero) / theta^2
    SpectralData plus;
    SpectralData minus;
    SpectralData twisted;
};

inline TwistAnalysis analyze_twist(const Grid& grid, const DisorderRealization& realization,
                                   double mu, double theta) {
    if (!(theta > 0.0 && theta < std::numbers::pi))
        throw ContractViolation("analyze_twist: theta must lie in (0, pi)");

    SpectralData plus = diagonalize(assemble(grid, realization, BoundaryTwist::periodic()));
    SpectralData minus = diagonalize(assemble(grid, realization, BoundaryTwist::antiperiodic()));

    const OrbitalSelection sel = select_orbitals_mu(plus, minus, mu);
    const SpectralData& sharp = sharp_spectrum(sel, plus, minus);
    const double e_zero = ground_energy(sharp, mu);

    // twist by theta relative to the sharp boundary condition: even N_mu
    // shifts the applied phase by pi
    const double theta_shifted = sel.sharp > 0 ? theta : theta + std::numbers::pi;
    SpectralData twisted = diagonalize(assemble(grid, realization, BoundaryTwist(theta_shifted)));

    const double top_twisted = twisted.energies[sel.count - 1];
    const double top_sharp_bound =
        std::max(plus.energies[sel.count - 1], minus.energies[sel.count - 1]);
    if (top_twisted > top_sharp_bound + 1e-9 * std::max(1.0, std::abs(top_sharp_bound)))
        throw InvariantViolation(
            "analyze_twist: twisted level " + std::to_string(top_twisted) +
            " exceeds max of the periodic/antiperiodic levels " + std::to_string(top_sharp_bound));

    const double e_theta = twisted.energies.head(sel.count).sum();
    const double x_ratio = grid.length() * (e_theta - e_zero) / (theta * theta);
    if (x_ratio < -1e-9)
        throw InvariantViolation("analyze_twist: negative stiffness ratio " +
                                 std::to_string(x_ratio) + " (diamagnetic inequality)");
    return TwistAnalysis{mu,      theta,   sel.count,       sel.sharp,
                         theta_shifted,    e_zero,  e_theta, x_ratio,
                         std::move(plus),  std::move(minus), std::move(twisted)};
}

/// Sum of the lowest N_mu eigenvalues at boundary twist theta.
inline double twisted_energy(const Grid& grid, const DisorderRealization& realization, double mu,
                             double theta) {
    return analyze_twist(grid, realization, mu, theta).e_theta;
}

struct StiffnessResult {
    double mu = 0.0;
    double theta = 0.0;
    int n_mu = 0;
    double e_zero = 0.0;
    double e_theta = 0.0;
    double x_ratio = 0.0;
};

inline StiffnessResult stiffness_ratio(const Grid& grid, const DisorderRealization& realization,
                                       double mu, double theta) {
    const TwistAnalysis a = analyze_twist(grid, realization, mu, theta);
    return StiffnessResult{a.mu, a.theta, a.n_mu, a.e_zero, a.e_theta, a.x_ratio};
}

/// Connected run of cells on the torus, start in [0, cells), length >= 1.
struct CellInterval {
    int start = 0;
    int length = 0;
};

/// Largest connected torus run of cells whose amplitude is <= delta.
/// Ties resolve to the run with the smallest starting cell.
inline CellInterval flat_region(const Eigen::VectorXd& amplitude_row, double delta) {
    if (!(delta > 0.0)) throw ContractViolation("flat_region: delta must be positive");
    const int cells = static_cast<int>(amplitude_row.size());
    std::vector<char> ok(static_cast<std::size_t>(cells));
    int total_ok = 0;
    for (int n = 0; n < cells; ++n) {
        ok[static_cast<std::size_t>(n)] = amplitude_row[n] <= delta;
        total_ok += ok[static_cast<std::size_t>(n)];
    }
    if (total_ok == 0)
        throw ConstructionError("flat_region: no cell has amplitude <= " + std::to_string(delta));
    if (total_ok == cells) return CellInterval{0, cells};

    CellInterval best{0, 0};
    for (int s = 0; s < cells; ++s) {
        if (!ok[static_cast<std::size_t>(s)] ||
            ok[static_cast<std::size_t>((s + cells - 1) % cells)])
            continue; // not the start of a maximal run
        int len = 0;
        while (len < cells && ok[static_cast<std::size_t>((s + len) % cells)]) ++len;
        if (len > best.length) best = CellInterval{s, len};
    }
    return best;
}

/// Variational upper-bound data for one realization.
struct TrialBound {
    double delta = 0.0;
    double direct_value = 0.0;     // mu N + tr[(H(theta_mu) - mu) gamma_trial]
    double y_bound = 0.0;          // explicit closed-form upper bound on X_L
    double gamma_tilde_norm = 0.0; // operator norm of the unnormalized trial
    std::vector<CellInterval> regions;
    Eigen::VectorXd gram_eigenvalues; // spectrum of the unnormalized trial state
};

namespace detail {

// Increasing phase profile accumulating total increment theta across [0, L],
// rising linearly over the given torus run of cells and constant elsewhere.
inline double phase_at(double x, const CellInterval& region, double theta, int cells) {
    const double a = region.start;
    const double len = region.length;
    const double slope = theta / len;
    if (a + len <= static_cast<double>(cells)) {
        if (x <= a) return 0.0;
        if (x >= a + len) return theta;
        return slope * (x - a);
    }
    const double c = a + len - cells; // wrapped tail [0, c)
    if (x < c) return slope * x;
    if (x <= a) return slope * c;
    return slope * (c + (x - a));
}

} // namespace detail

/// Build the phase-twisted trial density matrix from the occupied orbitals of
/// the sharp spectrum and evaluate (a) the variational energy against the
/// twisted operator, (b) the norm of the unnormalized trial, and (c) the
/// closed-form bound Y on the stiffness ratio.
inline TrialBound trial_energy(const SpectralData& sharp_spec,
                               const DiscreteHamiltonian& twisted_op, double mu, double theta,
                               double delta) {
    if (!(delta > 0.0)) throw ContractViolation("trial_energy: delta must be positive");
    if (!(theta > 0.0 && theta < std::numbers::pi))
        throw ContractViolation("trial_energy: theta must lie in (0, pi)");
    const Grid& grid = sharp_spec.grid;
    const int n_mu = sharp_spec.count_below(mu);
    if (n_mu == 0)
        throw EmptySystemError("trial_energy: no orbitals below mu");

    const LocalAmplitudes amps = local_amplitudes(sharp_spec);

    TrialBound out;
    out.delta = delta;
    out.regions.reserve(static_cast<std::size_t>(n_mu));
    for (int j = 0; j < n_mu; ++j) {
        try {
            out.regions.push_back(flat_region(amps.phi.row(j).transpose(), delta));
        } catch (const ConstructionError&) {
            throw ConstructionError("trial_energy: flat region construction failed for orbital " +
                                    std::to_string(j) + " at delta = " + std::to_string(delta));
        }
    }

    const int n_g = grid.total_points();
    const double h = grid.spacing();
    Eigen::MatrixXcd twisted_orbitals(n_g, n_mu);
    for (int j = 0; j < n_mu; ++j) {
        for (int i = 0; i < n_g; ++i) {
            const double psi =
                detail::phase_at(grid.coord(i), out.regions[static_cast<std::size_t>(j)], theta,
                                 grid.cells);
            twisted_orbitals(i, j) = std::polar(1.0, psi) * sharp_spec.orbitals(i, j);
        }
    }

    // norm of the unnormalized trial via its N_mu x N_mu Gram
    const Eigen::MatrixXcd gram = h * (twisted_orbitals.adjoint() * twisted_orbitals);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(gram);
    if (es.info() != Eigen::Success)
        throw NumericError("trial_energy: Gram eigensolver failed");
    out.gram_eigenvalues = es.eigenvalues();
    out.gamma_tilde_norm = es.eigenvalues().maxCoeff();

    const double norm_bound = 1.0 + 2.0 * std::abs(theta) * delta * grid.length() * n_mu;
    if (out.gamma_tilde_norm > norm_bound + 1e-9)
        throw InvariantViolation("trial_energy: trial norm " +
                                 std::to_string(out.gamma_tilde_norm) + " exceeds bound " +
                                 std::to_string(norm_bound));

    const double scale = std::max(out.gamma_tilde_norm, 1.0);
    double quad = 0.0;
    for (int j = 0; j < n_mu; ++j) {
        const Eigen::VectorXcd u = twisted_orbitals.col(j);
        quad += std::real(Complex(u.adjoint() * (twisted_op.matrix * u))) * h - mu;
    }
    out.direct_value = mu * n_mu + quad / scale;

    double trace_neg = 0.0; // tr [H_sharp - mu]_-
    for (int j = 0; j < n_mu; ++j) trace_neg += mu - sharp_spec.energies[j];
    const double length = grid.length();
    out.y_bound = (2.0 * delta * length * length / std::abs(theta)) * trace_neg * n_mu +
                  4.0 * length * delta * delta * n_mu / (length - 4.0);
    return out;
}

/// Default trial threshold from measured envelope data:
/// delta = A * L^{3/2} * exp(-L^xi / (4 ell)^xi).
inline double default_trial_delta(double amplitude, double ell, double xi, int cells) {
    if (!(ell > 0.0)) throw ContractViolation("default_trial_delta: ell must be positive");
    const double length = static_cast<double>(cells);
    return amplitude * std::pow(length, 1.5) *
           std::exp(-std::pow(length, xi) / std::pow(4.0 * ell, xi));
}

} // namespace tglab
