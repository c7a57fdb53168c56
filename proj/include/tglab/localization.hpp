#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tglab/errors.hpp"
#include "tglab/spectral.hpp"

namespace tglab {

/// Energy regime J: either (-inf, mu] or a closed band [lo, hi].
struct EnergyWindow {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();

    static EnergyWindow below(double mu) { return {-std::numeric_limits<double>::infinity(), mu}; }
    static EnergyWindow band(double a, double b) {
        if (a > b) throw ContractViolation("EnergyWindow: lo > hi");
        return {a, b};
    }
    static EnergyWindow all() { return {}; }

    bool contains(double e) const { return lo <= e && e <= hi; }
};

/// Keep only the amplitude rows whose eigenvalues fall in the window.
inline LocalAmplitudes restrict_to_window(const LocalAmplitudes& amps, const SpectralData& spec,
                                          const EnergyWindow& window) {
    std::vector<int> keep;
    for (std::size_t r = 0; r < amps.orbital_indices.size(); ++r)
        if (window.contains(spec.energies[amps.orbital_indices[r]]))
            keep.push_back(static_cast<int>(r));
    LocalAmplitudes out;
    out.phi.resize(static_cast<Eigen::Index>(keep.size()), amps.phi.cols());
    out.orbital_indices.resize(keep.size());
    for (std::size_t k = 0; k < keep.size(); ++k) {
        out.phi.row(static_cast<Eigen::Index>(k)) = amps.phi.row(keep[k]);
        out.orbital_indices[k] = amps.orbital_indices[static_cast<std::size_t>(keep[k])];
    }
    return out;
}

/// Eigenfunction correlator Q(n,m) = sum over eigenstates in the window of
/// Phi(j,n) Phi(j,m).  Symmetric, entrywise nonnegative, and
/// sum_n Q(n,n) = number of eigenvalues in the window.
struct CorrelatorMatrix {
    Eigen::MatrixXd q; // L x L
    EnergyWindow window;
    double twist_theta = 0.0;
    int states_in_window = 0;
};

inline CorrelatorMatrix correlator(const LocalAmplitudes& amps, const SpectralData& spec,
                                   const EnergyWindow& window) {
    if (amps.phi.rows() != spec.energies.size() ||
        static_cast<int>(amps.phi.cols()) != spec.grid.cells)
        throw ContractViolation("correlator: amplitudes do not match the spectrum");
    LocalAmplitudes in = restrict_to_window(amps, spec, window);
    CorrelatorMatrix c;
    c.window = window;
    c.twist_theta = spec.twist.theta;
    c.states_in_window = static_cast<int>(in.phi.rows());
    c.q.noalias() = in.phi.transpose() * in.phi; // empty window -> zero matrix
    if (in.phi.rows() == 0) c.q = Eigen::MatrixXd::Zero(spec.grid.cells, spec.grid.cells);
    return c;
}

/// Distance-binned disorder averages of correlator entries.  Bin d collects
/// all unordered cell pairs at torus distance d (including n = m at d = 0).
/// Merging partial accumulators is order-insensitive up to floating-point
/// rounding; the harness folds in a fixed order for bit reproducibility.
class EnsembleAccumulator {
public:
    EnsembleAccumulator() = default;
    explicit EnsembleAccumulator(int cells)
        : cells_(cells), sum_(static_cast<std::size_t>(cells / 2 + 1), 0.0),
          sum_sq_(static_cast<std::size_t>(cells / 2 + 1), 0.0),
          count_(static_cast<std::size_t>(cells / 2 + 1), 0) {}

    int cells() const { return cells_; }
    int bins() const { return static_cast<int>(sum_.size()); }
    int realizations() const { return realizations_; }

    void add(const CorrelatorMatrix& c) {
        if (static_cast<int>(c.q.rows()) != cells_)
            throw ContractViolation("EnsembleAccumulator: correlator size mismatch");
        for (int n = 0; n < cells_; ++n) {
            for (int m = n; m < cells_; ++m) {
                const int d = torus_distance(n, m, cells_);
                const double v = c.q(n, m);
                sum_[static_cast<std::size_t>(d)] += v;
                sum_sq_[static_cast<std::size_t>(d)] += v * v;
                count_[static_cast<std::size_t>(d)] += 1;
            }
        }
        realizations_ += 1;
    }

    void merge(const EnsembleAccumulator& other) {
        if (other.cells_ != cells_)
            throw ContractViolation("EnsembleAccumulator: merge dimension mismatch");
        for (std::size_t d = 0; d < sum_.size(); ++d) {
            sum_[d] += other.sum_[d];
            sum_sq_[d] += other.sum_sq_[d];
            count_[d] += other.count_[d];
        }
        realizations_ += other.realizations_;
    }

    double mean(int d) const {
        return count_[static_cast<std::size_t>(d)] > 0
                   ? sum_[static_cast<std::size_t>(d)] / count_[static_cast<std::size_t>(d)]
                   : 0.0;
    }

    /// Sample variance (n-1 normalization); 0 for fewer than two samples.
    double variance(int d) const {
        const auto c = count_[static_cast<std::size_t>(d)];
        if (c < 2) return 0.0;
        const double m = mean(d);
        const double raw = sum_sq_[static_cast<std::size_t>(d)] / c - m * m;
        return std::max(0.0, raw) * (static_cast<double>(c) / (static_cast<double>(c) - 1.0));
    }

    long long count(int d) const { return count_[static_cast<std::size_t>(d)]; }

private:
    int cells_ = 0;
    std::vector<double> sum_;
    std::vector<double> sum_sq_;
    std::vector<long long> count_;
    int realizations_ = 0;
};

/// Result of fitting log(mean) = log C - d^xi / ell^xi over the tail bins.
/// A near-zero fitted slope is reported as the Divergent outcome (free-like
/// flat correlator) rather than a localization length.
struct DecayFit {
    enum class Outcome { Localized, Divergent };
    Outcome outcome = Outcome::Divergent;
    double ell = std::numeric_limits<double>::quiet_NaN();
    double xi = 1.0;
    double prefactor = std::numeric_limits<double>::quiet_NaN();
    double r_squared = std::numeric_limits<double>::quiet_NaN();
    double slope = 0.0; // in d^xi units

    bool localized() const { return outcome == Outcome::Localized; }
};

struct FitOptions {
    double xi = 1.0;
    int d_min = 2;       // skip the short-distance transient
    int d_max = -1;      // default floor(L/2) - 1
    double divergence_slope = 1e-3; // |slope| below this -> Divergent
};

inline DecayFit fit_decay(const EnsembleAccumulator& acc, FitOptions opt = {}) {
    const int d_hi = opt.d_max >= 0 ? opt.d_max : acc.cells() / 2 - 1;
    if (opt.xi <= 0.0 || opt.xi > 1.0)
        throw ContractViolation("fit_decay: xi must lie in (0, 1]");

    std::vector<double> u, y;
    for (int d = opt.d_min; d <= d_hi && d < acc.bins(); ++d) {
        if (acc.count(d) == 0) continue;
        const double m = acc.mean(d);
        if (!(m > 0.0))
            throw FitDomainError("fit_decay: non-positive bin mean at distance " +
                                 std::to_string(d));
        u.push_back(std::pow(static_cast<double>(d), opt.xi));
        y.push_back(std::log(m));
    }
    if (u.size() < 4)
        throw FitDomainError("fit_decay: need at least 4 populated bins, got " +
                             std::to_string(u.size()));

    const double n = static_cast<double>(u.size());
    double su = 0, sy = 0, suu = 0, suy = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        su += u[i];
        sy += y[i];
        suu += u[i] * u[i];
        suy += u[i] * y[i];
    }
    const double denom = n * suu - su * su;
    const double b = (n * suy - su * sy) / denom;
    const double a = (sy - b * su) / n;

    double ss_res = 0, ss_tot = 0;
    const double ybar = sy / n;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double f = a + b * u[i];
        ss_res += (y[i] - f) * (y[i] - f);
        ss_tot += (y[i] - ybar) * (y[i] - ybar);
    }

    DecayFit fit;
    fit.xi = opt.xi;
    fit.slope = b;
    fit.prefactor = std::exp(a);
    fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    if (b < -opt.divergence_slope) {
        fit.outcome = DecayFit::Outcome::Localized;
        fit.ell = std::pow(-1.0 / b, 1.0 / opt.xi);
    } else {
        fit.outcome = DecayFit::Outcome::Divergent;
    }
    return fit;
}

/// Two-parameter (ell, xi) variant via a coarse scan over xi.  Ill-conditioned
/// on realistic data; prefer the fixed-xi fit.
inline DecayFit fit_decay_two_param(const EnsembleAccumulator& acc, FitOptions opt = {}) {
    DecayFit best;
    double best_r2 = -std::numeric_limits<double>::infinity();
    for (int k = 2; k <= 20; ++k) {
        FitOptions o = opt;
        o.xi = k * 0.05;
        DecayFit f = fit_decay(acc, o);
        if (f.r_squared > best_r2) {
            best_r2 = f.r_squared;
            best = f;
        }
    }
    return best;
}

/// Per-eigenfunction localization centers and the semi-uniform envelope
/// amplitude: centers are argmax cells of Phi rows (smallest index on ties);
/// the amplitude is the smallest A making
///   Phi(j,n) <= A * L^{3/2} * exp(-dist(n, center_j)^xi / ell^xi)
/// hold for every row and cell, i.e. the max of the rearranged expression.
struct EnvelopeData {
    std::vector<int> centers;
    double amplitude = 0.0;
};

inline EnvelopeData extract_envelope(const LocalAmplitudes& amps, double ell, double xi = 1.0) {
    if (!(ell > 0.0)) throw ContractViolation("extract_envelope: ell must be positive");
    const int cells = static_cast<int>(amps.phi.cols());
    const double norm = std::pow(static_cast<double>(cells), -1.5);
    EnvelopeData env;
    env.centers.resize(static_cast<std::size_t>(amps.phi.rows()));
    for (Eigen::Index j = 0; j < amps.phi.rows(); ++j) {
        Eigen::Index cmax = 0;
        amps.phi.row(j).maxCoeff(&cmax);
        env.centers[static_cast<std::size_t>(j)] = static_cast<int>(cmax);
        for (int n = 0; n < cells; ++n) {
            const double d = torus_distance(n, static_cast<int>(cmax), cells);
            const double candidate =
                amps.phi(j, n) * std::exp(std::pow(d, xi) / std::pow(ell, xi)) * norm;
            env.amplitude = std::max(env.amplitude, candidate);
        }
    }
    return env;
}

} // namespace tglab
