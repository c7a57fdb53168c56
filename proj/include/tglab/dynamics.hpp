#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tglab/errors.hpp"
#include "tglab/localization.hpp"
#include "tglab/operator.hpp"
#include "tglab/spectral.hpp"

namespace tglab {

/// A set of unit cells on the ring.
struct CellSet {
    std::vector<int> cells; // sorted, unique

    static CellSet range(int from, int to) { // half-open [from, to)
        CellSet s;
        for (int c = from; c < to; ++c) s.cells.push_back(c);
        return s;
    }

    bool empty() const { return cells.empty(); }

    bool intersects(const CellSet& other) const {
        for (int c : cells)
            if (std::binary_search(other.cells.begin(), other.cells.end(), c)) return true;
        return false;
    }

    std::vector<int> grid_indices(const Grid& g) const {
        std::vector<int> idx;
        idx.reserve(cells.size() * static_cast<std::size_t>(g.points_per_cell));
        for (int c : cells)
            for (int i = c * g.points_per_cell; i < (c + 1) * g.points_per_cell; ++i)
                idx.push_back(i);
        return idx;
    }
};

/// One-body occupation matrix in the eigenbasis, stored in factored form
/// Gamma = A A^+ restricted to the eigenvalues inside the window, so
/// 0 <= Gamma <= 1 holds by construction and densities stay nonnegative.
struct InitialOccupation {
    std::vector<int> window_indices; // eigenindices spanned by Gamma
    Eigen::MatrixXcd factor;         // (#window) x rank
    double trace() const { return factor.squaredNorm(); }
};

/// Occupation = projector onto an explicit eigenpair subset (stationary).
inline InitialOccupation eigen_subset(const SpectralData& spec, const std::vector<int>& indices) {
    InitialOccupation occ;
    occ.window_indices = indices;
    for (int j : indices)
        if (j < 0 || j >= spec.energies.size())
            throw ContractViolation("eigen_subset: eigenindex out of range");
    occ.factor = Eigen::MatrixXcd::Identity(static_cast<Eigen::Index>(indices.size()),
                                            static_cast<Eigen::Index>(indices.size()));
    return occ;
}

/// Prepare `count` particles in the lowest Dirichlet orbitals of the operator
/// restricted to the trap cells (walls realized by deleting the outside
/// rows/columns), then project onto the energy window:
/// Gamma = P_J Pi P_J.  The trace reports how much weight the window kept.
inline InitialOccupation trap_initial_state(const SpectralData& spec,
                                            const DiscreteHamiltonian& op, const CellSet& trap,
                                            int count, const EnergyWindow& window) {
    if (trap.empty()) throw ConstructionError("trap_initial_state: empty trap");
    if (!(spec.grid == op.grid))
        throw ContractViolation("trap_initial_state: spectrum and operator grids differ");

    const std::vector<int> sub = trap.grid_indices(spec.grid);
    const int n_sub = static_cast<int>(sub.size());
    if (count < 1 || count > n_sub)
        throw ContractViolation("trap_initial_state: count must be in [1, #trap orbitals]");

    Eigen::MatrixXcd h_sub(n_sub, n_sub);
    for (int r = 0; r < n_sub; ++r)
        for (int c = 0; c < n_sub; ++c) h_sub(r, c) = op.matrix(sub[static_cast<std::size_t>(r)],
                                                                sub[static_cast<std::size_t>(c)]);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h_sub);
    if (es.info() != Eigen::Success)
        throw NumericError("trap_initial_state: Dirichlet eigensolver failed");

    const double inv_sqrt_h = 1.0 / std::sqrt(spec.grid.spacing());
    Eigen::MatrixXcd trapped = Eigen::MatrixXcd::Zero(spec.grid.total_points(), count);
    for (int r = 0; r < count; ++r)
        for (int i = 0; i < n_sub; ++i)
            trapped(sub[static_cast<std::size_t>(i)], r) = es.eigenvectors()(i, r) * inv_sqrt_h;

    InitialOccupation occ;
    for (int j = 0; j < spec.energies.size(); ++j)
        if (window.contains(spec.energies[j])) occ.window_indices.push_back(j);
    if (occ.window_indices.empty())
        throw ConstructionError("trap_initial_state: no eigenvalues inside the window");

    const double h = spec.grid.spacing();
    occ.factor.resize(static_cast<Eigen::Index>(occ.window_indices.size()), count);
    for (std::size_t r = 0; r < occ.window_indices.size(); ++r)
        occ.factor.row(static_cast<Eigen::Index>(r)) =
            h * (spec.orbitals.col(occ.window_indices[r]).adjoint() * trapped);
    return occ;
}

/// Advance the occupation by time t (free-fermion evolution is diagonal in
/// the eigenbasis).
inline InitialOccupation advance(const SpectralData& spec, const InitialOccupation& occ,
                                 double t) {
    InitialOccupation out = occ;
    for (std::size_t r = 0; r < occ.window_indices.size(); ++r) {
        const double e = spec.energies[occ.window_indices[r]];
        out.factor.row(static_cast<Eigen::Index>(r)) *= std::polar(1.0, -e * t);
    }
    return out;
}

/// Particle density on the grid at a list of times.
struct DensityTrajectory {
    Grid grid;
    std::vector<double> times;
    Eigen::MatrixXd densities; // row per time, column per grid point

    double total(int t_idx) const { return grid.spacing() * densities.row(t_idx).sum(); }

    double region_number(int t_idx, const CellSet& region) const {
        double acc = 0.0;
        for (int i : region.grid_indices(grid)) acc += densities(t_idx, i);
        return grid.spacing() * acc;
    }
};

/// rho_t(x) = sum_{jk} phi_j(x) e^{-i(E_j - E_k) t} Gamma_{jk} conj(phi_k(x)),
/// evaluated through the factored form as a row-wise squared norm, which
/// keeps the density exactly nonnegative.  Total particle number is conserved
/// to 1e-9 and verified per time.
inline DensityTrajectory evolve_density(const SpectralData& spec, const InitialOccupation& occ,
                                        const std::vector<double>& times) {
    const int n_g = spec.grid.total_points();
    const int n_w = static_cast<int>(occ.window_indices.size());

    Eigen::MatrixXcd modes(n_g, n_w);
    Eigen::VectorXd energies(n_w);
    for (int r = 0; r < n_w; ++r) {
        modes.col(r) = spec.orbitals.col(occ.window_indices[static_cast<std::size_t>(r)]);
        energies[r] = spec.energies[occ.window_indices[static_cast<std::size_t>(r)]];
    }

    DensityTrajectory traj{spec.grid, times, Eigen::MatrixXd(times.size(), n_g)};
    for (std::size_t ti = 0; ti < times.size(); ++ti) {
        Eigen::VectorXcd phases(n_w);
        for (int r = 0; r < n_w; ++r) phases[r] = std::polar(1.0, -energies[r] * times[ti]);
        const Eigen::MatrixXcd evolved = modes * (phases.asDiagonal() * occ.factor);
        traj.densities.row(static_cast<Eigen::Index>(ti)) =
            evolved.rowwise().squaredNorm().transpose();
    }

    const double n0 = traj.total(0);
    for (std::size_t ti = 1; ti < times.size(); ++ti) {
        const double nt = traj.total(static_cast<int>(ti));
        if (std::abs(nt - n0) > 1e-9 * std::max(1.0, std::abs(n0)))
            throw InvariantViolation("evolve_density: particle number drifted from " +
                                     std::to_string(n0) + " to " + std::to_string(nt));
    }
    return traj;
}

/// Largest sampled change of the particle number in a region.
inline double transport_deviation(const DensityTrajectory& traj, const CellSet& region) {
    const double n0 = traj.region_number(0, region);
    double dev = 0.0;
    for (std::size_t ti = 0; ti < traj.times.size(); ++ti)
        dev = std::max(dev, std::abs(traj.region_number(static_cast<int>(ti), region) - n0));
    return dev;
}

/// Largest sampled particle number in a far region disjoint from the trap.
inline double leakage(const DensityTrajectory& traj, const CellSet& far, const CellSet& trap) {
    if (far.intersects(trap))
        throw ContractViolation("leakage: far region overlaps the trap");
    double peak = 0.0;
    for (std::size_t ti = 0; ti < traj.times.size(); ++ti)
        peak = std::max(peak, traj.region_number(static_cast<int>(ti), far));
    return peak;
}

/// {0} followed by a doubling grid t0, 2 t0, ... capped and terminated at t_max.
inline std::vector<double> log_time_grid(double t0, double t_max) {
    std::vector<double> times{0.0};
    for (double t = t0; t < t_max; t *= 2.0) times.push_back(t);
    times.push_back(t_max);
    return times;
}

} // namespace tglab
