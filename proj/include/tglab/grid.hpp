#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "tglab/errors.hpp"
#include "tglab/rng.hpp"

namespace tglab {

/// Uniform grid on the ring [0, L) with integer length L and M points per
/// unit cell.  Grid points sit at the left endpoints x_i = i*h, h = 1/M, so
/// unit cell n (0-based) owns indices n*M .. (n+1)*M-1 and rectangle-rule
/// sums with weight h are exact prefix sums over index ranges.
struct Grid {
    int cells;           // ring length L (integer number of unit cells)
    int points_per_cell; // M

    Grid(int length, int points)
        : cells(length), points_per_cell(points) {
        if (length < 5)
            throw ConfigError("Grid: ring length must be >= 5, got " + std::to_string(length));
        if (points < 4)
            throw ConfigError("Grid: points per cell must be >= 4, got " + std::to_string(points));
    }

    double spacing() const { return 1.0 / points_per_cell; }
    int total_points() const { return cells * points_per_cell; }
    double length() const { return static_cast<double>(cells); }
    double coord(int i) const { return i * spacing(); }
    int cell_of(int i) const { return i / points_per_cell; }

    bool operator==(const Grid& o) const {
        return cells == o.cells && points_per_cell == o.points_per_cell;
    }
};

/// Euclidean distance between cells n and m on the length-L torus.
inline int torus_distance(int n, int m, int length) {
    int d = n - m;
    if (d < 0) d = -d;
    d %= length;
    return d <= length - d ? d : length - d;
}

/// Random potential family.  Alloy variants place one i.i.d. uniform[0,v_max]
/// coupling per unit cell on a single-site profile supported on [0,1];
/// an optional 1-periodic background can be added to any variant.
struct PotentialModel {
    enum class Kind { Zero, AlloyStep, AlloyBump };

    Kind kind = Kind::Zero;
    double v_max = 0.0;
    std::function<double(double)> profile;    // single-site U on [0,1]
    std::function<double(double)> background; // 1-periodic W, may be empty

    static PotentialModel zero() { return {}; }

    static PotentialModel alloy_step(double v_max) {
        PotentialModel m;
        m.kind = Kind::AlloyStep;
        m.v_max = v_max;
        return m;
    }

    // Default bump: U(t) = 4 t (1-t); 0 <= U <= 1 and U >= 3/4 on [1/4, 3/4].
    static PotentialModel alloy_bump(double v_max,
                                     std::function<double(double)> profile = nullptr) {
        PotentialModel m;
        m.kind = Kind::AlloyBump;
        m.v_max = v_max;
        m.profile = profile ? std::move(profile)
                            : [](double t) { return 4.0 * t * (1.0 - t); };
        return m;
    }

    PotentialModel with_background(std::function<double(double)> w) const {
        PotentialModel m = *this;
        m.background = std::move(w);
        return m;
    }

    bool is_random() const { return kind != Kind::Zero; }
};

/// One seeded sample of the random potential on a grid.  Bit-reproducible
/// from (base_seed, realization_index, model, grid): each cell coupling is a
/// counter-based draw keyed by the cell index, so sampling is independent of
/// evaluation order and worker count.
struct DisorderRealization {
    Grid grid;
    std::uint64_t base_seed = 0;
    int realization_index = 0;
    std::vector<double> couplings; // one per unit cell, size L
    std::vector<double> values;    // V_i per grid point, size L*M

    /// max over cells of h * sum_{i in cell} |V_i|  (the per-cell L1 bound).
    double max_cell_abs_integral() const {
        const double h = grid.spacing();
        double worst = 0.0;
        for (int n = 0; n < grid.cells; ++n) {
            double acc = 0.0;
            for (int i = n * grid.points_per_cell; i < (n + 1) * grid.points_per_cell; ++i)
                acc += std::abs(values[static_cast<std::size_t>(i)]);
            worst = std::max(worst, h * acc);
        }
        return worst;
    }
};

inline DisorderRealization sample_potential(const PotentialModel& model, const Grid& grid,
                                            std::uint64_t base_seed, int realization_index) {
    if (realization_index < 0)
        throw ContractViolation("sample_potential: realization index must be >= 0");
    if (model.is_random() && !(model.v_max > 0.0))
        throw ConfigError("sample_potential: alloy potential requires v_max > 0");

    DisorderRealization r{grid, base_seed, realization_index, {}, {}};
    r.couplings.assign(static_cast<std::size_t>(grid.cells), 0.0);
    r.values.assign(static_cast<std::size_t>(grid.total_points()), 0.0);

    const std::uint64_t stream = rng::mix64(static_cast<std::uint64_t>(realization_index));
    if (model.is_random()) {
        for (int n = 0; n < grid.cells; ++n)
            r.couplings[static_cast<std::size_t>(n)] =
                model.v_max * rng::uniform(base_seed, stream, static_cast<std::uint64_t>(n));
    }

    for (int i = 0; i < grid.total_points(); ++i) {
        const int n = grid.cell_of(i);
        const double x = grid.coord(i);
        double v = 0.0;
        switch (model.kind) {
        case PotentialModel::Kind::Zero:
            break;
        case PotentialModel::Kind::AlloyStep:
            v = r.couplings[static_cast<std::size_t>(n)];
            break;
        case PotentialModel::Kind::AlloyBump:
            v = r.couplings[static_cast<std::size_t>(n)] * model.profile(x - n);
            break;
        }
        if (model.background) v += model.background(x - std::floor(x));
        r.values[static_cast<std::size_t>(i)] = v;
    }
    return r;
}

} // namespace tglab
