#pragma once

// Test-only closed-form references, independent of the library's
// diagonalization path.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "tglab/grid.hpp"

namespace oracle {

/// Eigenvalues of the discrete free ring Laplacian at boundary twist theta:
/// (4/h^2) sin^2((2 pi j + theta) / (2 n_g)), j = 0..n_g-1, ascending.
inline std::vector<double> free_spectrum(const tglab::Grid& grid, double theta) {
    const int n = grid.total_points();
    const double inv_h2 = 1.0 / (grid.spacing() * grid.spacing());
    std::vector<double> e(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
        const double s = std::sin((2.0 * std::numbers::pi * j + theta) / (2.0 * n));
        e[static_cast<std::size_t>(j)] = 4.0 * inv_h2 * s * s;
    }
    std::sort(e.begin(), e.end());
    return e;
}

inline int count_below(const std::vector<double>& energies, double mu) {
    return static_cast<int>(std::upper_bound(energies.begin(), energies.end(), mu) -
                            energies.begin());
}

inline double occupied_sum(const std::vector<double>& energies, int count) {
    double acc = 0.0;
    for (int j = 0; j < count; ++j) acc += energies[static_cast<std::size_t>(j)];
    return acc;
}

} // namespace oracle
