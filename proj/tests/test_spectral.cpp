#include "doctest.h"

#include <cmath>
#include <numbers>

#include "tglab/spectral.hpp"
#include "tglab/stiffness.hpp"

#include "oracles.hpp"

using namespace tglab;

namespace {

SpectralData diag(const Grid& g, const PotentialModel& m, std::uint64_t seed, int index,
                  BoundaryTwist twist) {
    return diagonalize(assemble(g, sample_potential(m, g, seed, index), twist));
}

} // namespace

TEST_SUITE_BEGIN("spectral");

TEST_CASE("free ring ground state: zero energy, constant orbital") {
    Grid g(8, 8);
    auto spec = diag(g, PotentialModel::zero(), 0, 0, BoundaryTwist::periodic());
    CHECK(std::abs(spec.energies[0]) <= 1e-10);
    const double expected = 1.0 / std::sqrt(8.0);
    for (int i = 0; i < g.total_points(); ++i) {
        CHECK(spec.orbitals(i, 0).real() == doctest::Approx(expected).epsilon(1e-10));
        CHECK(std::abs(spec.orbitals(i, 0).imag()) <= 1e-12);
    }
}

TEST_CASE("free antiperiodic ground pair is doubly degenerate at the closed form") {
    Grid g(8, 8);
    auto spec = diag(g, PotentialModel::zero(), 0, 0, BoundaryTwist::antiperiodic());
    const int n = g.total_points();
    const double e1 = 4.0 / (g.spacing() * g.spacing()) *
                      std::pow(std::sin(std::numbers::pi / (2.0 * n)), 2);
    CHECK(spec.energies[0] == doctest::Approx(e1).epsilon(1e-10));
    CHECK(spec.energies[1] == doctest::Approx(e1).epsilon(1e-10));
    CHECK(spec.energies[2] > e1 * (1.0 + 1e-6));
}

TEST_CASE("orthonormality and residual postconditions hold for disordered spectra") {
    Grid g(8, 8);
    // diagonalize() itself verifies; reaching here without a throw is the test
    auto spec = diag(g, PotentialModel::alloy_step(4.0), 91, 3, BoundaryTwist(0.4));
    const double h = g.spacing();
    Eigen::MatrixXcd gram = h * (spec.orbitals.adjoint() * spec.orbitals);
    CHECK((gram - Eigen::MatrixXcd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff() <=
          1e-10);
}

TEST_CASE("local amplitudes: uniform mass for the constant state, rows normalized") {
    Grid g(8, 8);
    auto spec = diag(g, PotentialModel::zero(), 0, 0, BoundaryTwist::periodic());
    auto amps = local_amplitudes(spec);
    for (int n = 0; n < 8; ++n)
        CHECK(amps.phi(0, n) == doctest::Approx(1.0 / std::sqrt(8.0)).epsilon(1e-10));

    auto disordered = diag(g, PotentialModel::alloy_step(4.0), 5, 0, BoundaryTwist::periodic());
    auto damps = local_amplitudes(disordered);
    for (int j = 0; j < damps.phi.rows(); ++j)
        CHECK(damps.phi.row(j).squaredNorm() == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("strong disorder localizes the ground state onto one cell") {
    // pilot-calibrated seed: every index below keeps >= 50% of the ground
    // state mass in a single cell at v_max = 16
    Grid g(32, 8);
    for (int index = 0; index < 5; ++index) {
        auto spec = diag(g, PotentialModel::alloy_step(16.0), 2024, index,
                         BoundaryTwist::periodic());
        auto amps = local_amplitudes(spec);
        CHECK(amps.phi.row(0).cwiseAbs2().maxCoeff() >= 0.5);
    }
}

TEST_CASE("count_below agrees with the closed-form count") {
    Grid g(16, 8);
    auto spec = diag(g, PotentialModel::zero(), 0, 0, BoundaryTwist::periodic());
    CHECK(spec.count_below(spec.energies[0] - 1.0) == 0);
    CHECK(spec.count_below(0.5 * (spec.energies[0] + spec.energies[1])) == 1);
    auto expect = oracle::free_spectrum(g, 0.0);
    CHECK(spec.count_below(1.0) == oracle::count_below(expect, 1.0));
}

TEST_CASE("mu-driven selection matches the closed-form counts at V = 0") {
    Grid g(16, 8);
    auto plus = diag(g, PotentialModel::zero(), 0, 0, BoundaryTwist::periodic());
    auto minus = diag(g, PotentialModel::zero(), 0, 0, BoundaryTwist::antiperiodic());
    auto sel = select_orbitals_mu(plus, minus, 0.5);
    CHECK(sel.n_plus == oracle::count_below(oracle::free_spectrum(g, 0.0), 0.5));
    CHECK(sel.n_minus == oracle::count_below(oracle::free_spectrum(g, std::numbers::pi), 0.5));
    CHECK(sel.count == std::min(sel.n_plus, sel.n_minus));
    CHECK(sel.sharp == (sel.count % 2 == 1 ? +1 : -1));

    CHECK_THROWS_AS(select_orbitals_mu(plus, minus, -1.0), EmptySystemError);
}

TEST_CASE("mu-driven selection count postcondition holds on disorder") {
    Grid g(16, 8);
    for (int index = 0; index < 10; ++index) {
        auto r = sample_potential(PotentialModel::alloy_step(4.0), g, 1234, index);
        auto plus = diagonalize(assemble(g, r, BoundaryTwist::periodic()));
        auto minus = diagonalize(assemble(g, r, BoundaryTwist::antiperiodic()));
        auto sel = select_orbitals_mu(plus, minus, 4.5);
        const SpectralData& sharp = sharp_spectrum(sel, plus, minus);
        CHECK(sharp.count_below(4.5) == sel.count);
    }
}

TEST_CASE("count-driven selection follows the parity rule") {
    Grid g(8, 8);
    auto plus = diag(g, PotentialModel::zero(), 0, 0, BoundaryTwist::periodic());
    auto minus = diag(g, PotentialModel::zero(), 0, 0, BoundaryTwist::antiperiodic());

    auto one = select_orbitals_count(plus, minus, 1);
    CHECK(one.sharp == +1);
    CHECK(one.indices == std::vector<int>{0});

    auto two = select_orbitals_count(plus, minus, 2);
    CHECK(two.sharp == -1);
    CHECK(two.indices == std::vector<int>{0, 1});

    auto three = select_orbitals_count(plus, minus, 3);
    CHECK(three.sharp == +1);
    // periodic ground plus the first degenerate pair
    const auto& sharp = sharp_spectrum(three, plus, minus);
    CHECK(std::abs(sharp.energies[0]) <= 1e-10);
    CHECK(sharp.energies[1] == doctest::Approx(sharp.energies[2]).epsilon(1e-10));

    CHECK_THROWS_AS(select_orbitals_count(plus, minus, 0), ContractViolation);
    CHECK_THROWS_AS(select_orbitals_count(plus, minus, g.total_points() + 1), ContractViolation);
}

TEST_CASE("periodic/antiperiodic interlacing on disordered spectra") {
    Grid g(16, 8);
    for (int index = 0; index < 20; ++index) {
        auto r = sample_potential(PotentialModel::alloy_step(4.0), g, 500, index);
        auto plus = diagonalize(assemble(g, r, BoundaryTwist::periodic()));
        auto minus = diagonalize(assemble(g, r, BoundaryTwist::antiperiodic()));
        CHECK(interlacing_defect(plus, minus) <= 1e-12);
        // strict alternation is expected for random potentials
        for (int j = 0; j < 2 * g.cells; ++j) {
            if (j % 2 == 0)
                CHECK(plus.energies[j] < minus.energies[j]);
            else
                CHECK(plus.energies[j] > minus.energies[j]);
        }
    }
}

TEST_CASE("ground-energy representation identity on disorder") {
    Grid g(16, 8);
    for (int index = 0; index < 10; ++index) {
        auto r = sample_potential(PotentialModel::alloy_step(4.0), g, 88, index);
        auto plus = diagonalize(assemble(g, r, BoundaryTwist::periodic()));
        auto minus = diagonalize(assemble(g, r, BoundaryTwist::antiperiodic()));
        auto sel = select_orbitals_mu(plus, minus, 4.5);
        // ground_energy performs the identity cross-check internally
        CHECK_NOTHROW(ground_energy(sharp_spectrum(sel, plus, minus), 4.5));
    }
}

TEST_SUITE_END();
