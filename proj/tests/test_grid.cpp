#include "doctest.h"

#include <cmath>
#include <numbers>

#include "tglab/operator.hpp"
#include "tglab/spectral.hpp"

#include "oracles.hpp"

using namespace tglab;

TEST_SUITE_BEGIN("grid");

TEST_CASE("grid geometry and validation") {
    Grid g(8, 8);
    CHECK(g.total_points() == 64);
    CHECK(g.spacing() == 0.125);
    CHECK(g.coord(8) == 1.0);
    CHECK(g.cell_of(7) == 0);
    CHECK(g.cell_of(8) == 1);
    // h * n_g = L exactly for the binary spacings used throughout
    CHECK(g.spacing() * g.total_points() == g.length());

    CHECK_THROWS_AS(Grid(4, 8), ConfigError);
    CHECK_THROWS_AS(Grid(8, 3), ConfigError);
}

TEST_CASE("zero potential samples to zero") {
    Grid g(8, 8);
    auto r = sample_potential(PotentialModel::zero(), g, 123, 5);
    for (double v : r.values) CHECK(v == 0.0);
    for (double w : r.couplings) CHECK(w == 0.0);
}

TEST_CASE("alloy sampling is deterministic and cellwise constant") {
    Grid g(8, 8);
    auto model = PotentialModel::alloy_step(4.0);
    auto a = sample_potential(model, g, 42, 0);
    auto b = sample_potential(model, g, 42, 0);
    CHECK(a.values == b.values);
    auto c = sample_potential(model, g, 42, 1);
    CHECK(a.values != c.values);

    for (int i = 0; i < g.total_points(); ++i) {
        const int n = g.cell_of(i);
        CHECK(a.values[i] == a.couplings[n]);
        CHECK(a.values[i] >= 0.0);
        CHECK(a.values[i] <= 4.0);
    }
}

TEST_CASE("alloy couplings have the uniform[0, v_max] mean") {
    Grid g(8, 4);
    auto model = PotentialModel::alloy_step(4.0);
    double acc = 0.0;
    long count = 0;
    for (int idx = 0; idx < 10000; ++idx) {
        auto r = sample_potential(model, g, 977, idx);
        for (double w : r.couplings) {
            acc += w;
            ++count;
        }
    }
    CHECK(acc / count == doctest::Approx(2.0).epsilon(0.025)); // 2.0 +- 0.05
}

TEST_CASE("per-cell L1 integral respects the coupling bound") {
    Grid g(8, 8);
    auto back = [](double x) { return 0.3 * (1.0 + std::cos(2.0 * std::numbers::pi * x)); };
    auto step = PotentialModel::alloy_step(4.0).with_background(back);
    auto bump = PotentialModel::alloy_bump(4.0).with_background(back);
    for (int idx = 0; idx < 20; ++idx) {
        CHECK(sample_potential(step, g, 7, idx).max_cell_abs_integral() <= 4.0 + 0.6 + 1e-12);
        CHECK(sample_potential(bump, g, 7, idx).max_cell_abs_integral() <= 4.0 + 0.6 + 1e-12);
    }
}

TEST_CASE("bump profile stays within [0, 1] and is bounded below on the core") {
    auto m = PotentialModel::alloy_bump(1.0);
    for (int i = 0; i <= 100; ++i) {
        const double t = i / 100.0;
        CHECK(m.profile(t) >= 0.0);
        CHECK(m.profile(t) <= 1.0);
    }
    for (int i = 25; i <= 75; ++i) CHECK(m.profile(i / 100.0) >= 0.75);
}

TEST_CASE("invalid alloy v_max is a configuration error") {
    Grid g(8, 8);
    CHECK_THROWS_AS(sample_potential(PotentialModel::alloy_step(0.0), g, 1, 0), ConfigError);
    CHECK_THROWS_AS(sample_potential(PotentialModel::alloy_step(-1.0), g, 1, 0), ConfigError);
}

TEST_CASE("assembled operator is Hermitian and rejects grid mismatch") {
    Grid g(8, 8);
    auto r = sample_potential(PotentialModel::alloy_step(4.0), g, 11, 0);
    for (double theta : {0.0, 0.3, std::numbers::pi, -1.2}) {
        auto op = assemble(g, r, BoundaryTwist(theta));
        CHECK(op.hermiticity_defect() <= 1e-14);
    }
    Grid other(8, 16);
    CHECK_THROWS_AS(assemble(other, r, BoundaryTwist::periodic()), ContractViolation);
}

TEST_CASE("free spectrum matches the closed form, periodic and twisted") {
    Grid g(8, 8);
    auto r = sample_potential(PotentialModel::zero(), g, 0, 0);
    for (double theta : {0.0, 0.7, std::numbers::pi}) {
        auto spec = diagonalize(assemble(g, r, BoundaryTwist(theta)));
        auto expect = oracle::free_spectrum(g, theta);
        for (int j = 0; j < g.total_points(); ++j)
            CHECK(spec.energies[j] == doctest::Approx(expect[j]).epsilon(1e-10));
    }
}

TEST_CASE("constant vector is an exact null vector at V = 0, theta = 0") {
    Grid g(8, 8);
    auto op = assemble(g, sample_potential(PotentialModel::zero(), g, 0, 0),
                       BoundaryTwist::periodic());
    Eigen::VectorXcd ones = Eigen::VectorXcd::Ones(g.total_points());
    CHECK((op.matrix * ones).cwiseAbs().maxCoeff() <= 1e-11);
}

TEST_CASE("spectrum is 2 pi periodic and even in the twist") {
    Grid g(8, 4);
    auto r = sample_potential(PotentialModel::alloy_step(4.0), g, 3, 2);
    auto s1 = diagonalize(assemble(g, r, BoundaryTwist(0.9)));
    auto s2 = diagonalize(assemble(g, r, BoundaryTwist(0.9 + 2.0 * std::numbers::pi)));
    auto s3 = diagonalize(assemble(g, r, BoundaryTwist(-0.9)));
    for (int j = 0; j < g.total_points(); ++j) {
        const double scale = std::max(1.0, std::abs(s1.energies[j]));
        CHECK(std::abs(s1.energies[j] - s2.energies[j]) <= 1e-12 * scale);
        CHECK(std::abs(s1.energies[j] - s3.energies[j]) <= 1e-12 * scale);
    }
}

TEST_SUITE_END();
