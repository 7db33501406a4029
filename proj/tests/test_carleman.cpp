#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "fraclab/carleman.hpp"
#include "fraclab/elliptic.hpp"
#include "fraclab/forward.hpp"
#include "fraclab/grid.hpp"

using namespace fraclab;

namespace {

EllipticOperator laplacian(const SpatialGrid& g) {
    return EllipticOperator::assemble(g, [](double, double) { return 1.0; },
                                      [](double, double) { return 0.0; },
                                      [](double, double) { return 0.0; });
}

CarlemanGeometry reference_geometry(int n_cells = 64, int n_steps = 128) {
    const SpatialGrid g = SpatialGrid::interval(0.0, 1.0, n_cells);
    const TimeGrid tg(1.0, n_steps, n_steps / 2, 0.1);
    return build_weight(g, tg, CarlemanParams{});
}

}  // namespace

TEST_CASE("polynomial step: knots, symmetry, and flat derivatives") {
    CHECK(Smootherstep::value(-0.5) == 0.0);
    CHECK(Smootherstep::value(0.0) == 0.0);
    CHECK(Smootherstep::value(1.0) == 1.0);
    CHECK(Smootherstep::value(2.0) == 1.0);
    CHECK(Smootherstep::value(0.5) == doctest::Approx(0.5).epsilon(1e-14));
    // S(1-s) = 1 - S(s)
    CHECK(Smootherstep::value(0.3) + Smootherstep::value(0.7) == doctest::Approx(1.0).epsilon(1e-13));
    for (double s : {0.0, 1.0, -1.0, 2.0}) {
        CHECK(Smootherstep::d1(s) == 0.0);
        CHECK(Smootherstep::d2(s) == 0.0);
        CHECK(Smootherstep::d3(s) == 0.0);
        CHECK(Smootherstep::d4(s) == 0.0);
    }
}

TEST_CASE("polynomial step derivatives match finite differences") {
    const double fd_h = 1e-5;
    for (double s : {0.15, 0.4, 0.62, 0.85}) {
        const double d1 = (Smootherstep::value(s + fd_h) - Smootherstep::value(s - fd_h)) / (2 * fd_h);
        CHECK(Smootherstep::d1(s) == doctest::Approx(d1).epsilon(1e-7));
        const double d2 = (Smootherstep::d1(s + fd_h) - Smootherstep::d1(s - fd_h)) / (2 * fd_h);
        CHECK(Smootherstep::d2(s) == doctest::Approx(d2).epsilon(1e-6));
        const double d3 = (Smootherstep::d2(s + fd_h) - Smootherstep::d2(s - fd_h)) / (2 * fd_h);
        CHECK(Smootherstep::d3(s) == doctest::Approx(d3).epsilon(1e-5));
        const double d4 = (Smootherstep::d3(s + fd_h) - Smootherstep::d3(s - fd_h)) / (2 * fd_h);
        CHECK(Smootherstep::d4(s) == doctest::Approx(d4).epsilon(1e-4));
    }
}

TEST_CASE("reference geometry: profile, norm, beta, levels — exact") {
    const CarlemanGeometry geom = reference_geometry();
    // d(x) = x (2.4 - x) extended past the observable endpoint
    CHECK(geom.ax.r0 == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(geom.ax.r1 == doctest::Approx(2.4).epsilon(1e-15));
    CHECK(geom.d(0.5) == doctest::Approx(0.5 * 1.9).epsilon(1e-14));
    CHECK(geom.d_norm == doctest::Approx(1.44).epsilon(1e-14));
    // beta interval (36, 48), midpoint 42
    CHECK(geom.beta == doctest::Approx(42.0).epsilon(1e-14));
    // mu_k = eps (k/3 |d| - beta delta^2)
    CHECK(geom.mu[0] == doctest::Approx(0.03).epsilon(1e-12));
    CHECK(geom.mu[1] == doctest::Approx(0.27).epsilon(1e-12));
    CHECK(geom.mu[2] == doctest::Approx(0.51).epsilon(1e-12));
    CHECK(geom.mu[0] > 0.0);
    CHECK(geom.mu[0] < geom.mu[1]);
    CHECK(geom.mu[1] < geom.mu[2]);
    // sup admissible epsilon is bisected over the omega *nodes*: the first
    // node at or past 0.4 on the 64-cell grid is x = 0.40625, so the bound
    // is d(0.40625)/1.44, slightly above the continuum value d(0.4)/1.44.
    double min_omega_d = std::numeric_limits<double>::infinity();
    for (int i = 0; i < geom.grid.size(); ++i)
        if (geom.omega_mask[i]) min_omega_d = std::min(min_omega_d, geom.d_nodes[i]);
    CHECK(geom.epsilon0 == doctest::Approx(min_omega_d / geom.d_norm).epsilon(1e-12));
    CHECK(geom.epsilon0 ==
          doctest::Approx(0.40625 * (2.4 - 0.40625) / 1.44).epsilon(1e-12));
    CHECK(geom.epsilon < geom.epsilon0);
    CHECK(geom.lambda == doctest::Approx(1.5).epsilon(1e-15));
    // psi and phi at the marked time reduce to the spatial profile
    CHECK(geom.psi(0.5, geom.t0()) == doctest::Approx(geom.d(0.5)).epsilon(1e-14));
    CHECK(geom.phi(0.5, geom.t0()) ==
          doctest::Approx(std::exp(geom.lambda * geom.d(0.5))).epsilon(1e-12));
}

TEST_CASE("omega membership and the admissibility fence") {
    const CarlemanGeometry geom = reference_geometry();
    const SpatialGrid& g = geom.grid;
    for (int i = 0; i < g.size(); ++i) {
        const bool inside = g.x(i) >= 0.4 - 1e-12 && g.x(i) <= 0.9 + 1e-12;
        CHECK(static_cast<bool>(geom.omega_mask[i]) == inside);
    }
    // epsilon above the fence: the level set escapes omega
    CarlemanParams bad;
    bad.epsilon = 0.57;
    const SpatialGrid grid = SpatialGrid::interval(0.0, 1.0, 64);
    const TimeGrid tg(1.0, 128, 64, 0.1);
    CHECK_THROWS_AS(build_weight(grid, tg, bad), ValidationError);
}

TEST_CASE("1D gamma must be exactly one endpoint; profile flips with the face") {
    const TimeGrid tg(1.0, 128, 64, 0.1);
    CHECK_THROWS_AS(
        build_weight(SpatialGrid::interval(0.0, 1.0, 64, {Face::x_lo, Face::x_hi}), tg, CarlemanParams{}),
        ValidationError);
    // gamma at the low face mirrors the extension
    CarlemanParams p;
    p.omega_x_lo = 0.1;
    p.omega_x_hi = 0.6;
    const CarlemanGeometry geom =
        build_weight(SpatialGrid::interval(0.0, 1.0, 64, {Face::x_lo}), tg, p);
    CHECK(geom.ax.r0 == doctest::Approx(-1.4).epsilon(1e-12));
    CHECK(geom.ax.r1 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(geom.d(1.0) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(geom.d(0.5) > 0.0);
}

TEST_CASE("2D geometry wants exactly three observable faces") {
    const TimeGrid tg(1.0, 64, 32, 0.1);
    CarlemanParams p;
    p.epsilon = 0.4;  // the 1D default 0.5 exceeds the 2D product-profile fence
    const SpatialGrid three = SpatialGrid::rectangle(0.0, 1.0, 0.0, 1.0, 24, 24,
                                                     {Face::x_hi, Face::y_lo, Face::y_hi});
    const CarlemanGeometry geom = build_weight(three, tg, p);
    CHECK(geom.d(0.5, 0.5) > 0.0);
    CHECK(geom.d_norm > 0.0);
    CHECK(geom.mu[0] > 0.0);
    const SpatialGrid one = SpatialGrid::rectangle(0.0, 1.0, 0.0, 1.0, 24, 24, {Face::x_hi});
    CHECK_THROWS_AS(build_weight(one, tg, p), ValidationError);
    const SpatialGrid two =
        SpatialGrid::rectangle(0.0, 1.0, 0.0, 1.0, 24, 24, {Face::x_hi, Face::y_lo});
    CHECK_THROWS_AS(build_weight(two, tg, p), ValidationError);
}

TEST_CASE("level sets nest and localize near the marked time") {
    const CarlemanGeometry geom = reference_geometry();
    const LevelSetDomains ls = build_level_sets(geom);  // throws on violated inclusions
    CHECK(ls.count_Q[0] > 0);
    CHECK(ls.count_Q[0] >= ls.count_Q[1]);
    CHECK(ls.count_Q[1] >= ls.count_Q[2]);
    CHECK(ls.count_Omega[0] >= ls.count_Omega[1]);
    CHECK(ls.count_Omega[1] >= ls.count_Omega[2]);
    CHECK(ls.count_Omega[2] > 0);
}

TEST_CASE("cutoffs ride the level sets with exact jets") {
    const CarlemanGeometry geom = reference_geometry(128, 128);
    const Cutoff cut = build_cutoffs(geom);
    const SpatialGrid& g = geom.grid;
    const TimeGrid& tg = geom.tg;
    const int n0 = tg.t0_index;
    // chi = 1 deep inside {psi >= mu_2}, 0 below mu_1
    for (int i = 0; i < g.size(); ++i) {
        const double psi = geom.psi(g.x(i), tg.t(n0));
        if (psi >= geom.mu[1] + 1e-9) CHECK(cut.chi.at(n0, i) == doctest::Approx(1.0).epsilon(1e-12));
        if (psi <= geom.mu[0] - 1e-9) CHECK(cut.chi.at(n0, i) == doctest::Approx(0.0).epsilon(1e-12));
    }
    // Central differences of the stored values converge to the closed-form
    // jets at second order: the FD mismatch must shrink ~4x per refinement.
    auto space_jet_mismatch = [](const CarlemanGeometry& gm) {
        const Cutoff c = build_cutoffs(gm);
        const int m0 = gm.tg.t0_index;
        double worst = 0.0;
        for (int i = 1; i < gm.grid.size() - 1; ++i) {
            const double fd = (c.chi.at(m0, i + 1) - c.chi.at(m0, i - 1)) / (2.0 * gm.grid.h(0));
            worst = std::max(worst, std::abs(fd - c.chi_dx[0].at(m0, i)));
        }
        return worst;
    };
    auto time_jet_mismatch = [](const CarlemanGeometry& gm) {
        const Cutoff c = build_cutoffs(gm);
        const int mid = gm.grid.size() / 2;
        double worst = 0.0;
        for (int n = 1; n < gm.tg.n_levels() - 1; ++n) {
            const double fd = (c.chi.at(n + 1, mid) - c.chi.at(n - 1, mid)) / (2.0 * gm.tg.dt());
            worst = std::max(worst, std::abs(fd - c.chi_t.at(n, mid)));
        }
        return worst;
    };
    CHECK(space_jet_mismatch(reference_geometry(128, 128)) /
              space_jet_mismatch(reference_geometry(256, 128)) >= 3.0);
    // The cutoff's time transition layer spans ~0.02 time units, so the
    // second-order regime for its finite differences needs dt well below
    // that; coarser pairs sit pre-asymptotic.
    CHECK(time_jet_mismatch(reference_geometry(64, 512)) /
              time_jet_mismatch(reference_geometry(64, 1024)) >= 3.0);
    // spatial analog built on d alone
    for (int i = 0; i < g.size(); ++i) {
        if (geom.d_nodes[i] >= geom.mu[1] + 1e-9)
            CHECK(cut.chi_tilde[i] == doctest::Approx(1.0).epsilon(1e-12));
        if (geom.d_nodes[i] <= geom.mu[0] - 1e-9)
            CHECK(cut.chi_tilde[i] == doctest::Approx(0.0).epsilon(1e-12));
    }
}

TEST_CASE("seeded test fields are deterministic, distinct, and compactly supported") {
    const CarlemanGeometry geom = reference_geometry();
    const Field a = carleman_test_field(geom, 42, 3);
    const Field b = carleman_test_field(geom, 42, 3);
    const Field c = carleman_test_field(geom, 42, 4);
    REQUIRE(a.v.size() == b.v.size());
    for (std::size_t i = 0; i < a.v.size(); ++i) CHECK(a.v[i] == b.v[i]);
    double dev = 0.0;
    for (std::size_t i = 0; i < a.v.size(); ++i) dev = std::max(dev, std::abs(a.v[i] - c.v[i]));
    CHECK(dev > 1e-6);
    for (int n = 0; n < a.nt; ++n) {
        CHECK(a.at(n, 0) == 0.0);
        CHECK(a.at(n, a.nsp - 1) == 0.0);
    }
    CHECK(a.all_finite());
    double amp = 0.0;
    for (double v : a.v) amp = std::max(amp, std::abs(v));
    CHECK(amp > 1e-8);
}

TEST_CASE("ratio sweeps: bounded tails, no violations, scale invariance") {
    const SpatialGrid g = SpatialGrid::interval(0.0, 1.0, 128);
    const TimeGrid tg(1.0, 256, 128, 0.1);
    const CarlemanGeometry geom = build_weight(g, tg, CarlemanParams{});
    const EllipticOperator L = laplacian(g);
    const EquationCoefficients eq(1.0, 1.0);
    const std::vector<double> sweep = {2, 4, 8, 16, 32};

    for (int index : {0, 1}) {
        const Field v = carleman_test_field(geom, 7, index);
        Field v1000 = v;
        for (double& x : v1000.v) x *= 1000.0;

        for (int which = 0; which < 2; ++which) {
            const CarlemanRatioReport rep = which == 0 ? check_parabolic_carleman(v, geom, L, eq, sweep)
                                                       : check_combined_carleman(v, geom, L, eq, sweep);
            const CarlemanRatioReport rep_scaled =
                which == 0 ? check_parabolic_carleman(v1000, geom, L, eq, sweep)
                           : check_combined_carleman(v1000, geom, L, eq, sweep);
            REQUIRE(rep.rows.size() == sweep.size());
            CHECK(rep.tail_bounded);
            for (std::size_t i = 0; i < rep.rows.size(); ++i) {
                CHECK(rep.rows[i].defined);
                CHECK(!rep.rows[i].violation);
                CHECK(std::isfinite(rep.rows[i].ratio));
                CHECK(rep.rows[i].boundary_term == 0.0);
                CHECK(std::abs(rep.rows[i].ratio - rep_scaled.rows[i].ratio) <=
                      1e-10 * std::abs(rep.rows[i].ratio));
            }
        }

        const std::vector<double> w = carleman_test_field_spatial(geom, 7, index);
        std::vector<double> w1000 = w;
        for (double& x : w1000) x *= 1000.0;
        const CarlemanRatioReport rep = check_elliptic_carleman(w, geom, L, sweep);
        const CarlemanRatioReport rep_scaled = check_elliptic_carleman(w1000, geom, L, sweep);
        CHECK(rep.tail_bounded);
        for (std::size_t i = 0; i < rep.rows.size(); ++i) {
            CHECK(rep.rows[i].defined);
            CHECK(!rep.rows[i].violation);
            CHECK(std::abs(rep.rows[i].ratio - rep_scaled.rows[i].ratio) <=
                  1e-10 * std::abs(rep.rows[i].ratio));
        }
    }
}

TEST_CASE("zero fields yield undefined ratios, not violations") {
    const CarlemanGeometry geom = reference_geometry();
    const EllipticOperator L = laplacian(geom.grid);
    const EquationCoefficients eq(1.0, 1.0);
    const Field zero(geom.tg.n_levels(), geom.grid.size());
    const CarlemanRatioReport rep = check_parabolic_carleman(zero, geom, L, eq, {2, 4, 8});
    for (const CarlemanRatioRow& row : rep.rows) {
        CHECK(!row.defined);
        CHECK(!row.violation);
    }
    CHECK(rep.tail_bounded);
}

TEST_CASE("sweeps agree between serial and parallel execution") {
    const CarlemanGeometry geom = reference_geometry(96, 128);
    const EllipticOperator L = laplacian(geom.grid);
    const EquationCoefficients eq(1.0, 1.0);
    const Field v = carleman_test_field(geom, 11, 0);
    set_threads(4);
    const CarlemanRatioReport a = check_parabolic_carleman(v, geom, L, eq, {2, 4, 8}, Exec::serial);
    const CarlemanRatioReport b = check_parabolic_carleman(v, geom, L, eq, {2, 4, 8}, Exec::parallel);
    REQUIRE(a.rows.size() == b.rows.size());
    for (std::size_t i = 0; i < a.rows.size(); ++i)
        CHECK(a.rows[i].ratio == doctest::Approx(b.rows[i].ratio).epsilon(1e-12));
}

TEST_CASE("weight parameters are validated") {
    const SpatialGrid g = SpatialGrid::interval(0.0, 1.0, 32);
    const TimeGrid tg(1.0, 64, 32, 0.1);
    CarlemanParams p;
    p.lambda = 0.0;
    CHECK_THROWS_AS(build_weight(g, tg, p), ValidationError);
    p = {};
    p.epsilon = 0.0;
    CHECK_THROWS_AS(build_weight(g, tg, p), ValidationError);
    p = {};
    p.epsilon = 1.0;
    CHECK_THROWS_AS(build_weight(g, tg, p), ValidationError);
    p = {};
    p.taper_width = 0.6;
    CHECK_THROWS_AS(build_weight(g, tg, p), ValidationError);
    p = {};
    p.omega_x_lo = 0.9;
    p.omega_x_hi = 0.4;
    CHECK_THROWS_AS(build_weight(g, tg, p), ValidationError);
}
