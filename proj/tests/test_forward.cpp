#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <vector>

#include "doctest.h"
#include "fraclab/elliptic.hpp"
#include "fraclab/exec.hpp"
#include "fraclab/expr.hpp"
#include "fraclab/forward.hpp"
#include "fraclab/grid.hpp"

using namespace fraclab;

namespace {

EllipticOperator laplacian(const SpatialGrid& g) {
    return EllipticOperator::assemble(g, [](double, double) { return 1.0; },
                                      [](double, double) { return 0.0; },
                                      [](double, double) { return 0.0; });
}

/// Manufactured solution u* = t^2 sin(pi x) for rho1 u_t + rho2 d^{1/2} u - u_xx = g.
double mms_exact(double x, double t) { return t * t * std::sin(M_PI * x); }

Field mms_source(const EquationCoefficients& eq, const SpatialGrid& g, const TimeGrid& tg) {
    const double chalf = std::tgamma(3.0) / std::tgamma(2.5);  // Caputo(t^2) coefficient
    Field src(tg.n_levels(), g.size());
    for (int n = 0; n < src.nt; ++n) {
        const double t = tg.t(n);
        for (int i = 0; i < g.size(); ++i) {
            const double s = std::sin(M_PI * g.x(i));
            src.at(n, i) = eq.rho1 * 2.0 * t * s + eq.rho2 * chalf * std::pow(t, 1.5) * s +
                           M_PI * M_PI * t * t * s;
        }
    }
    return src;
}

double mms_max_error(const EquationCoefficients& eq, int n_cells, int n_steps) {
    const SpatialGrid g = SpatialGrid::interval(0.0, 1.0, n_cells);
    const TimeGrid tg(1.0, n_steps, n_steps / 2, 0.1);
    const SolveReport rep = solve_forward(eq, laplacian(g), mms_source(eq, g, tg), tg);
    double err = 0.0;
    for (int n = 0; n < rep.u.nt; ++n)
        for (int i = 0; i < g.size(); ++i)
            err = std::max(err, std::abs(rep.u.at(n, i) - mms_exact(g.x(i), tg.t(n))));
    return err;
}

/// Independent classical-heat stepper (rho2 = 0): same two-step backward
/// formula, but assembled and solved from scratch so a bug in the production
/// path cannot cancel.
Field independent_heat_bdf2(double rho1, const SpatialGrid& g, const Field& src, const TimeGrid& tg) {
    const int n = g.size();
    const double dt = tg.dt(), h = g.h(0);
    Field u(tg.n_levels(), n);
    std::vector<double> a(n), b(n), c(n), r(n), cp(n), rp(n);
    for (int step = 1; step <= tg.n_steps; ++step) {
        const bool first = step == 1;
        const double lhs = (first ? 1.0 : 1.5) * rho1 / dt;
        for (int i = 0; i < n; ++i) {
            if (i == 0 || i == n - 1) {
                a[i] = 0.0;
                b[i] = 1.0;
                c[i] = 0.0;
                r[i] = 0.0;
                continue;
            }
            a[i] = -1.0 / (h * h);
            b[i] = lhs + 2.0 / (h * h);
            c[i] = -1.0 / (h * h);
            r[i] = src.at(step, i) + (first ? rho1 / dt * u.at(step - 1, i)
                                            : rho1 / dt * (2.0 * u.at(step - 1, i) -
                                                           0.5 * u.at(step - 2, i)));
        }
        // Thomas elimination, written out locally.
        cp[0] = c[0] / b[0];
        rp[0] = r[0] / b[0];
        for (int i = 1; i < n; ++i) {
            const double m = b[i] - a[i] * cp[i - 1];
            cp[i] = c[i] / m;
            rp[i] = (r[i] - a[i] * rp[i - 1]) / m;
        }
        u.at(step, n - 1) = rp[n - 1];
        for (int i = n - 2; i >= 0; --i) u.at(step, i) = rp[i] - cp[i] * u.at(step, i + 1);
    }
    return u;
}

}  // namespace

TEST_CASE("coefficient validation cites the requirement") {
    CHECK_THROWS_AS(EquationCoefficients(0.0, 1.0), ValidationError);
    CHECK_THROWS_AS(EquationCoefficients(-1.0, 1.0), ValidationError);
    CHECK_THROWS_AS(EquationCoefficients(1.0, 0.0), ValidationError);
    CHECK_NOTHROW(EquationCoefficients(1.0, -0.5));
    CHECK_NOTHROW(EquationCoefficients::classical_limit(1.0));
}

TEST_CASE("zero source keeps the zero initial state exactly") {
    const SpatialGrid g = SpatialGrid::interval(0.0, 1.0, 16);
    const TimeGrid tg(1.0, 32, 16, 0.1);
    const Field zero(tg.n_levels(), g.size());
    const SolveReport rep = solve_forward(EquationCoefficients(1.0, 1.0), laplacian(g), zero, tg);
    for (double v : rep.u.v) CHECK(v == 0.0);
}

TEST_CASE("manufactured solution: accuracy and refinement orders") {
    const EquationCoefficients eq(1.0, 1.0);
    // time order (space resolved): refine N at fixed fine h
    const double et1 = mms_max_error(eq, 256, 64);
    const double et2 = mms_max_error(eq, 256, 128);
    CHECK(std::log2(et1 / et2) >= 1.4);
    // space order (time resolved): refine h at fixed fine N
    const double ex1 = mms_max_error(eq, 16, 512);
    const double ex2 = mms_max_error(eq, 32, 512);
    CHECK(std::log2(ex1 / ex2) >= 1.9);
    CHECK(et2 < 5e-3);
}

TEST_CASE("backward Euler alternative saturates near order 1") {
    const EquationCoefficients eq(1.0, 1.0);
    SolveOptions opt;
    opt.scheme = TimeScheme::backward_euler;
    auto err = [&](int n_steps) {
        const SpatialGrid g = SpatialGrid::interval(0.0, 1.0, 256);
        const TimeGrid tg(1.0, n_steps, n_steps / 2, 0.1);
        const SolveReport rep = solve_forward(eq, laplacian(g), mms_source(eq, g, tg), tg, opt);
        double e = 0.0;
        for (int n = 0; n < rep.u.nt; ++n)
            for (int i = 0; i < g.size(); ++i)
                e = std::max(e, std::abs(rep.u.at(n, i) - mms_exact(g.x(i), tg.t(n))));
        return e;
    };
    const double order = std::log2(err(64) / err(128));
    CHECK(order < 1.4);  // the default scheme exists for a reason
    CHECK(order > 0.5);
}

TEST_CASE("degenerate rho2 = 0 equals an independent heat solver") {
    const SpatialGrid g = SpatialGrid::interval(0.0, 1.0, 64);
    const TimeGrid tg(1.0, 128, 64, 0.1);
    Field src(tg.n_levels(), g.size());
    for (int n = 0; n < src.nt; ++n)
        for (int i = 0; i < g.size(); ++i)
            src.at(n, i) = tg.t(n) * std::sin(M_PI * g.x(i)) + g.x(i) * (1.0 - g.x(i));
    const EquationCoefficients eq = EquationCoefficients::classical_limit(1.0);
    const SolveReport rep = solve_forward(eq, laplacian(g), src, tg);
    const Field ref = independent_heat_bdf2(1.0, g, src, tg);
    double dev = 0.0;
    for (std::size_t i = 0; i < rep.u.v.size(); ++i)
        dev = std::max(dev, std::abs(rep.u.v[i] - ref.v[i]));
    CHECK(dev <= 1e-10);
}

TEST_CASE("1D direct path reports unit iterations and tiny residuals") {
    const EquationCoefficients eq(1.0, 1.0);
    const SpatialGrid g = SpatialGrid::interval(0.0, 1.0, 32);
    const TimeGrid tg(1.0, 16, 8, 0.1);
    const SolveReport rep = solve_forward(eq, laplacian(g), mms_source(eq, g, tg), tg);
    REQUIRE(static_cast<int>(rep.iterations.size()) == tg.n_steps);
    for (int it : rep.iterations) CHECK(it == 1);
    CHECK(rep.max_residual < 1e-12);
}

TEST_CASE("source shape mismatches are rejected") {
    const SpatialGrid g = SpatialGrid::interval(0.0, 1.0, 16);
    const TimeGrid tg(1.0, 8, 4, 0.1);
    const Field bad(tg.n_levels(), g.size() + 1);
    CHECK_THROWS_AS(solve_forward(EquationCoefficients(1.0, 1.0), laplacian(g), bad, tg),
                    ValidationError);
}

TEST_CASE("separated sources materialize and validate") {
    const SpatialGrid g = SpatialGrid::interval(0.0, 1.0, 8);
    const TimeGrid tg(1.0, 4, 2, 0.1);
    std::vector<double> f(g.size());
    for (int i = 0; i < g.size(); ++i) f[i] = g.x(i);
    const SourceSpec src = SourceSpec::from_separated(f, Expr::parse("1 + t"));
    const Field dense = src.materialize(g, tg);
    CHECK(dense.at(2, 3) == doctest::Approx(g.x(3) * (1.0 + tg.t(2))).epsilon(1e-15));
    CHECK(src.min_abs_R_at_t0(g, tg) == doctest::Approx(1.5).epsilon(1e-15));
    std::vector<double> wrong(g.size() + 2, 1.0);
    const SourceSpec bad = SourceSpec::from_separated(wrong, Expr::parse("1"));
    CHECK_THROWS_AS(bad.materialize(g, tg), ValidationError);
}

TEST_CASE("batch solves equal per-column individual solves exactly") {
    const EquationCoefficients eq(1.0, 1.0);
    const SpatialGrid g = SpatialGrid::interval(0.0, 1.0, 24);
    const TimeGrid tg(1.0, 32, 16, 0.1);
    const EllipticOperator L = laplacian(g);
    const Expr R = Expr::parse("1 + t");
    std::vector<std::vector<double>> basis;
    for (int node : {5, 11, 17}) {
        std::vector<double> hat(g.size(), 0.0);
        hat[node] = 1.0;
        basis.push_back(hat);
    }
    const std::vector<std::vector<double>> snaps = solve_forward_batch(eq, L, basis, R, tg);
    REQUIRE(snaps.size() == basis.size());
    for (std::size_t k = 0; k < basis.size(); ++k) {
        const SolveReport one = solve_forward(eq, L, SourceSpec::from_separated(basis[k], R), tg);
        for (int i = 0; i < g.size(); ++i) CHECK(snaps[k][i] == one.u.at(tg.t0_index, i));
    }
}

TEST_CASE("solver linearity supports superposition to roundoff") {
    const EquationCoefficients eq(1.0, 1.0);
    const SpatialGrid g = SpatialGrid::interval(0.0, 1.0, 24);
    const TimeGrid tg(1.0, 32, 16, 0.1);
    const EllipticOperator L = laplacian(g);
    const Expr R = Expr::parse("1 + t^2");
    std::vector<double> hat_i(g.size(), 0.0), hat_j(g.size(), 0.0), both(g.size(), 0.0);
    hat_i[7] = 1.0;
    hat_j[15] = 1.0;
    both[7] = 1.0;
    both[15] = 1.0;
    const Field ui = solve_forward(eq, L, SourceSpec::from_separated(hat_i, R), tg).u;
    const Field uj = solve_forward(eq, L, SourceSpec::from_separated(hat_j, R), tg).u;
    const Field us = solve_forward(eq, L, SourceSpec::from_separated(both, R), tg).u;
    double scale = 0.0;
    for (double v : us.v) scale = std::max(scale, std::abs(v));
    for (std::size_t i = 0; i < us.v.size(); ++i)
        CHECK(std::abs(us.v[i] - ui.v[i] - uj.v[i]) <= 1e-12 * scale);
}

TEST_CASE("2D solve matches the manufactured solution and converges") {
    const EquationCoefficients eq(1.0, 1.0);
    const SpatialGrid g =
        SpatialGrid::rectangle(0.0, 1.0, 0.0, 1.0, 24, 24, {Face::x_hi, Face::y_lo, Face::y_hi});
    const TimeGrid tg(1.0, 64, 32, 0.1);
    const EllipticOperator L = EllipticOperator::assemble2d(
        g, [](double, double) { return 1.0; }, [](double, double) { return 0.0; },
        [](double, double) { return 1.0; }, [](double, double) { return 0.0; },
        [](double, double) { return 0.0; }, [](double, double) { return 0.0; });
    const double chalf = std::tgamma(3.0) / std::tgamma(2.5);
    Field src(tg.n_levels(), g.size());
    for (int n = 0; n < src.nt; ++n) {
        const double t = tg.t(n);
        for (int j = 0; j < g.n_nodes(1); ++j)
            for (int i = 0; i < g.n_nodes(0); ++i) {
                const double s = std::sin(M_PI * g.x(i)) * std::sin(M_PI * g.y(j));
                src.at(n, g.idx(i, j)) =
                    2.0 * t * s + chalf * std::pow(t, 1.5) * s + 2.0 * M_PI * M_PI * t * t * s;
            }
    }
    const SolveReport rep = solve_forward(eq, L, src, tg);
    double err = 0.0;
    for (int n = 0; n < rep.u.nt; ++n)
        for (int j = 0; j < g.n_nodes(1); ++j)
            for (int i = 0; i < g.n_nodes(0); ++i)
                err = std::max(err, std::abs(rep.u.at(n, g.idx(i, j)) -
                                             tg.t(n) * tg.t(n) * std::sin(M_PI * g.x(i)) *
                                                 std::sin(M_PI * g.y(j))));
    CHECK(err < 0.02);
    CHECK(rep.max_residual < 1e-10);
}

TEST_CASE("2D Krylov failure raises a numerical error") {
    const SpatialGrid g =
        SpatialGrid::rectangle(0.0, 1.0, 0.0, 1.0, 16, 16, {Face::x_hi, Face::y_lo, Face::y_hi});
    const TimeGrid tg(1.0, 8, 4, 0.1);
    const EllipticOperator L = EllipticOperator::assemble2d(
        g, [](double, double) { return 1.0; }, [](double, double) { return 0.0; },
        [](double, double) { return 1.0; }, [](double, double) { return 0.0; },
        [](double, double) { return 0.0; }, [](double, double) { return 0.0; });
    Field src(tg.n_levels(), g.size());
    for (int n = 0; n < src.nt; ++n)
        for (int k = 0; k < g.size(); ++k) src.at(n, k) = 1.0;
    SolveOptions opt;
    opt.max_iter = 1;
    opt.tol = 1e-15;
    CHECK_THROWS_AS(solve_forward(EquationCoefficients(1.0, 1.0), L, src, tg, opt), NumericalError);
}

TEST_CASE("serial and parallel solves agree bitwise under oversubscription") {
    const EquationCoefficients eq(1.0, 1.0);
    const SpatialGrid g = SpatialGrid::interval(0.0, 1.0, 48);
    const TimeGrid tg(1.0, 96, 48, 0.1);
    const Field src = mms_source(eq, g, tg);
    set_threads(4);
    SolveOptions so;
    so.ex = Exec::serial;
    const Field a = solve_forward(eq, laplacian(g), src, tg, so).u;
    so.ex = Exec::parallel;
    const Field b = solve_forward(eq, laplacian(g), src, tg, so).u;
    REQUIRE(a.v.size() == b.v.size());
    for (std::size_t i = 0; i < a.v.size(); ++i) CHECK(a.v[i] == b.v[i]);
}
