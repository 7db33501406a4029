#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "fraclab/config.hpp"
#include "fraclab/expr.hpp"
#include "fraclab/grid.hpp"

using namespace fraclab;

TEST_CASE("interval grid geometry") {
    const SpatialGrid g = SpatialGrid::interval(0.0, 1.0, 8);
    CHECK(g.dim == 1);
    CHECK(g.h(0) == doctest::Approx(0.125).epsilon(1e-15));
    CHECK(g.n_nodes(0) == 9);
    CHECK(g.size() == 9);
    CHECK(g.x(4) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(g.on_boundary(0));
    CHECK(g.on_boundary(8));
    CHECK(!g.on_boundary(4));
    CHECK(g.interior_count() == 7);
}

TEST_CASE("rectangle grid geometry and indexing") {
    const SpatialGrid g =
        SpatialGrid::rectangle(0.0, 2.0, 0.0, 1.0, 4, 2, {Face::x_hi, Face::y_lo, Face::y_hi});
    CHECK(g.dim == 2);
    CHECK(g.h(0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(g.h(1) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(g.size() == 5 * 3);
    CHECK(g.idx(3, 2) == 2 * 5 + 3);
    CHECK(g.on_boundary(0, 1));
    CHECK(g.on_boundary(2, 0));
    CHECK(!g.on_boundary(2, 1));
    CHECK(g.interior_count() == 3 * 1);
}

TEST_CASE("grid validation rejects malformed input") {
    CHECK_THROWS_AS(SpatialGrid::interval(0.0, 1.0, 0), ValidationError);
    CHECK_THROWS_AS(SpatialGrid::interval(1.0, 0.0, 4), ValidationError);
    CHECK_THROWS_AS(SpatialGrid::interval(0.0, 1.0, 4, {}), ValidationError);
    // y faces do not exist in 1D
    CHECK_THROWS_AS(SpatialGrid::interval(0.0, 1.0, 4, {Face::y_lo}), ValidationError);
}

TEST_CASE("time grid accessors and the marked time") {
    const TimeGrid tg(2.0, 8, 4, 0.2);
    CHECK(tg.dt() == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(tg.t(3) == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(tg.t0() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(tg.n_levels() == 9);
}

TEST_CASE("time grid validation: t0 interior and the delta slab") {
    CHECK_THROWS_AS(TimeGrid(0.0, 8, 4, 0.1), ValidationError);
    CHECK_THROWS_AS(TimeGrid(1.0, 0, 0, 0.1), ValidationError);
    // t0 on either endpoint is rejected
    CHECK_THROWS_AS(TimeGrid(1.0, 8, 0, 0.1), ValidationError);
    CHECK_THROWS_AS(TimeGrid(1.0, 8, 8, 0.1), ValidationError);
    CHECK_THROWS_AS(TimeGrid(1.0, 8, 4, 0.0), ValidationError);
    // slab escapes (0, T): t0 = 0.5, 2*delta = 0.6
    CHECK_THROWS_AS(TimeGrid(1.0, 8, 4, 0.3), ValidationError);
    CHECK_NOTHROW(TimeGrid(1.0, 8, 4, 0.2));
}

TEST_CASE("time cut index skips the initial layer") {
    const TimeGrid tg(1.0, 100, 50, 0.1);
    CHECK(time_cut_index(tg, 0.1) == 10);
    const TimeGrid tiny(1.0, 10, 5, 0.1);
    CHECK(time_cut_index(tiny, 0.1) == 2);  // the 2-level floor dominates
}

TEST_CASE("field storage and finiteness scan") {
    Field f(3, 4);
    f.at(2, 3) = 7.0;
    CHECK(f.row(2)[3] == 7.0);
    CHECK(f.v.size() == 12);
    CHECK(f.all_finite());
    f.at(1, 1) = std::nan("");
    CHECK(!f.all_finite());
}

TEST_CASE("trapezoid weights halve at the edges") {
    CHECK(trapezoid_weight(0, 8, 0.125) == doctest::Approx(0.0625));
    CHECK(trapezoid_weight(8, 8, 0.125) == doctest::Approx(0.0625));
    CHECK(trapezoid_weight(3, 8, 0.125) == doctest::Approx(0.125));
}

// ---------------------------------------------------------------------------

TEST_CASE("expression evaluation: arithmetic, precedence, functions") {
    CHECK(Expr::parse("2 + 3*x^2").eval(2.0, 0.0) == doctest::Approx(14.0).epsilon(1e-15));
    CHECK(Expr::parse("x*y + t").eval(2.0, 3.0, 5.0) == doctest::Approx(11.0).epsilon(1e-15));
    CHECK(Expr::parse("sin(pi*t)").eval(0.0, 0.5) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(Expr::parse("exp(0)").eval(0.0, 0.0) == doctest::Approx(1.0));
    CHECK(Expr::parse("sqrt(t)").eval(0.0, 4.0) == doctest::Approx(2.0));
    CHECK(Expr::parse("(1+t)^2").eval(0.0, 2.0) == doctest::Approx(9.0));
    CHECK(Expr::parse("1 - 2 - 3").eval(0.0, 0.0) == doctest::Approx(-4.0));
    CHECK(Expr::parse("6/3/2").eval(0.0, 0.0) == doctest::Approx(1.0));
}

TEST_CASE("clip01 clamps its argument") {
    const Expr e = Expr::parse("clip01(t)");
    CHECK(e.eval(0.0, -0.5) == 0.0);
    CHECK(e.eval(0.0, 0.3) == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(e.eval(0.0, 2.0) == 1.0);
    // the frozen bump profile is expressible and compactly supported
    const Expr bump = Expr::parse("sin(pi*clip01((x-0.27)/0.46))^4");
    CHECK(bump.eval(0.1, 0.0) == 0.0);
    // At the right contact the clipped argument is exactly 1; sin(pi*1)^4
    // is roundoff-of-pi to the fourth power, not an exact zero.
    CHECK(bump.eval(0.9, 0.0) <= 1e-60);
    CHECK(bump.eval(0.5, 0.0) == doctest::Approx(std::pow(std::sin(M_PI * 0.5), 4)).epsilon(1e-12));
}

TEST_CASE("expression variable usage") {
    CHECK(Expr::parse("x + sin(t)").uses('t'));
    CHECK(!Expr::parse("x^2 + 1").uses('t'));
    CHECK(Expr::parse("y*2").uses('y'));
    CHECK(!Expr::parse("pi").uses('x'));
}

TEST_CASE("expression whitelist rejections") {
    CHECK_THROWS_AS(Expr::parse("foo(x)"), ValidationError);
    CHECK_THROWS_AS(Expr::parse("x +"), ValidationError);
    CHECK_THROWS_AS(Expr::parse("(x"), ValidationError);
    CHECK_THROWS_AS(Expr::parse("x & y"), ValidationError);
    CHECK_THROWS_AS(Expr::parse(""), ValidationError);
    CHECK_THROWS_AS(Expr::parse("tan(x)"), ValidationError);
}

// ---------------------------------------------------------------------------

static const char* kSample =
    "# run configuration\n"
    "[grid]\n"
    "n_cells = 64\n"
    "T = 1.0\n"
    "flag = true\n"
    "; another comment\n"
    "[sweep]\n"
    "values = 2, 4, 8\n"
    "seed = 12345678901\n";

TEST_CASE("config parsing, typed getters, defaults") {
    const ConfigFile cfg = ConfigFile::parse_text(kSample);
    CHECK(cfg.get_int("grid.n_cells") == 64);
    CHECK(cfg.get_double("grid.T") == doctest::Approx(1.0));
    CHECK(cfg.get_bool("grid.flag"));
    CHECK(cfg.get_u64("sweep.seed") == 12345678901ULL);
    const std::vector<double> vals = cfg.get_double_list("sweep.values");
    REQUIRE(vals.size() == 3);
    CHECK(vals[1] == doctest::Approx(4.0));
    CHECK(cfg.get_int_or("grid.missing", 7) == 7);
    CHECK(cfg.get_string_or("grid.missing", "dflt") == "dflt");
    CHECK(cfg.has("grid.T"));
    CHECK(!cfg.has("grid.missing"));
}

TEST_CASE("missing keys are reported with the exact key path") {
    const ConfigFile cfg = ConfigFile::parse_text(kSample);
    try {
        cfg.get_double("grid.n_steps");
        FAIL("expected a ValidationError");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("grid.n_steps") != std::string::npos);
    }
}

TEST_CASE("config rejects malformed structure") {
    CHECK_THROWS_AS(ConfigFile::parse_text("key = 1\n"), ValidationError);  // outside a section
    CHECK_THROWS_AS(ConfigFile::parse_text("[a]\nk = 1\nk = 2\n"), ValidationError);  // duplicate
    CHECK_THROWS_AS(ConfigFile::parse_text("[a\nk = 1\n"), ValidationError);  // malformed header
    CHECK_THROWS_AS(ConfigFile::parse_text("[a]\nnovalue\n"), ValidationError);
    CHECK_THROWS_AS(ConfigFile::parse_text("[a]\n = 3\n"), ValidationError);  // empty key
    CHECK_THROWS_AS(ConfigFile::parse_text("[]\n"), ValidationError);
}

TEST_CASE("config rejects unparsable values with the key path") {
    const ConfigFile cfg = ConfigFile::parse_text("[a]\nx = 1.5extra\nn = 2.5\nb = maybe\n");
    CHECK_THROWS_AS(cfg.get_double("a.x"), ValidationError);
    CHECK_THROWS_AS(cfg.get_int("a.n"), ValidationError);
    CHECK_THROWS_AS(cfg.get_bool("a.b"), ValidationError);
    try {
        cfg.get_double("a.x");
        FAIL("expected a ValidationError");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("a.x") != std::string::npos);
    }
}

TEST_CASE("unknown keys are rejected against a schema") {
    const ConfigFile cfg = ConfigFile::parse_text("[a]\nx = 1\ntypo = 2\n");
    CHECK_THROWS_AS(cfg.require_known({"a.x"}), ValidationError);
    CHECK_NOTHROW(cfg.require_known({"a.x", "a.typo"}));
    try {
        cfg.require_known({"a.x"});
        FAIL("expected a ValidationError");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("a.typo") != std::string::npos);
    }
}

TEST_CASE("config preserves raw text and key order") {
    const ConfigFile cfg = ConfigFile::parse_text(kSample);
    CHECK(cfg.text() == std::string(kSample));
    REQUIRE(cfg.keys().size() == 5);
    CHECK(cfg.keys().front() == "grid.n_cells");
    CHECK(cfg.keys().back() == "sweep.seed");
}
