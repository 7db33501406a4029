#include "fraclab/run.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "fraclab/carleman.hpp"
#include "fraclab/config.hpp"
#include "fraclab/elliptic.hpp"
#include "fraclab/exec.hpp"
#include "fraclab/expr.hpp"
#include "fraclab/forward.hpp"
#include "fraclab/fractional.hpp"
#include "fraclab/grid.hpp"
#include "fraclab/inverse.hpp"
#include "fraclab/norms.hpp"
#include "fraclab/reduction.hpp"
#include "fraclab/report.hpp"
#include "fraclab/rng.hpp"

namespace fraclab {

namespace {

// ---------------------------------------------------------------------------
// config schema
// ---------------------------------------------------------------------------

const std::vector<std::string>& schema() {
    static const std::vector<std::string> keys = {
        "equation.rho1", "equation.rho2",
        "equation.a", "equation.b", "equation.c",
        "equation.a11", "equation.a12", "equation.a22", "equation.b1", "equation.b2",
        "grid.dim", "grid.x_lo", "grid.x_hi", "grid.n_cells",
        "grid.y_lo", "grid.y_hi", "grid.ny_cells",
        "grid.T", "grid.n_steps", "grid.t0_index", "grid.delta",
        "source.g", "source.f", "source.R",
        "forward.scheme", "forward.tol", "forward.max_iter",
        "forward.reference", "forward.refinements",
        "reduction.cut_fraction", "reduction.space_layers",
        "reduction.refinements", "reduction.max_l2",
        "carleman.lambda", "carleman.epsilon",
        "carleman.omega_x_lo", "carleman.omega_x_hi",
        "carleman.omega_y_lo", "carleman.omega_y_hi",
        "carleman.taper_width", "carleman.gamma", "carleman.s_sweep",
        "carleman.seed", "carleman.n_fields", "carleman.checkers",
        "inverse.basis_size", "inverse.basis_start", "inverse.r_min",
        "inverse.alpha", "inverse.method", "inverse.landweber_iters",
        "inverse.data_source", "inverse.noise_level", "inverse.noise_seed",
        "inverse.tau", "inverse.noise_levels", "inverse.trials",
        "inverse.seed", "inverse.M",
        "output.directory", "output.formats",
    };
    return keys;
}

// ---------------------------------------------------------------------------
// small parsing helpers
// ---------------------------------------------------------------------------

std::vector<std::string> split_list(const std::string& raw) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos <= raw.size()) {
        const std::size_t comma = raw.find(',', pos);
        std::string item = comma == std::string::npos ? raw.substr(pos) : raw.substr(pos, comma - pos);
        const std::size_t b = item.find_first_not_of(" \t");
        const std::size_t e = item.find_last_not_of(" \t");
        out.push_back(b == std::string::npos ? std::string() : item.substr(b, e - b + 1));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

std::vector<Face> parse_faces(const std::string& raw, const std::string& key) {
    std::vector<Face> faces;
    for (const std::string& name : split_list(raw)) {
        if (name == "x_lo") faces.push_back(Face::x_lo);
        else if (name == "x_hi") faces.push_back(Face::x_hi);
        else if (name == "y_lo") faces.push_back(Face::y_lo);
        else if (name == "y_hi") faces.push_back(Face::y_hi);
        else throw ValidationError("config key '" + key + "': unknown face '" + name +
                                   "' (expected x_lo/x_hi/y_lo/y_hi)");
    }
    return faces;
}

Expr parse_expr(const ConfigFile& cfg, const std::string& key) {
    try {
        return Expr::parse(cfg.get_string(key));
    } catch (const ValidationError& e) {
        throw ValidationError("config key '" + key + "': " + e.what());
    }
}

Expr parse_expr_or(const ConfigFile& cfg, const std::string& key, const std::string& fallback) {
    if (!cfg.has(key)) return Expr::parse(fallback);
    return parse_expr(cfg, key);
}

/// Elliptic coefficients are time-independent by construction.
CoefFn coef_fn(const ConfigFile& cfg, const std::string& key, const std::string& fallback) {
    Expr e = parse_expr_or(cfg, key, fallback);
    if (e.uses('t'))
        throw ValidationError("config key '" + key + "': operator coefficients must not depend on t");
    return [e](double x, double y) { return e.eval(x, y, 0.0); };
}

// ---------------------------------------------------------------------------
// block builders
// ---------------------------------------------------------------------------

EquationCoefficients build_equation(const ConfigFile& cfg) {
    return EquationCoefficients(cfg.get_double("equation.rho1"), cfg.get_double("equation.rho2"));
}

SpatialGrid build_grid(const ConfigFile& cfg, const std::vector<Face>& gamma) {
    const int dim = cfg.get_int_or("grid.dim", 1);
    if (dim == 1) {
        std::vector<Face> g = gamma.empty() ? std::vector<Face>{Face::x_hi} : gamma;
        return SpatialGrid::interval(cfg.get_double_or("grid.x_lo", 0.0), cfg.get_double_or("grid.x_hi", 1.0),
                                     cfg.get_int("grid.n_cells"), g);
    }
    if (dim == 2) {
        std::vector<Face> g = gamma.empty() ? std::vector<Face>{Face::x_hi, Face::y_lo, Face::y_hi} : gamma;
        return SpatialGrid::rectangle(cfg.get_double_or("grid.x_lo", 0.0), cfg.get_double_or("grid.x_hi", 1.0),
                                      cfg.get_double_or("grid.y_lo", 0.0), cfg.get_double_or("grid.y_hi", 1.0),
                                      cfg.get_int("grid.n_cells"), cfg.get_int("grid.ny_cells"), g);
    }
    throw ValidationError("config key 'grid.dim': must be 1 or 2");
}

/// need_t0: the weight/observation subcommands require an explicit marked
/// time; the plain evolution subcommands only need a valid placeholder.
TimeGrid build_time_grid(const ConfigFile& cfg, bool need_t0) {
    const double T = cfg.get_double("grid.T");
    const int n_steps = cfg.get_int("grid.n_steps");
    int t0_index;
    double delta;
    if (need_t0) {
        t0_index = cfg.get_int("grid.t0_index");
        delta = cfg.get_double("grid.delta");
    } else {
        t0_index = cfg.get_int_or("grid.t0_index", n_steps / 2);
        delta = cfg.get_double_or("grid.delta", T / 8.0);
    }
    return TimeGrid(T, n_steps, t0_index, delta);
}

EllipticOperator build_operator(const ConfigFile& cfg, const SpatialGrid& grid) {
    if (grid.dim == 1)
        return EllipticOperator::assemble(grid, coef_fn(cfg, "equation.a", "1"),
                                          coef_fn(cfg, "equation.b", "0"), coef_fn(cfg, "equation.c", "0"));
    return EllipticOperator::assemble2d(grid, coef_fn(cfg, "equation.a11", "1"),
                                        coef_fn(cfg, "equation.a12", "0"), coef_fn(cfg, "equation.a22", "1"),
                                        coef_fn(cfg, "equation.b1", "0"), coef_fn(cfg, "equation.b2", "0"),
                                        coef_fn(cfg, "equation.c", "0"));
}

std::vector<double> eval_nodal(const Expr& e, const SpatialGrid& grid) {
    std::vector<double> out(grid.size());
    if (grid.dim == 1) {
        for (int i = 0; i < grid.n_nodes(0); ++i) out[i] = e.eval(grid.x(i), 0.0, 0.0);
    } else {
        for (int j = 0; j < grid.n_nodes(1); ++j)
            for (int i = 0; i < grid.n_nodes(0); ++i) out[grid.idx(i, j)] = e.eval(grid.x(i), grid.y(j), 0.0);
    }
    return out;
}

Field eval_space_time(const Expr& e, const SpatialGrid& grid, const TimeGrid& tg) {
    Field out(tg.n_levels(), grid.size());
    for (int n = 0; n < out.nt; ++n) {
        const double t = tg.t(n);
        double* row = out.row(n);
        if (grid.dim == 1) {
            for (int i = 0; i < grid.n_nodes(0); ++i) row[i] = e.eval(grid.x(i), 0.0, t);
        } else {
            for (int j = 0; j < grid.n_nodes(1); ++j)
                for (int i = 0; i < grid.n_nodes(0); ++i) row[grid.idx(i, j)] = e.eval(grid.x(i), grid.y(j), t);
        }
    }
    return out;
}

/// Either a general g or the separated pair (f, R); both at once conflict.
SourceSpec build_source(const ConfigFile& cfg, const SpatialGrid& grid, const TimeGrid& tg) {
    const bool has_g = cfg.has("source.g");
    const bool has_f = cfg.has("source.f");
    const bool has_R = cfg.has("source.R");
    if (has_g && (has_f || has_R))
        throw ValidationError("conflicting source blocks: 'source.g' and 'source.f'/'source.R' are exclusive");
    if (has_g) return SourceSpec::from_field(eval_space_time(parse_expr(cfg, "source.g"), grid, tg));
    if (has_f && has_R)
        return SourceSpec::from_separated(eval_nodal(parse_expr(cfg, "source.f"), grid),
                                          parse_expr(cfg, "source.R"));
    if (has_f || has_R)
        throw ValidationError("the separated source needs both 'source.f' and 'source.R' (only one is set)");
    throw ValidationError("missing config key 'source.g' (or the pair 'source.f' and 'source.R')");
}

TimeScheme build_scheme(const ConfigFile& cfg) {
    const std::string s = cfg.get_string_or("forward.scheme", "bdf2");
    if (s == "bdf2") return TimeScheme::bdf2;
    if (s == "backward_euler") return TimeScheme::backward_euler;
    throw ValidationError("config key 'forward.scheme': expected 'bdf2' or 'backward_euler', got '" + s + "'");
}

SolveOptions build_solve_options(const ConfigFile& cfg) {
    SolveOptions opt;
    opt.scheme = build_scheme(cfg);
    opt.tol = cfg.get_double_or("forward.tol", 1e-12);
    opt.max_iter = cfg.get_int_or("forward.max_iter", 4000);
    return opt;
}

// ---------------------------------------------------------------------------
// artifact accumulation (written only after the run succeeds)
// ---------------------------------------------------------------------------

struct Artifacts {
    std::vector<std::pair<std::string, std::string>> files;  ///< (name, content)
    void add(const std::string& name, std::string content) {
        files.emplace_back(name, std::move(content));
    }
};

// ---------------------------------------------------------------------------
// forward
// ---------------------------------------------------------------------------

struct ErrorPair {
    double max_abs = 0.0;
    double l2 = 0.0;
};

ErrorPair field_error(const Field& u, const Expr& ref, const SpatialGrid& grid, const TimeGrid& tg) {
    ErrorPair err;
    double sum = 0.0;
    for (int n = 0; n < u.nt; ++n) {
        const double wt = (n == 0 || n == u.nt - 1) ? 0.5 * tg.dt() : tg.dt();
        for (int j = 0; j < u.nsp; ++j) {
            const int i = grid.dim == 1 ? j : j % grid.n_nodes(0);
            const int jy = grid.dim == 1 ? 0 : j / grid.n_nodes(0);
            const double exact = ref.eval(grid.x(i), grid.dim == 2 ? grid.y(jy) : 0.0, tg.t(n));
            const double e = u.at(n, j) - exact;
            err.max_abs = std::max(err.max_abs, std::abs(e));
            double wx = trapezoid_weight(i, grid.n_cells[0], grid.h(0));
            if (grid.dim == 2) wx *= trapezoid_weight(jy, grid.n_cells[1], grid.h(1));
            sum += e * e * wt * wx;
        }
    }
    err.l2 = std::sqrt(sum);
    return err;
}

int run_forward(const ConfigFile& cfg, Artifacts& art) {
    const EquationCoefficients eq = build_equation(cfg);
    const SpatialGrid grid = build_grid(cfg, {});
    const TimeGrid tg = build_time_grid(cfg, false);
    const EllipticOperator Lop = build_operator(cfg, grid);
    const SourceSpec src = build_source(cfg, grid, tg);
    const SolveOptions opt = build_solve_options(cfg);

    const bool has_ref = cfg.has("forward.reference");
    Expr ref;
    if (has_ref) ref = parse_expr(cfg, "forward.reference");
    const int refinements = cfg.get_int_or("forward.refinements", 0);
    if (refinements < 0) throw ValidationError("config key 'forward.refinements': must be >= 0");
    if (refinements > 0 && !has_ref)
        throw ValidationError("config key 'forward.refinements': needs 'forward.reference' to measure errors");

    const std::vector<std::string> formats = split_list(cfg.get_string_or("output.formats", "snapshot,csv"));
    for (const std::string& f : formats)
        if (f != "snapshot" && f != "csv")
            throw ValidationError("config key 'output.formats': unknown format '" + f + "'");

    const SolveReport rep = solve_forward(eq, Lop, src, tg, opt);

    CsvTable steps;
    steps.header = {"step", "t", "iterations", "residual"};
    for (std::size_t s = 0; s < rep.iterations.size(); ++s)
        steps.add_row({std::to_string(s + 1), format_g17(tg.t(static_cast<int>(s) + 1)),
                       std::to_string(rep.iterations[s]),
                       format_g17(s < rep.residuals.size() ? rep.residuals[s] : 0.0)});
    art.add("forward_steps.csv", steps.to_string());

    if (std::find(formats.begin(), formats.end(), "snapshot") != formats.end())
        art.add("solution_snapshot.txt", field_snapshot_string(rep.u, grid, tg));
    if (std::find(formats.begin(), formats.end(), "csv") != formats.end())
        art.add("solution.csv", field_to_csv(rep.u, grid, tg).to_string());

    if (has_ref) {
        CsvTable conv;
        conv.header = {"level", "n_cells", "n_steps", "h", "dt", "max_err", "l2_err", "rate"};
        double prev_max = 0.0;
        for (int k = 0; k <= refinements; ++k) {
            const int factor = 1 << k;
            SpatialGrid gk = grid;
            gk.n_cells[0] = grid.n_cells[0] * factor;
            if (grid.dim == 2) gk.n_cells[1] = grid.n_cells[1] * factor;
            const TimeGrid tk(tg.T, tg.n_steps * factor, tg.t0_index * factor, tg.delta);
            const EllipticOperator Lk = build_operator(cfg, gk);
            const SourceSpec sk = build_source(cfg, gk, tk);
            const Field uk = k == 0 ? rep.u : solve_forward(eq, Lk, sk, tk, opt).u;
            const ErrorPair err = field_error(uk, ref, gk, tk);
            const double rate = k == 0 ? 0.0 : std::log2(prev_max / err.max_abs);
            conv.add_row({std::to_string(k), std::to_string(gk.n_cells[0]), std::to_string(tk.n_steps),
                          format_g17(gk.h(0)), format_g17(tk.dt()), format_g17(err.max_abs),
                          format_g17(err.l2), format_g17(rate)});
            prev_max = err.max_abs;
        }
        art.add("forward_convergence.csv", conv.to_string());
    }
    return 0;
}

// ---------------------------------------------------------------------------
// reduce-check
// ---------------------------------------------------------------------------

int run_reduce_check(const ConfigFile& cfg, Artifacts& art) {
    const EquationCoefficients eq = build_equation(cfg);
    const SpatialGrid grid = build_grid(cfg, {});
    const TimeGrid tg = build_time_grid(cfg, false);
    const SolveOptions opt = build_solve_options(cfg);
    const double cut_fraction = cfg.get_double_or("reduction.cut_fraction", 0.1);
    const int space_layers = cfg.get_int_or("reduction.space_layers", 2);
    const int refinements = cfg.get_int_or("reduction.refinements", 0);
    if (refinements < 0) throw ValidationError("config key 'reduction.refinements': must be >= 0");
    if (cut_fraction < 0.0 || cut_fraction >= 1.0)
        throw ValidationError("config key 'reduction.cut_fraction': must lie in [0, 1)");

    // Validate operator and source once on the base grids before any solve.
    build_operator(cfg, grid);
    build_source(cfg, grid, tg);

    CsvTable csv;
    csv.header = {"level", "n_cells", "n_steps", "max_abs", "l2", "first_level", "last_level"};
    double last_l2 = 0.0;
    for (int k = 0; k <= refinements; ++k) {
        const int factor = 1 << k;
        SpatialGrid gk = grid;
        gk.n_cells[0] = grid.n_cells[0] * factor;
        if (grid.dim == 2) gk.n_cells[1] = grid.n_cells[1] * factor;
        const TimeGrid tk(tg.T, tg.n_steps * factor, tg.t0_index * factor, tg.delta);
        const EllipticOperator Lk = build_operator(cfg, gk);
        const SourceSpec sk = build_source(cfg, gk, tk);
        const Field gk_field = sk.materialize(gk, tk);
        const Field uk = solve_forward(eq, Lk, gk_field, tk, opt).u;
        const ReducedSource G = compute_G(eq, Lk, gk_field, tk.dt());
        const ReductionReport rr =
            check_reduced_equation(uk, G, eq, Lk, tk.dt(), cut_fraction, space_layers);
        csv.add_row({std::to_string(k), std::to_string(gk.n_cells[0]), std::to_string(tk.n_steps),
                     format_g17(rr.max_abs), format_g17(rr.l2), std::to_string(rr.first_level),
                     std::to_string(rr.last_level)});
        last_l2 = rr.l2;
        if (!std::isfinite(rr.l2) || !std::isfinite(rr.max_abs))
            throw NumericalError("reduce-check: non-finite residual norm at refinement level " +
                                 std::to_string(k));
    }
    art.add("reduce_check.csv", csv.to_string());

    if (cfg.has("reduction.max_l2") && last_l2 > cfg.get_double("reduction.max_l2")) {
        std::cerr << "reduce-check: residual l2 " << format_g17(last_l2)
                  << " exceeds reduction.max_l2 = " << format_g17(cfg.get_double("reduction.max_l2")) << '\n';
        return 2;
    }
    return 0;
}

// ---------------------------------------------------------------------------
// carleman-check
// ---------------------------------------------------------------------------

int run_carleman_check(const ConfigFile& cfg, Artifacts& art) {
    const EquationCoefficients eq = build_equation(cfg);
    std::vector<Face> gamma;
    if (cfg.has("carleman.gamma")) gamma = parse_faces(cfg.get_string("carleman.gamma"), "carleman.gamma");
    const SpatialGrid grid = build_grid(cfg, gamma);
    if (grid.dim != 1)
        throw ValidationError(
            "carleman-check runs the 1D ratio sweeps; 2D geometry is validated at construction only");
    const TimeGrid tg = build_time_grid(cfg, true);
    const EllipticOperator Lop = build_operator(cfg, grid);

    CarlemanParams params;
    params.lambda = cfg.get_double_or("carleman.lambda", params.lambda);
    params.epsilon = cfg.get_double_or("carleman.epsilon", params.epsilon);
    params.omega_x_lo = cfg.get_double_or("carleman.omega_x_lo", params.omega_x_lo);
    params.omega_x_hi = cfg.get_double_or("carleman.omega_x_hi", params.omega_x_hi);
    params.omega_y_lo = cfg.get_double_or("carleman.omega_y_lo", params.omega_y_lo);
    params.omega_y_hi = cfg.get_double_or("carleman.omega_y_hi", params.omega_y_hi);
    params.taper_width = cfg.get_double_or("carleman.taper_width", params.taper_width);

    std::vector<double> s_sweep =
        cfg.has("carleman.s_sweep") ? cfg.get_double_list("carleman.s_sweep")
                                    : std::vector<double>{2.0, 4.0, 8.0, 16.0, 32.0, 64.0};
    for (std::size_t i = 0; i + 1 < s_sweep.size(); ++i)
        if (!(s_sweep[i] < s_sweep[i + 1]))
            throw ValidationError("config key 'carleman.s_sweep': values must be strictly increasing");
    if (s_sweep.size() < 3)
        throw ValidationError("config key 'carleman.s_sweep': need at least 3 sweep points");

    const std::uint64_t seed = cfg.get_u64_or("carleman.seed", 1);
    const int n_fields = cfg.get_int_or("carleman.n_fields", 10);
    if (n_fields < 1) throw ValidationError("config key 'carleman.n_fields': must be >= 1");
    const std::vector<std::string> checkers =
        split_list(cfg.get_string_or("carleman.checkers", "parabolic,combined,elliptic"));
    for (const std::string& c : checkers)
        if (c != "parabolic" && c != "combined" && c != "elliptic")
            throw ValidationError("config key 'carleman.checkers': unknown checker '" + c + "'");

    const CarlemanGeometry geom = build_weight(grid, tg, params);
    (void)build_level_sets(geom);  // asserts the nesting/inclusion invariants

    CsvTable ratios;
    ratios.header = {"checker", "field_index", "s",     "lambda",        "lhs",
                     "residual_term", "ratio", "boundary_term", "log_shift"};
    CsvTable summary;
    summary.header = {"checker", "field_index", "tail_constant", "s_star", "tail_bounded"};

    bool failed = false;
    for (const std::string& checker : checkers) {
        for (int index = 0; index < n_fields; ++index) {
            CarlemanRatioReport rep;
            if (checker == "parabolic") {
                const Field v = carleman_test_field(geom, seed, index);
                rep = check_parabolic_carleman(v, geom, Lop, eq, s_sweep);
            } else if (checker == "combined") {
                const Field v = carleman_test_field(geom, seed, index);
                rep = check_combined_carleman(v, geom, Lop, eq, s_sweep);
            } else {
                const std::vector<double> v = carleman_test_field_spatial(geom, seed, index);
                rep = check_elliptic_carleman(v, geom, Lop, s_sweep);
            }
            for (const CarlemanRatioRow& row : rep.rows) {
                ratios.add_row({checker, std::to_string(index), format_g17(row.s), format_g17(row.lambda),
                                format_g17(row.lhs), format_g17(row.residual), format_g17(row.ratio),
                                format_g17(row.boundary_term), format_g17(row.log_shift)});
                if (row.violation) failed = true;
                if (row.defined && !std::isfinite(row.ratio)) failed = true;
            }
            summary.add_row({checker, std::to_string(index), format_g17(rep.tail_constant),
                             format_g17(rep.s_star), rep.tail_bounded ? "1" : "0"});
            if (!rep.tail_bounded) failed = true;
        }
    }
    art.add("carleman_ratios.csv", ratios.to_string());
    art.add("carleman_summary.csv", summary.to_string());
    if (failed) {
        std::cerr << "carleman-check: a ratio sweep violated the bounded-tail property\n";
        return 2;
    }
    return 0;
}

// ---------------------------------------------------------------------------
// invert / stability-experiment
// ---------------------------------------------------------------------------

struct InversionSetup {
    EquationCoefficients eq;
    SpatialGrid grid;
    TimeGrid tg;
    EllipticOperator Lop;
    Expr R;
    std::vector<double> f_true;  ///< nodal, full grid
    ObservationMap map;
    std::vector<double> f_true_coeffs;  ///< f_true at the basis nodes
    std::vector<double> clean_data;     ///< u(., t0) at the interior nodes
};

InversionSetup build_inversion(const ConfigFile& cfg) {
    const EquationCoefficients eq = build_equation(cfg);
    const SpatialGrid grid = build_grid(cfg, {});
    if (grid.dim != 1)
        throw ValidationError("the reconstruction pipeline supports 1D grids");
    const TimeGrid tg = build_time_grid(cfg, true);
    const EllipticOperator Lop = build_operator(cfg, grid);

    if (cfg.has("source.g"))
        throw ValidationError(
            "inversion needs the separated source form ('source.f' and 'source.R'), not 'source.g'");
    const SourceSpec src = build_source(cfg, grid, tg);

    ObservationMapOptions mopt;
    mopt.basis_size = cfg.get_int_or("inverse.basis_size", 32);
    mopt.basis_start = cfg.get_int_or("inverse.basis_start", -1);
    mopt.r_min = cfg.get_double_or("inverse.r_min", 1e-8);
    mopt.scheme = build_scheme(cfg);

    // The R positivity requirement is checked inside the assembly, before
    // any forward solve, so a violating config exits at validation.
    ObservationMap map = assemble_observation_map(eq, Lop, src.R, tg, mopt);

    InversionSetup setup{eq, grid, tg, Lop, src.R, src.f, std::move(map), {}, {}};
    setup.f_true_coeffs.reserve(setup.map.basis_nodes.size());
    for (int node : setup.map.basis_nodes) setup.f_true_coeffs.push_back(setup.f_true[node]);

    const std::string data_source = cfg.get_string_or("inverse.data_source", "mitigated");
    const SolveOptions sopt = build_solve_options(cfg);
    if (data_source == "mitigated") {
        // Twice-refined synthesis grid in space and time; injection back to
        // the inversion grid keeps the discretizations genuinely distinct.
        const SpatialGrid fine = SpatialGrid::interval(grid.lo[0], grid.hi[0], 2 * grid.n_cells[0],
                                                       grid.gamma_faces);
        const TimeGrid tf(tg.T, 2 * tg.n_steps, 2 * tg.t0_index, tg.delta);
        const EllipticOperator Lf = build_operator(cfg, fine);
        Expr f_expr = parse_expr(cfg, "source.f");
        const SourceSpec sf = SourceSpec::from_separated(eval_nodal(f_expr, fine), setup.R);
        const Field uf = solve_forward(setup.eq, Lf, sf, tf, sopt).u;
        std::vector<double> fine_row(uf.row(tf.t0_index), uf.row(tf.t0_index) + uf.nsp);
        setup.clean_data = restrict_injection(fine_row, grid.n_cells[0]);
    } else if (data_source == "crime") {
        const SourceSpec sc = SourceSpec::from_separated(setup.f_true, setup.R);
        const Field uc = solve_forward(setup.eq, setup.Lop, sc, tg, sopt).u;
        setup.clean_data.reserve(setup.map.obs_nodes.size());
        for (int node : setup.map.obs_nodes) setup.clean_data.push_back(uc.at(tg.t0_index, node));
    } else {
        throw ValidationError("config key 'inverse.data_source': expected 'mitigated' or 'crime', got '" +
                              data_source + "'");
    }
    return setup;
}

int run_invert(const ConfigFile& cfg, Artifacts& art) {
    InversionSetup setup = build_inversion(cfg);
    const double h = setup.grid.h(0);

    const double noise_level = cfg.get_double_or("inverse.noise_level", 0.0);
    if (noise_level < 0.0) throw ValidationError("config key 'inverse.noise_level': must be >= 0");

    ReconstructOptions ropt;
    const std::string method = cfg.get_string_or("inverse.method", "tikhonov");
    if (method == "tikhonov") ropt.method = Regularizer::tikhonov;
    else if (method == "landweber") ropt.method = Regularizer::landweber;
    else throw ValidationError("config key 'inverse.method': expected 'tikhonov' or 'landweber', got '" +
                               method + "'");
    ropt.landweber_iters = cfg.get_int_or("inverse.landweber_iters", 0);
    ropt.tau = cfg.get_double_or("inverse.tau", 1.0);
    if (cfg.has("inverse.alpha")) {
        const std::string a = cfg.get_string("inverse.alpha");
        ropt.alpha = (a == "auto") ? -1.0 : cfg.get_double("inverse.alpha");
    } else {
        ropt.alpha = noise_level > 0.0 ? -1.0 : 1e-12;
    }
    if (ropt.alpha < 0.0 && noise_level <= 0.0)
        throw ValidationError(
            "config key 'inverse.alpha': 'auto' (discrepancy principle) needs inverse.noise_level > 0");

    std::vector<double> data = setup.clean_data;
    if (noise_level > 0.0) {
        SplitMix64 rng = split_stream(cfg.get_u64_or("inverse.noise_seed", 1), 0, 0);
        std::vector<double> eta(data.size());
        for (double& e : eta) e = rng.next_gaussian();
        const double target_scale = noise_level / sobolev_norm(eta, h, 4);
        double sq = 0.0;
        for (std::size_t i = 0; i < eta.size(); ++i) {
            eta[i] *= target_scale;
            sq += eta[i] * eta[i];
            data[i] += eta[i];
        }
        ropt.noise_level = std::sqrt(sq);
    }

    const ReconstructionResult rec = reconstruct(setup.map, data, ropt);
    for (double c : rec.coeffs)
        if (!std::isfinite(c)) throw NumericalError("invert: non-finite reconstruction coefficients");

    const std::vector<double> f_hat = expand_to_grid(setup.map, rec.coeffs);
    const double err = relative_h2_error(rec.coeffs, setup.f_true_coeffs, h);

    CsvTable table;
    table.header = {"node", "x", "f_true", "f_hat"};
    for (int i = 0; i < setup.grid.n_nodes(0); ++i)
        table.add_row({std::to_string(i), format_g17(setup.grid.x(i)), format_g17(setup.f_true[i]),
                       format_g17(f_hat[i])});
    art.add("reconstruction.csv", table.to_string());

    CsvTable summary;
    summary.header = {"alpha",           "misfit",        "seminorm",  "normal_residual",
                      "err_h2_omega",    "condition_number", "discrepancy_attained", "iterations"};
    summary.add_row({format_g17(rec.alpha), format_g17(rec.misfit), format_g17(rec.seminorm),
                     format_g17(rec.normal_residual), format_g17(err),
                     format_g17(setup.map.condition_number), rec.discrepancy_attained ? "1" : "0",
                     std::to_string(rec.iterations)});
    art.add("invert_summary.csv", summary.to_string());
    return 0;
}

int run_stability(const ConfigFile& cfg, Artifacts& art) {
    InversionSetup setup = build_inversion(cfg);

    StabilityOptions sopt;
    sopt.noise_levels = cfg.get_double_list("inverse.noise_levels");
    sopt.trials = cfg.get_int_or("inverse.trials", 8);
    sopt.seed = cfg.get_u64_or("inverse.seed", 1);
    sopt.prior_bound_M = cfg.get_double_or("inverse.M", 10.0);
    sopt.tau = cfg.get_double_or("inverse.tau", 1.0);

    const StabilityReport rep = stability_experiment(setup.map, setup.f_true_coeffs, setup.clean_data, sopt);

    CsvTable csv;
    csv.header = {"noise_level", "trial", "data_norm_h4", "err_h2_omega", "alpha", "kappa_hat_running"};
    for (const StabilityRow& row : rep.rows)
        csv.add_row({format_g17(row.noise_level), std::to_string(row.trial), format_g17(row.data_norm_h4),
                     format_g17(row.err_h2_omega), format_g17(row.alpha),
                     format_g17(row.kappa_hat_running)});
    art.add("stability.csv", csv.to_string());

    CsvTable summary;
    summary.header = {"kappa_hat", "r_squared", "c_hat", "prior_bound_M", "rows"};
    summary.add_row({format_g17(rep.kappa_hat), format_g17(rep.r_squared), format_g17(rep.c_hat),
                     format_g17(rep.prior_bound_M), std::to_string(rep.rows.size())});
    art.add("stability_summary.csv", summary.to_string());

    if (!std::isfinite(rep.kappa_hat) || !std::isfinite(rep.c_hat))
        throw NumericalError("stability-experiment: non-finite exponent fit");
    return 0;
}

}  // namespace

// ---------------------------------------------------------------------------
// entry point
// ---------------------------------------------------------------------------

int run(const std::string& subcommand, const std::string& config_path) {
    const auto t_start = std::chrono::steady_clock::now();
    try {
        const ConfigFile cfg = ConfigFile::parse_file(config_path);
        cfg.require_known(schema());

        Artifacts art;
        int status = 0;
        if (subcommand == "forward") status = run_forward(cfg, art);
        else if (subcommand == "reduce-check") status = run_reduce_check(cfg, art);
        else if (subcommand == "carleman-check") status = run_carleman_check(cfg, art);
        else if (subcommand == "invert") status = run_invert(cfg, art);
        else if (subcommand == "stability-experiment") status = run_stability(cfg, art);
        else throw ValidationError("unknown subcommand '" + subcommand + "'");

        const std::string dir = resolve_output_dir(cfg.get_string_or("output.directory", "out"));
        for (const auto& [name, content] : art.files) write_text_file(dir + "/" + name, content);
        const double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
        write_manifest(dir + "/manifest.txt", subcommand, cfg.text(), wall);
        std::cout << subcommand << ": wrote " << art.files.size() + 1 << " artifacts to " << dir << '\n';
        return status;
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << '\n';
        return 1;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}

}  // namespace fraclab
