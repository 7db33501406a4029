#include "fraclab/forward.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "fraclab/fractional.hpp"
#include "fraclab/linalg.hpp"

namespace fraclab {

EquationCoefficients::EquationCoefficients(double rho1_, double rho2_) {
    if (!(rho1_ > 0.0)) throw ValidationError("equation.rho1 must be > 0");
    if (rho2_ == 0.0) throw ValidationError("equation.rho2 must be nonzero");
    rho1 = rho1_;
    rho2 = rho2_;
}

EquationCoefficients EquationCoefficients::classical_limit(double rho1_) {
    if (!(rho1_ > 0.0)) throw ValidationError("equation.rho1 must be > 0");
    EquationCoefficients eq;
    eq.rho1 = rho1_;
    eq.rho2 = 0.0;
    return eq;
}

SourceSpec SourceSpec::from_field(Field g_full) {
    SourceSpec s;
    s.separated = false;
    s.g = std::move(g_full);
    return s;
}

SourceSpec SourceSpec::from_separated(std::vector<double> f_nodal, Expr R_expr) {
    SourceSpec s;
    s.separated = true;
    s.f = std::move(f_nodal);
    s.R = std::move(R_expr);
    return s;
}

Field SourceSpec::materialize(const SpatialGrid& grid, const TimeGrid& tg) const {
    const int nsp = grid.size();
    const int nl = tg.n_levels();
    if (!separated) {
        if (g.nt != nl || g.nsp != nsp)
            throw ValidationError("source field shape does not match the grids");
        return g;
    }
    if (static_cast<int>(f.size()) != nsp)
        throw ValidationError("source.f length does not match the spatial grid");
    Field out(nl, nsp);
    for (int n = 0; n < nl; ++n) {
        const double t = tg.t(n);
        if (grid.dim == 1) {
            for (int i = 0; i < nsp; ++i) out.at(n, i) = f[i] * R.eval(grid.x(i), t);
        } else {
            for (int j = 0; j < grid.n_nodes(1); ++j)
                for (int i = 0; i < grid.n_nodes(0); ++i) {
                    const int k = grid.idx(i, j);
                    out.at(n, k) = f[k] * R.eval(grid.x(i), grid.y(j), t);
                }
        }
    }
    return out;
}

double SourceSpec::min_abs_R_at_t0(const SpatialGrid& grid, const TimeGrid& tg) const {
    if (!separated) throw ValidationError("min_abs_R_at_t0 requires a separated source");
    const double t0 = tg.t0();
    double mn = 1e300;
    if (grid.dim == 1) {
        for (int i = 0; i < grid.size(); ++i)
            mn = std::min(mn, std::abs(R.eval(grid.x(i), t0)));
    } else {
        for (int j = 0; j < grid.n_nodes(1); ++j)
            for (int i = 0; i < grid.n_nodes(0); ++i)
                mn = std::min(mn, std::abs(R.eval(grid.x(i), grid.y(j), t0)));
    }
    return mn;
}

namespace {

/// rho1 * u_t history contribution at node j for step n (moves to the RHS).
inline double time_history(TimeScheme scheme, int n, double rho1_over_dt, const Field& u, int j) {
    if (scheme == TimeScheme::bdf2 && n >= 2)
        return rho1_over_dt * (2.0 * u.at(n - 1, j) - 0.5 * u.at(n - 2, j));
    return rho1_over_dt * u.at(n - 1, j);
}

inline double lhs_time_coef(TimeScheme scheme, int n, double rho1_over_dt) {
    return (scheme == TimeScheme::bdf2 && n >= 2) ? 1.5 * rho1_over_dt : rho1_over_dt;
}

SolveReport solve_forward_1d(const EquationCoefficients& eq, const EllipticOperator& Lop,
                             const Field& g, const TimeGrid& tg, const SolveOptions& opt) {
    const SpatialGrid& grid = Lop.grid;
    const int nsp = grid.size();
    const int n_steps = tg.n_steps;
    const double dt = tg.dt();
    const double h = grid.h(0);
    const double inv_h2 = 1.0 / (h * h), inv_2h = 0.5 / h;
    const double rho1_over_dt = eq.rho1 / dt;
    const L1Weights lw = L1Weights::build(n_steps, dt);
    const double kappa = lw.prefactor;  // w_0 = 1

    // Bands of [lhs - L] for the two time coefficients in play.
    auto build_bands = [&](double lhs, std::vector<double>& sub, std::vector<double>& dia,
                           std::vector<double>& sup) {
        sub.assign(nsp, 0.0);
        dia.assign(nsp, 1.0);
        sup.assign(nsp, 0.0);
        for (int i = 1; i + 1 < nsp; ++i) {
            const double aw = Lop.a11_face_x[i - 1] * inv_h2;
            const double ae = Lop.a11_face_x[i] * inv_h2;
            sub[i] = -aw + Lop.b1[i] * inv_2h;
            dia[i] = lhs + eq.rho2 * kappa + aw + ae - Lop.c[i];
            sup[i] = -ae - Lop.b1[i] * inv_2h;
        }
    };
    std::vector<double> sub1, dia1, sup1, sub2, dia2, sup2;
    build_bands(lhs_time_coef(opt.scheme, 1, rho1_over_dt), sub1, dia1, sup1);
    build_bands(lhs_time_coef(opt.scheme, 2, rho1_over_dt), sub2, dia2, sup2);

    SolveReport rep;
    rep.u = Field(tg.n_levels(), nsp);
    rep.iterations.reserve(n_steps);
    rep.residuals.reserve(n_steps);
    Field du(n_steps, nsp);  // du row k holds u_{k+1} - u_k
    std::vector<double> rhs(nsp);

    for (int n = 1; n <= n_steps; ++n) {
        const bool first = (n == 1) || opt.scheme == TimeScheme::backward_euler;
        const std::vector<double>& sub = first ? sub1 : sub2;
        const std::vector<double>& dia = first ? dia1 : dia2;
        const std::vector<double>& sup = first ? sup1 : sup2;
        par_for(opt.ex, nsp, [&](std::ptrdiff_t ii) {
            const int i = static_cast<int>(ii);
            if (i == 0 || i == nsp - 1) {
                rhs[i] = 0.0;  // homogeneous Dirichlet rows
                return;
            }
            double hist = 0.0;
            for (int j = 1; j < n; ++j) hist += lw.w[j] * du.at(n - 1 - j, i);
            rhs[i] = g.at(n, i) + time_history(opt.scheme, n, rho1_over_dt, rep.u, i) +
                     eq.rho2 * kappa * rep.u.at(n - 1, i) - eq.rho2 * lw.prefactor * hist;
        });
        std::vector<double> x = solve_tridiagonal(sub, dia, sup, rhs);
        // True residual of the step's linear system, relative to |rhs|_inf.
        double rmax = 0.0, bmax = 0.0;
        for (int i = 0; i < nsp; ++i) {
            double ax = dia[i] * x[i];
            if (i > 0) ax += sub[i] * x[i - 1];
            if (i + 1 < nsp) ax += sup[i] * x[i + 1];
            rmax = std::max(rmax, std::abs(ax - rhs[i]));
            bmax = std::max(bmax, std::abs(rhs[i]));
        }
        const double rel = bmax > 0.0 ? rmax / bmax : rmax;
        rep.iterations.push_back(1);
        rep.residuals.push_back(rel);
        rep.max_residual = std::max(rep.max_residual, rel);
        for (int i = 0; i < nsp; ++i) {
            rep.u.at(n, i) = x[i];
            du.at(n - 1, i) = x[i] - rep.u.at(n - 1, i);
        }
        for (int i = 0; i < nsp; ++i) {
            if (!std::isfinite(x[i]))
                throw NumericalError("forward solve: non-finite value at step " + std::to_string(n));
        }
    }
    return rep;
}

SolveReport solve_forward_2d(const EquationCoefficients& eq, const EllipticOperator& Lop,
                             const Field& g, const TimeGrid& tg, const SolveOptions& opt) {
    const SpatialGrid& grid = Lop.grid;
    const int nsp = grid.size();
    const int nx1 = grid.n_nodes(0), ny1 = grid.n_nodes(1);
    const int n_steps = tg.n_steps;
    const double dt = tg.dt();
    const double hx = grid.h(0), hy = grid.h(1);
    const double rho1_over_dt = eq.rho1 / dt;
    const L1Weights lw = L1Weights::build(n_steps, dt);
    const double kappa = lw.prefactor;

    std::vector<char> bdry(nsp, 0);
    for (int j = 0; j < ny1; ++j)
        for (int i = 0; i < nx1; ++i)
            if (grid.on_boundary(i, j)) bdry[grid.idx(i, j)] = 1;

    auto diag_of = [&](double lhs) {
        std::vector<double> d(nsp, 1.0);
        for (int j = 1; j + 1 < ny1; ++j)
            for (int i = 1; i + 1 < nx1; ++i) {
                const int k = grid.idx(i, j);
                const double fe = Lop.a11_face_x[static_cast<std::size_t>(j) * (nx1 - 1) + i];
                const double fw = Lop.a11_face_x[static_cast<std::size_t>(j) * (nx1 - 1) + i - 1];
                const double fn = Lop.a22_face_y[static_cast<std::size_t>(j) * nx1 + i];
                const double fs = Lop.a22_face_y[static_cast<std::size_t>(j - 1) * nx1 + i];
                d[k] = lhs + eq.rho2 * kappa + (fe + fw) / (hx * hx) + (fn + fs) / (hy * hy) -
                       Lop.c[k];
            }
        return d;
    };

    SolveReport rep;
    rep.u = Field(tg.n_levels(), nsp);
    Field du(n_steps, nsp);
    std::vector<double> rhs(nsp), lu;

    for (int n = 1; n <= n_steps; ++n) {
        const double lhs = lhs_time_coef(opt.scheme, n, rho1_over_dt);
        const std::vector<double> diag = diag_of(lhs);
        ApplyFn apply = [&](const std::vector<double>& x, std::vector<double>& ax) {
            const std::vector<double> lx = Lop.apply(x, opt.ex);
            ax.resize(nsp);
            par_for(opt.ex, nsp, [&](std::ptrdiff_t k) {
                ax[k] = bdry[k] ? x[k] : (lhs + eq.rho2 * kappa) * x[k] - lx[k];
            });
        };
        par_for(opt.ex, nsp, [&](std::ptrdiff_t kk) {
            const int k = static_cast<int>(kk);
            if (bdry[k]) {
                rhs[k] = 0.0;
                return;
            }
            double hist = 0.0;
            for (int j = 1; j < n; ++j) hist += lw.w[j] * du.at(n - 1 - j, k);
            rhs[k] = g.at(n, k) + time_history(opt.scheme, n, rho1_over_dt, rep.u, k) +
                     eq.rho2 * kappa * rep.u.at(n - 1, k) - eq.rho2 * lw.prefactor * hist;
        });
        KrylovResult kr = bicgstab(apply, diag, rhs, opt.tol, opt.max_iter, opt.ex);
        if (!kr.converged)
            throw NumericalError("forward solve: linear solve failed at step " + std::to_string(n) +
                                 " (relative residual " + std::to_string(kr.residual) + ")");
        rep.iterations.push_back(kr.iterations);
        rep.residuals.push_back(kr.residual);
        rep.max_residual = std::max(rep.max_residual, kr.residual);
        for (int k = 0; k < nsp; ++k) {
            if (!std::isfinite(kr.x[k]))
                throw NumericalError("forward solve: non-finite value at step " + std::to_string(n));
            rep.u.at(n, k) = kr.x[k];
            du.at(n - 1, k) = kr.x[k] - rep.u.at(n - 1, k);
        }
    }
    return rep;
}

}  // namespace

SolveReport solve_forward(const EquationCoefficients& eq, const EllipticOperator& Lop,
                          const Field& g, const TimeGrid& tg, const SolveOptions& opt) {
    if (g.nt != tg.n_levels() || g.nsp != Lop.grid.size())
        throw ValidationError("forward solve: source shape does not match the grids");
    if (!g.all_finite()) throw NumericalError("forward solve: source contains non-finite values");
    return Lop.grid.dim == 1 ? solve_forward_1d(eq, Lop, g, tg, opt)
                             : solve_forward_2d(eq, Lop, g, tg, opt);
}

SolveReport solve_forward(const EquationCoefficients& eq, const EllipticOperator& Lop,
                          const SourceSpec& src, const TimeGrid& tg, const SolveOptions& opt) {
    return solve_forward(eq, Lop, src.materialize(Lop.grid, tg), tg, opt);
}

std::vector<std::vector<double>> solve_forward_batch(const EquationCoefficients& eq,
                                                     const EllipticOperator& Lop,
                                                     const std::vector<std::vector<double>>& basis_f,
                                                     const Expr& R, const TimeGrid& tg,
                                                     const SolveOptions& opt) {
    std::vector<std::vector<double>> out;
    out.reserve(basis_f.size());
    for (const std::vector<double>& f : basis_f) {
        const SourceSpec src = SourceSpec::from_separated(f, R);
        const SolveReport rep = solve_forward(eq, Lop, src, tg, opt);
        const double* row = rep.u.row(tg.t0_index);
        out.emplace_back(row, row + Lop.grid.size());
    }
    return out;
}

}  // namespace fraclab
