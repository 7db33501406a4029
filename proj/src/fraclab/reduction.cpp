#include "fraclab/reduction.hpp"

#include <cmath>

namespace fraclab {

Field ReducedSource::total(double dt, Exec ex) const {
    const int nt = regular.nt, nsp = regular.nsp;
    Field out(nt, nsp);
    par_for(ex, nsp, [&](std::ptrdiff_t jj) {
        const int j = static_cast<int>(jj);
        for (int n = 1; n < nt; ++n) {
            out.at(n, j) = regular.at(n, j) + singular[j] / std::sqrt(M_PI * (n * dt));
        }
    });
    return out;
}

ReducedSource compute_G(const EquationCoefficients& eq, const EllipticOperator& Lop,
                        const Field& g, double dt, Exec ex) {
    const int nsp = Lop.grid.size();
    if (g.nsp != nsp) throw ValidationError("compute_G: source does not match the grid");
    if (g.nt < 3) throw ValidationError("compute_G: need >= 3 time levels");
    const Field cg = caputo_half(g, dt, ex);
    const Field gt = time_derivative_centered(g, dt, ex);
    ReducedSource out;
    out.regular = Field(g.nt, nsp);
    out.singular.resize(nsp);
    for (int j = 0; j < nsp; ++j) out.singular[j] = eq.rho2 * g.at(0, j);
    for (int n = 0; n < g.nt; ++n) {
        const std::vector<double> row(g.row(n), g.row(n) + nsp);
        const std::vector<double> lg = Lop.apply(row, ex);
        for (int j = 0; j < nsp; ++j) {
            out.regular.at(n, j) = eq.rho2 * cg.at(n, j) - eq.rho1 * gt.at(n, j) + lg[j];
        }
    }
    return out;
}

namespace {

/// Centered first difference along x per node, one-sided at the edges.
void grad_row(const SpatialGrid& grid, const std::vector<double>& u, std::vector<double>& dx,
              std::vector<double>& dy) {
    const int nx1 = grid.n_nodes(0);
    if (grid.dim == 1) {
        const double h = grid.h(0);
        dx.resize(nx1);
        for (int i = 0; i < nx1; ++i) {
            if (i == 0)
                dx[i] = (u[1] - u[0]) / h;
            else if (i == nx1 - 1)
                dx[i] = (u[nx1 - 1] - u[nx1 - 2]) / h;
            else
                dx[i] = (u[i + 1] - u[i - 1]) / (2.0 * h);
        }
        return;
    }
    const int ny1 = grid.n_nodes(1);
    const double hx = grid.h(0), hy = grid.h(1);
    dx.resize(u.size());
    dy.resize(u.size());
    for (int j = 0; j < ny1; ++j)
        for (int i = 0; i < nx1; ++i) {
            const int k = grid.idx(i, j);
            if (i == 0)
                dx[k] = (u[grid.idx(1, j)] - u[k]) / hx;
            else if (i == nx1 - 1)
                dx[k] = (u[k] - u[grid.idx(nx1 - 2, j)]) / hx;
            else
                dx[k] = (u[grid.idx(i + 1, j)] - u[grid.idx(i - 1, j)]) / (2.0 * hx);
            if (j == 0)
                dy[k] = (u[grid.idx(i, 1)] - u[k]) / hy;
            else if (j == ny1 - 1)
                dy[k] = (u[k] - u[grid.idx(i, ny1 - 2)]) / hy;
            else
                dy[k] = (u[grid.idx(i, j + 1)] - u[grid.idx(i, j - 1)]) / (2.0 * hy);
        }
}

}  // namespace

ReducedSource compute_F(const EquationCoefficients& eq, const EllipticOperator& Lop,
                        const std::vector<double>& f, const Field& R, double dt, Exec ex) {
    const SpatialGrid& grid = Lop.grid;
    const int nsp = grid.size();
    if (static_cast<int>(f.size()) != nsp)
        throw ValidationError("compute_F: f does not match the grid");
    if (R.nsp != nsp) throw ValidationError("compute_F: R does not match the grid");
    if (R.nt < 3) throw ValidationError("compute_F: need >= 3 time levels");

    // Principal part div(a grad f): the same flux-form stencil with the
    // drift and reaction terms zeroed out.
    EllipticOperator principal = Lop;
    principal.b1.assign(Lop.b1.size(), 0.0);
    principal.b2.assign(Lop.b2.size(), 0.0);
    principal.c.assign(Lop.c.size(), 0.0);
    const std::vector<double> div_a_grad_f = principal.apply(f, ex);
    std::vector<double> fx, fy;
    grad_row(grid, f, fx, fy);

    const Field cR = caputo_half(R, dt, ex);
    const Field Rt = time_derivative_centered(R, dt, ex);

    ReducedSource out;
    out.regular = Field(R.nt, nsp);
    out.singular.resize(nsp);
    for (int j = 0; j < nsp; ++j) out.singular[j] = eq.rho2 * f[j] * R.at(0, j);

    std::vector<double> rx, ry;
    for (int n = 0; n < R.nt; ++n) {
        const std::vector<double> r_row(R.row(n), R.row(n) + nsp);
        const std::vector<double> lr = Lop.apply(r_row, ex);
        grad_row(grid, r_row, rx, ry);
        par_for(ex, nsp, [&](std::ptrdiff_t kk) {
            const int k = static_cast<int>(kk);
            double grad_term;
            if (grid.dim == 1) {
                grad_term = (2.0 * Lop.a11[k] * rx[k] + Lop.b1[k] * r_row[k]) * fx[k];
            } else {
                grad_term = (2.0 * (Lop.a11[k] * rx[k] + Lop.a12[k] * ry[k]) +
                             Lop.b1[k] * r_row[k]) *
                                fx[k] +
                            (2.0 * (Lop.a12[k] * rx[k] + Lop.a22[k] * ry[k]) +
                             Lop.b2[k] * r_row[k]) *
                                fy[k];
            }
            const double zero_order =
                f[k] * (eq.rho2 * cR.at(n, k) - eq.rho1 * Rt.at(n, k) + lr[k]);
            out.regular.at(n, k) = r_row[k] * div_a_grad_f[k] + grad_term + zero_order;
        });
    }
    return out;
}

ReductionReport check_reduced_equation(const Field& u, const ReducedSource& G,
                                       const EquationCoefficients& eq,
                                       const EllipticOperator& Lop, double dt,
                                       double cut_fraction, int space_layers, Exec ex) {
    const SpatialGrid& grid = Lop.grid;
    const int nsp = grid.size();
    const int nt = u.nt;
    if (u.nsp != nsp || G.regular.nt != nt || G.regular.nsp != nsp)
        throw ValidationError("check_reduced_equation: shapes disagree");
    if (nt < 6) throw ValidationError("check_reduced_equation: need >= 6 time levels");

    const Field ut = time_derivative_centered(u, dt, ex);
    Field w(nt, nsp);
    for (int n = 0; n < nt; ++n) {
        const std::vector<double> row(u.row(n), u.row(n) + nsp);
        const std::vector<double> lu = Lop.apply(row, ex);
        for (int j = 0; j < nsp; ++j) w.at(n, j) = eq.rho1 * ut.at(n, j) - lu[j];
    }
    const Field wt = time_derivative_centered(w, dt, ex);
    const Field gtot = G.total(dt, ex);

    Field r(nt, nsp);
    for (int n = 0; n < nt; ++n) {
        const std::vector<double> w_row(w.row(n), w.row(n) + nsp);
        const std::vector<double> lw = Lop.apply(w_row, ex);
        for (int j = 0; j < nsp; ++j) {
            r.at(n, j) = eq.rho2 * eq.rho2 * ut.at(n, j) -
                         (eq.rho1 * wt.at(n, j) - lw[j]) - gtot.at(n, j);
        }
    }

    const int n_steps = nt - 1;
    int first = static_cast<int>(std::ceil(cut_fraction * n_steps));
    if (first < 2) first = 2;
    const int last = n_steps - 2;
    if (first > last) throw ValidationError("check_reduced_equation: window empty");

    // Interior node mask away from the boundary layers.
    std::vector<int> nodes;
    if (grid.dim == 1) {
        for (int i = space_layers; i <= grid.n_cells[0] - space_layers; ++i) nodes.push_back(i);
    } else {
        for (int j = space_layers; j <= grid.n_cells[1] - space_layers; ++j)
            for (int i = space_layers; i <= grid.n_cells[0] - space_layers; ++i)
                nodes.push_back(grid.idx(i, j));
    }
    if (nodes.empty()) throw ValidationError("check_reduced_equation: no interior nodes left");

    ReductionReport rep;
    rep.first_level = first;
    rep.last_level = last;
    rep.space_layers = space_layers;
    const std::ptrdiff_t count = static_cast<std::ptrdiff_t>(last - first + 1) * nodes.size();
    const int nn = static_cast<int>(nodes.size());
    rep.max_abs = par_max(ex, count, [&](std::ptrdiff_t q) {
        return std::abs(r.at(first + static_cast<int>(q) / nn, nodes[q % nn]));
    });
    const double ss = par_sum(ex, count, [&](std::ptrdiff_t q) {
        const double v = r.at(first + static_cast<int>(q) / nn, nodes[q % nn]);
        return v * v;
    });
    double cell = grid.h(0);
    if (grid.dim == 2) cell *= grid.h(1);
    rep.l2 = std::sqrt(ss * dt * cell);
    return rep;
}

}  // namespace fraclab
