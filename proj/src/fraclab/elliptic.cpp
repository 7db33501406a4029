#include "fraclab/elliptic.hpp"

#include <cmath>
#include <string>

#include "fraclab/rng.hpp"

namespace fraclab {

namespace {

/// Eigenvalue range of the symmetric 2x2 block [[a11, a12], [a12, a22]].
void eig_range(double a11v, double a12v, double a22v, double& lo, double& hi) {
    const double tr = a11v + a22v;
    const double disc = std::sqrt(0.25 * (a11v - a22v) * (a11v - a22v) + a12v * a12v);
    lo = 0.5 * tr - disc;
    hi = 0.5 * tr + disc;
}

void finish_ellipticity(EllipticOperator& op) {
    double lo_all = 1e300, hi_all = -1e300;
    const int nsp = op.grid.size();
    for (int k = 0; k < nsp; ++k) {
        double lo, hi;
        if (op.grid.dim == 1) {
            lo = hi = op.a11[k];
        } else {
            eig_range(op.a11[k], op.a12[k], op.a22[k], lo, hi);
        }
        if (!(lo > 0.0)) {
            throw ValidationError("elliptic operator: ellipticity violated at node " + std::to_string(k) +
                                  " (smallest eigenvalue " + std::to_string(lo) + " <= 0)");
        }
        lo_all = std::min(lo_all, lo);
        hi_all = std::max(hi_all, hi);
    }
    op.m = std::max(hi_all, 1.0 / lo_all);
}

}  // namespace

EllipticOperator EllipticOperator::assemble(const SpatialGrid& grid, const CoefFn& a, const CoefFn& b,
                                            const CoefFn& c) {
    if (grid.dim != 1) throw ValidationError("elliptic assemble: grid must be 1D");
    EllipticOperator op;
    op.grid = grid;
    const int n = grid.size();
    op.a11.resize(n);
    op.b1.resize(n);
    op.c.resize(n);
    for (int i = 0; i < n; ++i) {
        const double x = grid.x(i);
        op.a11[i] = a(x, 0.0);
        op.b1[i] = b(x, 0.0);
        op.c[i] = c(x, 0.0);
    }
    op.a11_face_x.resize(n - 1);
    for (int i = 0; i + 1 < n; ++i) op.a11_face_x[i] = 0.5 * (op.a11[i] + op.a11[i + 1]);
    finish_ellipticity(op);
    return op;
}

EllipticOperator EllipticOperator::assemble2d(const SpatialGrid& grid, const CoefFn& a11, const CoefFn& a12,
                                              const CoefFn& a22, const CoefFn& b1, const CoefFn& b2,
                                              const CoefFn& c) {
    if (grid.dim != 2) throw ValidationError("elliptic assemble2d: grid must be 2D");
    EllipticOperator op;
    op.grid = grid;
    const int nx1 = grid.n_nodes(0), ny1 = grid.n_nodes(1);
    const int n = nx1 * ny1;
    op.a11.resize(n);
    op.a12.resize(n);
    op.a22.resize(n);
    op.b1.resize(n);
    op.b2.resize(n);
    op.c.resize(n);
    for (int j = 0; j < ny1; ++j)
        for (int i = 0; i < nx1; ++i) {
            const int k = grid.idx(i, j);
            const double x = grid.x(i), y = grid.y(j);
            op.a11[k] = a11(x, y);
            op.a12[k] = a12(x, y);
            op.a22[k] = a22(x, y);
            op.b1[k] = b1(x, y);
            op.b2[k] = b2(x, y);
            op.c[k] = c(x, y);
        }
    // face averages along each axis
    op.a11_face_x.assign(static_cast<std::size_t>(nx1 - 1) * ny1, 0.0);
    for (int j = 0; j < ny1; ++j)
        for (int i = 0; i + 1 < nx1; ++i)
            op.a11_face_x[static_cast<std::size_t>(j) * (nx1 - 1) + i] =
                0.5 * (op.a11[grid.idx(i, j)] + op.a11[grid.idx(i + 1, j)]);
    op.a22_face_y.assign(static_cast<std::size_t>(ny1 - 1) * nx1, 0.0);
    for (int j = 0; j + 1 < ny1; ++j)
        for (int i = 0; i < nx1; ++i)
            op.a22_face_y[static_cast<std::size_t>(j) * nx1 + i] =
                0.5 * (op.a22[grid.idx(i, j)] + op.a22[grid.idx(i, j + 1)]);
    finish_ellipticity(op);
    return op;
}

std::vector<double> EllipticOperator::apply(const std::vector<double>& u, Exec ex) const {
    if (static_cast<int>(u.size()) != grid.size())
        throw ValidationError("elliptic apply: field size does not match grid");
    std::vector<double> out(u);
    if (grid.dim == 1) {
        const int n = grid.n_nodes(0);
        const double h = grid.h(0);
        const double inv_h2 = 1.0 / (h * h), inv_2h = 0.5 / h;
        const double* af = a11_face_x.data();
        par_for(ex, n - 2, [&](std::ptrdiff_t k) {
            const int i = static_cast<int>(k) + 1;
            const double flux_e = af[i] * (u[i + 1] - u[i]);
            const double flux_w = af[i - 1] * (u[i] - u[i - 1]);
            out[i] = (flux_e - flux_w) * inv_h2 + b1[i] * (u[i + 1] - u[i - 1]) * inv_2h + c[i] * u[i];
        });
        return out;
    }
    const int nx1 = grid.n_nodes(0), ny1 = grid.n_nodes(1);
    const double hx = grid.h(0), hy = grid.h(1);
    // centered first derivatives everywhere (one-sided at the outer ring) for
    // the cross-term helper fields p = a12 * du/dy, q = a12 * du/dx
    std::vector<double> p(u.size()), q(u.size());
    par_for(ex, ny1, [&](std::ptrdiff_t jj) {
        const int j = static_cast<int>(jj);
        for (int i = 0; i < nx1; ++i) {
            const int k = grid.idx(i, j);
            double dudx, dudy;
            if (i == 0)
                dudx = (u[grid.idx(1, j)] - u[grid.idx(0, j)]) / hx;
            else if (i == nx1 - 1)
                dudx = (u[grid.idx(nx1 - 1, j)] - u[grid.idx(nx1 - 2, j)]) / hx;
            else
                dudx = (u[grid.idx(i + 1, j)] - u[grid.idx(i - 1, j)]) / (2.0 * hx);
            if (j == 0)
                dudy = (u[grid.idx(i, 1)] - u[grid.idx(i, 0)]) / hy;
            else if (j == ny1 - 1)
                dudy = (u[grid.idx(i, ny1 - 1)] - u[grid.idx(i, ny1 - 2)]) / hy;
            else
                dudy = (u[grid.idx(i, j + 1)] - u[grid.idx(i, j - 1)]) / (2.0 * hy);
            p[k] = a12[k] * dudy;
            q[k] = a12[k] * dudx;
        }
    });
    par_for(ex, ny1 - 2, [&](std::ptrdiff_t jj) {
        const int j = static_cast<int>(jj) + 1;
        for (int i = 1; i + 1 < nx1; ++i) {
            const int k = grid.idx(i, j);
            const double fe = a11_face_x[static_cast<std::size_t>(j) * (nx1 - 1) + i] *
                              (u[grid.idx(i + 1, j)] - u[k]);
            const double fw = a11_face_x[static_cast<std::size_t>(j) * (nx1 - 1) + i - 1] *
                              (u[k] - u[grid.idx(i - 1, j)]);
            const double fn = a22_face_y[static_cast<std::size_t>(j) * nx1 + i] *
                              (u[grid.idx(i, j + 1)] - u[k]);
            const double fs = a22_face_y[static_cast<std::size_t>(j - 1) * nx1 + i] *
                              (u[k] - u[grid.idx(i, j - 1)]);
            const double cross = (p[grid.idx(i + 1, j)] - p[grid.idx(i - 1, j)]) / (2.0 * hx) +
                                 (q[grid.idx(i, j + 1)] - q[grid.idx(i, j - 1)]) / (2.0 * hy);
            out[k] = (fe - fw) / (hx * hx) + (fn - fs) / (hy * hy) + cross +
                     b1[k] * (u[grid.idx(i + 1, j)] - u[grid.idx(i - 1, j)]) / (2.0 * hx) +
                     b2[k] * (u[grid.idx(i, j + 1)] - u[grid.idx(i, j - 1)]) / (2.0 * hy) + c[k] * u[k];
        }
    });
    return out;
}

bool EllipticOperator::ellipticity_probe(int n_probe, unsigned long long seed) const {
    SplitMix64 rng(seed);
    const int nsp = grid.size();
    for (int p = 0; p < n_probe; ++p) {
        double xi1, xi2 = 0.0;
        if (grid.dim == 1) {
            xi1 = rng.next_unit() < 0.5 ? -1.0 : 1.0;
        } else {
            const double ang = rng.next_range(0.0, 2.0 * M_PI);
            xi1 = std::cos(ang);
            xi2 = std::sin(ang);
        }
        for (int k = 0; k < nsp; ++k) {
            double quad;
            if (grid.dim == 1)
                quad = a11[k] * xi1 * xi1;
            else
                quad = a11[k] * xi1 * xi1 + 2.0 * a12[k] * xi1 * xi2 + a22[k] * xi2 * xi2;
            const double n2 = xi1 * xi1 + xi2 * xi2;
            if (quad < n2 / m - 1e-12 || quad > n2 * m + 1e-12) return false;
        }
    }
    return true;
}

}  // namespace fraclab
