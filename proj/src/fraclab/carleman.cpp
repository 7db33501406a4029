#include "fraclab/carleman.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "fraclab/fractional.hpp"
#include "fraclab/rng.hpp"

namespace fraclab {

// ---------------------------------------------------------------------------
// C^4 step polynomial.  d1 = 630 s^4 (1-s)^4; the higher derivatives are the
// closed-form factorizations of its derivatives.  Everything vanishes
// identically outside (0,1), which is what makes the cutoffs C^4 globally.

double Smootherstep::value(double s) {
    if (s <= 0.0) return 0.0;
    if (s >= 1.0) return 1.0;
    return s * s * s * s * s * (126.0 + s * (-420.0 + s * (540.0 + s * (-315.0 + s * 70.0))));
}

double Smootherstep::d1(double s) {
    if (s <= 0.0 || s >= 1.0) return 0.0;
    const double p = s * (1.0 - s);
    return 630.0 * p * p * p * p;
}

double Smootherstep::d2(double s) {
    if (s <= 0.0 || s >= 1.0) return 0.0;
    const double p = s * (1.0 - s);
    return 2520.0 * p * p * p * (1.0 - 2.0 * s);
}

double Smootherstep::d3(double s) {
    if (s <= 0.0 || s >= 1.0) return 0.0;
    const double p = s * (1.0 - s);
    return 2520.0 * p * p * (14.0 * s * s - 14.0 * s + 3.0);
}

double Smootherstep::d4(double s) {
    if (s <= 0.0 || s >= 1.0) return 0.0;
    const double p = s * (1.0 - s);
    return 15120.0 * p * (1.0 - 2.0 * s) * (7.0 * s * s - 7.0 * s + 1.0);
}

// ---------------------------------------------------------------------------
// Geometry.

double CarlemanGeometry::d(double x, double y) const {
    if (grid.dim == 1) return ax.value(x);
    return ax.value(x) * ay.value(y);
}

double CarlemanGeometry::d_dx(double x, double y) const {
    if (grid.dim == 1) return ax.deriv(x);
    return ax.deriv(x) * ay.value(y);
}

double CarlemanGeometry::d_dy(double x, double y) const {
    return ax.value(x) * ay.deriv(y);
}

double CarlemanGeometry::phi(double x, double t, double y) const {
    return std::exp(lambda * psi(x, t, y));
}

double CarlemanGeometry::taper(double x, double y) const {
    double v = 1.0;
    for (Face f : grid.gamma_faces) {
        switch (f) {
            case Face::x_lo:
                v *= Smootherstep::value((x - grid.lo[0]) /
                                         (taper_width * (grid.hi[0] - grid.lo[0])));
                break;
            case Face::x_hi:
                v *= Smootherstep::value((grid.hi[0] - x) /
                                         (taper_width * (grid.hi[0] - grid.lo[0])));
                break;
            case Face::y_lo:
                v *= Smootherstep::value((y - grid.lo[1]) /
                                         (taper_width * (grid.hi[1] - grid.lo[1])));
                break;
            case Face::y_hi:
                v *= Smootherstep::value((grid.hi[1] - y) /
                                         (taper_width * (grid.hi[1] - grid.lo[1])));
                break;
        }
    }
    return v;
}

namespace {

constexpr double kExtendFactor = 2.4;  ///< |Omega0| / |Omega| along a one-sided axis

CarlemanGeometry::AxisProfile one_sided_profile(double lo, double hi, bool gamma_hi) {
    CarlemanGeometry::AxisProfile p;
    const double L = hi - lo;
    p.gamma_hi = gamma_hi;
    if (gamma_hi) {
        p.r0 = lo;
        p.r1 = lo + kExtendFactor * L;
    } else {
        p.r0 = hi - kExtendFactor * L;
        p.r1 = hi;
    }
    return p;
}

CarlemanGeometry::AxisProfile symmetric_profile(double lo, double hi) {
    CarlemanGeometry::AxisProfile p;
    const double e = 0.5 * (kExtendFactor - 1.0) * (hi - lo);
    p.r0 = lo - e;
    p.r1 = hi + e;
    return p;
}

double axis_max(const CarlemanGeometry::AxisProfile& p) {
    const double half = 0.5 * (p.r1 - p.r0);
    return half * half;
}

bool has_face(const std::vector<Face>& faces, Face f) {
    return std::find(faces.begin(), faces.end(), f) != faces.end();
}

}  // namespace

CarlemanGeometry build_weight(const SpatialGrid& grid, const TimeGrid& tg,
                              const CarlemanParams& params) {
    grid.validate();
    tg.validate();
    if (!(params.lambda > 0.0)) throw ValidationError("carleman.lambda must be > 0");
    if (!(params.epsilon > 0.0 && params.epsilon < 1.0))
        throw ValidationError("carleman.epsilon must lie in (0, 1)");
    if (!(params.taper_width > 0.0 && params.taper_width < 0.5))
        throw ValidationError("carleman.taper_width must lie in (0, 0.5)");

    CarlemanGeometry g;
    g.grid = grid;
    g.tg = tg;
    g.lambda = params.lambda;
    g.epsilon = params.epsilon;
    g.taper_width = params.taper_width;

    if (grid.dim == 1) {
        if (grid.gamma_faces.size() != 1 ||
            (grid.gamma_faces[0] != Face::x_lo && grid.gamma_faces[0] != Face::x_hi))
            throw ValidationError(
                "carleman geometry (1D): the observation boundary must be exactly one endpoint");
        g.ax = one_sided_profile(grid.lo[0], grid.hi[0], grid.gamma_faces[0] == Face::x_hi);
        const int n_ext = static_cast<int>(std::ceil(kExtendFactor * grid.n_cells[0]));
        g.extended_grid = SpatialGrid::interval(g.ax.r0, g.ax.r1, n_ext, grid.gamma_faces);
        g.d_norm = axis_max(g.ax);
    } else {
        if (grid.gamma_faces.size() != 3)
            throw ValidationError(
                "carleman geometry (2D): the observation boundary must be exactly three faces "
                "(with fewer, the product profile's critical points fall inside the closure)");
        int missing = -1, found = 0;
        for (int f = 0; f < 4; ++f) {
            if (has_face(grid.gamma_faces, static_cast<Face>(f)))
                ++found;
            else
                missing = f;
        }
        if (found != 3 || missing < 0)
            throw ValidationError("carleman geometry (2D): faces must be three distinct faces");
        if (missing == 0 || missing == 1) {  // one-sided in x, symmetric in y
            g.ax = one_sided_profile(grid.lo[0], grid.hi[0], missing == 0);
            g.ay = symmetric_profile(grid.lo[1], grid.hi[1]);
        } else {  // one-sided in y, symmetric in x
            g.ax = symmetric_profile(grid.lo[0], grid.hi[0]);
            g.ay = one_sided_profile(grid.lo[1], grid.hi[1], missing == 2);
        }
        const int nx_ext = static_cast<int>(std::ceil(kExtendFactor * grid.n_cells[0]));
        const int ny_ext = static_cast<int>(std::ceil(kExtendFactor * grid.n_cells[1]));
        g.extended_grid = SpatialGrid::rectangle(g.ax.r0, g.ax.r1, g.ay.r0, g.ay.r1, nx_ext,
                                                 ny_ext, grid.gamma_faces);
        g.d_norm = axis_max(g.ax) * axis_max(g.ay);
    }

    // beta sits at the midpoint of its admissible open interval.
    const double delta = tg.delta;
    const double beta_lo = g.d_norm / (4.0 * delta * delta);
    const double beta_hi = g.d_norm / (3.0 * delta * delta);
    g.beta = 0.5 * (beta_lo + beta_hi);
    if (!(beta_lo < g.beta && g.beta < beta_hi))
        throw ValidationError("carleman geometry: the beta interval is empty (check delta)");

    for (int k = 1; k <= 3; ++k)
        g.mu[k - 1] = g.epsilon * (k / 3.0 * g.d_norm - g.beta * delta * delta);
    if (!(g.mu[0] > 0.0 && g.mu[0] < g.mu[1] && g.mu[1] < g.mu[2]))
        throw ValidationError("carleman geometry: need 0 < mu1 < mu2 < mu3");

    // Tabulate d on the computational nodes; require a nonvanishing gradient
    // on the closure (the weight must have no critical points there).
    const int nsp = grid.size();
    g.d_nodes.resize(nsp);
    const double tol = 1e-12 * std::max(1.0, g.d_norm);
    if (grid.dim == 1) {
        for (int i = 0; i < nsp; ++i) {
            const double x = grid.x(i);
            g.d_nodes[i] = g.d(x);
            if (std::abs(g.d_dx(x)) <= tol)
                throw ValidationError("carleman geometry: grad d vanishes at node " +
                                      std::to_string(i) + " of the closed domain");
        }
    } else {
        for (int j = 0; j < grid.n_nodes(1); ++j)
            for (int i = 0; i < grid.n_nodes(0); ++i) {
                const double x = grid.x(i), y = grid.y(j);
                g.d_nodes[grid.idx(i, j)] = g.d(x, y);
                const double gx = g.d_dx(x, y), gy = g.d_dy(x, y);
                if (std::sqrt(gx * gx + gy * gy) <= tol)
                    throw ValidationError("carleman geometry: grad d vanishes at node (" +
                                          std::to_string(i) + "," + std::to_string(j) +
                                          ") of the closed domain");
            }
    }

    // Tabulate d on the extension: positive inside, zero where an axis
    // profile has its root (every boundary node of the 1D extension; in 2D
    // only boundary nodes on a root face, the rest must stay nonnegative).
    const SpatialGrid& eg = g.extended_grid;
    g.d_extended.resize(eg.size());
    const double ztol = 1e-9 * std::max(1.0, g.d_norm);
    for (int j = 0; j < (eg.dim == 2 ? eg.n_nodes(1) : 1); ++j)
        for (int i = 0; i < eg.n_nodes(0); ++i) {
            const double dv = eg.dim == 1 ? g.d(eg.x(i)) : g.d(eg.x(i), eg.y(j));
            g.d_extended[eg.idx(i, j)] = dv;
            if (eg.on_boundary(i, j)) {
                if (eg.dim == 1 && std::abs(dv) > ztol)
                    throw ValidationError("carleman geometry: d must vanish on the extension ends");
                if (eg.dim == 2) {
                    const bool on_root = std::min(std::abs(g.ax.value(eg.x(i))),
                                                  std::abs(g.ay.value(eg.y(j)))) <= ztol;
                    if (on_root && std::abs(dv) > ztol)
                        throw ValidationError(
                            "carleman geometry: d must vanish on a profile root face");
                    if (dv < -ztol)
                        throw ValidationError(
                            "carleman geometry: d negative on the extension boundary");
                }
            } else if (!(dv > 0.0)) {
                throw ValidationError("carleman geometry: d must be positive inside the extension");
            }
        }

    // Observation subdomain mask, then the admissible-epsilon bound by
    // bisection on "omega stays inside the superlevel set {d > eps*|d|}".
    if (!(params.omega_x_lo < params.omega_x_hi) || params.omega_x_lo < grid.lo[0] - tol ||
        params.omega_x_hi > grid.hi[0] + tol)
        throw ValidationError("carleman.omega: x range must be a nonempty subinterval of the domain");
    if (grid.dim == 2 &&
        (!(params.omega_y_lo < params.omega_y_hi) || params.omega_y_lo < grid.lo[1] - tol ||
         params.omega_y_hi > grid.hi[1] + tol))
        throw ValidationError("carleman.omega: y range must be a nonempty subinterval of the domain");
    g.omega_mask.assign(nsp, 0);
    int omega_count = 0;
    for (int j = 0; j < (grid.dim == 2 ? grid.n_nodes(1) : 1); ++j)
        for (int i = 0; i < grid.n_nodes(0); ++i) {
            const double x = grid.x(i);
            bool in = x >= params.omega_x_lo - tol && x <= params.omega_x_hi + tol;
            if (grid.dim == 2) {
                const double y = grid.y(j);
                in = in && y >= params.omega_y_lo - tol && y <= params.omega_y_hi + tol;
            }
            if (in) {
                g.omega_mask[grid.idx(i, j)] = 1;
                ++omega_count;
            }
        }
    if (omega_count == 0) throw ValidationError("carleman.omega contains no grid nodes");

    auto omega_inside = [&](double eps) {
        const double thr = eps * g.d_norm;
        for (int k = 0; k < nsp; ++k)
            if (g.omega_mask[k] && !(g.d_nodes[k] > thr)) return false;
        return true;
    };
    double blo = 0.0, bhi = 1.0;
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (blo + bhi);
        if (omega_inside(mid))
            blo = mid;
        else
            bhi = mid;
    }
    g.epsilon0 = blo;
    if (!omega_inside(g.epsilon))
        throw ValidationError("carleman.epsilon exceeds epsilon0 = " + std::to_string(g.epsilon0) +
                              ": omega escapes the level set {d > epsilon*|d|}");
    return g;
}

LevelSetDomains build_level_sets(const CarlemanGeometry& geom) {
    const SpatialGrid& grid = geom.grid;
    const TimeGrid& tg = geom.tg;
    const int nsp = grid.size();
    const int nt = tg.n_levels();
    LevelSetDomains out;
    for (int k = 0; k < 3; ++k) {
        out.Q[k].assign(static_cast<std::size_t>(nt) * nsp, 0);
        out.Q_minus[k].assign(static_cast<std::size_t>(nt) * nsp, 0);
        out.Omega_k[k].assign(nsp, 0);
    }
    const double t0 = geom.t0();
    for (int n = 0; n < nt; ++n) {
        const double t = tg.t(n);
        for (int j = 0; j < (grid.dim == 2 ? grid.n_nodes(1) : 1); ++j)
            for (int i = 0; i < grid.n_nodes(0); ++i) {
                const int sp = grid.idx(i, j);
                const double ps = geom.psi(grid.x(i), t, grid.dim == 2 ? grid.y(j) : 0.0);
                for (int k = 0; k < 3; ++k) {
                    if (ps > geom.mu[k]) {
                        out.Q[k][static_cast<std::size_t>(n) * nsp + sp] = 1;
                        if (t < t0)
                            out.Q_minus[k][static_cast<std::size_t>(n) * nsp + sp] = 1;
                    }
                }
            }
    }
    for (int i = 0; i < nsp; ++i)
        for (int k = 0; k < 3; ++k)
            if (geom.d_nodes[i] > geom.mu[k]) out.Omega_k[k][i] = 1;
    for (int k = 0; k < 3; ++k) {
        out.count_Q[k] =
            static_cast<std::size_t>(std::count(out.Q[k].begin(), out.Q[k].end(), char(1)));
        out.count_Omega[k] = static_cast<std::size_t>(
            std::count(out.Omega_k[k].begin(), out.Omega_k[k].end(), char(1)));
    }

    // Structural invariants of the family.
    for (int k = 1; k < 3; ++k) {
        for (std::size_t q = 0; q < out.Q[k].size(); ++q)
            if (out.Q[k][q] && !out.Q[k - 1][q])
                throw ValidationError("level sets: Q" + std::to_string(k + 1) +
                                      " is not contained in Q" + std::to_string(k));
        for (int i = 0; i < nsp; ++i)
            if (out.Omega_k[k][i] && !out.Omega_k[k - 1][i])
                throw ValidationError("level sets: Omega" + std::to_string(k + 1) +
                                      " is not contained in Omega" + std::to_string(k));
    }
    const double half_width = std::sqrt(geom.epsilon) * tg.delta;
    for (int n = 0; n < nt; ++n) {
        const double dt0 = std::abs(tg.t(n) - t0);
        if (dt0 < half_width) {
            for (int i = 0; i < nsp; ++i)
                if (geom.omega_mask[i] && !out.Q[2][static_cast<std::size_t>(n) * nsp + i])
                    throw ValidationError(
                        "level sets: omega x {|t-t0| < sqrt(eps)*delta} is not contained in Q3");
        }
        if (dt0 >= 2.0 * tg.delta) {
            for (int i = 0; i < nsp; ++i)
                if (out.Q[0][static_cast<std::size_t>(n) * nsp + i])
                    throw ValidationError("level sets: Q1 leaks outside |t - t0| < 2*delta");
        }
    }
    return out;
}

Cutoff build_cutoffs(const CarlemanGeometry& geom) {
    if (geom.grid.dim != 1)
        throw ValidationError("cutoff jets are provided for 1D geometries only");
    const SpatialGrid& grid = geom.grid;
    const TimeGrid& tg = geom.tg;
    const int nsp = grid.size();
    const int nt = tg.n_levels();
    const double dmu = geom.mu[1] - geom.mu[0];
    const double t0 = geom.t0();

    Cutoff c;
    c.chi = Field(nt, nsp);
    c.chi_t = Field(nt, nsp);
    for (auto& f : c.chi_dx) f = Field(nt, nsp);
    c.chi_tilde.resize(nsp);
    c.chi_tilde_dx.resize(nsp);
    c.chi_tilde_dxx.resize(nsp);

    for (int n = 0; n < nt; ++n) {
        const double t = tg.t(n);
        for (int i = 0; i < nsp; ++i) {
            const double x = grid.x(i);
            const double sg = (geom.psi(x, t) - geom.mu[0]) / dmu;
            // Chain rule through the level coordinate; it is quadratic in x,
            // so its third and fourth x-derivatives vanish.
            const double g1 = geom.ax.deriv(x) / dmu;
            const double g2 = geom.ax.deriv2() / dmu;
            const double gt = -2.0 * geom.beta * (t - t0) / dmu;
            const double s1 = Smootherstep::d1(sg), s2 = Smootherstep::d2(sg);
            const double s3 = Smootherstep::d3(sg), s4 = Smootherstep::d4(sg);
            c.chi.at(n, i) = Smootherstep::value(sg);
            c.chi_t.at(n, i) = s1 * gt;
            c.chi_dx[0].at(n, i) = s1 * g1;
            c.chi_dx[1].at(n, i) = s2 * g1 * g1 + s1 * g2;
            c.chi_dx[2].at(n, i) = s3 * g1 * g1 * g1 + 3.0 * s2 * g1 * g2;
            c.chi_dx[3].at(n, i) =
                s4 * g1 * g1 * g1 * g1 + 6.0 * s3 * g1 * g1 * g2 + 3.0 * s2 * g2 * g2;
        }
    }
    for (int i = 0; i < nsp; ++i) {
        const double x = grid.x(i);
        const double sg = (geom.d(x) - geom.mu[0]) / dmu;
        const double g1 = geom.ax.deriv(x) / dmu;
        const double g2 = geom.ax.deriv2() / dmu;
        c.chi_tilde[i] = Smootherstep::value(sg);
        c.chi_tilde_dx[i] = Smootherstep::d1(sg) * g1;
        c.chi_tilde_dxx[i] = Smootherstep::d2(sg) * g1 * g1 + Smootherstep::d1(sg) * g2;
    }
    return c;
}

// ---------------------------------------------------------------------------
// Ratio checkers (1D).

namespace {

/// Spatial first derivative per time level: centered inside, second-order
/// one-sided at the two edge columns.
Field dx_field(const Field& u, double h, Exec ex) {
    const int nt = u.nt, nsp = u.nsp;
    Field out(nt, nsp);
    const double inv_2h = 0.5 / h;
    par_for(ex, nt, [&](std::ptrdiff_t nn) {
        const int n = static_cast<int>(nn);
        out.at(n, 0) = (-3.0 * u.at(n, 0) + 4.0 * u.at(n, 1) - u.at(n, 2)) * inv_2h;
        for (int i = 1; i + 1 < nsp; ++i)
            out.at(n, i) = (u.at(n, i + 1) - u.at(n, i - 1)) * inv_2h;
        out.at(n, nsp - 1) =
            (3.0 * u.at(n, nsp - 1) - 4.0 * u.at(n, nsp - 2) + u.at(n, nsp - 3)) * inv_2h;
    });
    return out;
}

/// Spatial second derivative per time level: centered inside; the edge
/// columns copy their interior neighbor (checker fields are tapered to zero
/// there, the copy only keeps the array defined).
Field dxx_field(const Field& u, double h, Exec ex) {
    const int nt = u.nt, nsp = u.nsp;
    Field out(nt, nsp);
    const double inv_h2 = 1.0 / (h * h);
    par_for(ex, nt, [&](std::ptrdiff_t nn) {
        const int n = static_cast<int>(nn);
        for (int i = 1; i + 1 < nsp; ++i)
            out.at(n, i) = (u.at(n, i + 1) - 2.0 * u.at(n, i) + u.at(n, i - 1)) * inv_h2;
        out.at(n, 0) = out.at(n, 1);
        out.at(n, nsp - 1) = out.at(n, nsp - 2);
    });
    return out;
}

/// L applied per time level (boundary rows pass the field through).
Field apply_levels(const EllipticOperator& Lop, const Field& u, Exec ex) {
    Field out(u.nt, u.nsp);
    std::vector<double> row(u.nsp);
    for (int n = 0; n < u.nt; ++n) {
        std::copy(u.row(n), u.row(n) + u.nsp, row.begin());
        const std::vector<double> lr = Lop.apply(row, ex);
        std::copy(lr.begin(), lr.end(), out.row(n));
    }
    return out;
}

struct MaskedQuadrature {
    std::vector<char> mask;         ///< flattened over the integration nodes
    std::vector<double> weight;     ///< trapezoid weights, same layout
    std::vector<double> logw_unit;  ///< 2 * phi; the log weight is s * this
    double logw_max_unit = 0.0;     ///< max of logw_unit over the mask
};

/// Space-time quadrature over {psi > mu_1}: trapezoid weights halved on both
/// the first/last time level and the two edge columns.
MaskedQuadrature build_quadrature_st(const CarlemanGeometry& geom) {
    const SpatialGrid& grid = geom.grid;
    const TimeGrid& tg = geom.tg;
    const int nsp = grid.size();
    const int nt = tg.n_levels();
    const double h = grid.h(0), dt = tg.dt();
    MaskedQuadrature q;
    q.mask.assign(static_cast<std::size_t>(nt) * nsp, 0);
    q.weight.assign(static_cast<std::size_t>(nt) * nsp, 0.0);
    q.logw_unit.assign(static_cast<std::size_t>(nt) * nsp, 0.0);
    double mx = -std::numeric_limits<double>::infinity();
    for (int n = 0; n < nt; ++n) {
        const double t = tg.t(n);
        for (int i = 0; i < nsp; ++i) {
            const double x = grid.x(i);
            if (!(geom.psi(x, t) > geom.mu[0])) continue;
            const std::size_t k = static_cast<std::size_t>(n) * nsp + i;
            q.mask[k] = 1;
            double w = h * dt;
            if (i == 0 || i == nsp - 1) w *= 0.5;
            if (n == 0 || n == nt - 1) w *= 0.5;
            q.weight[k] = w;
            q.logw_unit[k] = 2.0 * geom.phi(x, t);
            mx = std::max(mx, q.logw_unit[k]);
        }
    }
    q.logw_max_unit = mx;
    return q;
}

/// Spatial quadrature over {d > mu_1} with the time-independent weight
/// exp(lambda * d) in place of phi.
MaskedQuadrature build_quadrature_sp(const CarlemanGeometry& geom) {
    const SpatialGrid& grid = geom.grid;
    const int nsp = grid.size();
    const double h = grid.h(0);
    MaskedQuadrature q;
    q.mask.assign(nsp, 0);
    q.weight.assign(nsp, 0.0);
    q.logw_unit.assign(nsp, 0.0);
    double mx = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < nsp; ++i) {
        if (!(geom.d_nodes[i] > geom.mu[0])) continue;
        q.mask[i] = 1;
        q.weight[i] = (i == 0 || i == nsp - 1) ? 0.5 * h : h;
        q.logw_unit[i] = 2.0 * std::exp(geom.lambda * geom.d_nodes[i]);
        mx = std::max(mx, q.logw_unit[i]);
    }
    q.logw_max_unit = mx;
    return q;
}

/// Integral of vals over the mask with the weight e^{s*logw_unit - shift}.
double shifted_integral(const MaskedQuadrature& q, const std::vector<double>& vals, double s,
                        double shift, Exec ex) {
    return par_sum(ex, static_cast<std::ptrdiff_t>(vals.size()), [&](std::ptrdiff_t k) {
        if (!q.mask[k]) return 0.0;
        return vals[k] * std::exp(s * q.logw_unit[k] - shift) * q.weight[k];
    });
}

/// Run the s sweep with a caller-provided LHS builder and fill in the tail
/// diagnostics: the tail constant and the step bound over the last three
/// sweep points, plus the earliest s from which the step bound always holds.
CarlemanRatioReport run_sweep(const MaskedQuadrature& q, double lambda,
                              const std::vector<double>& s_sweep,
                              const std::function<void(double, std::vector<double>&)>& fill_lhs,
                              const std::vector<double>& res_vals, Exec ex) {
    if (s_sweep.empty()) throw ValidationError("carleman check: empty s sweep");
    CarlemanRatioReport rep;
    rep.rows.reserve(s_sweep.size());
    std::vector<double> lhs_vals(res_vals.size());
    for (double s : s_sweep) {
        if (!(s > 0.0)) throw ValidationError("carleman check: s values must be positive");
        fill_lhs(s, lhs_vals);
        CarlemanRatioRow row;
        row.s = s;
        row.lambda = lambda;
        row.log_shift = s * q.logw_max_unit;
        row.lhs = shifted_integral(q, lhs_vals, s, row.log_shift, ex);
        row.residual = shifted_integral(q, res_vals, s, row.log_shift, ex);
        row.boundary_term = 0.0;
        if (row.lhs == 0.0 && row.residual == 0.0) {
            row.defined = false;  // identically zero field: skip, not a violation
            row.ratio = std::numeric_limits<double>::quiet_NaN();
        } else if (row.residual == 0.0) {
            row.violation = true;  // finite energy against a zero residual
            row.ratio = std::numeric_limits<double>::infinity();
        } else {
            row.ratio = row.lhs / row.residual;
        }
        rep.rows.push_back(row);
    }
    const int n = static_cast<int>(rep.rows.size());
    const int tail0 = std::max(0, n - 3);
    rep.tail_constant = 0.0;
    rep.tail_bounded = true;
    for (int i = tail0; i < n; ++i)
        if (rep.rows[i].defined)
            rep.tail_constant = std::max(rep.tail_constant, rep.rows[i].ratio);
    for (int i = tail0; i + 1 < n; ++i) {
        if (!rep.rows[i].defined || !rep.rows[i + 1].defined) continue;
        if (!(rep.rows[i + 1].ratio <= rep.slack * rep.rows[i].ratio)) rep.tail_bounded = false;
    }
    rep.s_star = rep.rows.back().s;
    for (int j = 0; j < n; ++j) {
        bool ok = true;
        for (int i = j; i + 1 < n; ++i) {
            if (!rep.rows[i].defined || !rep.rows[i + 1].defined) continue;
            if (!(rep.rows[i + 1].ratio <= rep.slack * rep.rows[i].ratio)) {
                ok = false;
                break;
            }
        }
        if (ok) {
            rep.s_star = rep.rows[j].s;
            break;
        }
    }
    return rep;
}

void require_1d_field(const CarlemanGeometry& geom, int nt, int nsp, const char* who) {
    if (geom.grid.dim != 1)
        throw ValidationError(std::string(who) + ": 1D geometries only");
    if (nt != geom.tg.n_levels() || nsp != geom.grid.size())
        throw ValidationError(std::string(who) + ": field shape does not match the geometry");
}

}  // namespace

CarlemanRatioReport check_parabolic_carleman(const Field& v, const CarlemanGeometry& geom,
                                             const EllipticOperator& Lop,
                                             const EquationCoefficients& eq,
                                             const std::vector<double>& s_sweep, Exec ex) {
    require_1d_field(geom, v.nt, v.nsp, "parabolic carleman check");
    const double h = geom.grid.h(0), dt = geom.tg.dt();
    const double lam = geom.lambda;
    const Field vt = time_derivative_centered(v, dt, ex);
    const Field vx = dx_field(v, h, ex);
    const Field vxx = dxx_field(v, h, ex);
    const Field lv = apply_levels(Lop, v, ex);

    const std::size_t total = v.v.size();
    std::vector<double> res_vals(total);
    par_for(ex, static_cast<std::ptrdiff_t>(total), [&](std::ptrdiff_t k) {
        const double r = eq.rho1 * vt.v[k] - lv.v[k];
        res_vals[k] = r * r;
    });
    const double lam2 = lam * lam, lam4 = lam2 * lam2;
    auto fill_lhs = [&](double s, std::vector<double>& lhs) {
        par_for(ex, static_cast<std::ptrdiff_t>(total), [&](std::ptrdiff_t k) {
            lhs[k] = (vt.v[k] * vt.v[k] + vxx.v[k] * vxx.v[k]) / s +
                     s * lam2 * vx.v[k] * vx.v[k] + s * s * s * lam4 * v.v[k] * v.v[k];
        });
    };
    return run_sweep(build_quadrature_st(geom), lam, s_sweep, fill_lhs, res_vals, ex);
}

CarlemanRatioReport check_combined_carleman(const Field& u, const CarlemanGeometry& geom,
                                            const EllipticOperator& Lop,
                                            const EquationCoefficients& eq,
                                            const std::vector<double>& s_sweep, Exec ex) {
    require_1d_field(geom, u.nt, u.nsp, "combined carleman check");
    const double h = geom.grid.h(0), dt = geom.tg.dt();
    const double lam = geom.lambda;
    const Field ut = time_derivative_centered(u, dt, ex);
    const Field utt = time_derivative_centered(ut, dt, ex);
    const Field ux = dx_field(u, h, ex);
    const Field uxx = dxx_field(u, h, ex);
    const Field uxt = time_derivative_centered(ux, dt, ex);
    const Field uxxt = time_derivative_centered(uxx, dt, ex);
    const Field lu = apply_levels(Lop, u, ex);
    Field w(u.nt, u.nsp);
    par_for(ex, static_cast<std::ptrdiff_t>(w.v.size()),
            [&](std::ptrdiff_t k) { w.v[k] = eq.rho1 * ut.v[k] - lu.v[k]; });
    const Field wt = time_derivative_centered(w, dt, ex);
    const Field lw = apply_levels(Lop, w, ex);

    const std::size_t total = u.v.size();
    std::vector<double> res_vals(total);
    par_for(ex, static_cast<std::ptrdiff_t>(total), [&](std::ptrdiff_t k) {
        const double r = eq.rho2 * eq.rho2 * ut.v[k] - (eq.rho1 * wt.v[k] - lw.v[k]);
        res_vals[k] = r * r;
    });
    const double lam2 = lam * lam, lam4 = lam2 * lam2, lam6 = lam4 * lam2, lam8 = lam4 * lam4;
    auto fill_lhs = [&](double s, std::vector<double>& lhs) {
        const double s2 = s * s, s4 = s2 * s2, s6 = s4 * s2;
        par_for(ex, static_cast<std::ptrdiff_t>(total), [&](std::ptrdiff_t k) {
            lhs[k] = (utt.v[k] * utt.v[k] + uxxt.v[k] * uxxt.v[k]) / s2 +
                     lam2 * uxt.v[k] * uxt.v[k] +
                     s2 * lam4 * (ut.v[k] * ut.v[k] + uxx.v[k] * uxx.v[k]) +
                     s4 * lam6 * ux.v[k] * ux.v[k] + s6 * lam8 * u.v[k] * u.v[k];
        });
    };
    return run_sweep(build_quadrature_st(geom), lam, s_sweep, fill_lhs, res_vals, ex);
}

CarlemanRatioReport check_elliptic_carleman(const std::vector<double>& v,
                                            const CarlemanGeometry& geom,
                                            const EllipticOperator& Lop,
                                            const std::vector<double>& s_sweep, Exec ex) {
    if (geom.grid.dim != 1)
        throw ValidationError("elliptic carleman check: 1D geometries only");
    const int nsp = geom.grid.size();
    if (static_cast<int>(v.size()) != nsp)
        throw ValidationError("elliptic carleman check: field does not match the geometry");
    const double h = geom.grid.h(0);
    const double lam = geom.lambda;
    // Wrap the vector as a single-level field to reuse the stencil helpers.
    Field vf(1, nsp);
    std::copy(v.begin(), v.end(), vf.row(0));
    const Field vx = dx_field(vf, h, ex);
    const Field vxx = dxx_field(vf, h, ex);
    const std::vector<double> lv = Lop.apply(v, ex);

    std::vector<double> res_vals(nsp);
    for (int i = 0; i < nsp; ++i) res_vals[i] = lv[i] * lv[i];
    const double lam2 = lam * lam, lam4 = lam2 * lam2;
    auto fill_lhs = [&](double s, std::vector<double>& lhs) {
        for (int i = 0; i < nsp; ++i) {
            lhs[i] = vxx.at(0, i) * vxx.at(0, i) / s + s * lam2 * vx.at(0, i) * vx.at(0, i) +
                     s * s * s * lam4 * v[i] * v[i];
        }
    };
    return run_sweep(build_quadrature_sp(geom), lam, s_sweep, fill_lhs, res_vals, ex);
}

Field carleman_test_field(const CarlemanGeometry& geom, std::uint64_t seed, int index) {
    if (geom.grid.dim != 1)
        throw ValidationError("carleman test fields: 1D geometries only");
    SplitMix64 rng = split_stream(seed, static_cast<std::uint64_t>(index), 0);
    double c[4], a[4];
    for (double& cm : c) cm = rng.next_gaussian();
    for (double& am : a) am = rng.next_gaussian();
    const SpatialGrid& grid = geom.grid;
    const TimeGrid& tg = geom.tg;
    const double L = grid.hi[0] - grid.lo[0];
    const double t0 = geom.t0();
    const double dmu = geom.mu[1] - geom.mu[0];
    Field out(tg.n_levels(), grid.size());
    for (int n = 0; n < out.nt; ++n) {
        const double t = tg.t(n);
        for (int i = 0; i < out.nsp; ++i) {
            const double x = grid.x(i);
            const double xi = (x - grid.lo[0]) / L;
            double modes = 0.0;
            for (int m = 1; m <= 4; ++m)
                modes += c[m - 1] * std::sin(m * M_PI * xi) *
                         (1.0 + 0.3 * a[m - 1] * (t - t0) / (2.0 * tg.delta));
            const double chi = Smootherstep::value((geom.psi(x, t) - geom.mu[0]) / dmu);
            out.at(n, i) = chi * geom.taper(x) * modes;
        }
    }
    return out;
}

std::vector<double> carleman_test_field_spatial(const CarlemanGeometry& geom, std::uint64_t seed,
                                                int index) {
    if (geom.grid.dim != 1)
        throw ValidationError("carleman test fields: 1D geometries only");
    SplitMix64 rng = split_stream(seed, static_cast<std::uint64_t>(index), 0);
    double c[4];
    for (double& cm : c) cm = rng.next_gaussian();
    const SpatialGrid& grid = geom.grid;
    const double L = grid.hi[0] - grid.lo[0];
    const double dmu = geom.mu[1] - geom.mu[0];
    std::vector<double> out(grid.size());
    for (int i = 0; i < static_cast<int>(out.size()); ++i) {
        const double x = grid.x(i);
        const double xi = (x - grid.lo[0]) / L;
        double modes = 0.0;
        for (int m = 1; m <= 4; ++m) modes += c[m - 1] * std::sin(m * M_PI * xi);
        const double chit = Smootherstep::value((geom.d(x) - geom.mu[0]) / dmu);
        out[i] = chit * geom.taper(x) * modes;
    }
    return out;
}

}  // namespace fraclab
