#include "fraclab/norms.hpp"

#include <cmath>

namespace fraclab {

std::vector<double> diff1(const std::vector<double>& u, double h) {
    const int n = static_cast<int>(u.size());
    std::vector<double> out(n, 0.0);
    if (n < 2) return out;
    out[0] = (u[1] - u[0]) / h;
    out[n - 1] = (u[n - 1] - u[n - 2]) / h;
    const double inv_2h = 0.5 / h;
    for (int i = 1; i + 1 < n; ++i) out[i] = (u[i + 1] - u[i - 1]) * inv_2h;
    return out;
}

std::vector<double> diff2(const std::vector<double>& u, double h) {
    const int n = static_cast<int>(u.size());
    std::vector<double> out(n, 0.0);
    if (n < 3) return out;
    const double inv_h2 = 1.0 / (h * h);
    for (int i = 1; i + 1 < n; ++i) out[i] = (u[i + 1] - 2.0 * u[i] + u[i - 1]) * inv_h2;
    out[0] = (u[0] - 2.0 * u[1] + u[2]) * inv_h2;
    out[n - 1] = (u[n - 3] - 2.0 * u[n - 2] + u[n - 1]) * inv_h2;
    return out;
}

namespace {

double weighted_sq(const std::vector<double>& f, double h, Exec ex) {
    const int n = static_cast<int>(f.size());
    return par_sum(ex, n, [&](std::ptrdiff_t i) {
        const double w = trapezoid_weight(static_cast<int>(i), n - 1, h);
        return w * f[i] * f[i];
    });
}

}  // namespace

double sobolev_norm(const std::vector<double>& u, double h, int order, Exec ex) {
    if (u.empty()) throw ValidationError("sobolev_norm: empty region");
    if (order != 0 && order != 1 && order != 2 && order != 4)
        throw ValidationError("sobolev_norm: order must be 0, 1, 2 or 4");
    double s = weighted_sq(u, h, ex);
    if (order >= 1) {
        const std::vector<double> d1 = diff1(u, h);
        s += weighted_sq(d1, h, ex);
        if (order >= 2) {
            const std::vector<double> d2 = diff2(u, h);
            s += weighted_sq(d2, h, ex);
            if (order >= 4) {
                s += weighted_sq(diff2(d1, h), h, ex);
                s += weighted_sq(diff2(d2, h), h, ex);
            }
        }
    }
    return std::sqrt(s);
}

double sobolev_norm_2d(const std::vector<double>& u, const SpatialGrid& grid, int order, Exec ex) {
    if (grid.dim != 2) throw ValidationError("sobolev_norm_2d: grid must be 2D");
    if (u.empty()) throw ValidationError("sobolev_norm_2d: empty region");
    if (order != 0 && order != 1 && order != 2 && order != 4)
        throw ValidationError("sobolev_norm_2d: order must be 0, 1, 2 or 4");
    const int nx1 = grid.n_nodes(0), ny1 = grid.n_nodes(1);
    const double hx = grid.h(0), hy = grid.h(1);

    auto apply_axis = [&](const std::vector<double>& f, int axis, int times_d2, bool then_d1) {
        // applies D2 `times_d2` times then optionally D1 along one axis,
        // row/column at a time
        std::vector<double> cur = f;
        auto sweep = [&](bool second) {
            std::vector<double> line(axis == 0 ? nx1 : ny1);
            std::vector<double> next(cur.size());
            const int outer = axis == 0 ? ny1 : nx1;
            for (int o = 0; o < outer; ++o) {
                const int len = static_cast<int>(line.size());
                for (int i = 0; i < len; ++i)
                    line[i] = cur[axis == 0 ? grid.idx(i, o) : grid.idx(o, i)];
                const std::vector<double> d =
                    second ? diff2(line, axis == 0 ? hx : hy) : diff1(line, axis == 0 ? hx : hy);
                for (int i = 0; i < len; ++i)
                    next[axis == 0 ? grid.idx(i, o) : grid.idx(o, i)] = d[i];
            }
            cur = std::move(next);
        };
        for (int r = 0; r < times_d2; ++r) sweep(true);
        if (then_d1) sweep(false);
        return cur;
    };

    double s = 0.0;
    for (int k = 0; k <= order; ++k) {
        for (int l = 0; k + l <= order; ++l) {
            std::vector<double> f = apply_axis(u, 0, k / 2, k % 2 == 1);
            f = apply_axis(f, 1, l / 2, l % 2 == 1);
            s += par_sum(ex, static_cast<std::ptrdiff_t>(f.size()), [&](std::ptrdiff_t lin) {
                const int i = static_cast<int>(lin) % nx1;
                const int j = static_cast<int>(lin) / nx1;
                const double w =
                    trapezoid_weight(i, nx1 - 1, hx) * trapezoid_weight(j, ny1 - 1, hy);
                return w * f[lin] * f[lin];
            });
        }
    }
    return std::sqrt(s);
}

double relative_h2_error(const std::vector<double>& u, const std::vector<double>& ref, double h) {
    if (u.size() != ref.size()) throw ValidationError("relative_h2_error: size mismatch");
    std::vector<double> e(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) e[i] = u[i] - ref[i];
    const double den = sobolev_norm(ref, h, 2);
    if (den == 0.0) throw ValidationError("relative_h2_error: zero reference norm");
    return sobolev_norm(e, h, 2) / den;
}

}  // namespace fraclab
