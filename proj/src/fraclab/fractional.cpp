#include "fraclab/fractional.hpp"

#include <cmath>

namespace fraclab {

L1Weights L1Weights::build(int n_steps, double dt) {
    if (dt <= 0.0) throw ValidationError("half-derivative weights: dt must be positive");
    if (n_steps < 1) throw ValidationError("half-derivative weights: need n_steps >= 1");
    L1Weights lw;
    lw.prefactor = 2.0 / std::sqrt(M_PI * dt);
    lw.w.resize(n_steps);
    for (int j = 0; j < n_steps; ++j) {
        lw.w[j] = std::sqrt(j + 1.0) - std::sqrt(static_cast<double>(j));
    }
    return lw;
}

Field caputo_half(const Field& u, double dt, Exec ex) {
    const int nt = u.nt, nsp = u.nsp;
    if (nt < 2) throw ValidationError("caputo_half: need at least 2 time levels");
    const L1Weights lw = L1Weights::build(nt - 1, dt);
    Field out(nt, nsp);
    // Each node's convolution is independent: parallelise over space.
    par_for(ex, nsp, [&](std::ptrdiff_t jj) {
        const int j = static_cast<int>(jj);
        for (int n = 1; n < nt; ++n) {
            double acc = 0.0;
            for (int k = 0; k < n; ++k) {
                acc += lw.w[n - 1 - k] * (u.at(k + 1, j) - u.at(k, j));
            }
            out.at(n, j) = lw.prefactor * acc;
        }
    });
    return out;
}

Field riemann_liouville_half(const Field& u, double dt, Exec ex) {
    Field out = caputo_half(u, dt, ex);
    const int nt = u.nt, nsp = u.nsp;
    par_for(ex, nsp, [&](std::ptrdiff_t jj) {
        const int j = static_cast<int>(jj);
        const double u0 = u.at(0, j);
        for (int n = 1; n < nt; ++n) {
            out.at(n, j) += u0 / std::sqrt(M_PI * (n * dt));
        }
        // Level 0 stays zero; callers must treat it as undefined (see
        // rl_level_undefined), not as a value.
    });
    return out;
}

Field time_derivative_centered(const Field& u, double dt, Exec ex) {
    const int nt = u.nt, nsp = u.nsp;
    if (nt < 3) throw ValidationError("time_derivative_centered: need >= 3 time levels");
    Field out(nt, nsp);
    const double inv_2dt = 0.5 / dt;
    par_for(ex, nsp, [&](std::ptrdiff_t jj) {
        const int j = static_cast<int>(jj);
        out.at(0, j) = (-3.0 * u.at(0, j) + 4.0 * u.at(1, j) - u.at(2, j)) * inv_2dt;
        for (int n = 1; n + 1 < nt; ++n) {
            out.at(n, j) = (u.at(n + 1, j) - u.at(n - 1, j)) * inv_2dt;
        }
        out.at(nt - 1, j) =
            (3.0 * u.at(nt - 1, j) - 4.0 * u.at(nt - 2, j) + u.at(nt - 3, j)) * inv_2dt;
    });
    return out;
}

Field time_derivative_backward(const Field& u, double dt, Exec ex) {
    const int nt = u.nt, nsp = u.nsp;
    if (nt < 2) throw ValidationError("time_derivative_backward: need >= 2 time levels");
    Field out(nt, nsp);
    const double inv_dt = 1.0 / dt;
    par_for(ex, nsp, [&](std::ptrdiff_t jj) {
        const int j = static_cast<int>(jj);
        for (int n = 1; n < nt; ++n) {
            out.at(n, j) = (u.at(n, j) - u.at(n - 1, j)) * inv_dt;
        }
        out.at(0, j) = out.at(1, j);
    });
    return out;
}

namespace {

ResidualReport summarize(const Field& r, double dt, double h, int first, int last, Exec ex) {
    ResidualReport rep;
    rep.first_level = first;
    rep.last_level = last;
    const int nsp = r.nsp;
    const std::ptrdiff_t count = static_cast<std::ptrdiff_t>(last - first + 1) * nsp;
    rep.max_abs = par_max(ex, count, [&](std::ptrdiff_t q) {
        return std::abs(r.at(first + static_cast<int>(q) / nsp, static_cast<int>(q) % nsp));
    });
    const double ss = par_sum(ex, count, [&](std::ptrdiff_t q) {
        const double v = r.at(first + static_cast<int>(q) / nsp, static_cast<int>(q) % nsp);
        return v * v;
    });
    rep.l2 = std::sqrt(ss * dt * h);
    return rep;
}

int window_start(int n_steps, double cut_fraction) {
    const int cut = static_cast<int>(std::ceil(cut_fraction * n_steps));
    return cut < 2 ? 2 : cut;
}

}  // namespace

ResidualReport check_composition_identity(const Field& u, double dt, double h,
                                          double cut_fraction, Exec ex) {
    const int nt = u.nt;
    if (nt < 5) throw ValidationError("composition check: need >= 5 time levels");
    const Field c1 = caputo_half(u, dt, ex);
    const Field cc = caputo_half(c1, dt, ex);
    const Field ut = time_derivative_centered(u, dt, ex);
    Field r(nt, u.nsp);
    par_for(ex, static_cast<std::ptrdiff_t>(r.v.size()),
            [&](std::ptrdiff_t q) { r.v[q] = cc.v[q] - ut.v[q]; });
    const int first = window_start(nt - 1, cut_fraction);
    const int last = nt - 2;  // drop the one-sided final level
    if (first > last) throw ValidationError("composition check: window empty; add time levels");
    return summarize(r, dt, h, first, last, ex);
}

ResidualReport check_commutator_identity(const Field& u, double dt, double h,
                                         double cut_fraction, Exec ex) {
    const int nt = u.nt, nsp = u.nsp;
    if (nt < 5) throw ValidationError("commutator check: need >= 5 time levels");
    const Field c1 = caputo_half(u, dt, ex);
    const Field ut = time_derivative_centered(u, dt, ex);
    const Field c_of_ut = caputo_half(ut, dt, ex);
    const Field dt_of_c = time_derivative_centered(c1, dt, ex);
    Field r(nt, nsp);
    par_for(ex, nsp, [&](std::ptrdiff_t jj) {
        const int j = static_cast<int>(jj);
        const double du0 = ut.at(0, j);  // u_t(.,0) from the one-sided end stencil
        for (int n = 1; n < nt; ++n) {
            r.at(n, j) = c_of_ut.at(n, j) - dt_of_c.at(n, j) + du0 / std::sqrt(M_PI * (n * dt));
        }
    });
    const int first = window_start(nt - 1, cut_fraction);
    const int last = nt - 2;
    if (first > last) throw ValidationError("commutator check: window empty; add time levels");
    return summarize(r, dt, h, first, last, ex);
}

}  // namespace fraclab
