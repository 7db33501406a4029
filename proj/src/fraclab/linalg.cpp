#include "fraclab/linalg.hpp"

#include <cmath>

#include "fraclab/grid.hpp"

namespace fraclab {

std::vector<double> solve_tridiagonal(std::vector<double> sub, std::vector<double> dia,
                                      std::vector<double> sup, std::vector<double> rhs) {
    const std::size_t n = dia.size();
    if (sub.size() != n || sup.size() != n || rhs.size() != n)
        throw ValidationError("solve_tridiagonal: band sizes disagree");
    if (n == 0) return {};
    for (std::size_t i = 1; i < n; ++i) {
        if (dia[i - 1] == 0.0) throw NumericalError("solve_tridiagonal: zero pivot");
        const double m = sub[i] / dia[i - 1];
        dia[i] -= m * sup[i - 1];
        rhs[i] -= m * rhs[i - 1];
    }
    if (dia[n - 1] == 0.0) throw NumericalError("solve_tridiagonal: zero pivot");
    std::vector<double> x(n);
    x[n - 1] = rhs[n - 1] / dia[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) {
        x[i] = (rhs[i] - sup[i] * x[i + 1]) / dia[i];
    }
    return x;
}

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b, Exec ex) {
    return par_sum(ex, static_cast<std::ptrdiff_t>(a.size()),
                   [&](std::ptrdiff_t i) { return a[i] * b[i]; });
}

double norm2(const std::vector<double>& a, Exec ex) { return std::sqrt(dot(a, a, ex)); }

}  // namespace

KrylovResult bicgstab(const ApplyFn& apply, const std::vector<double>& diag,
                      const std::vector<double>& b, double rel_tol, int max_iter, Exec ex) {
    const std::size_t n = b.size();
    const std::ptrdiff_t np = static_cast<std::ptrdiff_t>(n);
    KrylovResult res;
    res.x.assign(n, 0.0);
    const double bnorm = norm2(b, ex);
    if (bnorm == 0.0) {
        res.converged = true;
        return res;
    }
    std::vector<double> inv_d(n);
    for (std::size_t i = 0; i < n; ++i) inv_d[i] = diag[i] != 0.0 ? 1.0 / diag[i] : 1.0;
    std::vector<double> r = b;  // x0 = 0
    const std::vector<double> r0 = r;
    std::vector<double> p(n, 0.0), v(n, 0.0), s(n), t(n), ph(n), sh(n);
    double rho_prev = 1.0, alpha = 1.0, omega = 1.0;
    for (int it = 1; it <= max_iter; ++it) {
        const double rho = dot(r0, r, ex);
        if (rho == 0.0) break;  // breakdown: restart not needed at these sizes
        if (it == 1) {
            p = r;
        } else {
            const double beta = (rho / rho_prev) * (alpha / omega);
            par_for(ex, np, [&](std::ptrdiff_t i) { p[i] = r[i] + beta * (p[i] - omega * v[i]); });
        }
        par_for(ex, np, [&](std::ptrdiff_t i) { ph[i] = inv_d[i] * p[i]; });
        apply(ph, v);
        const double r0v = dot(r0, v, ex);
        if (r0v == 0.0) break;
        alpha = rho / r0v;
        par_for(ex, np, [&](std::ptrdiff_t i) { s[i] = r[i] - alpha * v[i]; });
        res.iterations = it;
        if (norm2(s, ex) / bnorm < rel_tol) {
            par_for(ex, np, [&](std::ptrdiff_t i) { res.x[i] += alpha * ph[i]; });
            break;
        }
        par_for(ex, np, [&](std::ptrdiff_t i) { sh[i] = inv_d[i] * s[i]; });
        apply(sh, t);
        const double tt = dot(t, t, ex);
        if (tt == 0.0) break;
        omega = dot(t, s, ex) / tt;
        par_for(ex, np, [&](std::ptrdiff_t i) {
            res.x[i] += alpha * ph[i] + omega * sh[i];
            r[i] = s[i] - omega * t[i];
        });
        if (norm2(r, ex) / bnorm < rel_tol) break;
        if (omega == 0.0) break;
        rho_prev = rho;
    }
    apply(res.x, t);
    par_for(ex, np, [&](std::ptrdiff_t i) { t[i] = b[i] - t[i]; });
    res.residual = norm2(t, ex) / bnorm;
    res.converged = res.residual <= rel_tol * 10.0;
    return res;
}

}  // namespace fraclab
