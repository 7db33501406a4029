// Timing comparison of the hot kernels under the serial reference policy and
// the OpenMP policy.  Reports wall time and the max deviation between the two
// results; it asserts nothing about speedup (single-core machines are fine),
// only that both policies agree.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <vector>

#include "fraclab/carleman.hpp"
#include "fraclab/elliptic.hpp"
#include "fraclab/exec.hpp"
#include "fraclab/forward.hpp"
#include "fraclab/fractional.hpp"
#include "fraclab/grid.hpp"

using namespace fraclab;

namespace {

double now_seconds() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
}

template <class F>
double timed(F&& f) {
    const double t0 = now_seconds();
    f();
    return now_seconds() - t0;
}

void report(const char* name, double t_serial, double t_parallel, double max_dev) {
    std::printf("%-28s serial %8.3f s   parallel %8.3f s   speedup %5.2fx   max|dev| %.3e\n", name,
                t_serial, t_parallel, t_parallel > 0.0 ? t_serial / t_parallel : 0.0, max_dev);
}

double max_dev_fields(const Field& a, const Field& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.v.size(); ++i) m = std::max(m, std::abs(a.v[i] - b.v[i]));
    return m;
}

}  // namespace

int main() {
    std::printf("fraclab kernel benchmark (threads available: %d)\n\n", max_threads());

    {
        // L1 half-derivative: O(N^2) history sweep.
        const SpatialGrid grid = SpatialGrid::interval(0.0, 1.0, 256);
        const TimeGrid tg(1.0, 2048, 1024, 0.1);
        Field u(tg.n_levels(), grid.size());
        for (int n = 0; n < u.nt; ++n)
            for (int j = 0; j < u.nsp; ++j)
                u.at(n, j) = std::sin(3.0 * grid.x(j)) * tg.t(n) * (1.0 + tg.t(n));
        Field a, b;
        const double ts = timed([&] { a = caputo_half(u, tg.dt(), Exec::serial); });
        const double tp = timed([&] { b = caputo_half(u, tg.dt(), Exec::parallel); });
        report("caputo_half 256x2048", ts, tp, max_dev_fields(a, b));
    }

    {
        // Implicit forward solve, 1D direct path.
        const SpatialGrid grid = SpatialGrid::interval(0.0, 1.0, 512);
        const TimeGrid tg(1.0, 1024, 512, 0.1);
        const EllipticOperator Lop =
            EllipticOperator::assemble(grid, [](double, double) { return 1.0; },
                                       [](double, double) { return 0.0; }, [](double, double) { return 0.0; });
        const EquationCoefficients eq(1.0, 1.0);
        Field g(tg.n_levels(), grid.size());
        for (int n = 0; n < g.nt; ++n)
            for (int j = 0; j < g.nsp; ++j) g.at(n, j) = tg.t(n) * grid.x(j) * (1.0 - grid.x(j));
        SolveOptions so;
        Field a, b;
        so.ex = Exec::serial;
        const double ts = timed([&] { a = solve_forward(eq, Lop, g, tg, so).u; });
        so.ex = Exec::parallel;
        const double tp = timed([&] { b = solve_forward(eq, Lop, g, tg, so).u; });
        report("solve_forward 512x1024", ts, tp, max_dev_fields(a, b));
    }

    {
        // 2D operator apply (matrix-free stencil sweep).
        const SpatialGrid grid = SpatialGrid::rectangle(0.0, 1.0, 0.0, 1.0, 384, 384,
                                                        {Face::x_hi, Face::y_lo, Face::y_hi});
        const EllipticOperator Lop = EllipticOperator::assemble2d(
            grid, [](double, double) { return 1.0; }, [](double, double) { return 0.1; },
            [](double, double) { return 1.5; }, [](double, double) { return 0.2; },
            [](double, double) { return 0.0; }, [](double, double) { return 0.3; });
        std::vector<double> u(grid.size());
        for (int i = 0; i < grid.size(); ++i) u[i] = std::cos(0.01 * i);
        std::vector<double> a, b;
        const double ts = timed([&] {
            for (int r = 0; r < 50; ++r) a = Lop.apply(u, Exec::serial);
        });
        const double tp = timed([&] {
            for (int r = 0; r < 50; ++r) b = Lop.apply(u, Exec::parallel);
        });
        double dev = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) dev = std::max(dev, std::abs(a[i] - b[i]));
        report("elliptic apply 385^2 x50", ts, tp, dev);
    }

    {
        // Weighted ratio sweep (quadratures over masked space-time regions).
        const SpatialGrid grid = SpatialGrid::interval(0.0, 1.0, 128);
        const TimeGrid tg(1.0, 256, 128, 0.1);
        const EllipticOperator Lop =
            EllipticOperator::assemble(grid, [](double, double) { return 1.0; },
                                       [](double, double) { return 0.0; }, [](double, double) { return 0.0; });
        const EquationCoefficients eq(1.0, 1.0);
        const CarlemanGeometry geom = build_weight(grid, tg, CarlemanParams{});
        const Field v = carleman_test_field(geom, 7, 0);
        const std::vector<double> sweep = {2, 4, 8, 16, 32};
        CarlemanRatioReport ra, rb;
        const double ts = timed([&] { ra = check_parabolic_carleman(v, geom, Lop, eq, sweep, Exec::serial); });
        const double tp =
            timed([&] { rb = check_parabolic_carleman(v, geom, Lop, eq, sweep, Exec::parallel); });
        double dev = 0.0;
        for (std::size_t i = 0; i < ra.rows.size(); ++i)
            dev = std::max(dev, std::abs(ra.rows[i].ratio - rb.rows[i].ratio));
        report("carleman sweep 128x256", ts, tp, dev);
    }

    std::printf("\nDeviations reflect the fixed-chunk parallel reductions; map kernels match bitwise.\n");
    return 0;
}
