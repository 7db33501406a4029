#include "fraclab/grid.hpp"

#include <cmath>

namespace fraclab {

SpatialGrid SpatialGrid::interval(double x_lo, double x_hi, int n, std::vector<Face> gamma) {
    SpatialGrid g;
    g.dim = 1;
    g.lo = {x_lo, 0.0};
    g.hi = {x_hi, 0.0};
    g.n_cells = {n, 0};
    g.gamma_faces = std::move(gamma);
    g.validate();
    return g;
}

SpatialGrid SpatialGrid::rectangle(double x_lo, double x_hi, double y_lo, double y_hi, int nx, int ny,
                                   std::vector<Face> gamma) {
    SpatialGrid g;
    g.dim = 2;
    g.lo = {x_lo, y_lo};
    g.hi = {x_hi, y_hi};
    g.n_cells = {nx, ny};
    g.gamma_faces = std::move(gamma);
    g.validate();
    return g;
}

void SpatialGrid::validate() const {
    if (dim != 1 && dim != 2) throw ValidationError("grid.dim must be 1 or 2");
    for (int ax = 0; ax < dim; ++ax) {
        if (n_cells[ax] < 1) throw ValidationError("grid.n_cells must be positive");
        if (!(hi[ax] > lo[ax])) throw ValidationError("grid extents must satisfy x_hi > x_lo");
    }
    if (gamma_faces.empty()) throw ValidationError("grid: gamma must be a nonempty set of boundary faces");
    for (Face f : gamma_faces) {
        const int fi = static_cast<int>(f);
        if (fi < 0 || fi >= 2 * dim) throw ValidationError("grid: gamma face outside this dimension");
    }
}

TimeGrid::TimeGrid(double T_, int n_steps_, int t0_index_, double delta_)
    : T(T_), n_steps(n_steps_), t0_index(t0_index_), delta(delta_) {
    validate();
}

void TimeGrid::validate() const {
    if (!(T > 0.0)) throw ValidationError("grid.T must be > 0");
    if (n_steps < 1) throw ValidationError("grid.n_steps must be positive");
    if (t0_index <= 0 || t0_index >= n_steps)
        throw ValidationError("grid.t0_index: t0 must lie strictly inside (0, T)");
    if (!(delta > 0.0)) throw ValidationError("grid.delta must be > 0");
    const double t0v = t0();
    if (!(t0v - 2.0 * delta > 0.0 && t0v + 2.0 * delta < T))
        throw ValidationError("grid.delta: need 0 < t0 - 2*delta and t0 + 2*delta < T");
}

bool Field::all_finite() const {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

int time_cut_index(const TimeGrid& tg, double fraction, int min_cells) {
    const int frac_cells = static_cast<int>(std::ceil(fraction * tg.n_steps));
    int n0 = frac_cells > min_cells ? frac_cells : min_cells;
    if (n0 > tg.n_steps) n0 = tg.n_steps;
    return n0;
}

}  // namespace fraclab
