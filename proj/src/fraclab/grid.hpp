#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace fraclab {

/// Raised when a precondition or config value is invalid (CLI exit code 1).
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Raised when a computation fails numerically — NaN, non-convergent linear
/// solve, overflow (CLI exit code 2).
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Boundary faces; 1D uses x_lo/x_hi only.
enum class Face : int { x_lo = 0, x_hi = 1, y_lo = 2, y_hi = 3 };

/// Uniform tensor-product grid on an interval (dim 1) or rectangle (dim 2).
/// gamma_faces marks the observable part of the boundary.
struct SpatialGrid {
    int dim = 1;
    std::array<double, 2> lo{0.0, 0.0};
    std::array<double, 2> hi{1.0, 1.0};
    std::array<int, 2> n_cells{1, 1};
    std::vector<Face> gamma_faces;

    static SpatialGrid interval(double x_lo, double x_hi, int n, std::vector<Face> gamma = {Face::x_hi});
    static SpatialGrid rectangle(double x_lo, double x_hi, double y_lo, double y_hi, int nx, int ny,
                                 std::vector<Face> gamma = {Face::x_hi});

    double h(int axis = 0) const { return (hi[axis] - lo[axis]) / n_cells[axis]; }
    int n_nodes(int axis = 0) const { return n_cells[axis] + 1; }
    /// Total node count (all axes).
    int size() const { return dim == 1 ? n_nodes(0) : n_nodes(0) * n_nodes(1); }
    double x(int i) const { return lo[0] + i * h(0); }
    double y(int j) const { return lo[1] + j * h(1); }
    /// Linear index of node (i, j); 1D ignores j.
    int idx(int i, int j = 0) const { return dim == 1 ? i : j * n_nodes(0) + i; }
    bool on_boundary(int i, int j = 0) const {
        if (i == 0 || i == n_cells[0]) return true;
        return dim == 2 && (j == 0 || j == n_cells[1]);
    }
    int interior_count() const {
        return dim == 1 ? n_cells[0] - 1 : (n_cells[0] - 1) * (n_cells[1] - 1);
    }

    void validate() const;
};

/// Uniform time grid with a marked observation index t0 and half-width delta
/// satisfying 0 < t0 - 2*delta and t0 + 2*delta < T.
struct TimeGrid {
    double T = 1.0;
    int n_steps = 1;
    int t0_index = 0;
    double delta = 0.0;

    TimeGrid() = default;
    TimeGrid(double T_, int n_steps_, int t0_index_, double delta_);

    double dt() const { return T / n_steps; }
    double t(int n) const { return n * dt(); }
    double t0() const { return t0_index * dt(); }
    int n_levels() const { return n_steps + 1; }

    void validate() const;
};

/// Dense space-time grid function, indexed (time level, linear node index).
/// A single-time field is a Field with nt == 1.
struct Field {
    int nt = 0;   ///< number of time levels
    int nsp = 0;  ///< number of spatial nodes
    std::vector<double> v;

    Field() = default;
    Field(int nt_, int nsp_) : nt(nt_), nsp(nsp_), v(static_cast<std::size_t>(nt_) * nsp_, 0.0) {}

    double& at(int n, int j) { return v[static_cast<std::size_t>(n) * nsp + j]; }
    double at(int n, int j) const { return v[static_cast<std::size_t>(n) * nsp + j]; }
    double* row(int n) { return v.data() + static_cast<std::size_t>(n) * nsp; }
    const double* row(int n) const { return v.data() + static_cast<std::size_t>(n) * nsp; }

    bool all_finite() const;
};

/// Trapezoidal quadrature weight of node i on an n_cells+1 node axis (h * 1 or h/2).
inline double trapezoid_weight(int i, int n_cells, double h) {
    return (i == 0 || i == n_cells) ? 0.5 * h : h;
}

/// First index n with t(n) >= max(min_cells*dt, fraction*T); used as the left
/// edge of residual windows that must exclude the singular t=0 neighborhood.
int time_cut_index(const TimeGrid& tg, double fraction, int min_cells = 2);

}  // namespace fraclab
