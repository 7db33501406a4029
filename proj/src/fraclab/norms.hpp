#pragma once

#include <vector>

#include "fraclab/exec.hpp"
#include "fraclab/grid.hpp"

namespace fraclab {

/// First difference quotient: centered at interior nodes, first-order
/// one-sided at the two edge nodes.  Matches the quadratic forms used by the
/// reconstruction penalty and the H4 data norm, so noise calibrations carry.
std::vector<double> diff1(const std::vector<double>& u, double h);

/// Second difference quotient: centered; the edge rows use the adjacent
/// interior stencil shifted to stay on the grid.
std::vector<double> diff2(const std::vector<double>& u, double h);

/// Discrete Sobolev surrogate norm of a 1D nodal vector:
///   order 0: trapezoid-weighted L2;
///   order 1: + |D1 u|^2;  order 2: + |D2 u|^2;
///   order 4: + |D2 D1 u|^2 + |D2 D2 u|^2 (third/fourth difference quotients).
/// Regions are handled by slicing the vector before the call; the difference
/// stencils then use one-sided forms at the slice edges.
double sobolev_norm(const std::vector<double>& u, double h, int order, Exec ex = Exec::serial);

/// Same surrogate on a 2D grid over the full region: sums |Dx^k Dy^l u|^2
/// over k + l <= order with tensor trapezoid weights.
double sobolev_norm_2d(const std::vector<double>& u, const SpatialGrid& grid, int order,
                       Exec ex = Exec::serial);

/// Relative error in the order-2 surrogate: ||u - ref|| / ||ref||.
double relative_h2_error(const std::vector<double>& u, const std::vector<double>& ref, double h);

}  // namespace fraclab
