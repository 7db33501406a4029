#pragma once

#include <functional>
#include <vector>

#include "fraclab/exec.hpp"
#include "fraclab/grid.hpp"

namespace fraclab {

using CoefFn = std::function<double(double, double)>;  ///< (x, y) -> value

/// Second-order divergence-form operator
///   L u = sum_i d_i(a_ij d_j u) + sum_j b_j d_j u + c u
/// on a uniform grid, with nodal coefficients and face-averaged fluxes.
/// Immutable once assembled; `apply` is safe to call concurrently.
struct EllipticOperator {
    SpatialGrid grid;
    std::vector<double> a11, a12, a22;  ///< nodal; 1D uses a11 only
    std::vector<double> b1, b2, c;
    std::vector<double> a11_face_x;  ///< face averages along x (per x-edge)
    std::vector<double> a22_face_y;  ///< face averages along y (2D only)
    double m = 1.0;                  ///< ellipticity constant: eigs of a in [1/m, m]

    /// 1D assembly: a, b, c sampled nodewise; rejects non-elliptic a.
    static EllipticOperator assemble(const SpatialGrid& grid, const CoefFn& a, const CoefFn& b,
                                     const CoefFn& c);
    /// 2D assembly with symmetric a = [[a11, a12], [a12, a22]].
    static EllipticOperator assemble2d(const SpatialGrid& grid, const CoefFn& a11, const CoefFn& a12,
                                       const CoefFn& a22, const CoefFn& b1, const CoefFn& b2,
                                       const CoefFn& c);

    /// Lu at interior nodes; boundary entries pass u through unchanged
    /// (homogeneous Dirichlet data therefore maps to zero rows).
    std::vector<double> apply(const std::vector<double>& u, Exec ex = Exec::serial) const;

    /// Checks (1/m)|xi|^2 <= xi' a xi <= m|xi|^2 at every node for n_probe
    /// random unit vectors; returns false on the first violation.
    bool ellipticity_probe(int n_probe, unsigned long long seed = 12345) const;
};

}  // namespace fraclab
