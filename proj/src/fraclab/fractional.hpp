#pragma once

#include <vector>

#include "fraclab/exec.hpp"
#include "fraclab/grid.hpp"

namespace fraclab {

/// Convolution weights of the L1 scheme for the half-order time derivative,
/// w_j = sqrt(j+1) - sqrt(j), plus the shared prefactor 2/sqrt(pi*dt).  The
/// weights are positive, strictly decreasing, and telescope exactly:
/// sum_{j<n} w_j == sqrt(n).
struct L1Weights {
    std::vector<double> w;
    double prefactor = 0.0;

    static L1Weights build(int n_steps, double dt);
};

/// Caputo derivative of order 1/2 of a space-time field, level by level:
///   out[n] = prefactor * sum_{k<n} w[n-1-k] * (u[k+1] - u[k]).
/// Level 0 is identically zero (empty history).  Exact for u = t up to
/// roundoff thanks to the telescoping weights.
Field caputo_half(const Field& u, double dt, Exec ex = Exec::parallel);

/// Riemann-Liouville derivative of order 1/2: the Caputo value plus the
/// singular contribution u(.,0)/sqrt(pi*t).  Undefined at t = 0; that level
/// is stored as zero and flagged by rl_level_undefined.
Field riemann_liouville_half(const Field& u, double dt, Exec ex = Exec::parallel);

/// True for the single time level at which riemann_liouville_half has no
/// value (the 1/sqrt(pi*t) factor blows up at t = 0).
constexpr bool rl_level_undefined(int level) { return level == 0; }

/// Second-order whole time derivative: centered in the interior, one-sided
/// three-point stencils at both end levels.
Field time_derivative_centered(const Field& u, double dt, Exec ex = Exec::parallel);

/// First-order backward differences; level 0 copies the level-1 value so the
/// result is defined everywhere.
Field time_derivative_backward(const Field& u, double dt, Exec ex = Exec::parallel);

/// Residual summary over the time window [first_level, last_level]
/// (inclusive), all spatial nodes.
struct ResidualReport {
    double max_abs = 0.0;
    double l2 = 0.0;  ///< sqrt(sum r^2 * dt * h) over the window
    int first_level = 0;
    int last_level = 0;
};

/// Residual of applying the half-derivative twice against the centered whole
/// derivative.  Window: levels [max(2, ceil(cut_fraction*N)), N-1] — the
/// initial layer is excluded because the scheme sees the t=0 kernel
/// singularity there, and the final level uses a one-sided stencil.
ResidualReport check_composition_identity(const Field& u, double dt, double h,
                                          double cut_fraction = 0.1, Exec ex = Exec::parallel);

/// Residual of swapping the half-derivative with the whole derivative.  The
/// swap is exact only up to the boundary term u_t(.,0)/sqrt(pi*t), which the
/// checker adds back.  The inner whole derivative must be the centered
/// stencil: a one-sided inner derivative contaminates the residual at first
/// order and the check then fails on smooth inputs.
ResidualReport check_commutator_identity(const Field& u, double dt, double h,
                                         double cut_fraction = 0.1, Exec ex = Exec::parallel);

}  // namespace fraclab
