#pragma once

#include <vector>

#include "fraclab/elliptic.hpp"
#include "fraclab/exec.hpp"
#include "fraclab/forward.hpp"
#include "fraclab/fractional.hpp"
#include "fraclab/grid.hpp"

namespace fraclab {

/// Source of the reduced second-order-in-time equation
///   rho2^2 u_t - (rho1 d_t - L)^2 u = G,
/// split as G = regular + singular/sqrt(pi*t).  The singular coefficient is
/// closed-form (rho2 times the source at t=0), so it carries no quadrature
/// error; G is undefined at t = 0.
struct ReducedSource {
    Field regular;                 ///< regular part, all time levels
    std::vector<double> singular;  ///< nodal coefficient of 1/sqrt(pi*t)

    /// Dense values regular + singular/sqrt(pi*t) for levels >= 1; the
    /// undefined t = 0 level is stored as zero.
    Field total(double dt, Exec ex = Exec::parallel) const;
};

/// G from a general source g:
///   regular = rho2 * caputo_half(g) - rho1 * g_t + L g,  singular = rho2 * g(.,0).
/// g_t is the centered stencil; boundary rows of L g are pass-through and
/// meaningful values exist at interior nodes only.
ReducedSource compute_G(const EquationCoefficients& eq, const EllipticOperator& Lop,
                        const Field& g, double dt, Exec ex = Exec::parallel);

/// F for the separated source g = f(x) * R(x,t), assembled from the expanded
/// product-rule form rather than forming f*R first:
///   principal   R * div(a grad f)
///   gradient    sum_j (2 sum_i a_ij dR/dx_i + b_j R) df/dx_j
///   zero-order  f * [rho2 * caputo_half(R) - rho1 * R_t + L R]
/// with singular part rho2 * f * R(.,0).  Agrees with compute_G(f*R) exactly
/// when R does not vary in space, and within discretization error otherwise.
ReducedSource compute_F(const EquationCoefficients& eq, const EllipticOperator& Lop,
                        const std::vector<double>& f, const Field& R, double dt,
                        Exec ex = Exec::parallel);

/// Residual report of the reduced equation over a truncated window.
struct ReductionReport {
    double max_abs = 0.0;
    double l2 = 0.0;  ///< sqrt(sum r^2 * dt * cell volume) over the window
    int first_level = 0;
    int last_level = 0;
    int space_layers = 0;  ///< boundary layers excluded per axis
};

/// Residual rho2^2 u_t - (rho1 w_t - L w) - G with w = rho1 u_t - L u, all
/// time derivatives centered (independent of the solver's time stepping so
/// the check cannot cancel solver bias).  The window drops
/// max(2, ceil(cut_fraction*N)) initial levels (G is singular at t=0), the
/// last two levels (compounded one-sided stencils), and `space_layers`
/// node layers at each spatial boundary (L has no stencil there).
ReductionReport check_reduced_equation(const Field& u, const ReducedSource& G,
                                       const EquationCoefficients& eq,
                                       const EllipticOperator& Lop, double dt,
                                       double cut_fraction = 0.1, int space_layers = 2,
                                       Exec ex = Exec::parallel);

}  // namespace fraclab
