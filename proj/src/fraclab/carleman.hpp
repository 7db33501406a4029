#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "fraclab/elliptic.hpp"
#include "fraclab/exec.hpp"
#include "fraclab/forward.hpp"
#include "fraclab/grid.hpp"

namespace fraclab {

/// C^4 polynomial step: 0 below 0, 1 above 1, and the first four derivatives
/// vanish at both knots, so cutoffs built from it have four exact classical
/// space derivatives.  S(s) = 126 s^5 - 420 s^6 + 540 s^7 - 315 s^8 + 70 s^9.
struct Smootherstep {
    static double value(double s);
    static double d1(double s);
    static double d2(double s);
    static double d3(double s);
    static double d4(double s);
};

/// User-facing knobs of the weight construction.
struct CarlemanParams {
    double lambda = 1.5;       ///< weight sharpness; see the calibration note below
    double epsilon = 0.5;      ///< level fraction in (0, epsilon0]
    double omega_x_lo = 0.4;   ///< observation subdomain (absolute coordinates)
    double omega_x_hi = 0.9;
    double omega_y_lo = 0.4;   ///< 2D only
    double omega_y_hi = 0.9;
    double taper_width = 0.15; ///< gamma-face taper width as a fraction of |Omega|
};

/// The weight geometry: a quadratic distance-like profile d on an extension
/// Omega0 of the domain past the observable boundary part gamma, the
/// space-time weight psi = d - beta (t - t0)^2, phi = exp(lambda psi), the
/// beta interval midpoint, the level values mu_1 < mu_2 < mu_3, and the
/// observation subdomain omega.  All stated invariants are validated at
/// construction; violations raise ValidationError naming the inequality.
struct CarlemanGeometry {
    SpatialGrid grid;           ///< computational domain Omega
    SpatialGrid extended_grid;  ///< diagnostic grid on Omega0 (own spacing)
    TimeGrid tg;
    double beta = 0.0;
    double lambda = 0.0;
    double epsilon = 0.0;
    double epsilon0 = 0.0;      ///< sup of admissible epsilon (bisected)
    double d_norm = 0.0;        ///< max of d over the closure of Omega0
    std::array<double, 3> mu{{0.0, 0.0, 0.0}};
    std::vector<char> omega_mask;    ///< Omega-grid nodes inside omega
    std::vector<double> d_nodes;     ///< d at Omega-grid nodes
    std::vector<double> d_extended;  ///< d at Omega0-grid nodes
    double taper_width = 0.15;

    /// Closed-form quadratic profile per axis: d_axis(x) = (x - r0)(r1 - x).
    struct AxisProfile {
        double r0 = 0.0, r1 = 0.0;
        bool gamma_hi = true;  ///< extension direction (gamma at the hi face)
        double value(double x) const { return (x - r0) * (r1 - x); }
        double deriv(double x) const { return r0 + r1 - 2.0 * x; }
        double deriv2() const { return -2.0; }
    };
    AxisProfile ax, ay;  ///< 2D d is the product ax.value(x) * ay.value(y)

    double d(double x, double y = 0.0) const;
    double d_dx(double x, double y = 0.0) const;
    double d_dy(double x, double y) const;
    double t0() const { return tg.t0(); }
    double psi(double x, double t, double y = 0.0) const {
        const double dt0 = t - t0();
        return d(x, y) - beta * dt0 * dt0;
    }
    double phi(double x, double t, double y = 0.0) const;
    /// Smooth taper to zero at the gamma face(s); identically 1 elsewhere.
    double taper(double x, double y = 0.0) const;
};

/// Constructs and validates the geometry.  1D: gamma is exactly one endpoint
/// face and Omega0 extends 1.4|Omega| past it (reference: Omega = (0,1),
/// gamma = {x=1}, Omega0 = (0, 2.4), d = x(2.4-x)).  2D: gamma is exactly
/// three faces; the x-axis uses the 1D rule toward its gamma face and the
/// other axis extends 0.7|axis| both ways, d = product of the two axis
/// profiles (a single gamma edge is rejected: the corner critical points of
/// a product profile would then sit inside the closed domain).
CarlemanGeometry build_weight(const SpatialGrid& grid, const TimeGrid& tg,
                              const CarlemanParams& params);

/// Space-time and observation-time super-level sets of psi.
struct LevelSetDomains {
    std::array<std::vector<char>, 3> Q;        ///< psi > mu_k, nt x nsp masks
    std::array<std::vector<char>, 3> Q_minus;  ///< Q_k intersected with t < t0
    std::array<std::vector<char>, 3> Omega_k;  ///< spatial masks at t = t0
    std::array<std::size_t, 3> count_Q{{0, 0, 0}};
    std::array<std::size_t, 3> count_Omega{{0, 0, 0}};
};

/// Evaluates the masks and asserts the nesting/inclusion invariants
/// (Q3 in Q2 in Q1; omega x (t0 +- sqrt(eps) delta) inside Q3; Q1 inside
/// the slab |t - t0| < 2 delta).  Violations raise ValidationError naming
/// the failed inclusion.
LevelSetDomains build_level_sets(const CarlemanGeometry& geom);

/// Mollified cutoffs riding the level sets (1D geometries): chi(x,t) climbs
/// from 0 at {psi <= mu_1} to 1 at {psi >= mu_2}; chi_tilde is its spatial
/// analog with d.  Derivatives are closed-form (exact jets of the polynomial
/// step composed with the quadratic level coordinate), spot-checkable
/// against finite differences.
struct Cutoff {
    Field chi;                     ///< values
    Field chi_t;                   ///< time derivative
    std::array<Field, 4> chi_dx;   ///< spatial derivatives, orders 1..4
    std::vector<double> chi_tilde, chi_tilde_dx, chi_tilde_dxx;
};

Cutoff build_cutoffs(const CarlemanGeometry& geom);

/// One row of a ratio sweep.  The weighted integrals overflow doubles at
/// large s (the exponent 2 s phi reaches ~1100), so both are stored with a
/// common factored-out exponent `log_shift`: true integral =
/// value * exp(log_shift).  The ratio is shift-invariant.
struct CarlemanRatioRow {
    double s = 0.0;
    double lambda = 0.0;
    double lhs = 0.0;
    double residual = 0.0;
    double log_shift = 0.0;
    double ratio = 0.0;
    double boundary_term = 0.0;  ///< identically 0 in the compact-support regime
    bool defined = true;         ///< false when both sides vanish (zero field)
    bool violation = false;      ///< residual vanished while the LHS did not
};

struct CarlemanRatioReport {
    std::vector<CarlemanRatioRow> rows;
    double tail_constant = 0.0;  ///< sup of the ratio over the last 3 sweep points
    double s_star = 0.0;         ///< first s from which the ratio stops growing
    bool tail_bounded = true;    ///< non-increasing (vs slack) across the last 3
    double slack = 1.5;
};

/// Parabolic inequality: for each s,
///   LHS = Int [ s^-1 (v_t^2 + v_xx^2) + s lambda^2 v_x^2 + s^3 lambda^4 v^2 ] e^{2 s phi}
///   RES = Int (rho1 v_t - L v)^2 e^{2 s phi}
/// over the masked region {psi > mu_1}, trapezoid quadrature in x and t.
/// v must be compactly supported in the domain interior (taper applied by
/// the field generator); 1D geometries only.
CarlemanRatioReport check_parabolic_carleman(const Field& v, const CarlemanGeometry& geom,
                                             const EllipticOperator& Lop,
                                             const EquationCoefficients& eq,
                                             const std::vector<double>& s_sweep,
                                             Exec ex = Exec::parallel);

/// Combined inequality for the reduced second-order operator:
///   LHS = Int [ s^-2 (u_tt^2 + u_xxt^2) + lambda^2 u_xt^2
///             + s^2 lambda^4 (u_t^2 + u_xx^2) + s^4 lambda^6 u_x^2
///             + s^6 lambda^8 u^2 ] e^{2 s phi}
///   RES = Int (rho2^2 u_t - (rho1 w_t - L w))^2 e^{2 s phi},  w = rho1 u_t - L u.
CarlemanRatioReport check_combined_carleman(const Field& u, const CarlemanGeometry& geom,
                                            const EllipticOperator& Lop,
                                            const EquationCoefficients& eq,
                                            const std::vector<double>& s_sweep,
                                            Exec ex = Exec::parallel);

/// Elliptic inequality at the observation time, weight phi0 = e^{lambda d}:
///   LHS = Int [ s^-1 v_xx^2 + s lambda^2 v_x^2 + s^3 lambda^4 v^2 ] e^{2 s phi0}
///   RES = Int (L v)^2 e^{2 s phi0}
/// over {d > mu_1}.
CarlemanRatioReport check_elliptic_carleman(const std::vector<double>& v,
                                            const CarlemanGeometry& geom,
                                            const EllipticOperator& Lop,
                                            const std::vector<double>& s_sweep,
                                            Exec ex = Exec::parallel);

/// Seeded compactly supported space-time test field:
///   chi * taper * sum_{m=1..4} c_m sin(m pi xi) (1 + 0.3 a_m (t - t0)/(2 delta)),
/// xi the normalized x coordinate, c and a standard normal draws from the
/// (seed, index) stream — c first, then a.
Field carleman_test_field(const CarlemanGeometry& geom, std::uint64_t seed, int index);

/// Spatial variant for the elliptic checker: chi_tilde * taper * the same
/// four sine modes (same c draws as the space-time field of this index).
std::vector<double> carleman_test_field_spatial(const CarlemanGeometry& geom, std::uint64_t seed,
                                                int index);

}  // namespace fraclab
