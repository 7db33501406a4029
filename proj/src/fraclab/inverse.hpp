#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "fraclab/exec.hpp"
#include "fraclab/expr.hpp"
#include "fraclab/forward.hpp"
#include "fraclab/grid.hpp"

namespace fraclab {

struct ObservationMapOptions {
    int basis_size = 32;
    /// First basis node index; -1 places the window so it ends at
    /// round(0.75 n), i.e. start = round(0.75 n) - basis_size + 1.
    int basis_start = -1;
    double r_min = 1e-8;  ///< required min |R(., t0)| over the grid
    /// Diagnostic escape hatch for the negative control: assemble even when
    /// the positivity requirement on R fails, to expose the resulting
    /// conditioning blow-up.  Never reachable from configs.
    bool bypass_r_check = false;
    TimeScheme scheme = TimeScheme::bdf2;
    Exec ex = Exec::parallel;
};

/// Dense linear map from nodal-hat coefficients of the source factor f to
/// the observation-time snapshot u(., t0) at the interior grid nodes.
/// Column j is an independent forward solve with f = hat at basis node j and
/// the shared factor R — no superposition shortcuts, so tests can compare
/// columns against fresh solves.
struct ObservationMap {
    Eigen::MatrixXd A;             ///< n_obs x n_basis
    std::vector<int> basis_nodes;  ///< grid node index per column
    std::vector<int> obs_nodes;    ///< interior grid node index per row
    SpatialGrid grid;
    TimeGrid tg;
    Expr R;
    double r_min_actual = 0.0;      ///< realized min |R(., t0)| over the grid
    double condition_number = 0.0;  ///< SVD sigma_max / sigma_min
    double h() const { return grid.h(0); }
};

/// Assembles the map (1D grids).  Rejects R with min |R(., t0)| < r_min
/// unless bypass_r_check is set: the stability theory needs R bounded away
/// from zero at the observation time, and without it the map degenerates.
ObservationMap assemble_observation_map(const EquationCoefficients& eq,
                                        const EllipticOperator& Lop, const Expr& R,
                                        const TimeGrid& tg,
                                        const ObservationMapOptions& opt = {});

/// Injection restriction from a twice-refined snapshot (2n+1 nodes) to the
/// coarse interior nodes: coarse node i coincides with fine node 2i.  Used
/// to synthesize data on a finer grid than the one used for inversion.
std::vector<double> restrict_injection(const std::vector<double>& fine_row, int coarse_n_cells);

/// Nodal-hat expansion of a coefficient vector back onto the full grid
/// (zero outside the basis window).
std::vector<double> expand_to_grid(const ObservationMap& map, const std::vector<double>& coeffs);

enum class Regularizer { tikhonov, landweber };

struct ReconstructOptions {
    Regularizer method = Regularizer::tikhonov;
    /// Tikhonov parameter; < 0 selects it by the Morozov discrepancy
    /// principle against noise_level (which must then be positive).
    double alpha = -1.0;
    double noise_level = 0.0;  ///< Euclidean norm of the data perturbation
    double tau = 1.0;          ///< discrepancy target is tau * noise_level
    /// Landweber step count; <= 0 iterates until the discrepancy target
    /// (capped at 100000 steps).
    int landweber_iters = 0;
    double morozov_lo = 1e-14;
    double morozov_hi = 1e6;
    Exec ex = Exec::parallel;
};

struct ReconstructionResult {
    std::vector<double> coeffs;  ///< reconstructed f at the basis nodes
    double alpha = 0.0;          ///< parameter used (Tikhonov)
    double misfit = 0.0;         ///< ||A c - data||_2
    double seminorm = 0.0;       ///< sqrt(c^T P c) for the penalty form P
    /// Relative residual of the regularized normal equations at the returned
    /// coefficients (Tikhonov path; 0 for Landweber).
    double normal_residual = 0.0;
    bool discrepancy_attained = true;
    int iterations = 0;  ///< Landweber steps taken (0 for Tikhonov)
};

/// Tikhonov reconstruction: minimizes ||A c - data||^2 + alpha * scale * c^T P c
/// with the second-difference (H2-surrogate seminorm) penalty
/// P = D2^T W D2 + 1e-8 I and scale = ||A^T A||_2 / ||P||_2, so alpha is a
/// dimensionless mix ratio and alpha -> 0 recovers the data exactly on
/// noiseless inverse-crime inputs.  Landweber iteration is the alternative
/// under the same interface (parameter = iteration count / discrepancy stop).
ReconstructionResult reconstruct(const ObservationMap& map, const std::vector<double>& data,
                                 const ReconstructOptions& opt = {});

struct StabilityOptions {
    /// Target H4-surrogate norms of the injected data perturbation,
    /// positive and strictly descending; at least 3 levels for the fit.
    std::vector<double> noise_levels;
    int trials = 8;
    std::uint64_t seed = 1;
    double prior_bound_M = 10.0;  ///< required bound on ||f_true||_{H2 surrogate}
    double tau = 1.0;
    Exec ex = Exec::parallel;
};

struct StabilityRow {
    double noise_level = 0.0;        ///< target perturbation norm (fit abscissa)
    int trial = 0;
    double data_norm_h4 = 0.0;       ///< realized H4-surrogate perturbation norm
    double err_h2_omega = 0.0;       ///< relative H2 error of f_hat on the basis window
    double alpha = 0.0;              ///< Morozov-selected parameter
    double kappa_hat_running = 0.0;  ///< fit slope over rows so far (NaN until 3 levels)
};

struct StabilityReport {
    std::vector<StabilityRow> rows;  ///< levels outer, trials inner
    double kappa_hat = 0.0;          ///< log-log fit slope over all rows
    double r_squared = 0.0;
    double c_hat = 0.0;  ///< sup of err / level^kappa_hat
    double prior_bound_M = 0.0;
};

/// Perturb-and-reconstruct experiment: for each noise level and trial,
/// white nodal noise is rescaled to the level in the H4-surrogate norm,
/// added to the clean data, and reconstructed with Morozov-selected alpha
/// (Euclidean discrepancy against the realized perturbation norm).  The
/// per-trial generator is split from the seed by (trial, level), so results
/// are independent of scheduling order.
StabilityReport stability_experiment(const ObservationMap& map,
                                     const std::vector<double>& f_true_coeffs,
                                     const std::vector<double>& clean_data,
                                     const StabilityOptions& opt);

}  // namespace fraclab
