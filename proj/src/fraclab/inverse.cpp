#include "fraclab/inverse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fraclab/norms.hpp"
#include "fraclab/rng.hpp"

namespace fraclab {

namespace {

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<double> to_std(const Eigen::VectorXd& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
}

/// Dense second-difference matrix matching diff2: centered rows inside, the
/// edge rows shifted onto the grid.
Eigen::MatrixXd second_difference(int n, double h) {
    Eigen::MatrixXd D2 = Eigen::MatrixXd::Zero(n, n);
    const double w = 1.0 / (h * h);
    for (int i = 1; i + 1 < n; ++i) {
        D2(i, i - 1) = w;
        D2(i, i) = -2.0 * w;
        D2(i, i + 1) = w;
    }
    D2(0, 0) = w;
    D2(0, 1) = -2.0 * w;
    D2(0, 2) = w;
    D2(n - 1, n - 3) = w;
    D2(n - 1, n - 2) = -2.0 * w;
    D2(n - 1, n - 1) = w;
    return D2;
}

/// Penalty form: trapezoid-weighted second-difference seminorm plus a tiny
/// ridge so the form is positive definite for every alpha > 0.
Eigen::MatrixXd h2_penalty(int n, double h) {
    const Eigen::MatrixXd D2 = second_difference(n, h);
    Eigen::VectorXd w = Eigen::VectorXd::Constant(n, h);
    w(0) *= 0.5;
    w(n - 1) *= 0.5;
    Eigen::MatrixXd P = D2.transpose() * w.asDiagonal() * D2;
    P += 1e-8 * Eigen::MatrixXd::Identity(n, n);
    return P;
}

double spectral_norm_sym(const Eigen::MatrixXd& M) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

struct LogLogFit {
    double slope = 0.0;
    double r_squared = 0.0;
    double c_sup = 0.0;
    int n = 0;
};

/// Least-squares fit of log(err) against log(level); c_sup is the empirical
/// constant sup err / level^slope.  Rows with nonpositive entries carry no
/// information on a log scale and are skipped.
LogLogFit fit_loglog(const std::vector<double>& levels, const std::vector<double>& errs) {
    LogLogFit fit;
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < levels.size(); ++i) {
        if (levels[i] > 0.0 && errs[i] > 0.0) {
            lx.push_back(std::log(levels[i]));
            ly.push_back(std::log(errs[i]));
        }
    }
    fit.n = static_cast<int>(lx.size());
    if (fit.n < 2) return fit;
    double mx = 0.0, my = 0.0;
    for (int i = 0; i < fit.n; ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= fit.n;
    my /= fit.n;
    double sxx = 0.0, sxy = 0.0;
    for (int i = 0; i < fit.n; ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    if (sxx == 0.0) return fit;
    fit.slope = sxy / sxx;
    const double intercept = my - fit.slope * mx;
    double ss_res = 0.0, ss_tot = 0.0, csup = 0.0;
    for (int i = 0; i < fit.n; ++i) {
        const double r = ly[i] - (fit.slope * lx[i] + intercept);
        ss_res += r * r;
        ss_tot += (ly[i] - my) * (ly[i] - my);
        csup = std::max(csup, std::exp(ly[i] - fit.slope * lx[i]));
    }
    fit.r_squared = ss_tot == 0.0 ? 1.0 : 1.0 - ss_res / ss_tot;
    fit.c_sup = csup;
    return fit;
}

}  // namespace

ObservationMap assemble_observation_map(const EquationCoefficients& eq,
                                        const EllipticOperator& Lop, const Expr& R,
                                        const TimeGrid& tg, const ObservationMapOptions& opt) {
    const SpatialGrid& grid = Lop.grid;
    if (grid.dim != 1)
        throw ValidationError("observation map: the inverse harness supports 1D grids");
    tg.validate();
    const int n = grid.n_cells[0];
    const int interior = n - 1;
    if (opt.basis_size < 1 || opt.basis_size > interior)
        throw ValidationError("inverse.basis_size must lie in [1, interior node count]");
    int start = opt.basis_start;
    if (start < 0) start = static_cast<int>(std::lround(0.75 * n)) - opt.basis_size + 1;
    if (start < 1 || start + opt.basis_size - 1 > interior)
        throw ValidationError("inverse basis window [" + std::to_string(start) + ", " +
                              std::to_string(start + opt.basis_size - 1) +
                              "] must consist of interior nodes");

    ObservationMap map;
    map.grid = grid;
    map.tg = tg;
    map.R = R;

    // Validate the observation-time positivity of R before any solve.
    const double t0 = tg.t0();
    double rmin = std::numeric_limits<double>::infinity();
    for (int i = 0; i < grid.size(); ++i) rmin = std::min(rmin, std::abs(R.eval(grid.x(i), t0)));
    map.r_min_actual = rmin;
    if (!opt.bypass_r_check && !(rmin >= opt.r_min))
        throw ValidationError(
            "source factor R: min |R(x, t0)| = " + std::to_string(rmin) + " is below r_min = " +
            std::to_string(opt.r_min) +
            "; the reconstruction requires R bounded away from zero at the observation time");

    for (int j = 0; j < opt.basis_size; ++j) map.basis_nodes.push_back(start + j);
    for (int i = 1; i <= interior; ++i) map.obs_nodes.push_back(i);

    // One forward solve per basis element; a nodal hat sampled on its own
    // grid is the unit vector at its node.
    std::vector<std::vector<double>> basis_f(map.basis_nodes.size());
    for (std::size_t j = 0; j < map.basis_nodes.size(); ++j) {
        basis_f[j].assign(grid.size(), 0.0);
        basis_f[j][map.basis_nodes[j]] = 1.0;
    }
    SolveOptions sopt;
    sopt.scheme = opt.scheme;
    sopt.ex = opt.ex;
    const std::vector<std::vector<double>> snapshots =
        solve_forward_batch(eq, Lop, basis_f, R, tg, sopt);

    map.A.resize(interior, opt.basis_size);
    for (int j = 0; j < opt.basis_size; ++j)
        for (int i = 0; i < interior; ++i) map.A(i, j) = snapshots[j][map.obs_nodes[i]];

    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(map.A);
    const auto& sv = svd.singularValues();
    map.condition_number = sv(sv.size() - 1) > 0.0
                               ? sv(0) / sv(sv.size() - 1)
                               : std::numeric_limits<double>::infinity();
    return map;
}

std::vector<double> restrict_injection(const std::vector<double>& fine_row, int coarse_n_cells) {
    if (static_cast<int>(fine_row.size()) != 2 * coarse_n_cells + 1)
        throw ValidationError("injection restriction expects a snapshot on the twice-refined grid");
    std::vector<double> out(coarse_n_cells - 1);
    for (int i = 1; i < coarse_n_cells; ++i) out[i - 1] = fine_row[2 * i];
    return out;
}

std::vector<double> expand_to_grid(const ObservationMap& map, const std::vector<double>& coeffs) {
    if (coeffs.size() != map.basis_nodes.size())
        throw ValidationError("coefficient vector does not match the basis");
    std::vector<double> full(map.grid.size(), 0.0);
    for (std::size_t j = 0; j < coeffs.size(); ++j) full[map.basis_nodes[j]] = coeffs[j];
    return full;
}

ReconstructionResult reconstruct(const ObservationMap& map, const std::vector<double>& data,
                                 const ReconstructOptions& opt) {
    const int n_obs = static_cast<int>(map.A.rows());
    const int nb = static_cast<int>(map.A.cols());
    if (static_cast<int>(data.size()) != n_obs)
        throw ValidationError("reconstruct: data length does not match the observation nodes");
    const Eigen::VectorXd d = to_eigen(data);
    const Eigen::MatrixXd AtA = map.A.transpose() * map.A;
    const Eigen::VectorXd Atd = map.A.transpose() * d;
    const Eigen::MatrixXd P = h2_penalty(nb, map.h());

    ReconstructionResult res;

    if (opt.method == Regularizer::landweber) {
        // Gradient iteration on ||A c - d||^2 with the convergence-safe step
        // 1 / ||A^T A||; parameter = step count or the discrepancy stop.
        const double step = 1.0 / spectral_norm_sym(AtA);
        const double target = opt.tau * opt.noise_level;
        const int cap = opt.landweber_iters > 0 ? opt.landweber_iters : 100000;
        if (opt.landweber_iters <= 0 && !(opt.noise_level > 0.0))
            throw ValidationError(
                "landweber: automatic stopping needs a positive noise level (or a step count)");
        Eigen::VectorXd c = Eigen::VectorXd::Zero(nb);
        int it = 0;
        double misfit = (map.A * c - d).norm();
        res.discrepancy_attained = opt.landweber_iters > 0;
        while (it < cap) {
            if (opt.landweber_iters <= 0 && misfit <= target) {
                res.discrepancy_attained = true;
                break;
            }
            c += step * (Atd - AtA * c);
            ++it;
            misfit = (map.A * c - d).norm();
        }
        res.coeffs = to_std(c);
        res.iterations = it;
        res.misfit = misfit;
        res.seminorm = std::sqrt(c.dot(P * c));
        res.normal_residual = 0.0;
        return res;
    }

    // Tikhonov path.  The penalty is rescaled by the spectral-norm ratio so
    // alpha mixes two operators of comparable size; without this the raw
    // second-difference form (norm ~ 1/h^4) swamps A^T A at any usable alpha.
    const double scale = spectral_norm_sym(AtA) / spectral_norm_sym(P);
    auto solve_for = [&](double alpha) -> Eigen::VectorXd {
        const Eigen::MatrixXd M = AtA + (alpha * scale) * P;
        const Eigen::LLT<Eigen::MatrixXd> llt(M);
        if (llt.info() != Eigen::Success)
            throw NumericalError("tikhonov normal equations not positive definite at alpha = " +
                                 std::to_string(alpha));
        return llt.solve(Atd);
    };

    double alpha = opt.alpha;
    if (alpha == 0.0)
        throw ValidationError("tikhonov: alpha must be positive (negative selects Morozov)");
    if (alpha < 0.0) {
        if (!(opt.noise_level > 0.0))
            throw ValidationError("tikhonov: Morozov selection needs a positive noise level");
        const double target = opt.tau * opt.noise_level;
        auto misfit_at = [&](double a) { return (map.A * solve_for(a) - d).norm(); };
        double lo = opt.morozov_lo, hi = opt.morozov_hi;
        if (misfit_at(lo) > target) {
            alpha = lo;  // even the least regularization cannot reach the target
            res.discrepancy_attained = false;
        } else if (misfit_at(hi) < target) {
            alpha = hi;  // the most regularization still undershoots the target
            res.discrepancy_attained = false;
        } else {
            for (int it = 0; it < 60; ++it) {
                const double mid = std::sqrt(lo * hi);
                if (misfit_at(mid) < target)
                    lo = mid;
                else
                    hi = mid;
            }
            alpha = std::sqrt(lo * hi);
            res.discrepancy_attained = true;
        }
    }

    const Eigen::VectorXd c = solve_for(alpha);
    const Eigen::MatrixXd M = AtA + (alpha * scale) * P;
    const double rhs_norm = Atd.norm();
    res.coeffs = to_std(c);
    res.alpha = alpha;
    res.misfit = (map.A * c - d).norm();
    res.seminorm = std::sqrt(c.dot(P * c));
    res.normal_residual =
        rhs_norm > 0.0 ? (M * c - Atd).norm() / rhs_norm : (M * c - Atd).norm();
    return res;
}

StabilityReport stability_experiment(const ObservationMap& map,
                                     const std::vector<double>& f_true_coeffs,
                                     const std::vector<double>& clean_data,
                                     const StabilityOptions& opt) {
    const int n_obs = static_cast<int>(map.A.rows());
    const int nb = static_cast<int>(map.A.cols());
    if (static_cast<int>(f_true_coeffs.size()) != nb)
        throw ValidationError("stability experiment: f_true length does not match the basis");
    if (static_cast<int>(clean_data.size()) != n_obs)
        throw ValidationError("stability experiment: data length does not match the map");
    if (opt.noise_levels.size() < 3)
        throw ValidationError("stability experiment: need at least 3 noise levels for the fit");
    for (std::size_t k = 0; k < opt.noise_levels.size(); ++k) {
        if (!(opt.noise_levels[k] > 0.0))
            throw ValidationError("stability experiment: noise levels must be positive");
        if (k > 0 && !(opt.noise_levels[k] < opt.noise_levels[k - 1]))
            throw ValidationError("stability experiment: noise levels must be strictly descending");
    }
    if (opt.trials < 1) throw ValidationError("stability experiment: trials must be >= 1");
    const double h = map.h();
    const double f_h2 = sobolev_norm(f_true_coeffs, h, 2);
    if (!(f_h2 <= opt.prior_bound_M))
        throw ValidationError("stability experiment: ||f_true||_H2 = " + std::to_string(f_h2) +
                              " exceeds the prior bound M = " + std::to_string(opt.prior_bound_M));

    const int n_levels = static_cast<int>(opt.noise_levels.size());
    StabilityReport rep;
    rep.prior_bound_M = opt.prior_bound_M;
    rep.rows.assign(static_cast<std::size_t>(n_levels) * opt.trials, StabilityRow{});

    // Trials are independent: the generator is split per (trial, level), so
    // the schedule cannot change the draws.
    par_for(opt.ex, static_cast<std::ptrdiff_t>(rep.rows.size()), [&](std::ptrdiff_t m) {
        const int k = static_cast<int>(m) / opt.trials;
        const int trial = static_cast<int>(m) % opt.trials;
        const double level = opt.noise_levels[k];
        SplitMix64 rng = split_stream(opt.seed, static_cast<std::uint64_t>(trial),
                                      static_cast<std::uint64_t>(k));
        std::vector<double> eta(n_obs);
        for (double& e : eta) e = rng.next_gaussian();
        const double nh4 = sobolev_norm(eta, h, 4);
        const double rescale = level / nh4;
        for (double& e : eta) e *= rescale;

        std::vector<double> noisy(clean_data);
        double eps_sq = 0.0;
        for (int i = 0; i < n_obs; ++i) {
            noisy[i] += eta[i];
            eps_sq += eta[i] * eta[i];
        }
        ReconstructOptions ropt;
        ropt.alpha = -1.0;
        ropt.noise_level = std::sqrt(eps_sq);
        ropt.tau = opt.tau;
        ropt.ex = Exec::serial;  // inner work; the trial loop carries the parallelism
        const ReconstructionResult rr = reconstruct(map, noisy, ropt);

        StabilityRow& row = rep.rows[m];
        row.noise_level = level;
        row.trial = trial;
        row.data_norm_h4 = sobolev_norm(eta, h, 4);
        row.err_h2_omega = relative_h2_error(rr.coeffs, f_true_coeffs, h);
        row.alpha = rr.alpha;
    });

    // Running and final log-log fits (error against the perturbation level).
    std::vector<double> levels, errs;
    int distinct = 0;
    for (std::size_t m = 0; m < rep.rows.size(); ++m) {
        StabilityRow& row = rep.rows[m];
        if (levels.empty() || row.noise_level != levels.back()) ++distinct;
        levels.push_back(row.noise_level);
        errs.push_back(row.err_h2_omega);
        row.kappa_hat_running = distinct >= 3 ? fit_loglog(levels, errs).slope
                                              : std::numeric_limits<double>::quiet_NaN();
    }
    const LogLogFit fit = fit_loglog(levels, errs);
    rep.kappa_hat = fit.slope;
    rep.r_squared = fit.r_squared;
    rep.c_hat = fit.c_sup;
    return rep;
}

}  // namespace fraclab
