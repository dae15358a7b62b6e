#pragma once

#include <variant>

#include <Eigen/Dense>

#include "spectop/errors.hpp"

namespace spectop {

/// Mode-separable Gaussian mutual-information source:
///   T_l = mu2 * w_l / (2 (sigma2 + h_l)).
struct GaussianMiSource {
    double mu2 = 2.0;
    double sigma2 = 1.0;
    Eigen::VectorXd weights; // w_l >= 0, one per mode

    static GaussianMiSource uniform(double mu2, double sigma2, int modes) {
        return {mu2, sigma2, Eigen::VectorXd::Ones(modes)};
    }
};

/// Source-free limit: T_l = 0.
struct VacuumSource {};

/// Thermal restriction: T_l = lambda_l / kT - 1 (independent of h).
struct BoltzmannSource {
    double kT = 1.0;
    double Z = 1.0;
};

using SourceModel = std::variant<GaussianMiSource, VacuumSource, BoltzmannSource>;

/// T_l for every mode at kernel state h.
Eigen::VectorXd source_eval(const SourceModel& model, const Eigen::VectorXd& h,
                            const Eigen::VectorXd& lambdas);

/// Diagonal of the source Jacobian, dT_l/dh_l at h. All shipped sources are
/// mode-separable so the off-diagonal part vanishes identically.
Eigen::VectorXd source_deriv_diag(const SourceModel& model, const Eigen::VectorXd& h);

/// Geometric term R_l = -log(h_l / h0_l) - 1. Throws DomainError on
/// nonpositive input.
Eigen::VectorXd geometric_term(const Eigen::VectorXd& h, const Eigen::VectorXd& h0);

/// Diagonal Fisher information I_ll = h_l^{-2} / 2.
Eigen::VectorXd fisher_metric_diag(const Eigen::VectorXd& h);

struct FixedPointOptions {
    double tol = 1e-14;  // infinity-norm step tolerance
    int max_iter = 500;
    double damping = 1.0; // 1.0 = plain Picard iteration
};

/// Converged (or best-effort) solution of h_l = h0_l exp(-1 - T_l[h]).
struct FixedPointReport {
    Eigen::VectorXd h_star;
    Eigen::VectorXd h0;
    Eigen::VectorXd lambdas;
    int iterations = 0;
    double residual_inf = 0.0; // max_l |R_l[h*] - T_l[h*]|
    bool converged = false;
};

/// Picard iteration h <- h0 * exp(-1 - T[h]) until the step infinity-norm
/// drops to tol. Hitting max_iter returns converged=false with the best
/// iterate (no exception). Iterates are floored at the smallest positive
/// normal double so extreme source terms cannot underflow the kernel to zero.
FixedPointReport fixed_point_solve(const Eigen::VectorXd& h0, const SourceModel& model,
                                   const Eigen::VectorXd& lambdas,
                                   const FixedPointOptions& options = {});

/// Jacobian of the fixed-point map at h*: DF_lm = -h*_l dT_l/dh_m.
/// Diagonal for mode-separable sources.
struct JacobianReport {
    Eigen::VectorXd df_diag;
    double trace = 0.0;
    double spectral_radius = 0.0;
    double det_abs = 0.0;
};

JacobianReport jacobian_analysis(const FixedPointReport& fp, const SourceModel& model);

/// Diagonal Hessian of the action at h*, H_mm = -1/h*_m - dT_m/dh_m, and the
/// stability gap = min_m(-H_mm).
struct HessianReport {
    Eigen::VectorXd h_diag;
    double gap = 0.0;
};

HessianReport hessian_and_gap(const FixedPointReport& fp, const SourceModel& model);

/// Conservation identity residual D_m: the column sum of the Jacobian of
/// R - T at h*. For the shipped mode-separable sources this reduces to the
/// closed forms
///   GaussianMI: D_m = -1/h*_m + mu2 w_m / (2 (sigma2 + h*_m)^2)
///   Vacuum:     D_m = -1/h*_m
///   Boltzmann:  D_m = -1/h*_m
/// and equals H_mm.
Eigen::VectorXd conservation_residual(const FixedPointReport& fp, const SourceModel& model);

/// Aggregate leakage surrogate over the first k_t transmitted modes:
/// D_t = sum_{m < k_t} |D_m|.
double leakage_diagnostic(const FixedPointReport& fp, const SourceModel& model, int k_t);

/// Everything above in one record.
struct StabilityReport {
    double trace_df = 0.0;
    double spectral_radius = 0.0;
    double det_abs = 0.0;
    Eigen::VectorXd h_diag;
    double gap = 0.0;
    Eigen::VectorXd d; // D_m
    double d_t = 0.0;  // leakage over all modes
};

StabilityReport analyze_stability(const FixedPointReport& fp, const SourceModel& model);

} // namespace spectop
