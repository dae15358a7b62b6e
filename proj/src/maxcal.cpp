#include "spectop/maxcal.hpp"

#include <cmath>

namespace spectop {

namespace {

void require_positive(const Eigen::VectorXd& v, const char* what) {
    for (int i = 0; i < v.size(); ++i)
        if (!(v(i) > 0.0)) throw DomainError(std::string(what) + " must be positive");
}

void validate(const SourceModel& model, int modes) {
    if (const auto* g = std::get_if<GaussianMiSource>(&model)) {
        if (!(g->sigma2 > 0.0)) throw ParameterError("sigma2 must be positive");
        if (g->mu2 < 0.0) throw ParameterError("mu2 must be nonnegative");
        if (g->weights.size() != modes)
            throw ParameterError("weight vector length must match mode count");
        if ((g->weights.array() < 0.0).any())
            throw ParameterError("weights must be nonnegative");
    } else if (const auto* b = std::get_if<BoltzmannSource>(&model)) {
        if (!(b->kT > 0.0)) throw ParameterError("kT must be positive");
        if (!(b->Z > 0.0)) throw ParameterError("Z must be positive");
    }
}

} // namespace

Eigen::VectorXd source_eval(const SourceModel& model, const Eigen::VectorXd& h,
                            const Eigen::VectorXd& lambdas) {
    validate(model, static_cast<int>(h.size()));
    return std::visit(
        [&](const auto& m) -> Eigen::VectorXd {
            using M = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<M, GaussianMiSource>) {
                require_positive(h, "kernel");
                return (m.mu2 * m.weights.array() / (2.0 * (m.sigma2 + h.array()))).matrix();
            } else if constexpr (std::is_same_v<M, VacuumSource>) {
                return Eigen::VectorXd::Zero(h.size());
            } else {
                if (lambdas.size() != h.size())
                    throw ParameterError("eigenvalue vector length must match mode count");
                return (lambdas.array() / m.kT - 1.0).matrix();
            }
        },
        model);
}

Eigen::VectorXd source_deriv_diag(const SourceModel& model, const Eigen::VectorXd& h) {
    validate(model, static_cast<int>(h.size()));
    if (const auto* g = std::get_if<GaussianMiSource>(&model)) {
        require_positive(h, "kernel");
        return (-g->mu2 * g->weights.array() /
                (2.0 * (g->sigma2 + h.array()).square()))
            .matrix();
    }
    return Eigen::VectorXd::Zero(h.size()); // Vacuum and Boltzmann: h-independent
}

Eigen::VectorXd geometric_term(const Eigen::VectorXd& h, const Eigen::VectorXd& h0) {
    if (h.size() != h0.size()) throw ParameterError("kernel and prior lengths differ");
    require_positive(h, "kernel");
    require_positive(h0, "prior");
    return (-(h.array() / h0.array()).log() - 1.0).matrix();
}

Eigen::VectorXd fisher_metric_diag(const Eigen::VectorXd& h) {
    require_positive(h, "kernel");
    return (0.5 / h.array().square()).matrix();
}

FixedPointReport fixed_point_solve(const Eigen::VectorXd& h0, const SourceModel& model,
                                   const Eigen::VectorXd& lambdas,
                                   const FixedPointOptions& options) {
    if (!(options.tol > 0.0)) throw ParameterError("tolerance must be positive");
    if (!(options.damping > 0.0) || options.damping > 1.0)
        throw ParameterError("damping must lie in (0, 1]");
    require_positive(h0, "prior");
    validate(model, static_cast<int>(h0.size()));

    FixedPointReport report;
    report.h0 = h0;
    report.lambdas = lambdas;

    // keep the iterate strictly positive even when the source term is so large
    // that exp(-1 - T) underflows
    constexpr double kKernelFloor = std::numeric_limits<double>::min();

    Eigen::VectorXd h = h0;
    Eigen::VectorXd next(h0.size());
    for (int iter = 1; iter <= options.max_iter; ++iter) {
        const Eigen::VectorXd t = source_eval(model, h, lambdas);
        for (int l = 0; l < h0.size(); ++l)
            next(l) = std::max(h0(l) * std::exp(-1.0 - t(l)), kKernelFloor);
        const Eigen::VectorXd stepped =
            options.damping == 1.0
                ? next
                : ((1.0 - options.damping) * h + options.damping * next).eval();
        const double step = (stepped - h).cwiseAbs().maxCoeff();
        h = stepped;
        report.iterations = iter;
        if (step <= options.tol) {
            report.converged = true;
            break;
        }
    }
    report.h_star = h;
    report.residual_inf = (geometric_term(h, h0) - source_eval(model, h, lambdas))
                              .cwiseAbs()
                              .maxCoeff();
    return report;
}

JacobianReport jacobian_analysis(const FixedPointReport& fp, const SourceModel& model) {
    JacobianReport jac;
    jac.df_diag = (-fp.h_star.array() * source_deriv_diag(model, fp.h_star).array()).matrix();
    jac.trace = jac.df_diag.sum();
    jac.spectral_radius = jac.df_diag.cwiseAbs().maxCoeff();
    jac.det_abs = std::abs(jac.df_diag.prod());
    return jac;
}

HessianReport hessian_and_gap(const FixedPointReport& fp, const SourceModel& model) {
    HessianReport hess;
    hess.h_diag = (-1.0 / fp.h_star.array() - source_deriv_diag(model, fp.h_star).array())
                      .matrix();
    hess.gap = (-hess.h_diag).minCoeff();
    return hess;
}

Eigen::VectorXd conservation_residual(const FixedPointReport& fp, const SourceModel& model) {
    const Eigen::VectorXd& h = fp.h_star;
    require_positive(h, "kernel");
    // column sums of d(R - T)/dh; closed forms per source variant
    return std::visit(
        [&](const auto& m) -> Eigen::VectorXd {
            using M = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<M, GaussianMiSource>) {
                return (-1.0 / h.array() +
                        m.mu2 * m.weights.array() / (2.0 * (m.sigma2 + h.array()).square()))
                    .matrix();
            } else {
                return (-1.0 / h.array()).matrix();
            }
        },
        model);
}

double leakage_diagnostic(const FixedPointReport& fp, const SourceModel& model, int k_t) {
    if (k_t < 0 || k_t > fp.h_star.size())
        throw ParameterError("transmitted mode count out of range");
    if (k_t == 0) return 0.0;
    return conservation_residual(fp, model).head(k_t).cwiseAbs().sum();
}

StabilityReport analyze_stability(const FixedPointReport& fp, const SourceModel& model) {
    StabilityReport report;
    const JacobianReport jac = jacobian_analysis(fp, model);
    const HessianReport hess = hessian_and_gap(fp, model);
    report.trace_df = jac.trace;
    report.spectral_radius = jac.spectral_radius;
    report.det_abs = jac.det_abs;
    report.h_diag = hess.h_diag;
    report.gap = hess.gap;
    report.d = conservation_residual(fp, model);
    report.d_t = leakage_diagnostic(fp, model, static_cast<int>(fp.h_star.size()));
    return report;
}

} // namespace spectop
