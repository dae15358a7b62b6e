#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "spectop/maxcal.hpp"
#include "spectop/spectral.hpp"
#include "spectop/topology.hpp"
#include "test_util.hpp"

using namespace spectop;

namespace {

Eigen::VectorXd p8_lambdas() {
    return eigendecompose(hodge_laplacians(make_path(8)).l0, 8).eigenvalues;
}

FixedPointReport manual_report(double h, double h0, int modes = 1) {
    FixedPointReport fp;
    fp.h_star = Eigen::VectorXd::Constant(modes, h);
    fp.h0 = Eigen::VectorXd::Constant(modes, h0);
    fp.lambdas = Eigen::VectorXd::Zero(modes);
    fp.converged = true;
    return fp;
}

} // namespace

TEST_CASE("source_eval: closed forms") {
    const Eigen::VectorXd h = Eigen::VectorXd::Constant(1, 0.1547);
    const Eigen::VectorXd lam = Eigen::VectorXd::Zero(1);

    const SourceModel gmi = GaussianMiSource::uniform(2.0, 1.0, 1);
    CHECK(source_eval(gmi, h, lam)(0) == doctest::Approx(1.0 / 1.1547).epsilon(1e-12));

    const SourceModel vacuum = VacuumSource{};
    CHECK(source_eval(vacuum, h, lam)(0) == 0.0);

    const SourceModel boltz = BoltzmannSource{1.0, 1.0};
    CHECK(source_eval(boltz, h, Eigen::VectorXd::Ones(1))(0) == 0.0);
}

TEST_CASE("geometric_term: fixed values and domain errors") {
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(3);
    CHECK(geometric_term(ones / M_E, ones).cwiseAbs().maxCoeff() <= 1e-15);
    CHECK(geometric_term(ones, ones)(0) == -1.0);

    const Eigen::VectorXd h = Eigen::VectorXd::Constant(1, 0.1547);
    CHECK(geometric_term(h, Eigen::VectorXd::Ones(1))(0) ==
          doctest::Approx(-std::log(0.1547) - 1.0).epsilon(1e-12));

    Eigen::VectorXd bad(1);
    bad << -0.5;
    CHECK_THROWS_AS(geometric_term(bad, Eigen::VectorXd::Ones(1)), DomainError);
    CHECK_THROWS_AS(geometric_term(Eigen::VectorXd::Ones(1), Eigen::VectorXd::Zero(1)),
                    DomainError);
}

TEST_CASE("fixed_point_solve: eight-mode verification setting") {
    const SourceModel model = GaussianMiSource::uniform(2.0, 1.0, 8);
    const FixedPointReport fp =
        fixed_point_solve(Eigen::VectorXd::Ones(8), model, p8_lambdas());
    CHECK(fp.converged);
    CHECK(fp.residual_inf <= 1e-12);

    const double oracle = testutil::bisect_uniform_fixed_point();
    for (int l = 0; l < 8; ++l)
        CHECK(std::abs(fp.h_star(l) - oracle) <= 1e-12);
    CHECK(std::abs(oracle - 0.1547) <= 5e-5);
}

TEST_CASE("fixed_point_solve: vacuum reaches h0/e in one step, exactly") {
    const Eigen::VectorXd h0 = Eigen::VectorXd::Constant(5, 0.8);
    FixedPointOptions one;
    one.max_iter = 1;
    const FixedPointReport first = fixed_point_solve(h0, VacuumSource{}, h0, one);
    for (int l = 0; l < 5; ++l) CHECK(first.h_star(l) == h0(l) * std::exp(-1.0));

    const FixedPointReport full = fixed_point_solve(h0, VacuumSource{}, h0);
    CHECK(full.converged);
    CHECK(full.iterations <= 2);
    for (int l = 0; l < 5; ++l) CHECK(full.h_star(l) == h0(l) * std::exp(-1.0));
}

TEST_CASE("fixed_point_solve: thermal restriction reproduces the Gibbs weights") {
    const double kT = 0.7, z = 3.0;
    Eigen::VectorXd lambdas(6);
    lambdas << 0.0, 0.3, 0.9, 1.4, 2.2, 4.0;
    const FixedPointReport fp = fixed_point_solve(
        Eigen::VectorXd::Constant(6, 1.0 / z), BoltzmannSource{kT, z}, lambdas);
    CHECK(fp.converged);
    for (int l = 0; l < 6; ++l)
        CHECK(std::abs(fp.h_star(l) - std::exp(-lambdas(l) / kT) / z) <= 1e-12);
}

TEST_CASE("fixed_point_solve: iteration cap leaves converged=false, no throw") {
    FixedPointOptions tight;
    tight.max_iter = 2;
    tight.tol = 1e-16;
    const SourceModel model = GaussianMiSource::uniform(2.0, 1.0, 4);
    const FixedPointReport fp =
        fixed_point_solve(Eigen::VectorXd::Ones(4), model, Eigen::VectorXd::Zero(4), tight);
    CHECK_FALSE(fp.converged);
    CHECK(fp.h_star.size() == 4);
    CHECK(fp.iterations == 2);
}

TEST_CASE("fixed_point_solve: damped iteration reaches the same fixed point") {
    const SourceModel model = GaussianMiSource::uniform(2.0, 1.0, 8);
    const FixedPointReport plain =
        fixed_point_solve(Eigen::VectorXd::Ones(8), model, p8_lambdas());
    FixedPointOptions damped;
    damped.damping = 0.5;
    damped.max_iter = 2000;
    const FixedPointReport relaxed =
        fixed_point_solve(Eigen::VectorXd::Ones(8), model, p8_lambdas(), damped);
    CHECK(relaxed.converged);
    CHECK((relaxed.h_star - plain.h_star).cwiseAbs().maxCoeff() <= 1e-12);

    FixedPointOptions bad;
    bad.damping = 0.0;
    CHECK_THROWS_AS(fixed_point_solve(Eigen::VectorXd::Ones(2), VacuumSource{},
                                      Eigen::VectorXd::Zero(2), bad),
                    ParameterError);
}

TEST_CASE("fixed_point_solve: extreme source terms keep the kernel positive") {
    GaussianMiSource g;
    g.mu2 = 2.0;
    g.sigma2 = 1.0;
    g.weights = Eigen::VectorXd::Constant(3, 1e6); // exp(-1 - T) underflows
    const SourceModel model = g;
    const FixedPointReport fp =
        fixed_point_solve(Eigen::VectorXd::Ones(3), model, Eigen::VectorXd::Zero(3));
    CHECK(fp.converged);
    CHECK(fp.h_star.minCoeff() > 0.0);
    CHECK(std::isfinite(conservation_residual(fp, model).cwiseAbs().maxCoeff()));
    CHECK(std::isfinite(spectral_entropy(fp.h_star)));
}

TEST_CASE("fixed_point_solve: parameter validation") {
    FixedPointOptions bad;
    bad.tol = 0.0;
    CHECK_THROWS_AS(fixed_point_solve(Eigen::VectorXd::Ones(2), VacuumSource{},
                                      Eigen::VectorXd::Zero(2), bad),
                    ParameterError);
    const SourceModel mismatched = GaussianMiSource::uniform(2.0, 1.0, 3);
    CHECK_THROWS_AS(fixed_point_solve(Eigen::VectorXd::Ones(2), mismatched,
                                      Eigen::VectorXd::Zero(2)),
                    ParameterError);
}

TEST_CASE("jacobian_analysis: spectral radius and conservative limit") {
    const SourceModel model = GaussianMiSource::uniform(2.0, 1.0, 8);
    const FixedPointReport fp =
        fixed_point_solve(Eigen::VectorXd::Ones(8), model, p8_lambdas());
    const JacobianReport jac = jacobian_analysis(fp, model);
    CHECK(std::abs(jac.spectral_radius - 0.116) <= 1e-3);
    CHECK(jac.trace >= 0.90);
    CHECK(jac.trace <= 0.93);
    CHECK(jac.det_abs < 1.0);

    const SourceModel off = GaussianMiSource::uniform(0.0, 1.0, 8);
    const FixedPointReport fp0 =
        fixed_point_solve(Eigen::VectorXd::Ones(8), off, p8_lambdas());
    CHECK(jacobian_analysis(fp0, off).trace == 0.0);
}

TEST_CASE("jacobian_analysis: single-mode closed form") {
    const FixedPointReport fp = manual_report(0.1547, 1.0);
    const SourceModel model = GaussianMiSource::uniform(2.0, 1.0, 1);
    const double expected = 2.0 * 0.1547 / (2.0 * 1.1547 * 1.1547);
    CHECK(jacobian_analysis(fp, model).df_diag(0) ==
          doctest::Approx(expected).epsilon(1e-12));
    CHECK(expected == doctest::Approx(0.11603).epsilon(1e-4));
}

TEST_CASE("hessian_and_gap: stability margin on the verification setting") {
    const SourceModel model = GaussianMiSource::uniform(2.0, 1.0, 8);
    const FixedPointReport fp =
        fixed_point_solve(Eigen::VectorXd::Ones(8), model, p8_lambdas());
    const HessianReport hess = hessian_and_gap(fp, model);
    for (int m = 0; m < 8; ++m)
        CHECK(hess.h_diag(m) == doctest::Approx(-5.712).epsilon(2e-4));
    CHECK(std::abs(hess.gap - 5.71) <= 1e-2);
}

TEST_CASE("hessian_and_gap: vacuum margin is e; marginal source closes it") {
    const FixedPointReport vac = fixed_point_solve(Eigen::VectorXd::Ones(3), VacuumSource{},
                                                   Eigen::VectorXd::Zero(3));
    const HessianReport hv = hessian_and_gap(vac, VacuumSource{});
    CHECK(std::abs(hv.h_diag(0) + M_E) <= 1e-12);

    // dT/dh = -1/h* at h* = 1 needs mu2 = 2 (sigma2 + 1)^2: the definitional boundary
    const FixedPointReport marginal = manual_report(1.0, 1.0);
    const SourceModel critical = GaussianMiSource::uniform(8.0, 1.0, 1);
    const HessianReport hm = hessian_and_gap(marginal, critical);
    CHECK(hm.h_diag(0) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(hm.gap == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("conservation_residual: identity D_m = H_mm to machine precision") {
    const SourceModel model = GaussianMiSource::uniform(2.0, 1.0, 8);
    const FixedPointReport fp =
        fixed_point_solve(Eigen::VectorXd::Ones(8), model, p8_lambdas());
    const Eigen::VectorXd d = conservation_residual(fp, model);
    const Eigen::VectorXd hd = hessian_and_gap(fp, model).h_diag;
    CHECK((d - hd).cwiseAbs().maxCoeff() <= 1e-12);
    for (int m = 0; m < 8; ++m) CHECK(d(m) == doctest::Approx(-5.712).epsilon(2e-4));

    const FixedPointReport vac = fixed_point_solve(Eigen::VectorXd::Ones(4), VacuumSource{},
                                                   Eigen::VectorXd::Zero(4));
    const Eigen::VectorXd dv = conservation_residual(vac, VacuumSource{});
    CHECK((dv.array() + M_E).abs().maxCoeff() <= 1e-12);
}

TEST_CASE("conservation identity holds across random mode-separable sources") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> unit(0.2, 3.0);
    for (int trial = 0; trial < 60; ++trial) {
        const int n = 1 + static_cast<int>(rng() % 6);
        GaussianMiSource g;
        g.mu2 = unit(rng);
        g.sigma2 = unit(rng);
        g.weights = testutil::random_vector(rng, n).array().abs() + 0.05;
        const SourceModel model = g;
        const Eigen::VectorXd h0 = testutil::random_vector(rng, n).array().abs() + 0.2;
        const FixedPointReport fp =
            fixed_point_solve(h0, model, Eigen::VectorXd::Zero(n));
        REQUIRE(fp.converged);
        const Eigen::VectorXd d = conservation_residual(fp, model);
        const Eigen::VectorXd hd = hessian_and_gap(fp, model).h_diag;
        CHECK((d - hd).cwiseAbs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("source derivative matches central finite differences") {
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> unit(0.3, 2.5);
    for (int trial = 0; trial < 40; ++trial) {
        GaussianMiSource g;
        g.mu2 = unit(rng);
        g.sigma2 = unit(rng);
        g.weights = Eigen::VectorXd::Constant(1, unit(rng));
        const SourceModel model = g;
        const double h = unit(rng);
        const double eps = 1e-6 * h;
        Eigen::VectorXd hp(1), hm(1), hv(1);
        hp << h + eps;
        hm << h - eps;
        hv << h;
        const Eigen::VectorXd lam = Eigen::VectorXd::Zero(1);
        const double numeric =
            (source_eval(model, hp, lam)(0) - source_eval(model, hm, lam)(0)) / (2 * eps);
        const double closed = source_deriv_diag(model, hv)(0);
        CHECK(std::abs(numeric - closed) <= 1e-6 * std::max(1.0, std::abs(closed)));
    }
}

TEST_CASE("volume expansion: positive trace whenever the source is active") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> unit(0.1, 2.0);
    for (int trial = 0; trial < 30; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 5);
        GaussianMiSource g;
        g.mu2 = unit(rng);
        g.sigma2 = unit(rng);
        g.weights = testutil::random_vector(rng, n).array().abs();
        g.weights(0) += 0.5; // at least one active mode
        const SourceModel model = g;
        const FixedPointReport fp = fixed_point_solve(Eigen::VectorXd::Ones(n), model,
                                                      Eigen::VectorXd::Zero(n));
        CHECK(jacobian_analysis(fp, model).trace > 0.0);
    }
}

TEST_CASE("below the discriminant bound the deficit stays away from zero") {
    // mu2 w < 8 sigma2 means D_m = 0 has no real solution
    for (double mu2 : {0.5, 1.0, 2.0, 4.0, 7.0}) {
        for (double sigma2 : {1.0, 1.5, 2.5}) {
            if (mu2 >= 8.0 * sigma2) continue;
            const SourceModel model = GaussianMiSource{mu2, sigma2, Eigen::VectorXd::Ones(1)};
            const FixedPointReport fp = fixed_point_solve(Eigen::VectorXd::Ones(1), model,
                                                          Eigen::VectorXd::Zero(1));
            REQUIRE(fp.converged);
            CHECK(conservation_residual(fp, model).cwiseAbs().minCoeff() > 1e-3);
        }
    }
}

TEST_CASE("fisher_metric_diag: closed values") {
    Eigen::VectorXd h(3);
    h << 1.0, 0.5, 0.1547;
    const Eigen::VectorXd fisher = fisher_metric_diag(h);
    CHECK(fisher(0) == 0.5);
    CHECK(fisher(1) == 2.0);
    CHECK(fisher(2) == doctest::Approx(0.5 / (0.1547 * 0.1547)).epsilon(1e-12));
    CHECK(fisher(2) == doctest::Approx(20.89).epsilon(1e-3));
    CHECK_THROWS_AS(fisher_metric_diag(Eigen::VectorXd::Zero(1)), DomainError);
}

TEST_CASE("leakage_diagnostic: prefix sums of the deficit") {
    const SourceModel model = GaussianMiSource::uniform(2.0, 1.0, 8);
    const FixedPointReport fp =
        fixed_point_solve(Eigen::VectorXd::Ones(8), model, p8_lambdas());
    const double full = leakage_diagnostic(fp, model, 8);
    CHECK(full == doctest::Approx(8 * 5.7124).epsilon(1e-3));
    CHECK(leakage_diagnostic(fp, model, 0) == 0.0);
    CHECK_THROWS_AS(leakage_diagnostic(fp, model, 9), ParameterError);

    // marginally stable source: per-mode residual identically zero
    const FixedPointReport marginal = manual_report(1.0, 1.0);
    const SourceModel critical = GaussianMiSource::uniform(8.0, 1.0, 1);
    CHECK(leakage_diagnostic(marginal, critical, 1) <= 1e-14);
}
