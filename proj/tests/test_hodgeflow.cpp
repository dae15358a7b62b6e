#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "spectop/hodgeflow.hpp"
#include "spectop/spectral.hpp"
#include "spectop/topology.hpp"
#include "test_util.hpp"

using namespace spectop;

namespace {

SurfaceComplex hollow_triangle() {
    return build_complex({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}, {},
                         {{{0, 1}}, {{0, 2}}, {{1, 2}}});
}

SurfaceComplex filled_triangle() {
    return build_complex({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}, {{{0, 1, 2}}});
}

// circulation around 0 -> 1 -> 2 -> 0 in canonical edge coordinates
Eigen::VectorXd triangle_circulation(const SurfaceComplex& c) {
    Eigen::VectorXd f = Eigen::VectorXd::Zero(3);
    f(c.edge_index(0, 1)) = 1.0;  // 0 -> 1 along (0,1)
    f(c.edge_index(1, 2)) = 1.0;  // 1 -> 2 along (1,2)
    f(c.edge_index(0, 2)) = -1.0; // 2 -> 0 against (0,2)
    return f;
}

} // namespace

TEST_CASE("hodge_decompose: pure gradient input stays pure") {
    std::mt19937_64 rng(3);
    const SurfaceComplex grid = make_grid(5, 7);
    const Eigen::VectorXd psi0 = testutil::random_vector(rng, grid.vertex_count());
    const Eigen::VectorXd f = SpMat(grid.b1.transpose()) * psi0;
    const HodgeSplit split = hodge_decompose(grid, f);
    const double scale = f.squaredNorm();
    CHECK(split.e_curl <= 1e-10 * scale);
    CHECK(split.e_harm <= 1e-10 * scale);
    CHECK((split.gradient - f).norm() <= 1e-7 * f.norm());
}

TEST_CASE("hodge_decompose: hollow cycle is harmonic, filled cycle is curl") {
    const SurfaceComplex hollow = hollow_triangle();
    const Eigen::VectorXd f_hollow = triangle_circulation(hollow);
    const HodgeSplit s1 = hodge_decompose(hollow, f_hollow);
    CHECK(s1.e_harm == doctest::Approx(3.0).epsilon(1e-9));
    CHECK(s1.e_grad <= 1e-18);
    CHECK(s1.e_curl == 0.0);

    const SurfaceComplex filled = filled_triangle();
    const Eigen::VectorXd f_filled = triangle_circulation(filled);
    const HodgeSplit s2 = hodge_decompose(filled, f_filled);
    CHECK(s2.e_harm <= 1e-10 * f_filled.squaredNorm());
    CHECK(s2.e_curl == doctest::Approx(3.0).epsilon(1e-9));

    // dense least-squares oracle for the curl component
    const Eigen::MatrixXd b2(filled.b2);
    const Eigen::VectorXd omega = b2.colPivHouseholderQr().solve(f_filled);
    CHECK((s2.curl - b2 * omega).norm() <= 1e-8);
}

TEST_CASE("hodge_decompose: potential is zero-mean per component") {
    // two disjoint triangles
    std::vector<Eigen::Vector3d> pts(6, Eigen::Vector3d::Zero());
    const SurfaceComplex two = build_complex(
        pts, {}, {{{0, 1}}, {{1, 2}}, {{0, 2}}, {{3, 4}}, {{4, 5}}, {{3, 5}}});
    std::mt19937_64 rng(21);
    const Eigen::VectorXd f = testutil::random_vector(rng, two.edge_count());
    const HodgeSplit split = hodge_decompose(two, f);
    CHECK(std::abs(split.potential.head(3).sum()) <= 1e-9);
    CHECK(std::abs(split.potential.tail(3).sum()) <= 1e-9);
}

TEST_CASE("hodge_decompose: argument checks and solver failure carry context") {
    const SurfaceComplex grid = make_grid(3, 3);
    CHECK_THROWS_AS(hodge_decompose(grid, Eigen::VectorXd::Ones(2)), ParameterError);
    CHECK_THROWS_AS(hodge_decompose(grid, Eigen::VectorXd::Ones(grid.edge_count()), 0.0),
                    ParameterError);
}

TEST_CASE("hodge_decompose: orthogonality and energy partition on random complexes") {
    std::mt19937_64 rng(41);
    int trials = 0;
    while (trials < 100) {
        const SurfaceComplex c = testutil::random_complex(rng, 9);
        if (c.edge_count() > 40 || c.edge_count() == 0) continue;
        ++trials;
        const Eigen::VectorXd f = testutil::random_vector(rng, c.edge_count());
        const HodgeSplit split = hodge_decompose(c, f);
        const double scale = std::max(f.squaredNorm(), 1e-12);

        CHECK((split.gradient + split.curl + split.harmonic - f).norm() <=
              1e-8 * std::sqrt(scale));
        CHECK(std::abs(split.gradient.dot(split.curl)) <= 1e-8 * scale);
        CHECK(std::abs(split.gradient.dot(split.harmonic)) <= 1e-8 * scale);
        CHECK(std::abs(split.curl.dot(split.harmonic)) <= 1e-8 * scale);
        CHECK(std::abs(split.e_grad + split.e_curl + split.e_harm - f.squaredNorm()) <=
              1e-8 * scale);
    }
}

TEST_CASE("harmonic_dimension equals the cycle count") {
    CHECK(harmonic_dimension(hollow_triangle()) == 1);
    CHECK(harmonic_dimension(make_path(8)) == 0);
    CHECK(harmonic_dimension(make_figure_eight(3, 3)) == 2);

    std::mt19937_64 rng(43);
    for (int trial = 0; trial < 30; ++trial) {
        const SurfaceComplex c = testutil::random_complex(rng, 8);
        const BettiNumbers betti = betti_numbers(hodge_laplacians(c));
        CHECK(harmonic_dimension(c) == betti.beta1);
    }
}

TEST_CASE("channel_diagnostic: joint flag is the conjunction of the three criteria") {
    const SurfaceComplex fig8 = make_figure_eight(4, 4);
    const CycleBasis cycles = cycle_basis(fig8);
    Eigen::VectorXd elevation(fig8.vertex_count());
    for (int v = 0; v < fig8.vertex_count(); ++v)
        elevation(v) = fig8.vertices[v].x();
    const Eigen::VectorXd flow =
        synthetic_drainage_flow(fig8, elevation, cycles.circulations);
    const Eigen::VectorXd h = Eigen::VectorXd::Constant(4, 0.25);

    ChannelThresholds open{10.0, 0.0, 1}; // everything passes
    const ChannelDiagnostic fire = channel_diagnostic(fig8, flow, h, open);
    CHECK(fire.entropy_low);
    CHECK(fire.curl_high == (fire.e_curl > 0.0));
    CHECK(fire.beta1_anomalous);
    CHECK(fire.joint == (fire.entropy_low && fire.curl_high && fire.beta1_anomalous));

    ChannelThresholds closed{0.0, 1e9, 1}; // entropy and curl cannot pass
    const ChannelDiagnostic quiet = channel_diagnostic(fig8, flow, h, closed);
    CHECK_FALSE(quiet.entropy_low);
    CHECK_FALSE(quiet.curl_high);
    CHECK(quiet.beta1_anomalous);
    CHECK_FALSE(quiet.joint);
}

TEST_CASE("channel_diagnostic: trees and flat patches fail the cycle criterion") {
    const SurfaceComplex tree = make_path(12);
    Eigen::VectorXd elevation(tree.vertex_count());
    for (int v = 0; v < tree.vertex_count(); ++v) elevation(v) = tree.vertices[v].x();
    const Eigen::VectorXd flow = synthetic_drainage_flow(
        tree, elevation, Eigen::MatrixXd(tree.edge_count(), 0));
    const ChannelThresholds thresholds{1e9, -1.0, 1}; // i and ii pass by fiat
    const ChannelDiagnostic diag =
        channel_diagnostic(tree, flow, Eigen::VectorXd::Ones(4), thresholds);
    CHECK_FALSE(diag.beta1_anomalous);
    CHECK_FALSE(diag.joint);

    const SurfaceComplex flat = make_grid(4, 6);
    Eigen::VectorXd elev2(flat.vertex_count());
    for (int v = 0; v < flat.vertex_count(); ++v)
        elev2(v) = flat.vertices[v].x() + 0.5 * flat.vertices[v].y();
    const Eigen::VectorXd flow2 = synthetic_drainage_flow(
        flat, elev2, Eigen::MatrixXd(flat.edge_count(), 0));
    const ChannelDiagnostic diag2 =
        channel_diagnostic(flat, flow2, Eigen::VectorXd::Ones(4), thresholds);
    CHECK(diag2.beta1 == 0);
    CHECK_FALSE(diag2.joint);
}

TEST_CASE("synthetic_drainage_flow: circulation share follows the scaling rule") {
    const SurfaceComplex fig8 = make_figure_eight(5, 5);
    const CycleBasis cycles = cycle_basis(fig8);
    Eigen::VectorXd elevation(fig8.vertex_count());
    for (int v = 0; v < fig8.vertex_count(); ++v)
        elevation(v) = fig8.vertices[v].x() - 0.3 * fig8.vertices[v].y();
    const Eigen::VectorXd grad_only = SpMat(fig8.b1.transpose()) * elevation;
    const Eigen::VectorXd flow =
        synthetic_drainage_flow(fig8, elevation, cycles.circulations, 0.3);
    // cycles are flows, so the circulation term is orthogonal to the gradient
    const Eigen::VectorXd extra = flow - grad_only;
    CHECK(std::abs(extra.dot(grad_only)) <= 1e-9 * grad_only.squaredNorm());
    const double expected = 0.3 * grad_only.norm() / std::sqrt(2.0);
    // the two unit circulations overlap, so compare against the coefficient scale
    CHECK(extra.norm() <= 2.1 * expected);
    CHECK(extra.norm() >= 0.5 * expected);
}
