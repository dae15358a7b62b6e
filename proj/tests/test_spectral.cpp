#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "spectop/spectral.hpp"
#include "spectop/topology.hpp"
#include "test_util.hpp"

using namespace spectop;

TEST_CASE("eigendecompose: two-vertex path") {
    const SpectralBasis basis = eigendecompose(hodge_laplacians(make_path(2)).l0, 2);
    CHECK(basis.eigenvalues(0) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(basis.eigenvalues(1) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(basis.eigenvectors(0, 0) == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(basis.eigenvectors(1, 0) == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(basis.fiedler == doctest::Approx(2.0));
}

TEST_CASE("eigendecompose: path-graph closed form up to N = 64") {
    for (int n : {2, 3, 5, 8, 16, 33, 64}) {
        const SpectralBasis basis = eigendecompose(hodge_laplacians(make_path(n)).l0, n);
        for (int l = 0; l < n; ++l) {
            const double expected = 2.0 - 2.0 * std::cos(l * M_PI / n);
            CHECK(std::abs(basis.eigenvalues(l) - expected) <= 1e-10);
        }
        const Eigen::MatrixXd gram =
            basis.eigenvectors.transpose() * basis.eigenvectors -
            Eigen::MatrixXd::Identity(n, n);
        CHECK(gram.cwiseAbs().maxCoeff() <= 1e-8);
        CHECK(basis.residuals.maxCoeff() <= 1e-9);
    }
}

TEST_CASE("eigendecompose: 4-cycle spectrum {0, 2, 2, 4}") {
    std::vector<Eigen::Vector3d> pts = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}};
    const SurfaceComplex c4 =
        build_complex(pts, {}, {{{0, 1}}, {{1, 2}}, {{2, 3}}, {{0, 3}}});
    const SpectralBasis basis = eigendecompose(hodge_laplacians(c4).l0, 4);
    const double expected[] = {0.0, 2.0, 2.0, 4.0};
    for (int i = 0; i < 4; ++i)
        CHECK(basis.eigenvalues(i) == doctest::Approx(expected[i]).epsilon(1e-12));
}

TEST_CASE("eigendecompose: iterative path agrees with dense") {
    for (int n : {6, 12, 20}) {
        const Eigen::MatrixXd l0(hodge_laplacians(make_path(n)).l0);
        const int k = std::min(4, n);
        const SpectralBasis dense = eigendecompose(l0, k);
        const SpectralBasis iter = eigendecompose(l0, k, EigMethod::Iterative);
        for (int i = 0; i < k; ++i)
            CHECK(iter.eigenvalues(i) == doctest::Approx(dense.eigenvalues(i)).epsilon(1e-8));
        CHECK(iter.residuals.maxCoeff() <= 1e-10);
        CHECK(subspace_angle(iter.eigenvectors, dense.eigenvectors) <= 1e-6);
    }
}

TEST_CASE("eigendecompose: iterative cap raises SolverError carrying a residual") {
    const Eigen::MatrixXd l0(hodge_laplacians(make_path(24)).l0);
    EigOptions options;
    options.max_iter = 1;
    try {
        eigendecompose(l0, 3, EigMethod::Iterative, options);
        FAIL("expected SolverError");
    } catch (const SolverError& e) {
        CHECK(e.residual() > 0.0);
    }
}

TEST_CASE("eigendecompose: argument validation") {
    const Eigen::MatrixXd l0(hodge_laplacians(make_path(4)).l0);
    CHECK_THROWS_AS(eigendecompose(l0, 0), ParameterError);
    CHECK_THROWS_AS(eigendecompose(l0, 5), ParameterError);
    Eigen::MatrixXd skew = l0;
    skew(0, 1) += 1.0;
    CHECK_THROWS_AS(eigendecompose(skew, 2), ParameterError);
}

TEST_CASE("nystrom_basis: full sampling matches the dense solve") {
    const SurfaceComplex grid = make_grid(6, 6);
    const int n = grid.vertex_count();
    const SpectralBasis dense = eigendecompose(hodge_laplacians(grid).l0, 5);
    const SpectralBasis full = nystrom_basis(grid, n, 5, 1);
    CHECK(subspace_angle(full.eigenvectors, dense.eigenvectors) <= 1e-8);
    CHECK_FALSE(full.coarse_disconnected);
}

TEST_CASE("nystrom_basis: half-sampled 10x10 grid stays within 0.1 rad") {
    const SurfaceComplex grid = make_grid(10, 10);
    const SpectralBasis dense = eigendecompose(hodge_laplacians(grid).l0, 5);
    for (std::uint64_t seed : {1ULL, 7ULL, 42ULL}) {
        const SpectralBasis approx = nystrom_basis(grid, 50, 5, seed);
        CHECK(subspace_angle(approx.eigenvectors, dense.eigenvectors) <= 0.1);
    }
}

TEST_CASE("nystrom_basis: both components sampled give two near-zero modes") {
    // two disjoint paths
    std::vector<Eigen::Vector3d> pts;
    std::vector<std::array<int, 2>> edges;
    for (int i = 0; i < 20; ++i) pts.push_back({double(i), 0, 0});
    for (int i = 0; i < 20; ++i) pts.push_back({double(i), 5, 0});
    for (int i = 0; i + 1 < 20; ++i) {
        edges.push_back({i, i + 1});
        edges.push_back({20 + i, 20 + i + 1});
    }
    const SurfaceComplex two = build_complex(pts, {}, edges);
    const SpectralBasis basis = nystrom_basis(two, 20, 4, 3);
    CHECK(basis.eigenvalues(0) <= 1e-9);
    CHECK(basis.eigenvalues(1) <= 1e-9);
}

TEST_CASE("nystrom_basis: sparse sampling of a connected graph sets the warning") {
    const SurfaceComplex path = make_path(60);
    const SpectralBasis basis = nystrom_basis(path, 6, 3, 5);
    CHECK(basis.coarse_disconnected); // no two samples adjacent, induced graph shatters
}

TEST_CASE("spectral_entropy: limits and invariances") {
    CHECK(spectral_entropy(Eigen::VectorXd::Ones(16)) ==
          doctest::Approx(std::log(16.0)).epsilon(1e-14));

    Eigen::VectorXd concentrated(4);
    concentrated << 1.0, 1e-300, 1e-300, 1e-300;
    CHECK(spectral_entropy(concentrated) == doctest::Approx(0.0).epsilon(1e-6));

    Eigen::VectorXd half(4);
    half << 1.0, 1.0, 1e-300, 1e-300;
    CHECK(spectral_entropy(half) == doctest::Approx(std::log(2.0)).epsilon(1e-6));

    Eigen::VectorXd bad(2);
    bad << 1.0, 0.0;
    CHECK_THROWS_AS(spectral_entropy(bad), DomainError);

    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 25; ++trial) {
        Eigen::VectorXd h = testutil::random_vector(rng, 12).array().abs() + 0.1;
        const double base = spectral_entropy(h);
        CHECK(spectral_entropy(3.7 * h) == doctest::Approx(base).epsilon(1e-12));
        Eigen::VectorXd shuffled = h.reverse();
        CHECK(spectral_entropy(shuffled) == doctest::Approx(base).epsilon(1e-12));
    }
}

TEST_CASE("sign convention: leading nonzero component is positive") {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 10; ++trial) {
        const SurfaceComplex c = testutil::random_complex(rng, 8);
        const SpectralBasis basis =
            eigendecompose(hodge_laplacians(c).l0, c.vertex_count());
        for (int j = 0; j < basis.mode_count(); ++j) {
            for (int i = 0; i < basis.eigenvectors.rows(); ++i) {
                if (std::abs(basis.eigenvectors(i, j)) > 1e-12) {
                    CHECK(basis.eigenvectors(i, j) > 0.0);
                    break;
                }
            }
        }
    }
}
