#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "spectop/experiments.hpp"

using namespace spectop;

TEST_CASE("reference terrain: sizes, cycles, and elevations") {
    const TerrainPair terrain = make_reference_terrain();
    CHECK(terrain.flat.vertex_count() == 512);
    CHECK(terrain.channeled.vertex_count() == 512);
    CHECK(terrain.betti_flat.beta1 == 0);
    CHECK(terrain.betti_channeled.beta1 == 3);
    CHECK(terrain.channeled_cycles.count() == 3);
    CHECK(terrain.elevation_flat.size() == 512);
    // normalized driving fields: zero mean, fixed spectral amplitude
    CHECK(std::abs(terrain.elevation_flat.mean()) <= 1e-9);
    CHECK(terrain.elevation_flat.norm() == doctest::Approx(24.0).epsilon(1e-9));
    CHECK(terrain.elevation_channeled.norm() == doctest::Approx(24.0).epsilon(1e-9));
}

TEST_CASE("experiment 1 passes its bands") {
    const ExperimentReport report = run_experiment1();
    for (const auto& check : report.checks) {
        INFO(check.name, " = ", check.value);
        CHECK(check.pass);
    }
}

TEST_CASE("experiment 4 passes its bands") {
    const ExperimentReport report = run_experiment4();
    for (const auto& check : report.checks) {
        INFO(check.name, " = ", check.value);
        CHECK(check.pass);
    }
}

TEST_CASE("experiment 5 passes its bands and emits the sweep table") {
    const ExperimentReport report = run_experiment5();
    for (const auto& check : report.checks) {
        INFO(check.name, " = ", check.value);
        CHECK(check.pass);
    }
    CHECK(report.csv.find("family,l,") == 0);
    CHECK(std::count(report.csv.begin(), report.csv.end(), '\n') == 9); // header + 8 rows
}

TEST_CASE("experiment ids are validated") {
    CHECK_THROWS_AS(run_experiment(0), ParameterError);
    CHECK_THROWS_AS(run_experiment(6), ParameterError);
}

TEST_CASE("experiment runs are deterministic") {
    const ExperimentReport a = run_experiment1();
    const ExperimentReport b = run_experiment1();
    REQUIRE(a.checks.size() == b.checks.size());
    for (std::size_t i = 0; i < a.checks.size(); ++i)
        CHECK(a.checks[i].value == b.checks[i].value); // bitwise reproducible
}
