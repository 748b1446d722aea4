#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "entroflow/nonlocal.hpp"
#include "entroflow/shallow_water.hpp"
#include "entroflow/study.hpp"

using namespace entroflow;

namespace {

constexpr double kPi = std::numbers::pi;

bool identical(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] != b[i]) return false;
    return true;
}

ScalarField random_field(const Grid1D& grid, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> dist(-0.5, 0.5);
    ScalarField h(grid, 1.0);
    for (double& v : h.values) v += dist(rng);
    return h;
}

Scenario sweep_base() {
    const ScenarioParse p = parse_scenario(R"({
        "system": "shallow-water",
        "grid": {"n_cells": 64, "length": 1.0, "topology": "periodic"},
        "params": {"alpha": 1.0, "re": 4.0, "we": 800.0, "fr": 30.0,
                   "mobility": {"kind": "power-law", "n": 1.0}, "beta": 0.5,
                   "cap_a": 4.0},
        "initial_h": {"preset": "cosine-bump", "mean": 1.0, "amplitude": 0.1},
        "initial_momentum": {"mode": "prepared"},
        "t_end": 0.02,
        "time_stepper": {"dt_max": 1e-3}
    })");
    REQUIRE(p.ok());
    return *p.scenario;
}

}  // namespace

TEST_CASE("threaded and serial kernel application agree bitwise") {
    const Grid1D grid(257, 1.0, Topology::Wall);
    const NonlocalKernel kernel(grid);
    for (unsigned seed : {11u, 12u, 13u, 14u}) {
        const ScalarField h = random_field(grid, seed);
        const ScalarField par = kernel.apply(h);
        const ScalarField ser = kernel.apply_serial(h);
        CHECK(identical(par.values, ser.values));
    }
}

TEST_CASE("kernel assembly is reproducible") {
    const Grid1D grid(64, 1.0, Topology::Wall);
    const NonlocalKernel a(grid);
    const NonlocalKernel b(grid);
    bool same_weights = true;
    for (std::size_t i = 0; i < a.size() && same_weights; ++i)
        for (std::size_t j = 0; j < a.size(); ++j)
            if (a.weight(i, j) != b.weight(i, j)) {
                same_weights = false;
                break;
            }
    CHECK(same_weights);
    CHECK(identical(a.eigenvalues(), b.eigenvalues()));
}

TEST_CASE("relaxation sweep output does not depend on the worker count") {
    SweepSpec spec;
    spec.base = sweep_base();
    spec.eps_values = {1e-1, 1e-2};
    spec.norms = {ErrorNorm::L2, ErrorNorm::Linf};
    const ConvergenceReport one = relaxation_study(spec, 1);
    const ConvergenceReport two = relaxation_study(spec, 2);
    REQUIRE(one.rows.size() == two.rows.size());
    for (std::size_t r = 0; r < one.rows.size(); ++r) {
        CHECK(one.rows[r].parameter == two.rows[r].parameter);
        CHECK(identical(one.rows[r].errors, two.rows[r].errors));
        CHECK(one.rows[r].entropy_gap == two.rows[r].entropy_gap);
        for (int c = 0; c < 14; ++c)
            CHECK(one.rows[r].endpoint.values[c] == two.rows[r].endpoint.values[c]);
    }
    CHECK(identical(one.fitted_rates, two.fitted_rates));
}

TEST_CASE("shallow-water runs are deterministic") {
    const Scenario sc = sweep_base();
    const ScalarField h0 = sc.build_initial_h();
    const std::vector<double> u0 = sc.build_initial_u();
    const ShallowWaterParams p = sc.shallow_water_params();
    const SwRun a = sw_run(h0, u0, sc.t_end, p, sc.time_stepper);
    const SwRun b = sw_run(h0, u0, sc.t_end, p, sc.time_stepper);
    CHECK(a.accepted == b.accepted);
    CHECK(identical(a.state.h.values, b.state.h.values));
    CHECK(identical(a.state.u, b.state.u));
    CHECK(identical(a.ledger.time, b.ledger.time));
    CHECK(identical(a.ledger.energy, b.ledger.energy));
    CHECK(identical(a.ledger.bf, b.ledger.bf));
    CHECK(identical(a.ledger.residual_energy, b.ledger.residual_energy));
    CHECK(identical(a.ledger.residual_term_x, b.ledger.residual_term_x));
}

TEST_CASE("electrified runs are deterministic") {
    const Grid1D grid(48, 1.0, Topology::Wall);
    const NonlocalKernel kernel(grid);
    ScalarField h0(grid, 0.0);
    for (std::size_t i = 0; i < grid.n_cells; ++i)
        h0.values[i] = 1.0 + 0.1 * std::cos(kPi * grid.x(i));
    TimeStepper ts;
    ts.dt_init = ts.dt_max = 1e-4;
    const ElectrifiedRun a = electrified_run(kernel, h0, 2e-3, ts);
    const ElectrifiedRun b = electrified_run(kernel, h0, 2e-3, ts);
    CHECK(a.accepted == b.accepted);
    CHECK(identical(a.state.h.values, b.state.h.values));
    CHECK(identical(a.ledger.energy, b.ledger.energy));
    CHECK(identical(a.ledger.bf, b.ledger.bf));
    CHECK(identical(a.ledger.residual_energy, b.ledger.residual_energy));
}
