#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <vector>

#include "entroflow/lubrication.hpp"
#include "entroflow/ops.hpp"

using namespace entroflow;

namespace {

constexpr double kPi = std::numbers::pi;

ScalarField droplet(const Grid1D& g, double base, double height) {
    ScalarField h(g);
    for (std::size_t i = 0; i < g.n_cells; ++i) {
        const double c = std::cos(kPi * (g.x(i) / g.length - 0.5));
        h[i] = base + height * c * c;
    }
    return h;
}

LubricationParams default_params() {
    LubricationParams p;
    p.alpha = 1.0;
    p.we = 1.0;
    p.fr = 1.0;
    p.mobility = MobilitySpec::power_law(3.0);
    p.m = 1.5;
    p.cap_a = 4.0;
    return p;
}

}  // namespace

TEST_CASE("time stepper validation messages") {
    TimeStepper ts;
    ts.dt_min = -1.0;
    CHECK_THROWS_WITH_AS(ts.validate(), "time stepper dt values must be positive",
                         std::invalid_argument);
    ts = TimeStepper{};
    ts.dt_init = 1.0;
    CHECK_THROWS_WITH_AS(ts.validate(), "time stepper needs dt_min <= dt_init <= dt_max",
                         std::invalid_argument);
    ts = TimeStepper{};
    ts.newton_tol = 0.0;
    CHECK_THROWS_WITH_AS(ts.validate(), "newton_tol must be positive",
                         std::invalid_argument);
    ts = TimeStepper{};
    ts.newton_max_iter = 0;
    CHECK_THROWS_WITH_AS(ts.validate(), "newton_max_iter must be >= 1",
                         std::invalid_argument);
    ts = TimeStepper{};
    ts.safety = 1.5;
    CHECK_THROWS_WITH_AS(ts.validate(), "safety must lie in (0, 1]",
                         std::invalid_argument);
}

TEST_CASE("mass is conserved to rounding on both topologies") {
    for (Topology topo : {Topology::Periodic, Topology::Wall}) {
        const Grid1D g(64, 1.0, topo);
        const ScalarField h0 = droplet(g, 0.2, 1.0);
        const LubricationParams p = default_params();
        TimeStepper ts;
        ts.dt_max = 2e-3;
        const LubricationRun run = lubrication_run(h0, 0.1, p, ts);
        REQUIRE(run.ledger.rows() >= 2);
        const double m0 = run.ledger.mass.front();
        for (double m : run.ledger.mass) CHECK(std::fabs(m - m0) / m0 < 1e-12);
        CHECK(run.rejected == 0);
    }
}

TEST_CASE("wall fluxes vanish at the boundary faces") {
    const Grid1D g(32, 1.0, Topology::Wall);
    const ScalarField h = droplet(g, 0.3, 0.8);
    const std::vector<double> q = lubrication_flux(h, default_params());
    REQUIRE(q.size() == 33);
    CHECK(q.front() == 0.0);
    CHECK(q.back() == 0.0);

    ScalarField bad = h;
    bad[0] = -0.1;
    CHECK_THROWS_WITH_AS(lubrication_flux(bad, default_params()),
                         "lubrication_flux: field must be positive", std::domain_error);
}

TEST_CASE("recorded energies never increase") {
    const Grid1D g(64, 1.0, Topology::Periodic);
    const ScalarField h0 = droplet(g, 0.2, 1.0);
    TimeStepper ts;
    ts.dt_max = 2e-3;
    const LubricationRun run = lubrication_run(h0, 0.2, default_params(), ts);
    const double slack = 1e-10 * std::max(1.0, run.ledger.energy.front());
    for (std::size_t i = 1; i < run.ledger.rows(); ++i)
        CHECK(run.ledger.energy[i] <= run.ledger.energy[i - 1] + slack);
    for (double m : run.ledger.min_h) CHECK(m > 0.0);
}

TEST_CASE("entropy balance residual shrinks linearly with dt") {
    const Grid1D g(64, 1.0, Topology::Periodic);
    const ScalarField h0 = droplet(g, 0.3, 0.7);
    const LubricationParams p = default_params();
    auto final_residual = [&](double dt) {
        TimeStepper ts;
        ts.dt_init = dt;
        ts.dt_max = dt;
        const LubricationRun run = lubrication_run(h0, 0.2, p, ts);
        CHECK(run.rejected == 0);
        return std::fabs(run.ledger.residual_bf.back());
    };
    const double coarse = final_residual(2e-3);
    const double fine = final_residual(1e-3);
    CHECK(coarse / fine > 1.5);
    CHECK(coarse / fine < 3.0);
}

TEST_CASE("newton converges in a few iterations on smooth data") {
    const Grid1D g(64, 1.0, Topology::Periodic);
    ScalarField h(g);
    for (std::size_t i = 0; i < g.n_cells; ++i)
        h[i] = 1.0 + 0.1 * std::cos(2.0 * kPi * g.x(i));
    LubricationState state{h, 0.0, 0.0};
    TimeStepper ts;
    ts.dt_init = 1e-3;
    ts.dt_max = 1e-3;
    const StepStats st = lubrication_step(state, default_params(), ts);
    CHECK(st.newton_iters <= 6);
    CHECK(st.retries == 0);
    CHECK(st.dt_used == 1e-3);
    CHECK(state.t == 1e-3);
}

TEST_CASE("flat states are exact fixed points") {
    const Grid1D g(32, 2.0, Topology::Periodic);
    const ScalarField h0(g, 0.8);
    TimeStepper ts;
    const LubricationRun run = lubrication_run(h0, 0.05, default_params(), ts);
    for (std::size_t i = 0; i < run.state.h.size(); ++i)
        CHECK(run.state.h[i] == doctest::Approx(0.8).epsilon(1e-14));
    CHECK(run.rejected == 0);
}

TEST_CASE("exhausting dt rejections raises a step failure") {
    const Grid1D g(64, 1.0, Topology::Periodic);
    const ScalarField h0 = droplet(g, 0.1, 1.2);
    LubricationParams p = default_params();
    p.we = 1e-4;  // very stiff capillarity
    TimeStepper ts;
    ts.dt_init = 1e-2;
    ts.dt_min = 1e-2;
    ts.dt_max = 1e-2;
    ts.newton_max_iter = 1;
    try {
        lubrication_run(h0, 0.1, p, ts);
        FAIL("expected a StepFailure");
    } catch (const StepFailure& e) {
        CHECK(std::string(e.what()).find("rejected below dt_min") != std::string::npos);
        CHECK(e.dt < 1e-2);
        CHECK(e.min_h > 0.0);
    }
}

TEST_CASE("thin films stay positive through the run") {
    const Grid1D g(64, 1.0, Topology::Periodic);
    const ScalarField h0 = droplet(g, 0.05, 1.0);
    TimeStepper ts;
    ts.dt_max = 1e-3;
    const LubricationRun run = lubrication_run(h0, 0.1, default_params(), ts);
    CHECK(run.min_h_overall > 0.0);
    CHECK(run.state.h.min() > 0.0);
}

TEST_CASE("recording cadence keeps the endpoints") {
    const Grid1D g(32, 1.0, Topology::Periodic);
    const ScalarField h0 = droplet(g, 0.3, 0.5);
    TimeStepper ts;
    ts.dt_init = 1e-3;
    ts.dt_max = 1e-3;
    RunOptions dense_opts;
    dense_opts.record_every = 1;
    const LubricationRun dense =
        lubrication_run(h0, 0.05, default_params(), ts, dense_opts);
    CHECK(dense.ledger.rows() == static_cast<std::size_t>(dense.accepted) + 1);

    RunOptions sparse_opts;
    sparse_opts.record_every = 5;
    const LubricationRun sparse =
        lubrication_run(h0, 0.05, default_params(), ts, sparse_opts);
    CHECK(sparse.ledger.rows() < dense.ledger.rows());
    CHECK(sparse.ledger.time.front() == 0.0);
    CHECK(sparse.ledger.time.back() == doctest::Approx(0.05).epsilon(1e-12));
    CHECK(sparse.ledger.time.back() == doctest::Approx(dense.ledger.time.back()).epsilon(1e-14));
}

TEST_CASE("a zero source leaves the evolution bit-identical") {
    const Grid1D g(32, 1.0, Topology::Periodic);
    const ScalarField h0 = droplet(g, 0.4, 0.6);
    TimeStepper ts;
    ts.dt_max = 1e-3;
    const LubricationRun plain = lubrication_run(h0, 0.02, default_params(), ts);
    RunOptions opts;
    opts.source = [](double, double) { return 0.0; };
    const LubricationRun forced = lubrication_run(h0, 0.02, default_params(), ts, opts);
    REQUIRE(plain.state.h.size() == forced.state.h.size());
    for (std::size_t i = 0; i < plain.state.h.size(); ++i)
        CHECK(plain.state.h[i] == forced.state.h[i]);
}
