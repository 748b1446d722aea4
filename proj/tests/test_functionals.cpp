#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "entroflow/functionals.hpp"
#include "support/quadrature.hpp"

using namespace entroflow;

namespace {

constexpr double kPi = std::numbers::pi;

// Taylor form with integral remainder: the function with second derivative
// 1/F vanishing to first order at cap_a.
double entropy_oracle(double s, const MobilitySpec& mob, double cap_a) {
    return quad::integrate([&](double u) { return (s - u) / mob.value(u); }, cap_a, s);
}

double entropy_derivative_oracle(double s, const MobilitySpec& mob, double cap_a) {
    return quad::integrate([&](double u) { return 1.0 / mob.value(u); }, cap_a, s);
}

std::vector<MobilitySpec> mobilities() {
    return {MobilitySpec::power_law(1.0), MobilitySpec::power_law(1.5),
            MobilitySpec::power_law(2.0), MobilitySpec::power_law(3.0),
            MobilitySpec::quadratic_cubic()};
}

ScalarField cosine_field(const Grid1D& g, double mean, double amp, int k) {
    ScalarField h(g);
    for (std::size_t i = 0; i < g.n_cells; ++i)
        h[i] = mean + amp * std::cos(2.0 * kPi * k * g.x(i) / g.length);
    return h;
}

}  // namespace

TEST_CASE("entropy closed forms match quadrature oracles") {
    for (const auto& mob : mobilities()) {
        for (double cap_a : {1.0, 2.0}) {
            for (double frac : {0.1, 0.35, 0.8, 0.97, 1.3}) {
                const double s = frac * cap_a;
                const double g_ref = entropy_derivative_oracle(s, mob, cap_a);
                const double big_g_ref = entropy_oracle(s, mob, cap_a);
                CHECK(entropy_derivative(s, mob, cap_a) ==
                      doctest::Approx(g_ref).epsilon(1e-10));
                CHECK(entropy_density(s, mob, cap_a) ==
                      doctest::Approx(big_g_ref).epsilon(1e-10));
            }
        }
    }
}

TEST_CASE("entropy density reference value and cap behavior") {
    const MobilitySpec mob = MobilitySpec::power_law(2.0);
    // F = s^2, cap 1: G(s) = s - 1 - log s, so G(1/2) = log 2 - 1/2.
    CHECK(entropy_density(0.5, mob, 1.0) ==
          doctest::Approx(std::log(2.0) - 0.5).epsilon(1e-14));
    for (const auto& m : mobilities()) {
        CHECK(std::fabs(entropy_density(2.0, m, 2.0)) < 1e-15);
        CHECK(std::fabs(entropy_derivative(2.0, m, 2.0)) < 1e-15);
        CHECK(entropy_density(0.5, m, 2.0) > 0.0);
        CHECK(entropy_density(2.6, m, 2.0) > 0.0);
        CHECK(entropy_derivative(0.5, m, 2.0) < 0.0);
        CHECK(entropy_derivative(2.6, m, 2.0) > 0.0);
    }
}

TEST_CASE("entropy derivative is the derivative of the density") {
    std::mt19937 gen(911);
    std::uniform_real_distribution<double> pick(0.15, 1.9);
    const double cap_a = 2.0, d = 1e-6;
    for (const auto& mob : mobilities()) {
        for (int k = 0; k < 20; ++k) {
            const double s = pick(gen);
            const double fd = (entropy_density(s + d, mob, cap_a) -
                               entropy_density(s - d, mob, cap_a)) /
                              (2.0 * d);
            CHECK(entropy_derivative(s, mob, cap_a) == doctest::Approx(fd).epsilon(1e-6));
        }
    }
}

TEST_CASE("entropy density curvature is the inverse mobility") {
    const double cap_a = 2.0, d = 1e-4;
    for (const auto& mob : mobilities()) {
        for (double s : {0.3, 0.9, 1.6}) {
            const double fd = (entropy_density(s + d, mob, cap_a) -
                               2.0 * entropy_density(s, mob, cap_a) +
                               entropy_density(s - d, mob, cap_a)) /
                              (d * d);
            CHECK(fd == doctest::Approx(1.0 / mob.value(s)).epsilon(1e-5));
        }
    }
}

TEST_CASE("bf entropy of a constant and its domain guards") {
    const Grid1D g(64, 3.0, Topology::Periodic);
    const MobilitySpec mob = MobilitySpec::power_law(3.0);
    const ScalarField h(g, 0.7);
    CHECK(bf_entropy(h, mob, 2.0) ==
          doctest::Approx(3.0 * entropy_density(0.7, mob, 2.0)).epsilon(1e-14));

    const ScalarField tall(g, 2.5);
    CHECK_THROWS_WITH_AS(bf_entropy(tall, mob, 2.0),
                         "bf_entropy: cap_a must dominate the field maximum",
                         std::domain_error);
    ScalarField bad(g, 1.0);
    bad[3] = 0.0;
    CHECK_THROWS_WITH_AS(bf_entropy(bad, mob, 2.0),
                         "bf_entropy: field must be positive", std::domain_error);
}

TEST_CASE("lubrication energy matches the continuum value on a cosine") {
    const Grid1D g(512, 1.0, Topology::Periodic);
    const ScalarField h = cosine_field(g, 1.0, 0.3, 1);
    LubricationParams p;
    p.fr = 2.0;
    p.we = 5.0;
    const double a2 = 0.3 * 0.3;
    const double exact =
        0.5 * ((1.0 + 0.5 * a2) / (p.fr * p.fr) +
               0.5 * a2 * 4.0 * kPi * kPi / p.we);
    CHECK(energy_lubrication(h, p) == doctest::Approx(exact).epsilon(1e-3));
}

TEST_CASE("shallow-water energy of a flat state is exact") {
    const Grid1D g(64, 2.0, Topology::Periodic);
    const double c = 1.3, u0 = 0.2;
    const ScalarField h(g, c), u(g, u0);
    ShallowWaterParams p;
    p.eps = 0.05;
    p.fr = 1.5;
    for (double beta : {1.0, 1.7}) {
        p.beta = beta;
        const double exact =
            g.length * (0.5 * p.eps * c * u0 * u0 + potential_density(c, beta, p.fr));
        CHECK(energy_shallow_water(h, u, p) == doctest::Approx(exact).epsilon(1e-14));
    }
    // The beta = 1 closed form joins the general branch continuously.
    CHECK(potential_density(c, 1.0, p.fr) ==
          doctest::Approx(potential_density(c, 1.0 + 1e-10, p.fr)).epsilon(1e-8));
}

TEST_CASE("bd velocity reduces to u on flat fields") {
    const Grid1D g(32, 1.0, Topology::Periodic);
    const ScalarField h(g, 0.9);
    ScalarField u(g);
    for (std::size_t i = 0; i < g.n_cells; ++i) u[i] = std::sin(2.0 * kPi * g.x(i));
    ShallowWaterParams p;
    const ScalarField w = bd_velocity(h, u, p);
    for (std::size_t i = 0; i < g.n_cells; ++i) CHECK(w[i] == u[i]);
}

TEST_CASE("bd entropy special values on flat states") {
    const Grid1D g(48, 1.0, Topology::Periodic);
    const double c = 1.1;
    const ScalarField h(g, c), zero(g, 0.0);
    ShallowWaterParams p;
    p.eps = 0.03;
    p.re = 2.0;
    p.alpha = 1.5;
    CHECK(bd_entropy(h, zero, p, BdForm::Raw) ==
          doctest::Approx(potential_density(c, p.beta, p.fr)).epsilon(1e-14));
    CHECK(bd_entropy(h, zero, p, BdForm::EnergyCombined) ==
          doctest::Approx(p.nu_c() * p.alpha * bf_entropy(h, p)).epsilon(1e-13));
}

TEST_CASE("bd forms, energy, and bf entropy satisfy the combination identity") {
    const Grid1D g(96, 1.0, Topology::Periodic);
    const ScalarField h = cosine_field(g, 1.0, 0.25, 1);
    ScalarField u(g);
    for (std::size_t i = 0; i < g.n_cells; ++i)
        u[i] = 0.1 + 0.05 * std::sin(2.0 * kPi * g.x(i));
    ShallowWaterParams p;
    p.eps = 0.02;
    p.re = 3.0;
    p.alpha = 0.8;
    p.cap_a = 4.0;
    const double lhs = bd_entropy(h, u, p, BdForm::EnergyCombined);
    const double rhs = bd_entropy(h, u, p, BdForm::Raw) -
                       energy_shallow_water(h, u, p) +
                       p.nu_c() * p.alpha * bf_entropy(h, p);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("coupling rate vanishes on flat data and matches quadrature otherwise") {
    ShallowWaterParams p;
    p.mobility = MobilitySpec::power_law(2.0);
    const Grid1D gflat(32, 1.0, Topology::Periodic);
    CHECK(term_x_rate(ScalarField(gflat, 1.2), ScalarField(gflat, 0.4), p) == 0.0);

    const Grid1D g(512, 1.0, Topology::Periodic);
    const ScalarField h = cosine_field(g, 1.0, 0.2, 1);
    ScalarField u(g);
    for (std::size_t i = 0; i < g.n_cells; ++i)
        u[i] = 0.1 + 0.05 * std::sin(2.0 * kPi * g.x(i));
    auto hf = [](double x) { return 1.0 + 0.2 * std::cos(2.0 * kPi * x); };
    auto hx = [](double x) { return -0.4 * kPi * std::sin(2.0 * kPi * x); };
    auto uf = [](double x) { return 0.1 + 0.05 * std::sin(2.0 * kPi * x); };
    const double oracle = quad::integrate(
        [&](double x) { return hf(x) * uf(x) * hx(x) / (hf(x) * hf(x)); }, 0.0, 1.0,
        1e-12);
    CHECK(term_x_rate(h, u, p) == doctest::Approx(oracle).epsilon(2e-3));
}

TEST_CASE("bf dissipation scaling variants differ by exactly alpha") {
    const Grid1D g(128, 1.0, Topology::Periodic);
    const ScalarField h = cosine_field(g, 1.0, 0.2, 2);
    LubricationParams p;
    p.alpha = 2.5;
    p.we = 3.0;
    p.fr = 1.2;
    const double with = bf_dissipation_rate(h, p, BfScaling::WithAlpha);
    const double without = bf_dissipation_rate(h, p, BfScaling::NoAlpha);
    CHECK(without == doctest::Approx(p.alpha * with).epsilon(1e-13));
}

TEST_CASE("bf dissipation rate matches the continuum integral") {
    const Grid1D g(512, 1.0, Topology::Periodic);
    const ScalarField h = cosine_field(g, 1.0, 0.2, 1);
    LubricationParams p;
    p.alpha = 1.5;
    p.we = 4.0;
    p.fr = 0.9;
    p.mobility = MobilitySpec::power_law(3.0);
    p.m = 1.5;
    auto hf = [](double x) { return 1.0 + 0.2 * std::cos(2.0 * kPi * x); };
    auto hx = [](double x) { return -0.4 * kPi * std::sin(2.0 * kPi * x); };
    auto hxx = [](double x) { return -0.8 * kPi * kPi * std::cos(2.0 * kPi * x); };
    const double oracle = quad::integrate(
        [&](double x) {
            const double H = hf(x);
            return hxx(x) * hxx(x) / (p.alpha * p.we) +
                   std::pow(H, p.m - 1.0) / std::pow(H, 3.0) * hx(x) * hx(x) /
                       (p.alpha * p.fr * p.fr);
        },
        0.0, 1.0, 1e-12);
    CHECK(bf_dissipation_rate(h, p) == doctest::Approx(oracle).epsilon(2e-3));
}

TEST_CASE("shallow-water energy dissipation on flat data is pure drag") {
    const Grid1D g(64, 2.0, Topology::Periodic);
    const double c = 1.4, u0 = 0.3;
    ShallowWaterParams p;
    p.alpha = 1.7;
    p.mobility = MobilitySpec::power_law(2.0);
    const double exact = p.alpha * c * c * u0 * u0 / p.mobility.value(c) * g.length;
    CHECK(energy_dissipation_rate_sw(ScalarField(g, c), ScalarField(g, u0), p) ==
          doctest::Approx(exact).epsilon(1e-14));
    CHECK(bd_dissipation_specific(ScalarField(g, c), p) == 0.0);
}

TEST_CASE("parameter validation reports pinned messages") {
    LubricationParams lp;
    lp.we = -1.0;
    CHECK_THROWS_WITH_AS(lp.validate(), "we must be positive", std::invalid_argument);
    lp.we = 1.0;
    lp.m = 2.5;
    lp.check_existence_range = true;
    CHECK_THROWS_WITH_AS(lp.validate(), "m must lie in (1, 2) for the existence regime",
                         std::invalid_argument);

    ShallowWaterParams sp;
    sp.check_coupling = true;
    sp.beta = 1.0;
    sp.mobility = MobilitySpec::power_law(2.0);
    CHECK_THROWS_WITH_AS(sp.validate(), "beta + n must lie in (1, 2); got 3.000000",
                         std::invalid_argument);
    sp.mobility = MobilitySpec::quadratic_cubic();
    CHECK_THROWS_WITH_AS(sp.validate(), "coupling check requires a power-law mobility",
                         std::invalid_argument);
    sp.check_coupling = false;
    sp.eps = 0.0;
    CHECK_THROWS_WITH_AS(sp.validate(), "eps must be positive", std::invalid_argument);
}

TEST_CASE("relaxation limit carries the drag weight into the drift exponent") {
    ShallowWaterParams sp;
    sp.alpha = 2.0;
    sp.we = 7.0;
    sp.fr = 3.0;
    sp.beta = 0.5;
    sp.mobility = MobilitySpec::power_law(1.0);
    sp.cap_a = 5.0;
    const LubricationParams lp = sp.relaxation_limit();
    CHECK(lp.alpha == 2.0);
    CHECK(lp.we == 7.0);
    CHECK(lp.fr == 3.0);
    CHECK(lp.m == doctest::Approx(1.5).epsilon(1e-15));
    CHECK(lp.cap_a == 5.0);
    CHECK(lp.mobility == MobilitySpec::power_law(1.0));

    sp.mobility = MobilitySpec::quadratic_cubic();
    CHECK_THROWS_WITH_AS(sp.relaxation_limit(),
                         "relaxation limit is defined for power-law mobilities only",
                         std::invalid_argument);
}

TEST_CASE("ledger header names every audited column") {
    const std::string header = BalanceLedger::csv_header();
    for (const char* col : {"time", "mass", "energy", "bd_raw", "bd_combined", "bf",
                            "min_h", "diss_energy_acc", "diss_bf_acc", "diss_bd_acc",
                            "residual_energy", "residual_bf", "residual_bd",
                            "residual_termX"})
        CHECK(header.find(col) != std::string::npos);
}
