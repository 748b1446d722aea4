#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <vector>

#include "entroflow/ops.hpp"
#include "support/quadrature.hpp"

using namespace entroflow;

namespace {

constexpr double kPi = std::numbers::pi;

ScalarField sample(const Grid1D& g, double (*f)(double)) {
    ScalarField out(g);
    for (std::size_t i = 0; i < g.n_cells; ++i) out[i] = f(g.x(i));
    return out;
}

double max_err(const ScalarField& got, double (*f)(double)) {
    double m = 0.0;
    for (std::size_t i = 0; i < got.size(); ++i)
        m = std::max(m, std::fabs(got[i] - f(got.grid.x(i))));
    return m;
}

}  // namespace

TEST_CASE("one-sided wall derivatives are exact on quadratics") {
    const Grid1D g(16, 2.0, Topology::Wall);
    ScalarField f(g);
    for (std::size_t i = 0; i < g.n_cells; ++i) {
        const double x = g.x(i);
        f[i] = 2.0 + 3.0 * x - 1.5 * x * x;
    }
    const ScalarField d1 = dx(f, WallScheme::OneSided);
    const ScalarField d2 = dxx(f, WallScheme::OneSided);
    for (std::size_t i = 0; i < g.n_cells; ++i) {
        CHECK(d1[i] == doctest::Approx(3.0 - 3.0 * g.x(i)).epsilon(1e-12));
        CHECK(d2[i] == doctest::Approx(-3.0).epsilon(1e-12));
    }
}

TEST_CASE("third derivative is exact on cubics") {
    const Grid1D g(24, 1.5, Topology::Wall);
    ScalarField f(g);
    for (std::size_t i = 0; i < g.n_cells; ++i) {
        const double x = g.x(i);
        f[i] = x * x * x - 0.5 * x * x + x;
    }
    const ScalarField d3 = dxxx(f, WallScheme::OneSided);
    for (std::size_t i = 0; i < g.n_cells; ++i)
        CHECK(d3[i] == doctest::Approx(6.0).epsilon(1e-9));
}

TEST_CASE("periodic derivatives converge at second order") {
    const double L = 2.0;
    auto test_order = [&](auto deriv, double (*exact)(double)) {
        double errs[2];
        for (int lev = 0; lev < 2; ++lev) {
            const Grid1D g(64 << lev, L, Topology::Periodic);
            const ScalarField f = sample(g, [](double x) { return std::sin(kPi * x); });
            errs[lev] = max_err(deriv(f), exact);
        }
        const double ratio = errs[0] / errs[1];
        CHECK(ratio > 3.7);
        CHECK(ratio < 4.3);
    };
    test_order([](const ScalarField& f) { return dx(f); },
               +[](double x) { return kPi * std::cos(kPi * x); });
    test_order([](const ScalarField& f) { return dxx(f); },
               +[](double x) { return -kPi * kPi * std::sin(kPi * x); });
    test_order([](const ScalarField& f) { return dxxx(f); },
               +[](double x) { return -kPi * kPi * kPi * std::cos(kPi * x); });
}

TEST_CASE("mirror scheme converges at second order for even-symmetric fields") {
    const double L = 1.0;
    double errs[2];
    for (int lev = 0; lev < 2; ++lev) {
        const Grid1D g(64 << lev, L, Topology::Wall);
        const ScalarField f = sample(g, [](double x) { return std::cos(kPi * x); });
        errs[lev] = max_err(dx(f, WallScheme::NeumannMirror),
                            +[](double x) { return -kPi * std::sin(kPi * x); });
    }
    const double ratio = errs[0] / errs[1];
    CHECK(ratio > 3.7);
    CHECK(ratio < 4.3);
}

TEST_CASE("integrate is the exact midpoint rule") {
    const Grid1D gp(128, 1.0, Topology::Periodic);
    const Grid1D gw(96, 3.0, Topology::Wall);
    CHECK(integrate(ScalarField(gp, 1.0)) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(integrate(ScalarField(gw, 2.5)) == doctest::Approx(7.5).epsilon(1e-14));

    // Full-period samples of a pure mode sum to zero.
    const ScalarField s = sample(gp, [](double x) { return std::sin(2.0 * kPi * x); });
    CHECK(std::fabs(integrate(s)) < 1e-13);
}

TEST_CASE("periodic derivative integrates to zero by telescoping") {
    const Grid1D g(100, 2.0, Topology::Periodic);
    const ScalarField f =
        sample(g, [](double x) { return std::exp(std::cos(kPi * x)) + 0.3 * std::sin(2.0 * kPi * x); });
    CHECK(std::fabs(integrate(dx(f))) < 1e-13);
    CHECK(std::fabs(integrate(dxx(f))) < 1e-12);
}

TEST_CASE("norms of constants") {
    const Grid1D g(64, 4.0, Topology::Wall);
    const ScalarField f(g, -1.5);
    CHECK(l2_norm(f) == doctest::Approx(1.5 * 2.0).epsilon(1e-14));
    CHECK(linf_norm(f) == 1.5);
}

TEST_CASE("face sets and arithmetic averages") {
    const Grid1D gp(12, 1.0, Topology::Periodic);
    const Grid1D gw(12, 1.0, Topology::Wall);
    CHECK(face_count(gp) == 12);
    CHECK(face_count(gw) == 13);

    ScalarField hp(gp), hw(gw);
    for (std::size_t i = 0; i < 12; ++i) {
        hp[i] = 1.0 + 0.1 * static_cast<double>(i);
        hw[i] = 2.0 - 0.05 * static_cast<double>(i);
    }
    const auto fp = face_average(hp, FaceAverageRule::arithmetic());
    REQUIRE(fp.size() == 12);
    for (std::size_t i = 0; i < 12; ++i)
        CHECK(fp[i] == doctest::Approx(0.5 * (hp[i] + hp[(i + 1) % 12])).epsilon(1e-15));

    const auto fw = face_average(hw, FaceAverageRule::arithmetic());
    REQUIRE(fw.size() == 13);
    // Wall faces mirror the boundary cell.
    CHECK(fw.front() == doctest::Approx(hw[0]).epsilon(1e-15));
    CHECK(fw.back() == doctest::Approx(hw[11]).epsilon(1e-15));
    for (std::size_t f = 1; f < 12; ++f)
        CHECK(fw[f] == doctest::Approx(0.5 * (hw[f - 1] + hw[f])).epsilon(1e-15));
}

TEST_CASE("entropic face rule matches the scalar average per face") {
    const Grid1D g(16, 1.0, Topology::Periodic);
    ScalarField h(g);
    for (std::size_t i = 0; i < g.n_cells; ++i)
        h[i] = 1.0 + 0.4 * std::sin(2.0 * kPi * g.x(i));
    const MobilitySpec mob = MobilitySpec::power_law(3.0);
    const auto faces = face_average(h, FaceAverageRule::entropic(mob));
    REQUIRE(faces.size() == 16);
    for (std::size_t i = 0; i < 16; ++i)
        CHECK(faces[i] ==
              doctest::Approx(entropic_face_mobility(h[i], h[(i + 1) % 16], mob))
                  .epsilon(1e-15));
}

TEST_CASE("entropic average equals the harmonic quadrature mean of the mobility") {
    // 1/M = average of 1/F over [a,b]; checked against adaptive quadrature.
    const double a = 0.3, b = 1.7;
    std::vector<MobilitySpec> mobs = {
        MobilitySpec::power_law(0.5), MobilitySpec::power_law(1.0),
        MobilitySpec::power_law(2.0), MobilitySpec::power_law(3.0),
        MobilitySpec::quadratic_cubic()};
    for (const auto& mob : mobs) {
        const double denom =
            quad::integrate([&](double r) { return 1.0 / mob.value(r); }, a, b);
        const double oracle = (b - a) / denom;
        CHECK(entropic_face_mobility(a, b, mob) ==
              doctest::Approx(oracle).epsilon(1e-10));
        CHECK(entropic_face_mobility(b, a, mob) ==
              doctest::Approx(oracle).epsilon(1e-10));
    }
    // n = 1 is the logarithmic mean.
    CHECK(entropic_face_mobility(1.0, 2.0, MobilitySpec::power_law(1.0)) ==
          doctest::Approx(1.0 / std::log(2.0)).epsilon(1e-13));
}

TEST_CASE("entropic average is continuous across the small-jump switch") {
    const MobilitySpec mob = MobilitySpec::power_law(3.0);
    const double a = 0.8;
    CHECK(entropic_face_mobility(a, a, mob) == mob.value(a));
    for (double rel : {1e-10, 3e-9, kEntropicSwitch, 3e-8, 1e-7}) {
        const double b = a * (1.0 + rel);
        const double m = entropic_face_mobility(a, b, mob);
        CHECK(m == doctest::Approx(mob.value(a)).epsilon(1e-6));
    }
}

TEST_CASE("entropic average partials agree with finite differences") {
    auto check_partials = [](double a, double b, const MobilitySpec& mob) {
        double m, da, db;
        entropic_face_mobility_partials(a, b, mob, m, da, db);
        CHECK(m == doctest::Approx(entropic_face_mobility(a, b, mob)).epsilon(1e-14));
        const double d = 1e-6;
        const double fa = (entropic_face_mobility(a + d, b, mob) -
                           entropic_face_mobility(a - d, b, mob)) /
                          (2.0 * d);
        const double fb = (entropic_face_mobility(a, b + d, mob) -
                           entropic_face_mobility(a, b - d, mob)) /
                          (2.0 * d);
        CHECK(da == doctest::Approx(fa).epsilon(2e-5));
        CHECK(db == doctest::Approx(fb).epsilon(2e-5));
    };
    check_partials(0.5, 1.5, MobilitySpec::power_law(3.0));
    check_partials(1.2, 0.4, MobilitySpec::power_law(1.5));
    check_partials(0.7, 1.1, MobilitySpec::quadratic_cubic());

    // Near-equal branch: move both ends together so the jump stays tiny and
    // the sum of partials must match the midpoint-value slope.
    const MobilitySpec mob = MobilitySpec::power_law(3.0);
    const double a = 0.9, b = a * (1.0 + 1e-10);
    double m, da, db;
    entropic_face_mobility_partials(a, b, mob, m, da, db);
    CHECK(da + db == doctest::Approx(mob.derivative(a)).epsilon(1e-6));
}

TEST_CASE("grid mismatch is rejected") {
    const Grid1D a(16, 1.0, Topology::Periodic);
    const Grid1D b(16, 1.0, Topology::Wall);
    CHECK_THROWS_AS(require_same_grid(a, b, "test"), std::invalid_argument);
    CHECK_THROWS_WITH(require_same_grid(a, b, "test"),
                      "test: fields live on different grids");
}
