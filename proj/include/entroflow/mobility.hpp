#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace entroflow {

// Mobility F(h): either the power law h^n or the quadratic-cubic drag weight
// h^2 + h^3. All entropy-related quantities below are closed forms; the
// epsilon-regularized variants used as test oracles live with the tests and go
// through quadrature only.
struct MobilitySpec {
    enum class Kind { PowerLaw, QuadraticCubic };

    Kind kind = Kind::PowerLaw;
    double n = 3.0;  // exponent, PowerLaw only

    static MobilitySpec power_law(double n) {
        if (!(n >= 0.0)) throw std::invalid_argument("MobilitySpec: n must be >= 0");
        return MobilitySpec{Kind::PowerLaw, n};
    }
    static MobilitySpec quadratic_cubic() {
        return MobilitySpec{Kind::QuadraticCubic, 0.0};
    }

    double value(double h) const {
        return kind == Kind::PowerLaw ? std::pow(h, n) : h * h * (1.0 + h);
    }
    double derivative(double h) const {
        return kind == Kind::PowerLaw ? n * std::pow(h, n - 1.0) : h * (2.0 + 3.0 * h);
    }

    bool operator==(const MobilitySpec& o) const {
        return kind == o.kind && (kind == Kind::QuadraticCubic || n == o.n);
    }
};

namespace detail {

// Antiderivative of 1/F, base point free; only differences of it are used, so
// the integration constant is irrelevant.
inline double inv_mobility_primitive(const MobilitySpec& mob, double s) {
    if (!(s > 0.0))
        throw std::domain_error("inv_mobility_primitive: argument must be positive");
    if (mob.kind == MobilitySpec::Kind::QuadraticCubic)
        return std::log((1.0 + s) / s) - 1.0 / s;
    if (mob.n == 1.0) return std::log(s);
    return std::pow(s, 1.0 - mob.n) / (1.0 - mob.n);
}

// Antiderivative of inv_mobility_primitive.
inline double inv_mobility_primitive2(const MobilitySpec& mob, double s) {
    if (!(s > 0.0))
        throw std::domain_error("inv_mobility_primitive2: argument must be positive");
    if (mob.kind == MobilitySpec::Kind::QuadraticCubic)
        return (1.0 + s) * (std::log1p(s) - std::log(s));
    if (mob.n == 1.0) return s * std::log(s) - s;
    if (mob.n == 2.0) return -std::log(s);
    return std::pow(s, 2.0 - mob.n) / ((1.0 - mob.n) * (2.0 - mob.n));
}

}  // namespace detail

// Derivative of the entropy density: g(s) = -int_s^A dr/F(r). Increasing,
// vanishes at s = cap_a.
inline double entropy_derivative(double s, const MobilitySpec& mob, double cap_a) {
    if (!(cap_a > 0.0)) throw std::invalid_argument("entropy_derivative: cap_a must be positive");
    return detail::inv_mobility_primitive(mob, s) - detail::inv_mobility_primitive(mob, cap_a);
}

// Entropy density G(s) = -int_s^A g(r) dr, the convex function with
// G'' = 1/F, G(cap_a) = G'(cap_a) = 0.
inline double entropy_density(double s, const MobilitySpec& mob, double cap_a) {
    if (!(cap_a > 0.0)) throw std::invalid_argument("entropy_density: cap_a must be positive");
    const double pa = detail::inv_mobility_primitive(mob, cap_a);
    return detail::inv_mobility_primitive2(mob, s) -
           detail::inv_mobility_primitive2(mob, cap_a) - pa * (s - cap_a);
}

}  // namespace entroflow
