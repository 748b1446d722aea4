#include "entroflow/ops.hpp"

#include <cmath>

namespace entroflow {

ScalarField dx(const ScalarField& f, WallScheme wall) {
    const std::size_t n = f.size();
    const double d = f.grid.spacing();
    ScalarField out(f.grid);
    if (f.grid.topology == Topology::Periodic) {
        for (std::size_t i = 0; i < n; ++i) {
            const double fm = f[(i + n - 1) % n];
            const double fp = f[(i + 1) % n];
            out[i] = (fp - fm) / (2.0 * d);
        }
        return out;
    }
    for (std::size_t i = 1; i + 1 < n; ++i) out[i] = (f[i + 1] - f[i - 1]) / (2.0 * d);
    if (wall == WallScheme::OneSided) {
        out[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * d);
        out[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * d);
    } else {
        out[0] = (f[1] - f[0]) / (2.0 * d);
        out[n - 1] = (f[n - 1] - f[n - 2]) / (2.0 * d);
    }
    return out;
}

ScalarField dxx(const ScalarField& f, WallScheme wall) {
    const std::size_t n = f.size();
    const double d2 = f.grid.spacing() * f.grid.spacing();
    ScalarField out(f.grid);
    if (f.grid.topology == Topology::Periodic) {
        for (std::size_t i = 0; i < n; ++i) {
            const double fm = f[(i + n - 1) % n];
            const double fp = f[(i + 1) % n];
            out[i] = (fm - 2.0 * f[i] + fp) / d2;
        }
        return out;
    }
    for (std::size_t i = 1; i + 1 < n; ++i)
        out[i] = (f[i - 1] - 2.0 * f[i] + f[i + 1]) / d2;
    if (wall == WallScheme::OneSided) {
        out[0] = (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) / d2;
        out[n - 1] = (2.0 * f[n - 1] - 5.0 * f[n - 2] + 4.0 * f[n - 3] - f[n - 4]) / d2;
    } else {
        out[0] = (f[1] - f[0]) / d2;
        out[n - 1] = (f[n - 2] - f[n - 1]) / d2;
    }
    return out;
}

ScalarField dxxx(const ScalarField& f, WallScheme wall) { return dx(dxx(f, wall), wall); }

double integrate(const ScalarField& f) {
    double s = 0.0;
    for (double v : f.values) s += v;
    return s * f.grid.spacing();
}

double l2_norm(const ScalarField& f) {
    double s = 0.0;
    for (double v : f.values) s += v * v;
    return std::sqrt(s * f.grid.spacing());
}

double linf_norm(const ScalarField& f) {
    double m = 0.0;
    for (double v : f.values) m = std::max(m, std::fabs(v));
    return m;
}

std::size_t face_count(const Grid1D& g) {
    return g.topology == Topology::Periodic ? g.n_cells : g.n_cells + 1;
}

double entropic_face_mobility(double a, double b, const MobilitySpec& mob) {
    const double jump = std::fabs(b - a);
    if (jump > kEntropicSwitch * std::max(std::fabs(a), std::fabs(b))) {
        const double dg = detail::inv_mobility_primitive(mob, b) -
                          detail::inv_mobility_primitive(mob, a);
        return (b - a) / dg;
    }
    return mob.value(0.5 * (a + b));
}

void entropic_face_mobility_partials(double a, double b, const MobilitySpec& mob,
                                     double& m_out, double& da, double& db) {
    const double jump = std::fabs(b - a);
    if (jump > kEntropicSwitch * std::max(std::fabs(a), std::fabs(b))) {
        const double dg = detail::inv_mobility_primitive(mob, b) -
                          detail::inv_mobility_primitive(mob, a);
        m_out = (b - a) / dg;
        da = (-dg + (b - a) / mob.value(a)) / (dg * dg);
        db = (dg - (b - a) / mob.value(b)) / (dg * dg);
    } else {
        const double mid = 0.5 * (a + b);
        m_out = mob.value(mid);
        da = db = 0.5 * mob.derivative(mid);
    }
}

std::vector<double> face_average(const ScalarField& h, const FaceAverageRule& rule) {
    const std::size_t n = h.size();
    std::vector<double> face(face_count(h.grid));
    const bool periodic = h.grid.topology == Topology::Periodic;
    auto one = [&](double a, double b) {
        return rule.kind == FaceAverageRule::Kind::Arithmetic
                   ? 0.5 * (a + b)
                   : entropic_face_mobility(a, b, rule.mobility);
    };
    if (periodic) {
        for (std::size_t i = 0; i < n; ++i) face[i] = one(h[i], h[(i + 1) % n]);
    } else {
        face[0] = one(h[0], h[0]);
        for (std::size_t i = 0; i + 1 < n; ++i) face[i + 1] = one(h[i], h[i + 1]);
        face[n] = one(h[n - 1], h[n - 1]);
    }
    return face;
}

}  // namespace entroflow
