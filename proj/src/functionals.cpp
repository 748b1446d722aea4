#include "entroflow/functionals.hpp"

#include <cmath>
#include <stdexcept>

#include "entroflow/lubrication.hpp"

namespace entroflow {

void LubricationParams::validate() const {
    if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
    if (!(we > 0.0)) throw std::invalid_argument("we must be positive");
    if (!(fr > 0.0)) throw std::invalid_argument("fr must be positive");
    if (!(cap_a > 0.0)) throw std::invalid_argument("cap_a must be positive");
    if (check_existence_range && !(m > 1.0 && m < 2.0))
        throw std::invalid_argument("m must lie in (1, 2) for the existence regime");
}

void ShallowWaterParams::validate() const {
    if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
    if (!(re > 0.0)) throw std::invalid_argument("re must be positive");
    if (!(we > 0.0)) throw std::invalid_argument("we must be positive");
    if (!(fr > 0.0)) throw std::invalid_argument("fr must be positive");
    if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
    if (!(beta > 0.0)) throw std::invalid_argument("beta must be positive");
    if (!(cap_a > 0.0)) throw std::invalid_argument("cap_a must be positive");
    if (check_coupling) {
        if (mobility.kind != MobilitySpec::Kind::PowerLaw)
            throw std::invalid_argument("coupling check requires a power-law mobility");
        const double s = beta + mobility.n;
        if (!(s > 1.0 && s < 2.0))
            throw std::invalid_argument("beta + n must lie in (1, 2); got " +
                                        std::to_string(s));
    }
}

LubricationParams ShallowWaterParams::relaxation_limit() const {
    if (mobility.kind != MobilitySpec::Kind::PowerLaw)
        throw std::invalid_argument(
            "relaxation limit is defined for power-law mobilities only");
    LubricationParams lp;
    lp.alpha = alpha;
    lp.we = we;
    lp.fr = fr;
    lp.mobility = mobility;
    lp.m = beta + mobility.n;
    lp.cap_a = cap_a;
    return lp;
}

namespace {

void require_positive(const ScalarField& h, const char* what) {
    if (!(h.min() > 0.0))
        throw std::domain_error(std::string(what) + ": field must be positive");
}

WallScheme wall_scheme_for(const Grid1D& g) {
    // Solvers on Wall grids enforce homogeneous Neumann data, so functional
    // evaluation mirrors across the walls.
    return g.topology == Topology::Wall ? WallScheme::NeumannMirror
                                        : WallScheme::OneSided;
}

}  // namespace

double energy_lubrication(const ScalarField& h, const LubricationParams& p) {
    require_positive(h, "energy_lubrication");
    const ScalarField hx = dx(h, wall_scheme_for(h.grid));
    double s = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i)
        s += h[i] * h[i] / (p.fr * p.fr) + hx[i] * hx[i] / p.we;
    return 0.5 * s * h.grid.spacing();
}

double energy_shallow_water(const ScalarField& h, const ScalarField& u,
                            const ShallowWaterParams& p) {
    require_positive(h, "energy_shallow_water");
    require_same_grid(h, u, "energy_shallow_water");
    const ScalarField hx = dx(h, wall_scheme_for(h.grid));
    double s = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i)
        s += 0.5 * p.eps * h[i] * u[i] * u[i] + potential_density(h[i], p.beta, p.fr) +
             0.5 * p.c_cap() * hx[i] * hx[i];
    return s * h.grid.spacing();
}

ScalarField bd_velocity(const ScalarField& h, const ScalarField& u,
                        const ShallowWaterParams& p) {
    require_positive(h, "bd_velocity");
    require_same_grid(h, u, "bd_velocity");
    ScalarField logs(h.grid);
    for (std::size_t i = 0; i < h.size(); ++i) logs[i] = std::log(h[i]);
    ScalarField v = dx(logs, wall_scheme_for(h.grid));
    const double nu = p.nu_c();
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = u[i] + nu * v[i];
    return v;
}

double bd_entropy(const ScalarField& h, const ScalarField& u,
                  const ShallowWaterParams& p, BdForm form) {
    const ScalarField v = bd_velocity(h, u, p);
    const double d = h.grid.spacing();
    if (form == BdForm::Raw) {
        double s = 0.0;
        const ScalarField hx = dx(h, wall_scheme_for(h.grid));
        for (std::size_t i = 0; i < h.size(); ++i)
            s += 0.5 * p.eps * h[i] * v[i] * v[i] +
                 potential_density(h[i], p.beta, p.fr) +
                 0.5 * p.c_cap() * hx[i] * hx[i];
        return s * d;
    }
    double s = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i)
        s += 0.5 * p.eps * h[i] * (v[i] * v[i] - u[i] * u[i]);
    return s * d + p.nu_c() * p.alpha * bf_entropy(h, p.mobility, p.cap_a);
}

double bf_entropy(const ScalarField& h, const MobilitySpec& mob, double cap_a) {
    require_positive(h, "bf_entropy");
    if (h.max() > cap_a)
        throw std::domain_error("bf_entropy: cap_a must dominate the field maximum");
    double s = 0.0;
    for (double v : h.values) s += entropy_density(v, mob, cap_a);
    return s * h.grid.spacing();
}

double bf_entropy(const ScalarField& h, const LubricationParams& p) {
    return bf_entropy(h, p.mobility, p.cap_a);
}

double bf_entropy(const ScalarField& h, const ShallowWaterParams& p) {
    return bf_entropy(h, p.mobility, p.cap_a);
}

double bf_dissipation_rate(const ScalarField& h, const LubricationParams& p,
                           BfScaling scaling) {
    require_positive(h, "bf_dissipation_rate");
    const WallScheme ws = wall_scheme_for(h.grid);
    const ScalarField hx = dx(h, ws);
    const ScalarField hxx = dxx(h, ws);
    const double ca = scaling == BfScaling::WithAlpha ? p.alpha : 1.0;
    double s = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) {
        const double drift_weight = std::pow(h[i], p.m - 1.0) / p.mobility.value(h[i]);
        s += hxx[i] * hxx[i] / (ca * p.we) +
             drift_weight * hx[i] * hx[i] / (ca * p.fr * p.fr);
    }
    return s * h.grid.spacing();
}

double energy_dissipation_rate_sw(const ScalarField& h, const ScalarField& u,
                                  const ShallowWaterParams& p) {
    require_positive(h, "energy_dissipation_rate_sw");
    require_same_grid(h, u, "energy_dissipation_rate_sw");
    const ScalarField ux = dx(u, wall_scheme_for(h.grid));
    double s = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i)
        s += p.eps * p.nu_c() * h[i] * ux[i] * ux[i] +
             p.alpha * h[i] * h[i] * u[i] * u[i] / p.mobility.value(h[i]);
    return s * h.grid.spacing();
}

double energy_dissipation_rate_lub(const ScalarField& h, const LubricationParams& p) {
    require_positive(h, "energy_dissipation_rate_lub");
    // alpha * integrate(q^2 / F(h)) with the flux q = h u of the solver
    // discretization, evaluated at faces.
    const std::vector<double> q = lubrication_flux(h, p);
    const std::vector<double> hf = face_average(h, FaceAverageRule::arithmetic());
    double s = 0.0;
    for (std::size_t f = 0; f < q.size(); ++f)
        s += q[f] * q[f] / p.mobility.value(hf[f]);
    return p.alpha * s * h.grid.spacing();
}

double bd_dissipation_specific(const ScalarField& h, const ShallowWaterParams& p) {
    require_positive(h, "bd_dissipation_specific");
    const WallScheme ws = wall_scheme_for(h.grid);
    const ScalarField hx = dx(h, ws);
    const ScalarField hxx = dxx(h, ws);
    double s = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i)
        s += std::pow(h[i], p.beta - 1.0) * hx[i] * hx[i] / (p.fr * p.fr) +
             p.c_cap() * hxx[i] * hxx[i];
    return p.nu_c() * s * h.grid.spacing();
}

double term_x_rate(const ScalarField& h, const ScalarField& u,
                   const ShallowWaterParams& p) {
    require_positive(h, "term_x_rate");
    require_same_grid(h, u, "term_x_rate");
    const ScalarField hx = dx(h, wall_scheme_for(h.grid));
    double s = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i)
        s += h[i] * u[i] * hx[i] / p.mobility.value(h[i]);
    return s * h.grid.spacing();
}

const char* BalanceLedger::csv_header() {
    return "time, mass, energy, bd_raw, bd_combined, bf, min_h, diss_energy_acc, "
           "diss_bf_acc, diss_bd_acc, residual_energy, residual_bf, residual_bd, "
           "residual_termX";
}

}  // namespace entroflow
