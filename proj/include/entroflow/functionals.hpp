#pragma once

#include <optional>
#include <vector>

#include "entroflow/grid.hpp"
#include "entroflow/mobility.hpp"
#include "entroflow/ops.hpp"

namespace entroflow {

// Parameters of the lubrication equation
//   dt h + dx( F(h)/(alpha We) dxxx h - D(h)/(alpha Fr^2) dx h ) = 0
// with F the mobility and D(h) = h^(m-1) the drift weight.
struct LubricationParams {
    double alpha = 1.0;
    double we = 1.0;
    double fr = 1.0;
    MobilitySpec mobility = MobilitySpec::power_law(3.0);
    double m = 1.5;
    double cap_a = 2.0;
    bool check_existence_range = false;  // enforce 1 < m < 2 when set

    void validate() const;
};

// Parameters of the viscous shallow-water system with drag,
//   dt h + dx(h u) = 0
//   eps(dt(h u) + dx(h u^2)) + h^beta dx h / Fr^2
//     = eps nu_c dx(h dx u) + c_cap h dxxx h - alpha h^2 u / F(h).
struct ShallowWaterParams {
    double alpha = 1.0;
    double re = 1.0;
    double we = 1.0;
    double fr = 1.0;
    double eps = 1e-2;
    MobilitySpec mobility = MobilitySpec::power_law(2.0);  // drag weight F
    double beta = 1.0;
    std::optional<double> viscous_coeff;    // nu_c, defaults to 4/Re
    std::optional<double> capillary_coeff;  // c_cap, defaults to 1/We
    double cap_a = 2.0;
    bool check_coupling = false;  // enforce beta + n in (1, 2) when set

    double nu_c() const { return viscous_coeff.value_or(4.0 / re); }
    double c_cap() const { return capillary_coeff.value_or(1.0 / we); }

    void validate() const;

    // The lubrication system this one relaxes onto as eps -> 0: same F,
    // m = beta + n.
    LubricationParams relaxation_limit() const;
};

// Pressure potential; the beta = 1 branch and the general formula coincide
// there.
inline double potential_density(double h, double beta, double fr) {
    if (beta == 1.0) return h * h / (2.0 * fr * fr);
    return std::pow(h, beta + 1.0) / (fr * fr * beta * (beta + 1.0));
}

enum class BdForm { Raw, EnergyCombined };
enum class BfScaling { WithAlpha, NoAlpha };

double energy_lubrication(const ScalarField& h, const LubricationParams& p);
double energy_shallow_water(const ScalarField& h, const ScalarField& u,
                            const ShallowWaterParams& p);

// u + nu_c dx(log h); dx acts on the field of pointwise logs.
ScalarField bd_velocity(const ScalarField& h, const ScalarField& u,
                        const ShallowWaterParams& p);

double bd_entropy(const ScalarField& h, const ScalarField& u,
                  const ShallowWaterParams& p, BdForm form);

double bf_entropy(const ScalarField& h, const MobilitySpec& mob, double cap_a);
double bf_entropy(const ScalarField& h, const LubricationParams& p);
double bf_entropy(const ScalarField& h, const ShallowWaterParams& p);

// integrate( (dxx h)^2/(alpha We) + h^(m-1)/F(h) (dx h)^2/(alpha Fr^2) );
// NoAlpha drops both 1/alpha factors.
double bf_dissipation_rate(const ScalarField& h, const LubricationParams& p,
                           BfScaling scaling = BfScaling::WithAlpha);

double energy_dissipation_rate_sw(const ScalarField& h, const ScalarField& u,
                                  const ShallowWaterParams& p);
double energy_dissipation_rate_lub(const ScalarField& h, const LubricationParams& p);

// nu_c [ integrate(h^(beta-1) (dx h)^2)/Fr^2 + c_cap integrate((dxx h)^2) ],
// the dissipation specific to the BD identity beyond drag.
double bd_dissipation_specific(const ScalarField& h, const ShallowWaterParams& p);

// integrate(h u dx(h) / F(h)), the instantaneous form of the coupling term
// whose time integral telescopes to the entropy difference.
double term_x_rate(const ScalarField& h, const ScalarField& u,
                   const ShallowWaterParams& p);

// Time history of the balance audit. One row per recorded step; accumulated
// dissipation entries use trapezoidal quadrature of the per-step rates and are
// advanced every accepted step regardless of the recording cadence.
struct BalanceLedger {
    std::vector<double> time, mass, energy, bd_raw, bd_combined, bf, min_h,
        diss_energy_acc, diss_bf_acc, diss_bd_acc, residual_energy, residual_bf,
        residual_bd, residual_term_x;

    std::size_t rows() const { return time.size(); }
    static const char* csv_header();
};

}  // namespace entroflow
