#pragma once

#include <vector>

#include "entroflow/functionals.hpp"
#include "entroflow/grid.hpp"
#include "entroflow/lubrication.hpp"

namespace entroflow {

// Staggered state: h at cell centers, u at faces (face f between cells f and
// f+1 on periodic grids).
struct ShallowWaterState {
    ScalarField h;
    std::vector<double> u;
    double t = 0.0;
};

enum class MassFluxScheme { Centered, Upwind };

struct SwStepOptions {
    MassFluxScheme mass_flux = MassFluxScheme::Centered;
};

struct SwStepStats {
    double dt_used = 0.0;
    double max_speed = 0.0;  // max |u| + gravity wave speed over faces
    int retries = 0;
};

// One IMEX step: explicit upwind momentum advection and flux-form pressure,
// implicit (linear in u) viscosity and capillarity, the latter through one
// substitution of the new-time mass update; drag uses the exponentially
// fitted theta weight so a pure drag decay is reproduced exactly per step.
// dt is limited by the advective/gravity CFL with ts.safety.
SwStepStats sw_step(ShallowWaterState& state, const ShallowWaterParams& p,
                    const TimeStepper& ts, double dt_target,
                    const SwStepOptions& opts = {});

// Face velocities averaged back to cells for functional evaluation.
ScalarField cell_velocity(const ScalarField& h, const std::vector<double>& u);

// Face velocity of the relaxed (lubrication) balance, u = q/h at faces; used
// for "prepared" initial momentum.
std::vector<double> sw_prepared_velocity(const ScalarField& h0,
                                         const ShallowWaterParams& p);

struct SwRunOptions {
    int record_every = 1;
    MassFluxScheme mass_flux = MassFluxScheme::Centered;
};

struct SwRun {
    ShallowWaterState state;
    BalanceLedger ledger;
    long accepted = 0;
    long rejected = 0;
    double min_h_overall = 0.0;
};

SwRun sw_run(ScalarField h0, std::vector<double> u0, double t_end,
             const ShallowWaterParams& p, const TimeStepper& ts,
             const SwRunOptions& opts = {});

struct TermXAudit {
    double delta_entropy = 0.0;  // bf(T) - bf(0)
    double x_integral = 0.0;     // time quadrature of term_x_rate
    double residual = 0.0;
};

TermXAudit term_X_audit(const BalanceLedger& ledger);

// Exponentially fitted theta weight: the theta-scheme amplification
// (1-(1-theta)x)/(1+theta*x) equals exp(-x); theta(0+) = 1/2, theta(inf) = 1.
double drag_theta(double x);

}  // namespace entroflow
