#pragma once

#include <functional>
#include <string>
#include <vector>

#include "entroflow/functionals.hpp"
#include "entroflow/grid.hpp"
#include "entroflow/linalg.hpp"

namespace entroflow {

struct TimeStepper {
    double dt_init = 1e-4;
    double dt_min = 1e-13;
    double dt_max = 1e-2;
    double newton_tol = 1e-10;
    int newton_max_iter = 16;
    double safety = 0.5;  // rejected steps halve dt, successes grow it by 1/safety

    void validate() const;
};

struct LubricationState {
    ScalarField h;
    double t = 0.0;
    double dt = 0.0;  // 0 means "use dt_init"
};

// Optional manufactured-solution forcing added to the right-hand side.
using SourceFn = std::function<double(double x, double t)>;

struct StepFailure : NumericalError {
    StepFailure(const std::string& msg, double t, double dt, double min_h,
                double newton_residual)
        : NumericalError(msg + " (t=" + std::to_string(t) +
                         ", dt=" + std::to_string(dt) +
                         ", min_h=" + std::to_string(min_h) +
                         ", newton_residual=" + std::to_string(newton_residual) + ")"),
          t(t), dt(dt), min_h(min_h), newton_residual(newton_residual) {}
    double t, dt, min_h, newton_residual;
};

// Staggered flux q_f = M_f/(alpha We) * d3h_f - D_f/(alpha Fr^2) * dh_f/dx
// with the entropic mobility average M, the arithmetic average D of h^(m-1),
// and the face third difference built from cell second differences. Periodic
// grids return n faces; Wall grids return n+1 with zero wall fluxes.
std::vector<double> lubrication_flux(const ScalarField& h, const LubricationParams& p);

struct StepStats {
    int newton_iters = 0;
    int retries = 0;
    double dt_used = 0.0;
    double residual = 0.0;
};

// One adaptive implicit Euler step; rejects and halves dt on Newton failure
// or loss of positivity, throws StepFailure below dt_min.
StepStats lubrication_step(LubricationState& state, const LubricationParams& p,
                           const TimeStepper& ts, const SourceFn& source = nullptr);

struct RunOptions {
    int record_every = 1;
    double h_floor = -1.0;  // < 0 means the default 1e-6 * mean(h0)
    SourceFn source;
};

struct LubricationRun {
    LubricationState state;
    BalanceLedger ledger;
    long accepted = 0;
    long rejected = 0;
    bool floor_touched = false;
    double min_h_overall = 0.0;
    double h_floor = 0.0;
};

LubricationRun lubrication_run(ScalarField h0, double t_end,
                               const LubricationParams& p, const TimeStepper& ts,
                               const RunOptions& opts = {});

}  // namespace entroflow
