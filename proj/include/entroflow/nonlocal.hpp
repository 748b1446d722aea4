#pragma once

#include <cstddef>
#include <vector>

#include "entroflow/functionals.hpp"
#include "entroflow/grid.hpp"
#include "entroflow/lubrication.hpp"
#include "entroflow/shallow_water.hpp"

namespace entroflow {

// Singular interaction kernel on (0,1): a diagonal part in x-y plus an image
// part in x+y, both with inverse-square blowup. Throws std::domain_error off
// the open square or on the singular sets.
double nu(double x, double y);

// Dense quadrature discretization of the operator I(h) = integral of
// (h(y)-h(x)) nu(x,y) dy over (0,1). Row i holds the weights of a
// difference-form rule at cell center x_i; the diagonal cell is excluded and
// replaced by a curvature correction (the odd part of the singularity cancels
// in principal value, the even part integrates to dx/(2*pi) times dxx h).
// The resulting matrix is symmetric, annihilates constants, and is negative
// semidefinite. Immutable after construction and safe to share across threads.
class NonlocalKernel {
  public:
    explicit NonlocalKernel(const Grid1D& grid);

    const Grid1D& grid() const { return grid_; }
    std::size_t size() const { return grid_.n_cells; }
    // Matrix entry: apply(h)[i] = sum_j weight(i,j) h[j].
    double weight(std::size_t i, std::size_t j) const {
        return weights_[i * grid_.n_cells + j];
    }

    ScalarField apply(const ScalarField& h) const;
    ScalarField apply_serial(const ScalarField& h) const;
    // Independent application path: expand h in the discrete cosine basis,
    // scale each mode by its measured eigenvalue, resum. The cosine vectors
    // diagonalize both the difference rule (even extension makes it circulant
    // on a doubled staggered lattice) and the curvature correction, so this
    // agrees with the dense product to rounding.
    ScalarField apply_spectral(const ScalarField& h) const;

    // Rayleigh quotients over the cosine modes m = 0..n-1.
    const std::vector<double>& eigenvalues() const { return eigenvalues_; }
    // max |W[i][j] - W[j][i]|
    double symmetry_defect() const;
    // integral of apply(h)*h, nonpositive for every h
    double quadratic_form(const ScalarField& h) const;

  private:
    Grid1D grid_;
    std::vector<double> weights_;
    std::vector<double> eigenvalues_;
};

ScalarField apply_I(const NonlocalKernel& kernel, const ScalarField& h);

// One implicit Euler step of the electrified thin-film equation
//   dt h + dx(h^3 dx(dxx h - I(h))) = 0 on (0,1)
// with zero-flux and homogeneous Neumann walls. Entropic face mobility for
// F = h^3; dense Newton (the nonlocal pressure couples all cells).
StepStats electrified_step(const NonlocalKernel& kernel, LubricationState& state,
                           const TimeStepper& ts);

struct ElectrifiedRun {
    LubricationState state;
    BalanceLedger ledger;
    long accepted = 0;
    long rejected = 0;
    double min_h_overall = 0.0;
};

struct ElectrifiedRunOptions {
    long record_every = 1;
    double cap_a = -1.0;  // <0: 2 * max h0
};

// Ledger conventions for this system: the energy column monitors
// (1/2)|dx h|^2 - (1/2) int I(h) h, while residual_energy audits the actual
// Lyapunov functional of the flow, (1/2)|dx h|^2 + (1/2) int h I(h), against
// the accumulated flux dissipation. BD columns are zero (no velocity field);
// the bf column is the entropy value for F = h^3 with residual_bf unused.
ElectrifiedRun electrified_run(const NonlocalKernel& kernel, ScalarField h0,
                               double t_end, const TimeStepper& ts,
                               const ElectrifiedRunOptions& opts = {});

// Energy functionals for the electrified system.
double energy_electrified(const NonlocalKernel& kernel, const ScalarField& h);
double lyapunov_electrified(const NonlocalKernel& kernel, const ScalarField& h);

// Staggered IMEX step for the shallow-water system with nonlocal forcing
//   dt h + dx(h u) = 0
//   eps(dt(hu) + dx(h u^2)) + h dx I(h) = eps dx(h dx u) + h dxxx h - alpha u/h
// on a wall grid of length 1 with u = 0 and dx h = 0 at the walls. The
// nonlocal force is explicit; capillarity is implicit through the mass
// substitution as in sw_step; drag uses the fitted theta weight with F = h^3.
// Params: eps and alpha are read from p; viscous and capillary coefficients
// are fixed to 1 and the gravity pressure is absent.
SwStepStats swnl_step(const NonlocalKernel& kernel, ShallowWaterState& state,
                      const ShallowWaterParams& p, const TimeStepper& ts,
                      double dt_target);

struct SwnlRun {
    ShallowWaterState state;
    BalanceLedger ledger;
    long accepted = 0;
    long rejected = 0;
    double min_h_overall = 0.0;
};

// Energy column: (eps/2) int h u^2 + (1/2)|dx h|^2 + (1/2) int h I(h), the
// Lyapunov functional of the system; diss_energy_acc accumulates viscous plus
// drag dissipation. BD/term-X residual columns are not audited here (zero).
SwnlRun swnl_run(const NonlocalKernel& kernel, ScalarField h0,
                 std::vector<double> u0, double t_end,
                 const ShallowWaterParams& p, const TimeStepper& ts,
                 long record_every = 1);

}  // namespace entroflow
