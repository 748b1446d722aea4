#pragma once

#include <array>
#include <string>
#include <vector>

#include "entroflow/scenario.hpp"

namespace entroflow {

enum class ErrorNorm { L2, H1, Linf };

const char* norm_name(ErrorNorm n);

// Relaxation sweep: one reference lubrication run, one shallow-water run per
// eps, errors measured on h at compare_time.
struct SweepSpec {
    Scenario base;
    std::vector<double> eps_values{1e-1, 1e-2, 1e-3, 1e-4};
    std::vector<ErrorNorm> norms{ErrorNorm::L2};
    double compare_time = 0.0;  // <= 0 means base.t_end

    // Sorts eps descending and validates positivity/uniqueness, so reversed
    // input produces the same report.
    void canonicalize();
};

// Last recorded ledger row, in csv column order; carried per report row so
// every balance audit can be reproduced from the report alone.
struct LedgerEndpoint {
    std::array<double, 14> values{};
};

LedgerEndpoint ledger_endpoint(const BalanceLedger& ledger);

struct ReportRow {
    double parameter = 0.0;  // eps, grid spacing, or floor
    std::vector<double> errors;
    double bd_combined = 0.0;
    double bf_limit = 0.0;
    double entropy_gap = 0.0;  // |bd_combined - bf_limit|
    LedgerEndpoint endpoint;
    bool failed = false;
    std::string failure;
};

struct ConvergenceReport {
    std::vector<ErrorNorm> norms;
    std::vector<ReportRow> rows;
    std::vector<double> fitted_rates;  // log-log least squares per norm
    LedgerEndpoint reference_endpoint;
};

// Runs execute concurrently up to the worker count; failed runs leave marked
// rows rather than aborting the sweep. Throws std::invalid_argument for
// configuration errors (wrong system, broken coupling, compare_time beyond
// t_end).
ConvergenceReport relaxation_study(const SweepSpec& spec, int workers = 1);

enum class RefinementMode { SelfConvergence, Manufactured };

struct RefinementOptions {
    int levels = 4;
    RefinementMode mode = RefinementMode::SelfConvergence;
    // dt_max at level l is scaled by (dx_l / dx_0)^dt_exponent; 1 resolves the
    // first-order-in-time balance residuals, 2 lets manufactured runs expose
    // the spatial order.
    double dt_exponent = 1.0;
    std::vector<ErrorNorm> norms{ErrorNorm::L2};
};

// Dyadic spacing refinement at fixed final time for the lubrication and
// shallow-water systems. Self-convergence compares against the finest level
// (restriction: index injection on periodic grids, cell averaging on wall
// grids); Manufactured forces the lubrication equation so the exact solution
// is known.
ConvergenceReport refinement_study(const Scenario& scenario,
                                   const RefinementOptions& opts = {});

struct FloorRow {
    double floor = 0.0;
    double min_h_final = 0.0, min_h_overall = 0.0;
    double bf_delta = 0.0;    // bf(T) - bf(0)
    double mass_drift = 0.0;  // relative
    LedgerEndpoint endpoint;
    bool failed = false;
    std::string failure;
};

struct FloorReport {
    std::vector<FloorRow> rows;
};

// Reruns the scenario at each positivity floor (descending), recording minima
// and entropy growth; per-floor failures are recorded, not fatal.
FloorReport floor_sweep(const Scenario& scenario, std::vector<double> floors);

// Least squares slope of log y against log x; ignores nonpositive pairs.
double fitted_rate(const std::vector<double>& xs, const std::vector<double>& ys);

// Forced smooth verification solution 1 + 0.1 e^{-t} cos(2 pi x / L) and the
// source that makes it solve the lubrication equation exactly.
ScalarField manufactured_solution(const Grid1D& grid, double t);
SourceFn manufactured_source(const LubricationParams& p, double length);

std::string convergence_report_csv(const ConvergenceReport& report);
std::string convergence_report_json(const ConvergenceReport& report,
                                    const std::string& scenario_tag);
std::string floor_report_csv(const FloorReport& report);

}  // namespace entroflow
