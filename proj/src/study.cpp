#include "entroflow/study.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "json.hpp"

#include "entroflow/io.hpp"
#include "entroflow/ops.hpp"
#include "entroflow/shallow_water.hpp"

namespace entroflow {

const char* norm_name(ErrorNorm n) {
    switch (n) {
        case ErrorNorm::L2: return "l2";
        case ErrorNorm::H1: return "h1";
        case ErrorNorm::Linf: return "linf";
    }
    return "?";
}

namespace {

const char* kEndpointNames[14] = {
    "time",          "mass",          "energy",          "bd_raw",
    "bd_combined",   "bf",            "min_h",           "diss_energy_acc",
    "diss_bf_acc",   "diss_bd_acc",   "residual_energy", "residual_bf",
    "residual_bd",   "residual_termX"};

double error_norm(const ScalarField& a, const ScalarField& b, ErrorNorm n) {
    require_same_grid(a, b, "error_norm");
    ScalarField diff = a;
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] -= b[i];
    switch (n) {
        case ErrorNorm::L2: return l2_norm(diff);
        case ErrorNorm::Linf: return linf_norm(diff);
        case ErrorNorm::H1: return l2_norm(dx(diff, WallScheme::OneSided));
    }
    return 0.0;
}

constexpr int kLedgerLean = 1 << 30;  // record only start and final rows

}  // namespace

LedgerEndpoint ledger_endpoint(const BalanceLedger& lg) {
    LedgerEndpoint e;
    if (lg.rows() == 0) return e;
    const std::size_t i = lg.rows() - 1;
    e.values = {lg.time[i],          lg.mass[i],        lg.energy[i],
                lg.bd_raw[i],        lg.bd_combined[i], lg.bf[i],
                lg.min_h[i],         lg.diss_energy_acc[i], lg.diss_bf_acc[i],
                lg.diss_bd_acc[i],   lg.residual_energy[i], lg.residual_bf[i],
                lg.residual_bd[i],   lg.residual_term_x[i]};
    return e;
}

void SweepSpec::canonicalize() {
    for (double v : eps_values)
        if (!(v > 0.0))
            throw std::invalid_argument("eps values must be positive");
    std::sort(eps_values.begin(), eps_values.end(), std::greater<>());
    for (std::size_t i = 0; i + 1 < eps_values.size(); ++i)
        if (eps_values[i] == eps_values[i + 1])
            throw std::invalid_argument("eps values must be distinct");
    if (eps_values.empty())
        throw std::invalid_argument("eps values must not be empty");
    if (norms.empty()) norms = {ErrorNorm::L2};
}

double fitted_rate(const std::vector<double>& xs, const std::vector<double>& ys) {
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < xs.size() && i < ys.size(); ++i)
        if (xs[i] > 0.0 && ys[i] > 0.0) {
            lx.push_back(std::log(xs[i]));
            ly.push_back(std::log(ys[i]));
        }
    if (lx.size() < 2) return 0.0;
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= static_cast<double>(lx.size());
    my /= static_cast<double>(lx.size());
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        num += (lx[i] - mx) * (ly[i] - my);
        den += (lx[i] - mx) * (lx[i] - mx);
    }
    return den > 0.0 ? num / den : 0.0;
}

ConvergenceReport relaxation_study(const SweepSpec& spec_in, int workers) {
    SweepSpec spec = spec_in;
    spec.canonicalize();
    if (spec.base.system != SystemKind::ShallowWater)
        throw std::invalid_argument(
            "relaxation study requires a shallow-water base scenario");
    const ShallowWaterParams base_p = spec.base.shallow_water_params();
    base_p.validate();
    if (base_p.mobility.kind != MobilitySpec::Kind::PowerLaw)
        throw std::invalid_argument(
            "relaxation limit is defined for power-law mobilities only");
    const double coupling = base_p.beta + base_p.mobility.n;
    if (!(coupling > 1.0 && coupling < 2.0))
        throw std::invalid_argument("beta + n must lie in (1, 2); got " +
                                    std::to_string(coupling));
    const double T = spec.compare_time > 0.0 ? spec.compare_time : spec.base.t_end;
    if (T > spec.base.t_end * (1.0 + 1e-12))
        throw std::invalid_argument("compare_time must not exceed t_end");

    const ScalarField h0 = spec.base.build_initial_h();
    const std::vector<double> u0 = spec.base.build_initial_u();
    const TimeStepper ts = spec.base.time_stepper;

    RunOptions ref_opts;
    ref_opts.record_every = kLedgerLean;
    const LubricationRun ref =
        lubrication_run(h0, T, base_p.relaxation_limit(), ts, ref_opts);

    ConvergenceReport rep;
    rep.norms = spec.norms;
    rep.reference_endpoint = ledger_endpoint(ref.ledger);
    const ScalarField& href = ref.state.h;
    const double bf_ref = ref.ledger.bf.back();

    const std::size_t count = spec.eps_values.size();
    rep.rows.assign(count, ReportRow{});
    const int nthreads = std::max(1, workers);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 1) num_threads(nthreads)
#endif
    for (std::size_t idx = 0; idx < count; ++idx) {
        ReportRow row;
        row.parameter = spec.eps_values[idx];
        try {
            ShallowWaterParams pe = base_p;
            pe.eps = spec.eps_values[idx];
            SwRunOptions opts;
            opts.record_every = kLedgerLean;
            const SwRun run = sw_run(h0, u0, T, pe, ts, opts);
            for (ErrorNorm n : spec.norms)
                row.errors.push_back(error_norm(run.state.h, href, n));
            row.bd_combined = run.ledger.bd_combined.back();
            row.bf_limit = bf_ref;
            row.entropy_gap = std::fabs(row.bd_combined - bf_ref);
            row.endpoint = ledger_endpoint(run.ledger);
        } catch (const std::exception& ex) {
            row.failed = true;
            row.failure = ex.what();
            row.errors.assign(spec.norms.size(), 0.0);
        }
        rep.rows[idx] = std::move(row);
    }
    (void)nthreads;

    for (std::size_t n = 0; n < spec.norms.size(); ++n) {
        std::vector<double> xs, ys;
        for (const ReportRow& r : rep.rows)
            if (!r.failed) {
                xs.push_back(r.parameter);
                ys.push_back(r.errors[n]);
            }
        rep.fitted_rates.push_back(fitted_rate(xs, ys));
    }
    return rep;
}

ScalarField manufactured_solution(const Grid1D& grid, double t) {
    ScalarField h(grid);
    const double k = 2.0 * std::numbers::pi / grid.length;
    const double c = 0.1 * std::exp(-t);
    for (std::size_t i = 0; i < grid.n_cells; ++i)
        h[i] = 1.0 + c * std::cos(k * grid.x(i));
    return h;
}

SourceFn manufactured_source(const LubricationParams& p, double length) {
    const double k = 2.0 * std::numbers::pi / length;
    const MobilitySpec mob = p.mobility;
    const double m = p.m;
    const double cw = 1.0 / (p.alpha * p.we);
    const double cf = 1.0 / (p.alpha * p.fr * p.fr);
    return [=](double x, double t) {
        const double c = 0.1 * std::exp(-t);
        const double cs = std::cos(k * x), sn = std::sin(k * x);
        const double h = 1.0 + c * cs;
        const double F = mob.value(h), Fp = mob.derivative(h);
        const double D = std::pow(h, m - 1.0);
        const double Dp = (m - 1.0) * std::pow(h, m - 2.0);
        return -c * cs + c * k *
                             (k * cs * (cw * F * k * k + cf * D) -
                              c * k * sn * sn * (cw * Fp * k * k + cf * Dp));
    };
}

namespace {

ScalarField restrict_to(const ScalarField& fine, const Grid1D& coarse) {
    const std::size_t r = fine.size() / coarse.n_cells;
    ScalarField out(coarse);
    if (coarse.topology == Topology::Periodic) {
        for (std::size_t i = 0; i < coarse.n_cells; ++i) out[i] = fine[i * r];
    } else {
        for (std::size_t i = 0; i < coarse.n_cells; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < r; ++j) s += fine[i * r + j];
            out[i] = s / static_cast<double>(r);
        }
    }
    return out;
}

}  // namespace

ConvergenceReport refinement_study(const Scenario& scenario,
                                   const RefinementOptions& opts) {
    if (opts.levels < 3)
        throw std::invalid_argument("levels must be at least 3");
    const bool lub_system = scenario.system == SystemKind::Lubrication;
    const bool sw_system = scenario.system == SystemKind::ShallowWater;
    if (!lub_system && !sw_system)
        throw std::invalid_argument(
            "refinement study supports the lubrication and shallow-water systems");
    if (opts.mode == RefinementMode::Manufactured && !lub_system)
        throw std::invalid_argument("manufactured mode requires the lubrication system");
    if (scenario.initial_momentum.mode == MomentumSpec::Mode::Table)
        throw std::invalid_argument("table momentum cannot be refined");

    const double T = scenario.t_end;
    ConvergenceReport rep;
    rep.norms = opts.norms.empty() ? std::vector<ErrorNorm>{ErrorNorm::L2}
                                   : opts.norms;

    std::vector<ScalarField> finals;
    std::vector<Grid1D> grids;
    for (int level = 0; level < opts.levels; ++level) {
        Scenario sc = scenario;
        sc.grid = Grid1D(scenario.grid.n_cells << level, scenario.grid.length,
                         scenario.grid.topology);
        grids.push_back(sc.grid);
        const double shrink = std::pow(0.5, opts.dt_exponent * level);
        TimeStepper ts = scenario.time_stepper;
        ts.dt_max *= shrink;
        ts.dt_init = std::min(ts.dt_init, ts.dt_max);
        ts.dt_min = std::min(ts.dt_min, ts.dt_init);

        ReportRow row;
        row.parameter = sc.grid.spacing();
        if (lub_system) {
            const LubricationParams p = sc.lubrication_params();
            RunOptions ro;
            ro.record_every = kLedgerLean;
            ScalarField h0 = sc.build_initial_h();
            if (opts.mode == RefinementMode::Manufactured) {
                h0 = manufactured_solution(sc.grid, 0.0);
                ro.source = manufactured_source(p, sc.grid.length);
            }
            const LubricationRun run = lubrication_run(h0, T, p, ts, ro);
            finals.push_back(run.state.h);
            row.endpoint = ledger_endpoint(run.ledger);
        } else {
            const ShallowWaterParams p = sc.shallow_water_params();
            SwRunOptions so;
            so.record_every = kLedgerLean;
            const SwRun run =
                sw_run(sc.build_initial_h(), sc.build_initial_u(), T, p, ts, so);
            finals.push_back(run.state.h);
            row.endpoint = ledger_endpoint(run.ledger);
            row.bd_combined = run.ledger.bd_combined.back();
        }
        rep.rows.push_back(std::move(row));
    }

    for (int level = 0; level < opts.levels; ++level) {
        ReportRow& row = rep.rows[static_cast<std::size_t>(level)];
        ScalarField target =
            opts.mode == RefinementMode::Manufactured
                ? manufactured_solution(grids[static_cast<std::size_t>(level)], T)
                : restrict_to(finals.back(), grids[static_cast<std::size_t>(level)]);
        for (ErrorNorm n : rep.norms)
            row.errors.push_back(
                error_norm(finals[static_cast<std::size_t>(level)], target, n));
    }

    for (std::size_t n = 0; n < rep.norms.size(); ++n) {
        std::vector<double> xs, ys;
        for (const ReportRow& r : rep.rows) {
            xs.push_back(r.parameter);
            ys.push_back(r.errors[n]);
        }
        rep.fitted_rates.push_back(fitted_rate(xs, ys));
    }
    return rep;
}

FloorReport floor_sweep(const Scenario& scenario, std::vector<double> floors) {
    if (scenario.system != SystemKind::Lubrication &&
        scenario.system != SystemKind::ShallowWater)
        throw std::invalid_argument(
            "floor sweep supports the lubrication and shallow-water systems");
    for (double f : floors)
        if (!(f > 0.0)) throw std::invalid_argument("floors must be positive");
    std::sort(floors.begin(), floors.end(), std::greater<>());

    FloorReport rep;
    for (double f : floors) {
        FloorRow row;
        row.floor = f;
        try {
            Scenario sc = scenario;
            sc.floor = f;
            const ScalarField h0 = sc.build_initial_h();
            BalanceLedger lg;
            if (scenario.system == SystemKind::Lubrication) {
                RunOptions ro;
                ro.record_every = kLedgerLean;
                const LubricationRun run =
                    lubrication_run(h0, sc.t_end, sc.lubrication_params(),
                                    sc.time_stepper, ro);
                lg = run.ledger;
                row.min_h_overall = run.min_h_overall;
            } else {
                SwRunOptions so;
                so.record_every = kLedgerLean;
                const SwRun run = sw_run(h0, sc.build_initial_u(), sc.t_end,
                                         sc.shallow_water_params(),
                                         sc.time_stepper, so);
                lg = run.ledger;
                row.min_h_overall = run.min_h_overall;
            }
            row.min_h_final = lg.min_h.back();
            row.bf_delta = lg.bf.back() - lg.bf.front();
            row.mass_drift =
                std::fabs(lg.mass.back() - lg.mass.front()) / std::fabs(lg.mass.front());
            row.endpoint = ledger_endpoint(lg);
        } catch (const std::exception& ex) {
            row.failed = true;
            row.failure = ex.what();
        }
        rep.rows.push_back(std::move(row));
    }
    return rep;
}

std::string convergence_report_csv(const ConvergenceReport& rep) {
    std::ostringstream out;
    out << "parameter";
    for (ErrorNorm n : rep.norms) out << ", err_" << norm_name(n);
    out << ", bd_combined, bf_limit, entropy_gap, failed";
    for (const char* name : kEndpointNames) out << ", end_" << name;
    out << "\n";
    for (const ReportRow& r : rep.rows) {
        out << format_double(r.parameter);
        for (double e : r.errors) out << ", " << format_double(e);
        out << ", " << format_double(r.bd_combined) << ", "
            << format_double(r.bf_limit) << ", " << format_double(r.entropy_gap)
            << ", " << (r.failed ? 1 : 0);
        for (double v : r.endpoint.values) out << ", " << format_double(v);
        out << "\n";
    }
    return out.str();
}

std::string convergence_report_json(const ConvergenceReport& rep,
                                    const std::string& scenario_tag) {
    nlohmann::ordered_json j;
    j["scenario"] = scenario_tag;
    for (ErrorNorm n : rep.norms) j["norms"].push_back(norm_name(n));
    j["fitted_rates"] = rep.fitted_rates;
    nlohmann::ordered_json ref;
    for (std::size_t c = 0; c < 14; ++c)
        ref[kEndpointNames[c]] = rep.reference_endpoint.values[c];
    j["reference_endpoint"] = std::move(ref);
    j["rows"] = nlohmann::ordered_json::array();
    for (const ReportRow& r : rep.rows) {
        nlohmann::ordered_json row;
        row["parameter"] = r.parameter;
        row["errors"] = r.errors;
        row["bd_combined"] = r.bd_combined;
        row["bf_limit"] = r.bf_limit;
        row["entropy_gap"] = r.entropy_gap;
        row["failed"] = r.failed;
        if (r.failed) row["failure"] = r.failure;
        nlohmann::ordered_json end;
        for (std::size_t c = 0; c < 14; ++c)
            end[kEndpointNames[c]] = r.endpoint.values[c];
        row["endpoint"] = std::move(end);
        j["rows"].push_back(std::move(row));
    }
    return j.dump(2) + "\n";
}

std::string floor_report_csv(const FloorReport& rep) {
    std::ostringstream out;
    out << "floor, min_h_final, min_h_overall, bf_delta, mass_drift, failed\n";
    for (const FloorRow& r : rep.rows) {
        out << format_double(r.floor) << ", " << format_double(r.min_h_final)
            << ", " << format_double(r.min_h_overall) << ", "
            << format_double(r.bf_delta) << ", " << format_double(r.mass_drift)
            << ", " << (r.failed ? 1 : 0) << "\n";
    }
    return out.str();
}

}  // namespace entroflow
