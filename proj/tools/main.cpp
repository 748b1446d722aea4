#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "entroflow/io.hpp"
#include "entroflow/nonlocal.hpp"
#include "entroflow/scenario.hpp"
#include "entroflow/shallow_water.hpp"
#include "entroflow/study.hpp"
#include "entroflow/svg.hpp"

namespace fs = std::filesystem;
using namespace entroflow;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitRunFailure = 3;
constexpr int kExitAuditFailure = 4;

std::string env_out_dir() {
    const char* env = std::getenv("ENTROFLOW_OUT_DIR");
    return (env != nullptr && *env != '\0') ? std::string(env) : std::string("./out");
}

// Priority: --out flag, then the scenario's output.directory, then the
// ENTROFLOW_OUT_DIR environment variable, then ./out.
std::string resolve_out_dir(const std::string& flag, const Scenario* sc) {
    if (!flag.empty()) return flag;
    if (sc != nullptr && !sc->output.directory.empty()) return sc->output.directory;
    return env_out_dir();
}

int load_scenario(const std::string& path, const std::vector<std::string>& overrides,
                  Scenario& out) {
    if (path.empty()) {
        std::cerr << "scenario: --scenario PATH is required\n";
        return kExitValidation;
    }
    std::ifstream in(path);
    if (!in) {
        std::cerr << "scenario: cannot read " << path << "\n";
        return kExitValidation;
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    std::string text = buf.str();
    for (const std::string& kv : overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) {
            std::cerr << "override: expected key=value, got '" << kv << "'\n";
            return kExitValidation;
        }
        try {
            text = apply_override(text, kv.substr(0, eq), kv.substr(eq + 1));
        } catch (const std::exception& ex) {
            std::cerr << "override '" << kv << "': " << ex.what() << "\n";
            return kExitValidation;
        }
    }
    const ScenarioParse parsed = parse_scenario(text);
    if (!parsed.ok()) {
        for (const ValidationIssue& issue : parsed.errors)
            std::cerr << issue.path << ": " << issue.message << "\n";
        return kExitValidation;
    }
    out = *parsed.scenario;
    return kExitOk;
}

void plot_functionals(const BalanceLedger& lg, const Scenario& sc,
                      const std::string& path) {
    PlotSpec spec;
    spec.title = "entroflow run " + scenario_hash(sc);
    spec.xlabel = "t";
    spec.ylabel = "value";
    spec.series.push_back({"energy", lg.time, lg.energy});
    spec.series.push_back({"bf", lg.time, lg.bf});
    if (sc.uses_shallow_water())
        spec.series.push_back({"bd_combined", lg.time, lg.bd_combined});
    write_svg_plot(spec, path);
}

int cmd_run(const std::string& scenario_path, const std::string& out_flag,
            const std::vector<std::string>& overrides) {
    Scenario sc;
    if (int rc = load_scenario(scenario_path, overrides, sc)) return rc;
    const std::string out = resolve_out_dir(out_flag, &sc);
    fs::create_directories(out);

    try {
        const ScalarField h0 = sc.build_initial_h();
        const int cadence = static_cast<int>(sc.output.cadence);
        BalanceLedger ledger;
        ScalarField h_final(sc.grid);
        std::vector<double> u_faces;
        long accepted = 0, rejected = 0;
        double min_h = 0.0;
        bool has_u = false;

        switch (sc.system) {
            case SystemKind::Lubrication: {
                RunOptions ro;
                ro.record_every = cadence;
                const LubricationRun run = lubrication_run(
                    h0, sc.t_end, sc.lubrication_params(), sc.time_stepper, ro);
                ledger = run.ledger;
                h_final = run.state.h;
                accepted = run.accepted;
                rejected = run.rejected;
                min_h = run.min_h_overall;
                break;
            }
            case SystemKind::ShallowWater: {
                SwRunOptions so;
                so.record_every = cadence;
                const SwRun run = sw_run(h0, sc.build_initial_u(), sc.t_end,
                                         sc.shallow_water_params(),
                                         sc.time_stepper, so);
                ledger = run.ledger;
                h_final = run.state.h;
                u_faces = run.state.u;
                has_u = true;
                accepted = run.accepted;
                rejected = run.rejected;
                min_h = run.min_h_overall;
                break;
            }
            case SystemKind::Electrified: {
                const NonlocalKernel kernel(sc.grid);
                ElectrifiedRunOptions eo;
                eo.record_every = cadence;
                eo.cap_a = sc.lubrication_params().cap_a;
                const ElectrifiedRun run =
                    electrified_run(kernel, h0, sc.t_end, sc.time_stepper, eo);
                ledger = run.ledger;
                h_final = run.state.h;
                accepted = run.accepted;
                rejected = run.rejected;
                min_h = run.min_h_overall;
                break;
            }
            case SystemKind::ShallowWaterNonlocal: {
                const NonlocalKernel kernel(sc.grid);
                const SwnlRun run =
                    swnl_run(kernel, h0, sc.build_initial_u(), sc.t_end,
                             sc.shallow_water_params(), sc.time_stepper, cadence);
                ledger = run.ledger;
                h_final = run.state.h;
                u_faces = run.state.u;
                has_u = true;
                accepted = run.accepted;
                rejected = run.rejected;
                min_h = run.min_h_overall;
                break;
            }
        }

        if (sc.output.snapshots) {
            write_snapshot(h0, out + "/snapshot_initial.csv");
            if (has_u)
                write_snapshot(h_final, cell_velocity(h_final, u_faces).values,
                               out + "/snapshot_final.csv");
            else
                write_snapshot(h_final, out + "/snapshot_final.csv");
        }
        if (sc.output.ledger) write_ledger(ledger, out + "/ledger.csv");
        if (sc.output.plots) plot_functionals(ledger, sc, out + "/functionals.svg");

        std::cout << "run " << scenario_hash(sc) << ": t=" << format_double(sc.t_end)
                  << " accepted=" << accepted << " rejected=" << rejected
                  << " min_h=" << format_double(min_h) << " out=" << out << "\n";
        return kExitOk;
    } catch (const std::invalid_argument& ex) {
        std::cerr << "scenario: " << ex.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& ex) {
        std::cerr << "run failure: " << ex.what() << "\n";
        return kExitRunFailure;
    }
}

int parse_norms(const std::vector<std::string>& names, std::vector<ErrorNorm>& out) {
    for (const std::string& s : names) {
        if (s == "l2")
            out.push_back(ErrorNorm::L2);
        else if (s == "h1")
            out.push_back(ErrorNorm::H1);
        else if (s == "linf")
            out.push_back(ErrorNorm::Linf);
        else {
            std::cerr << "norm: expected l2, h1 or linf, got '" << s << "'\n";
            return kExitValidation;
        }
    }
    return kExitOk;
}

int cmd_relax(const std::string& scenario_path, const std::string& out_flag,
              const std::vector<std::string>& overrides, int workers,
              std::vector<double> eps_values, double compare_time,
              const std::vector<std::string>& norm_names) {
    Scenario sc;
    if (int rc = load_scenario(scenario_path, overrides, sc)) return rc;
    SweepSpec spec;
    spec.base = sc;
    if (!eps_values.empty()) spec.eps_values = std::move(eps_values);
    spec.compare_time = compare_time;
    spec.norms.clear();
    if (int rc = parse_norms(norm_names, spec.norms)) return rc;

    const std::string out = resolve_out_dir(out_flag, &sc);
    fs::create_directories(out);
    try {
        const ConvergenceReport rep = relaxation_study(spec, workers);
        {
            std::ofstream csv(out + "/relax_report.csv");
            csv << convergence_report_csv(rep);
        }
        {
            std::ofstream js(out + "/relax_report.json");
            js << convergence_report_json(rep, scenario_hash(sc));
        }
        if (sc.output.plots) {
            PlotSpec ps;
            ps.title = "relaxation sweep " + scenario_hash(sc);
            ps.xlabel = "eps";
            ps.ylabel = "error";
            ps.loglog = true;
            for (std::size_t n = 0; n < rep.norms.size(); ++n) {
                PlotSeries series;
                series.name = std::string("err_") + norm_name(rep.norms[n]);
                for (const ReportRow& r : rep.rows)
                    if (!r.failed) {
                        series.x.push_back(r.parameter);
                        series.y.push_back(r.errors[n]);
                    }
                ps.series.push_back(std::move(series));
            }
            PlotSeries gap;
            gap.name = "entropy_gap";
            for (const ReportRow& r : rep.rows)
                if (!r.failed) {
                    gap.x.push_back(r.parameter);
                    gap.y.push_back(r.entropy_gap);
                }
            ps.series.push_back(std::move(gap));
            write_svg_plot(ps, out + "/relax_report.svg");
        }
        std::cout << "relax-study " << scenario_hash(sc) << ":";
        for (std::size_t n = 0; n < rep.norms.size(); ++n)
            std::cout << " rate_" << norm_name(rep.norms[n]) << "="
                      << format_double(rep.fitted_rates[n]);
        std::cout << " out=" << out << "\n";
        for (const ReportRow& r : rep.rows)
            if (r.failed)
                std::cerr << "eps=" << format_double(r.parameter)
                          << " failed: " << r.failure << "\n";
        return kExitOk;
    } catch (const std::invalid_argument& ex) {
        std::cerr << "relax-study: " << ex.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& ex) {
        std::cerr << "relax-study failure: " << ex.what() << "\n";
        return kExitRunFailure;
    }
}

int cmd_refine(const std::string& scenario_path, const std::string& out_flag,
               const std::vector<std::string>& overrides, int levels, bool mms,
               double dt_exponent, const std::vector<std::string>& norm_names) {
    Scenario sc;
    if (int rc = load_scenario(scenario_path, overrides, sc)) return rc;
    RefinementOptions opts;
    opts.levels = levels;
    opts.mode = mms ? RefinementMode::Manufactured : RefinementMode::SelfConvergence;
    opts.dt_exponent = dt_exponent;
    opts.norms.clear();
    if (int rc = parse_norms(norm_names, opts.norms)) return rc;

    const std::string out = resolve_out_dir(out_flag, &sc);
    fs::create_directories(out);
    try {
        const ConvergenceReport rep = refinement_study(sc, opts);
        {
            std::ofstream csv(out + "/refine_report.csv");
            csv << convergence_report_csv(rep);
        }
        {
            std::ofstream js(out + "/refine_report.json");
            js << convergence_report_json(rep, scenario_hash(sc));
        }
        std::cout << "refine-study " << scenario_hash(sc) << ":";
        for (std::size_t n = 0; n < rep.norms.size(); ++n)
            std::cout << " rate_" << norm_name(rep.norms[n]) << "="
                      << format_double(rep.fitted_rates[n]);
        std::cout << " out=" << out << "\n";
        return kExitOk;
    } catch (const std::invalid_argument& ex) {
        std::cerr << "refine-study: " << ex.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& ex) {
        std::cerr << "refine-study failure: " << ex.what() << "\n";
        return kExitRunFailure;
    }
}

int cmd_floor(const std::string& scenario_path, const std::string& out_flag,
              const std::vector<std::string>& overrides,
              const std::vector<double>& floors) {
    Scenario sc;
    if (int rc = load_scenario(scenario_path, overrides, sc)) return rc;
    const std::string out = resolve_out_dir(out_flag, &sc);
    fs::create_directories(out);
    try {
        const FloorReport rep = floor_sweep(sc, floors);
        std::ofstream csv(out + "/floor_report.csv");
        csv << floor_report_csv(rep);
        std::cout << "floor-sweep " << scenario_hash(sc) << ": " << rep.rows.size()
                  << " rows out=" << out << "\n";
        for (const FloorRow& r : rep.rows)
            if (r.failed)
                std::cerr << "floor=" << format_double(r.floor)
                          << " failed: " << r.failure << "\n";
        return kExitOk;
    } catch (const std::invalid_argument& ex) {
        std::cerr << "floor-sweep: " << ex.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& ex) {
        std::cerr << "floor-sweep failure: " << ex.what() << "\n";
        return kExitRunFailure;
    }
}

int cmd_entropy_check(const std::string& scenario_path, const std::string& out_flag,
                      const std::vector<std::string>& overrides,
                      const std::string& snapshot_path) {
    Scenario sc;
    if (int rc = load_scenario(scenario_path, overrides, sc)) return rc;
    if (snapshot_path.empty()) {
        std::cerr << "entropy-check: --snapshot PATH is required\n";
        return kExitValidation;
    }
    Snapshot snap;
    try {
        snap = read_snapshot(snapshot_path);
    } catch (const std::exception& ex) {
        std::cerr << "snapshot: " << ex.what() << "\n";
        return kExitValidation;
    }
    if (snap.h.size() != sc.grid.n_cells) {
        std::cerr << "snapshot: " << snap.h.size() << " rows do not match the "
                  << sc.grid.n_cells << "-cell scenario grid\n";
        return kExitValidation;
    }
    ScalarField h(sc.grid);
    for (std::size_t i = 0; i < h.size(); ++i) h[i] = snap.h[i];
    double hmin = h[0];
    for (std::size_t i = 1; i < h.size(); ++i) hmin = std::min(hmin, h[i]);
    if (!(hmin > 0.0)) {
        std::cerr << "snapshot: h must be strictly positive\n";
        return kExitValidation;
    }
    const bool needs_u = sc.uses_shallow_water();
    if (needs_u && !snap.has_u()) {
        std::cerr << "snapshot: shallow-water functionals require a u column\n";
        return kExitValidation;
    }
    ScalarField u(sc.grid);
    if (snap.has_u())
        for (std::size_t i = 0; i < u.size(); ++i) u[i] = snap.u[i];

    try {
        nlohmann::ordered_json j;
        j["scenario"] = scenario_hash(sc);
        j["snapshot"] = snapshot_path;
        j["mass"] = integrate(h);
        j["min_h"] = hmin;
        switch (sc.system) {
            case SystemKind::Lubrication: {
                const LubricationParams p = sc.lubrication_params();
                j["energy"] = energy_lubrication(h, p);
                j["bf"] = bf_entropy(h, p);
                j["diss_energy_rate"] = energy_dissipation_rate_lub(h, p);
                j["diss_bf_rate"] = bf_dissipation_rate(h, p);
                break;
            }
            case SystemKind::ShallowWater: {
                const ShallowWaterParams p = sc.shallow_water_params();
                j["energy"] = energy_shallow_water(h, u, p);
                j["bd_raw"] = bd_entropy(h, u, p, BdForm::Raw);
                j["bd_combined"] = bd_entropy(h, u, p, BdForm::EnergyCombined);
                j["bf"] = bf_entropy(h, p);
                j["diss_energy_rate"] = energy_dissipation_rate_sw(h, u, p);
                j["diss_bd_specific_rate"] = bd_dissipation_specific(h, p);
                j["term_x_rate"] = term_x_rate(h, u, p);
                break;
            }
            case SystemKind::Electrified: {
                const NonlocalKernel kernel(sc.grid);
                const LubricationParams p = sc.lubrication_params();
                j["energy"] = energy_electrified(kernel, h);
                j["lyapunov"] = lyapunov_electrified(kernel, h);
                j["bf"] = bf_entropy(h, p);
                break;
            }
            case SystemKind::ShallowWaterNonlocal: {
                const NonlocalKernel kernel(sc.grid);
                const ShallowWaterParams p = sc.shallow_water_params();
                ScalarField hu2(sc.grid);
                for (std::size_t i = 0; i < h.size(); ++i)
                    hu2[i] = h[i] * u[i] * u[i];
                j["energy"] = 0.5 * p.eps * integrate(hu2) +
                              lyapunov_electrified(kernel, h);
                j["bd_raw"] = bd_entropy(h, u, p, BdForm::Raw);
                j["bd_combined"] = bd_entropy(h, u, p, BdForm::EnergyCombined);
                j["bf"] = bf_entropy(h, p);
                break;
            }
        }
        const std::string text = j.dump(2) + "\n";
        std::cout << text;
        const std::string out = resolve_out_dir(out_flag, &sc);
        fs::create_directories(out);
        std::ofstream file(out + "/functionals.json");
        file << text;
        return kExitOk;
    } catch (const std::exception& ex) {
        std::cerr << "entropy-check failure: " << ex.what() << "\n";
        return kExitRunFailure;
    }
}

int cmd_kernel_dump(const std::string& scenario_path, const std::string& out_flag,
                    const std::vector<std::string>& overrides, std::size_t n_cells,
                    unsigned long seed) {
    Grid1D grid(n_cells, 1.0, Topology::Wall);
    Scenario sc;
    bool have_scenario = false;
    if (!scenario_path.empty()) {
        if (int rc = load_scenario(scenario_path, overrides, sc)) return rc;
        if (sc.grid.topology != Topology::Wall || sc.grid.length != 1.0) {
            std::cerr << "kernel-dump: the kernel is defined on a wall grid of "
                         "length 1\n";
            return kExitValidation;
        }
        grid = sc.grid;
        have_scenario = true;
    }
    const std::string out = resolve_out_dir(out_flag, have_scenario ? &sc : nullptr);
    fs::create_directories(out);

    try {
        const NonlocalKernel kernel(grid);
        const std::size_t n = kernel.size();
        {
            std::ofstream m(out + "/kernel_matrix.csv");
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t jcol = 0; jcol < n; ++jcol) {
                    if (jcol) m << ", ";
                    m << format_double(kernel.weight(i, jcol));
                }
                m << "\n";
            }
        }
        {
            std::ofstream e(out + "/kernel_eigenvalues.csv");
            e << "mode, lambda\n";
            const std::vector<double>& ev = kernel.eigenvalues();
            for (std::size_t mode = 0; mode < ev.size(); ++mode)
                e << mode << ", " << format_double(ev[mode]) << "\n";
        }

        const double sym = kernel.symmetry_defect();
        ScalarField ones(grid);
        for (std::size_t i = 0; i < n; ++i) ones[i] = 1.0;
        const double const_resid = linf_norm(kernel.apply(ones));
        double wmax = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            wmax = std::max(wmax, std::fabs(kernel.weight(i, i)));

        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> dist(0.0, 1.0);
        ScalarField rnd(grid);
        for (std::size_t i = 0; i < n; ++i) rnd[i] = dist(rng);
        const double quad = kernel.quadratic_form(rnd);

        const double tol = 1e-12 * std::max(1.0, wmax);
        const bool pass_sym = sym <= tol;
        const bool pass_const = const_resid <= tol;
        const bool pass_nsd = quad <= 1e-12 * std::max(1.0, std::fabs(quad));

        nlohmann::ordered_json j;
        j["n"] = n;
        j["seed"] = seed;
        j["symmetry_defect"] = sym;
        j["constant_residual"] = const_resid;
        j["random_quadratic_form"] = quad;
        j["tolerance"] = tol;
        j["pass_symmetry"] = pass_sym;
        j["pass_constants"] = pass_const;
        j["pass_negative_semidefinite"] = pass_nsd;
        const std::string text = j.dump(2) + "\n";
        std::cout << text;
        std::ofstream file(out + "/kernel_audit.json");
        file << text;
        return (pass_sym && pass_const && pass_nsd) ? kExitOk : kExitAuditFailure;
    } catch (const std::exception& ex) {
        std::cerr << "kernel-dump failure: " << ex.what() << "\n";
        return kExitRunFailure;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"entroflow: structure preserving thin-film and shallow-water solvers"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string scenario_path;
    std::string out_flag;
    int workers = 1;
    unsigned long seed = 20260825UL;
    std::vector<std::string> overrides;
    app.add_option("--scenario", scenario_path, "Scenario JSON file");
    app.add_option("--out", out_flag,
                   "Output directory (default: scenario output.directory, then "
                   "ENTROFLOW_OUT_DIR, then ./out)");
    app.add_option("--workers", workers, "Worker threads for parameter sweeps");
    app.add_option("--seed", seed, "Seed for randomized audits");
    app.add_option("--override", overrides,
                   "Scenario override key=value (dotted path, repeatable)");

    CLI::App* run = app.add_subcommand("run", "Integrate one scenario");

    CLI::App* relax = app.add_subcommand(
        "relax-study", "Shallow-water relaxation sweep against the lubrication limit");
    std::vector<double> eps_values;
    double compare_time = 0.0;
    std::vector<std::string> relax_norms{"l2"};
    relax->add_option("--eps", eps_values, "Relaxation parameters (default 1e-1..1e-4)");
    relax->add_option("--compare-time", compare_time,
                      "Comparison time (default t_end)");
    relax->add_option("--norm", relax_norms, "Error norms: l2, h1, linf");

    CLI::App* refine = app.add_subcommand("refine-study", "Dyadic grid refinement ladder");
    int levels = 4;
    bool mms = false;
    double dt_exponent = 1.0;
    std::vector<std::string> refine_norms{"l2"};
    refine->add_option("--levels", levels, "Refinement levels (>= 3)");
    refine->add_flag("--mms", mms, "Compare against the manufactured solution");
    refine->add_option("--dt-exponent", dt_exponent,
                       "Halving exponent for dt_max per level");
    refine->add_option("--norm", refine_norms, "Error norms: l2, h1, linf");

    CLI::App* floor_cmd = app.add_subcommand("floor-sweep", "Positivity floor sweep");
    std::vector<double> floors{1e-2, 1e-3, 1e-4, 1e-5};
    floor_cmd->add_option("--floor", floors, "Floor values (repeatable)");

    CLI::App* entropy = app.add_subcommand(
        "entropy-check", "Evaluate all functionals on a snapshot file");
    std::string snapshot_path;
    entropy->add_option("--snapshot", snapshot_path, "Snapshot CSV (x, h[, u])");

    CLI::App* kernel = app.add_subcommand(
        "kernel-dump", "Write the nonlocal kernel matrix and its audit");
    std::size_t kernel_n = 128;
    kernel->add_option("--n", kernel_n, "Grid cells when no scenario is given");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitValidation;
    }

    if (run->parsed()) return cmd_run(scenario_path, out_flag, overrides);
    if (relax->parsed())
        return cmd_relax(scenario_path, out_flag, overrides, workers, eps_values,
                         compare_time, relax_norms);
    if (refine->parsed())
        return cmd_refine(scenario_path, out_flag, overrides, levels, mms,
                          dt_exponent, refine_norms);
    if (floor_cmd->parsed())
        return cmd_floor(scenario_path, out_flag, overrides, floors);
    if (entropy->parsed())
        return cmd_entropy_check(scenario_path, out_flag, overrides, snapshot_path);
    if (kernel->parsed())
        return cmd_kernel_dump(scenario_path, out_flag, overrides, kernel_n, seed);
    return kExitValidation;
}
