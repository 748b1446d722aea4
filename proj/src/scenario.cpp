#include "entroflow/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

#include "json.hpp"

#include "entroflow/ops.hpp"
#include "entroflow/shallow_water.hpp"

namespace entroflow {

namespace {

using nlohmann::ordered_json;
using Errors = std::vector<ValidationIssue>;

void err(Errors& e, std::string path, std::string msg) {
    e.push_back({std::move(path), std::move(msg)});
}

std::string join(const std::string& base, const char* key) {
    return base.empty() ? key : base + "." + key;
}

void check_keys(const ordered_json& obj, const std::string& path,
                std::initializer_list<std::string_view> keys, Errors& e) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        const std::string& k = it.key();
        if (std::find(keys.begin(), keys.end(), k) == keys.end())
            err(e, join(path, k.c_str()), "unknown field");
    }
}

bool get_double(const ordered_json& obj, const char* key, const std::string& path,
                Errors& e, double& out) {
    auto it = obj.find(key);
    if (it == obj.end()) return false;
    if (!it->is_number()) {
        err(e, join(path, key), "must be a number");
        return false;
    }
    out = it->get<double>();
    return true;
}

bool get_long(const ordered_json& obj, const char* key, const std::string& path,
              Errors& e, long& out) {
    auto it = obj.find(key);
    if (it == obj.end()) return false;
    if (!it->is_number_integer()) {
        err(e, join(path, key), "must be an integer");
        return false;
    }
    out = it->get<long>();
    return true;
}

bool get_bool(const ordered_json& obj, const char* key, const std::string& path,
              Errors& e, bool& out) {
    auto it = obj.find(key);
    if (it == obj.end()) return false;
    if (!it->is_boolean()) {
        err(e, join(path, key), "must be a boolean");
        return false;
    }
    out = it->get<bool>();
    return true;
}

bool get_string(const ordered_json& obj, const char* key, const std::string& path,
                Errors& e, std::string& out) {
    auto it = obj.find(key);
    if (it == obj.end()) return false;
    if (!it->is_string()) {
        err(e, join(path, key), "must be a string");
        return false;
    }
    out = it->get<std::string>();
    return true;
}

bool get_vector(const ordered_json& obj, const char* key, const std::string& path,
                Errors& e, std::vector<double>& out) {
    auto it = obj.find(key);
    if (it == obj.end()) return false;
    if (!it->is_array()) {
        err(e, join(path, key), "must be an array of numbers");
        return false;
    }
    std::vector<double> v;
    for (const auto& x : *it) {
        if (!x.is_number()) {
            err(e, join(path, key), "must be an array of numbers");
            return false;
        }
        v.push_back(x.get<double>());
    }
    out = std::move(v);
    return true;
}

void parse_mobility(const ordered_json& obj, const std::string& path, Errors& e,
                    MobilitySpec& mob) {
    if (!obj.is_object()) {
        err(e, path, "must be an object");
        return;
    }
    check_keys(obj, path, {"kind", "n"}, e);
    std::string kind;
    if (!get_string(obj, "kind", path, e, kind)) {
        err(e, join(path, "kind"), "is required");
        return;
    }
    if (kind == "power-law") {
        double n = mob.kind == MobilitySpec::Kind::PowerLaw ? mob.n : 3.0;
        get_double(obj, "n", path, e, n);
        if (!(n >= 0.0)) {
            err(e, join(path, "n"), "power-law exponent must be nonnegative");
            return;
        }
        mob = MobilitySpec::power_law(n);
    } else if (kind == "quadratic-cubic") {
        if (obj.contains("n")) err(e, join(path, "n"), "not used by this kind");
        mob = MobilitySpec::quadratic_cubic();
    } else {
        err(e, join(path, "kind"),
            "must be \"power-law\" or \"quadratic-cubic\"");
    }
}

void parse_grid(const ordered_json& obj, Errors& e, Grid1D& grid) {
    if (!obj.is_object()) {
        err(e, "grid", "must be an object");
        return;
    }
    check_keys(obj, "grid", {"n_cells", "length", "topology"}, e);
    long n = static_cast<long>(grid.n_cells);
    double length = grid.length;
    Topology topo = grid.topology;
    get_long(obj, "n_cells", "grid", e, n);
    get_double(obj, "length", "grid", e, length);
    std::string ts;
    if (get_string(obj, "topology", "grid", e, ts)) {
        if (ts == "periodic") topo = Topology::Periodic;
        else if (ts == "wall") topo = Topology::Wall;
        else err(e, "grid.topology", "must be \"periodic\" or \"wall\"");
    }
    if (n < 8) {
        err(e, "grid.n_cells", "must be at least 8");
        return;
    }
    if (!(length > 0.0)) {
        err(e, "grid.length", "must be positive");
        return;
    }
    grid = Grid1D(static_cast<std::size_t>(n), length, topo);
}

void parse_initial_h(const ordered_json& obj, Errors& e, InitialSpec& spec) {
    if (!obj.is_object()) {
        err(e, "initial_h", "must be an object");
        return;
    }
    std::string preset;
    if (!get_string(obj, "preset", "initial_h", e, preset)) {
        err(e, "initial_h.preset", "is required");
        return;
    }
    if (preset == "constant") {
        check_keys(obj, "initial_h", {"preset", "value"}, e);
        spec.preset = InitialSpec::Preset::Constant;
        get_double(obj, "value", "initial_h", e, spec.value);
    } else if (preset == "cosine-bump") {
        check_keys(obj, "initial_h", {"preset", "mean", "amplitude", "wavenumber"}, e);
        spec.preset = InitialSpec::Preset::CosineBump;
        get_double(obj, "mean", "initial_h", e, spec.mean);
        get_double(obj, "amplitude", "initial_h", e, spec.amplitude);
        long k = spec.wavenumber;
        if (get_long(obj, "wavenumber", "initial_h", e, k)) {
            if (k < 1) err(e, "initial_h.wavenumber", "must be at least 1");
            else spec.wavenumber = static_cast<int>(k);
        }
    } else if (preset == "droplet") {
        check_keys(obj, "initial_h", {"preset", "base", "height", "width", "center"}, e);
        spec.preset = InitialSpec::Preset::Droplet;
        get_double(obj, "base", "initial_h", e, spec.base);
        get_double(obj, "height", "initial_h", e, spec.height);
        get_double(obj, "width", "initial_h", e, spec.width);
        get_double(obj, "center", "initial_h", e, spec.center);
        if (!(spec.width > 0.0)) err(e, "initial_h.width", "must be positive");
    } else if (preset == "touchdown") {
        check_keys(obj, "initial_h", {"preset"}, e);
        spec.preset = InitialSpec::Preset::Touchdown;
    } else if (preset == "table") {
        check_keys(obj, "initial_h", {"preset", "x", "h"}, e);
        spec.preset = InitialSpec::Preset::Table;
        const bool has_x = get_vector(obj, "x", "initial_h", e, spec.xs);
        const bool has_h = get_vector(obj, "h", "initial_h", e, spec.hs);
        if (!has_x) err(e, "initial_h.x", "is required");
        if (!has_h) err(e, "initial_h.h", "is required");
        if (has_x && has_h) {
            if (spec.xs.size() != spec.hs.size())
                err(e, "initial_h", "x and h must have the same length");
            if (spec.xs.size() < 2) err(e, "initial_h.x", "needs at least 2 points");
            for (std::size_t i = 0; i + 1 < spec.xs.size(); ++i)
                if (!(spec.xs[i] < spec.xs[i + 1])) {
                    err(e, "initial_h.x", "must be strictly increasing");
                    break;
                }
        }
    } else {
        err(e, "initial_h.preset",
            "must be one of \"constant\", \"cosine-bump\", \"droplet\", "
            "\"touchdown\", \"table\"");
    }
}

void parse_momentum(const ordered_json& obj, Errors& e, MomentumSpec& spec) {
    if (!obj.is_object()) {
        err(e, "initial_momentum", "must be an object");
        return;
    }
    std::string mode;
    if (!get_string(obj, "mode", "initial_momentum", e, mode)) {
        err(e, "initial_momentum.mode", "is required");
        return;
    }
    if (mode == "zero") {
        check_keys(obj, "initial_momentum", {"mode"}, e);
        spec.mode = MomentumSpec::Mode::Zero;
    } else if (mode == "prepared") {
        check_keys(obj, "initial_momentum", {"mode"}, e);
        spec.mode = MomentumSpec::Mode::Prepared;
    } else if (mode == "constant") {
        check_keys(obj, "initial_momentum", {"mode", "value"}, e);
        spec.mode = MomentumSpec::Mode::Constant;
        get_double(obj, "value", "initial_momentum", e, spec.value);
    } else if (mode == "table") {
        check_keys(obj, "initial_momentum", {"mode", "u"}, e);
        spec.mode = MomentumSpec::Mode::Table;
        if (!get_vector(obj, "u", "initial_momentum", e, spec.us))
            err(e, "initial_momentum.u", "is required");
    } else {
        err(e, "initial_momentum.mode",
            "must be one of \"zero\", \"prepared\", \"constant\", \"table\"");
    }
}

void parse_output(const ordered_json& obj, Errors& e, OutputSpec& out) {
    if (!obj.is_object()) {
        err(e, "output", "must be an object");
        return;
    }
    check_keys(obj, "output",
               {"directory", "cadence", "snapshots", "ledger", "plots"}, e);
    get_string(obj, "directory", "output", e, out.directory);
    if (get_long(obj, "cadence", "output", e, out.cadence) && out.cadence < 1)
        err(e, "output.cadence", "must be at least 1");
    get_bool(obj, "snapshots", "output", e, out.snapshots);
    get_bool(obj, "ledger", "output", e, out.ledger);
    get_bool(obj, "plots", "output", e, out.plots);
}

void parse_time_stepper(const ordered_json& obj, Errors& e, TimeStepper& ts) {
    if (!obj.is_object()) {
        err(e, "time_stepper", "must be an object");
        return;
    }
    check_keys(obj, "time_stepper",
               {"dt_init", "dt_min", "dt_max", "newton_tol", "newton_max_iter",
                "safety"},
               e);
    get_double(obj, "dt_init", "time_stepper", e, ts.dt_init);
    get_double(obj, "dt_min", "time_stepper", e, ts.dt_min);
    get_double(obj, "dt_max", "time_stepper", e, ts.dt_max);
    get_double(obj, "newton_tol", "time_stepper", e, ts.newton_tol);
    long it = ts.newton_max_iter;
    if (get_long(obj, "newton_max_iter", "time_stepper", e, it))
        ts.newton_max_iter = static_cast<int>(it);
    get_double(obj, "safety", "time_stepper", e, ts.safety);
    try {
        ts.validate();
    } catch (const std::exception& ex) {
        err(e, "time_stepper", ex.what());
    }
}

// Field-by-field parameter validation so one pass reports every problem.
void validate_lub_params(const LubricationParams& p, const std::string& path,
                         Errors& e) {
    if (!(p.alpha > 0.0)) err(e, join(path, "alpha"), "alpha must be positive");
    if (!(p.we > 0.0)) err(e, join(path, "we"), "we must be positive");
    if (!(p.fr > 0.0)) err(e, join(path, "fr"), "fr must be positive");
    if (!(p.cap_a > 0.0)) err(e, join(path, "cap_a"), "cap_a must be positive");
    if (p.check_existence_range && !(p.m > 1.0 && p.m < 2.0))
        err(e, join(path, "m"), "m must lie in (1, 2) for the existence regime");
}

void validate_sw_params(const ShallowWaterParams& p, const std::string& path,
                        Errors& e) {
    if (!(p.alpha > 0.0)) err(e, join(path, "alpha"), "alpha must be positive");
    if (!(p.re > 0.0)) err(e, join(path, "re"), "re must be positive");
    if (!(p.we > 0.0)) err(e, join(path, "we"), "we must be positive");
    if (!(p.fr > 0.0)) err(e, join(path, "fr"), "fr must be positive");
    if (!(p.eps > 0.0)) err(e, join(path, "eps"), "eps must be positive");
    if (!(p.beta > 0.0)) err(e, join(path, "beta"), "beta must be positive");
    if (!(p.cap_a > 0.0)) err(e, join(path, "cap_a"), "cap_a must be positive");
    if (p.viscous_coeff && !(*p.viscous_coeff > 0.0))
        err(e, join(path, "viscous_coeff"), "viscous_coeff must be positive");
    if (p.capillary_coeff && !(*p.capillary_coeff > 0.0))
        err(e, join(path, "capillary_coeff"), "capillary_coeff must be positive");
    if (p.check_coupling) {
        if (p.mobility.kind != MobilitySpec::Kind::PowerLaw)
            err(e, join(path, "mobility"),
                "coupling check requires a power-law mobility");
        else {
            const double s = p.beta + p.mobility.n;
            if (!(s > 1.0 && s < 2.0))
                err(e, path, "beta + n must lie in (1, 2); got " + std::to_string(s));
        }
    }
}

void parse_lub_params(const ordered_json& obj, Errors& e, Scenario& s) {
    check_keys(obj, "params",
               {"alpha", "we", "fr", "mobility", "m", "cap_a",
                "check_existence_range"},
               e);
    LubricationParams& p = s.lub;
    get_double(obj, "alpha", "params", e, p.alpha);
    get_double(obj, "we", "params", e, p.we);
    get_double(obj, "fr", "params", e, p.fr);
    if (obj.contains("mobility"))
        parse_mobility(obj.at("mobility"), "params.mobility", e, p.mobility);
    get_double(obj, "m", "params", e, p.m);
    if (get_double(obj, "cap_a", "params", e, p.cap_a)) s.cap_a_given = true;
    get_bool(obj, "check_existence_range", "params", e, p.check_existence_range);
    validate_lub_params(p, "params", e);
}

void parse_sw_params(const ordered_json& obj, Errors& e, Scenario& s) {
    check_keys(obj, "params",
               {"alpha", "re", "we", "fr", "eps", "mobility", "beta",
                "viscous_coeff", "capillary_coeff", "cap_a", "check_coupling"},
               e);
    ShallowWaterParams& p = s.sw;
    get_double(obj, "alpha", "params", e, p.alpha);
    get_double(obj, "re", "params", e, p.re);
    get_double(obj, "we", "params", e, p.we);
    get_double(obj, "fr", "params", e, p.fr);
    get_double(obj, "eps", "params", e, p.eps);
    if (obj.contains("mobility"))
        parse_mobility(obj.at("mobility"), "params.mobility", e, p.mobility);
    get_double(obj, "beta", "params", e, p.beta);
    double v;
    if (get_double(obj, "viscous_coeff", "params", e, v)) p.viscous_coeff = v;
    if (get_double(obj, "capillary_coeff", "params", e, v)) p.capillary_coeff = v;
    if (get_double(obj, "cap_a", "params", e, p.cap_a)) s.cap_a_given = true;
    get_bool(obj, "check_coupling", "params", e, p.check_coupling);
    validate_sw_params(p, "params", e);
}

ordered_json mobility_json(const MobilitySpec& m) {
    ordered_json j;
    if (m.kind == MobilitySpec::Kind::PowerLaw) {
        j["kind"] = "power-law";
        j["n"] = m.n;
    } else {
        j["kind"] = "quadratic-cubic";
    }
    return j;
}

}  // namespace

ScenarioParse parse_scenario(const std::string& text) {
    ScenarioParse result;
    Errors& e = result.errors;
    ordered_json doc;
    try {
        doc = ordered_json::parse(text);
    } catch (const std::exception& ex) {
        err(e, "$", std::string("not valid JSON: ") + ex.what());
        return result;
    }
    try {
        if (!doc.is_object()) {
            err(e, "$", "scenario must be a JSON object");
            return result;
        }
        check_keys(doc, "",
                   {"system", "grid", "params", "initial_h", "initial_momentum",
                    "floor", "t_end", "output", "time_stepper"},
                   e);

        Scenario s;
        std::string system;
        if (!get_string(doc, "system", "", e, system)) {
            err(e, "system", "is required");
            return result;
        }
        if (system == "lubrication") s.system = SystemKind::Lubrication;
        else if (system == "shallow-water") s.system = SystemKind::ShallowWater;
        else if (system == "electrified") s.system = SystemKind::Electrified;
        else if (system == "shallow-water-nonlocal")
            s.system = SystemKind::ShallowWaterNonlocal;
        else {
            err(e, "system",
                "must be one of \"lubrication\", \"shallow-water\", "
                "\"electrified\", \"shallow-water-nonlocal\"");
            return result;
        }

        // System-conditioned defaults, overridable below.
        if (s.system == SystemKind::Electrified) {
            s.grid = Grid1D(128, 1.0, Topology::Wall);
            s.lub.mobility = MobilitySpec::power_law(3.0);
        } else if (s.system == SystemKind::ShallowWaterNonlocal) {
            s.grid = Grid1D(64, 1.0, Topology::Wall);
            s.sw.mobility = MobilitySpec::power_law(3.0);
            s.sw.viscous_coeff = 1.0;
            s.sw.capillary_coeff = 1.0;
        }

        if (doc.contains("grid")) parse_grid(doc.at("grid"), e, s.grid);
        if (doc.contains("params")) {
            const auto& pj = doc.at("params");
            if (!pj.is_object()) err(e, "params", "must be an object");
            else if (s.uses_shallow_water()) parse_sw_params(pj, e, s);
            else parse_lub_params(pj, e, s);
        } else {
            if (s.uses_shallow_water()) validate_sw_params(s.sw, "params", e);
            else validate_lub_params(s.lub, "params", e);
        }
        if (doc.contains("initial_h")) parse_initial_h(doc.at("initial_h"), e, s.initial_h);
        if (doc.contains("initial_momentum")) {
            if (!s.uses_shallow_water())
                err(e, "initial_momentum",
                    "applies to the shallow-water systems only");
            else parse_momentum(doc.at("initial_momentum"), e, s.initial_momentum);
        }
        if (get_double(doc, "floor", "", e, s.floor) && !(s.floor >= 0.0))
            err(e, "floor", "must be nonnegative");
        get_double(doc, "t_end", "", e, s.t_end);
        if (!(s.t_end > 0.0)) err(e, "t_end", "must be positive");
        if (doc.contains("output")) parse_output(doc.at("output"), e, s.output);
        if (doc.contains("time_stepper"))
            parse_time_stepper(doc.at("time_stepper"), e, s.time_stepper);

        // Cross-field consistency.
        if (s.system == SystemKind::ShallowWater &&
            s.grid.topology != Topology::Periodic)
            err(e, "grid.topology", "shallow-water system requires a periodic grid");
        if (s.system == SystemKind::Electrified) {
            if (s.grid.topology != Topology::Wall)
                err(e, "grid.topology", "electrified system requires wall topology");
            if (std::fabs(s.grid.length - 1.0) > 1e-12)
                err(e, "grid.length", "electrified system requires domain length 1");
            if (s.lub.mobility.kind != MobilitySpec::Kind::PowerLaw ||
                s.lub.mobility.n != 3.0)
                err(e, "params.mobility", "electrified system requires mobility h^3");
        }
        if (s.system == SystemKind::ShallowWaterNonlocal) {
            if (s.grid.topology != Topology::Wall)
                err(e, "grid.topology",
                    "shallow-water-nonlocal system requires wall topology");
            if (std::fabs(s.grid.length - 1.0) > 1e-12)
                err(e, "grid.length",
                    "shallow-water-nonlocal system requires domain length 1");
            if (s.sw.mobility.kind != MobilitySpec::Kind::PowerLaw ||
                s.sw.mobility.n != 3.0)
                err(e, "params.mobility",
                    "shallow-water-nonlocal system requires mobility h^3");
            if (s.initial_momentum.mode == MomentumSpec::Mode::Prepared)
                err(e, "initial_momentum.mode",
                    "prepared momentum requires the local shallow-water system");
        }
        if (s.initial_momentum.mode == MomentumSpec::Mode::Table && e.empty()) {
            const std::size_t nf = face_count(s.grid);
            if (s.initial_momentum.us.size() != nf)
                err(e, "initial_momentum.u",
                    "needs one value per face (" + std::to_string(nf) + ")");
            else if (s.grid.topology == Topology::Wall &&
                     (s.initial_momentum.us.front() != 0.0 ||
                      s.initial_momentum.us.back() != 0.0))
                err(e, "initial_momentum.u",
                    "wall velocities must vanish at the walls");
        }
        if (s.initial_h.preset == InitialSpec::Preset::Table && e.empty()) {
            if (s.initial_h.xs.front() < 0.0 || s.initial_h.xs.back() > s.grid.length)
                err(e, "initial_h.x", "points must lie inside [0, length]");
        }

        if (e.empty()) {
            const ScalarField h0 = s.build_initial_h();
            if (!(h0.min() > 0.0))
                err(e, "initial_h",
                    "initial data must be strictly positive after floor application");
        }
        if (e.empty()) result.scenario = std::move(s);
    } catch (const std::exception& ex) {
        err(e, "$", ex.what());
    }
    return result;
}

ScalarField Scenario::build_initial_h() const {
    ScalarField h(grid);
    const double L = grid.length;
    const double pi = std::numbers::pi;
    for (std::size_t i = 0; i < grid.n_cells; ++i) {
        const double x = grid.x(i);
        double v = 0.0;
        switch (initial_h.preset) {
            case InitialSpec::Preset::Constant:
                v = initial_h.value;
                break;
            case InitialSpec::Preset::CosineBump: {
                const double arg = grid.topology == Topology::Periodic
                                        ? 2.0 * pi * initial_h.wavenumber * x / L
                                        : pi * initial_h.wavenumber * x / L;
                v = initial_h.mean + initial_h.amplitude * std::cos(arg);
                break;
            }
            case InitialSpec::Preset::Droplet: {
                const double c = std::cos(pi * (x / L - initial_h.center));
                v = initial_h.base + initial_h.height * c * c;
                break;
            }
            case InitialSpec::Preset::Touchdown: {
                const double c = std::cos(pi * x / L);
                v = c * c - 0.5;
                break;
            }
            case InitialSpec::Preset::Table: {
                const auto& xs = initial_h.xs;
                const auto& hs = initial_h.hs;
                if (x <= xs.front()) v = hs.front();
                else if (x >= xs.back()) v = hs.back();
                else {
                    const auto it = std::upper_bound(xs.begin(), xs.end(), x);
                    const std::size_t k = static_cast<std::size_t>(it - xs.begin());
                    const double t = (x - xs[k - 1]) / (xs[k] - xs[k - 1]);
                    v = (1.0 - t) * hs[k - 1] + t * hs[k];
                }
                break;
            }
        }
        h[i] = std::max(v, 0.0) + floor;
    }
    return h;
}

std::vector<double> Scenario::build_initial_u() const {
    if (!uses_shallow_water())
        throw std::logic_error("initial velocity applies to the shallow-water systems");
    const std::size_t nf = face_count(grid);
    switch (initial_momentum.mode) {
        case MomentumSpec::Mode::Zero:
            return std::vector<double>(nf, 0.0);
        case MomentumSpec::Mode::Constant: {
            std::vector<double> u(nf, initial_momentum.value);
            if (grid.topology == Topology::Wall) {
                u.front() = 0.0;
                u.back() = 0.0;
            }
            return u;
        }
        case MomentumSpec::Mode::Prepared:
            return sw_prepared_velocity(build_initial_h(), shallow_water_params());
        case MomentumSpec::Mode::Table:
            return initial_momentum.us;
    }
    return {};
}

LubricationParams Scenario::lubrication_params() const {
    LubricationParams p = lub;
    if (!cap_a_given) p.cap_a = 2.0 * build_initial_h().max();
    return p;
}

ShallowWaterParams Scenario::shallow_water_params() const {
    ShallowWaterParams p = sw;
    if (!cap_a_given) p.cap_a = 2.0 * build_initial_h().max();
    return p;
}

std::string print_scenario(const Scenario& s) {
    ordered_json j;
    switch (s.system) {
        case SystemKind::Lubrication: j["system"] = "lubrication"; break;
        case SystemKind::ShallowWater: j["system"] = "shallow-water"; break;
        case SystemKind::Electrified: j["system"] = "electrified"; break;
        case SystemKind::ShallowWaterNonlocal:
            j["system"] = "shallow-water-nonlocal";
            break;
    }
    j["grid"] = {
        {"n_cells", s.grid.n_cells},
        {"length", s.grid.length},
        {"topology", s.grid.topology == Topology::Periodic ? "periodic" : "wall"}};
    ordered_json p;
    if (s.uses_shallow_water()) {
        p["alpha"] = s.sw.alpha;
        p["re"] = s.sw.re;
        p["we"] = s.sw.we;
        p["fr"] = s.sw.fr;
        p["eps"] = s.sw.eps;
        p["mobility"] = mobility_json(s.sw.mobility);
        p["beta"] = s.sw.beta;
        if (s.sw.viscous_coeff) p["viscous_coeff"] = *s.sw.viscous_coeff;
        if (s.sw.capillary_coeff) p["capillary_coeff"] = *s.sw.capillary_coeff;
        if (s.cap_a_given) p["cap_a"] = s.sw.cap_a;
        p["check_coupling"] = s.sw.check_coupling;
    } else {
        p["alpha"] = s.lub.alpha;
        p["we"] = s.lub.we;
        p["fr"] = s.lub.fr;
        p["mobility"] = mobility_json(s.lub.mobility);
        p["m"] = s.lub.m;
        if (s.cap_a_given) p["cap_a"] = s.lub.cap_a;
        p["check_existence_range"] = s.lub.check_existence_range;
    }
    j["params"] = std::move(p);
    ordered_json ih;
    switch (s.initial_h.preset) {
        case InitialSpec::Preset::Constant:
            ih["preset"] = "constant";
            ih["value"] = s.initial_h.value;
            break;
        case InitialSpec::Preset::CosineBump:
            ih["preset"] = "cosine-bump";
            ih["mean"] = s.initial_h.mean;
            ih["amplitude"] = s.initial_h.amplitude;
            ih["wavenumber"] = s.initial_h.wavenumber;
            break;
        case InitialSpec::Preset::Droplet:
            ih["preset"] = "droplet";
            ih["base"] = s.initial_h.base;
            ih["height"] = s.initial_h.height;
            ih["width"] = s.initial_h.width;
            ih["center"] = s.initial_h.center;
            break;
        case InitialSpec::Preset::Touchdown:
            ih["preset"] = "touchdown";
            break;
        case InitialSpec::Preset::Table:
            ih["preset"] = "table";
            ih["x"] = s.initial_h.xs;
            ih["h"] = s.initial_h.hs;
            break;
    }
    j["initial_h"] = std::move(ih);
    if (s.uses_shallow_water()) {
        ordered_json im;
        switch (s.initial_momentum.mode) {
            case MomentumSpec::Mode::Zero: im["mode"] = "zero"; break;
            case MomentumSpec::Mode::Prepared: im["mode"] = "prepared"; break;
            case MomentumSpec::Mode::Constant:
                im["mode"] = "constant";
                im["value"] = s.initial_momentum.value;
                break;
            case MomentumSpec::Mode::Table:
                im["mode"] = "table";
                im["u"] = s.initial_momentum.us;
                break;
        }
        j["initial_momentum"] = std::move(im);
    }
    j["floor"] = s.floor;
    j["t_end"] = s.t_end;
    j["output"] = {{"directory", s.output.directory},
                   {"cadence", s.output.cadence},
                   {"snapshots", s.output.snapshots},
                   {"ledger", s.output.ledger},
                   {"plots", s.output.plots}};
    j["time_stepper"] = {{"dt_init", s.time_stepper.dt_init},
                         {"dt_min", s.time_stepper.dt_min},
                         {"dt_max", s.time_stepper.dt_max},
                         {"newton_tol", s.time_stepper.newton_tol},
                         {"newton_max_iter", s.time_stepper.newton_max_iter},
                         {"safety", s.time_stepper.safety}};
    return j.dump(2) + "\n";
}

std::string scenario_hash(const Scenario& s) {
    const std::string text = print_scenario(s);
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

std::string apply_override(const std::string& text, const std::string& key,
                           const std::string& value) {
    if (key.empty()) throw std::invalid_argument("override key must not be empty");
    ordered_json doc;
    try {
        doc = ordered_json::parse(text);
    } catch (const std::exception& ex) {
        throw std::invalid_argument(std::string("override target is not valid JSON: ") +
                                    ex.what());
    }
    std::string pointer = "/";
    for (char c : key) pointer += c == '.' ? '/' : c;
    ordered_json parsed;
    try {
        parsed = ordered_json::parse(value);
    } catch (const std::exception&) {
        parsed = value;  // bare string
    }
    try {
        doc[ordered_json::json_pointer(pointer)] = parsed;
    } catch (const std::exception& ex) {
        throw std::invalid_argument("override key '" + key + "' is malformed: " +
                                    ex.what());
    }
    return doc.dump(2) + "\n";
}

}  // namespace entroflow
