#pragma once

#include <optional>
#include <string>
#include <vector>

#include "entroflow/functionals.hpp"
#include "entroflow/grid.hpp"
#include "entroflow/lubrication.hpp"

namespace entroflow {

enum class SystemKind { Lubrication, ShallowWater, Electrified, ShallowWaterNonlocal };

// Initial height profile. Presets evaluate at cell centers / nodes; the
// scenario floor is then added after clamping the preset at zero, so
// touching-zero data can be lifted uniformly.
struct InitialSpec {
    enum class Preset { Constant, CosineBump, Droplet, Touchdown, Table };
    Preset preset = Preset::Constant;
    double value = 1.0;                      // constant
    double mean = 1.0, amplitude = 0.2;      // cosine-bump
    int wavenumber = 1;                      //   (cos(pi k x) on wall grids,
                                             //    cos(2 pi k x / L) on periodic)
    double base = 0.2, height = 1.0, width = 0.25, center = 0.5;  // droplet
    std::vector<double> xs, hs;              // table, piecewise linear

    bool operator==(const InitialSpec&) const = default;
};

// Initial velocity for the shallow-water systems, on faces. Prepared mode
// evaluates the relaxed flux relation so the run starts on the slow manifold.
struct MomentumSpec {
    enum class Mode { Zero, Prepared, Constant, Table };
    Mode mode = Mode::Zero;
    double value = 0.0;
    std::vector<double> us;

    bool operator==(const MomentumSpec&) const = default;
};

struct OutputSpec {
    std::string directory;
    long cadence = 1;
    bool snapshots = true;
    bool ledger = true;
    bool plots = false;

    bool operator==(const OutputSpec&) const = default;
};

struct Scenario {
    SystemKind system = SystemKind::Lubrication;
    Grid1D grid{128, 1.0, Topology::Periodic};
    LubricationParams lub;   // Lubrication, Electrified
    ShallowWaterParams sw;   // ShallowWater, ShallowWaterNonlocal
    bool cap_a_given = false;  // otherwise resolved to 2 max h0 at build time
    InitialSpec initial_h;
    MomentumSpec initial_momentum;
    double floor = 0.0;
    double t_end = 1.0;
    OutputSpec output;
    TimeStepper time_stepper;

    bool uses_shallow_water() const {
        return system == SystemKind::ShallowWater ||
               system == SystemKind::ShallowWaterNonlocal;
    }

    ScalarField build_initial_h() const;
    // Face velocities sized for the system's topology; walls pinned to zero.
    std::vector<double> build_initial_u() const;
    // Params with cap_a resolved against the initial data when not given.
    LubricationParams lubrication_params() const;
    ShallowWaterParams shallow_water_params() const;
};

struct ValidationIssue {
    std::string path;
    std::string message;
};

struct ScenarioParse {
    std::optional<Scenario> scenario;
    std::vector<ValidationIssue> errors;

    bool ok() const { return scenario.has_value(); }
};

// Total: every input yields either a scenario or the full list of problems
// found, each tagged with the JSON path it concerns.
ScenarioParse parse_scenario(const std::string& text);

// Canonical serialization; parse(print(s)) reproduces s exactly.
std::string print_scenario(const Scenario& s);

// FNV-1a of the canonical form, for labeling outputs.
std::string scenario_hash(const Scenario& s);

// Dotted-path override applied to the raw JSON document text, value parsed as
// a JSON literal when possible and as a string otherwise. Throws
// std::invalid_argument on a malformed key.
std::string apply_override(const std::string& text, const std::string& key,
                           const std::string& value);

}  // namespace entroflow
