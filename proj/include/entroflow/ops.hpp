#pragma once

#include <vector>

#include "entroflow/grid.hpp"
#include "entroflow/mobility.hpp"

namespace entroflow {

// Boundary closure for derivative stencils on Wall grids. OneSided keeps
// second order for arbitrary smooth fields; NeumannMirror reflects the field
// across the wall and is the natural choice when dx(f) = 0 holds there.
enum class WallScheme { OneSided, NeumannMirror };

ScalarField dx(const ScalarField& f, WallScheme wall = WallScheme::OneSided);
ScalarField dxx(const ScalarField& f, WallScheme wall = WallScheme::OneSided);
// Composition dx(dxx(f)) with matched sub-stencils; exact for cubics.
ScalarField dxxx(const ScalarField& f, WallScheme wall = WallScheme::OneSided);

// Midpoint rule, exact for the cell-average interpretation on both topologies.
double integrate(const ScalarField& f);

double l2_norm(const ScalarField& f);
double linf_norm(const ScalarField& f);

// Face sets: Periodic has n faces, face i sitting between cells i and i+1
// (mod n). Wall has n+1 faces including the two wall faces 0 and n.
std::size_t face_count(const Grid1D& g);

struct FaceAverageRule {
    enum class Kind { Arithmetic, EntropicMobility };
    Kind kind = Kind::Arithmetic;
    MobilitySpec mobility{};

    static FaceAverageRule arithmetic() { return {Kind::Arithmetic, {}}; }
    static FaceAverageRule entropic(const MobilitySpec& m) {
        return {Kind::EntropicMobility, m};
    }
};

// Relative jump size below which the entropic average switches to the
// midpoint mobility value.
inline constexpr double kEntropicSwitch = 1e-8;

// Face values of h (Arithmetic) or of the mobility F(h) (EntropicMobility,
// the difference quotient of h against the antiderivative of 1/F). Wall faces
// use the mirrored boundary cell.
std::vector<double> face_average(const ScalarField& h, const FaceAverageRule& rule);

// Entropic mobility average across one face; exposed for solver Jacobians.
double entropic_face_mobility(double a, double b, const MobilitySpec& mob);

// The same average together with its partials wrt the two cell values.
void entropic_face_mobility_partials(double a, double b, const MobilitySpec& mob,
                                     double& m_out, double& da, double& db);

}  // namespace entroflow
