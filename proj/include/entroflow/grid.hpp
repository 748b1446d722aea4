#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace entroflow {

enum class Topology { Periodic, Wall };

// Uniform 1-D grid. Periodic: nodes x_i = i*dx, the right endpoint is
// identified with the left. Wall: cell centers x_i = (i + 1/2)*dx on (0, L).
struct Grid1D {
    std::size_t n_cells = 0;
    double length = 1.0;
    Topology topology = Topology::Periodic;

    Grid1D() = default;
    Grid1D(std::size_t n, double len, Topology topo)
        : n_cells(n), length(len), topology(topo) {
        if (n < 8) throw std::invalid_argument("Grid1D: n_cells must be >= 8");
        if (!(len > 0.0)) throw std::invalid_argument("Grid1D: length must be positive");
    }

    double spacing() const { return length / static_cast<double>(n_cells); }

    double x(std::size_t i) const {
        const double dx = spacing();
        return topology == Topology::Periodic ? static_cast<double>(i) * dx
                                              : (static_cast<double>(i) + 0.5) * dx;
    }

    bool operator==(const Grid1D& o) const {
        return n_cells == o.n_cells && length == o.length && topology == o.topology;
    }
};

// Field of nodal / cell-center values on a Grid1D.
struct ScalarField {
    Grid1D grid;
    std::vector<double> values;

    ScalarField() = default;
    explicit ScalarField(const Grid1D& g, double fill = 0.0)
        : grid(g), values(g.n_cells, fill) {}
    ScalarField(const Grid1D& g, std::vector<double> v)
        : grid(g), values(std::move(v)) {
        if (values.size() != g.n_cells)
            throw std::invalid_argument("ScalarField: value count does not match grid");
    }

    std::size_t size() const { return values.size(); }
    double& operator[](std::size_t i) { return values[i]; }
    double operator[](std::size_t i) const { return values[i]; }

    double min() const {
        double m = values.front();
        for (double v : values) m = v < m ? v : m;
        return m;
    }
    double max() const {
        double m = values.front();
        for (double v : values) m = v > m ? v : m;
        return m;
    }
};

inline void require_same_grid(const Grid1D& a, const Grid1D& b, const char* what) {
    if (!(a == b))
        throw std::invalid_argument(std::string(what) + ": fields live on different grids");
}

inline void require_same_grid(const ScalarField& a, const ScalarField& b,
                              const char* what) {
    require_same_grid(a.grid, b.grid, what);
}

}  // namespace entroflow
