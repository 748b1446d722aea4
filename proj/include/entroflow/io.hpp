#pragma once

#include <string>
#include <vector>

#include "entroflow/functionals.hpp"
#include "entroflow/grid.hpp"

namespace entroflow {

// 17 significant digits, enough for bit-faithful decimal round-trip.
std::string format_double(double v);

void write_ledger(const BalanceLedger& ledger, const std::string& path);
// Throws std::runtime_error on a missing file, foreign header, or short row.
BalanceLedger read_ledger(const std::string& path);

struct Snapshot {
    std::vector<double> x, h, u;
    bool has_u() const { return !u.empty(); }
};

void write_snapshot(const ScalarField& h, const std::string& path);
// u holds cell-centered velocities alongside h.
void write_snapshot(const ScalarField& h, const std::vector<double>& u,
                    const std::string& path);
Snapshot read_snapshot(const std::string& path);

}  // namespace entroflow
