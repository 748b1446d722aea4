#include "entroflow/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace entroflow {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    return out;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    return in;
}

std::vector<double> parse_row(const std::string& line, const std::string& path) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= line.size()) {
        std::size_t next = line.find(',', pos);
        if (next == std::string::npos) next = line.size();
        const std::string cell = line.substr(pos, next - pos);
        std::size_t i = 0;
        while (i < cell.size() && std::isspace(static_cast<unsigned char>(cell[i]))) ++i;
        if (i == cell.size())
            throw std::runtime_error("empty cell in " + path);
        char* end = nullptr;
        const double v = std::strtod(cell.c_str() + i, &end);
        if (end == cell.c_str() + i)
            throw std::runtime_error("unparsable number in " + path + ": " + cell);
        out.push_back(v);
        pos = next + 1;
        if (next == line.size()) break;
    }
    return out;
}

}  // namespace

void write_ledger(const BalanceLedger& ledger, const std::string& path) {
    std::ofstream out = open_out(path);
    out << BalanceLedger::csv_header() << "\n";
    for (std::size_t i = 0; i < ledger.rows(); ++i) {
        const double* cols[] = {
            &ledger.time[i],          &ledger.mass[i],
            &ledger.energy[i],        &ledger.bd_raw[i],
            &ledger.bd_combined[i],   &ledger.bf[i],
            &ledger.min_h[i],         &ledger.diss_energy_acc[i],
            &ledger.diss_bf_acc[i],   &ledger.diss_bd_acc[i],
            &ledger.residual_energy[i], &ledger.residual_bf[i],
            &ledger.residual_bd[i],   &ledger.residual_term_x[i]};
        for (std::size_t c = 0; c < 14; ++c) {
            if (c) out << ", ";
            out << format_double(*cols[c]);
        }
        out << "\n";
    }
}

BalanceLedger read_ledger(const std::string& path) {
    std::ifstream in = open_in(path);
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error("empty ledger file: " + path);
    if (line != BalanceLedger::csv_header())
        throw std::runtime_error("unexpected ledger header in " + path);
    BalanceLedger lg;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const std::vector<double> row = parse_row(line, path);
        if (row.size() != 14)
            throw std::runtime_error("ledger row needs 14 columns in " + path);
        lg.time.push_back(row[0]);
        lg.mass.push_back(row[1]);
        lg.energy.push_back(row[2]);
        lg.bd_raw.push_back(row[3]);
        lg.bd_combined.push_back(row[4]);
        lg.bf.push_back(row[5]);
        lg.min_h.push_back(row[6]);
        lg.diss_energy_acc.push_back(row[7]);
        lg.diss_bf_acc.push_back(row[8]);
        lg.diss_bd_acc.push_back(row[9]);
        lg.residual_energy.push_back(row[10]);
        lg.residual_bf.push_back(row[11]);
        lg.residual_bd.push_back(row[12]);
        lg.residual_term_x.push_back(row[13]);
    }
    return lg;
}

void write_snapshot(const ScalarField& h, const std::string& path) {
    std::ofstream out = open_out(path);
    out << "x, h\n";
    for (std::size_t i = 0; i < h.size(); ++i)
        out << format_double(h.grid.x(i)) << ", " << format_double(h[i]) << "\n";
}

void write_snapshot(const ScalarField& h, const std::vector<double>& u,
                    const std::string& path) {
    if (u.size() != h.size())
        throw std::invalid_argument("write_snapshot: u must be cell-centered");
    std::ofstream out = open_out(path);
    out << "x, h, u\n";
    for (std::size_t i = 0; i < h.size(); ++i)
        out << format_double(h.grid.x(i)) << ", " << format_double(h[i]) << ", "
            << format_double(u[i]) << "\n";
}

Snapshot read_snapshot(const std::string& path) {
    std::ifstream in = open_in(path);
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error("empty snapshot file: " + path);
    bool with_u = false;
    if (line == "x, h, u") with_u = true;
    else if (line != "x, h")
        throw std::runtime_error("unexpected snapshot header in " + path);
    Snapshot snap;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const std::vector<double> row = parse_row(line, path);
        if (row.size() != (with_u ? 3u : 2u))
            throw std::runtime_error("snapshot row has wrong arity in " + path);
        snap.x.push_back(row[0]);
        snap.h.push_back(row[1]);
        if (with_u) snap.u.push_back(row[2]);
    }
    return snap;
}

}  // namespace entroflow
