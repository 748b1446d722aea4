#pragma once

#include <stdexcept>
#include <vector>

namespace entroflow {

struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Band storage in the LAPACK gbsv layout (row-major): ab holds
// (2*kl + ku + 1) rows of length n; A(i,j) sits at ab[(kl+ku+i-j)*n + j].
struct BandedMatrix {
    int n = 0, kl = 0, ku = 0;
    std::vector<double> ab;

    BandedMatrix() = default;
    BandedMatrix(int n_, int kl_, int ku_)
        : n(n_), kl(kl_), ku(ku_),
          ab(static_cast<std::size_t>(2 * kl_ + ku_ + 1) * n_, 0.0) {}

    bool in_band(int i, int j) const { return j - i <= ku && i - j <= kl; }
    double& at(int i, int j) {
        return ab[static_cast<std::size_t>(kl + ku + i - j) * n + j];
    }
    double get(int i, int j) const {
        return in_band(i, j) ? ab[static_cast<std::size_t>(kl + ku + i - j) * n + j]
                             : 0.0;
    }
};

// Out-of-band entry, e.g. a periodic wrap corner.
struct MatrixEntry {
    int row = 0, col = 0;
    double value = 0.0;
};

// In-place gbsv; contents of b are replaced by the solution.
std::vector<double> solve_banded(BandedMatrix a, std::vector<double> b);

// Solve (B + corners) x = b via a Woodbury correction, one rank per distinct
// corner row; falls back to a dense solve if the band core is singular.
std::vector<double> solve_cyclic_banded(const BandedMatrix& a,
                                        const std::vector<MatrixEntry>& corners,
                                        const std::vector<double>& b);

// Dense gesv; a is n^2 row-major.
std::vector<double> solve_dense(std::vector<double> a, std::vector<double> b);

}  // namespace entroflow
