#include "entroflow/linalg.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cstddef>

namespace entroflow {

std::vector<double> solve_banded(BandedMatrix a, std::vector<double> b) {
    if (static_cast<int>(b.size()) != a.n)
        throw std::invalid_argument("solve_banded: size mismatch");
    std::vector<lapack_int> piv(a.n);
    const lapack_int info =
        LAPACKE_dgbsv(LAPACK_ROW_MAJOR, a.n, a.kl, a.ku, 1, a.ab.data(), a.n,
                      piv.data(), b.data(), 1);
    if (info != 0) throw NumericalError("banded solve failed (gbsv info " +
                                        std::to_string(info) + ")");
    return b;
}

namespace {

std::vector<double> dense_from(const BandedMatrix& a,
                               const std::vector<MatrixEntry>& corners) {
    const std::size_t n = a.n;
    std::vector<double> full(n * n, 0.0);
    for (int i = 0; i < a.n; ++i)
        for (int j = std::max(0, i - a.kl); j <= std::min(a.n - 1, i + a.ku); ++j)
            full[static_cast<std::size_t>(i) * n + j] = a.get(i, j);
    for (const auto& e : corners)
        full[static_cast<std::size_t>(e.row) * n + e.col] += e.value;
    return full;
}

}  // namespace

std::vector<double> solve_cyclic_banded(const BandedMatrix& a,
                                        const std::vector<MatrixEntry>& corners,
                                        const std::vector<double>& b) {
    if (static_cast<int>(b.size()) != a.n)
        throw std::invalid_argument("solve_cyclic_banded: size mismatch");
    if (corners.empty()) return solve_banded(a, b);

    std::vector<int> rows;
    for (const auto& e : corners)
        if (std::find(rows.begin(), rows.end(), e.row) == rows.end())
            rows.push_back(e.row);
    std::sort(rows.begin(), rows.end());
    const int k = static_cast<int>(rows.size());
    const int n = a.n;

    // Factor the band core; fall back to dense if it is singular even though
    // the full cyclic matrix may not be. The ab storage already carries the kl
    // fill rows gbtrf needs.
    BandedMatrix lu = a;
    std::vector<lapack_int> piv(n);
    lapack_int info = LAPACKE_dgbtrf(LAPACK_ROW_MAJOR, n, n, a.kl, a.ku,
                                     lu.ab.data(), n, piv.data());
    if (info != 0) return solve_dense(dense_from(a, corners), b);

    // Z = B^-1 [b | e_r1 .. e_rk], row-major n x (k+1).
    const int nrhs = k + 1;
    std::vector<double> z(static_cast<std::size_t>(n) * nrhs, 0.0);
    for (int i = 0; i < n; ++i) z[static_cast<std::size_t>(i) * nrhs] = b[i];
    for (int c = 0; c < k; ++c)
        z[static_cast<std::size_t>(rows[c]) * nrhs + 1 + c] = 1.0;
    info = LAPACKE_dgbtrs(LAPACK_ROW_MAJOR, 'N', n, a.kl, a.ku, nrhs,
                          lu.ab.data(), n, piv.data(), z.data(), nrhs);
    if (info != 0) return solve_dense(dense_from(a, corners), b);

    // Capture S = I + V^T Z_U and t = V^T z_b, where row r of V holds the
    // out-of-band entries of matrix row rows[r].
    std::vector<double> s(static_cast<std::size_t>(k) * k, 0.0);
    std::vector<double> t(k, 0.0);
    for (int r = 0; r < k; ++r) s[static_cast<std::size_t>(r) * k + r] = 1.0;
    for (const auto& e : corners) {
        const int r = static_cast<int>(std::find(rows.begin(), rows.end(), e.row) -
                                       rows.begin());
        const double* zrow = &z[static_cast<std::size_t>(e.col) * nrhs];
        t[r] += e.value * zrow[0];
        for (int c = 0; c < k; ++c)
            s[static_cast<std::size_t>(r) * k + c] += e.value * zrow[1 + c];
    }
    std::vector<double> y;
    try {
        y = solve_dense(std::move(s), std::move(t));
    } catch (const NumericalError&) {
        return solve_dense(dense_from(a, corners), b);
    }

    std::vector<double> x(n);
    for (int i = 0; i < n; ++i) {
        double v = z[static_cast<std::size_t>(i) * nrhs];
        for (int c = 0; c < k; ++c)
            v -= z[static_cast<std::size_t>(i) * nrhs + 1 + c] * y[c];
        x[i] = v;
    }
    return x;
}

std::vector<double> solve_dense(std::vector<double> a, std::vector<double> b) {
    const int n = static_cast<int>(b.size());
    if (a.size() != static_cast<std::size_t>(n) * n)
        throw std::invalid_argument("solve_dense: size mismatch");
    std::vector<lapack_int> piv(n);
    const lapack_int info = LAPACKE_dgesv(LAPACK_ROW_MAJOR, n, 1, a.data(), n,
                                          piv.data(), b.data(), 1);
    if (info != 0) throw NumericalError("dense solve failed (gesv info " +
                                        std::to_string(info) + ")");
    return b;
}

}  // namespace entroflow
