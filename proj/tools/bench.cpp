#include <chrono>
#include <cmath>
#include <cstdio>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "entroflow/nonlocal.hpp"

using namespace entroflow;

namespace {

double now_seconds() {
#ifdef _OPENMP
    return omp_get_wtime();
#else
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
#endif
}

// Keep a side effect alive so the matvec loops are not optimized away.
volatile double sink = 0.0;

}  // namespace

int main() {
#ifdef _OPENMP
    std::printf("openmp: %d threads\n", omp_get_max_threads());
#else
    std::printf("openmp: disabled (serial build)\n");
#endif
    std::printf("%6s %12s %12s %12s %10s %12s\n", "n", "build[s]", "serial[ms]",
                "parallel[ms]", "speedup", "spectral[ms]");

    for (std::size_t n : {128UL, 256UL, 512UL, 1024UL}) {
        const Grid1D grid(n, 1.0, Topology::Wall);

        const double t0 = now_seconds();
        const NonlocalKernel kernel(grid);
        const double build = now_seconds() - t0;

        ScalarField x(grid);
        for (std::size_t i = 0; i < n; ++i)
            x[i] = 1.0 + 0.3 * std::cos(3.0 * M_PI * grid.x(i));

        const int reps = static_cast<int>(std::max(1.0, 2e7 / double(n * n)));

        const double t1 = now_seconds();
        for (int r = 0; r < reps; ++r) {
            const ScalarField y = kernel.apply_serial(x);
            sink = sink + y[0];
        }
        const double serial = (now_seconds() - t1) / reps * 1e3;

        const double t2 = now_seconds();
        for (int r = 0; r < reps; ++r) {
            const ScalarField y = kernel.apply(x);
            sink = sink + y[0];
        }
        const double parallel = (now_seconds() - t2) / reps * 1e3;

        const double t3 = now_seconds();
        for (int r = 0; r < reps; ++r) {
            const ScalarField y = kernel.apply_spectral(x);
            sink = sink + y[0];
        }
        const double spectral = (now_seconds() - t3) / reps * 1e3;

        std::printf("%6zu %12.4f %12.4f %12.4f %10.2f %12.4f\n", n, build, serial,
                    parallel, serial / parallel, spectral);
    }
    return 0;
}
