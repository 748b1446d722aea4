#include "entroflow/nonlocal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "entroflow/linalg.hpp"
#include "entroflow/ops.hpp"

namespace entroflow {

namespace {

constexpr double kPi = std::numbers::pi;

void require_unit_wall(const Grid1D& g, const char* what) {
    if (g.topology != Topology::Wall)
        throw std::invalid_argument(std::string(what) + ": grid must have walls");
    if (std::fabs(g.length - 1.0) > 1e-12)
        throw std::invalid_argument(std::string(what) + ": domain length must be 1");
}

}  // namespace

double nu(double x, double y) {
    if (!(x > 0.0 && x < 1.0 && y > 0.0 && y < 1.0))
        throw std::domain_error("nu: arguments must lie in (0, 1)");
    // 1 - cos(pi z) = 2 sin^2(pi z / 2), stable near the singular sets
    const double sd = std::sin(0.5 * kPi * (x - y));
    const double ss = std::sin(0.5 * kPi * (x + y));
    if (sd == 0.0 || ss == 0.0)
        throw std::domain_error("nu: singular arguments");
    return 0.25 * kPi * (1.0 / (sd * sd) + 1.0 / (ss * ss));
}

NonlocalKernel::NonlocalKernel(const Grid1D& grid) : grid_(grid) {
    require_unit_wall(grid, "NonlocalKernel");
    const std::size_t n = grid.n_cells;
    const double d = grid.spacing();
    weights_.assign(n * n, 0.0);

    // Off-diagonal quadrature weights; cell centers never hit the singular
    // sets of either kernel part.
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (std::size_t i = 0; i < n; ++i) {
        const double xi = grid.x(i);
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) weights_[i * n + j] = d * nu(xi, grid.x(j));
    }

    // Diagonal-cell principal value: the odd part of the singularity cancels,
    // the even part integrates to (d / 2 pi) dxx h, realized as the Neumann
    // mirror second difference so the matrix stays symmetric.
    const double c = 1.0 / (2.0 * kPi * d);
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0) weights_[i * n + i - 1] += c;
        if (i + 1 < n) weights_[i * n + i + 1] += c;
    }
    // Zero row sums by construction: the rule acts on differences only, so
    // constants must be annihilated.
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) s += weights_[i * n + j];
        weights_[i * n + i] = -s;
    }

    // Rayleigh quotients over the staggered cosine modes. These vectors are
    // exact eigenvectors: the even extension of the rule is circulant on the
    // doubled lattice and the mirror second difference shares the same basis.
    eigenvalues_.assign(n, 0.0);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (std::size_t m = 0; m < n; ++m) {
        double num = 0.0, den = 0.0;
        std::vector<double> v(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = std::cos(kPi * m * grid_.x(i));
        for (std::size_t i = 0; i < n; ++i) {
            double row = 0.0;
            for (std::size_t j = 0; j < n; ++j) row += weights_[i * n + j] * v[j];
            num += row * v[i];
            den += v[i] * v[i];
        }
        eigenvalues_[m] = num / den;
    }
}

ScalarField NonlocalKernel::apply(const ScalarField& h) const {
    require_same_grid(h.grid, grid_, "NonlocalKernel::apply");
    const std::size_t n = grid_.n_cells;
    ScalarField out(grid_);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (std::size_t i = 0; i < n; ++i) {
        // Difference form: with the diagonal equal to minus the off-diagonal
        // row sum this is the same matrix product, but constants are
        // annihilated exactly instead of up to cancellation error.
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) s += weights_[i * n + j] * (h[j] - h[i]);
        out[i] = s;
    }
    return out;
}

ScalarField NonlocalKernel::apply_serial(const ScalarField& h) const {
    require_same_grid(h.grid, grid_, "NonlocalKernel::apply_serial");
    const std::size_t n = grid_.n_cells;
    ScalarField out(grid_);
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) s += weights_[i * n + j] * (h[j] - h[i]);
        out[i] = s;
    }
    return out;
}

ScalarField NonlocalKernel::apply_spectral(const ScalarField& h) const {
    require_same_grid(h.grid, grid_, "NonlocalKernel::apply_spectral");
    const std::size_t n = grid_.n_cells;
    std::vector<double> coef(n, 0.0);
    for (std::size_t m = 0; m < n; ++m) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += h[i] * std::cos(kPi * m * grid_.x(i));
        coef[m] = (m == 0 ? 1.0 : 2.0) * s / static_cast<double>(n);
    }
    ScalarField out(grid_);
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t m = 0; m < n; ++m)
            s += eigenvalues_[m] * coef[m] * std::cos(kPi * m * grid_.x(i));
        out[i] = s;
    }
    return out;
}

double NonlocalKernel::symmetry_defect() const {
    const std::size_t n = grid_.n_cells;
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            worst = std::max(worst,
                             std::fabs(weights_[i * n + j] - weights_[j * n + i]));
    return worst;
}

double NonlocalKernel::quadratic_form(const ScalarField& h) const {
    const ScalarField ih = apply_serial(h);
    double s = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) s += ih[i] * h[i];
    return s * grid_.spacing();
}

ScalarField apply_I(const NonlocalKernel& kernel, const ScalarField& h) {
    return kernel.apply(h);
}

double energy_electrified(const NonlocalKernel& kernel, const ScalarField& h) {
    const ScalarField g = dx(h, WallScheme::NeumannMirror);
    double grad = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) grad += g[i] * g[i];
    return 0.5 * grad * h.grid.spacing() - 0.5 * kernel.quadratic_form(h);
}

double lyapunov_electrified(const NonlocalKernel& kernel, const ScalarField& h) {
    const ScalarField g = dx(h, WallScheme::NeumannMirror);
    double grad = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) grad += g[i] * g[i];
    return 0.5 * grad * h.grid.spacing() + 0.5 * kernel.quadratic_form(h);
}

namespace {

// Mirror second difference of h (the pressure Laplacian consistent with
// dx h = 0 at the walls).
std::vector<double> mirror_lap(const ScalarField& h) {
    const std::size_t n = h.size();
    const double inv = 1.0 / (h.grid.spacing() * h.grid.spacing());
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (i == 0) w[i] = (h[1] - h[0]) * inv;
        else if (i + 1 == n) w[i] = (h[n - 2] - h[n - 1]) * inv;
        else w[i] = (h[i - 1] - 2.0 * h[i] + h[i + 1]) * inv;
    }
    return w;
}

// Coefficient of the mirror Laplacian row i at column k.
double mirror_lap_coef(std::size_t n, double inv, std::size_t i, std::size_t k) {
    if (i == 0) return k == 0 ? -inv : (k == 1 ? inv : 0.0);
    if (i + 1 == n) return k == n - 1 ? -inv : (k == n - 2 ? inv : 0.0);
    if (k + 1 == i || k == i + 1) return inv;
    if (k == i) return -2.0 * inv;
    return 0.0;
}

struct ElectrifiedWork {
    std::vector<double> p;  // dxx h - I(h) per cell
    std::vector<double> M;  // entropic face mobility, interior faces 1..n-1
    std::vector<double> dMa, dMb;
    std::vector<double> q;  // face fluxes, 0 at walls
};

ElectrifiedWork electrified_work(const NonlocalKernel& kernel,
                                 const ScalarField& h) {
    const std::size_t n = h.size();
    const double d = h.grid.spacing();
    const MobilitySpec mob = MobilitySpec::power_law(3.0);
    ElectrifiedWork w;
    w.p = mirror_lap(h);
    const ScalarField ih = kernel.apply_serial(h);
    for (std::size_t i = 0; i < n; ++i) w.p[i] -= ih[i];
    w.M.assign(n + 1, 0.0);
    w.dMa.assign(n + 1, 0.0);
    w.dMb.assign(n + 1, 0.0);
    w.q.assign(n + 1, 0.0);
    for (std::size_t f = 1; f < n; ++f) {
        entropic_face_mobility_partials(h[f - 1], h[f], mob, w.M[f], w.dMa[f],
                                        w.dMb[f]);
        w.q[f] = w.M[f] * (w.p[f] - w.p[f - 1]) / d;
    }
    return w;
}

std::vector<double> electrified_residual(const NonlocalKernel& kernel,
                                         const ScalarField& h,
                                         const std::vector<double>& hold,
                                         double dt) {
    const std::size_t n = h.size();
    const double d = h.grid.spacing();
    const ElectrifiedWork w = electrified_work(kernel, h);
    std::vector<double> r(n);
    for (std::size_t i = 0; i < n; ++i)
        r[i] = h[i] - hold[i] + dt * (w.q[i + 1] - w.q[i]) / d;
    return r;
}

std::vector<double> electrified_jacobian(const NonlocalKernel& kernel,
                                         const ScalarField& h, double dt) {
    const std::size_t n = h.size();
    const double d = h.grid.spacing();
    const double inv = 1.0 / (d * d);
    const ElectrifiedWork w = electrified_work(kernel, h);
    std::vector<double> jac(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) jac[i * n + i] = 1.0;
    std::vector<double> dq(n);
    for (std::size_t f = 1; f < n; ++f) {
        const double slope = (w.p[f] - w.p[f - 1]) / d;
        for (std::size_t k = 0; k < n; ++k) {
            // d p_f / d h_k = mirror-lap row minus kernel row
            const double dpf = mirror_lap_coef(n, inv, f, k) - kernel.weight(f, k);
            const double dpm =
                mirror_lap_coef(n, inv, f - 1, k) - kernel.weight(f - 1, k);
            dq[k] = w.M[f] * (dpf - dpm) / d;
        }
        dq[f - 1] += w.dMa[f] * slope;
        dq[f] += w.dMb[f] * slope;
        const double c = dt / d;
        for (std::size_t k = 0; k < n; ++k) {
            jac[(f - 1) * n + k] += c * dq[k];
            jac[f * n + k] -= c * dq[k];
        }
    }
    return jac;
}

}  // namespace

StepStats electrified_step(const NonlocalKernel& kernel, LubricationState& state,
                           const TimeStepper& ts) {
    ts.validate();
    require_same_grid(state.h.grid, kernel.grid(), "electrified_step");
    if (!(state.h.min() > 0.0))
        throw std::domain_error("electrified_step: field must be positive");
    if (state.dt <= 0.0) state.dt = ts.dt_init;

    const std::size_t n = state.h.size();
    const std::vector<double> hold = state.h.values;
    const double scale = std::max(1.0, linf_norm(state.h));
    const double tol = ts.newton_tol * scale;
    double dt = std::min(state.dt, ts.dt_max);

    StepStats stats;
    while (true) {
        ScalarField h = state.h;
        std::vector<double> r = electrified_residual(kernel, h, hold, dt);
        double res = 0.0;
        for (double v : r) res = std::max(res, std::fabs(v));
        bool converged = res <= tol;
        int iter = 0;
        while (!converged && iter < ts.newton_max_iter) {
            std::vector<double> delta;
            try {
                delta = solve_dense(electrified_jacobian(kernel, h, dt), r);
            } catch (const NumericalError&) {
                break;
            }
            double lambda = 1.0;
            bool accepted = false;
            for (int back = 0; back < 40; ++back) {
                ScalarField trial = h;
                for (std::size_t i = 0; i < n; ++i) trial[i] -= lambda * delta[i];
                if (trial.min() > 0.0) {
                    const std::vector<double> rt =
                        electrified_residual(kernel, trial, hold, dt);
                    double rn = 0.0;
                    for (double v : rt) rn = std::max(rn, std::fabs(v));
                    if (rn <= res * (1.0 - 0.1 * lambda) || rn <= tol) {
                        h = trial;
                        r = rt;
                        res = rn;
                        accepted = true;
                        break;
                    }
                }
                lambda *= 0.5;
            }
            if (!accepted) {
                // Line search stalled at the evaluation rounding floor.
                converged = res <= 1e4 * tol;
                break;
            }
            ++iter;
            converged = res <= tol;
        }
        stats.newton_iters = iter;
        stats.residual = res;
        if (converged) {
            state.h = h;
            state.t += dt;
            state.dt = std::min(dt / ts.safety, ts.dt_max);
            stats.dt_used = dt;
            return stats;
        }
        ++stats.retries;
        dt *= 0.5;
        if (dt < ts.dt_min)
            throw StepFailure("electrified step rejected below dt_min", state.t, dt,
                              state.h.min(), res);
    }
}

ElectrifiedRun electrified_run(const NonlocalKernel& kernel, ScalarField h0,
                               double t_end, const TimeStepper& ts,
                               const ElectrifiedRunOptions& opts) {
    ts.validate();
    require_same_grid(h0.grid, kernel.grid(), "electrified_run");
    if (!(h0.min() > 0.0))
        throw std::domain_error("electrified_run: initial field must be positive");
    if (!(t_end > 0.0)) throw std::invalid_argument("t_end must be positive");

    ElectrifiedRun run;
    run.state.h = std::move(h0);
    run.state.t = 0.0;
    run.state.dt = ts.dt_init;
    run.min_h_overall = run.state.h.min();
    const ScalarField& h = run.state.h;

    LubricationParams bf_params;
    bf_params.mobility = MobilitySpec::power_law(3.0);
    bf_params.cap_a = opts.cap_a > 0.0 ? opts.cap_a : 2.0 * h.max();

    const double lyap0 = lyapunov_electrified(kernel, h);
    double acc = 0.0;
    auto diss_rate = [&]() {
        const ElectrifiedWork w = electrified_work(kernel, h);
        const double d = h.grid.spacing();
        double s = 0.0;
        for (std::size_t f = 1; f < h.size(); ++f) {
            const double slope = (w.p[f] - w.p[f - 1]) / d;
            s += w.M[f] * slope * slope;
        }
        return s * d;
    };
    double rate = diss_rate();

    auto record = [&]() {
        BalanceLedger& lg = run.ledger;
        lg.time.push_back(run.state.t);
        lg.mass.push_back(integrate(h));
        lg.energy.push_back(energy_electrified(kernel, h));
        lg.bd_raw.push_back(0.0);
        lg.bd_combined.push_back(0.0);
        lg.bf.push_back(bf_entropy(h, bf_params));
        lg.min_h.push_back(h.min());
        lg.diss_energy_acc.push_back(acc);
        lg.diss_bf_acc.push_back(0.0);
        lg.diss_bd_acc.push_back(0.0);
        lg.residual_energy.push_back(lyapunov_electrified(kernel, h) + acc - lyap0);
        lg.residual_bf.push_back(0.0);
        lg.residual_bd.push_back(0.0);
        lg.residual_term_x.push_back(0.0);
    };
    record();

    long since_record = 0;
    while (run.state.t < t_end * (1.0 - 1e-14)) {
        run.state.dt = std::min(run.state.dt, t_end - run.state.t);
        const StepStats st = electrified_step(kernel, run.state, ts);
        ++run.accepted;
        run.rejected += st.retries;
        acc += 0.5 * st.dt_used * rate;
        rate = diss_rate();
        acc += 0.5 * st.dt_used * rate;
        run.min_h_overall = std::min(run.min_h_overall, h.min());
        if (++since_record >= opts.record_every ||
            run.state.t >= t_end * (1.0 - 1e-14)) {
            record();
            since_record = 0;
        }
    }
    return run;
}

SwStepStats swnl_step(const NonlocalKernel& kernel, ShallowWaterState& state,
                      const ShallowWaterParams& p, const TimeStepper& ts,
                      double dt_target) {
    ts.validate();
    require_same_grid(state.h.grid, kernel.grid(), "swnl_step");
    const std::size_t n = state.h.size();
    if (state.u.size() != n + 1)
        throw std::invalid_argument("swnl_step: u must live on the n+1 faces");
    state.u.front() = 0.0;
    state.u.back() = 0.0;

    const double d = state.h.grid.spacing();
    const double d2 = d * d;
    const ScalarField& h = state.h;
    const std::vector<double>& u = state.u;
    const double eps = p.eps, alpha = p.alpha;

    // Face averages on interior faces f = 1..n-1 (face f between cells f-1, f).
    std::vector<double> hhat(n + 1, 0.0), hbar(n + 1, 0.0), gamma(n + 1, 0.0);
    for (std::size_t f = 1; f < n; ++f) {
        hhat[f] = 0.5 * (h[f - 1] + h[f]);
        hbar[f] = hhat[f];
        gamma[f] = hbar[f] * hhat[f] / entropic_face_mobility(h[f - 1], h[f], p.mobility);
    }

    SwStepStats stats;
    for (std::size_t f = 1; f < n; ++f)
        stats.max_speed = std::max(stats.max_speed, std::fabs(u[f]));
    // The explicit nonlocal force behaves like an order-3/2 wave term against
    // the implicit capillarity; cap dt by its highest-mode frequency.
    const double kmax = kPi / d;
    const double omega = std::sqrt(h.max() * kmax * kmax * kmax / eps);
    double dt = std::min(dt_target, ts.dt_max);
    dt = std::min(dt, ts.safety * 2.0 / omega);
    if (stats.max_speed > 0.0) dt = std::min(dt, ts.safety * d / stats.max_speed);

    // Explicit momentum advection, capillary force, nonlocal force.
    std::vector<double> m(n + 1), G(n), adv(n + 1, 0.0), C(n + 1, 0.0),
        NL(n + 1, 0.0);
    for (std::size_t f = 0; f <= n; ++f) m[f] = hhat[f] * u[f];
    for (std::size_t i = 0; i < n; ++i) {
        const double uc = 0.5 * (u[i] + u[i + 1]);
        G[i] = uc * (uc >= 0.0 ? m[i] : m[i + 1]);
    }
    const std::vector<double> w = mirror_lap(h);
    const ScalarField ih = kernel.apply_serial(h);
    for (std::size_t f = 1; f < n; ++f) {
        adv[f] = (G[f] - G[f - 1]) / d;
        C[f] = (1.0 / eps) * hhat[f] * (w[f] - w[f - 1]) / d;
        NL[f] = (1.0 / eps) * hhat[f] * (ih[f] - ih[f - 1]) / d;
    }

    std::vector<double> phi(n + 1, 0.0), hpred(n), hpredf(n + 1, 0.0), hnew(n);
    while (true) {
        for (std::size_t f = 1; f < n; ++f) phi[f] = hbar[f] * u[f];
        for (std::size_t i = 0; i < n; ++i)
            hpred[i] = h[i] - dt * (phi[i + 1] - phi[i]) / d;
        for (std::size_t f = 1; f < n; ++f)
            hpredf[f] = 0.5 * (hpred[f - 1] + hpred[f]);

        const std::size_t nu_unknown = n - 1;  // interior faces
        BandedMatrix jac(static_cast<int>(nu_unknown), 2, 2);
        std::vector<double> rhs(nu_unknown);
        auto col_ok = [&](std::size_t f) { return f >= 1 && f <= n - 1; };
        for (std::size_t f = 1; f < n; ++f) {
            const std::size_t row = f - 1;
            const double r = (alpha / eps) * gamma[f] / hpredf[f];
            const double th = drag_theta(dt * r);
            jac.at(static_cast<int>(row), static_cast<int>(row)) +=
                hpredf[f] + dt * th * (alpha / eps) * gamma[f];
            // viscosity:  - dt d/dx(h du/dx), cell f sits between faces f, f+1
            jac.at(static_cast<int>(row), static_cast<int>(row)) +=
                dt * (h[f] + h[f - 1]) / d2;
            if (col_ok(f + 1))
                jac.at(static_cast<int>(row), static_cast<int>(row + 1)) -=
                    dt * h[f] / d2;
            if (col_ok(f - 1))
                jac.at(static_cast<int>(row), static_cast<int>(row - 1)) -=
                    dt * h[f - 1] / d2;
            // capillary force at the substituted new-time h: compose the mass
            // update pattern of u_k with the mirror Laplacian and the face
            // difference
            for (std::size_t k = std::max<std::size_t>(1, f >= 2 ? f - 2 : 1);
                 k <= std::min(n - 1, f + 2); ++k) {
                auto b_at = [&](std::size_t cell) {
                    if (cell == k - 1) return -1.0;
                    if (cell == k) return 1.0;
                    return 0.0;
                };
                auto lap_b = [&](std::size_t i) {
                    if (i == 0) return (b_at(1) - b_at(0)) / d2;
                    if (i + 1 == n) return (b_at(n - 2) - b_at(n - 1)) / d2;
                    return (b_at(i - 1) - 2.0 * b_at(i) + b_at(i + 1)) / d2;
                };
                const double coef = -dt * dt * (1.0 / eps) * hhat[f] * hbar[k] *
                                    (lap_b(f) - lap_b(f - 1)) / d2;
                jac.at(static_cast<int>(row), static_cast<int>(k - 1)) += coef;
            }
            rhs[row] = hhat[f] * u[f] -
                       dt * (adv[f] + NL[f] - C[f] +
                             (1.0 - th) * (alpha / eps) * gamma[f] * u[f]);
        }

        std::vector<double> usol;
        try {
            usol = solve_banded(jac, rhs);
        } catch (const NumericalError&) {
            usol.clear();
        }
        bool ok = !usol.empty();
        if (ok) {
            std::vector<double> phin(n + 1, 0.0);
            for (std::size_t f = 1; f < n; ++f) phin[f] = hbar[f] * usol[f - 1];
            for (std::size_t i = 0; i < n; ++i) {
                hnew[i] = h[i] - dt * (phin[i + 1] - phin[i]) / d;
                if (!(hnew[i] > 0.0) || !std::isfinite(hnew[i])) ok = false;
            }
        }
        if (ok) {
            state.h.values = hnew;
            for (std::size_t f = 1; f < n; ++f) state.u[f] = usol[f - 1];
            break;
        }
        ++stats.retries;
        dt *= 0.5;
        if (dt < ts.dt_min)
            throw StepFailure("swnl step rejected below dt_min", state.t, dt,
                              state.h.min(), 0.0);
    }
    state.t += dt;
    stats.dt_used = dt;
    return stats;
}

SwnlRun swnl_run(const NonlocalKernel& kernel, ScalarField h0,
                 std::vector<double> u0, double t_end,
                 const ShallowWaterParams& p, const TimeStepper& ts,
                 long record_every) {
    ts.validate();
    require_same_grid(h0.grid, kernel.grid(), "swnl_run");
    if (!(h0.min() > 0.0))
        throw std::domain_error("swnl_run: initial field must be positive");
    if (!(t_end > 0.0)) throw std::invalid_argument("t_end must be positive");
    if (u0.size() != h0.size() + 1)
        throw std::invalid_argument("swnl_run: u0 must live on the n+1 faces");

    SwnlRun run;
    run.state.h = std::move(h0);
    run.state.u = std::move(u0);
    run.state.t = 0.0;
    run.min_h_overall = run.state.h.min();
    const ScalarField& h = run.state.h;

    auto cell_u = [&]() {
        ScalarField uc(h.grid);
        for (std::size_t i = 0; i < h.size(); ++i)
            uc[i] = 0.5 * (run.state.u[i] + run.state.u[i + 1]);
        return uc;
    };
    auto energy = [&](const ScalarField& uc) {
        const ScalarField g = dx(h, WallScheme::NeumannMirror);
        double kin = 0.0, grad = 0.0;
        for (std::size_t i = 0; i < h.size(); ++i) {
            kin += h[i] * uc[i] * uc[i];
            grad += g[i] * g[i];
        }
        const double d = h.grid.spacing();
        return 0.5 * p.eps * kin * d + 0.5 * grad * d +
               0.5 * kernel.quadratic_form(h);
    };
    auto diss = [&](const ScalarField& uc) {
        const ScalarField gu = dx(uc, WallScheme::OneSided);
        double s = 0.0;
        for (std::size_t i = 0; i < h.size(); ++i)
            s += p.eps * h[i] * gu[i] * gu[i] +
                 p.alpha * h[i] * h[i] * uc[i] * uc[i] / p.mobility.value(h[i]);
        return s * h.grid.spacing();
    };

    ScalarField uc = cell_u();
    const double e0 = energy(uc);
    double acc = 0.0;
    double rate = diss(uc);

    auto record = [&]() {
        BalanceLedger& lg = run.ledger;
        lg.time.push_back(run.state.t);
        lg.mass.push_back(integrate(h));
        lg.energy.push_back(energy(uc));
        lg.bd_raw.push_back(bd_entropy(h, uc, p, BdForm::Raw));
        lg.bd_combined.push_back(bd_entropy(h, uc, p, BdForm::EnergyCombined));
        lg.bf.push_back(bf_entropy(h, p));
        lg.min_h.push_back(h.min());
        lg.diss_energy_acc.push_back(acc);
        lg.diss_bf_acc.push_back(0.0);
        lg.diss_bd_acc.push_back(0.0);
        lg.residual_energy.push_back(lg.energy.back() + acc - e0);
        lg.residual_bf.push_back(0.0);
        lg.residual_bd.push_back(0.0);
        lg.residual_term_x.push_back(0.0);
    };
    record();

    long since_record = 0;
    while (run.state.t < t_end * (1.0 - 1e-14)) {
        const double dt_target = std::min(ts.dt_max, t_end - run.state.t);
        const SwStepStats st = swnl_step(kernel, run.state, p, ts, dt_target);
        ++run.accepted;
        run.rejected += st.retries;
        uc = cell_u();
        acc += 0.5 * st.dt_used * rate;
        rate = diss(uc);
        acc += 0.5 * st.dt_used * rate;
        run.min_h_overall = std::min(run.min_h_overall, h.min());
        if (++since_record >= record_every ||
            run.state.t >= t_end * (1.0 - 1e-14)) {
            record();
            since_record = 0;
        }
    }
    return run;
}

}  // namespace entroflow
