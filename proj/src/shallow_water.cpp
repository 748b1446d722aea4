#include "entroflow/shallow_water.hpp"

#include <algorithm>
#include <cmath>

#include "entroflow/linalg.hpp"
#include "entroflow/ops.hpp"

namespace entroflow {

double drag_theta(double x) {
    if (x < 1e-4) return 0.5 + x / 12.0;
    const double em = -std::expm1(-x);  // 1 - exp(-x)
    return (x - em) / (x * em);
}

namespace {

void require_periodic(const Grid1D& g, const char* what) {
    if (g.topology != Topology::Periodic)
        throw std::invalid_argument(std::string(what) +
                                    ": staggered solver requires a periodic grid");
}

// Drag face weight discretizing h^2/F(h): hbar*hhat/M with the entropic face
// mobility M, so the relaxed balance reproduces the lubrication face flux.
double drag_face_weight(double hbar, double hhat, double a, double b,
                        const MobilitySpec& mob) {
    return hbar * hhat / entropic_face_mobility(a, b, mob);
}

}  // namespace

ScalarField cell_velocity(const ScalarField& h, const std::vector<double>& u) {
    const std::size_t n = h.size();
    ScalarField uc(h.grid);
    if (h.grid.topology == Topology::Periodic) {
        if (u.size() != n)
            throw std::invalid_argument("cell_velocity: size mismatch");
        for (std::size_t i = 0; i < n; ++i)
            uc[i] = 0.5 * (u[(i + n - 1) % n] + u[i]);
    } else {
        if (u.size() != n + 1)
            throw std::invalid_argument("cell_velocity: size mismatch");
        for (std::size_t i = 0; i < n; ++i) uc[i] = 0.5 * (u[i] + u[i + 1]);
    }
    return uc;
}

std::vector<double> sw_prepared_velocity(const ScalarField& h0,
                                         const ShallowWaterParams& p) {
    require_periodic(h0.grid, "sw_prepared_velocity");
    const std::vector<double> q = lubrication_flux(h0, p.relaxation_limit());
    const std::vector<double> hf = face_average(h0, FaceAverageRule::arithmetic());
    std::vector<double> u(q.size());
    for (std::size_t f = 0; f < q.size(); ++f) u[f] = q[f] / hf[f];
    return u;
}

SwStepStats sw_step(ShallowWaterState& state, const ShallowWaterParams& p,
                    const TimeStepper& ts, double dt_target,
                    const SwStepOptions& opts) {
    p.validate();
    ts.validate();
    require_periodic(state.h.grid, "sw_step");
    const std::size_t n = state.h.size();
    if (state.u.size() != n) throw std::invalid_argument("sw_step: u size mismatch");
    const double d = state.h.grid.spacing();
    const double d2 = d * d, d4 = d2 * d2;
    const ScalarField& h = state.h;
    const std::vector<double>& u = state.u;
    const double eps = p.eps, alpha = p.alpha, nu = p.nu_c(), ccap = p.c_cap();

    auto ip = [n](std::size_t i) { return (i + 1) % n; };
    auto im = [n](std::size_t i) { return (i + n - 1) % n; };

    std::vector<double> hhat(n), hbar(n);
    for (std::size_t f = 0; f < n; ++f) {
        hhat[f] = 0.5 * (h[f] + h[ip(f)]);
        hbar[f] = opts.mass_flux == MassFluxScheme::Centered
                      ? hhat[f]
                      : (u[f] >= 0.0 ? h[f] : h[ip(f)]);
    }

    SwStepStats stats;
    for (std::size_t f = 0; f < n; ++f) {
        const double c = std::sqrt(std::pow(hhat[f], p.beta) / (eps * p.fr * p.fr));
        stats.max_speed = std::max(stats.max_speed, std::fabs(u[f]) + c);
    }
    double dt = std::min(dt_target, ts.dt_max);
    dt = std::min(dt, ts.safety * d / stats.max_speed);

    // Explicit pieces independent of dt.
    std::vector<double> m(n), G(n), adv(n), P(n), C(n), gamma(n), w(n);
    for (std::size_t f = 0; f < n; ++f) m[f] = hhat[f] * u[f];
    for (std::size_t i = 0; i < n; ++i) {
        const double uc = 0.5 * (u[im(i)] + u[i]);
        G[i] = uc * (uc >= 0.0 ? m[im(i)] : m[i]);
        w[i] = (h[im(i)] - 2.0 * h[i] + h[ip(i)]) / d2;
    }
    const double pcoef = 1.0 / (eps * p.fr * p.fr * (p.beta + 1.0));
    for (std::size_t f = 0; f < n; ++f) {
        adv[f] = (G[ip(f)] - G[f]) / d;
        P[f] = pcoef * (std::pow(h[ip(f)], p.beta + 1.0) -
                        std::pow(h[f], p.beta + 1.0)) / d;
        C[f] = (ccap / eps) * hhat[f] * (w[ip(f)] - w[f]) / d;
        gamma[f] = drag_face_weight(hbar[f], hhat[f], h[f], h[ip(f)], p.mobility);
    }

    std::vector<double> phi_n(n), hpred(n), hpredf(n), unew, hnew(n);
    const int coef5[5] = {1, -4, 6, -4, 1};
    while (true) {
        for (std::size_t f = 0; f < n; ++f) phi_n[f] = hbar[f] * u[f];
        for (std::size_t i = 0; i < n; ++i)
            hpred[i] = h[i] - dt * (phi_n[i] - phi_n[im(i)]) / d;
        for (std::size_t f = 0; f < n; ++f)
            hpredf[f] = 0.5 * (hpred[f] + hpred[ip(f)]);

        BandedMatrix jac(static_cast<int>(n), 2, 2);
        std::vector<MatrixEntry> corners;
        std::vector<double> rhs(n);
        auto add = [&](std::size_t row, std::size_t col, double v) {
            const int i = static_cast<int>(row), j = static_cast<int>(col);
            if (jac.in_band(i, j)) jac.at(i, j) += v;
            else corners.push_back({i, j, v});
        };
        for (std::size_t f = 0; f < n; ++f) {
            const double r = (alpha / eps) * gamma[f] / hpredf[f];
            const double th = drag_theta(dt * r);
            add(f, f, hpredf[f] + dt * th * (alpha / eps) * gamma[f]);
            // viscosity -dt * nu * d/dx(h du/dx)
            add(f, f, dt * nu * (h[ip(f)] + h[f]) / d2);
            add(f, ip(f), -dt * nu * h[ip(f)] / d2);
            add(f, im(f), -dt * nu * h[f] / d2);
            // capillary force at the substituted new-time h: fourth difference
            // of the mass flux over faces
            const double ccoef = dt * dt * (ccap / eps) * hhat[f] / d4;
            for (int k = -2; k <= 2; ++k) {
                const std::size_t col = (f + n + static_cast<std::size_t>(k + 2) - 2) % n;
                add(f, col, ccoef * coef5[k + 2] * hbar[col]);
            }
            rhs[f] = hhat[f] * u[f] -
                     dt * (adv[f] + P[f] - C[f] +
                           (1.0 - th) * (alpha / eps) * gamma[f] * u[f]);
        }
        try {
            unew = solve_cyclic_banded(jac, corners, rhs);
        } catch (const NumericalError&) {
            unew.clear();
        }
        bool ok = !unew.empty();
        if (ok) {
            for (std::size_t i = 0; i < n; ++i) {
                const double phi_r = hbar[i] * unew[i];
                const double phi_l = hbar[im(i)] * unew[im(i)];
                hnew[i] = h[i] - dt * (phi_r - phi_l) / d;
                if (!(hnew[i] > 0.0) || !std::isfinite(hnew[i])) ok = false;
            }
        }
        if (ok) break;
        ++stats.retries;
        dt *= 0.5;
        if (dt < ts.dt_min)
            throw StepFailure("shallow-water step rejected below dt_min", state.t,
                              dt, state.h.min(), 0.0);
    }

    state.h.values = hnew;
    state.u = unew;
    state.t += dt;
    stats.dt_used = dt;
    return stats;
}

namespace {

double drag_dissipation_rate(const ScalarField& h, const ScalarField& uc,
                             const ShallowWaterParams& p) {
    double s = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i)
        s += p.alpha * h[i] * h[i] * uc[i] * uc[i] / p.mobility.value(h[i]);
    return s * h.grid.spacing();
}

}  // namespace

SwRun sw_run(ScalarField h0, std::vector<double> u0, double t_end,
             const ShallowWaterParams& p, const TimeStepper& ts,
             const SwRunOptions& opts) {
    p.validate();
    ts.validate();
    require_periodic(h0.grid, "sw_run");
    if (!(h0.min() > 0.0))
        throw std::domain_error("sw_run: initial field must be positive");
    if (!(t_end > 0.0)) throw std::invalid_argument("t_end must be positive");

    SwRun run;
    run.state.h = std::move(h0);
    run.state.u = std::move(u0);
    run.state.t = 0.0;
    run.min_h_overall = run.state.h.min();
    const ScalarField& h = run.state.h;

    const bool have_bf_rate = p.mobility.kind == MobilitySpec::Kind::PowerLaw;
    const LubricationParams lub =
        have_bf_rate ? p.relaxation_limit() : LubricationParams{};

    ScalarField uc = cell_velocity(h, run.state.u);
    const double e0 = energy_shallow_water(h, uc, p);
    const double bf0 = bf_entropy(h, p);
    const double bd0_raw = bd_entropy(h, uc, p, BdForm::Raw);
    double acc_e = 0.0, acc_bf = 0.0, acc_drag = 0.0, acc_bdspec = 0.0, acc_x = 0.0;
    double rate_e = energy_dissipation_rate_sw(h, uc, p);
    double rate_bf = have_bf_rate ? bf_dissipation_rate(h, lub) : 0.0;
    double rate_drag = drag_dissipation_rate(h, uc, p);
    double rate_bdspec = bd_dissipation_specific(h, p);
    double rate_x = term_x_rate(h, uc, p);

    auto record = [&]() {
        BalanceLedger& lg = run.ledger;
        lg.time.push_back(run.state.t);
        lg.mass.push_back(integrate(h));
        const double e = energy_shallow_water(h, uc, p);
        const double bf = bf_entropy(h, p);
        lg.energy.push_back(e);
        lg.bd_raw.push_back(bd_entropy(h, uc, p, BdForm::Raw));
        lg.bd_combined.push_back(bd_entropy(h, uc, p, BdForm::EnergyCombined));
        lg.bf.push_back(bf);
        lg.min_h.push_back(h.min());
        lg.diss_energy_acc.push_back(acc_e);
        lg.diss_bf_acc.push_back(acc_bf);
        lg.diss_bd_acc.push_back(acc_drag + acc_bdspec);
        lg.residual_energy.push_back(e + acc_e - e0);
        lg.residual_bf.push_back(have_bf_rate ? bf + acc_bf - bf0 : 0.0);
        lg.residual_bd.push_back(lg.bd_raw.back() - bd0_raw + acc_drag + acc_bdspec +
                                 p.nu_c() * p.alpha * (bf - bf0));
        lg.residual_term_x.push_back((bf - bf0) - acc_x);
    };
    record();

    long since_record = 0;
    SwStepOptions sopts{opts.mass_flux};
    while (run.state.t < t_end * (1.0 - 1e-14)) {
        const double dt_target = std::min(ts.dt_max, t_end - run.state.t);
        const SwStepStats st = sw_step(run.state, p, ts, dt_target, sopts);
        ++run.accepted;
        run.rejected += st.retries;
        uc = cell_velocity(h, run.state.u);
        acc_e += 0.5 * st.dt_used * rate_e;
        acc_bf += 0.5 * st.dt_used * rate_bf;
        acc_drag += 0.5 * st.dt_used * rate_drag;
        acc_bdspec += 0.5 * st.dt_used * rate_bdspec;
        acc_x += 0.5 * st.dt_used * rate_x;
        rate_e = energy_dissipation_rate_sw(h, uc, p);
        rate_bf = have_bf_rate ? bf_dissipation_rate(h, lub) : 0.0;
        rate_drag = drag_dissipation_rate(h, uc, p);
        rate_bdspec = bd_dissipation_specific(h, p);
        rate_x = term_x_rate(h, uc, p);
        acc_e += 0.5 * st.dt_used * rate_e;
        acc_bf += 0.5 * st.dt_used * rate_bf;
        acc_drag += 0.5 * st.dt_used * rate_drag;
        acc_bdspec += 0.5 * st.dt_used * rate_bdspec;
        acc_x += 0.5 * st.dt_used * rate_x;
        run.min_h_overall = std::min(run.min_h_overall, h.min());
        if (++since_record >= opts.record_every ||
            run.state.t >= t_end * (1.0 - 1e-14)) {
            record();
            since_record = 0;
        }
    }
    return run;
}

TermXAudit term_X_audit(const BalanceLedger& ledger) {
    if (ledger.rows() < 2)
        throw std::invalid_argument("term_X_audit: ledger needs at least two rows");
    TermXAudit a;
    a.delta_entropy = ledger.bf.back() - ledger.bf.front();
    a.residual = ledger.residual_term_x.back();
    a.x_integral = a.delta_entropy - a.residual;
    return a;
}

}  // namespace entroflow
