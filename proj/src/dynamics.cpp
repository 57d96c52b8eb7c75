#include "dnls/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace dnls {

namespace {

constexpr cplx kI{0.0, 1.0};

int steps_for(double t_final, double dt) {
    if (!(dt > 0.0) || dt > 0.1) throw std::invalid_argument("time step must lie in (0, 0.1]");
    if (!(t_final >= 0.0)) throw std::invalid_argument("final time must be nonnegative");
    return static_cast<int>(std::llround(t_final / dt));
}

struct Constraints {
    double c1 = 0.0;
    double c2 = 0.0;
};

// Constraints and the pieces of the analytic Theta-derivative at (omega, Theta).
struct Evaluation {
    Constraints c;
    double dc1_dTheta = 0.0;
    double dc2_dTheta = 0.0;
};

Evaluation evaluate(const StandingWaveFamily& fam, const ComplexField& u, double omega, double Theta) {
    const auto prof = fam.profile(omega);
    const auto& w = fam.window();
    const cplx rot = std::exp(-kI * Theta);
    Evaluation e;
    for (std::size_t i = 0; i < w.size(); ++i) {
        const Eigen::Index k = static_cast<Eigen::Index>(i);
        const cplx r = rot * u(w.site(i)) - prof.phi(k);
        e.c.c1 += r.real() * prof.phi(k);
        e.c.c2 += r.imag() * prof.dphi(k);
        e.dc1_dTheta += r.imag() * prof.phi(k);
        e.dc2_dTheta -= (prof.phi(k) + r.real()) * prof.dphi(k);
    }
    return e;
}

ModulationState newton_decompose(const StandingWaveFamily& fam, const ComplexField& u, double omega, double Theta,
                                 const DecomposeOptions& opts) {
    const double E0 = fam.E0();
    ModulationState st;
    double prev_step = std::numeric_limits<double>::infinity();
    bool done = false;
    for (int it = 1; it <= opts.max_iterations && !done; ++it) {
        st.iterations = it;
        const double delta = omega - E0;
        const double h = opts.fd_step * delta;
        const Evaluation e = evaluate(fam, u, omega, Theta);
        const Constraints cp = evaluate(fam, u, omega + h, Theta).c;
        const Constraints cm = evaluate(fam, u, omega - h, Theta).c;
        const double j11 = (cp.c1 - cm.c1) / (2 * h), j21 = (cp.c2 - cm.c2) / (2 * h);
        const double j12 = e.dc1_dTheta, j22 = e.dc2_dTheta;
        const double det = j11 * j22 - j12 * j21;
        if (det == 0.0 || !std::isfinite(det)) throw TubeExit("singular decomposition Jacobian");
        const double d_omega = (e.c.c1 * j22 - j12 * e.c.c2) / det;
        const double d_Theta = (j11 * e.c.c2 - j21 * e.c.c1) / det;
        omega -= d_omega;
        Theta -= d_Theta;
        if (!(omega > E0)) throw TubeExit("decomposition drove omega below E0");
        const double step = std::abs(d_omega) / delta + std::abs(d_Theta);
        if (step < 1e-14 || (it > 3 && step > 0.5 * prev_step && step < 1e-10)) done = true;
        prev_step = step;
    }
    if (!done) throw TubeExit("decomposition Newton did not converge in " + std::to_string(opts.max_iterations) + " steps");
    const Evaluation fin = evaluate(fam, u, omega, Theta);
    st.omega = omega;
    st.Theta = Theta;
    st.gamma = Theta;
    st.constraint_re = fin.c.c1;
    st.constraint_im = fin.c.c2;
    const ComplexField phi = fam.phi_field(omega).on(u.window());
    st.r = std::exp(-kI * Theta) * u - phi;
    return st;
}

}  // namespace

SplitStepper::SplitStepper(const Potential& q, double dt, int power, bool nonlinear, double free_cutoff)
    : q_(q), dt_(dt), power_(power), nonlinear_(nonlinear), free_(dt, TimeSign::forward, free_cutoff) {}

void SplitStepper::phase(ComplexField& u, double tau) const {
    auto v = u.values();
    auto qv = q_.values();
    for (std::size_t i = 0; i < v.size(); ++i) {
        double rate = -qv[i];
        if (nonlinear_) rate += std::pow(std::abs(v[i]), power_ - 1);
        v[i] *= std::exp(kI * (tau * rate));
    }
}

void SplitStepper::step(ComplexField& u) const {
    phase(u, 0.5 * dt_);
    u = free_.apply_dirichlet(u);
    phase(u, 0.5 * dt_);
}

Trajectory evolve(const Potential& q, const ComplexField& u0, double t_final, const EvolveOptions& opts) {
    const int steps = steps_for(t_final, opts.dt);
    const double dt = steps > 0 ? t_final / steps : opts.dt;
    if (!q.window().contains(u0.window())) throw std::invalid_argument("initial datum must lie inside the potential window");
    const SplitStepper stepper(q, dt, opts.power, opts.nonlinear);
    const int stride = opts.output_stride > 0.0 ? std::max(1, static_cast<int>(std::llround(opts.output_stride / dt))) : 1;

    Trajectory tr;
    tr.scheme = "strang(phase/2, exact free flow, phase/2)";
    tr.dt = dt;
    ComplexField u = u0.on(q.window());
    const double n0 = weighted_norm(u, 2.0, 0.0);
    tr.times.push_back(0.0);
    tr.states.push_back(u);
    tr.norms.push_back(n0);
    int next_check = 1;
    for (int k = 1; k <= steps; ++k) {
        stepper.step(u);
        const double t = k * dt;
        const bool store = k % stride == 0 || k == steps;
        if (store || t >= next_check - 1e-12) {
            const double nrm = weighted_norm(u, 2.0, 0.0);
            if (!std::isfinite(nrm)) throw NumericalError("non-finite state at t = " + std::to_string(t));
            if (t >= next_check - 1e-12) {
                const double drift = std::abs(nrm - n0);
                if (drift > opts.norm_tol * std::max(1.0, t)) {
                    throw NumericalError("l2 norm drifted by " + std::to_string(drift) + " at t = " + std::to_string(t));
                }
                next_check = static_cast<int>(std::floor(t + 1e-12)) + 1;
            }
            if (store) {
                tr.times.push_back(t);
                tr.states.push_back(u);
                tr.norms.push_back(nrm);
            }
        }
    }
    return tr;
}

ModulationState modulation_decompose(const StandingWaveFamily& family, const ComplexField& u, double omega_guess,
                                     double Theta_guess, const DecomposeOptions& opts) {
    if (!u.window().contains(family.window())) throw std::invalid_argument("state window must contain the family window");
    {
        const ComplexField phi = family.phi_field(omega_guess).on(u.window());
        const double dist = weighted_norm(u - std::exp(kI * Theta_guess) * phi, 2.0, 0.0);
        const double pn = weighted_norm(phi, 2.0, 0.0);
        if (dist > opts.tube_fraction * pn) {
            throw TubeExit("state is " + std::to_string(dist / pn) + " (relative) from the seed standing wave");
        }
    }
    ModulationState st = newton_decompose(family, u, omega_guess, Theta_guess, opts);
    if (opts.check_uniqueness && opts.restarts > 0) {
        const double delta = omega_guess - family.E0();
        const double dw[] = {0.05, -0.05, 0.1};
        const double dT[] = {0.02, -0.02, 0.04};
        bool unique = true;
        for (int k = 0; k < opts.restarts; ++k) {
            const double om = omega_guess + dw[k % 3] * delta;
            const double Th = Theta_guess + dT[k % 3];
            try {
                const ModulationState alt = newton_decompose(family, u, om, Th, opts);
                if (std::abs(alt.omega - st.omega) > 1e-9 * std::max(1.0, st.omega) ||
                    std::abs(alt.Theta - st.Theta) > 1e-9) {
                    unique = false;
                }
            } catch (const TubeExit&) {
                unique = false;
            }
        }
        st.unique = unique;
    }
    return st;
}

std::vector<cplx> modulation_remainder(const Eigen::VectorXd& phi, const ComplexField& r, const LatticeWindow& window,
                                       int power) {
    const double p = power;
    std::vector<cplx> N(window.size());
    for (std::size_t i = 0; i < window.size(); ++i) {
        const double f = phi(static_cast<Eigen::Index>(i));
        const cplx z = r(window.site(i));
        const cplx u = f + z;
        const double fp = std::pow(std::abs(f), power - 1);
        N[i] = std::pow(std::abs(u), power - 1) * u - fp * f - 0.5 * (p + 1) * fp * z - 0.5 * (p - 1) * fp * std::conj(z);
    }
    return N;
}

ModulationRates modulation_rhs(const StandingWaveFamily& family, const ModulationState& state) {
    const auto prof = family.profile(state.omega);
    const auto& w = family.window();
    const auto N = modulation_remainder(prof.phi, state.r, w, family.power());
    double a_dphi = 0, b_phi = 0, b_d2phi = 0, imN_phi = 0, reN_dphi = 0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        const Eigen::Index k = static_cast<Eigen::Index>(i);
        const cplx r = state.r(w.site(i));
        a_dphi += r.real() * prof.dphi(k);
        b_phi += r.imag() * prof.phi(k);
        b_d2phi += r.imag() * prof.d2phi(k);
        imN_phi += N[i].imag() * prof.phi(k);
        reN_dphi += N[i].real() * prof.dphi(k);
    }
    const double half = 0.5 * prof.dnorm_sq;
    const double A11 = half - a_dphi, A12 = -b_phi, A21 = b_d2phi, A22 = -(half + a_dphi);
    const double det = A11 * A22 - A12 * A21;
    if (!(std::abs(det) > 1e-14 * half * half)) throw NumericalError("modulation matrix is singular");
    const double f1 = -imN_phi, f2 = -reN_dphi;
    return {(f1 * A22 - A12 * f2) / det, (A11 * f2 - A21 * f1) / det, det};
}

ScatteringStateReport extract_scattering_state(const LinearFlow& flow, const std::vector<double>& times,
                                               const std::vector<ComplexField>& w, const ScatteringStateOptions&) {
    if (times.size() != w.size() || times.size() < 2) {
        throw std::invalid_argument("scattering extraction needs at least two snapshots");
    }
    ScatteringStateReport rep;
    rep.times = times;
    std::vector<ComplexField> v;
    for (std::size_t k = 0; k < times.size(); ++k) v.push_back(flow.apply(w[k], times[k], TimeSign::backward, true));
    for (std::size_t k = 1; k < v.size(); ++k) rep.cauchy_diffs.push_back(weighted_norm(v[k] - v[k - 1], 2.0, 0.0));
    rep.cauchy_ok = true;
    for (std::size_t k = 1; k < rep.cauchy_diffs.size(); ++k) {
        if (rep.cauchy_diffs[k] > rep.cauchy_diffs[k - 1] * (1.0 + 1e-6) + 1e-15) rep.cauchy_ok = false;
    }
    if (!rep.cauchy_ok) rep.warning = "tail of e^{itH} P_c w(t) is not Cauchy (differences not decreasing)";
    rep.w_plus = v.back();
    const double s = times.back();
    const ComplexField y = flow.apply(rep.w_plus, s, TimeSign::forward, false);
    double mean_plus = 0.0, mean_minus = 0.0;
    std::optional<ComplexField> u_sigma[2];
    for (int idx = 0; idx < 2; ++idx) {
        const int sigma = idx == 0 ? 1 : -1;
        // e^{sigma i t Delta} = e^{-sigma i t (-Delta)}
        const TimeSign back = sigma == 1 ? TimeSign::backward : TimeSign::forward;
        const TimeSign fwd = sigma == 1 ? TimeSign::forward : TimeSign::backward;
        u_sigma[idx] = FreeFlow(s, back).apply_infinite(y);
        auto& res = idx == 0 ? rep.residual_plus : rep.residual_minus;
        for (std::size_t k = 0; k < times.size(); ++k) {
            const ComplexField z = FreeFlow(times[k], fwd).apply_infinite(*u_sigma[idx]);
            res.push_back(weighted_norm(z - w[k].on(z.window()), 2.0, 0.0));
        }
        double m = 0.0;
        for (double x : res) m += x;
        (idx == 0 ? mean_plus : mean_minus) = m / static_cast<double>(res.size());
    }
    rep.matched_sign = mean_plus <= mean_minus ? 1 : -1;
    rep.u_plus = *u_sigma[rep.matched_sign == 1 ? 0 : 1];
    return rep;
}

ComplexField gaussian_perturbation(const LatticeWindow& window, double epsilon, double width, int center) {
    ComplexField g(window);
    for (int n = window.n_min(); n <= window.n_max(); ++n) {
        const double x = n - center;
        g.at(n) = std::exp(-x * x / (2.0 * width * width));
    }
    const double nrm = weighted_norm(g, 2.0, 0.0);
    return (epsilon / nrm) * g;
}

std::pair<double, double> tail_average(const std::vector<double>& times, const std::vector<double>& values,
                                       double fraction) {
    if (times.empty() || times.size() != values.size()) throw std::invalid_argument("empty or mismatched series");
    const double t0 = times.front() + (times.back() - times.front()) * (1.0 - fraction);
    double sum = 0.0, lo = std::numeric_limits<double>::infinity(), hi = -lo;
    int cnt = 0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (times[i] < t0 - 1e-12) continue;
        sum += values[i];
        lo = std::min(lo, values[i]);
        hi = std::max(hi, values[i]);
        ++cnt;
    }
    return {sum / cnt, hi - lo};
}

StabilityReport stability_run(const Potential& q, const StandingWaveFamily& family, double omega0,
                              const ComplexField& perturbation, double t_final, const StabilityOptions& opts) {
    const auto& W = q.window();
    const auto& Wf = family.window();
    if (!W.contains(Wf)) throw std::invalid_argument("family window must lie inside the potential window");
    for (int n = Wf.n_min(); n <= Wf.n_max(); ++n) {
        if (q.q(n) != family.potential().q(n)) throw std::invalid_argument("family was built for a different potential");
    }
    const int steps = steps_for(t_final, opts.dt);
    const double dt = steps > 0 ? t_final / steps : opts.dt;
    const int stride = std::max(1, static_cast<int>(std::llround(opts.output_stride / dt)));
    const SplitStepper stepper(q, dt, family.power(), true);
    const int snapshot_every =
        opts.snapshot_stride > 0.0 ? std::max(1, static_cast<int>(std::llround(opts.snapshot_stride / dt))) : 0;

    StabilityReport rep;
    rep.omega0 = omega0;
    rep.epsilon = weighted_norm(perturbation, 2.0, 0.0);
    rep.t_final = t_final;
    rep.dt = dt;
    rep.sigma = opts.sigma;

    ComplexField u = family.phi_field(omega0).on(W) + perturbation.on(W);
    const double n0 = weighted_norm(u, 2.0, 0.0);

    const double inf = std::numeric_limits<double>::infinity();
    std::vector<StrichartzAccumulator> acc{{4.0, inf, 0.0, t_final}, {6.0, 6.0, 0.0, t_final}, {inf, 2.0, 0.0, t_final}};

    // Snapshot steps for the scattering state.
    std::vector<int> snap_steps;
    if (opts.extract_scattering) {
        for (int k = 0; k < opts.scattering.samples; ++k) {
            const double ts = t_final - opts.scattering.spacing * (opts.scattering.samples - 1 - k);
            if (ts >= 0.0) snap_steps.push_back(static_cast<int>(std::llround(ts / dt)));
        }
    }
    std::vector<double> snap_times;
    std::vector<ComplexField> snaps;

    ModulationState st = modulation_decompose(family, u, omega0, 0.0, opts.decompose);
    rep.decomposition_unique = st.unique;
    DecomposeOptions cont = opts.decompose;
    cont.check_uniqueness = false;
    double omega_integral = 0.0;
    ModulationRates rates = modulation_rhs(family, st);
    double last_abs = std::abs(rates.omega_dot) + std::abs(rates.gamma_dot);

    auto record = [&](int k, const ModulationState& s, const ModulationRates& rt) {
        const double t = k * dt;
        const double rl2 = weighted_norm(s.r, 2.0, 0.0);
        for (auto& a : acc) a.add(t, s.r);
        const double cr = std::max(std::abs(s.constraint_re), std::abs(s.constraint_im));
        if (rl2 > 0.0) rep.max_constraint_ratio = std::max(rep.max_constraint_ratio, cr / rl2);
        rep.sup_omega_deviation = std::max(rep.sup_omega_deviation, std::abs(s.omega - omega0));
        rep.modulation_linf = std::max(rep.modulation_linf, std::max(std::abs(rt.omega_dot), std::abs(rt.gamma_dot)));
        if (k % stride == 0 || k == steps) {
            rep.times.push_back(t);
            rep.omega.push_back(s.omega);
            rep.gamma.push_back(s.gamma);
            rep.Theta.push_back(s.Theta);
            rep.omega_dot.push_back(rt.omega_dot);
            rep.gamma_dot.push_back(rt.gamma_dot);
            rep.r_l2.push_back(rl2);
            rep.r_weighted.push_back(weighted_norm(s.r, 2.0, -opts.sigma));
            rep.r_sup.push_back(weighted_norm(s.r, inf, 0.0));
            const double nrm = weighted_norm(u, 2.0, 0.0);
            rep.norm.push_back(nrm);
            rep.max_norm_drift = std::max(rep.max_norm_drift, std::abs(nrm - n0));
            rep.modulation_l1_cumulative.push_back(rep.modulation_l1);
        }
        if (snapshot_every > 0 && (k % snapshot_every == 0 || k == steps)) {
            rep.snapshot_times.push_back(t);
            rep.snapshots.push_back(u);
        }
        if (std::find(snap_steps.begin(), snap_steps.end(), k) != snap_steps.end()) {
            snap_times.push_back(t);
            snaps.push_back(std::exp(kI * s.Theta) * s.r);
        }
    };
    record(0, st, rates);

    int next_check = 1;
    for (int k = 1; k <= steps; ++k) {
        stepper.step(u);
        const double t = k * dt;
        if (t >= next_check - 1e-12) {
            const double drift = std::abs(weighted_norm(u, 2.0, 0.0) - n0);
            if (!std::isfinite(drift) || drift > opts.norm_tol * std::max(1.0, t)) {
                rep.message = "l2 norm drifted by " + std::to_string(drift) + " at t = " + std::to_string(t);
                rep.tube_exit = true;
                rep.exit_time = t;
                break;
            }
            next_check = static_cast<int>(std::floor(t + 1e-12)) + 1;
        }
        ModulationState next;
        ModulationRates nr;
        try {
            next = modulation_decompose(family, u, st.omega, st.Theta + st.omega * dt, cont);
            nr = modulation_rhs(family, next);
        } catch (const NumericalError& e) {
            rep.tube_exit = true;
            rep.exit_time = t;
            rep.message = e.what();
            break;
        }
        omega_integral += 0.5 * dt * (st.omega + next.omega);
        next.gamma = next.Theta - omega_integral;
        const double cur_abs = std::abs(nr.omega_dot) + std::abs(nr.gamma_dot);
        rep.modulation_l1 += 0.5 * dt * (last_abs + cur_abs);
        rep.omega_dot_l1 += 0.5 * dt * (std::abs(rates.omega_dot) + std::abs(nr.omega_dot));
        rep.gamma_dot_l1 += 0.5 * dt * (std::abs(rates.gamma_dot) + std::abs(nr.gamma_dot));
        last_abs = cur_abs;
        st = std::move(next);
        rates = nr;
        record(k, st, rates);
    }
    for (const auto& a : acc) rep.strichartz.push_back(a.result());
    if (!rep.times.empty()) {
        const auto [mean, spread] = tail_average(rep.times, rep.omega, 0.25);
        rep.omega_plus = mean;
        rep.omega_plus_spread = spread;
    }
    if (opts.extract_scattering && !rep.tube_exit && snaps.size() >= 2) {
        const LinearFlow flow(q);
        rep.scattering = extract_scattering_state(flow, snap_times, snaps, opts.scattering);
    }
    return rep;
}

}  // namespace dnls
