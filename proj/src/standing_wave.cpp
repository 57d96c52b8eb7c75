#include "dnls/standing_wave.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "dnls/error.hpp"
#include "dnls/parallel.hpp"
#include "dnls/tridiagonal.hpp"

namespace dnls {

namespace {

Eigen::VectorXd power_map(const Eigen::VectorXd& x, int p) {
    Eigen::VectorXd y(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) y(i) = std::pow(std::abs(x(i)), p - 1) * x(i);
    return y;
}

Eigen::VectorXd to_real(const ComplexField& u) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(u.size()));
    auto vals = u.values();
    for (std::size_t i = 0; i < vals.size(); ++i) v(static_cast<Eigen::Index>(i)) = vals[i].real();
    return v;
}

ComplexField to_field(const LatticeWindow& w, const Eigen::VectorXd& v) {
    return ComplexField::from_real(w, std::span<const double>(v.data(), static_cast<std::size_t>(v.size())));
}

Eigen::VectorXd hamiltonian(const Potential& q, const Eigen::VectorXd& x) {
    const Eigen::Index n = x.size();
    Eigen::VectorXd y(n);
    auto qv = q.values();
    for (Eigen::Index i = 0; i < n; ++i) {
        double v = (2.0 + qv[static_cast<std::size_t>(i)]) * x(i);
        if (i > 0) v -= x(i - 1);
        if (i + 1 < n) v -= x(i + 1);
        y(i) = v;
    }
    return y;
}

// L+ = H + omega - p |phi|^{p-1}, tridiagonal solve.
Eigen::VectorXd solve_linearized(const Potential& q, const Eigen::VectorXd& phi, double omega, int p,
                                 const Eigen::VectorXd& rhs) {
    const std::size_t n = static_cast<std::size_t>(phi.size());
    std::vector<double> sub(n - 1, -1.0), sup(n - 1, -1.0), diag(n), b(n);
    auto qv = q.values();
    for (std::size_t i = 0; i < n; ++i) {
        diag[i] = 2.0 + qv[i] + omega - p * std::pow(std::abs(phi(static_cast<Eigen::Index>(i))), p - 1);
        b[i] = rhs(static_cast<Eigen::Index>(i));
    }
    const auto x = solve_tridiagonal<double>(sub, diag, sup, b);
    return Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(n));
}

Eigen::VectorXd newton_real(const Potential& q, Eigen::VectorXd phi, double omega, int p, double tol, int max_it) {
    double prev = std::numeric_limits<double>::infinity();
    for (int it = 0; it < max_it; ++it) {
        const Eigen::VectorXd F = hamiltonian(q, phi) - power_map(phi, p) + omega * phi;
        const Eigen::VectorXd d = solve_linearized(q, phi, omega, p, F);
        phi -= d;
        const double dn = d.norm(), pn = phi.norm();
        if (!std::isfinite(dn)) break;
        if (dn <= tol * pn) return phi;
        if (it >= 3 && dn > 0.5 * prev && dn < 1e-12 * pn) return phi;  // rounding floor
        prev = dn;
    }
    throw NumericalError("Newton iteration for the standing wave at omega = " + std::to_string(omega) +
                         " did not converge");
}

// Shared data of the bifurcation equations: E0, phi0 and R(-E0) P_c as a dense
// LU of H + E0 + phi0 phi0^T applied on the complement of phi0.
struct Bifurcation {
    double E0 = 0.0;
    Eigen::VectorXd phi0;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu;

    Bifurcation(const Potential& q, const StandingWaveOptions& opts) {
        const SpectralDecomposition sd = discrete_spectrum(q, opts.spectrum);
        if (sd.eigenvalues.empty()) {
            throw HypothesisError("no discrete eigenvalue: the single-eigenvalue hypothesis fails");
        }
        const GroundState gs = ground_state(sd);
        E0 = gs.E0;
        phi0 = Eigen::Map<const Eigen::VectorXd>(gs.phi0.data(), static_cast<Eigen::Index>(gs.phi0.size()));
        const Eigen::Index n = phi0.size();
        Eigen::MatrixXd M = phi0 * phi0.transpose();
        auto qv = q.values();
        for (Eigen::Index i = 0; i < n; ++i) {
            M(i, i) += 2.0 + qv[static_cast<std::size_t>(i)] + E0;
            if (i + 1 < n) {
                M(i, i + 1) -= 1.0;
                M(i + 1, i) -= 1.0;
            }
        }
        lu.compute(M);
    }

    Eigen::VectorXd reduced(Eigen::VectorXd y) const {
        y -= phi0.dot(y) * phi0;
        Eigen::VectorXd x = lu.solve(y);
        x -= phi0.dot(x) * phi0;
        return x;
    }
};

// Newton for s in s <(phi0 + s g)^p, phi0> = delta.
std::optional<double> solve_s(const Bifurcation& b, const Eigen::VectorXd& g, double s, double delta, int p) {
    for (int it = 0; it < 60; ++it) {
        const Eigen::VectorXd u = b.phi0 + s * g;
        const double A = power_map(u, p).dot(b.phi0);
        double dA = 0.0;
        for (Eigen::Index i = 0; i < u.size(); ++i) dA += p * std::pow(std::abs(u(i)), p - 1) * g(i) * b.phi0(i);
        const double F = s * A - delta;
        const double dF = A + s * dA;
        if (dF == 0.0 || !std::isfinite(dF)) return std::nullopt;
        const double ds = F / dF;
        s -= ds;
        if (!(s > 0.0)) return std::nullopt;
        if (std::abs(ds) <= 1e-16 * s) break;
    }
    return s;
}

BranchEntry solve_entry(const Potential& q, const Bifurcation& b, double omega, const StandingWaveOptions& opts) {
    const int p = opts.power;
    const auto& w = q.window();
    BranchEntry e;
    e.omega = omega;
    e.g = ComplexField(w);
    e.phi = ComplexField(w);
    const double delta = omega - b.E0;
    if (!(delta > 0.0)) {
        e.message = "omega must exceed E0";
        return e;
    }
    const double norm_p1 = power_map(b.phi0, p).dot(b.phi0);
    double s = delta / norm_p1;
    Eigen::VectorXd g = b.reduced(power_map(b.phi0, p));
    double prev_step = std::numeric_limits<double>::infinity();
    double beta = 1.0;
    for (int it = 1; it <= opts.max_iterations; ++it) {
        e.iterations = it;
        const auto s_new = solve_s(b, g, s, delta, p);
        if (!s_new) {
            e.message = "no positive root for a^" + std::to_string(p - 1);
            return e;
        }
        s = *s_new;
        const Eigen::VectorXd G = b.reduced(-delta * g + power_map(b.phi0 + s * g, p));
        const Eigen::VectorXd diff = G - g;
        const double step = diff.norm();
        if (!std::isfinite(step)) {
            e.message = "fixed point overflow";
            return e;
        }
        if (!e.damped && it > 1 && step > prev_step) {
            e.damped = true;
            beta = opts.damping;
        }
        g += beta * diff;
        prev_step = step;
        if (step <= opts.step_tol * std::max(1.0, g.norm())) {
            e.converged = true;
            break;
        }
    }
    if (!e.converged) {
        e.message = "fixed point did not converge in " + std::to_string(opts.max_iterations) + " iterations";
    }
    if (const auto s_fin = solve_s(b, g, s, delta, p)) s = *s_fin;
    e.a = std::pow(s, 1.0 / (p - 1));
    const Eigen::VectorXd phi = e.a * b.phi0 + std::pow(e.a, p) * g;
    e.g = to_field(w, g);
    e.phi = to_field(w, phi);
    e.residual = standing_wave_residual(q, e.phi, omega, p);
    if (e.converged && !(e.residual < opts.residual_tol)) {
        e.converged = false;
        e.message = "residual " + std::to_string(e.residual) + " above tolerance";
    }
    return e;
}

}  // namespace

double standing_wave_residual(const Potential& q, const ComplexField& phi, double omega, int power) {
    ComplexField r = apply_hamiltonian(q, phi);
    auto rv = r.values();
    auto pv = phi.values();
    for (std::size_t i = 0; i < rv.size(); ++i) {
        rv[i] += -std::pow(std::abs(pv[i]), power - 1) * pv[i] + omega * pv[i];
    }
    return weighted_norm(r, 2.0, 0.0);
}

std::vector<double> branch_grid(double E0, double lo, double hi, int count) {
    if (count < 1 || !(lo > 0.0) || !(hi >= lo)) throw std::invalid_argument("invalid branch grid");
    std::vector<double> out;
    for (int i = 0; i < count; ++i) {
        const double f = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
        out.push_back(E0 + E0 * std::exp(std::log(lo) + f * (std::log(hi) - std::log(lo))));
    }
    return out;
}

StandingWaveBranch solve_branch(const Potential& q, std::span<const double> omegas, const StandingWaveOptions& opts) {
    if (opts.power < 3) throw std::invalid_argument("nonlinearity power must be at least 3");
    const Bifurcation b(q, opts);
    StandingWaveBranch br;
    br.E0 = b.E0;
    br.phi0 = to_field(q.window(), b.phi0);
    br.power = opts.power;
    br.q = std::make_shared<const Potential>(q);
    br.options = opts;
    br.entries.resize(omegas.size());
    parallel_for(omegas.size(), [&](std::size_t i) {
        BranchEntry e = solve_entry(q, b, omegas[i], opts);
        if (omegas[i] > b.E0 * (1.0 + opts.eta_fraction) * (1.0 + 1e-12) && e.message.empty()) {
            e.message = "omega beyond the configured branch extent";
        }
        br.entries[i] = std::move(e);
    });
    return br;
}

ExpansionReport verify_expansion(const StandingWaveBranch& branch) {
    std::vector<const BranchEntry*> ok;
    for (const auto& e : branch.entries) {
        if (e.converged) ok.push_back(&e);
    }
    if (ok.size() < 3) throw std::invalid_argument("expansion check needs at least 3 converged entries");
    std::sort(ok.begin(), ok.end(), [](auto* x, auto* y) { return x->omega < y->omega; });
    const double d_lo = ok.front()->omega - branch.E0, d_hi = ok.back()->omega - branch.E0;
    if (d_hi < 10.0 * d_lo * (1.0 - 1e-9)) throw std::invalid_argument("expansion check needs omega - E0 spanning a decade");
    const int p = branch.power;
    const Eigen::VectorXd phi0 = to_real(branch.phi0);
    const double norm_p1 = power_map(phi0, p).dot(phi0);  // ||phi0||_{p+1}^{p+1}
    ExpansionReport rep;
    rep.overlap_positive = true;
    for (const auto* e : ok) {
        const double d = e->omega - branch.E0;
        const Eigen::VectorXd phi = to_real(e->phi);
        const double scale = std::pow(d, -1.0 / (p - 1)) * std::pow(norm_p1, 1.0 / (p - 1));
        rep.delta.push_back(d);
        rep.rho.push_back((scale * phi - phi0).norm());
        rep.rho_over_delta.push_back(rep.rho.back() / d);
        rep.a_ratio.push_back(d / (std::pow(e->a, p - 1) * norm_p1));
        if (!(phi.dot(phi0) > 0.0)) rep.overlap_positive = false;
    }
    rep.rho_monotone = true;
    for (std::size_t i = 1; i < rep.rho.size(); ++i) {
        if (!(rep.rho[i] > rep.rho[i - 1])) rep.rho_monotone = false;
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(rep.rho.size());
    for (std::size_t i = 0; i < rep.rho.size(); ++i) {
        const double x = std::log(rep.delta[i]), y = std::log(rep.rho[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    rep.fitted_power = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    rep.fitted_coefficient = std::exp((sy - rep.fitted_power * sx) / n);
    return rep;
}

DecayFit fit_exponential_decay(const ComplexField& phi, int n_lo, double rel_floor) {
    double mx = 0.0;
    for (auto v : phi.values()) mx = std::max(mx, std::abs(v));
    DecayFit fit;
    fit.n_lo = n_lo;
    std::vector<double> xs, ys;
    const auto& w = phi.window();
    for (int n = w.n_min(); n <= w.n_max(); ++n) {
        const double v = std::abs(phi(n));
        if (std::abs(n) < n_lo || !(v > rel_floor * mx)) continue;
        xs.push_back(std::abs(n));
        ys.push_back(std::log(v));
        fit.n_hi = std::max(fit.n_hi, std::abs(n));
    }
    if (xs.size() < 3) throw std::invalid_argument("too few sites in the decay region");
    const double n = static_cast<double>(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
        syy += ys[i] * ys[i];
    }
    const double cov = n * sxy - sx * sy, vx = n * sxx - sx * sx, vy = n * syy - sy * sy;
    const double slope = cov / vx;
    fit.rate = -slope;
    fit.prefactor = std::exp((sy - slope * sx) / n);
    fit.r2 = vy > 0.0 ? cov * cov / (vx * vy) : 1.0;
    return fit;
}

ComplexField newton_standing_wave(const Potential& q, const ComplexField& seed, double omega, int power, double tol,
                                  int max_iterations) {
    const Eigen::VectorXd phi = newton_real(q, to_real(seed.on(q.window())), omega, power, tol, max_iterations);
    return to_field(q.window(), phi);
}

ComplexField d_omega_phi(const StandingWaveBranch& branch, double omega, double h_rel) {
    if (!branch.q) throw std::invalid_argument("branch carries no potential");
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& e : branch.entries) {
        if (!e.converged) continue;
        lo = std::min(lo, e.omega);
        hi = std::max(hi, e.omega);
    }
    if (!(omega >= lo && omega <= hi)) throw std::invalid_argument("omega lies outside the computed branch");
    const Potential& q = *branch.q;
    const Bifurcation b(q, branch.options);
    const double h = h_rel * (omega - b.E0);
    auto resolve = [&](double om) {
        BranchEntry e = solve_entry(q, b, om, branch.options);
        if (!e.converged) throw NumericalError("re-solve failed at omega = " + std::to_string(om) + ": " + e.message);
        return newton_real(q, to_real(e.phi), om, branch.power, 1e-16, 50);
    };
    const Eigen::VectorXd d = (-resolve(omega + 2 * h) + 8.0 * resolve(omega + h) - 8.0 * resolve(omega - h) +
                               resolve(omega - 2 * h)) /
                              (12.0 * h);
    return to_field(q.window(), d);
}

StandingWaveFamily::StandingWaveFamily(const Potential& q, const StandingWaveOptions& opts) : q_(q), opts_(opts) {
    const SpectralDecomposition sd = discrete_spectrum(q, opts.spectrum);
    if (sd.eigenvalues.empty()) throw HypothesisError("no discrete eigenvalue: the single-eigenvalue hypothesis fails");
    const GroundState gs = ground_state(sd);
    E0_ = gs.E0;
    phi0_ = Eigen::Map<const Eigen::VectorXd>(gs.phi0.data(), static_cast<Eigen::Index>(gs.phi0.size()));
}

Eigen::VectorXd StandingWaveFamily::solve(double omega) const {
    const int p = opts_.power;
    const double delta = omega - E0_;
    if (!(delta > 0.0)) throw std::invalid_argument("omega must exceed E0");
    if (last_ && last_->first == omega) return last_->second;
    Eigen::VectorXd seed;
    if (last_ && std::abs(last_->first - omega) < 0.25 * delta) {
        seed = last_->second * std::pow(delta / (last_->first - E0_), 1.0 / (p - 1));
    } else {
        const double norm_p1 = power_map(phi0_, p).dot(phi0_);
        seed = std::pow(delta / norm_p1, 1.0 / (p - 1)) * phi0_;
    }
    Eigen::VectorXd phi;
    try {
        phi = newton_real(q_, seed, omega, p, 1e-15, 50);
    } catch (const NumericalError&) {
        const Bifurcation b(q_, opts_);
        BranchEntry e = solve_entry(q_, b, omega, opts_);
        if (!e.converged) throw NumericalError("standing wave at omega = " + std::to_string(omega) + ": " + e.message);
        phi = newton_real(q_, to_real(e.phi), omega, p, 1e-15, 50);
    }
    if (!(phi.dot(phi0_) > 0.0)) throw NumericalError("standing-wave Newton left the positive branch");
    last_ = std::make_pair(omega, phi);
    return phi;
}

Eigen::VectorXd StandingWaveFamily::phi(double omega) const { return solve(omega); }

ComplexField StandingWaveFamily::phi_field(double omega) const { return to_field(window(), solve(omega)); }

StandingWaveFamily::Profile StandingWaveFamily::profile(double omega) const {
    const int p = opts_.power;
    Profile pr;
    pr.omega = omega;
    pr.phi = solve(omega);
    pr.dphi = solve_linearized(q_, pr.phi, omega, p, -pr.phi);
    Eigen::VectorXd rhs = -2.0 * pr.dphi;
    for (Eigen::Index i = 0; i < rhs.size(); ++i) {
        const double f = pr.phi(i);
        rhs(i) += p * (p - 1) * std::pow(std::abs(f), p - 3) * f * pr.dphi(i) * pr.dphi(i);
    }
    pr.d2phi = solve_linearized(q_, pr.phi, omega, p, rhs);
    pr.norm_sq = pr.phi.squaredNorm();
    pr.dnorm_sq = 2.0 * pr.phi.dot(pr.dphi);
    return pr;
}

}  // namespace dnls
