// One PASS/FAIL line per acceptance criterion. Tolerances and runtime limits
// are fixed here; the exit status is the number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "dnls/dynamics.hpp"
#include "dnls/jost.hpp"
#include "dnls/propagator.hpp"
#include "dnls/scattering.hpp"
#include "dnls/spectral.hpp"
#include "dnls/standing_wave.hpp"
#include "oracles.hpp"

using namespace dnls;
using std::numbers::pi;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double a) {
    char buf[96];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

Potential exp_potential(const LatticeWindow& w) { return potentials::exponential(w, -0.5, 1.0, 40); }

// 1. |T|^2 + |R+-|^2 = 1 and T conj(R+) + R- conj(T) = 0.
Outcome scattering_identities() {
    constexpr double tol = 1e-10;
    const LatticeWindow w(-64, 64);
    const std::vector<Potential> qs{potentials::zero(w), potentials::single_site(w, 1.0), potentials::single_site(w, -1.0),
                                    potentials::two_site(w, 0.7, -0.3, 0, 1), exp_potential(w)};
    double unit = 0.0, cross = 0.0;
    for (const auto& q : qs) {
        for (int k = 0; k < 200; ++k) {
            const double th = 0.05 + (pi - 0.1) * (k + 0.5) / 200.0;
            const auto r = scattering_residuals(scattering_data(q, th));
            unit = std::max({unit, r.unitarity_plus, r.unitarity_minus});
            cross = std::max(cross, r.cross);
        }
    }
    return {unit < tol && cross < tol, "max unitarity " + fmt("%.2e", unit) + ", max cross " + fmt("%.2e", cross)};
}

// 2. Recursion, Neumann series (12 terms) and Fourier resummation, pairwise.
Outcome jost_cross_validation() {
    constexpr double tol = 1e-8;
    const LatticeWindow w(-64, 64);
    const Potential q = exp_potential(w);
    FourierOptions fo;
    fo.nu_max = 256;
    const FourierTable Bp = fourier_coefficients(q, Side::plus, fo);
    const FourierTable Bm = fourier_coefficients(q, Side::minus, fo);
    double rs = 0.0, rf = 0.0, sf = 0.0;
    for (double th : theta_grid(0.05, pi - 0.05, 32)) {
        for (Side s : {Side::plus, Side::minus}) {
            const SpectralPoint sp(th);
            const ComplexField m = jost_m(q, s, sp).m;
            ComplexField series = ComplexField::constant(w, 1.0);
            for (const auto& g : jost_series_terms(q, s, sp, 12)) series += g;
            const FourierTable& B = s == Side::plus ? Bp : Bm;
            // Half line on the side where each object is anchored.
            const int lo = s == Side::plus ? 0 : w.n_min();
            const int hi = s == Side::plus ? w.n_max() : 0;
            for (int n = lo; n <= hi; ++n) {
                const cplx f = B.resum(n, th);
                rs = std::max(rs, std::abs(m(n) - series(n)));
                rf = std::max(rf, std::abs(m(n) - f));
                sf = std::max(sf, std::abs(series(n) - f));
            }
        }
    }
    return {rs < tol && rf < tol && sf < tol, "recursion-series " + fmt("%.2e", rs) + ", recursion-fourier " +
                                                  fmt("%.2e", rf) + ", series-fourier " + fmt("%.2e", sf)};
}

// 3. Resolvent kernel against a tridiagonal solve; (H - z) K = I.
Outcome resolvent_oracle() {
    constexpr double tol = 1e-9;
    const LatticeWindow w(-400, 400);
    const Potential q = exp_potential(w);
    const LatticeWindow block(-12, 12);
    const std::vector<cplx> zs{-5.0, -2.0, -0.5, 4.5, 6.0, 9.0, {1.0, 0.5}, {2.0, -0.3}, {3.5, 1.0}, {-0.3, 0.2}};
    double dev = 0.0, res = 0.0;
    for (cplx z : zs) {
        const auto K = resolvent_kernel(q, z, block);
        res = std::max(res, K.residual);
        for (int m = block.n_min(); m <= block.n_max(); ++m) {
            const auto col = oracle::tridiagonal_column(q, z, m);
            for (int n = block.n_min(); n <= block.n_max(); ++n) dev = std::max(dev, std::abs(K(n, m) - col[w.index(n)]));
        }
    }
    return {dev < tol && res < tol, "max deviation " + fmt("%.2e", dev) + ", residual " + fmt("%.2e", res)};
}

// 4. Oscillatory-integral kernel of e^{itH} P_c against the eigendecomposition.
Outcome propagator_oracle() {
    constexpr double tol = 1e-7;
    const LatticeWindow big(-320, 320);
    const Potential q = potentials::single_site(big, -1.0);
    const LatticeWindow block(-64, 64);
    double dev = 0.0;
    for (double t : {0.5, 2.0, 10.0}) {
        PropagatorOptions o;
        o.sign = TimeSign::backward;
        o.block = block;
        const auto K = continuous_propagator(potentials::single_site(block, -1.0), t, o);
        const auto E = oracle::eigen_propagator(q, t, 1, block);
        dev = std::max(dev, (K.K - E).cwiseAbs().maxCoeff());
    }
    return {dev < tol, "max deviation " + fmt("%.2e", dev)};
}

// 5. Decay of sup |e^{itH} P_c(n, m)| like t^{-1/3}.
Outcome dispersive_decay() {
    std::vector<double> ts{0.0};
    for (int k = 0; k < 24; ++k) ts.push_back(10.0 * std::pow(20.0, k / 23.0));
    for (int k = 1; k <= 6; ++k) ts.push_back(200.0 * std::pow(2.0, k / 6.0));
    const LatticeWindow block(-512, 512);
    std::string detail;
    bool pass = true;
    for (bool generic : {true, false}) {
        const Potential q = generic ? potentials::single_site(block, -1.0) : potentials::zero(block);
        DecayScanOptions o;
        o.block = block;
        o.fit_lo = 10.0;
        o.fit_hi = 200.0;
        const DecayScan s = decay_scan(q, ts, o);
        double c200 = 0.0, c400 = 0.0;
        for (std::size_t k = 0; k < s.times.size(); ++k) {
            if (s.times[k] <= 200.0 + 1e-9) c200 = std::max(c200, s.weighted[k]);
            c400 = std::max(c400, s.weighted[k]);
        }
        const double slope = s.slope.value_or(NAN);
        const double growth = c400 / c200 - 1.0;
        const bool ok = slope >= -0.45 && slope <= -0.28 && std::isfinite(c400) && growth < 0.10;
        pass = pass && ok;
        detail += std::string(generic ? "q=-delta0" : "q=0") + ": slope " + fmt("%.3f", slope) + ", C " +
                  fmt("%.3f", c400) + ", growth " + fmt("%.1f%%", 100.0 * growth) + (generic ? "; " : "");
    }
    return {pass, detail};
}

// 6. Standing-wave branch.
Outcome standing_wave_branch() {
    const LatticeWindow w(-128, 128);
    const Potential q = exp_potential(w);
    const double E0 = ground_state(discrete_spectrum(q)).E0;
    const auto omegas = branch_grid(E0, 1e-4, 0.2, 10);
    const auto br = solve_branch(q, omegas);
    double res = 0.0, dev = 0.0;
    bool all = true;
    for (const auto& e : br.entries) {
        all = all && e.converged;
        res = std::max(res, standing_wave_residual(q, e.phi, e.omega));
        Eigen::VectorXd seed(static_cast<Eigen::Index>(w.size()));
        for (std::size_t i = 0; i < w.size(); ++i) seed(static_cast<Eigen::Index>(i)) = e.phi.values()[i].real();
        dev = std::max(dev, (oracle::dense_newton(q, seed, e.omega, 7) - seed).cwiseAbs().maxCoeff());
    }
    const auto& first = br.entries.front();
    const double target = std::pow(weighted_norm(br.phi0, 8.0, 0.0), -8.0);
    const double ratio = std::pow(first.a, 6) / (first.omega - E0) / target;
    const bool pass = all && res < 1e-10 && dev < 1e-9 && std::abs(ratio - 1.0) < 0.01;
    return {pass, "max residual " + fmt("%.2e", res) + ", Newton deviation " + fmt("%.2e", dev) +
                      ", a^6 ||phi0||_8^8 / (omega - E0) " + fmt("%.5f", ratio)};
}

// 7. l2 conservation and second-order convergence of the splitting.
Outcome conservation_and_order() {
    const LatticeWindow w(-64, 64);
    const Potential q = exp_potential(w);
    ComplexField u0(w);
    for (int n = w.n_min(); n <= w.n_max(); ++n) u0.at(n) = std::exp(-n * n / 8.0) * std::exp(oracle::I * (0.3 * n));
    EvolveOptions o;
    o.output_stride = 1.0;
    o.norm_tol = 1.0;
    const auto tr = evolve(q, u0, 100.0, o);
    double rate = 0.0;
    for (std::size_t k = 1; k < tr.norms.size(); ++k) rate = std::max(rate, std::abs(tr.norms[k] - tr.norms[0]) / tr.times[k]);

    const double T = 2.0;
    std::vector<cplx> v(u0.values().begin(), u0.values().end());
    const auto ref = oracle::rk4_nls(q, v, 7, T, 20000);
    auto err = [&](double dt) {
        EvolveOptions e;
        e.dt = dt;
        e.output_stride = T;
        const auto s = evolve(q, u0, T, e).states.back();
        double sum = 0.0;
        for (std::size_t i = 0; i < ref.size(); ++i) sum += std::norm(s.values()[i] - ref[i]);
        return std::sqrt(sum);
    };
    const double ratio = err(0.05) / err(0.025);
    return {rate < 1e-8 && ratio >= 3.6 && ratio <= 4.4,
            "norm drift per unit time " + fmt("%.2e", rate) + ", error ratio " + fmt("%.3f", ratio)};
}

const LatticeWindow kDynWindow(-512, 512);
const LatticeWindow kFamWindow(-128, 128);

// 8. Orthogonality constraints along a run; exact manifold point.
Outcome modulation_orthogonality() {
    const Potential q = exp_potential(kDynWindow);
    const StandingWaveFamily fam(exp_potential(kFamWindow));
    const double om = fam.E0() * 1.1;
    StabilityOptions o;
    o.extract_scattering = false;
    const auto rep = stability_run(q, fam, om, gaussian_perturbation(kDynWindow, 1e-3), 50.0, o);
    const auto st = modulation_decompose(fam, std::exp(oracle::I * 0.3) * fam.phi_field(om), om * 1.002, 0.2);
    const double err = std::max({std::abs(st.omega - om), std::abs(st.Theta - 0.3), weighted_norm(st.r, 2.0, 0.0)});
    const bool pass = !rep.tube_exit && rep.max_constraint_ratio < 1e-10 && err < 1e-10;
    return {pass, "max constraint / ||r|| " + fmt("%.2e", rep.max_constraint_ratio) + ", manifold point error " +
                      fmt("%.2e", err) + (rep.tube_exit ? ", tube exit" : "")};
}

// 9. Finite-horizon asymptotic stability.
Outcome asymptotic_stability() {
    const Potential q = exp_potential(kDynWindow);
    const StandingWaveFamily fam(exp_potential(kFamWindow));
    const double om0 = fam.E0() * 1.1;
    StabilityOptions o;
    o.extract_scattering = false;
    const auto a = stability_run(q, fam, om0, gaussian_perturbation(kDynWindow, 1e-3), 400.0, o);
    const auto b = stability_run(q, fam, om0, gaussian_perturbation(kDynWindow, 5e-4), 200.0, o);
    if (a.tube_exit || b.tube_exit) return {false, "tube exit: " + a.message + b.message};

    // Restrict the long run to [0, 200].
    std::vector<double> t, om, rw;
    double l1_200 = 0.0, sup_dev = 0.0;
    for (std::size_t k = 0; k < a.times.size() && a.times[k] <= 200.0 + 1e-9; ++k) {
        t.push_back(a.times[k]);
        om.push_back(a.omega[k]);
        rw.push_back(a.r_weighted[k]);
        l1_200 = a.modulation_l1_cumulative[k];
        sup_dev = std::max(sup_dev, std::abs(a.omega[k] - om0));
    }
    const auto [omega_plus, spread] = tail_average(t, om, 0.25);
    const double jump = std::abs(om.front() - omega_plus);
    const std::size_t quarter = rw.size() / 4;
    double first = 0.0, last = 0.0;
    for (std::size_t k = 0; k < quarter; ++k) {
        first += rw[k];
        last += rw[rw.size() - 1 - k];
    }
    const double growth = a.modulation_l1 / l1_200 - 1.0;
    double sup_half = 0.0;
    for (double x : b.omega) sup_half = std::max(sup_half, std::abs(x - om0));
    const double eps_ratio = sup_dev / sup_half;
    const bool pass = spread < 0.1 * jump && growth < 0.10 && last < first && eps_ratio >= 1.5 && eps_ratio <= 4.0;
    return {pass, "tail spread / |omega(0) - omega_plus| " + fmt("%.2e", spread / jump) + ", L1 growth " +
                      fmt("%.2f%%", 100.0 * growth) + ", r weighted last/first quarter " + fmt("%.3f", last / first) +
                      ", sup deviation ratio " + fmt("%.3f", eps_ratio)};
}

// 10. Projector algebra and the contour formula.
Outcome projector_algebra() {
    const LatticeWindow w(-256, 256);
    const Potential q = exp_potential(w);
    ProjectorOptions po;
    po.contour_block_radius = 64;
    po.contour_points = 512;
    po.contour_tolerance = 1e-6;
    const auto d = spectral_projectors(q, po);
    const auto pd = projector_diagnostics(q, d);
    const double alg = std::max({pd.idempotence, pd.commutator, pd.completeness});
    const double contour = d.contour_deviation.value_or(INFINITY);
    return {alg < 1e-9 && contour < 1e-6, "idempotence " + fmt("%.2e", pd.idempotence) + ", commutator " +
                                              fmt("%.2e", pd.commutator) + ", completeness " +
                                              fmt("%.2e", pd.completeness) + ", contour " + fmt("%.2e", contour)};
}

struct Criterion {
    int id;
    const char* name;
    double limit_seconds;
    std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
    std::vector<int> only;
    for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));
    const std::vector<Criterion> criteria{
        {1, "scattering identities", 10.0, scattering_identities},
        {2, "Jost cross-validation", 30.0, jost_cross_validation},
        {3, "resolvent oracle", 10.0, resolvent_oracle},
        {4, "propagator oracle", 120.0, propagator_oracle},
        {5, "dispersive decay", 600.0, dispersive_decay},
        {6, "standing-wave branch", 60.0, standing_wave_branch},
        {7, "conservation and order", 120.0, conservation_and_order},
        {8, "modulation orthogonality", 60.0, modulation_orthogonality},
        {9, "asymptotic stability", 900.0, asymptotic_stability},
        {10, "projector algebra", 60.0, projector_algebra},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_time = sec < c.limit_seconds;
        const bool pass = o.pass && in_time;
        if (!pass) ++failed;
        std::printf("%s criterion %d (%s): %s; %.1f s (limit %.0f s)\n", pass ? "PASS" : "FAIL", c.id, c.name,
                    o.detail.c_str(), sec, c.limit_seconds);
        std::fflush(stdout);
    }
    return failed;
}
