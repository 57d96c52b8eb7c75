#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

#include "dnls/config.hpp"
#include "dnls/dynamics.hpp"
#include "dnls/error.hpp"
#include "dnls/jost.hpp"
#include "dnls/output.hpp"
#include "dnls/parallel.hpp"
#include "dnls/propagator.hpp"
#include "dnls/scattering.hpp"
#include "dnls/spectral.hpp"
#include "dnls/standing_wave.hpp"

using namespace dnls;
using nlohmann::json;

namespace {

using Rows = std::vector<std::vector<double>>;

json cplx_json(cplx z) { return json::array({json_number(z.real()), json_number(z.imag())}); }

json opt_json(const std::optional<double>& x) { return x ? json_number(*x) : json(nullptr); }

TimeSign parse_time_sign(const std::string& s) {
    if (s == "forward") return TimeSign::forward;
    if (s == "backward") return TimeSign::backward;
    throw std::invalid_argument("time sign must be 'forward' or 'backward', got '" + s + "'");
}

Side parse_side(const std::string& s) {
    if (s == "+" || s == "plus") return Side::plus;
    if (s == "-" || s == "minus") return Side::minus;
    throw std::invalid_argument("Jost side must be + or -, got '" + s + "'");
}

std::string indexed(const std::string& stem, int i, const char* ext) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "_%04d", i);
    return stem + buf + ext;
}

Rows field_rows(const ComplexField& u) {
    Rows rows;
    rows.reserve(u.size());
    for (int n = u.window().n_min(); n <= u.window().n_max(); ++n) rows.push_back({double(n), u(n).real(), u(n).imag()});
    return rows;
}

Rows kernel_rows(const Eigen::MatrixXcd& K, const LatticeWindow& block) {
    Rows rows;
    rows.reserve(static_cast<std::size_t>(K.size()));
    for (int n = block.n_min(); n <= block.n_max(); ++n) {
        for (int m = block.n_min(); m <= block.n_max(); ++m) {
            const cplx v = K(block.index(n), block.index(m));
            rows.push_back({double(n), double(m), v.real(), v.imag()});
        }
    }
    return rows;
}

LatticeWindow block_or_window(int radius, const LatticeWindow& w) {
    if (radius <= 0) return w;
    const int r = std::min({radius, -w.n_min(), w.n_max()});
    return LatticeWindow::symmetric(r);
}

std::vector<double> log_grid(double lo, double hi, int count) {
    if (!(lo > 0.0 && hi >= lo) || count < 1) throw std::invalid_argument("log grid needs 0 < lo <= hi and count >= 1");
    std::vector<double> out(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        const double s = count == 1 ? 0.0 : double(i) / (count - 1);
        out[static_cast<std::size_t>(i)] = lo * std::pow(hi / lo, s);
    }
    return out;
}

/// "n re [im]" lines; '#' starts a comment.
ComplexField read_field(const std::string& path, const LatticeWindow& w) {
    std::ifstream f(path);
    if (!f) throw std::invalid_argument("cannot open " + path);
    ComplexField u(w);
    std::string line;
    int lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
        std::istringstream in(line);
        long n;
        double re, im = 0.0;
        if (!(in >> n)) continue;
        if (!(in >> re)) throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": missing value");
        in >> im;
        if (!w.contains(static_cast<int>(n))) {
            throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": site outside the window");
        }
        u.at(static_cast<int>(n)) = {re, im};
    }
    return u;
}

struct Context {
    std::string subcommand;
    RunConfig cfg;
    LatticeWindow window{-1, 1};
    Potential q{LatticeWindow(-1, 1), {0.0, 0.0, 0.0}};
    std::map<std::string, double> tol;

    double d(const char* s, const char* k) const { return cfg.get_double(s, k); }
    int i(const char* s, const char* k) const { return cfg.get_int(s, k); }
};

json potential_json(const Context& c) {
    const PotentialSpec p = c.cfg.potential_spec();
    return {{"family", p.family},
            {"l1", c.q.norm_l1()},
            {"l1_1", c.q.norm_l1_weighted(1.0)},
            {"l1_2", c.q.norm_l1_weighted(2.0)},
            {"sup", c.q.norm_sup()},
            {"support", {c.q.support_min(), c.q.support_max()}},
            {"window", {c.window.n_min(), c.window.n_max()}}};
}

void run_jost(const Context& c, RunOutput& out) {
    const Side side = parse_side(c.cfg.get("jost", "sign"));
    const cplx theta{c.d("jost", "theta"), c.d("jost", "theta_im")};
    const int sigma = c.i("jost", "sigma");
    const SpectralPoint sp(theta);
    const JostData jd = jost_m(c.q, side, sp);
    out.write_csv("m.csv", {"n", "re", "im"}, field_rows(jd.m));
    out.write_csv("f.csv", {"n", "re", "im"}, field_rows(jd.f));

    const auto thetas = theta_grid(0.05, std::numbers::pi - 0.05, static_cast<std::size_t>(c.cfg.theta_grid_size()));
    const JostBoundReport grid = verify_jost_bounds(c.q, side, sigma, thetas);
    json j{{"sign", to_string(side)},
           {"theta", cplx_json(theta)},
           {"z", cplx_json(sp.z())},
           {"sigma", sigma},
           {"volterra_residual", volterra_residual(c.q, side, theta, jd.m)},
           {"grid_bounds",
            {{"theta_count", grid.theta_count}, {"C1", grid.c1}, {"C2", grid.c2}, {"C3", opt_json(grid.c3)}}}};
    if (sp.is_real()) {
        const JostData jdd = jost_m_derivative(c.q, side, sp);
        const JostBoundReport one = verify_jost_bounds(jdd, c.q, sigma);
        j["point_bounds"] = {{"C1", one.c1}, {"C2", one.c2}, {"C3", opt_json(one.c3)}};
    }
    const int nu_max = c.i("jost", "nu_max");
    if (nu_max > 0) {
        FourierOptions fo;
        fo.nu_max = nu_max;
        fo.cutoff = c.tol.at("fourier_cutoff");
        const FourierTable tab = fourier_coefficients(c.q, side, fo);
        Rows rows;
        const int lo = std::min(tab.n_first, tab.n_last), hi = std::max(tab.n_first, tab.n_last);
        for (int n = lo; n <= hi; ++n) {
            for (int nu = 1; nu <= tab.nu_max; ++nu) rows.push_back({double(n), double(nu), tab(n, nu)});
        }
        out.write_csv("fourier.csv", {"n", "nu", "B"}, rows);
        j["fourier"] = {{"nu_max", tab.nu_max}, {"iterations", tab.iterations}, {"last_term_norm", tab.last_term_norm}};
        if (sp.is_real()) {
            double dev = 0.0;
            for (int n = lo; n <= hi; ++n) dev = std::max(dev, std::abs(tab.resum(n, theta.real()) - jd.m(n)));
            j["fourier"]["resummation_deviation"] = dev;
        }
    }
    out.write_json("bounds.json", j);
    out.measure("C1", grid.c1);
    out.measure("C2", grid.c2);
    out.measure("C3", opt_json(grid.c3));
}

void run_scatter(const Context& c, RunOutput& out) {
    const auto thetas = theta_grid(c.d("scattering", "theta_lo"), c.d("scattering", "theta_hi"),
                                   static_cast<std::size_t>(c.cfg.theta_grid_size()));
    ScatteringOptions so;
    so.consistency_tol = c.tol.at("consistency");
    std::vector<ScatteringData> data(thetas.size());
    parallel_for(thetas.size(), [&](std::size_t k) { data[k] = scattering_data(c.q, thetas[k], so); });
    const double nan = std::numeric_limits<double>::quiet_NaN();
    Rows rows;
    double max_unit = 0.0, max_cross = 0.0, max_tw = 0.0, max_spread = 0.0;
    for (const auto& d : data) {
        const ScatteringResiduals r = scattering_residuals(d);
        const cplx T = d.T.value_or(cplx(nan, nan)), Rp = d.R_plus.value_or(cplx(nan, nan)),
                   Rm = d.R_minus.value_or(cplx(nan, nan));
        rows.push_back({d.theta, d.W.real(), d.W.imag(), d.W1.real(), d.W1.imag(), T.real(), T.imag(), Rp.real(),
                        Rp.imag(), Rm.real(), Rm.imag(), r.unitarity_plus, r.unitarity_minus, r.cross, r.tw});
        max_unit = std::max({max_unit, r.unitarity_plus, r.unitarity_minus});
        max_cross = std::max(max_cross, r.cross);
        max_tw = std::max(max_tw, r.tw);
        max_spread = std::max(max_spread, d.wronskian_spread);
    }
    out.write_csv("scattering.csv",
                  {"theta", "W_re", "W_im", "W1_re", "W1_im", "T_re", "T_im", "Rplus_re", "Rplus_im", "Rminus_re",
                   "Rminus_im", "unitarity_plus", "unitarity_minus", "cross", "tw"},
                  rows);
    out.write_json("summary.json", {{"theta_count", thetas.size()},
                                    {"max_unitarity_residual", max_unit},
                                    {"max_cross_residual", max_cross},
                                    {"max_tw_residual", max_tw},
                                    {"max_wronskian_spread", max_spread}});
    out.measure("max_unitarity_residual", max_unit);
    out.measure("max_cross_residual", max_cross);
}

void run_classify(const Context& c, RunOutput& out) {
    GenericityOptions go;
    go.grid_size = static_cast<std::size_t>(c.cfg.theta_grid_size());
    go.relative_threshold = c.d("scattering", "relative_threshold");
    const GenericityReport g = classify_genericity(c.q, go);
    json j{{"is_generic", g.is_generic},
           {"resonant_edges", g.resonant_edges},
           {"W_at_0", cplx_json(g.W_at_0)},
           {"W_at_pi", cplx_json(g.W_at_pi)},
           {"W_at_minus_pi", cplx_json(g.W_at_minus_pi)},
           {"threshold", g.threshold},
           {"grid_max_W", g.grid_max_W},
           {"min_lower_bound_ratio", g.min_lower_bound_ratio},
           {"grid_size", g.grid_size}};
    out.write_json("genericity.json", j);
    out.measure("is_generic", g.is_generic);
    out.measure("resonant_edges", g.resonant_edges);
}

void run_spectrum(const Context& c, RunOutput& out) {
    ProjectorOptions po;
    po.spectrum.edge_guard = c.d("spectral", "edge_guard");
    po.contour_block_radius = std::min(c.i("spectral", "contour_radius"), std::min(-c.window.n_min(), c.window.n_max()));
    po.contour_points = c.i("spectral", "contour_points");
    po.contour_tolerance = c.tol.at("contour");
    const SpectralDecomposition d = spectral_projectors(c.q, po);
    Rows ev;
    for (std::size_t k = 0; k < d.eigenvalues.size(); ++k) ev.push_back({double(k), d.eigenvalues[k], d.residuals[k]});
    out.write_csv("eigenvalues.csv", {"index", "eigenvalue", "residual"}, ev);
    std::vector<std::string> header{"n"};
    for (std::size_t k = 0; k < d.eigenvalues.size(); ++k) header.push_back("v" + std::to_string(k));
    Rows vecs;
    for (std::size_t i = 0; i < c.window.size(); ++i) {
        std::vector<double> row{double(c.window.site(i))};
        for (const auto& v : d.eigenvectors) row.push_back(v[i]);
        vecs.push_back(std::move(row));
    }
    out.write_csv("eigenvectors.csv", header, vecs);

    const ProjectorDiagnostics pd = projector_diagnostics(c.q, d);
    LimitingAbsorptionOptions lo;
    lo.grid_size = c.cfg.lambda_grid_size();
    lo.block_radius = c.i("spectral", "lap_block_radius");
    const LimitingAbsorptionReport lap = limiting_absorption_constant(c.q, c.d("spectral", "tau"), lo);
    Rows lr;
    for (std::size_t k = 0; k < lap.lambdas.size(); ++k) lr.push_back({lap.lambdas[k], lap.norms_plus[k], lap.norms_minus[k]});
    out.write_csv("limiting_absorption.csv", {"lambda", "norm_plus", "norm_minus"}, lr);

    json j{{"eigenvalues", d.eigenvalues},
           {"projectors",
            {{"idempotence", pd.idempotence},
             {"commutator", pd.commutator},
             {"completeness", pd.completeness},
             {"symmetry", pd.symmetry},
             {"contour_deviation", opt_json(d.contour_deviation)},
             {"contour_block_radius", d.contour_block_radius},
             {"contour_points", d.contour_points},
             {"contour_ok", d.contour_ok}}},
           {"limiting_absorption",
            {{"tau", lap.tau},
             {"constant", lap.constant},
             {"lambda_at_max", lap.lambda_at_max},
             {"side_at_max", lap.side_at_max},
             {"grid_size", lap.grid_size},
             {"block_radius", lap.block_radius},
             {"generic", lap.generic},
             {"warning", lap.warning}}}};
    out.write_json("spectrum.json", j);
    out.measure("eigenvalues", d.eigenvalues);
    out.measure("contour_deviation", opt_json(d.contour_deviation));
    out.measure("C_tau", lap.constant);
}

void run_resolvent(const Context& c, RunOutput& out) {
    const LatticeWindow block = block_or_window(c.i("resolvent", "block_radius"), c.window);
    const std::string lam = c.cfg.get("resolvent", "lambda");
    ResolventKernel K = lam.empty() ? resolvent_kernel(c.q, {c.d("resolvent", "z_re"), c.d("resolvent", "z_im")}, block)
                                    : boundary_resolvent(c.q, c.d("resolvent", "lambda"), c.i("resolvent", "side"), block);
    out.write_csv("kernel.csv", {"n", "m", "re", "im"}, kernel_rows(K.K, K.block));
    out.write_json("resolvent.json", {{"z", cplx_json(K.z)},
                                      {"theta", cplx_json(K.theta)},
                                      {"side", K.side},
                                      {"block", {K.block.n_min(), K.block.n_max()}},
                                      {"residual", K.residual}});
    out.measure("residual", K.residual);
}

void run_propagate(const Context& c, RunOutput& out) {
    PropagatorOptions po;
    po.sign = parse_time_sign(c.cfg.get("propagator", "sign"));
    po.block = block_or_window(c.i("propagator", "block_radius"), c.window);
    po.quadrature_points = c.i("propagator", "quadrature_points");
    po.convergence_check = c.cfg.get_bool("propagator", "convergence_check");
    po.convergence_tol = c.tol.at("propagator_convergence");
    const PropagatorKernel K = continuous_propagator(c.q, c.d("propagator", "t"), po);
    out.write_csv("kernel.csv", {"n", "m", "re", "im"}, kernel_rows(K.K, K.block));
    const double sup = K.K.cwiseAbs().maxCoeff();
    out.write_json("propagator.json", {{"t", K.t},
                                       {"sign", c.cfg.get("propagator", "sign")},
                                       {"block", {K.block.n_min(), K.block.n_max()}},
                                       {"quadrature_points", K.quadrature_points},
                                       {"convergence_change", opt_json(K.convergence_change)},
                                       {"sup", sup}});
    out.measure("sup", sup);
    out.measure("quadrature_points", K.quadrature_points);
}

void run_decay_scan(const Context& c, RunOutput& out) {
    std::vector<double> ts{0.0};
    for (double t : log_grid(c.d("propagator", "t_min"), c.d("propagator", "t_max"), c.i("propagator", "t_count"))) {
        ts.push_back(t);
    }
    int R = c.i("propagator", "scan_block_radius");
    if (R <= 0) R = static_cast<int>(std::ceil(2.0 * ts.back())) + 32;
    const LatticeWindow w(std::min(c.window.n_min(), -R), std::max(c.window.n_max(), R));
    DecayScanOptions o;
    o.sign = parse_time_sign(c.cfg.get("propagator", "sign"));
    o.block = LatticeWindow::symmetric(R);
    o.fit_lo = c.d("propagator", "fit_lo");
    o.fit_hi = c.d("propagator", "fit_hi");
    const DecayScan s = decay_scan(c.q.on(w), ts, o);
    Rows rows;
    for (std::size_t k = 0; k < s.times.size(); ++k) rows.push_back({s.times[k], s.sup_kernel[k], s.weighted[k]});
    out.write_csv("decay.csv", {"t", "sup", "sup_weighted"}, rows);
    out.write_json("decay.json", {{"C_measured", s.C_measured},
                                  {"slope", opt_json(s.slope)},
                                  {"fit_lo", s.fit_lo},
                                  {"fit_hi", s.fit_hi},
                                  {"free_kernel", s.free_kernel},
                                  {"block", {s.block.n_min(), s.block.n_max()}}});
    out.measure("C_measured", s.C_measured);
    out.measure("slope", opt_json(s.slope));
}

json strichartz_json(const StrichartzResult& s) {
    return {{"r", json_number(s.r)},
            {"p", json_number(s.p)},
            {"value", s.value},
            {"outer_exponent", json_number(s.outer_exponent)},
            {"intervals", s.intervals},
            {"sample_spacing", s.sample_spacing}};
}

void run_norms(const Context& c, RunOutput& out) {
    const double tau = c.d("norms", "tau"), T = c.d("norms", "t_max"), dt = c.d("norms", "dt");
    const int site = c.i("norms", "site");
    if (!c.window.contains(site)) throw std::invalid_argument("[norms] site outside the window");
    const double r = c.d("norms", "strichartz_r"), p = c.d("norms", "strichartz_p");
    if (!is_admissible(r, p)) throw std::invalid_argument("(r, p) is not an admissible pair: 2/r + 1/p must be 1/2");
    const ComplexField f = ComplexField::delta(c.window, site);

    SmoothingOptions so;
    so.dt = dt;
    so.source_decay = c.d("norms", "source_decay");
    so.lap.grid_size = c.cfg.lambda_grid_size();
    so.lap.block_radius = c.i("spectral", "lap_block_radius");
    const SmoothingReport sm = smoothing_norms(c.q, f, tau, T, so);

    const LinearFlow flow(c.q);
    const int steps = std::max(1, static_cast<int>(std::llround(T / dt)));
    const double h = T / steps;
    const LinearFlow::Step E = flow.step(h, TimeSign::forward);
    ComplexField u = flow.project(f);
    StrichartzAccumulator acc(r, p, 0.0, T);
    Rows rows;
    for (int k = 0; k <= steps; ++k) {
        if (k > 0) u = E.apply(u);
        acc.add(k * h, u);
        rows.push_back({k * h, weighted_norm(u, 2.0, 0.0), weighted_norm(u, p, 0.0), weighted_norm(u, 2.0, -tau)});
    }
    out.write_csv("flow_norms.csv", {"t", "l2", "lp", "l2_weighted"}, rows);
    const StrichartzResult st = acc.result();
    json j{{"strichartz", strichartz_json(st)},
           {"smoothing",
            {{"tau", sm.tau},
             {"T_max", sm.T_max},
             {"dt", sm.dt},
             {"f_norm", sm.f_norm},
             {"norm_i", sm.norm_i},
             {"ratio_i", sm.ratio_i},
             {"C_tau", sm.C_tau},
             {"predicted_bound", sm.predicted_bound},
             {"g_norm", sm.g_norm},
             {"norm_ii", sm.norm_ii},
             {"ratio_ii", sm.ratio_ii},
             {"norm_iii_sup_l2", sm.norm_iii_sup_l2},
             {"norm_iii_strichartz", sm.norm_iii_strichartz},
             {"ratio_iii", sm.ratio_iii}}}};
    out.write_json("norms.json", j);
    out.measure("strichartz", st.value);
    out.measure("C_tau", sm.C_tau);
    out.measure("ratio_i", sm.ratio_i);
    out.measure("ratio_ii", sm.ratio_ii);
    out.measure("ratio_iii", sm.ratio_iii);
}

StandingWaveOptions wave_options(const Context& c) {
    StandingWaveOptions o;
    o.power = c.i("standing_wave", "power");
    o.eta_fraction = c.d("standing_wave", "eta_fraction");
    o.max_iterations = c.i("standing_wave", "max_iterations");
    o.damping = c.d("standing_wave", "damping");
    o.residual_tol = c.tol.at("residual");
    o.spectrum.edge_guard = c.d("spectral", "edge_guard");
    return o;
}

void run_standing_wave(const Context& c, RunOutput& out) {
    const StandingWaveOptions o = wave_options(c);
    std::vector<double> omegas = c.cfg.get_list("standing_wave", "omegas");
    if (omegas.empty()) {
        DiscreteSpectrumOptions dso;
        dso.edge_guard = o.spectrum.edge_guard;
        const GroundState gs = ground_state(discrete_spectrum(c.q, dso));
        omegas = branch_grid(gs.E0, c.d("standing_wave", "delta_lo"), c.d("standing_wave", "delta_hi"),
                             c.i("standing_wave", "count"));
    }
    const StandingWaveBranch br = solve_branch(c.q, omegas, o);
    json entries = json::array();
    int converged = 0;
    double max_res = 0.0;
    for (std::size_t k = 0; k < br.entries.size(); ++k) {
        const BranchEntry& e = br.entries[k];
        const std::string name = indexed("phi", static_cast<int>(k), ".csv");
        Rows rows;
        for (int n = c.window.n_min(); n <= c.window.n_max(); ++n) rows.push_back({double(n), e.phi(n).real()});
        out.write_csv(name, {"n", "phi"}, rows);
        json ej{{"omega", e.omega},
                {"delta", e.omega - br.E0},
                {"a", e.a},
                {"residual", json_number(e.residual)},
                {"iterations", e.iterations},
                {"converged", e.converged},
                {"damped", e.damped},
                {"message", e.message},
                {"file", name}};
        if (e.converged) {
            ++converged;
            max_res = std::max(max_res, e.residual);
            const DecayFit fit = fit_exponential_decay(e.phi);
            ej["decay_fit"] = {{"rate", fit.rate}, {"prefactor", fit.prefactor}, {"r2", fit.r2},
                               {"n_lo", fit.n_lo}, {"n_hi", fit.n_hi}};
        }
        entries.push_back(std::move(ej));
    }
    json j{{"E0", br.E0}, {"power", br.power}, {"entries", entries}};
    try {
        const ExpansionReport ex = verify_expansion(br);
        j["expansion"] = {{"delta", ex.delta},
                          {"rho", ex.rho},
                          {"rho_over_delta", ex.rho_over_delta},
                          {"fitted_power", ex.fitted_power},
                          {"fitted_coefficient", ex.fitted_coefficient},
                          {"rho_monotone", ex.rho_monotone},
                          {"overlap_positive", ex.overlap_positive},
                          {"a_ratio", ex.a_ratio}};
        out.measure("expansion_fitted_power", ex.fitted_power);
    } catch (const std::exception& e) {
        j["expansion"] = nullptr;
        j["expansion_message"] = e.what();
    }
    out.write_json("branch.json", j);
    out.measure("E0", br.E0);
    out.measure("converged", converged);
    out.measure("max_residual", max_res);
}

ComplexField make_perturbation(const Context& c, double eps) {
    const std::string kind = c.cfg.get("dynamics", "perturbation");
    const int site = c.i("dynamics", "perturbation_site");
    if (kind == "gaussian") return gaussian_perturbation(c.window, eps, c.d("dynamics", "width"), site);
    ComplexField u(c.window);
    if (kind == "delta") {
        if (!c.window.contains(site)) throw std::invalid_argument("perturbation site outside the window");
        u.at(site) = 1.0;
    } else if (kind == "file") {
        u = read_field(c.cfg.get("dynamics", "perturbation_file"), c.window);
    } else {
        throw std::invalid_argument("perturbation must be gaussian, delta or file");
    }
    const double nrm = weighted_norm(u, 2.0, 0.0);
    if (!(nrm > 0.0)) throw std::invalid_argument("perturbation profile is zero");
    return (eps / nrm) * u;
}

StabilityOptions stability_options(const Context& c) {
    StabilityOptions o;
    o.dt = c.d("dynamics", "dt");
    o.output_stride = c.d("dynamics", "stride");
    o.snapshot_stride = c.subcommand == "simulate" ? c.d("dynamics", "snapshot_stride") : 0.0;
    o.sigma = c.d("dynamics", "sigma");
    o.norm_tol = c.tol.at("norm");
    o.scattering.samples = c.i("dynamics", "scattering_samples");
    o.scattering.spacing = c.d("dynamics", "scattering_spacing");
    return o;
}

StandingWaveFamily make_family(const Context& c) {
    const int R = c.i("dynamics", "family_radius");
    const LatticeWindow fw = block_or_window(R, c.window);
    StandingWaveOptions o = wave_options(c);
    return StandingWaveFamily(make_potential(c.cfg.potential_spec(), fw), o);
}

json stability_json(const StabilityReport& r) {
    json s = json::array();
    for (const auto& x : r.strichartz) s.push_back(strichartz_json(x));
    const auto first_last = [&](const std::vector<double>& v, bool last) {
        // Mean over the first or last quarter of the output times.
        if (v.empty()) return json(nullptr);
        const std::size_t q = std::max<std::size_t>(1, v.size() / 4);
        double m = 0.0;
        for (std::size_t k = 0; k < q; ++k) m += v[last ? v.size() - 1 - k : k];
        return json(m / double(q));
    };
    json j{{"omega0", r.omega0},
           {"epsilon", r.epsilon},
           {"t_final", r.t_final},
           {"dt", r.dt},
           {"sigma", r.sigma},
           {"omega_plus", r.omega_plus},
           {"omega_plus_spread", r.omega_plus_spread},
           {"omega_initial", r.omega.empty() ? json(nullptr) : json(r.omega.front())},
           {"sup_omega_deviation", r.sup_omega_deviation},
           {"modulation_l1", r.modulation_l1},
           {"modulation_linf", r.modulation_linf},
           {"omega_dot_l1", r.omega_dot_l1},
           {"gamma_dot_l1", r.gamma_dot_l1},
           {"max_constraint_ratio", r.max_constraint_ratio},
           {"max_norm_drift", r.max_norm_drift},
           {"r_weighted_first_quarter_mean", first_last(r.r_weighted, false)},
           {"r_weighted_last_quarter_mean", first_last(r.r_weighted, true)},
           {"strichartz", s},
           {"decomposition_unique", r.decomposition_unique ? json(*r.decomposition_unique) : json(nullptr)},
           {"tube_exit", r.tube_exit},
           {"exit_time", r.exit_time},
           {"message", r.message}};
    if (r.scattering) {
        const auto& sc = *r.scattering;
        j["scattering"] = {{"times", sc.times},
                           {"cauchy_diffs", sc.cauchy_diffs},
                           {"cauchy_ok", sc.cauchy_ok},
                           {"matched_sign", sc.matched_sign},
                           {"residual_plus", sc.residual_plus},
                           {"residual_minus", sc.residual_minus},
                           {"w_plus_norm", weighted_norm(sc.w_plus, 2.0, 0.0)},
                           {"warning", sc.warning}};
    } else {
        j["scattering"] = nullptr;
    }
    return j;
}

Rows curve_rows(const StabilityReport& r) {
    Rows rows;
    for (std::size_t k = 0; k < r.times.size(); ++k) {
        rows.push_back({r.times[k], r.omega[k], r.gamma[k], r.Theta[k], r.omega_dot[k], r.gamma_dot[k], r.r_l2[k],
                        r.r_weighted[k], r.r_sup[k], r.norm[k], r.modulation_l1_cumulative[k]});
    }
    return rows;
}

const std::vector<std::string> kCurveHeader{"t",    "omega",      "gamma",      "Theta", "omega_dot", "gamma_dot",
                                            "r_l2", "r_weighted", "r_sup",      "norm",  "modulation_l1"};

void write_stability(RunOutput& out, const std::string& prefix, const StabilityReport& r) {
    out.write_csv(prefix + "curves.csv", kCurveHeader, curve_rows(r));
    out.write_json(prefix + "report.json", stability_json(r));
    if (r.scattering) {
        out.write_csv(prefix + "w_plus.csv", {"n", "re", "im"}, field_rows(r.scattering->w_plus));
        out.write_csv(prefix + "u_plus.csv", {"n", "re", "im"}, field_rows(r.scattering->u_plus));
    }
    for (std::size_t k = 0; k < r.snapshots.size(); ++k) {
        Rows rows = field_rows(r.snapshots[k]);
        for (auto& row : rows) row.insert(row.begin(), r.snapshot_times[k]);
        out.write_csv(prefix + indexed("snapshots/state", static_cast<int>(k), ".csv"), {"t", "n", "re", "im"}, rows);
    }
}

void run_simulate(const Context& c, RunOutput& out) {
    const StandingWaveFamily fam = make_family(c);
    const double omega0 = fam.E0() * (1.0 + c.d("dynamics", "omega0_rel"));
    const ComplexField pert = make_perturbation(c, c.d("dynamics", "epsilon"));
    const StabilityReport r = stability_run(c.q, fam, omega0, pert, c.d("dynamics", "t_final"), stability_options(c));
    write_stability(out, "", r);
    out.measure("E0", fam.E0());
    out.measure("omega_plus", r.omega_plus);
    out.measure("omega_plus_spread", r.omega_plus_spread);
    out.measure("modulation_l1", r.modulation_l1);
    out.measure("max_constraint_ratio", r.max_constraint_ratio);
    out.measure("max_norm_drift", r.max_norm_drift);
    out.measure("tube_exit", r.tube_exit);
}

void run_sweep(const Context& c, RunOutput& out) {
    const StandingWaveFamily fam = make_family(c);
    const auto eps = c.cfg.get_list("sweep", "epsilons");
    const auto rels = c.cfg.get_list("sweep", "omega0_rels");
    if (eps.empty() || rels.empty()) throw std::invalid_argument("sweep needs nonempty epsilons and omega0_rels");
    const StabilityOptions o = stability_options(c);
    json index = json::array();
    int cell = 0;
    for (double rel : rels) {
        for (double e : eps) {
            const double omega0 = fam.E0() * (1.0 + rel);
            const std::string prefix = indexed("cell", cell, "/");
            json entry{{"cell", cell}, {"epsilon", e}, {"omega0_rel", rel}, {"omega0", omega0}, {"dir", prefix}};
            try {
                const StabilityReport r = stability_run(c.q, fam, omega0, make_perturbation(c, e),
                                                        c.d("dynamics", "t_final"), o);
                write_stability(out, prefix, r);
                entry["status"] = "ok";
                entry["omega_plus"] = r.omega_plus;
                entry["sup_omega_deviation"] = r.sup_omega_deviation;
                entry["modulation_l1"] = r.modulation_l1;
                entry["tube_exit"] = r.tube_exit;
            } catch (const std::exception& ex) {
                entry["status"] = "error";
                entry["message"] = ex.what();
            }
            index.push_back(std::move(entry));
            ++cell;
        }
    }
    out.write_json("index.json", index);
    out.note("cells", index);
    out.measure("E0", fam.E0());
}

using Runner = void (*)(const Context&, RunOutput&);

const std::vector<std::pair<std::string, std::pair<Runner, std::string>>>& commands() {
    static const std::vector<std::pair<std::string, std::pair<Runner, std::string>>> cmds{
        {"jost", {run_jost, "modified Jost functions, Fourier coefficients and bound constants"}},
        {"scatter", {run_scatter, "W, W1, T, R+- and identity residuals on a theta grid"}},
        {"classify", {run_classify, "generic / resonant classification from the edge Wronskians"}},
        {"spectrum", {run_spectrum, "discrete spectrum, projector diagnostics, limiting-absorption constant"}},
        {"resolvent", {run_resolvent, "resolvent kernel at z or a boundary value at lambda +- i0"}},
        {"propagate", {run_propagate, "kernel of e^{+-itH} P_c by oscillatory quadrature"}},
        {"decay-scan", {run_decay_scan, "sup of the propagator kernel over a time grid, with slope fit"}},
        {"norms", {run_norms, "Strichartz and smoothing norm suite"}},
        {"standing-wave", {run_standing_wave, "standing-wave branch near the bifurcation point"}},
        {"simulate", {run_simulate, "perturbed standing-wave run with modulation tracking"}},
        {"sweep", {run_sweep, "simulate over an (epsilon, omega0) grid"}},
    };
    return cmds;
}

bool exposes(const ConfigKey& k, const std::string& cmd) {
    return std::find(k.commands.begin(), k.commands.end(), "*") != k.commands.end() ||
           std::find(k.commands.begin(), k.commands.end(), cmd) != k.commands.end();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Discrete Schrodinger operators and DNLS standing waves"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    struct Pending {
        const ConfigKey* key;
        CLI::Option* opt;
        std::string value;
    };
    std::map<std::string, std::vector<Pending>> pending;
    std::map<std::string, std::string> config_paths;
    std::map<std::string, CLI::App*> subs;

    for (const auto& [name, spec] : commands()) {
        CLI::App* sub = app.add_subcommand(name, spec.second);
        subs[name] = sub;
        sub->add_option("--config", config_paths[name], "INI configuration file (flags override it)");
        auto& list = pending[name];
        list.reserve(config_schema().size());
        for (const auto& k : config_schema()) {
            if (!exposes(k, name)) continue;
            list.push_back({&k, nullptr, {}});
            Pending& p = list.back();
            p.opt = sub->add_option("--" + k.flag, p.value, k.help + "  [" + k.section + "] " + k.key)
                        ->default_str(k.default_value);
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() != 0) {
            std::cerr << json{{"status", "error"}, {"subcommand", nullptr}, {"kind", "usage"}, {"message", e.what()}}.dump()
                      << '\n';
        }
        return app.exit(e);
    }

    std::string name;
    for (const auto& [n, sub] : subs) {
        if (sub->parsed()) name = n;
    }
    Context c;
    c.subcommand = name;
    try {
        if (!config_paths[name].empty()) c.cfg = RunConfig::load(config_paths[name]);
        for (const auto& p : pending[name]) {
            if (p.opt->count() > 0) c.cfg.set(p.key->section, p.key->key, p.value);
        }
        c.cfg.validate();
        set_thread_cap(static_cast<unsigned>(c.cfg.get_int("run", "threads")));
    } catch (const std::exception& e) {
        const json rec = write_error_record(resolve_output_dir("", c.cfg) / name, name, "config", e.what());
        std::cerr << rec.dump() << '\n';
        return 2;
    }

    const auto dir = resolve_output_dir("", c.cfg) / name;
    std::string kind = "error";
    try {
        c.window = c.cfg.window();
        c.q = make_potential(c.cfg.potential_spec(), c.window);
        c.tol = c.cfg.tolerances();
        RunOutput out(dir, name, c.cfg);
        out.note("potential", potential_json(c));
        for (const auto& [n, spec] : commands()) {
            if (n == name) spec.first(c, out);
        }
        const auto manifest = out.finish();
        std::cout << manifest.string() << '\n';
        return 0;
    } catch (const HypothesisError& e) {
        kind = "hypothesis";
        std::cerr << write_error_record(dir, name, kind, e.what()).dump() << '\n';
    } catch (const NumericalError& e) {
        kind = "numerical";
        std::cerr << write_error_record(dir, name, kind, e.what()).dump() << '\n';
    } catch (const std::invalid_argument& e) {
        kind = "invalid_argument";
        std::cerr << write_error_record(dir, name, kind, e.what()).dump() << '\n';
    } catch (const std::exception& e) {
        std::cerr << write_error_record(dir, name, kind, e.what()).dump() << '\n';
    }
    return 1;
}
