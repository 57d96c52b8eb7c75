#include "dnls/scattering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "dnls/error.hpp"

namespace dnls {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr cplx kI{0.0, 1.0};

ComplexField conj_field(const ComplexField& u) {
    ComplexField v(u.window());
    auto in = u.values();
    auto out = v.values();
    for (std::size_t i = 0; i < in.size(); ++i) out[i] = std::conj(in[i]);
    return v;
}

}  // namespace

cplx wronskian(const ComplexField& u, const ComplexField& v, int n) {
    if (!u.window().contains(n) || !u.window().contains(n + 1) || !v.window().contains(n) ||
        !v.window().contains(n + 1)) {
        throw std::out_of_range("Wronskian site " + std::to_string(n) + " outside field window");
    }
    return u(n + 1) * v(n) - u(n) * v(n + 1);
}

cplx wronskian_from_m(const ComplexField& m_plus, const ComplexField& m_minus, cplx theta, int n) {
    if (!m_plus.window().contains(n) || !m_plus.window().contains(n + 1) || !m_minus.window().contains(n) ||
        !m_minus.window().contains(n + 1)) {
        throw std::out_of_range("Wronskian site " + std::to_string(n) + " outside field window");
    }
    return std::exp(-kI * theta) * m_plus(n + 1) * m_minus(n) - std::exp(kI * theta) * m_plus(n) * m_minus(n + 1);
}

cplx transmission_edge_form(cplx W, double theta) {
    double h = theta;
    double sgn = 1.0;
    if (theta > kPi / 2) {
        h = theta - kPi;
        sgn = -1.0;
    } else if (theta < -kPi / 2) {
        h = theta + kPi;
        sgn = -1.0;
    }
    const double t = std::tan(h / 2.0);
    const double inv_sin = 1.0 / (2.0 * t) + t / 2.0;
    return -2.0 * kI * sgn / (W * inv_sin);
}

ScatteringData scattering_data(const Potential& q, double theta, const ScatteringOptions& opts) {
    if (!(theta >= -kPi && theta <= kPi)) throw std::invalid_argument("scattering angle must lie in [-pi, pi]");
    const auto& w = q.window();
    const int lo = opts.site - opts.constancy_radius;
    const int hi = opts.site + opts.constancy_radius + 1;
    if (!w.contains(lo) || !w.contains(hi)) throw std::invalid_argument("Wronskian sites outside the window");

    const SpectralPoint sp(cplx{theta, 0.0});
    const JostData jp = jost_m(q, Side::plus, sp);
    const JostData jm = jost_m(q, Side::minus, sp);
    const ComplexField& fp = jp.f;
    const ComplexField& fm = jm.f;
    const ComplexField fp_bar = conj_field(fp);
    const ComplexField fm_bar = conj_field(fm);

    ScatteringData d;
    d.theta = theta;
    d.W = wronskian(fp, fm, opts.site);
    d.W1 = wronskian(fp, fm_bar, opts.site);

    double wmin_re = d.W.real(), wmax_re = d.W.real(), wmin_im = d.W.imag(), wmax_im = d.W.imag();
    for (int n = lo; n < hi; ++n) {
        const cplx wn = wronskian(fp, fm, n);
        wmin_re = std::min(wmin_re, wn.real());
        wmax_re = std::max(wmax_re, wn.real());
        wmin_im = std::min(wmin_im, wn.imag());
        wmax_im = std::max(wmax_im, wn.imag());
    }
    const double spread = std::hypot(wmax_re - wmin_re, wmax_im - wmin_im);
    const double scale = std::max(std::abs(d.W), 1.0);
    d.wronskian_spread = spread / scale;
    if (d.wronskian_spread > opts.consistency_tol) {
        throw NumericalError("Wronskian not constant across sites (spread " + std::to_string(d.wronskian_spread) + ")");
    }

    const double s = std::sin(theta);
    if (s == 0.0) return d;
    const cplx w_mp = wronskian(fm, fp, opts.site);  // [f-, f+]
    const cplx T_upper = 2.0 * kI * s / w_mp;         // +2i sin / [f-, f+]
    const cplx T_lower = -2.0 * kI * s / d.W;         // -2i sin / [f+, f-]
    if (std::abs(T_upper - T_lower) > opts.consistency_tol * std::max(1.0, std::abs(T_lower))) {
        throw NumericalError("the two forms of the transmission coefficient disagree");
    }
    d.T = T_lower;
    d.R_plus = -wronskian(fm, fp_bar, opts.site) / w_mp;
    d.R_minus = -wronskian(fp, fm_bar, opts.site) / d.W;
    return d;
}

ScatteringResiduals scattering_residuals(const ScatteringData& d) {
    ScatteringResiduals r;
    if (!d.T) return r;
    const cplx T = *d.T, Rp = *d.R_plus, Rm = *d.R_minus;
    r.unitarity_plus = std::abs(std::norm(T) + std::norm(Rp) - 1.0);
    r.unitarity_minus = std::abs(std::norm(T) + std::norm(Rm) - 1.0);
    r.cross = std::abs(T * std::conj(Rp) + Rm * std::conj(T));
    r.tw = std::abs(T * d.W + 2.0 * kI * std::sin(d.theta));
    return r;
}

GenericityReport classify_genericity(const Potential& q, const GenericityOptions& opts) {
    if (opts.grid_size < 4) throw std::invalid_argument("genericity grid too small");
    auto W_at = [&](double th) {
        const ComplexField mp = modified_jost(q, Side::plus, cplx{th, 0.0});
        const ComplexField mm = modified_jost(q, Side::minus, cplx{th, 0.0});
        return wronskian_from_m(mp, mm, cplx{th, 0.0}, 0);
    };
    GenericityReport rep;
    rep.W_at_0 = W_at(0.0);
    rep.W_at_pi = W_at(kPi);
    rep.W_at_minus_pi = W_at(-kPi);
    rep.grid_size = opts.grid_size;
    rep.min_lower_bound_ratio = std::numeric_limits<double>::infinity();
    double wmax = std::max({std::abs(rep.W_at_0), std::abs(rep.W_at_pi), std::abs(rep.W_at_minus_pi)});
    for (std::size_t j = 0; j < opts.grid_size; ++j) {
        const double th = -kPi + 2.0 * kPi * static_cast<double>(j) / static_cast<double>(opts.grid_size);
        const cplx W = W_at(th);
        wmax = std::max(wmax, std::abs(W));
        const double s = std::abs(std::sin(th));
        if (s > 1e-12) rep.min_lower_bound_ratio = std::min(rep.min_lower_bound_ratio, std::abs(W) / (2.0 * s));
    }
    rep.grid_max_W = wmax;
    rep.threshold = opts.relative_threshold * wmax;
    if (std::abs(rep.W_at_0) <= rep.threshold) rep.resonant_edges.push_back(0);
    if (std::abs(rep.W_at_pi) <= rep.threshold || std::abs(rep.W_at_minus_pi) <= rep.threshold) {
        rep.resonant_edges.push_back(4);
    }
    rep.is_generic = rep.resonant_edges.empty();
    return rep;
}

}  // namespace dnls
