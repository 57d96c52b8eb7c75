#include "dnls/propagator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "dnls/error.hpp"
#include "dnls/jost.hpp"
#include "dnls/scattering.hpp"

namespace dnls {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr cplx kI{0.0, 1.0};

int sign_value(TimeSign s) { return static_cast<int>(s); }

double outer_norm(const std::vector<double>& v, double s) {
    if (std::isinf(s)) return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end());
    double scale = 0.0;
    for (double x : v) scale = std::max(scale, x);
    if (scale == 0.0) return 0.0;
    double acc = 0.0;
    for (double x : v) acc += std::pow(x / scale, s);
    return scale * std::pow(acc, 1.0 / s);
}

}  // namespace

std::vector<double> bessel_j_sequence(int kmax, double x) {
    if (kmax < 0) throw std::invalid_argument("Bessel order must be nonnegative");
    std::vector<double> J(static_cast<std::size_t>(kmax) + 1, 0.0);
    const double ax = std::abs(x);
    if (ax == 0.0) {
        J[0] = 1.0;
        return J;
    }
    int N = std::max(kmax, static_cast<int>(std::ceil(ax))) + 60 + static_cast<int>(std::ceil(25.0 * std::cbrt(ax)));
    if (N % 2) ++N;
    std::vector<double> b(static_cast<std::size_t>(N) + 2, 0.0);
    b[static_cast<std::size_t>(N)] = 1e-280;
    for (int k = N; k >= 1; --k) {
        b[static_cast<std::size_t>(k) - 1] = (2.0 * k / ax) * b[static_cast<std::size_t>(k)] - b[static_cast<std::size_t>(k) + 1];
        if (std::abs(b[static_cast<std::size_t>(k) - 1]) > 1e250) {
            for (int i = k - 1; i <= N + 1; ++i) b[static_cast<std::size_t>(i)] *= 1e-250;
        }
    }
    double norm = b[0];
    for (int k = 2; k <= N; k += 2) norm += 2.0 * b[static_cast<std::size_t>(k)];
    for (int k = 0; k <= kmax; ++k) {
        double v = b[static_cast<std::size_t>(k)] / norm;
        if (x < 0.0 && (k % 2)) v = -v;
        J[static_cast<std::size_t>(k)] = v;
    }
    return J;
}

cplx free_propagator(double t, int k, TimeSign sign) {
    const int s = sign_value(sign);
    const int ak = std::abs(k);
    const auto J = bessel_j_sequence(ak, 2.0 * t);
    const cplx phase = std::exp(kI * (2.0 * s * t));
    return phase * std::pow(-static_cast<double>(s) * kI, ak) * J[static_cast<std::size_t>(ak)];
}

FreeFlow::FreeFlow(double t, TimeSign sign, double cutoff) : t_(t), sign_(sign) {
    const double x = 2.0 * t;
    const int kmax = static_cast<int>(std::ceil(std::abs(x))) + 60 + static_cast<int>(std::ceil(25.0 * std::cbrt(std::abs(x))));
    const auto J = bessel_j_sequence(kmax, x);
    int band = 0;
    for (int k = 0; k <= kmax; ++k) {
        if (std::abs(J[static_cast<std::size_t>(k)]) >= cutoff) band = k;
    }
    const int s = sign_value(sign);
    const cplx phase = std::exp(kI * (2.0 * s * t));
    const cplx step = -static_cast<double>(s) * kI;
    kernel_.resize(static_cast<std::size_t>(band) + 1);
    cplx pw{1.0, 0.0};
    for (int k = 0; k <= band; ++k) {
        kernel_[static_cast<std::size_t>(k)] = phase * pw * J[static_cast<std::size_t>(k)];
        pw *= step;
    }
}

cplx FreeFlow::kernel(int k) const {
    const int ak = std::abs(k);
    return ak <= band() ? kernel_[static_cast<std::size_t>(ak)] : cplx{};
}

ComplexField FreeFlow::apply_dirichlet(const ComplexField& u) const {
    const auto& w = u.window();
    const int B = band();
    const long a = w.n_min() - 1;
    const long L = static_cast<long>(w.size()) + 1;  // b - a
    const long P = 2 * L;
    auto ext = [&](long x) -> cplx {
        long y = ((x - a) % P + P) % P;
        if (y == 0 || y == L) return cplx{};
        if (y < L) return u(static_cast<int>(a + y));
        return -u(static_cast<int>(a + P - y));
    };
    const long lo = w.n_min() - B;
    std::vector<cplx> ue(w.size() + 2 * static_cast<std::size_t>(B));
    for (std::size_t i = 0; i < ue.size(); ++i) ue[i] = ext(lo + static_cast<long>(i));
    ComplexField v(w);
    auto out = v.values();
    for (std::size_t i = 0; i < w.size(); ++i) {
        // site n = n_min + i sits at ue index i + B
        const std::size_t c = i + static_cast<std::size_t>(B);
        cplx acc = kernel_[0] * ue[c];
        for (int k = 1; k <= B; ++k) acc += kernel_[static_cast<std::size_t>(k)] * (ue[c - k] + ue[c + k]);
        out[i] = acc;
    }
    return v;
}

ComplexField FreeFlow::apply_infinite(const ComplexField& u) const {
    const auto& w = u.window();
    const int B = band();
    const LatticeWindow wide(w.n_min() - B, w.n_max() + B);
    ComplexField v(wide);
    auto in = u.values();
    for (int n = wide.n_min(); n <= wide.n_max(); ++n) {
        cplx acc{};
        const int m_lo = std::max(w.n_min(), n - B);
        const int m_hi = std::min(w.n_max(), n + B);
        for (int m = m_lo; m <= m_hi; ++m) acc += kernel_[static_cast<std::size_t>(std::abs(n - m))] * in[w.index(m)];
        v.at(n) = acc;
    }
    return v;
}

int propagator_quadrature_points(double t, int radius) {
    const double at = std::abs(t);
    const double need = std::max({1024.0, std::ceil(16.0 * at), std::ceil(2.0 * radius + 2.0 * at + 10.0 * std::cbrt(at) + 256.0)});
    int M = static_cast<int>(need);
    M = (M + 63) / 64 * 64;
    return M;
}

namespace {

Eigen::MatrixXcd propagator_matrix(const Potential& q, double t, TimeSign sign, const LatticeWindow& block, int M,
                                   double edge_sin) {
    const int s = sign_value(sign);
    const Eigen::Index nb = static_cast<Eigen::Index>(block.size());
    Eigen::MatrixXcd F = Eigen::MatrixXcd::Zero(nb, nb);
    const int chunk = 256;
    Eigen::MatrixXcd A(nb, chunk), B(nb, chunk);
    for (int j0 = 0; j0 < M; j0 += chunk) {
        const int cols = std::min(chunk, M - j0);
        for (int c = 0; c < cols; ++c) {
            const int j = j0 + c;
            const double th = -kPi + (j + 0.5) * 2.0 * kPi / M;
            const ComplexField mp = modified_jost(q, Side::plus, cplx{th, 0.0});
            const ComplexField mm = modified_jost(q, Side::minus, cplx{th, 0.0});
            const cplx W = wronskian_from_m(mp, mm, cplx{th, 0.0}, 0);
            const double sn = std::sin(th);
            const cplx T = std::abs(sn) < edge_sin ? transmission_edge_form(W, th) : -2.0 * kI * sn / W;
            const double z = 2.0 - 2.0 * std::cos(th);
            const cplx wgt = std::exp(kI * (s * t * z)) * T / static_cast<double>(M);
            for (Eigen::Index i = 0; i < nb; ++i) {
                const int n = block.site(static_cast<std::size_t>(i));
                const cplx ep = std::exp(kI * (static_cast<double>(n) * th));
                A(i, c) = ep * mm(n) * wgt;          // f-(n) w_j
                B(i, c) = std::conj(ep) * mp(n);     // f+(n)
            }
        }
        if (cols == chunk) {
            F.noalias() += A * B.transpose();
        } else {
            F.noalias() += A.leftCols(cols) * B.leftCols(cols).transpose();
        }
    }
    // F(n, nu) is the kernel for n <= nu; mirror the upper triangle.
    for (Eigen::Index i = 0; i < nb; ++i) {
        for (Eigen::Index k = 0; k < i; ++k) F(i, k) = F(k, i);
    }
    return F;
}

}  // namespace

PropagatorKernel continuous_propagator(const Potential& q, double t, const PropagatorOptions& opts) {
    const LatticeWindow block = opts.block.value_or(q.window());
    if (!q.window().contains(block)) throw std::invalid_argument("propagator block must lie inside the potential window");
    const int R = std::max(std::abs(block.n_min()), std::abs(block.n_max()));
    const int M = opts.quadrature_points > 0 ? opts.quadrature_points : propagator_quadrature_points(t, R);
    PropagatorKernel pk{t, opts.sign, block, propagator_matrix(q, t, opts.sign, block, M, opts.edge_rewrite_sin), M,
                        std::nullopt};
    if (opts.convergence_check) {
        const int r = opts.convergence_block_radius;
        const LatticeWindow cb(std::max(block.n_min(), -r), std::min(block.n_max(), r));
        const Eigen::MatrixXcd K2 = propagator_matrix(q, t, opts.sign, cb, 2 * M, opts.edge_rewrite_sin);
        const Eigen::Index off = static_cast<Eigen::Index>(block.index(cb.n_min()));
        const Eigen::Index bs = static_cast<Eigen::Index>(cb.size());
        const double change = (pk.K.block(off, off, bs, bs) - K2).cwiseAbs().maxCoeff();
        pk.convergence_change = change;
        if (change > opts.convergence_tol) {
            throw NumericalError("propagator quadrature not converged at t = " + std::to_string(t) +
                                 ": doubling the grid changed entries by " + std::to_string(change));
        }
    }
    return pk;
}

std::optional<double> loglog_slope(std::span<const double> t, std::span<const double> v, double lo, double hi) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] < lo || t[i] > hi || t[i] <= 0.0 || v[i] <= 0.0) continue;
        const double x = std::log(t[i]), y = std::log(v[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    if (n < 2) return std::nullopt;
    const double den = n * sxx - sx * sx;
    if (den == 0.0) return std::nullopt;
    return (n * sxy - sx * sy) / den;
}

DecayScan decay_scan(const Potential& q, std::span<const double> t_grid, const DecayScanOptions& opts) {
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        if (t_grid[i] < 0.0) throw std::invalid_argument("decay scan times must be nonnegative");
        if (i > 0 && t_grid[i] < t_grid[i - 1]) throw std::invalid_argument("decay scan times must be sorted");
    }
    DecayScan scan;
    scan.block = opts.block.value_or(q.window());
    scan.free_kernel = q.empty();
    const int span = static_cast<int>(scan.block.size()) - 1;
    for (double t : t_grid) {
        double sup = 0.0;
        if (scan.free_kernel) {
            const auto J = bessel_j_sequence(span, 2.0 * t);
            for (double v : J) sup = std::max(sup, std::abs(v));
        } else {
            PropagatorOptions po;
            po.sign = opts.sign;
            po.block = scan.block;
            sup = continuous_propagator(q, t, po).K.cwiseAbs().maxCoeff();
        }
        scan.times.push_back(t);
        scan.sup_kernel.push_back(sup);
        const double wt = sup * std::pow(1.0 + t * t, 1.0 / 6.0);
        scan.weighted.push_back(wt);
        scan.C_measured = std::max(scan.C_measured, wt);
    }
    scan.fit_lo = opts.fit_lo;
    scan.fit_hi = opts.fit_hi > 0.0 ? opts.fit_hi : (t_grid.empty() ? 0.0 : t_grid.back());
    scan.slope = loglog_slope(scan.times, scan.sup_kernel, scan.fit_lo, scan.fit_hi);
    return scan;
}

bool is_admissible(double r, double p) {
    if (!(r >= 4.0) || !(p >= 2.0)) return false;
    const double lhs = (std::isinf(r) ? 0.0 : 2.0 / r) + (std::isinf(p) ? 0.0 : 1.0 / p);
    return std::abs(lhs - 0.5) < 1e-12;
}

StrichartzResult strichartz_norm(std::span<const double> times, std::span<const ComplexField> states, double r,
                                 double p) {
    if (!is_admissible(r, p)) {
        throw std::invalid_argument("exponent pair (" + std::to_string(r) + ", " + std::to_string(p) +
                                    ") is not admissible");
    }
    if (times.size() != states.size() || times.size() < 2) {
        throw std::invalid_argument("Strichartz norm needs a trajectory with at least two samples");
    }
    const double spacing = times[1] - times[0];
    for (std::size_t i = 1; i < times.size(); ++i) {
        if (std::abs((times[i] - times[i - 1]) - spacing) > 1e-9 * std::max(1.0, spacing)) {
            throw std::invalid_argument("Strichartz norm needs a uniform time grid");
        }
    }
    StrichartzAccumulator acc(r, p, times.front(), times.back());
    for (std::size_t i = 0; i < times.size(); ++i) acc.add(times[i], states[i]);
    return acc.result();
}

StrichartzResult strichartz_norm(const Trajectory& traj, double r, double p) {
    return strichartz_norm(traj.times, traj.states, r, p);
}

StrichartzAccumulator::StrichartzAccumulator(double r, double p, double t0, double t1)
    : r_(r), p_(p), t0_(t0), last_t_(-std::numeric_limits<double>::infinity()) {
    if (!is_admissible(r, p)) {
        throw std::invalid_argument("exponent pair (" + std::to_string(r) + ", " + std::to_string(p) +
                                    ") is not admissible");
    }
    count_ = std::max(1, static_cast<int>(std::ceil(t1 - t0 - 1e-9)));
    max_.assign(static_cast<std::size_t>(count_), 0.0);
}

void StrichartzAccumulator::add(double t, const ComplexField& u) {
    if (std::isfinite(last_t_)) spacing_ = std::max(spacing_, t - last_t_);
    last_t_ = t;
    const int j = std::clamp(static_cast<int>(std::floor(t - t0_ + 1e-9)), 0, count_ - 1);
    auto& m = max_[static_cast<std::size_t>(j)];
    m = std::max(m, weighted_norm(u, p_, 0.0));
}

StrichartzResult StrichartzAccumulator::result() const {
    StrichartzResult res;
    res.r = r_;
    res.p = p_;
    res.outer_exponent = 1.5 * r_;
    res.intervals = count_;
    res.sample_spacing = spacing_;
    res.interval_max = max_;
    res.value = outer_norm(max_, res.outer_exponent);
    return res;
}

LinearFlow::LinearFlow(const Potential& q, double edge_guard) : basis_(full_eigenbasis(q, edge_guard)) {}

LinearFlow::LinearFlow(Eigenbasis basis) : basis_(std::move(basis)) {}

ComplexField LinearFlow::apply(const ComplexField& u, double t, TimeSign sign, bool project) const {
    const auto& w = basis_.window;
    if (!(u.window() == w)) throw std::invalid_argument("field window must match the operator window");
    const Eigen::Index n = static_cast<Eigen::Index>(w.size());
    Eigen::VectorXd re(n), im(n);
    auto vals = u.values();
    for (Eigen::Index i = 0; i < n; ++i) {
        re(i) = vals[static_cast<std::size_t>(i)].real();
        im(i) = vals[static_cast<std::size_t>(i)].imag();
    }
    Eigen::VectorXd cr = basis_.V.transpose() * re;
    Eigen::VectorXd ci = basis_.V.transpose() * im;
    const double s = static_cast<double>(sign_value(sign));
    for (Eigen::Index j = 0; j < n; ++j) {
        if (project && !basis_.continuous[static_cast<std::size_t>(j)]) {
            cr(j) = 0.0;
            ci(j) = 0.0;
            continue;
        }
        const cplx c = cplx{cr(j), ci(j)} * std::exp(kI * (s * t * basis_.lambda(j)));
        cr(j) = c.real();
        ci(j) = c.imag();
    }
    const Eigen::VectorXd outr = basis_.V * cr;
    const Eigen::VectorXd outi = basis_.V * ci;
    ComplexField v(w);
    auto out = v.values();
    for (Eigen::Index i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = cplx{outr(i), outi(i)};
    return v;
}

ComplexField LinearFlow::project(const ComplexField& u) const { return apply(u, 0.0, TimeSign::forward, true); }

Eigen::MatrixXcd LinearFlow::kernel(double t, TimeSign sign, const LatticeWindow& block) const {
    const auto& w = basis_.window;
    if (!w.contains(block)) throw std::invalid_argument("kernel block must lie inside the window");
    const Eigen::Index n = static_cast<Eigen::Index>(w.size());
    const Eigen::Index off = static_cast<Eigen::Index>(w.index(block.n_min()));
    const Eigen::Index bs = static_cast<Eigen::Index>(block.size());
    const Eigen::MatrixXd Vb = basis_.V.middleRows(off, bs);
    Eigen::VectorXd c(n), sn(n);
    const double s = static_cast<double>(sign_value(sign));
    for (Eigen::Index j = 0; j < n; ++j) {
        const bool keep = basis_.continuous[static_cast<std::size_t>(j)];
        c(j) = keep ? std::cos(s * t * basis_.lambda(j)) : 0.0;
        sn(j) = keep ? std::sin(s * t * basis_.lambda(j)) : 0.0;
    }
    const Eigen::MatrixXd Kr = Vb * c.asDiagonal() * Vb.transpose();
    const Eigen::MatrixXd Ki = Vb * sn.asDiagonal() * Vb.transpose();
    Eigen::MatrixXcd K(bs, bs);
    K.real() = Kr;
    K.imag() = Ki;
    return K;
}

LinearFlow::Step LinearFlow::step(double dt, TimeSign sign, double cutoff) const {
    const Eigen::Index n = static_cast<Eigen::Index>(basis_.window.size());
    const double s = static_cast<double>(sign_value(sign));
    Eigen::VectorXd c(n), sn(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        c(j) = std::cos(s * dt * basis_.lambda(j));
        sn(j) = std::sin(s * dt * basis_.lambda(j));
    }
    const Eigen::MatrixXd& V = basis_.V;
    auto entry = [&](Eigen::Index a, Eigen::Index b) {
        double re = 0.0, im = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            const double p = V(a, j) * V(b, j);
            re += p * c(j);
            im += p * sn(j);
        }
        return cplx{re, im};
    };
    // Find the band: diagonals whose entries all fall below the cutoff, twice in a row.
    std::vector<std::vector<cplx>> diags;
    int quiet = 0;
    for (Eigen::Index k = 0; k < n; ++k) {
        std::vector<cplx> d(static_cast<std::size_t>(n - k));
        double mx = 0.0;
        for (Eigen::Index a = 0; a + k < n; ++a) {
            d[static_cast<std::size_t>(a)] = entry(a, a + k);
            mx = std::max(mx, std::abs(d[static_cast<std::size_t>(a)]));
        }
        if (mx < cutoff && k > 0) {
            if (++quiet == 2) break;
        } else {
            quiet = 0;
        }
        diags.push_back(std::move(d));
    }
    while (diags.size() > 1) {
        double mx = 0.0;
        for (const auto& v : diags.back()) mx = std::max(mx, std::abs(v));
        if (mx >= cutoff) break;
        diags.pop_back();
    }
    Step st;
    st.band = static_cast<int>(diags.size()) - 1;
    st.n = static_cast<std::size_t>(n);
    const std::size_t width = 2 * static_cast<std::size_t>(st.band) + 1;
    st.data.assign(st.n * width, cplx{});
    for (std::size_t a = 0; a < st.n; ++a) {
        for (int k = -st.band; k <= st.band; ++k) {
            const long b = static_cast<long>(a) + k;
            if (b < 0 || b >= static_cast<long>(st.n)) continue;
            const std::size_t lo = std::min(a, static_cast<std::size_t>(b));
            st.data[a * width + static_cast<std::size_t>(k + st.band)] = diags[static_cast<std::size_t>(std::abs(k))][lo];
        }
    }
    return st;
}

ComplexField LinearFlow::Step::apply(const ComplexField& u) const {
    if (u.size() != n) throw std::invalid_argument("field size does not match the step operator");
    ComplexField v(u.window());
    auto in = u.values();
    auto out = v.values();
    const std::size_t width = 2 * static_cast<std::size_t>(band) + 1;
    for (std::size_t a = 0; a < n; ++a) {
        cplx acc{};
        const long lo = std::max<long>(0, static_cast<long>(a) - band);
        const long hi = std::min<long>(static_cast<long>(n) - 1, static_cast<long>(a) + band);
        for (long b = lo; b <= hi; ++b) {
            acc += data[a * width + static_cast<std::size_t>(b - static_cast<long>(a) + band)] * in[static_cast<std::size_t>(b)];
        }
        out[a] = acc;
    }
    return v;
}

SmoothingReport smoothing_norms(const Potential& q, const ComplexField& f, double tau, double T_max,
                                const SmoothingOptions& opts) {
    if (!(tau > 1.0)) throw std::invalid_argument("smoothing norms need tau > 1");
    if (!(T_max > 0.0)) throw std::invalid_argument("smoothing norms need T_max > 0");
    const auto& w = q.window();
    const ComplexField f_w = f.on(w);
    const int steps = std::max(1, static_cast<int>(std::llround(T_max / opts.dt)));
    const double dt = T_max / steps;

    const LinearFlow flow(q);
    const LinearFlow::Step E = flow.step(dt, TimeSign::forward);

    SmoothingReport rep;
    rep.tau = tau;
    rep.T_max = T_max;
    rep.dt = dt;
    rep.f_norm = weighted_norm(f_w, 2.0, 0.0);

    std::vector<double> weight(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) weight[i] = std::pow(japanese(w.site(i)), -2.0 * tau);
    auto weighted_sq = [&](const ComplexField& u) {
        double s = 0.0;
        auto vals = u.values();
        for (std::size_t i = 0; i < vals.size(); ++i) s += weight[i] * std::norm(vals[i]);
        return s;
    };

    // (i) free-data evolution, trapezoid in time.
    ComplexField u = flow.project(f_w);
    double acc = 0.5 * weighted_sq(u);
    for (int k = 1; k <= steps; ++k) {
        u = E.apply(u);
        acc += (k == steps ? 0.5 : 1.0) * weighted_sq(u);
    }
    rep.norm_i = std::sqrt(acc * dt);
    rep.ratio_i = rep.f_norm > 0.0 ? rep.norm_i / rep.f_norm : 0.0;

    // (ii), (iii) retarded integral with g(s) = a(s) h.
    const ComplexField h = opts.source_profile ? opts.source_profile->on(w) : f_w;
    const ComplexField Ph = flow.project(h);
    auto a = [&](double s) { return std::exp(-opts.source_decay * s); };
    double a_sq = 0.0;
    for (int k = 0; k <= steps; ++k) a_sq += (k == 0 || k == steps ? 0.5 : 1.0) * a(k * dt) * a(k * dt);
    a_sq *= dt;
    rep.g_norm = weighted_norm(h, 2.0, tau) * std::sqrt(a_sq);

    ComplexField v(w);
    StrichartzAccumulator im(4.0, std::numeric_limits<double>::infinity(), 0.0, T_max);
    im.add(0.0, v);
    double acc2 = 0.0;
    double sup_l2 = 0.0;
    for (int k = 0; k < steps; ++k) {
        ComplexField tmp = v + (0.5 * dt * a(k * dt)) * Ph;
        v = E.apply(tmp) + (0.5 * dt * a((k + 1) * dt)) * Ph;
        acc2 += (k + 1 == steps ? 0.5 : 1.0) * weighted_sq(v);
        sup_l2 = std::max(sup_l2, weighted_norm(v, 2.0, 0.0));
        im.add((k + 1) * dt, v);
    }
    rep.norm_ii = std::sqrt(acc2 * dt);
    rep.norm_iii_sup_l2 = sup_l2;
    rep.norm_iii_strichartz = im.result().value;
    if (rep.g_norm > 0.0) {
        rep.ratio_ii = rep.norm_ii / rep.g_norm;
        rep.ratio_iii = (rep.norm_iii_sup_l2 + rep.norm_iii_strichartz) / rep.g_norm;
    }

    rep.C_tau = opts.C_tau ? *opts.C_tau : limiting_absorption_constant(q, tau, opts.lap).constant;
    rep.predicted_bound = 2.0 * std::sqrt(kPi * rep.C_tau);
    return rep;
}

}  // namespace dnls
