#include "dnls/jost.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "dnls/error.hpp"

namespace dnls {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr cplx kI{0.0, 1.0};

// Below this |sin theta| the kernel is evaluated through Chebyshev polynomials
// of the second kind instead of the quotient form.
constexpr double kEdgeSin = 1e-2;

struct Recursion {
    std::vector<cplx> m;
    std::vector<cplx> m_dot;
};

// Plus-side recursion on q's window. With d(n) = m(n-1) - m(n),
//   d(n) = e^{-i theta} q(n) m(n) + e^{-2i theta} d(n+1),
// which is the Volterra sum rewritten using D(k-1) - D(k) = e^{-i theta} e^{2ik theta}.
Recursion plus_recursion(const Potential& q, cplx theta, bool with_dot) {
    const auto& w = q.window();
    const std::size_t n = w.size();
    Recursion r;
    r.m.assign(n, cplx{1.0, 0.0});
    if (with_dot) r.m_dot.assign(n, cplx{});
    const cplx e1 = std::exp(-kI * theta);
    const cplx e2 = e1 * e1;
    cplx d{};
    cplx dd{};
    for (std::size_t i = n - 1; i > 0; --i) {
        const double qn = q.values()[i];
        const cplx mi = r.m[i];
        if (with_dot) {
            const cplx mdi = r.m_dot[i];
            dd = -kI * e1 * qn * mi + e1 * qn * mdi - 2.0 * kI * e2 * d + e2 * dd;
            r.m_dot[i - 1] = mdi + dd;
        }
        d = e1 * qn * mi + e2 * d;
        r.m[i - 1] = mi + d;
        if (!std::isfinite(r.m[i - 1].real()) || !std::isfinite(r.m[i - 1].imag())) {
            throw NumericalError("non-finite modified Jost function at site " + std::to_string(w.site(i - 1)));
        }
    }
    return r;
}

Recursion signed_recursion(const Potential& q, Side sign, cplx theta, bool with_dot) {
    if (sign == Side::plus) return plus_recursion(q, theta, with_dot);
    // m_-(n; q) = m_+(-n; q(-.)): reflect, solve, reflect back.
    Recursion r = plus_recursion(q.reflected(), theta, with_dot);
    std::reverse(r.m.begin(), r.m.end());
    if (with_dot) std::reverse(r.m_dot.begin(), r.m_dot.end());
    return r;
}

ComplexField jost_f(const LatticeWindow& w, Side sign, cplx theta, const ComplexField& m) {
    ComplexField f(w);
    const double s = sign == Side::plus ? -1.0 : 1.0;
    for (int n = w.n_min(); n <= w.n_max(); ++n) {
        const cplx v = std::exp(kI * (s * n) * theta) * m(n);
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
            throw NumericalError("Jost function overflows at site " + std::to_string(n) +
                                 " (|Im theta| too large for this window)");
        }
        f.at(n) = v;
    }
    return f;
}

// D(-j) and optionally its theta-derivative for j = 0..J.
void kernel_table(cplx theta, int J, std::vector<cplx>& D, std::vector<cplx>* Ddot) {
    D.assign(J + 1, cplx{});
    if (Ddot) Ddot->assign(J + 1, cplx{});
    const cplx s = std::sin(theta);
    if (std::abs(s) >= kEdgeSin) {
        const cplx c = std::cos(theta);
        for (int j = 1; j <= J; ++j) {
            const double k = -j;
            const cplx e = std::exp(2.0 * kI * k * theta);
            D[j] = (1.0 - e) / (2.0 * kI * s);
            if (Ddot) (*Ddot)[j] = -k * e / s - D[j] * c / s;
        }
        return;
    }
    // D(k) = e^{ik theta} U_{|k|-1}(cos theta) for k < 0.
    const cplx x = std::cos(theta);
    cplx u_prev{0.0, 0.0};  // U_{-1}
    cplx u{1.0, 0.0};       // U_0
    cplx up_prev{}, up{};   // derivatives w.r.t. x
    for (int j = 1; j <= J; ++j) {
        const double k = -j;
        const cplx e = std::exp(kI * k * theta);
        D[j] = e * u;
        if (Ddot) (*Ddot)[j] = e * (kI * k * u - s * up);
        const cplx u_next = 2.0 * x * u - u_prev;
        const cplx up_next = 2.0 * u + 2.0 * x * up - up_prev;
        u_prev = u;
        u = u_next;
        up_prev = up;
        up = up_next;
    }
}

std::vector<cplx> plus_series_terms(const Potential& q, cplx theta, int L, std::vector<std::vector<cplx>>& out) {
    const auto& w = q.window();
    const int n = static_cast<int>(w.size());
    std::vector<cplx> D;
    kernel_table(theta, n, D, nullptr);
    out.clear();
    std::vector<cplx> prev(n, cplx{1.0, 0.0});
    if (q.empty()) {
        for (int ell = 1; ell <= L; ++ell) out.emplace_back(n, cplx{});
        return prev;
    }
    const int smin = q.support_min();
    const int smax = q.support_max();
    for (int ell = 1; ell <= L; ++ell) {
        std::vector<cplx> g(n, cplx{});
        for (int i = 0; i < n; ++i) {
            const int site = w.site(i);
            cplx acc{};
            for (int nu = std::max(site + 1, smin); nu <= smax; ++nu) {
                const double qv = q.q(nu);
                if (qv == 0.0) continue;
                acc += D[nu - site] * qv * prev[w.index(nu)];
            }
            g[i] = acc;
        }
        out.push_back(g);
        prev = std::move(g);
    }
    return prev;
}

// Principal branch of Lambert W for x >= 0.
double lambert_w0(double x) {
    if (x == 0.0) return 0.0;
    double w = x < 1.0 ? x : std::log(x) - std::log(std::log(x) + 1.0);
    if (w < 0.0) w = 0.0;
    for (int it = 0; it < 100; ++it) {
        const double ew = std::exp(w);
        const double f = w * ew - x;
        const double step = f / (ew * (w + 1.0) - (w + 2.0) * f / (2.0 * w + 2.0));
        w -= step;
        if (std::abs(step) <= 1e-15 * (1.0 + std::abs(w))) break;
    }
    return w;
}

void accumulate_bounds(JostBoundReport& rep, const ComplexField& m, const ComplexField* m_dot, double theta) {
    const auto& w = m.window();
    const double s = std::abs(std::sin(theta));
    const double jsin = japanese(s);
    const bool plus = rep.sign == Side::plus;
    for (int n = w.n_min(); n <= w.n_max(); ++n) {
        const double npos = plus ? std::max(n, 0) : std::max(-n, 0);  // n^{+-}
        const double nneg = plus ? std::max(-n, 0) : std::max(n, 0);  // n^{-+}
        const double dev = std::abs(m(n) - 1.0);
        if (dev > 0.0) {
            if (s > 1e-12) {
                // C e^{C/s} = dev s <n^+->^{sigma}; C = s W0(dev <n>^sigma).
                const double rhs = dev * std::pow(japanese(npos), rep.sigma);
                rep.c1 = std::max(rep.c1, s * lambert_w0(rhs));
            }
            const double c2 = dev * std::pow(japanese(npos), rep.sigma - 1) * jsin / (1.0 + nneg);
            rep.c2 = std::max(rep.c2, c2);
        }
        if (m_dot) {
            const double c3 = std::abs((*m_dot)(n)) / std::pow(japanese(nneg), 2);
            rep.c3 = std::max(rep.c3.value_or(0.0), c3);
        }
    }
    ++rep.theta_count;
}

}  // namespace

SpectralPoint::SpectralPoint(cplx theta) : theta_(theta), z_(2.0 * (1.0 - std::cos(theta))) {
    if (!std::isfinite(theta.real()) || !std::isfinite(theta.imag())) {
        throw std::invalid_argument("spectral angle must be finite");
    }
    if (theta.imag() > 0.0) throw std::invalid_argument("spectral angle must satisfy Im theta <= 0");
    if (std::abs(theta.real()) > kPi * (1.0 + 1e-14)) {
        throw std::invalid_argument("spectral angle must satisfy -pi <= Re theta <= pi");
    }
}

SpectralPoint SpectralPoint::from_z(cplx z) {
    cplx th = std::acos(1.0 - z / 2.0);
    if (z.imag() == 0.0 && z.real() >= 0.0 && z.real() <= 4.0) {
        th = cplx{std::acos(std::clamp(1.0 - z.real() / 2.0, -1.0, 1.0)), 0.0};
    } else if (th.imag() > 0.0) {
        th = -th;
    }
    if (th.imag() > 0.0) th = cplx{th.real(), 0.0};
    return SpectralPoint(th);
}

cplx volterra_kernel(int k, cplx theta) {
    if (k == 0) return cplx{};
    std::vector<cplx> D;
    if (k < 0) {
        kernel_table(theta, -k, D, nullptr);
        return D[-k];
    }
    // D(k) = -D(-k) e^{2ik theta} for k > 0.
    kernel_table(theta, k, D, nullptr);
    return -D[k] * std::exp(2.0 * kI * static_cast<double>(k) * theta);
}

cplx volterra_kernel_derivative(int k, cplx theta) {
    if (k == 0) return cplx{};
    std::vector<cplx> D, Dd;
    if (k < 0) {
        kernel_table(theta, -k, D, &Dd);
        return Dd[-k];
    }
    kernel_table(theta, k, D, &Dd);
    const cplx e = std::exp(2.0 * kI * static_cast<double>(k) * theta);
    return -Dd[k] * e - D[k] * e * (2.0 * kI * static_cast<double>(k));
}

ComplexField modified_jost(const Potential& q, Side sign, cplx theta) {
    Recursion r = signed_recursion(q, sign, theta, false);
    return ComplexField(q.window(), std::move(r.m));
}

JostData jost_m(const Potential& q, Side sign, const SpectralPoint& theta) {
    ComplexField m = modified_jost(q, sign, theta.theta());
    ComplexField f = jost_f(q.window(), sign, theta.theta(), m);
    return JostData{sign, theta, std::move(m), std::move(f), std::nullopt};
}

JostData jost_m_derivative(const Potential& q, Side sign, const SpectralPoint& theta) {
    Recursion r = signed_recursion(q, sign, theta.theta(), true);
    ComplexField m(q.window(), std::move(r.m));
    ComplexField f = jost_f(q.window(), sign, theta.theta(), m);
    for (const auto& v : r.m_dot) {
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
            throw NumericalError("non-finite Jost derivative");
        }
    }
    return JostData{sign, theta, std::move(m), std::move(f), ComplexField(q.window(), std::move(r.m_dot))};
}

double volterra_residual(const Potential& q, Side sign, cplx theta, const ComplexField& m) {
    const auto& w = q.window();
    std::vector<cplx> D;
    kernel_table(theta, static_cast<int>(w.size()), D, nullptr);
    double worst = 0.0;
    for (int n = w.n_min(); n <= w.n_max(); ++n) {
        cplx acc{1.0, 0.0};
        if (sign == Side::plus) {
            for (int nu = n + 1; nu <= w.n_max(); ++nu) {
                if (q.q(nu) != 0.0) acc += D[nu - n] * q.q(nu) * m(nu);
            }
        } else {
            for (int nu = w.n_min(); nu < n; ++nu) {
                if (q.q(nu) != 0.0) acc += D[n - nu] * q.q(nu) * m(nu);
            }
        }
        worst = std::max(worst, std::abs(m(n) - acc));
    }
    return worst;
}

std::vector<ComplexField> jost_series_terms(const Potential& q, Side sign, const SpectralPoint& theta, int L) {
    if (L < 1) throw std::invalid_argument("series order must be >= 1 (g_0 = 1 is implicit)");
    const Potential& base = q;
    std::vector<std::vector<cplx>> raw;
    if (sign == Side::plus) {
        plus_series_terms(base, theta.theta(), L, raw);
    } else {
        plus_series_terms(base.reflected(), theta.theta(), L, raw);
        for (auto& g : raw) std::reverse(g.begin(), g.end());
    }
    std::vector<ComplexField> out;
    out.reserve(raw.size());
    for (auto& g : raw) out.emplace_back(q.window(), std::move(g));
    return out;
}

ComplexField jost_series_term(const Potential& q, Side sign, const SpectralPoint& theta, int ell) {
    if (ell < 1) throw std::invalid_argument("series term index must be >= 1 (g_0 = 1 is implicit)");
    auto terms = jost_series_terms(q, sign, theta, ell);
    return terms.back();
}

double FourierTable::operator()(int n, int nu) const {
    if (nu < 0) throw std::out_of_range("Fourier index must be nonnegative");
    if (nu == 0 || nu > nu_max) return 0.0;
    const int np = sign == Side::plus ? n : -n;
    const int lo = sign == Side::plus ? n_first : -n_first;
    const int hi = sign == Side::plus ? n_last : -n_last;
    if (np < lo) throw std::out_of_range("row " + std::to_string(n) + " not in Fourier table");
    if (np > hi) return 0.0;
    return data[static_cast<std::size_t>(np - lo) * static_cast<std::size_t>(nu_max + 1) + static_cast<std::size_t>(nu)];
}

cplx FourierTable::resum(int n, double theta) const {
    cplx acc{1.0, 0.0};
    for (int nu = 1; nu <= nu_max; ++nu) {
        const double b = (*this)(n, nu);
        if (b != 0.0) acc += b * std::exp(-kI * (static_cast<double>(nu) * theta));
    }
    return acc;
}

double FourierTable::row_l1(int n) const {
    double s = 0.0;
    for (int nu = 1; nu <= nu_max; ++nu) s += std::abs((*this)(n, nu));
    return s;
}

FourierTable fourier_coefficients(const Potential& q, Side sign, const FourierOptions& opts) {
    if (sign == Side::minus) {
        FourierOptions o = opts;
        o.n_first = -opts.n_first;
        FourierTable t = fourier_coefficients(q.reflected(), Side::plus, o);
        t.sign = Side::minus;
        t.n_first = -t.n_first;
        t.n_last = -t.n_last;
        return t;
    }
    const auto& w = q.window();
    const int width = static_cast<int>(w.size());
    FourierTable t;
    t.sign = Side::plus;
    t.nu_max = opts.nu_max > 0 ? opts.nu_max : 4 * width;
    t.n_first = std::clamp(opts.n_first, w.n_min(), w.n_max());
    t.n_last = w.n_max();
    const int rows = t.n_last - t.n_first + 1;
    const std::size_t stride = static_cast<std::size_t>(t.nu_max + 1);
    t.data.assign(static_cast<std::size_t>(rows) * stride, 0.0);
    if (q.empty() || q.support_max() <= t.n_first) return t;

    // B(n, nu) vanishes once n + [nu/2] passes the support.
    const int smax = q.support_max();
    const int nu_eff = std::min(t.nu_max, 2 * (smax - t.n_first) + 2);
    const std::size_t cols = static_cast<std::size_t>(nu_eff + 1);
    // Row index r = n - n_first; one extra zero row at the bottom.
    auto at = [&](std::vector<double>& a, int r, int c) -> double& {
        return a[static_cast<std::size_t>(r) * cols + static_cast<std::size_t>(c)];
    };
    std::vector<double> K((rows + 1) * cols, 0.0), Knext((rows + 1) * cols, 0.0), S((rows + 1) * cols, 0.0);
    std::vector<double> B((rows + 1) * cols, 0.0);

    // Q(k) = sum_{l >= k} q(l).
    std::vector<double> Q(rows + 2 + nu_eff, 0.0);
    for (int k = static_cast<int>(Q.size()) - 2; k >= 0; --k) Q[k] = Q[k + 1] + q.q(t.n_first + k);

    double sup = 0.0;
    for (int r = 0; r < rows; ++r) {
        for (int nu = 1; 2 * nu - 1 <= nu_eff; ++nu) {
            const int k = r + nu;
            const double v = k < static_cast<int>(Q.size()) ? Q[k] : 0.0;
            at(K, r, 2 * nu - 1) = v;
            sup = std::max(sup, std::abs(v));
        }
    }
    B = K;
    int iterations = 1;
    double last = sup;
    while (sup >= opts.cutoff && iterations < opts.max_iterations) {
        // S(r, c) = sum_{j >= r} q(j) K(j, c).
        std::fill(S.begin(), S.end(), 0.0);
        for (int r = rows - 1; r >= 0; --r) {
            const double qv = q.q(t.n_first + r);
            for (std::size_t c = 0; c < cols; ++c) {
                S[r * cols + c] = qv * K[r * cols + c] + S[(r + 1) * cols + c];
            }
        }
        std::fill(Knext.begin(), Knext.end(), 0.0);
        sup = 0.0;
        for (int r = rows - 1; r >= 0; --r) {
            for (int nu = 1; 2 * nu - 1 <= nu_eff; ++nu) {
                // K(n, 2nu - 1) = K(n+1, 2nu - 3) + S(n+1, 2nu - 2)
                const double odd = (nu > 1 ? at(Knext, r + 1, 2 * nu - 3) : 0.0) + at(S, r + 1, 2 * nu - 2);
                at(Knext, r, 2 * nu - 1) = odd;
                sup = std::max(sup, std::abs(odd));
                if (2 * nu <= nu_eff) {
                    // K(n, 2nu) = K(n+1, 2nu - 2) + S(n+1, 2nu - 1)
                    const double even = (nu > 1 ? at(Knext, r + 1, 2 * nu - 2) : 0.0) + at(S, r + 1, 2 * nu - 1);
                    at(Knext, r, 2 * nu) = even;
                    sup = std::max(sup, std::abs(even));
                }
            }
        }
        for (std::size_t i = 0; i < B.size(); ++i) B[i] += Knext[i];
        std::swap(K, Knext);
        ++iterations;
        last = sup;
    }
    if (sup >= opts.cutoff) {
        throw NumericalError("Fourier coefficient iteration did not reach cutoff " + std::to_string(opts.cutoff) +
                             " after " + std::to_string(iterations) + " terms");
    }
    t.iterations = iterations;
    t.last_term_norm = last;
    for (int r = 0; r < rows; ++r) {
        for (int c = 1; c <= nu_eff; ++c) t.data[static_cast<std::size_t>(r) * stride + c] = at(B, r, c);
    }
    return t;
}

JostBoundReport verify_jost_bounds(const Potential& q, Side sign, int sigma, std::span<const double> thetas) {
    if (sigma != 1 && sigma != 2) throw std::invalid_argument("sigma must be 1 or 2");
    JostBoundReport rep{sign, sigma};
    for (double th : thetas) {
        if (sigma == 2) {
            Recursion r = signed_recursion(q, sign, cplx{th, 0.0}, true);
            ComplexField m(q.window(), std::move(r.m));
            ComplexField md(q.window(), std::move(r.m_dot));
            accumulate_bounds(rep, m, &md, th);
        } else {
            ComplexField m = modified_jost(q, sign, cplx{th, 0.0});
            accumulate_bounds(rep, m, nullptr, th);
        }
    }
    return rep;
}

JostBoundReport verify_jost_bounds(const JostData& jd, const Potential& q, int sigma) {
    if (sigma != 1 && sigma != 2) throw std::invalid_argument("sigma must be 1 or 2");
    if (!jd.theta.is_real()) throw std::invalid_argument("bound report needs a real angle");
    (void)q;
    JostBoundReport rep{jd.sign, sigma};
    const ComplexField* md = (sigma == 2 && jd.m_dot) ? &*jd.m_dot : nullptr;
    accumulate_bounds(rep, jd.m, md, jd.theta.theta().real());
    return rep;
}

std::vector<double> theta_grid(double lo, double hi, std::size_t count) {
    if (count < 2) throw std::invalid_argument("theta grid needs at least 2 points");
    std::vector<double> g(count);
    for (std::size_t i = 0; i < count; ++i) g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
    return g;
}

}  // namespace dnls
