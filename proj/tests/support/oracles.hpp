#pragma once

// Independent reference computations used only by the tests. None of these
// call into the library's numerical kernels.

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "dnls/lattice.hpp"

namespace oracle {

using dnls::cplx;
using dnls::LatticeWindow;
using dnls::Potential;

inline const cplx I{0.0, 1.0};

/// f_+ by the 2x2 transfer matrix product run from beyond the window down to
/// n_min - 1, in long double. Returns m_+(n) = e^{i n theta} f_+(n) on the window.
inline std::vector<cplx> jost_plus_transfer(const Potential& q, cplx theta) {
    using lc = std::complex<long double>;
    const LatticeWindow& w = q.window();
    const lc th(theta.real(), theta.imag());
    const lc z = 2.0L * (1.0L - std::cos(th));
    const int top = w.n_max() + 1;
    lc f_hi = std::exp(-lc(0, 1) * th * static_cast<long double>(top + 1));
    lc f_mid = std::exp(-lc(0, 1) * th * static_cast<long double>(top));
    std::vector<cplx> m(w.size());
    for (int n = top; n > w.n_min(); --n) {
        // f(n-1) = (2 - z + q(n)) f(n) - f(n+1)
        const lc f_lo = (2.0L - z + static_cast<long double>(q.q(n))) * f_mid - f_hi;
        f_hi = f_mid;
        f_mid = f_lo;
        const int site = n - 1;
        const lc mm = std::exp(lc(0, 1) * th * static_cast<long double>(site)) * f_mid;
        m[w.index(site)] = cplx(static_cast<double>(mm.real()), static_cast<double>(mm.imag()));
    }
    return m;
}

/// m_- from m_+ of the reflected potential: m_-(n; q) = m_+(-n; q(-.)).
inline std::vector<cplx> jost_minus_transfer(const Potential& q, cplx theta) {
    const Potential r = q.reflected();
    const auto mr = jost_plus_transfer(r, theta);
    const LatticeWindow& w = q.window();
    std::vector<cplx> m(w.size());
    for (int n = w.n_min(); n <= w.n_max(); ++n) m[w.index(n)] = mr[r.window().index(-n)];
    return m;
}

/// D(k) = (1 - e^{2 i k theta}) / (2 i sin theta), k <= 0.
inline cplx kernel_D(int k, cplx theta) {
    return (1.0 - std::exp(2.0 * I * static_cast<double>(k) * theta)) / (2.0 * I * std::sin(theta));
}

/// Neumann series of m_+ by direct O(N^2) summation:
///   g_0 = 1, g_l(n) = sum_{nu > n} D(n - nu) q(nu) g_{l-1}(nu).
/// Returns 1 + g_1 + ... + g_L on the window.
inline std::vector<cplx> volterra_series_plus(const Potential& q, cplx theta, int L) {
    const LatticeWindow& w = q.window();
    const std::size_t N = w.size();
    std::vector<cplx> g(N, 1.0), sum(N, 1.0);
    for (int l = 1; l <= L; ++l) {
        std::vector<cplx> next(N, 0.0);
        for (int n = w.n_min(); n <= w.n_max(); ++n) {
            cplx s = 0.0;
            for (int nu = n + 1; nu <= w.n_max(); ++nu) {
                const double qv = q.q(nu);
                if (qv != 0.0) s += kernel_D(n - nu, theta) * qv * g[w.index(nu)];
            }
            next[w.index(n)] = s;
        }
        g = std::move(next);
        for (std::size_t i = 0; i < N; ++i) sum[i] += g[i];
    }
    return sum;
}

/// Thomas algorithm for (H - z) x = e_m on the window (Dirichlet ends).
inline std::vector<cplx> tridiagonal_column(const Potential& q, cplx z, int m) {
    const LatticeWindow& w = q.window();
    const std::size_t N = w.size();
    std::vector<cplx> c(N), d(N, 0.0);
    d[w.index(m)] = 1.0;
    std::vector<cplx> diag(N);
    for (std::size_t i = 0; i < N; ++i) diag[i] = 2.0 + q.q(w.site(i)) - z;
    // sub = super = -1
    c[0] = -1.0 / diag[0];
    d[0] = d[0] / diag[0];
    for (std::size_t i = 1; i < N; ++i) {
        const cplx den = diag[i] + c[i - 1];
        c[i] = -1.0 / den;
        d[i] = (d[i] + d[i - 1]) / den;
    }
    for (std::size_t i = N - 1; i-- > 0;) d[i] -= c[i] * d[i + 1];
    return d;
}

inline Eigen::MatrixXd dense_hamiltonian(const Potential& q) {
    const LatticeWindow& w = q.window();
    const Eigen::Index N = static_cast<Eigen::Index>(w.size());
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(N, N);
    for (Eigen::Index i = 0; i < N; ++i) {
        H(i, i) = 2.0 + q.q(w.site(static_cast<std::size_t>(i)));
        if (i + 1 < N) H(i, i + 1) = H(i + 1, i) = -1.0;
    }
    return H;
}

/// Block of e^{s i t H} P_c from the dense eigendecomposition of the truncated
/// H (P_c: eigenvalues inside [-guard, 4 + guard]).
inline Eigen::MatrixXcd eigen_propagator(const Potential& q, double t, int s, const LatticeWindow& block,
                                         double guard = 1e-6) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense_hamiltonian(q));
    const LatticeWindow& w = q.window();
    const Eigen::Index off = static_cast<Eigen::Index>(w.index(block.n_min()));
    const Eigen::Index nb = static_cast<Eigen::Index>(block.size());
    const Eigen::MatrixXd Vb = es.eigenvectors().middleRows(off, nb);
    Eigen::VectorXcd ph(es.eigenvalues().size());
    for (Eigen::Index k = 0; k < ph.size(); ++k) {
        const double l = es.eigenvalues()(k);
        ph(k) = (l >= -guard && l <= 4.0 + guard) ? std::exp(static_cast<double>(s) * I * t * l) : cplx(0.0);
    }
    return Vb.cast<cplx>() * ph.asDiagonal() * Vb.transpose().cast<cplx>();
}

/// Newton with a dense Jacobian for H phi - |phi|^{p-1} phi + omega phi = 0.
inline Eigen::VectorXd dense_newton(const Potential& q, Eigen::VectorXd phi, double omega, int p, int iterations = 40) {
    const Eigen::MatrixXd H = dense_hamiltonian(q);
    for (int it = 0; it < iterations; ++it) {
        Eigen::VectorXd F = H * phi + omega * phi;
        Eigen::MatrixXd J = H;
        for (Eigen::Index i = 0; i < phi.size(); ++i) {
            const double a = std::abs(phi(i));
            F(i) -= std::pow(a, p - 1) * phi(i);
            J(i, i) += omega - p * std::pow(a, p - 1);
        }
        const Eigen::VectorXd step = J.fullPivLu().solve(F);
        phi -= step;
        if (step.norm() < 1e-15 * std::max(1.0, phi.norm())) break;
    }
    return phi;
}

/// Classical RK4 for i u_t = H u - |u|^{p-1} u on the window (Dirichlet ends).
inline std::vector<cplx> rk4_nls(const Potential& q, std::vector<cplx> u, int p, double T, int steps) {
    const LatticeWindow& w = q.window();
    const std::size_t N = w.size();
    auto rhs = [&](const std::vector<cplx>& v) {
        std::vector<cplx> out(N);
        for (std::size_t i = 0; i < N; ++i) {
            const cplx left = i > 0 ? v[i - 1] : cplx(0.0);
            const cplx right = i + 1 < N ? v[i + 1] : cplx(0.0);
            const cplx Hv = -(left + right - 2.0 * v[i]) + q.q(w.site(i)) * v[i];
            out[i] = -I * (Hv - std::pow(std::abs(v[i]), p - 1) * v[i]);
        }
        return out;
    };
    const double h = T / steps;
    std::vector<cplx> tmp(N);
    for (int s = 0; s < steps; ++s) {
        const auto k1 = rhs(u);
        for (std::size_t i = 0; i < N; ++i) tmp[i] = u[i] + 0.5 * h * k1[i];
        const auto k2 = rhs(tmp);
        for (std::size_t i = 0; i < N; ++i) tmp[i] = u[i] + 0.5 * h * k2[i];
        const auto k3 = rhs(tmp);
        for (std::size_t i = 0; i < N; ++i) tmp[i] = u[i] + h * k3[i];
        const auto k4 = rhs(tmp);
        for (std::size_t i = 0; i < N; ++i) u[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    return u;
}

inline double max_abs_diff(const std::vector<cplx>& a, const std::vector<cplx>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace oracle
