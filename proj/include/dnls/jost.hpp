#pragma once

#include <optional>
#include <span>
#include <vector>

#include "dnls/lattice.hpp"

namespace dnls {

enum class Side { plus, minus };

inline const char* to_string(Side s) { return s == Side::plus ? "+" : "-"; }

/// Spectral parameter: energy z and angle theta with z = 2(1 - cos theta),
/// Im theta <= 0 and -pi <= Re theta <= pi.
class SpectralPoint {
public:
    /// Validates the strip; z is recomputed from theta.
    explicit SpectralPoint(cplx theta);

    /// The unique theta in the closed strip with 2(1 - cos theta) = z.
    /// On the band [0, 4] itself the nonnegative real angle is returned.
    static SpectralPoint from_z(cplx z);

    cplx theta() const { return theta_; }
    cplx z() const { return z_; }
    bool is_real() const { return theta_.imag() == 0.0; }

private:
    cplx theta_;
    cplx z_;
};

/// Modified Jost function m and Jost function f = e^{-+ i n theta} m on the
/// potential's window. m_dot is filled by jost_m_derivative.
struct JostData {
    Side sign;
    SpectralPoint theta;
    ComplexField m;
    ComplexField f;
    std::optional<ComplexField> m_dot;
};

/// Volterra kernel D(k, theta) = (1 - e^{2ik theta}) / (2i sin theta) for
/// k <= 0, with its analytic limit at theta in pi Z.
cplx volterra_kernel(int k, cplx theta);
/// d/dtheta of volterra_kernel.
cplx volterra_kernel_derivative(int k, cplx theta);

/// Modified Jost function by the exact one-pass recursion. Throws
/// NumericalError (naming the site) if m or f is not finite.
JostData jost_m(const Potential& q, Side sign, const SpectralPoint& theta);

/// m only, without forming f. Safe for complex theta on wide windows where f
/// would overflow; used by the resolvent.
ComplexField modified_jost(const Potential& q, Side sign, cplx theta);

/// Same as jost_m, plus the theta-derivative stored in m_dot.
JostData jost_m_derivative(const Potential& q, Side sign, const SpectralPoint& theta);

/// Residual of m(n) - 1 - sum_{nu} D(n - nu) q(nu) m(nu) evaluated by direct
/// summation, max over the window.
double volterra_residual(const Potential& q, Side sign, cplx theta, const ComplexField& m);

/// g_ell(n, theta) of the Neumann series m = 1 + sum_ell g_ell. ell >= 1.
ComplexField jost_series_term(const Potential& q, Side sign, const SpectralPoint& theta, int ell);
/// g_1 ... g_L in one pass.
std::vector<ComplexField> jost_series_terms(const Potential& q, Side sign, const SpectralPoint& theta, int L);

/// B(n, nu) with m(n, theta) = 1 + sum_{nu >= 1} B(n, nu) e^{-i nu theta}.
/// Rows cover n >= n_first for sign + (n <= n_first for sign -).
struct FourierTable {
    Side sign;
    int n_first = 0;
    int n_last = 0;
    int nu_max = 0;
    /// Number of K_m terms used before the sup norm fell below the cutoff.
    int iterations = 0;
    /// Sup norm of the last K_m retained.
    double last_term_norm = 0.0;
    std::vector<double> data;

    bool has_row(int n) const { return n >= std::min(n_first, n_last) && n <= std::max(n_first, n_last); }
    /// B(n, nu) for 1 <= nu <= nu_max; B(n, 0) = 0; zero for rows outside the table's far side.
    double operator()(int n, int nu) const;
    /// 1 + sum_nu B(n, nu) e^{-i nu theta}.
    cplx resum(int n, double theta) const;
    /// sum_nu |B(n, nu)|.
    double row_l1(int n) const;
};

struct FourierOptions {
    int nu_max = 0;          // 0: 4 * window width
    double cutoff = 1e-14;   // stop when sup |K_m| falls below
    int max_iterations = 200;
    /// First row: n >= n_first for +, n <= n_first for -. Rows further out are cheap;
    /// rows far on the other side suffer cancellation in the K_m sum.
    int n_first = 0;
};

FourierTable fourier_coefficients(const Potential& q, Side sign, const FourierOptions& opts = {});

/// Smallest constants C making the Jost bounds hold over a real theta grid:
///   (1) |m - 1| <= C <n^+->^{-sigma} |sin theta|^{-1} e^{C / |sin theta|}
///   (2) |m - 1| <= C <n^+->^{-(sigma-1)} <sin theta>^{-1} (1 + n^-+)
///   (3) |m_dot| <= C <n^-+>^2  (only for sigma = 2)
/// Points with theta in pi Z are skipped for (1).
struct JostBoundReport {
    Side sign;
    int sigma;
    double c1 = 0.0;
    double c2 = 0.0;
    std::optional<double> c3;
    std::size_t theta_count = 0;
};

JostBoundReport verify_jost_bounds(const Potential& q, Side sign, int sigma, std::span<const double> thetas);

/// Bound constants for a single computed JostData (theta must be real).
JostBoundReport verify_jost_bounds(const JostData& jd, const Potential& q, int sigma);

/// Uniform grid of `count` real angles on [lo, hi].
std::vector<double> theta_grid(double lo, double hi, std::size_t count);

}  // namespace dnls
