#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dnls/lattice.hpp"
#include "dnls/spectral.hpp"
#include "dnls/trajectory.hpp"

namespace dnls {

/// J_0(x) ... J_kmax(x) by Miller's backward recurrence, normalized with
/// J_0 + 2 sum_k J_{2k} = 1.
std::vector<double> bessel_j_sequence(int kmax, double x);

/// Sign convention s of e^{s i t H}: -1 is the canonical evolution e^{-itH}.
enum class TimeSign { backward = 1, forward = -1 };

/// Kernel of e^{s i t (-Delta)} on Z between sites n and n + k:
///   (2 pi)^{-1} int e^{s i t (2 - 2 cos theta) + i k theta} d theta
///   = e^{2 s i t} (-s i)^{|k|} J_{|k|}(2t).
cplx free_propagator(double t, int k, TimeSign sign = TimeSign::forward);

/// e^{s i t (-Delta)} applied by banded convolution with the exact kernel
/// truncated where |J_k(2t)| < cutoff.
class FreeFlow {
public:
    FreeFlow(double t, TimeSign sign = TimeSign::forward, double cutoff = 1e-17);

    int band() const { return static_cast<int>(kernel_.size()) - 1; }
    double time() const { return t_; }
    cplx kernel(int k) const;

    /// Flow of the Dirichlet Laplacian on u's window (zero at n_min - 1 and
    /// n_max + 1), by the odd-periodic image sum of the lattice kernel.
    ComplexField apply_dirichlet(const ComplexField& u) const;
    /// Flow on Z of the zero extension of u; the result lives on u's window
    /// widened by the band on both sides.
    ComplexField apply_infinite(const ComplexField& u) const;

private:
    double t_;
    TimeSign sign_;
    std::vector<cplx> kernel_;  // k = 0..band
};

struct PropagatorKernel {
    double t = 0.0;
    TimeSign sign = TimeSign::forward;
    LatticeWindow block;
    Eigen::MatrixXcd K;
    int quadrature_points = 0;
    /// max |K_M - K_{2M}| on the check block when requested.
    std::optional<double> convergence_change;

    cplx operator()(int n, int m) const { return K(block.index(n), block.index(m)); }
};

struct PropagatorOptions {
    TimeSign sign = TimeSign::forward;
    /// Sites of the kernel; default: the potential's window.
    std::optional<LatticeWindow> block;
    /// 0: automatic size, max(1024, 16 |t|, 2R + 2|t| + 10 |t|^{1/3} + 256), R = max |site|.
    int quadrature_points = 0;
    /// Recompute a central block with twice the nodes and record the change.
    bool convergence_check = false;
    int convergence_block_radius = 32;
    double convergence_tol = 1e-9;
    /// Below this |sin theta| the transmission coefficient uses the tan(theta/2) split.
    double edge_rewrite_sin = 0.3;
};

/// Quadrature size used for a given time and site radius.
int propagator_quadrature_points(double t, int radius);

/// P_c e^{s i t H}(n, nu) = (2 pi)^{-1} int_{-pi}^{pi} e^{s i t (2 - 2 cos theta)}
///   f-(n, theta) f+(nu, theta) T(theta) d theta   for n <= nu,
/// symmetric in (n, nu); trapezoid rule on a half-offset periodic grid.
PropagatorKernel continuous_propagator(const Potential& q, double t, const PropagatorOptions& opts = {});

struct DecayScan {
    std::vector<double> times;
    std::vector<double> sup_kernel;
    std::vector<double> weighted;  // sup * <t>^{1/3}
    double C_measured = 0.0;
    /// Least-squares slope of log sup vs log t over fit_range.
    std::optional<double> slope;
    double fit_lo = 10.0;
    double fit_hi = 0.0;
    bool free_kernel = false;
    LatticeWindow block{-1, 1};
};

struct DecayScanOptions {
    TimeSign sign = TimeSign::backward;  // e^{+itH}
    std::optional<LatticeWindow> block;
    double fit_lo = 10.0;
    /// Upper end of the fit; 0 means the last time.
    double fit_hi = 0.0;
};

DecayScan decay_scan(const Potential& q, std::span<const double> t_grid, const DecayScanOptions& opts = {});

/// log-log least-squares slope over times in [lo, hi].
std::optional<double> loglog_slope(std::span<const double> t, std::span<const double> v, double lo, double hi);

/// Checks 2/r + 1/p = 1/2 with r in [4, inf], p in [2, inf] (infinity allowed).
bool is_admissible(double r, double p);

struct StrichartzResult {
    double value = 0.0;
    double r = 0.0;
    double p = 0.0;
    double outer_exponent = 0.0;  // 3r/2
    int intervals = 0;
    double sample_spacing = 0.0;
    /// Max over each unit interval of the spatial l^p norm.
    std::vector<double> interval_max;
};

/// l^{3r/2}(Z, L^inf_t([j, j+1], l^p)) of a sampled trajectory; L^inf in time
/// is approximated by the max over samples in each unit interval.
StrichartzResult strichartz_norm(std::span<const double> times, std::span<const ComplexField> states, double r,
                                 double p);
StrichartzResult strichartz_norm(const Trajectory& traj, double r, double p);

/// Streaming form of strichartz_norm for runs too long to store: feed samples
/// in time order on [t0, t1].
class StrichartzAccumulator {
public:
    StrichartzAccumulator(double r, double p, double t0, double t1);
    void add(double t, const ComplexField& u);
    StrichartzResult result() const;

private:
    double r_;
    double p_;
    double t0_;
    int count_;
    double last_t_;
    double spacing_ = 0.0;
    std::vector<double> max_;
};

/// Exact linear flow e^{s i t H} P_c on the truncated window, via the full
/// eigendecomposition. Banded single-step operators are cut where entries fall
/// below the cutoff.
class LinearFlow {
public:
    explicit LinearFlow(const Potential& q, double edge_guard = 1e-6);
    explicit LinearFlow(Eigenbasis basis);

    const Eigenbasis& basis() const { return basis_; }
    /// e^{s i t H} P_c u (or without P_c when project is false).
    ComplexField apply(const ComplexField& u, double t, TimeSign sign = TimeSign::forward, bool project = true) const;
    /// P_c u.
    ComplexField project(const ComplexField& u) const;
    /// Dense block of e^{s i t H} P_c.
    Eigen::MatrixXcd kernel(double t, TimeSign sign, const LatticeWindow& block) const;

    /// Banded e^{s i dt H} (no projection) for repeated stepping.
    struct Step {
        int band = 0;
        std::vector<cplx> data;  // row-major, (2 band + 1) per row
        std::size_t n = 0;
        ComplexField apply(const ComplexField& u) const;
    };
    Step step(double dt, TimeSign sign = TimeSign::forward, double cutoff = 1e-16) const;

private:
    Eigenbasis basis_;
};

struct SmoothingReport {
    double tau = 0.0;
    double T_max = 0.0;
    double dt = 0.0;
    double f_norm = 0.0;
    /// (i) || e^{-itH} P_c f ||_{l^{2,-tau} L^2_t[0,T]}
    double norm_i = 0.0;
    double ratio_i = 0.0;
    double C_tau = 0.0;
    double predicted_bound = 0.0;  // 2 sqrt(pi C(tau))
    /// source norm || g ||_{l^{2,tau} L^2_t}
    double g_norm = 0.0;
    /// (ii) retarded integral in l^{2,-tau} L^2_t
    double norm_ii = 0.0;
    double ratio_ii = 0.0;
    /// (iii) retarded integral in L^inf_t l^2 and l^6(Z, L^inf_t l^inf)
    double norm_iii_sup_l2 = 0.0;
    double norm_iii_strichartz = 0.0;
    double ratio_iii = 0.0;
};

struct SmoothingOptions {
    double dt = 1.0 / 32.0;
    /// Source g(s, n) = exp(-decay s) h(n); h defaults to f.
    double source_decay = 1.0;
    std::optional<ComplexField> source_profile;
    /// Measured limiting absorption constant; computed when absent.
    std::optional<double> C_tau;
    LimitingAbsorptionOptions lap;
};

SmoothingReport smoothing_norms(const Potential& q, const ComplexField& f, double tau, double T_max,
                                const SmoothingOptions& opts = {});

}  // namespace dnls
