#pragma once

#include <Eigen/Dense>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dnls/lattice.hpp"
#include "dnls/spectral.hpp"

namespace dnls {

/// Standing waves u = e^{i omega t} phi of i u_t = H u - |u|^{p-1} u, i.e. real
/// solutions of H phi - |phi|^{p-1} phi + omega phi = 0 with omega > E0.
struct StandingWaveOptions {
    int power = 7;
    /// Default branch extent: omega in (E0, E0 + eta_fraction * E0].
    double eta_fraction = 0.2;
    int max_iterations = 500;
    double step_tol = 1e-13;
    double damping = 0.5;
    double residual_tol = 1e-10;
    DiscreteSpectrumOptions spectrum;
};

struct BranchEntry {
    double omega = 0.0;
    double a = 0.0;
    ComplexField g{LatticeWindow(-1, 1)};
    ComplexField phi{LatticeWindow(-1, 1)};
    double residual = 0.0;
    int iterations = 0;
    bool converged = false;
    bool damped = false;
    std::string message;
};

struct StandingWaveBranch {
    double E0 = 0.0;
    ComplexField phi0{LatticeWindow(-1, 1)};
    int power = 7;
    std::vector<BranchEntry> entries;
    /// Potential the branch was computed for (needed for re-solves).
    std::shared_ptr<const Potential> q;
    StandingWaveOptions options;
};

/// Bifurcation fixed point: with phi = a phi0 + a^p g, <g, phi0> = 0, s = a^{p-1},
///   s <(phi0 + s g)^p, phi0> = omega - E0,
///   g = R(-E0) P_c [ (E0 - omega) g + (phi0 + s g)^p ].
/// Entries that fail to converge are flagged, not dropped.
StandingWaveBranch solve_branch(const Potential& q, std::span<const double> omegas,
                                const StandingWaveOptions& opts = {});

/// Log-spaced omega grid E0 + E0 * [lo, hi] with `count` points.
std::vector<double> branch_grid(double E0, double lo, double hi, int count);

/// ||H phi - |phi|^{p-1} phi + omega phi||_2 on the potential's window.
double standing_wave_residual(const Potential& q, const ComplexField& phi, double omega, int power = 7);

struct ExpansionReport {
    std::vector<double> delta;  // omega - E0
    std::vector<double> rho;
    std::vector<double> rho_over_delta;
    double fitted_power = 0.0;
    double fitted_coefficient = 0.0;
    bool rho_monotone = false;
    bool overlap_positive = false;
    /// (omega - E0) a^{-(p-1)} ||phi0||_{p+1}^{-(p+1)}, one per entry; tends to 1.
    std::vector<double> a_ratio;
};

/// rho(omega) = || phi (omega - E0)^{-1/(p-1)} ||phi0||_{p+1}^{(p+1)/(p-1)} - phi0 ||_2,
/// fitted as c (omega - E0)^k over the converged entries.
ExpansionReport verify_expansion(const StandingWaveBranch& branch);

struct DecayFit {
    double rate = 0.0;
    double prefactor = 0.0;
    double r2 = 0.0;
    int n_lo = 0;
    int n_hi = 0;
};

/// Least-squares fit of log|phi(n)| = log C - rate |n| over sites with |n| >= n_lo
/// and |phi(n)| above rel_floor * max|phi|.
DecayFit fit_exponential_decay(const ComplexField& phi, int n_lo = 5, double rel_floor = 1e-12);

/// 5-point centered difference of phi in omega with step h = h_rel (omega - E0),
/// from re-solves polished by Newton on the full system.
ComplexField d_omega_phi(const StandingWaveBranch& branch, double omega, double h_rel = 1e-4);

/// Newton on the full system H phi - |phi|^{p-1} phi + omega phi = 0 from a seed.
/// Throws NumericalError after max_iterations.
ComplexField newton_standing_wave(const Potential& q, const ComplexField& seed, double omega, int power = 7,
                                  double tol = 1e-15, int max_iterations = 50);

/// phi_omega and its omega-derivatives on demand, with exact derivatives from
/// L+ phi' = -phi,  L+ phi'' = -2 phi' + p (p-1) phi^{p-2} phi'^2,
/// L+ = H + omega - p phi^{p-1}.
class StandingWaveFamily {
public:
    StandingWaveFamily(const Potential& q, const StandingWaveOptions& opts = {});

    struct Profile {
        double omega = 0.0;
        Eigen::VectorXd phi;
        Eigen::VectorXd dphi;
        Eigen::VectorXd d2phi;
        double norm_sq = 0.0;   // ||phi||^2
        double dnorm_sq = 0.0;  // d/d omega ||phi||^2
    };

    const Potential& potential() const { return q_; }
    const LatticeWindow& window() const { return q_.window(); }
    double E0() const { return E0_; }
    const Eigen::VectorXd& phi0() const { return phi0_; }
    int power() const { return opts_.power; }

    Eigen::VectorXd phi(double omega) const;
    Profile profile(double omega) const;
    ComplexField phi_field(double omega) const;

private:
    Eigen::VectorXd solve(double omega) const;

    Potential q_;
    StandingWaveOptions opts_;
    double E0_ = 0.0;
    Eigen::VectorXd phi0_;
    mutable std::optional<std::pair<double, Eigen::VectorXd>> last_;
};

}  // namespace dnls
