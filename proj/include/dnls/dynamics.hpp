#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "dnls/error.hpp"
#include "dnls/lattice.hpp"
#include "dnls/propagator.hpp"
#include "dnls/standing_wave.hpp"
#include "dnls/trajectory.hpp"

namespace dnls {

/// Evolution convention: i u_t = H u - |u|^{p-1} u on the potential's window
/// with Dirichlet ends. Standing waves then rotate as e^{+i omega t} phi_omega,
/// matching u = e^{i Theta} (phi_omega + r) with Theta = int omega + gamma.

/// Decomposition failure: the state left the neighbourhood of the standing-wave family.
class TubeExit : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// One Strang step: half nonlinear/potential phase, full free flow e^{i dt Delta}
/// with the exact lattice kernel, half phase.
class SplitStepper {
public:
    SplitStepper(const Potential& q, double dt, int power = 7, bool nonlinear = true, double free_cutoff = 1e-17);

    double dt() const { return dt_; }
    void step(ComplexField& u) const;

private:
    void phase(ComplexField& u, double tau) const;

    Potential q_;
    double dt_;
    int power_;
    bool nonlinear_;
    FreeFlow free_;
};

struct EvolveOptions {
    double dt = 1.0 / 32.0;
    int power = 7;
    bool nonlinear = true;
    /// Spacing of stored states; 0 stores every step.
    double output_stride = 1.0;
    /// Allowed | ||u(t)|| - ||u(0)|| | per unit time.
    double norm_tol = 1e-8;
};

/// Strang splitting from u0 (zero-extended onto the potential's window) up to
/// t_final. Throws NumericalError on a norm breach or a non-finite state.
Trajectory evolve(const Potential& q, const ComplexField& u0, double t_final, const EvolveOptions& opts = {});

struct ModulationState {
    double omega = 0.0;
    double gamma = 0.0;
    double Theta = 0.0;
    ComplexField r{LatticeWindow(-1, 1)};
    /// <Re r, phi> and <Im r, d_omega phi>.
    double constraint_re = 0.0;
    double constraint_im = 0.0;
    int iterations = 0;
    /// Set when restarts were run: all seeds converged to this point.
    std::optional<bool> unique;
};

struct DecomposeOptions {
    int max_iterations = 50;
    /// Seeds must satisfy ||u - e^{i Theta} phi|| <= tube_fraction ||phi||.
    double tube_fraction = 0.1;
    /// Relative step for the finite-difference Jacobian in omega.
    double fd_step = 1e-6;
    int restarts = 3;
    bool check_uniqueness = true;
};

/// u = e^{i Theta} (phi_omega + r) with <Re r, phi_omega> = <Im r, d_omega phi_omega> = 0,
/// by Newton in (omega, Theta). gamma is set to Theta (no elapsed time).
ModulationState modulation_decompose(const StandingWaveFamily& family, const ComplexField& u, double omega_guess,
                                     double Theta_guess, const DecomposeOptions& opts = {});

struct ModulationRates {
    double omega_dot = 0.0;
    double gamma_dot = 0.0;
    double det = 0.0;
};

/// N(r) = |phi + r|^{p-1}(phi + r) - phi^p - ((p+1)/2) phi^{p-1} r - ((p-1)/2) phi^{p-1} conj(r)
/// on the family window.
std::vector<cplx> modulation_remainder(const Eigen::VectorXd& phi, const ComplexField& r,
                                       const LatticeWindow& window, int power);

/// Solves
///   [ dM/2 - <a, phi'>    -<b, phi>          ] [omega_dot]   [ -<Im N, phi>  ]
///   [ <b, phi''>          -(dM/2 + <a, phi'>)] [gamma_dot] = [ -<Re N, phi'> ]
/// with r = a + i b and dM = d_omega ||phi||^2, which keeps both constraints
/// constant along the flow. Throws NumericalError if the matrix is singular.
ModulationRates modulation_rhs(const StandingWaveFamily& family, const ModulationState& state);

struct ScatteringStateOptions {
    int samples = 8;
    double spacing = 10.0;
};

struct ScatteringStateReport {
    std::vector<double> times;
    /// || v_{k+1} - v_k || for v_k = e^{i t_k H} P_c w(t_k).
    std::vector<double> cauchy_diffs;
    bool cauchy_ok = false;
    ComplexField w_plus{LatticeWindow(-1, 1)};
    /// u_plus for the matched comparison flow e^{sigma i t Delta}.
    ComplexField u_plus{LatticeWindow(-1, 1)};
    int matched_sign = 1;
    /// || w(t_k) - e^{sigma i t_k Delta} u_plus^sigma || for sigma = +1 and -1.
    std::vector<double> residual_plus;
    std::vector<double> residual_minus;
    std::string warning;
};

/// Scattering data of the dispersive part w(t) = e^{i Theta} r(t) from snapshots
/// at the last output times.
ScatteringStateReport extract_scattering_state(const LinearFlow& flow, const std::vector<double>& times,
                                               const std::vector<ComplexField>& w,
                                               const ScatteringStateOptions& opts = {});

struct StabilityOptions {
    /// Strang's O(dt^2) defect on the standing wave shows up as a persistent
    /// localized r; 1/128 keeps it well below the modulation signal at eps ~ 1e-3.
    double dt = 1.0 / 128.0;
    double output_stride = 0.5;
    /// Store full states every snapshot_stride time units (0: none).
    double snapshot_stride = 0.0;
    double sigma = 2.0;
    double norm_tol = 1e-8;
    DecomposeOptions decompose;
    bool extract_scattering = true;
    ScatteringStateOptions scattering;
};

struct StabilityReport {
    double omega0 = 0.0;
    double epsilon = 0.0;
    double t_final = 0.0;
    double dt = 0.0;
    double sigma = 2.0;

    std::vector<double> times;
    std::vector<double> omega;
    std::vector<double> gamma;
    std::vector<double> Theta;
    std::vector<double> omega_dot;
    std::vector<double> gamma_dot;
    std::vector<double> r_l2;
    std::vector<double> r_weighted;
    std::vector<double> r_sup;
    std::vector<double> norm;
    /// int_0^t |omega_dot| + |gamma_dot| at each output time.
    std::vector<double> modulation_l1_cumulative;

    double modulation_l1 = 0.0;
    double modulation_linf = 0.0;
    double omega_dot_l1 = 0.0;
    double gamma_dot_l1 = 0.0;
    double sup_omega_deviation = 0.0;  // sup |omega(t) - omega0|
    double max_constraint_ratio = 0.0; // max |constraint| / ||r||
    double max_norm_drift = 0.0;
    double omega_plus = 0.0;
    double omega_plus_spread = 0.0;
    std::vector<StrichartzResult> strichartz;
    std::optional<bool> decomposition_unique;

    bool tube_exit = false;
    double exit_time = 0.0;
    std::string message;

    std::optional<ScatteringStateReport> scattering;

    std::vector<double> snapshot_times;
    std::vector<ComplexField> snapshots;
};

/// Evolves u0 = phi_{omega0} + perturbation, decomposes after every step
/// (continuation from the previous step) and records the modulation curves.
/// The family window must lie inside the potential's window.
StabilityReport stability_run(const Potential& q, const StandingWaveFamily& family, double omega0,
                              const ComplexField& perturbation, double t_final, const StabilityOptions& opts = {});

/// Real Gaussian exp(-n^2 / (2 width^2)) scaled to l2 norm epsilon.
ComplexField gaussian_perturbation(const LatticeWindow& window, double epsilon, double width = 3.0, int center = 0);

/// Mean of the values at times >= t_final * (1 - fraction), with max - min.
std::pair<double, double> tail_average(const std::vector<double>& times, const std::vector<double>& values,
                                       double fraction = 0.25);

}  // namespace dnls
