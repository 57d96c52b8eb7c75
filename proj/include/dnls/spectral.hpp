#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "dnls/error.hpp"
#include "dnls/jost.hpp"
#include "dnls/lattice.hpp"

namespace dnls {

/// Resolvent kernel K(n, m) over a block of sites. side is 0 for z off the
/// band, +1 / -1 for the boundary values lambda +- i0.
struct ResolventKernel {
    cplx z;
    cplx theta;
    int side = 0;
    LatticeWindow block;
    Eigen::MatrixXcd K;
    /// max |((H - z) K - I)(n, m)| over interior rows n of the block.
    double residual = 0.0;

    cplx operator()(int n, int m) const { return K(block.index(n), block.index(m)); }
};

/// Kernel of (H - z)^{-1} for the operator on Z built from the two Jost
/// branches:
///   K(n, m) = -f-(n) f+(m) / [f+, f-]  for n < m, and symmetrically for n >= m.
/// The block defaults to the potential's window.
ResolventKernel resolvent_kernel(const Potential& q, cplx z, std::optional<LatticeWindow> block = std::nullopt);

/// Boundary value R^{+-}(lambda) = lim R(lambda +- i eps) for lambda in [0, 4],
/// evaluated with real-angle Jost functions at theta = -+ arccos(1 - lambda/2).
ResolventKernel boundary_resolvent(const Potential& q, double lambda, int side,
                                   std::optional<LatticeWindow> block = std::nullopt);

/// Kernel at a real angle theta directly (side follows from the sign of theta).
ResolventKernel resolvent_kernel_at_angle(const Potential& q, double theta, const LatticeWindow& block);

struct SpectralDecomposition {
    LatticeWindow window;
    /// Eigenvalues outside [-edge_guard, 4 + edge_guard]'s complement, i.e. the discrete spectrum.
    std::vector<double> eigenvalues;
    /// l2-normalized real eigenvectors on the window, largest entry positive.
    std::vector<std::vector<double>> eigenvectors;
    std::vector<double> residuals;
    double edge_guard = 1e-6;

    /// Filled by spectral_projectors.
    Eigen::MatrixXd P_d;
    Eigen::MatrixXd P_c;
    /// Contour-formula check of P_c on a central block.
    std::optional<double> contour_deviation;
    int contour_block_radius = 0;
    int contour_points = 0;
    double contour_tolerance = 0.0;
    bool contour_ok = true;
};

struct DiscreteSpectrumOptions {
    double edge_guard = 1e-6;
    /// Eigenvalues closer than this are treated as a multiple eigenvalue.
    double multiplicity_tol = 1e-9;
};

/// Discrete eigenvalues of H on the window (real symmetric tridiagonal solve)
/// with eigenvectors by inverse iteration. Throws HypothesisError on a
/// multiple eigenvalue.
SpectralDecomposition discrete_spectrum(const Potential& q, const DiscreteSpectrumOptions& opts = {});

struct ProjectorOptions {
    DiscreteSpectrumOptions spectrum;
    /// Contour check on sites |n| <= radius with `points` midpoint nodes in theta on (0, pi).
    bool contour_check = true;
    int contour_block_radius = 64;
    int contour_points = 512;
    double contour_tolerance = 1e-6;
};

/// P_d = sum phi phi^T, P_c = I - P_d, plus the independent contour check
///   P_c = (2 pi i)^{-1} int_0^4 (R^+ - R^-)(lambda) d lambda.
SpectralDecomposition spectral_projectors(const Potential& q, const ProjectorOptions& opts = {});

/// Max-abs defects of the projector identities on the window.
struct ProjectorDiagnostics {
    double idempotence = 0.0;    // |P_c^2 - P_c|
    double commutator = 0.0;     // |P_c H - H P_c|
    double completeness = 0.0;   // |P_c + P_d - I|
    double symmetry = 0.0;       // |P_c - P_c^T|
};
ProjectorDiagnostics projector_diagnostics(const Potential& q, const SpectralDecomposition& d);

/// P_c on a block from the contour formula with `points` midpoint nodes.
Eigen::MatrixXd contour_projector(const Potential& q, const LatticeWindow& block, int points);

/// The single negative eigenvalue -E0 and its positive eigenvector required
/// by the nonlinear modules. Throws HypothesisError otherwise.
struct GroundState {
    double E0;
    std::vector<double> phi0;
};
GroundState ground_state(const SpectralDecomposition& d);

/// Full eigendecomposition of the truncated H (used for exact linear flows).
struct Eigenbasis {
    LatticeWindow window;
    Eigen::VectorXd lambda;
    Eigen::MatrixXd V;  // columns are eigenvectors
    /// true for eigenvalues inside the continuous-spectrum band (used to project onto P_c).
    std::vector<bool> continuous;
};
Eigenbasis full_eigenbasis(const Potential& q, double edge_guard = 1e-6);

struct LimitingAbsorptionReport {
    double tau = 0.0;
    double constant = 0.0;
    double lambda_at_max = 0.0;
    int side_at_max = 0;
    int grid_size = 0;
    int block_radius = 0;
    bool generic = true;
    std::string warning;
    std::vector<double> lambdas;
    std::vector<double> norms_plus;
    std::vector<double> norms_minus;
};

struct LimitingAbsorptionOptions {
    int grid_size = 64;
    int block_radius = 128;
    int max_power_iterations = 2000;
    double power_tol = 1e-10;
};

/// sup over a lambda grid of || <n>^{-tau} R^{+-}(lambda) P_c <m>^{-tau} ||_{l2 -> l2}.
/// The grid is the midpoint grid in theta on (0, pi), so it stays off the band edges.
LimitingAbsorptionReport limiting_absorption_constant(const Potential& q, double tau,
                                                      const LimitingAbsorptionOptions& opts = {});

/// Largest singular value of a dense complex matrix by power iteration on A^* A.
double top_singular_value(const Eigen::MatrixXcd& A, int max_iterations = 2000, double tol = 1e-10);

}  // namespace dnls
