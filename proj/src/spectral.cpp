#include "dnls/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "dnls/error.hpp"
#include "dnls/scattering.hpp"
#include "dnls/tridiagonal.hpp"

namespace dnls {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr cplx kI{0.0, 1.0};

ResolventKernel build_kernel(const Potential& q, cplx theta, cplx z, int side, const LatticeWindow& block) {
    const auto& w = q.window();
    if (!w.contains(block)) throw std::invalid_argument("resolvent block must lie inside the potential window");
    const ComplexField mp = modified_jost(q, Side::plus, theta);
    const ComplexField mm = modified_jost(q, Side::minus, theta);
    const cplx W = wronskian_from_m(mp, mm, theta, 0);
    const double scale = 1.0 + 2.0 * std::abs(std::sin(theta));
    if (!(std::abs(W) > 1e-12 * scale)) {
        if (side == 0) throw HypothesisError("z is an eigenvalue of H (Wronskian vanishes)");
        throw HypothesisError("Wronskian vanishes at this band point (resonant edge)");
    }
    const int size = static_cast<int>(block.size());
    std::vector<cplx> E(static_cast<std::size_t>(size));
    for (int k = 0; k < size; ++k) E[k] = std::exp(-kI * static_cast<double>(k) * theta);

    ResolventKernel rk{z, theta, side, block, Eigen::MatrixXcd(size, size), 0.0};
    const cplx inv_w = -1.0 / W;
    for (int j = 0; j < size; ++j) {
        const int m = block.site(j);
        const cplx mp_m = mp(m), mm_m = mm(m);
        for (int i = 0; i < size; ++i) {
            const int n = block.site(i);
            rk.K(i, j) = n < m ? inv_w * E[m - n] * mm(n) * mp_m : inv_w * E[n - m] * mp(n) * mm_m;
        }
    }
    double worst = 0.0;
    for (int j = 0; j < size; ++j) {
        for (int i = 1; i + 1 < size; ++i) {
            const int n = block.site(i);
            cplx v = -rk.K(i + 1, j) - rk.K(i - 1, j) + (2.0 + q.q(n) - z) * rk.K(i, j);
            if (i == j) v -= 1.0;
            worst = std::max(worst, std::abs(v));
        }
    }
    rk.residual = worst;
    return rk;
}

std::vector<double> inverse_iteration(const Potential& q, double lambda) {
    const auto& w = q.window();
    const std::size_t n = w.size();
    std::vector<double> sub(n - 1, -1.0), sup(n - 1, -1.0), diag(n);
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = std::sin(1.3 * static_cast<double>(i) + 0.7) + 1.1;
    double shift = lambda;
    for (int attempt = 0; attempt < 4; ++attempt) {
        try {
            for (std::size_t i = 0; i < n; ++i) diag[i] = 2.0 + q.values()[i] - shift;
            for (int it = 0; it < 3; ++it) {
                x = solve_tridiagonal<double>(sub, diag, sup, x);
                double nrm = 0.0;
                for (double v : x) nrm += v * v;
                nrm = std::sqrt(nrm);
                for (double& v : x) v /= nrm;
            }
            std::size_t imax = 0;
            for (std::size_t i = 0; i < n; ++i) {
                if (std::abs(x[i]) > std::abs(x[imax])) imax = i;
            }
            if (x[imax] < 0.0) {
                for (double& v : x) v = -v;
            }
            return x;
        } catch (const NumericalError&) {
            shift += 1e-14 * (1.0 + std::abs(lambda));
        }
    }
    throw NumericalError("inverse iteration failed for eigenvalue " + std::to_string(lambda));
}

double eigen_residual(const Potential& q, double lambda, const std::vector<double>& phi) {
    const std::size_t n = phi.size();
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double left = i > 0 ? phi[i - 1] : 0.0;
        const double right = i + 1 < n ? phi[i + 1] : 0.0;
        const double v = -left - right + (2.0 + q.values()[i] - lambda) * phi[i];
        s += v * v;
    }
    return std::sqrt(s);
}

LatticeWindow central_block(const Potential& q, int radius) {
    const auto& w = q.window();
    return LatticeWindow(std::max(w.n_min(), -radius), std::min(w.n_max(), radius));
}

}  // namespace

ResolventKernel resolvent_kernel(const Potential& q, cplx z, std::optional<LatticeWindow> block) {
    if (z.imag() == 0.0 && z.real() >= 0.0 && z.real() <= 4.0) {
        throw std::invalid_argument("z lies on the continuous spectrum [0, 4]; use boundary_resolvent");
    }
    const SpectralPoint sp = SpectralPoint::from_z(z);
    return build_kernel(q, sp.theta(), z, 0, block.value_or(q.window()));
}

ResolventKernel boundary_resolvent(const Potential& q, double lambda, int side, std::optional<LatticeWindow> block) {
    if (!(lambda >= 0.0 && lambda <= 4.0)) throw std::invalid_argument("boundary resolvent needs lambda in [0, 4]");
    if (side != 1 && side != -1) throw std::invalid_argument("boundary resolvent side must be +1 or -1");
    const double th0 = std::acos(std::clamp(1.0 - lambda / 2.0, -1.0, 1.0));
    const double th = side > 0 ? -th0 : th0;
    return build_kernel(q, cplx{th, 0.0}, cplx{lambda, 0.0}, side, block.value_or(q.window()));
}

ResolventKernel resolvent_kernel_at_angle(const Potential& q, double theta, const LatticeWindow& block) {
    const SpectralPoint sp(cplx{theta, 0.0});
    const int side = theta < 0.0 ? 1 : (theta > 0.0 ? -1 : 0);
    return build_kernel(q, sp.theta(), sp.z(), side, block);
}

SpectralDecomposition discrete_spectrum(const Potential& q, const DiscreteSpectrumOptions& opts) {
    const auto& w = q.window();
    const Eigen::Index n = static_cast<Eigen::Index>(w.size());
    Eigen::VectorXd diag(n), sub(n - 1);
    for (Eigen::Index i = 0; i < n; ++i) diag(i) = 2.0 + q.values()[static_cast<std::size_t>(i)];
    sub.setConstant(-1.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericalError("tridiagonal eigensolver failed");

    SpectralDecomposition d{w};
    d.edge_guard = opts.edge_guard;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double lam = es.eigenvalues()(i);
        if (lam < -opts.edge_guard || lam > 4.0 + opts.edge_guard) d.eigenvalues.push_back(lam);
    }
    for (std::size_t i = 1; i < d.eigenvalues.size(); ++i) {
        if (std::abs(d.eigenvalues[i] - d.eigenvalues[i - 1]) < opts.multiplicity_tol) {
            throw HypothesisError("eigenvalue " + std::to_string(d.eigenvalues[i]) +
                                  " has multiplicity > 1; eigenvalues of H are simple");
        }
    }
    for (double lam : d.eigenvalues) {
        auto phi = inverse_iteration(q, lam);
        d.residuals.push_back(eigen_residual(q, lam, phi));
        d.eigenvectors.push_back(std::move(phi));
    }
    return d;
}

Eigen::MatrixXd contour_projector(const Potential& q, const LatticeWindow& block, int points) {
    if (points < 1) throw std::invalid_argument("contour quadrature needs at least one node");
    const Eigen::Index size = static_cast<Eigen::Index>(block.size());
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(size, size);
    const double h = kPi / points;
    for (int j = 0; j < points; ++j) {
        const double th0 = (j + 0.5) * h;
        const ResolventKernel Rp = resolvent_kernel_at_angle(q, -th0, block);
        const ResolventKernel Rm = resolvent_kernel_at_angle(q, th0, block);
        // d lambda = 2 sin theta d theta
        acc += (Rp.K - Rm.K) * (2.0 * std::sin(th0) * h);
    }
    acc /= (2.0 * kPi * kI);
    return acc.real();
}

SpectralDecomposition spectral_projectors(const Potential& q, const ProjectorOptions& opts) {
    SpectralDecomposition d = discrete_spectrum(q, opts.spectrum);
    const Eigen::Index n = static_cast<Eigen::Index>(q.window().size());
    d.P_d = Eigen::MatrixXd::Zero(n, n);
    for (const auto& phi : d.eigenvectors) {
        const Eigen::Map<const Eigen::VectorXd> v(phi.data(), n);
        d.P_d.noalias() += v * v.transpose();
    }
    d.P_c = Eigen::MatrixXd::Identity(n, n) - d.P_d;
    if (opts.contour_check) {
        const LatticeWindow block = central_block(q, opts.contour_block_radius);
        const Eigen::MatrixXd Pc_contour = contour_projector(q, block, opts.contour_points);
        const Eigen::Index off = static_cast<Eigen::Index>(q.window().index(block.n_min()));
        const Eigen::Index bs = static_cast<Eigen::Index>(block.size());
        const double dev = (Pc_contour - d.P_c.block(off, off, bs, bs)).cwiseAbs().maxCoeff();
        d.contour_deviation = dev;
        d.contour_block_radius = opts.contour_block_radius;
        d.contour_points = opts.contour_points;
        d.contour_tolerance = opts.contour_tolerance;
        d.contour_ok = dev <= opts.contour_tolerance;
    }
    return d;
}

ProjectorDiagnostics projector_diagnostics(const Potential& q, const SpectralDecomposition& d) {
    const Eigen::Index n = static_cast<Eigen::Index>(q.window().size());
    if (d.P_c.rows() != n || d.P_d.rows() != n) throw std::invalid_argument("projectors were not computed on this window");
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        H(i, i) = 2.0 + q.values()[static_cast<std::size_t>(i)];
        if (i + 1 < n) H(i, i + 1) = H(i + 1, i) = -1.0;
    }
    ProjectorDiagnostics diag;
    diag.idempotence = (d.P_c * d.P_c - d.P_c).cwiseAbs().maxCoeff();
    diag.commutator = (d.P_c * H - H * d.P_c).cwiseAbs().maxCoeff();
    diag.completeness = (d.P_c + d.P_d - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff();
    diag.symmetry = (d.P_c - d.P_c.transpose()).cwiseAbs().maxCoeff();
    return diag;
}

GroundState ground_state(const SpectralDecomposition& d) {
    if (d.eigenvalues.size() != 1 || d.eigenvalues.front() >= 0.0) {
        throw HypothesisError("H must have exactly one eigenvalue, and it must be negative; found " +
                              std::to_string(d.eigenvalues.size()));
    }
    GroundState g{-d.eigenvalues.front(), d.eigenvectors.front()};
    for (double v : g.phi0) {
        if (v < -1e-12) throw HypothesisError("ground state is not of one sign");
    }
    return g;
}

Eigenbasis full_eigenbasis(const Potential& q, double edge_guard) {
    const auto& w = q.window();
    const Eigen::Index n = static_cast<Eigen::Index>(w.size());
    Eigen::VectorXd diag(n), sub(n - 1);
    for (Eigen::Index i = 0; i < n; ++i) diag(i) = 2.0 + q.values()[static_cast<std::size_t>(i)];
    sub.setConstant(-1.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    if (es.info() != Eigen::Success) throw NumericalError("tridiagonal eigensolver failed");
    Eigenbasis b{w, es.eigenvalues(), es.eigenvectors(), {}};
    b.continuous.resize(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        const double lam = b.lambda(i);
        b.continuous[static_cast<std::size_t>(i)] = lam >= -edge_guard && lam <= 4.0 + edge_guard;
    }
    return b;
}

double top_singular_value(const Eigen::MatrixXcd& A, int max_iterations, double tol) {
    if (A.size() == 0) return 0.0;
    Eigen::VectorXcd v(A.cols());
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = cplx{1.0 + 0.01 * std::sin(0.37 * i), 0.003 * std::cos(1.1 * i)};
    v.normalize();
    double sigma = 0.0;
    for (int it = 0; it < max_iterations; ++it) {
        const Eigen::VectorXcd Av = A * v;
        const double s_new = Av.norm();
        Eigen::VectorXcd u = A.adjoint() * Av;
        const double un = u.norm();
        if (un == 0.0) return 0.0;
        v = u / un;
        if (std::abs(s_new - sigma) <= tol * s_new) {
            sigma = s_new;
            break;
        }
        sigma = s_new;
    }
    return sigma;
}

LimitingAbsorptionReport limiting_absorption_constant(const Potential& q, double tau,
                                                      const LimitingAbsorptionOptions& opts) {
    if (!(tau > 1.0)) throw std::invalid_argument("limiting absorption weight needs tau > 1");
    if (opts.grid_size < 1) throw std::invalid_argument("limiting absorption grid is empty");
    LimitingAbsorptionReport rep;
    rep.tau = tau;
    rep.grid_size = opts.grid_size;
    rep.block_radius = opts.block_radius;
    const GenericityReport gen = classify_genericity(q);
    rep.generic = gen.is_generic;
    if (!gen.is_generic) {
        rep.warning = "resonant operator: constant computed on the interior grid only and grows toward the edges";
    }
    const SpectralDecomposition d = discrete_spectrum(q);
    const LatticeWindow block = central_block(q, opts.block_radius);
    const Eigen::Index bs = static_cast<Eigen::Index>(block.size());
    Eigen::VectorXd weight(bs);
    for (Eigen::Index i = 0; i < bs; ++i) weight(i) = std::pow(japanese(block.site(static_cast<std::size_t>(i))), -tau);
    std::vector<Eigen::VectorXd> phis;
    for (const auto& phi : d.eigenvectors) {
        Eigen::VectorXd v(bs);
        for (Eigen::Index i = 0; i < bs; ++i) v(i) = phi[q.window().index(block.site(static_cast<std::size_t>(i)))];
        phis.push_back(v);
    }
    for (int j = 0; j < opts.grid_size; ++j) {
        const double th0 = (j + 0.5) * kPi / opts.grid_size;
        const double lambda = 2.0 - 2.0 * std::cos(th0);
        rep.lambdas.push_back(lambda);
        for (int side : {1, -1}) {
            ResolventKernel rk = resolvent_kernel_at_angle(q, side > 0 ? -th0 : th0, block);
            // R P_c = R - sum_j phi_j phi_j^T / (lambda_j - lambda)
            for (std::size_t k = 0; k < phis.size(); ++k) {
                rk.K -= (phis[k] * phis[k].transpose()).cast<cplx>() / (d.eigenvalues[k] - lambda);
            }
            const Eigen::MatrixXcd A = weight.asDiagonal() * rk.K * weight.asDiagonal();
            const double s = top_singular_value(A, opts.max_power_iterations, opts.power_tol);
            (side > 0 ? rep.norms_plus : rep.norms_minus).push_back(s);
            if (s > rep.constant) {
                rep.constant = s;
                rep.lambda_at_max = lambda;
                rep.side_at_max = side;
            }
        }
    }
    return rep;
}

}  // namespace dnls
