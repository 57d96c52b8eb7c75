#include <doctest.h>

#include <cmath>

#include "dnls/spectral.hpp"
#include "dnls/standing_wave.hpp"
#include "oracles.hpp"

using namespace dnls;

namespace {

const LatticeWindow kWindow(-128, 128);

const StandingWaveBranch& branch() {
    static const StandingWaveBranch b = [] {
        const auto q = potentials::exponential(kWindow, -0.5, 1.0);
        const double E0 = ground_state(discrete_spectrum(q)).E0;
        const auto omegas = branch_grid(E0, 1e-4, 0.2, 10);
        return solve_branch(q, omegas);
    }();
    return b;
}

double lp_norm(const ComplexField& u, double p) { return weighted_norm(u, p, 0.0); }

}  // namespace

TEST_CASE("branch residuals and the full-Newton oracle") {
    const auto& b = branch();
    REQUIRE(b.entries.size() == 10);
    const auto q = potentials::exponential(kWindow, -0.5, 1.0);
    for (const auto& e : b.entries) {
        CHECK(e.converged);
        CHECK(e.residual < 1e-10);
        CHECK(standing_wave_residual(q, e.phi, e.omega) < 1e-10);
        Eigen::VectorXd seed(static_cast<Eigen::Index>(kWindow.size()));
        for (std::size_t i = 0; i < kWindow.size(); ++i) seed(static_cast<Eigen::Index>(i)) = e.phi.values()[i].real();
        const Eigen::VectorXd ref = oracle::dense_newton(q, seed, e.omega, 7);
        CHECK((ref - seed).cwiseAbs().maxCoeff() < 1e-9);
        CHECK(inner(e.phi, b.phi0).real() > 0.0);
    }
}

TEST_CASE("bifurcation expansion") {
    const auto& b = branch();
    const auto ex = verify_expansion(b);
    CHECK(ex.rho_monotone);
    CHECK(ex.overlap_positive);
    CHECK(std::abs(ex.a_ratio.front() - 1.0) < 0.01);
    for (double r : ex.rho_over_delta) CHECK(r < 10.0 * ex.rho_over_delta.front());
    CHECK(ex.fitted_power == doctest::Approx(1.0).epsilon(0.05));

    // a^6 / (omega - E0) against ||phi0||_8^{-8} directly.
    const auto& e = b.entries.front();
    const double target = std::pow(lp_norm(b.phi0, 8.0), -8.0);
    CHECK(std::abs(std::pow(e.a, 6) / (e.omega - b.E0) / target - 1.0) < 0.01);
}

TEST_CASE("exponential decay of the profile") {
    const auto fit = fit_exponential_decay(branch().entries[5].phi);
    CHECK(fit.rate > 0.2);
    CHECK(fit.r2 > 0.99);
}

TEST_CASE("omega derivative") {
    const auto& b = branch();
    const double E0 = b.E0;
    const double om = b.entries[5].omega;
    const auto d1 = d_omega_phi(b, om, 1e-4);
    const auto d2 = d_omega_phi(b, om, 5e-5);
    CHECK(weighted_norm(d1 - d2, 2.0, 0.0) < 1e-6 * weighted_norm(d1, 2.0, 0.0));

    const StandingWaveFamily fam(potentials::exponential(kWindow, -0.5, 1.0));
    CHECK(fam.E0() == doctest::Approx(E0).epsilon(1e-12));
    const auto prof = fam.profile(om);
    double dev = 0.0;
    for (std::size_t i = 0; i < kWindow.size(); ++i) {
        dev = std::max(dev, std::abs(prof.dphi(static_cast<Eigen::Index>(i)) - d1.values()[i].real()));
    }
    CHECK(dev < 1e-6 * prof.dphi.cwiseAbs().maxCoeff());
    CHECK(prof.dnorm_sq > 0.0);
    CHECK(prof.dnorm_sq == doctest::Approx(2.0 * prof.phi.dot(prof.dphi)));

    // ||d_omega phi|| (omega - E0)^{5/6} stays bounded above and below near E0.
    double lo = INFINITY, hi = 0.0;
    for (double rel : {1e-4, 1e-3, 1e-2}) {
        const auto p = fam.profile(E0 * (1.0 + rel));
        const double s = p.dphi.norm() * std::pow(E0 * rel, 5.0 / 6.0);
        lo = std::min(lo, s);
        hi = std::max(hi, s);
        CHECK(p.dnorm_sq > 0.0);
    }
    CHECK(hi / lo < 1.5);
    CHECK_THROWS(d_omega_phi(b, E0 * 1.5));
}

TEST_CASE("full-system Newton from a perturbed seed") {
    const auto q = potentials::exponential(kWindow, -0.5, 1.0);
    const auto& e = branch().entries[7];
    ComplexField seed = e.phi;
    for (int n = -3; n <= 3; ++n) seed.at(n) *= 1.01;
    const auto phi = newton_standing_wave(q, seed, e.omega);
    CHECK(weighted_norm(phi - e.phi, INFINITY, 0.0) < 1e-12);
}

TEST_CASE("hypothesis failure") {
    const std::vector<double> om{0.1};
    CHECK_THROWS_AS(solve_branch(potentials::zero(LatticeWindow(-20, 20)), om), HypothesisError);
}
