#include <doctest.h>

#include <cmath>
#include <numbers>

#include "dnls/jost.hpp"
#include "oracles.hpp"

using namespace dnls;
using std::numbers::pi;

namespace {

double sup_diff(const ComplexField& a, const std::vector<cplx>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.values()[i] - b[i]));
    return m;
}

}  // namespace

TEST_CASE("spectral point") {
    const SpectralPoint p(cplx(pi / 2, 0.0));
    CHECK(std::abs(p.z() - 2.0) < 1e-15);
    CHECK_THROWS(SpectralPoint(cplx(0.5, 0.1)));
    const auto q = SpectralPoint::from_z(-1.0);
    CHECK(q.theta().imag() < 0.0);
    CHECK(std::abs(2.0 * (1.0 - std::cos(q.theta())) - cplx(-1.0)) < 1e-14);
    const auto r = SpectralPoint::from_z(cplx(1.0, 0.3));
    CHECK(r.theta().imag() <= 0.0);
    CHECK(std::abs(r.z() - cplx(1.0, 0.3)) < 1e-14);
}

TEST_CASE("free Jost functions") {
    const LatticeWindow w(-20, 20);
    const auto jd = jost_m(potentials::zero(w), Side::plus, SpectralPoint(0.8));
    for (int n = -20; n <= 20; ++n) {
        CHECK(std::abs(jd.m(n) - 1.0) < 1e-15);
        CHECK(std::abs(jd.f(n) - std::exp(-oracle::I * (0.8 * n))) < 1e-14);
    }
    const auto jm = jost_m(potentials::zero(w), Side::minus, SpectralPoint(0.8));
    CHECK(std::abs(jm.f(5) - std::exp(oracle::I * 4.0)) < 1e-14);
    const auto jdd = jost_m_derivative(potentials::zero(w), Side::plus, SpectralPoint(0.8));
    for (int n = -20; n <= 20; ++n) CHECK(std::abs((*jdd.m_dot)(n)) < 1e-15);
}

TEST_CASE("single-site hand recursion at theta = pi/2") {
    const LatticeWindow w(-6, 6);
    const auto q = potentials::single_site(w, -1.0);
    const auto jd = jost_m(q, Side::plus, SpectralPoint(pi / 2));
    CHECK(std::abs(jd.m(1) - 1.0) < 1e-14);
    CHECK(std::abs(jd.m(0) - 1.0) < 1e-14);
    CHECK(std::abs(jd.m(-1) - cplx(1.0, 1.0)) < 1e-14);
    CHECK(std::abs(volterra_kernel(-1, pi / 2) - cplx(0.0, -1.0)) < 1e-15);
}

TEST_CASE("recursion against the transfer-matrix oracle") {
    const LatticeWindow w(-60, 60);
    const auto q = potentials::exponential(w, -0.5, 1.0);
    for (double th : {0.05, 1.0, 2.5, pi - 0.01}) {
        const auto jp = jost_m(q, Side::plus, SpectralPoint(th));
        const auto jm = jost_m(q, Side::minus, SpectralPoint(th));
        CHECK(sup_diff(jp.m, oracle::jost_plus_transfer(q, th)) < 1e-11);
        CHECK(sup_diff(jm.m, oracle::jost_minus_transfer(q, th)) < 1e-11);
    }
    // Complex angle.
    const cplx th(1.2, -0.05);
    const auto jp = jost_m(q, Side::plus, SpectralPoint(th));
    CHECK(sup_diff(jp.m, oracle::jost_plus_transfer(q, th)) < 1e-9);
    CHECK(volterra_residual(q, Side::plus, 1.0, jost_m(q, Side::plus, SpectralPoint(1.0)).m) < 1e-12);
}

TEST_CASE("theta derivative against a centered difference") {
    const LatticeWindow w(-40, 40);
    const auto q = potentials::exponential(w, -0.5, 1.0);
    const double h = 1e-5;
    for (Side s : {Side::plus, Side::minus}) {
        for (double th : {0.4, 1.7, 2.9}) {
            const auto jd = jost_m_derivative(q, s, SpectralPoint(th));
            const auto a = jost_m(q, s, SpectralPoint(th + h)).m;
            const auto b = jost_m(q, s, SpectralPoint(th - h)).m;
            double err = 0.0, scale = 0.0;
            for (int n = -40; n <= 40; ++n) {
                const cplx fd = (a(n) - b(n)) / (2.0 * h);
                err = std::max(err, std::abs(fd - (*jd.m_dot)(n)));
                scale = std::max(scale, std::abs(fd));
            }
            CHECK(err < 1e-6 * scale);
        }
    }
}

TEST_CASE("Neumann series") {
    const LatticeWindow w(-8, 8);
    const auto q = potentials::single_site(w, -1.0);
    const auto g1 = jost_series_term(q, Side::plus, SpectralPoint(pi / 2), 1);
    for (int n = -8; n <= 8; ++n) {
        const cplx expected = n <= 0 ? -volterra_kernel(n, pi / 2) : cplx(0.0);
        CHECK(std::abs(g1(n) - expected) < 1e-14);
    }

    // Small potential: partial sums converge geometrically, and match the direct summation.
    const LatticeWindow w2(-30, 30);
    const auto qs = potentials::exponential(w2, -0.2, 1.0);
    const SpectralPoint sp(1.1);
    const auto m = jost_m(qs, Side::plus, sp).m;
    const auto terms = jost_series_terms(qs, Side::plus, sp, 10);
    std::vector<double> err;
    ComplexField partial = ComplexField::constant(w2, 1.0);
    for (const auto& g : terms) {
        partial += g;
        err.push_back(weighted_norm(partial - m, INFINITY, 0.0));
    }
    for (std::size_t l = 1; l < err.size(); ++l) CHECK((err[l] < 0.6 * err[l - 1] || err[l] < 1e-14));
    CHECK(sup_diff(partial, oracle::volterra_series_plus(qs, 1.1, 10)) < 1e-13);

    // |g_l(n)| <= gamma(n)^l C0^l / l! near theta = 0, with C0 measured at l = 1.
    const SpectralPoint near0(0.02);
    const auto gl = jost_series_terms(qs, Side::plus, near0, 6);
    double C0 = 0.0;
    for (int n = -30; n <= 30; ++n) {
        if (qs.gamma_tail(n) > 0) C0 = std::max(C0, std::abs(gl[0](n)) / qs.gamma_tail(n));
    }
    double fact = 1.0;
    for (int l = 1; l <= 6; ++l) {
        fact *= l;
        for (int n = -30; n <= 30; ++n) {
            const double bound = std::pow(qs.gamma_tail(n) * C0, l) / fact;
            CHECK(std::abs(gl[static_cast<std::size_t>(l - 1)](n)) <= bound * (1.0 + 1e-9) + 1e-300);
        }
    }
}

TEST_CASE("Fourier coefficients") {
    const LatticeWindow w(-40, 40);
    const auto z = fourier_coefficients(potentials::zero(w), Side::plus);
    for (int n = 0; n <= 40; n += 5) CHECK(z.row_l1(n) == 0.0);

    const auto q = potentials::exponential(w, -0.5, 1.0);
    FourierOptions fo;
    fo.nu_max = 256;
    const auto tab = fourier_coefficients(q, Side::plus, fo);
    // B(n, 1) = sum_{l > n} q(l).
    for (int n = 0; n <= 40; n += 4) {
        double s = 0.0;
        for (int l = n + 1; l <= 40; ++l) s += q.q(l);
        CHECK(std::abs(tab(n, 1) - s) < 1e-14);
    }
    double dev = 0.0;
    for (double th : theta_grid(0.05, pi - 0.05, 32)) {
        const auto m = jost_m(q, Side::plus, SpectralPoint(th)).m;
        for (int n = 0; n <= 40; ++n) dev = std::max(dev, std::abs(tab.resum(n, th) - m(n)));
    }
    CHECK(dev < 1e-8);

    const auto tm = fourier_coefficients(q, Side::minus, fo);
    double devm = 0.0;
    for (double th : {0.3, 1.5, 2.8}) {
        const auto m = jost_m(q, Side::minus, SpectralPoint(th)).m;
        for (int n = -40; n <= 0; ++n) devm = std::max(devm, std::abs(tm.resum(n, th) - m(n)));
    }
    CHECK(devm < 1e-8);
}

TEST_CASE("Jost bound constants") {
    const LatticeWindow w(-30, 30);
    const auto grid = theta_grid(0.05, pi - 0.05, 64);
    const auto r0 = verify_jost_bounds(potentials::zero(w), Side::plus, 1, grid);
    CHECK(r0.c1 == 0.0);
    CHECK(r0.c2 == 0.0);

    const auto r1 = verify_jost_bounds(potentials::single_site(w, -1.0), Side::plus, 1, grid);
    CHECK(std::isfinite(r1.c1));
    CHECK(r1.c1 > 0.0);
    const auto r2 = verify_jost_bounds(potentials::single_site(w, -2.0), Side::plus, 1, grid);
    CHECK(r2.c1 >= r1.c1);
    CHECK(r2.c2 >= r1.c2);

    const auto q = potentials::exponential(w, -0.5, 1.0);
    const auto a = verify_jost_bounds(q, Side::plus, 2, grid);
    const auto b = verify_jost_bounds(q.scaled(2.0), Side::plus, 2, grid);
    REQUIRE(a.c3.has_value());
    CHECK(std::isfinite(*a.c3));
    CHECK(b.c1 >= a.c1);
}
