#include <doctest.h>

#include <cmath>
#include <fstream>
#include <numbers>

#include "dnls/lattice.hpp"
#include "oracles.hpp"

using namespace dnls;

TEST_CASE("window invariants") {
    CHECK_THROWS(LatticeWindow(0, 5));
    CHECK_THROWS(LatticeWindow(-5, 0));
    LatticeWindow w(-3, 4);
    CHECK(w.size() == 8);
    CHECK(w.index(-3) == 0);
    CHECK(w.site(7) == 4);
    CHECK(w.reflected() == LatticeWindow(-4, 3));
}

TEST_CASE("laplacian stencil") {
    const LatticeWindow w(-10, 10);
    const auto v = apply_laplacian(ComplexField::delta(w, 0));
    CHECK(v(0) == cplx(-2.0));
    CHECK(v(1) == cplx(1.0));
    CHECK(v(-1) == cplx(1.0));
    CHECK(v(2) == cplx(0.0));

    const auto c = apply_laplacian(ComplexField::constant(w, 2.5));
    for (int n = -9; n <= 9; ++n) CHECK(std::abs(c(n)) == 0.0);
    // Dirichlet truncation at the ends.
    CHECK(c(-10) == cplx(-2.5));

    const double th = std::numbers::pi / 3;
    ComplexField e(w);
    for (int n = -10; n <= 10; ++n) e.at(n) = std::exp(-oracle::I * (n * th));
    const auto le = apply_laplacian(e);
    for (int n = -9; n <= 9; ++n) CHECK(std::abs(le(n) + e(n)) < 1e-14);
}

TEST_CASE("hamiltonian") {
    const LatticeWindow w(-40, 40);
    const auto h0 = apply_hamiltonian(potentials::zero(w), ComplexField::delta(w, 0));
    CHECK(h0(0) == cplx(2.0));
    CHECK(h0(1) == cplx(-1.0));
    CHECK(h0(-1) == cplx(-1.0));

    // Bound state of the single-site well: sinh kappa = 1/2, energy 2 - sqrt 5.
    const auto q = potentials::single_site(w, -1.0);
    const double kappa = std::asinh(0.5);
    ComplexField u(w);
    for (int n = -40; n <= 40; ++n) u.at(n) = std::exp(-kappa * std::abs(n));
    const auto hu = apply_hamiltonian(q, u);
    const double E = 2.0 - std::sqrt(5.0);
    for (int n = -39; n <= 39; ++n) CHECK(std::abs(hu(n) - E * u(n)) < 1e-12);

    CHECK(weighted_norm(apply_hamiltonian(q, ComplexField(w)), 2.0, 0.0) == 0.0);
}

TEST_CASE("weighted norms") {
    const LatticeWindow w(-5, 5);
    CHECK(weighted_norm(ComplexField::delta(w, 0), 3.0, 1.7) == doctest::Approx(1.0));
    const auto u = ComplexField::delta(w, 1) + ComplexField::delta(w, -1);
    CHECK(weighted_norm(u, 1.0, 1.0) == doctest::Approx(2.0 * std::sqrt(2.0)));
    CHECK(weighted_norm(ComplexField::delta(w, 3), 2.0, 2.0) == doctest::Approx(10.0));
    CHECK(weighted_norm(ComplexField::delta(w, 3), INFINITY, 1.0) == doctest::Approx(std::sqrt(10.0)));
}

TEST_CASE("potential tails") {
    const LatticeWindow w(-20, 20);
    const auto q = potentials::exponential(w, -0.5, 1.0, 10);
    for (int n = -20; n < 20; ++n) {
        CHECK(q.eta(n) >= q.eta(n + 1));
        CHECK(q.gamma_tail(n) >= 0.0);
    }
    CHECK(q.eta(21) == 0.0);
    CHECK(q.q(11) == 0.0);
    CHECK(q.q(-3) == doctest::Approx(-0.5 * std::exp(-3.0)));
    double eta0 = 0.0, gam0 = 0.0;
    for (int m = 0; m <= 20; ++m) {
        eta0 += std::abs(q.q(m));
        gam0 += m * std::abs(q.q(m));
    }
    CHECK(q.eta(0) == doctest::Approx(eta0));
    CHECK(q.gamma_tail(0) == doctest::Approx(gam0));
    CHECK(q.norm_l1_weighted(1.0) > q.norm_l1());
    CHECK(q.norm_l1_weighted(2.0) > q.norm_l1_weighted(1.0));

    const auto t = potentials::two_site(w, 0.7, -0.3, 0, 1);
    CHECK(t.q(0) == 0.7);
    CHECK(t.q(1) == -0.3);
    CHECK(t.support_min() == 0);
    CHECK(t.support_max() == 1);
    CHECK(potentials::zero(w).empty());
}

TEST_CASE("potential file") {
    const std::string path = "test_potential.txt";
    {
        std::ofstream f(path);
        f << "# well\n-1 0.25\n0 -1.5\n\n2 0.125  # tail\n";
    }
    const auto q = potentials::from_file(path, LatticeWindow(-8, 8));
    CHECK(q.q(-1) == 0.25);
    CHECK(q.q(0) == -1.5);
    CHECK(q.q(2) == 0.125);
    CHECK(q.q(1) == 0.0);
    CHECK_THROWS(potentials::from_file("missing_file.txt", LatticeWindow(-8, 8)));
    std::remove(path.c_str());
}
