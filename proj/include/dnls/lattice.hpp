#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace dnls {

using cplx = std::complex<double>;

/// Inclusive window [n_min, n_max] of the integer lattice. The origin is
/// always interior.
class LatticeWindow {
public:
    LatticeWindow(int n_min, int n_max);

    /// Window [-half, half].
    static LatticeWindow symmetric(int half) { return {-half, half}; }

    int n_min() const { return n_min_; }
    int n_max() const { return n_max_; }
    std::size_t size() const { return static_cast<std::size_t>(n_max_ - n_min_ + 1); }
    bool contains(int n) const { return n >= n_min_ && n <= n_max_; }
    bool contains(const LatticeWindow& other) const {
        return other.n_min_ >= n_min_ && other.n_max_ <= n_max_;
    }
    std::size_t index(int n) const { return static_cast<std::size_t>(n - n_min_); }
    int site(std::size_t i) const { return n_min_ + static_cast<int>(i); }

    /// Window reflected through the origin, [-n_max, -n_min].
    LatticeWindow reflected() const { return {-n_max_, -n_min_}; }

    friend bool operator==(const LatticeWindow&, const LatticeWindow&) = default;

private:
    int n_min_;
    int n_max_;
};

/// Complex amplitudes on a window; sites outside the window read as zero.
class ComplexField {
public:
    explicit ComplexField(LatticeWindow window);
    ComplexField(LatticeWindow window, std::vector<cplx> values);

    static ComplexField delta(LatticeWindow window, int site, cplx value = 1.0);
    static ComplexField constant(LatticeWindow window, cplx value);
    static ComplexField from_real(LatticeWindow window, std::span<const double> values);

    const LatticeWindow& window() const { return window_; }
    std::size_t size() const { return values_.size(); }

    /// Zero-extended read.
    cplx operator()(int n) const {
        return window_.contains(n) ? values_[window_.index(n)] : cplx{};
    }
    cplx& at(int n);

    std::span<cplx> values() { return values_; }
    std::span<const cplx> values() const { return values_; }
    std::vector<double> real_part() const;

    /// Copy restricted (or zero-extended) to another window.
    ComplexField on(const LatticeWindow& target) const;

    ComplexField& operator+=(const ComplexField& other);
    ComplexField& operator-=(const ComplexField& other);
    ComplexField& operator*=(cplx c);
    friend ComplexField operator+(ComplexField a, const ComplexField& b) { return a += b; }
    friend ComplexField operator-(ComplexField a, const ComplexField& b) { return a -= b; }
    friend ComplexField operator*(cplx c, ComplexField a) { return a *= c; }

private:
    LatticeWindow window_;
    std::vector<cplx> values_;
};

/// Real potential on a window with its tail sums
///   eta(n)        = sum_{m >= n} |q(m)|
///   gamma_tail(n) = sum_{m >= n} (m - n) |q(m)|.
class Potential {
public:
    Potential(LatticeWindow window, std::vector<double> q);

    const LatticeWindow& window() const { return window_; }
    std::span<const double> values() const { return q_; }

    double q(int n) const { return window_.contains(n) ? q_[window_.index(n)] : 0.0; }
    double eta(int n) const;
    double gamma_tail(int n) const;

    /// Smallest/largest site with q != 0; both equal 0 with empty() true for q == 0.
    int support_min() const { return support_min_; }
    int support_max() const { return support_max_; }
    bool empty() const { return empty_; }

    double norm_l1() const;
    /// sum <n>^sigma |q(n)|, i.e. the l^{1,sigma} norm.
    double norm_l1_weighted(double sigma) const;
    double norm_sup() const;

    /// q(-n) on the reflected window. Used to obtain minus-side objects from plus-side code.
    Potential reflected() const;
    /// Same values on a larger window (must contain this one).
    Potential on(const LatticeWindow& target) const;
    Potential scaled(double factor) const;

private:
    LatticeWindow window_;
    std::vector<double> q_;
    std::vector<double> eta_;
    std::vector<double> gamma_;
    int support_min_ = 0;
    int support_max_ = 0;
    bool empty_ = true;
};

namespace potentials {

Potential zero(LatticeWindow window);
/// q = c * delta_site.
Potential single_site(LatticeWindow window, double c, int site = 0);
/// q = c1 * delta_{site1} + c2 * delta_{site2}.
Potential two_site(LatticeWindow window, double c1, double c2, int site1 = 0, int site2 = 1);
/// q(n) = c * exp(-a |n|) for |n| <= radius, zero beyond.
Potential exponential(LatticeWindow window, double c, double a, int radius = 40);
/// Text file, one "n value" record per line; '#' starts a comment.
Potential from_file(const std::string& path, LatticeWindow window);

}  // namespace potentials

/// (Delta u)(n) = u(n+1) + u(n-1) - 2 u(n), zero beyond the window.
ComplexField apply_laplacian(const ComplexField& u);

/// (H u)(n) = -(Delta u)(n) + q(n) u(n). u's window must lie inside q's window.
ComplexField apply_hamiltonian(const Potential& q, const ComplexField& u);

/// <n> = sqrt(1 + n^2).
inline double japanese(double n) { return std::sqrt(1.0 + n * n); }

/// (sum <n>^{p sigma} |u(n)|^p)^{1/p}; p = +inf gives sup <n>^sigma |u(n)|.
double weighted_norm(const ComplexField& u, double p, double sigma);

/// sum conj(u(n)) v(n) over the union of windows.
cplx inner(const ComplexField& u, const ComplexField& v);

}  // namespace dnls
