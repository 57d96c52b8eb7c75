#include "dnls/lattice.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace dnls {

LatticeWindow::LatticeWindow(int n_min, int n_max) : n_min_(n_min), n_max_(n_max) {
    if (!(n_min < 0 && n_max > 0)) {
        throw std::invalid_argument("lattice window must contain the origin in its interior: [" +
                                    std::to_string(n_min) + ", " + std::to_string(n_max) + "]");
    }
}

ComplexField::ComplexField(LatticeWindow window) : window_(window), values_(window.size()) {}

ComplexField::ComplexField(LatticeWindow window, std::vector<cplx> values)
    : window_(window), values_(std::move(values)) {
    if (values_.size() != window_.size()) {
        throw std::invalid_argument("field length does not match its window");
    }
}

ComplexField ComplexField::delta(LatticeWindow window, int site, cplx value) {
    ComplexField u(window);
    u.at(site) = value;
    return u;
}

ComplexField ComplexField::constant(LatticeWindow window, cplx value) {
    return ComplexField(window, std::vector<cplx>(window.size(), value));
}

ComplexField ComplexField::from_real(LatticeWindow window, std::span<const double> values) {
    if (values.size() != window.size()) {
        throw std::invalid_argument("field length does not match its window");
    }
    return ComplexField(window, std::vector<cplx>(values.begin(), values.end()));
}

cplx& ComplexField::at(int n) {
    if (!window_.contains(n)) {
        throw std::out_of_range("site " + std::to_string(n) + " outside field window");
    }
    return values_[window_.index(n)];
}

std::vector<double> ComplexField::real_part() const {
    std::vector<double> out(values_.size());
    std::transform(values_.begin(), values_.end(), out.begin(), [](cplx c) { return c.real(); });
    return out;
}

ComplexField ComplexField::on(const LatticeWindow& target) const {
    ComplexField out(target);
    for (int n = target.n_min(); n <= target.n_max(); ++n) out.values_[target.index(n)] = (*this)(n);
    return out;
}

ComplexField& ComplexField::operator+=(const ComplexField& other) {
    if (!(other.window_ == window_)) throw std::invalid_argument("window mismatch in field sum");
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
    return *this;
}

ComplexField& ComplexField::operator-=(const ComplexField& other) {
    if (!(other.window_ == window_)) throw std::invalid_argument("window mismatch in field difference");
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
    return *this;
}

ComplexField& ComplexField::operator*=(cplx c) {
    for (auto& v : values_) v *= c;
    return *this;
}

Potential::Potential(LatticeWindow window, std::vector<double> q)
    : window_(window), q_(std::move(q)) {
    if (q_.size() != window_.size()) throw std::invalid_argument("potential length does not match its window");
    for (double v : q_) {
        if (!std::isfinite(v)) throw std::invalid_argument("potential has non-finite entries");
    }
    const std::size_t n = q_.size();
    // One extra slot so that eta(n_max + 1) = gamma(n_max + 1) = 0.
    eta_.assign(n + 1, 0.0);
    gamma_.assign(n + 1, 0.0);
    for (std::size_t i = n; i-- > 0;) {
        eta_[i] = eta_[i + 1] + std::abs(q_[i]);
        // gamma(n) = gamma(n+1) + eta(n+1)
        gamma_[i] = gamma_[i + 1] + eta_[i + 1];
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (q_[i] != 0.0) {
            if (empty_) support_min_ = window_.site(i);
            support_max_ = window_.site(i);
            empty_ = false;
        }
    }
}

double Potential::eta(int n) const {
    if (n > window_.n_max()) return 0.0;
    if (n < window_.n_min()) return eta_[0];
    return eta_[window_.index(n)];
}

double Potential::gamma_tail(int n) const {
    if (n > window_.n_max()) return 0.0;
    if (n < window_.n_min()) return gamma_[0] + static_cast<double>(window_.n_min() - n) * eta_[0];
    return gamma_[window_.index(n)];
}

double Potential::norm_l1() const { return eta_[0]; }

double Potential::norm_l1_weighted(double sigma) const {
    double s = 0.0;
    for (std::size_t i = 0; i < q_.size(); ++i) s += std::pow(japanese(window_.site(i)), sigma) * std::abs(q_[i]);
    return s;
}

double Potential::norm_sup() const {
    double s = 0.0;
    for (double v : q_) s = std::max(s, std::abs(v));
    return s;
}

Potential Potential::reflected() const {
    std::vector<double> r(q_.rbegin(), q_.rend());
    return Potential(window_.reflected(), std::move(r));
}

Potential Potential::on(const LatticeWindow& target) const {
    if (!target.contains(window_)) throw std::invalid_argument("target window must contain the potential window");
    std::vector<double> r(target.size(), 0.0);
    for (int n = window_.n_min(); n <= window_.n_max(); ++n) r[target.index(n)] = q(n);
    return Potential(target, std::move(r));
}

Potential Potential::scaled(double factor) const {
    std::vector<double> r(q_);
    for (double& v : r) v *= factor;
    return Potential(window_, std::move(r));
}

namespace potentials {

Potential zero(LatticeWindow window) { return Potential(window, std::vector<double>(window.size(), 0.0)); }

Potential single_site(LatticeWindow window, double c, int site) {
    std::vector<double> q(window.size(), 0.0);
    if (!window.contains(site)) throw std::invalid_argument("potential site outside window");
    q[window.index(site)] = c;
    return Potential(window, std::move(q));
}

Potential two_site(LatticeWindow window, double c1, double c2, int site1, int site2) {
    if (site1 == site2) throw std::invalid_argument("two-site potential needs distinct sites");
    std::vector<double> q(window.size(), 0.0);
    if (!window.contains(site1) || !window.contains(site2)) throw std::invalid_argument("potential site outside window");
    q[window.index(site1)] = c1;
    q[window.index(site2)] = c2;
    return Potential(window, std::move(q));
}

Potential exponential(LatticeWindow window, double c, double a, int radius) {
    if (a <= 0.0) throw std::invalid_argument("exponential potential needs a > 0");
    if (radius < 0) throw std::invalid_argument("exponential potential needs radius >= 0");
    std::vector<double> q(window.size(), 0.0);
    for (int n = std::max(window.n_min(), -radius); n <= std::min(window.n_max(), radius); ++n) {
        q[window.index(n)] = c * std::exp(-a * std::abs(n));
    }
    return Potential(window, std::move(q));
}

Potential from_file(const std::string& path, LatticeWindow window) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open potential file '" + path + "'");
    std::vector<double> q(window.size(), 0.0);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
        std::istringstream ss(line);
        long n = 0;
        double v = 0.0;
        if (!(ss >> n)) {
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected 'n value'");
        }
        if (!(ss >> v)) throw std::runtime_error(path + ":" + std::to_string(lineno) + ": missing value");
        std::string rest;
        if (ss >> rest) throw std::runtime_error(path + ":" + std::to_string(lineno) + ": trailing text");
        if (n < window.n_min() || n > window.n_max()) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": site " + std::to_string(n) +
                                     " outside window");
        }
        q[window.index(static_cast<int>(n))] += v;
    }
    return Potential(window, std::move(q));
}

}  // namespace potentials

ComplexField apply_laplacian(const ComplexField& u) {
    const auto& w = u.window();
    ComplexField v(w);
    auto in = u.values();
    auto out = v.values();
    const std::size_t n = in.size();
    for (std::size_t i = 0; i < n; ++i) {
        cplx left = i > 0 ? in[i - 1] : cplx{};
        cplx right = i + 1 < n ? in[i + 1] : cplx{};
        out[i] = right + left - 2.0 * in[i];
    }
    return v;
}

ComplexField apply_hamiltonian(const Potential& q, const ComplexField& u) {
    if (!q.window().contains(u.window())) {
        throw std::invalid_argument("field window is not contained in the potential window");
    }
    ComplexField v = apply_laplacian(u);
    const auto& w = u.window();
    auto out = v.values();
    auto in = u.values();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = -out[i] + q.q(w.site(i)) * in[i];
    return v;
}

double weighted_norm(const ComplexField& u, double p, double sigma) {
    if (!(p >= 1.0)) throw std::invalid_argument("weighted_norm needs p >= 1");
    const auto& w = u.window();
    auto vals = u.values();
    if (std::isinf(p)) {
        double s = 0.0;
        for (std::size_t i = 0; i < vals.size(); ++i) {
            s = std::max(s, std::pow(japanese(w.site(i)), sigma) * std::abs(vals[i]));
        }
        return s;
    }
    // Scale by the max to keep p-th powers in range.
    double scale = 0.0;
    for (std::size_t i = 0; i < vals.size(); ++i) {
        scale = std::max(scale, std::pow(japanese(w.site(i)), sigma) * std::abs(vals[i]));
    }
    if (scale == 0.0) return 0.0;
    double s = 0.0;
    for (std::size_t i = 0; i < vals.size(); ++i) {
        s += std::pow(std::pow(japanese(w.site(i)), sigma) * std::abs(vals[i]) / scale, p);
    }
    return scale * std::pow(s, 1.0 / p);
}

cplx inner(const ComplexField& u, const ComplexField& v) {
    int lo = std::min(u.window().n_min(), v.window().n_min());
    int hi = std::max(u.window().n_max(), v.window().n_max());
    cplx s{};
    for (int n = lo; n <= hi; ++n) s += std::conj(u(n)) * v(n);
    return s;
}

}  // namespace dnls
