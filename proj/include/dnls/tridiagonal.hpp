#pragma once

#include <cmath>
#include <complex>
#include <span>
#include <stdexcept>
#include <vector>

#include "dnls/error.hpp"

namespace dnls {

/// Solves A x = b for tridiagonal A by Gaussian elimination with partial
/// pivoting. sub[i] = A(i+1, i), diag[i] = A(i, i), super[i] = A(i, i+1).
template <class T>
std::vector<T> solve_tridiagonal(std::span<const T> sub, std::span<const T> diag, std::span<const T> super,
                                 std::span<const T> rhs) {
    const std::size_t n = diag.size();
    if (n == 0) return {};
    if (sub.size() + 1 != n || super.size() + 1 != n || rhs.size() != n) {
        throw std::invalid_argument("tridiagonal system has inconsistent sizes");
    }
    std::vector<T> a(sub.begin(), sub.end());
    std::vector<T> d(diag.begin(), diag.end());
    std::vector<T> c(super.begin(), super.end());
    c.push_back(T{});
    std::vector<T> e(n, T{});
    std::vector<T> b(rhs.begin(), rhs.end());
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (std::abs(a[i]) > std::abs(d[i])) {
            const T fact = d[i] / a[i];
            const T d_next = d[i + 1];
            const T c_next = c[i + 1];
            d[i] = a[i];
            d[i + 1] = c[i] - fact * d_next;
            c[i] = d_next;
            e[i] = c_next;
            c[i + 1] = -fact * c_next;
            std::swap(b[i], b[i + 1]);
            b[i + 1] -= fact * b[i];
        } else {
            if (d[i] == T{}) throw NumericalError("singular tridiagonal system");
            const T fact = a[i] / d[i];
            d[i + 1] -= fact * c[i];
            b[i + 1] -= fact * b[i];
        }
    }
    if (d[n - 1] == T{}) throw NumericalError("singular tridiagonal system");
    std::vector<T> x(n);
    x[n - 1] = b[n - 1] / d[n - 1];
    if (n > 1) x[n - 2] = (b[n - 2] - c[n - 2] * x[n - 1]) / d[n - 2];
    for (std::size_t i = n - 2; i-- > 0;) x[i] = (b[i] - c[i] * x[i + 1] - e[i] * x[i + 2]) / d[i];
    return x;
}

}  // namespace dnls
