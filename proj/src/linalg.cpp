#include "calabi/linalg.h"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace calabi {

LUFactorization::LUFactorization(DenseMatrix a) : lu_(std::move(a)) {
    const std::size_t n = lu_.rows();
    if (n == 0 || lu_.cols() != n) {
        throw std::invalid_argument("LU: matrix must be square and nonempty");
    }
    perm_.resize(n);
    for (std::size_t i = 0; i < n; ++i) perm_[i] = i;

    for (std::size_t k = 0; k < n; ++k) {
        // Partial pivot.
        std::size_t piv = k;
        double best = std::abs(lu_(k, k));
        for (std::size_t i = k + 1; i < n; ++i) {
            const double v = std::abs(lu_(i, k));
            if (v > best) {
                best = v;
                piv = i;
            }
        }
        if (best < 1e-300) {
            singular_ = true;
            return;
        }
        if (piv != k) {
            std::swap(perm_[piv], perm_[k]);
            for (std::size_t j = 0; j < n; ++j) {
                std::swap(lu_(piv, j), lu_(k, j));
            }
        }
        const double inv = 1.0 / lu_(k, k);
        for (std::size_t i = k + 1; i < n; ++i) {
            const double m = lu_(i, k) * inv;
            lu_(i, k) = m;
            if (m == 0.0) continue;
            for (std::size_t j = k + 1; j < n; ++j) {
                lu_(i, j) -= m * lu_(k, j);
            }
        }
    }
}

std::vector<double> LUFactorization::solve(const std::vector<double>& b) const {
    const std::size_t n = lu_.rows();
    if (b.size() != n) throw std::invalid_argument("LU solve: size mismatch");
    if (singular_) throw std::runtime_error("LU solve: singular matrix");
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = b[perm_[i]];
    // Forward substitution (unit lower triangle).
    for (std::size_t i = 1; i < n; ++i) {
        double s = x[i];
        for (std::size_t j = 0; j < i; ++j) s -= lu_(i, j) * x[j];
        x[i] = s;
    }
    // Back substitution.
    for (std::size_t ii = n; ii-- > 0;) {
        double s = x[ii];
        for (std::size_t j = ii + 1; j < n; ++j) s -= lu_(ii, j) * x[j];
        x[ii] = s / lu_(ii, ii);
    }
    return x;
}

std::vector<double> solve_dense(DenseMatrix a, const std::vector<double>& b) {
    LUFactorization lu(std::move(a));
    if (lu.singular()) throw std::runtime_error("solve_dense: singular matrix");
    return lu.solve(b);
}

}  // namespace calabi
