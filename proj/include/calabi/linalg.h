#pragma once
// Minimal dense linear algebra: LU factorization with partial pivoting,
// sized for the few-hundred-unknown Newton systems used here.

#include <cstddef>
#include <vector>

namespace calabi {

// Row-major dense matrix.
class DenseMatrix {
  public:
    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

    double& operator()(std::size_t i, std::size_t j) {
        return data_[i * cols_ + j];
    }
    double operator()(std::size_t i, std::size_t j) const {
        return data_[i * cols_ + j];
    }
    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// PA = LU factorization with partial pivoting; solve() applies it.
class LUFactorization {
  public:
    explicit LUFactorization(DenseMatrix a);

    // Solve A x = b.
    std::vector<double> solve(const std::vector<double>& b) const;

    bool singular() const { return singular_; }

  private:
    DenseMatrix lu_;
    std::vector<std::size_t> perm_;
    bool singular_ = false;
};

// One-shot convenience: solve A x = b; throws on singular systems.
std::vector<double> solve_dense(DenseMatrix a, const std::vector<double>& b);

}  // namespace calabi
