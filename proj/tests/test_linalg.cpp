#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>
#include <vector>

#include "calabi/linalg.h"
#include "doctest.h"

using namespace calabi;

TEST_CASE("solves a known 3x3 system") {
    DenseMatrix a(3, 3);
    a(0, 0) = 2;  a(0, 1) = 1;  a(0, 2) = -1;
    a(1, 0) = -3; a(1, 1) = -1; a(1, 2) = 2;
    a(2, 0) = -2; a(2, 1) = 1;  a(2, 2) = 2;
    std::vector<double> b{8, -11, -3};
    auto x = solve_dense(a, b);
    CHECK(x[0] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(x[1] == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(x[2] == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("pivoting handles a zero leading entry") {
    DenseMatrix a(2, 2);
    a(0, 0) = 0; a(0, 1) = 1;
    a(1, 0) = 1; a(1, 1) = 0;
    auto x = solve_dense(a, {3.0, 5.0});
    CHECK(x[0] == doctest::Approx(5.0));
    CHECK(x[1] == doctest::Approx(3.0));
}

TEST_CASE("random diagonally dominant systems solve to small residual") {
    std::mt19937_64 rng(12345);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    const std::size_t n = 120;
    DenseMatrix a(n, n);
    std::vector<double> xtrue(n);
    for (std::size_t i = 0; i < n; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            a(i, j) = dist(rng);
            row += std::abs(a(i, j));
        }
        a(i, i) += row;  // dominance
        xtrue[i] = dist(rng);
    }
    std::vector<double> b(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) b[i] += a(i, j) * xtrue[j];
    }
    auto x = solve_dense(a, b);
    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        err = std::max(err, std::abs(x[i] - xtrue[i]));
    }
    CHECK(err < 1e-11);
}

TEST_CASE("singular matrices are reported") {
    DenseMatrix a(2, 2);
    a(0, 0) = 1; a(0, 1) = 2;
    a(1, 0) = 2; a(1, 1) = 4;
    LUFactorization lu(a);
    CHECK(lu.singular());
    CHECK_THROWS(lu.solve({1.0, 2.0}));
}
