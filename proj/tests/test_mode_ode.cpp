#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <functional>

#include "calabi/mode_ode.h"
#include "doctest.h"

using namespace calabi;

// Reference values were frozen from an independent multiprecision
// implementation of the same formulas (30 digits).

TEST_CASE("mode constants match the closed forms") {
    auto p0 = FundamentalPair::zero_mode(3, 1.0);
    CHECK(p0.expected_wronskian() == doctest::Approx(-1.5).epsilon(1e-15));

    CHECK(FundamentalPair::nonzero_mode(3, 2.0, 1).expected_wronskian() ==
          doctest::Approx(-4.0623538182792013).epsilon(1e-12));
    CHECK(FundamentalPair::nonzero_mode(3, 0.5, 2).expected_wronskian() ==
          doctest::Approx(-2.4056911033603020).epsilon(1e-12));
    CHECK(FundamentalPair::nonzero_mode(2, 1.0, 1).expected_wronskian() ==
          doctest::Approx(-2.8928181692641543).epsilon(1e-12));
    // lambda = 1, j = 1, n = 3 collapses to Gamma(-1/3)/Gamma(2/3) = -3.
    CHECK(FundamentalPair::nonzero_mode(3, 1.0, 1).expected_wronskian() ==
          doctest::Approx(-3.0).epsilon(1e-13));

    CHECK_THROWS(FundamentalPair::zero_mode(3, 0.0));
    CHECK_THROWS(FundamentalPair::nonzero_mode(3, 1.0, 0));
}

TEST_CASE("zero-mode pair: frozen point values and numeric Wronskian") {
    auto pair = FundamentalPair::zero_mode(3, 1.0);
    CHECK(pair.D(1.0) ==
          doctest::Approx(0.35139950901560212).epsilon(1e-10));
    CHECK(pair.G(1.0) ==
          doctest::Approx(1.1828139362875465).epsilon(1e-10));
    CHECK(pair.D(2.5) ==
          doctest::Approx(0.0095292501615671930).epsilon(1e-10));
    CHECK(pair.G(2.5) ==
          doctest::Approx(28.842401602592918).epsilon(1e-10));
    CHECK(pair.numeric_wronskian(2.0) ==
          doctest::Approx(-1.5).epsilon(1e-8));
}

TEST_CASE("numeric Wronskian is the expected constant across z and modes") {
    for (double lambda : {0.5, 1.0, 2.0}) {
        for (int j : {1, 2, 3}) {
            auto pair = FundamentalPair::nonzero_mode(3, lambda, j);
            const double expected = pair.expected_wronskian();
            for (double z : {1.1, 2.0, 3.5, 5.0}) {
                CHECK(pair.numeric_wronskian(z) ==
                      doctest::Approx(expected).epsilon(1e-7));
            }
        }
    }
}

TEST_CASE("prepared tables reproduce the exact evaluations") {
    auto exact = FundamentalPair::nonzero_mode(3, 2.0, 1);
    auto fast = FundamentalPair::nonzero_mode(3, 2.0, 1);
    fast.prepare(1.0, 20.0, 600);
    REQUIRE(fast.prepared());
    for (double z : {1.0, 1.37, 2.9, 7.3, 13.1, 19.995}) {
        CHECK(fast.log_D(z) == doctest::Approx(exact.log_D(z)).epsilon(5e-12));
        CHECK(fast.log_G(z) == doctest::Approx(exact.log_G(z)).epsilon(5e-12));
    }
    auto z0 = FundamentalPair::zero_mode(3, 2.0);
    auto z0f = FundamentalPair::zero_mode(3, 2.0);
    z0f.prepare(1.0, 20.0, 600);
    for (double z : {1.0, 2.2, 9.7, 19.5}) {
        CHECK(z0f.log_D(z) == doctest::Approx(z0.log_D(z)).epsilon(5e-12));
        CHECK(z0f.log_G(z) == doctest::Approx(z0.log_G(z)).epsilon(5e-12));
    }
}

TEST_CASE("Green solve, zero mode: frozen values for v = z^{-2}") {
    auto pair = FundamentalPair::zero_mode(3, 1.0);
    auto grid = RadialGrid::log_uniform(3, 1.0, 14.0, 700);
    auto v = RadialFunction::sample(grid, [](double z) { return 1.0 / (z * z); });
    std::function<double(double)> vf = [](double s) { return 1.0 / (s * s); };
    auto sol = green_solve(pair, v, -2.0, &vf);

    CHECK(sol.u.eval(2.0) ==
          doctest::Approx(-0.48106480049152424).epsilon(1e-8));
    CHECK(sol.u.eval(5.0) ==
          doctest::Approx(-0.20113336305825388).epsilon(1e-8));
    CHECK(sol.max_relative_residual < 1e-6);
    // The end-tail closure error bound is small relative to |u(z_N)| ~ 0.07.
    CHECK(sol.tail_remainder_bound < 1e-2);
    CHECK(sol.tail_remainder_bound > 0.0);
}

TEST_CASE("Green solve, fiber frequency 1: frozen values for v = z^{-1}") {
    auto pair = FundamentalPair::nonzero_mode(3, 1.0, 1);
    auto grid = RadialGrid::log_uniform(3, 1.0, 14.0, 700);
    auto v = RadialFunction::sample(grid, [](double z) { return 1.0 / z; });
    std::function<double(double)> vf = [](double s) { return 1.0 / s; };
    auto sol = green_solve(pair, v, -1.0, &vf);

    CHECK(sol.u.eval(1.5) ==
          doctest::Approx(-0.25657809623700775).epsilon(1e-8));
    CHECK(sol.u.eval(2.5) ==
          doctest::Approx(-0.080065141200099834).epsilon(1e-8));
    CHECK(sol.max_relative_residual < 1e-6);
    CHECK(sol.weighted_sup_lambda > 0.0);
    CHECK(sol.weighted_sup_full > 0.0);
    CHECK(std::isfinite(sol.weighted_sup_full));
}

TEST_CASE("Green solution agrees with the finite-difference BVP oracle") {
    struct Case {
        double lambda;
        int j;
    };
    for (const Case c : {Case{2.0, 1}, Case{1.0, 0}, Case{0.5, 2}}) {
        auto pair = c.j == 0 ? FundamentalPair::zero_mode(3, c.lambda)
                             : FundamentalPair::nonzero_mode(3, c.lambda, c.j);
        auto grid = RadialGrid::log_uniform(3, 1.0, 12.0, 700);
        std::function<double(double)> vf = [](double s) {
            return 1.0 / (s * s);
        };
        auto v = RadialFunction::sample(grid, vf);
        auto sol = green_solve(pair, v, -2.0, &vf);

        const double z_hi = 6.0;
        auto bvp = brute_force_bvp(3, Mode{c.lambda, c.j}, vf, 1.0, z_hi,
                                   sol.u.eval(1.0), sol.u.eval(z_hi), 1000);
        double scale = 0.0, err = 0.0;
        for (std::size_t i = 0; i < bvp.size(); ++i) {
            scale = std::max(scale, std::abs(bvp[i]));
        }
        for (std::size_t i = 10; i + 10 < bvp.size(); i += 7) {
            const double z = bvp.grid()->z(i);
            err = std::max(err, std::abs(bvp[i] - sol.u.eval(z)));
        }
        CHECK(err / scale < 1e-6);
    }
}

TEST_CASE("fiber mode solve reproduces the pinned first-step derivative") {
    // v = -0.6/z - 0.05/z^2 (decay order -1 >= -n): both antiderivatives
    // start at the left edge; u' = -0.9 z^2 - 0.15 z + 1.05 exactly.
    auto grid = RadialGrid::log_uniform(3, 1.0, 30.0, 800);
    auto v = RadialFunction::sample(
        grid, [](double z) { return -0.6 / z - 0.05 / (z * z); });
    auto u = fiber_mode_solve(v, -1.0);
    REQUIRE(u.has_dz());
    REQUIRE(u.has_dzz());
    const auto& up = u.dz();
    for (std::size_t i = 0; i < grid->size(); i += 37) {
        const double z = grid->z(i);
        const double expected = -0.9 * z * z - 0.15 * z + 1.05;
        CHECK(up[i] == doctest::Approx(expected).epsilon(1e-11));
    }
}

TEST_CASE("fiber mode solve integrates from infinity for fast-decaying sources") {
    // v = z^{-5}: delta = -5 < -n-1, so both antiderivatives start at
    // infinity and u = 1.5/z exactly (u'' = 3 z^2 v).
    auto grid = RadialGrid::log_uniform(3, 1.0, 60.0, 900);
    auto v = RadialFunction::sample(grid, [](double z) { return std::pow(z, -5.0); });
    auto u = fiber_mode_solve(v, -5.0);
    for (std::size_t i = 0; i < grid->size(); i += 53) {
        const double z = grid->z(i);
        CHECK(u[i] == doctest::Approx(1.5 / z).epsilon(1e-8));
    }
    const auto& up = u.dz();
    CHECK(up[0] == doctest::Approx(-1.5).epsilon(1e-8));
}

TEST_CASE("BVP solver: manufactured solution and convergence order") {
    const Mode mode{1.0, 1};
    auto u_exact = [](double z) { return std::exp(-z); };
    auto v = [&](double z) {
        const double q = 3.0 * z + 2.25 * std::pow(z, 4.0);
        return std::exp(-z) * (1.0 - q) / (3.0 * z * z);
    };
    auto err_for = [&](std::size_t m) {
        auto sol = brute_force_bvp(3, mode, v, 1.0, 4.0, u_exact(1.0),
                                   u_exact(4.0), m);
        double e = 0.0;
        for (std::size_t i = 0; i < sol.size(); ++i) {
            e = std::max(e, std::abs(sol[i] - u_exact(sol.grid()->z(i))));
        }
        return e;
    };
    // Order is measured where truncation still dominates roundoff.
    const double e50 = err_for(50);
    const double e100 = err_for(100);
    CHECK(e100 < 1e-9);
    CHECK(std::log2(e50 / e100) > 3.5);
}
