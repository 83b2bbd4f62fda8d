#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <memory>
#include <vector>

#include "calabi/grid.h"
#include "doctest.h"

using namespace calabi;

TEST_CASE("log_uniform grid hits endpoints exactly and satisfies t = z^n") {
    auto g = RadialGrid::log_uniform(3, 1.0, 20.0, 101);
    CHECK(g->size() == 101);
    CHECK(g->z_front() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(g->z_back() == doctest::Approx(20.0).epsilon(1e-15));
    for (std::size_t i = 0; i < g->size(); ++i) {
        CHECK(g->t(i) == doctest::Approx(std::pow(g->z(i), 3)).epsilon(1e-14));
        if (i > 0) CHECK(g->z(i) > g->z(i - 1));
    }
}

TEST_CASE("grid construction rejects invalid input") {
    CHECK_THROWS(RadialGrid(1, {1.0, 2.0, 3.0, 4.0, 5.0}));
    CHECK_THROWS(RadialGrid(3, {1.0, 2.0, 3.0}));             // too few
    CHECK_THROWS(RadialGrid(3, {1.0, 2.0, 2.0, 3.0, 4.0}));   // not increasing
    CHECK_THROWS(RadialGrid(3, {-1.0, 2.0, 3.0, 4.0, 5.0}));  // not positive
}

TEST_CASE("Fornberg weights reproduce the classical 5-point stencils") {
    std::vector<double> nodes{-2.0, -1.0, 0.0, 1.0, 2.0};
    auto w = fd_weights(0.0, nodes, 2);
    // First derivative: (1/12)(f_{-2} - 8 f_{-1} + 8 f_1 - f_2).
    CHECK(w[1][0] == doctest::Approx(1.0 / 12).epsilon(1e-14));
    CHECK(w[1][1] == doctest::Approx(-8.0 / 12).epsilon(1e-14));
    CHECK(w[1][2] == doctest::Approx(0.0).epsilon(1e-14));
    // Second derivative: (-1/12, 16/12, -30/12, 16/12, -1/12).
    CHECK(w[2][0] == doctest::Approx(-1.0 / 12).epsilon(1e-14));
    CHECK(w[2][1] == doctest::Approx(16.0 / 12).epsilon(1e-14));
    CHECK(w[2][2] == doctest::Approx(-30.0 / 12).epsilon(1e-14));
}

TEST_CASE("derivative_samples is exact on cubics and 4th order on sin") {
    auto g1 = RadialGrid::log_uniform(3, 1.0, 5.0, 200);
    std::vector<double> f(g1->size());
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double z = g1->z(i);
        f[i] = z * z * z - 2.0 * z;
    }
    auto d1 = derivative_samples(g1->z(), f, 1);
    auto d2 = derivative_samples(g1->z(), f, 2);
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double z = g1->z(i);
        CHECK(d1[i] == doctest::Approx(3.0 * z * z - 2.0).epsilon(1e-11));
        CHECK(d2[i] == doctest::Approx(6.0 * z).epsilon(1e-10));
    }

    // Interior error (centered stencils) and full-range error (includes the
    // lower-order one-sided boundary stencils).
    auto err_for = [](std::size_t count, bool interior_only) {
        auto g = RadialGrid::log_uniform(3, 1.0, 5.0, count);
        std::vector<double> s(g->size());
        for (std::size_t i = 0; i < s.size(); ++i) s[i] = std::sin(g->z(i));
        auto d = derivative_samples(g->z(), s, 2);
        const std::size_t skip = interior_only ? 2 : 0;
        double e = 0.0;
        for (std::size_t i = skip; i + skip < s.size(); ++i) {
            e = std::max(e, std::abs(d[i] + std::sin(g->z(i))));
        }
        return e;
    };
    const double interior_order =
        std::log2(err_for(100, true) / err_for(200, true));
    CHECK(interior_order > 3.5);
    // Boundary rows converge too, just at a lower rate.
    CHECK(err_for(200, false) < 0.6 * err_for(100, false));
}

TEST_CASE("cumulative_integral is exact on cubics, high order on sin") {
    auto g = RadialGrid::log_uniform(3, 1.0, 4.0, 120);
    std::vector<double> f(g->size());
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double z = g->z(i);
        f[i] = z * z * z;
    }
    auto c = cumulative_integral(g->z(), f);
    CHECK(c.front() == 0.0);
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double z = g->z(i);
        CHECK(c[i] == doctest::Approx((std::pow(z, 4) - 1.0) / 4.0)
                          .epsilon(1e-13));
    }

    auto err_for = [](std::size_t count) {
        auto gg = RadialGrid::log_uniform(3, 1.0, 4.0, count);
        std::vector<double> s(gg->size());
        for (std::size_t i = 0; i < s.size(); ++i) s[i] = std::sin(gg->z(i));
        auto cc = cumulative_integral(gg->z(), s);
        double e = 0.0;
        for (std::size_t i = 0; i < s.size(); ++i) {
            const double exact = std::cos(1.0) - std::cos(gg->z(i));
            e = std::max(e, std::abs(cc[i] - exact));
        }
        return e;
    };
    const double order = std::log2(err_for(80) / err_for(160));
    CHECK(order > 3.6);
}

TEST_CASE("RadialFunction eval interpolates and sup_norm works") {
    auto g = RadialGrid::log_uniform(3, 1.0, 10.0, 300);
    auto u = RadialFunction::sample(
        g, [](double z) { return 1.0 / (1.0 + z * z); });
    CHECK(u.eval(g->z(17)) == doctest::Approx(u[17]).epsilon(1e-15));
    CHECK(u.eval(2.71) ==
          doctest::Approx(1.0 / (1.0 + 2.71 * 2.71)).epsilon(1e-8));
    CHECK(u.sup_norm() == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("attached analytic derivatives take precedence over FD") {
    auto g = RadialGrid::log_uniform(3, 1.0, 2.0, 50);
    auto u = RadialFunction::sample(g, [](double z) { return z * z; });
    std::vector<double> fake(g->size(), 123.0);
    u.set_dzz(fake);
    CHECK(u.dzz()[10] == 123.0);
    auto v = RadialFunction::sample(g, [](double z) { return z * z; });
    CHECK(v.dzz()[10] == doctest::Approx(2.0).epsilon(1e-9));
}
