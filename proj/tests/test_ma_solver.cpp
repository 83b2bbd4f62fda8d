#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "calabi/decay_iteration.h"
#include "calabi/ma_solver.h"
#include "doctest.h"

using namespace calabi;

namespace {

// Post-pipeline fixture: three corrective solves, the compatibility
// adjustment, the final improvement step, then window solves at two
// different truncation radii.  Computed once.
struct PipelineFixture {
    GridPtr big;
    RadialMetricState toy0;
    FinalStepResult fin;
    NewtonResult r50, r80;
    PipelineFixture() {
        big = RadialGrid::log_uniform(3, 1.0, 300.0, 3000);
        toy0 = make_initial_state(3, {0.3, 0.05}, big);
        auto res = iterate(toy0, 3);
        const double lam = compatibility_lambda_refined(res.state, 1.0);
        fin = final_step(apply_linear_z(res.state, lam), 5.0, 200.0);
        NewtonConfig c50;
        c50.z_min = 5.0;
        c50.z_max = 50.0;
        r50 = newton_solve(fin.state, c50);
        NewtonConfig c80 = c50;
        c80.z_max = 80.0;
        r80 = newton_solve(fin.state, c80);
    }
};

const PipelineFixture& pipe() {
    static PipelineFixture p;
    return p;
}

}  // namespace

TEST_CASE("window restriction and config validation") {
    auto grid = RadialGrid::log_uniform(3, 1.0, 300.0, 400);
    auto state = make_initial_state(3, {0.3, 0.05}, grid);
    state.A = RadialFunction::sample(grid, [](double z) { return 1.0 / z; });

    auto w = restrict_to_window(state, 5.0, 50.0);
    REQUIRE(w.grid()->size() >= 8);
    CHECK(w.grid()->z_front() >= 5.0);
    CHECK(w.grid()->z_back() <= 50.0);
    CHECK(w.n == 3);
    CHECK(w.c == state.c);
    // Samples are copied, not re-interpolated.
    const std::size_t i0 = grid->lower_index(w.grid()->z_front());
    for (std::size_t i = 0; i < w.grid()->size(); ++i) {
        CHECK(w.grid()->z(i) == grid->z(i0 + i));
        CHECK(w.A[i] == state.A[i0 + i]);
    }

    CHECK_THROWS_AS((void)restrict_to_window(state, 10.0, 10.05),
                    std::invalid_argument);

    NewtonConfig bad;
    bad.z_min = 0.5;
    CHECK_THROWS_AS((void)newton_solve(state, bad), std::invalid_argument);
    bad = NewtonConfig{};
    bad.z_max = bad.z_min;
    CHECK_THROWS_AS((void)newton_solve(state, bad), std::invalid_argument);
    bad = NewtonConfig{};
    bad.tolerance = 0.0;
    CHECK_THROWS_AS((void)newton_solve(state, bad), std::invalid_argument);
    bad = NewtonConfig{};
    bad.max_iterations = 0;
    CHECK_THROWS_AS((void)newton_solve(state, bad), std::invalid_argument);
}

TEST_CASE("composite potential: kernel constants and a manufactured solution") {
    auto grid = RadialGrid::log_uniform(3, 5.0, 50.0, 600);
    auto model = make_initial_state(3, {0.0, 0.0}, grid);

    // Constants are exactly in the kernel of the difference stencils.
    auto c = RadialFunction::sample(grid, [](double) { return 7.5; });
    CHECK(ma_residual(model, c).sup_norm() <= 1e-13);

    // Manufactured oracle: phi* = z^{-2} on the pure model has
    //   dphi*/dt = -(2/3) z^{-5},  d^2phi*/dt^2 = (10/9) z^{-8},
    // so the defect is known in closed form.
    auto phi = RadialFunction::sample(
        grid, [](double z) { return std::pow(z, -2.0); });
    auto R = ma_residual(model, phi);
    double worst_interior = 0.0, worst_edge = 0.0;
    for (std::size_t i = 0; i < grid->size(); ++i) {
        const double z = grid->z(i);
        const double As = -(2.0 / 3.0) * std::pow(z, -5.0);
        const double Bs = (10.0 / 9.0) * std::pow(z, -8.0);
        const double exact =
            1.0 - (1.0 + 3.0 * z * z * Bs) * (z + As) * (z + As) / (z * z);
        const double rel = std::abs(R[i] - exact) / std::abs(exact);
        if (i == 0 || i + 1 == grid->size()) {
            worst_edge = std::max(worst_edge, rel);
        } else {
            worst_interior = std::max(worst_interior, rel);
        }
    }
    CHECK(worst_interior <= 1e-4);  // centered stencils
    CHECK(worst_edge <= 0.05);      // one-sided stencils at the window ends
}

TEST_CASE("linearization matches finite differences of the residual") {
    auto grid = RadialGrid::log_uniform(3, 5.0, 50.0, 300);
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> U(-0.2, 0.2);
    double worst = 0.0;
    for (int trial = 0; trial < 8; ++trial) {
        auto st = make_initial_state(
            3, {0.3 + 0.1 * U(rng), 0.05 + 0.02 * U(rng)}, grid);
        const double a1 = U(rng), b1 = U(rng);
        st.A = RadialFunction::sample(grid, [&](double z) { return a1 / z; });
        st.B = RadialFunction::sample(
            grid, [&](double z) { return b1 / (3.0 * z * z * z); });
        const double p0 = 1.0 + U(rng), v0 = 1.0 + U(rng);
        auto phi = RadialFunction::sample(
            grid, [&](double z) { return p0 * std::sin(z) / z; });
        auto v = RadialFunction::sample(
            grid, [&](double z) { return v0 * std::cos(1.3 * z); });

        const double eps = 2e-5;
        auto phip = phi, phim = phi;
        for (std::size_t i = 0; i < grid->size(); ++i) {
            phip[i] += eps * v[i];
            phim[i] -= eps * v[i];
        }
        auto Rp = ma_residual(st, phip);
        auto Rm = ma_residual(st, phim);
        auto L = linearized_residual(st, phi, v);
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < grid->size(); ++i) {
            num = std::max(num,
                           std::abs((Rp[i] - Rm[i]) / (2.0 * eps) - L[i]));
            den = std::max(den, std::abs(L[i]));
        }
        worst = std::max(worst, num / den);
    }
    CHECK(worst <= 1e-5);
}

TEST_CASE("pure model: the zero potential is recovered exactly") {
    auto grid = RadialGrid::log_uniform(3, 1.0, 300.0, 3000);
    auto model = make_initial_state(3, {0.0, 0.0}, grid);
    auto r = newton_solve(model, NewtonConfig{});
    CHECK(r.trace.converged);
    CHECK(r.trace.step_norm.empty());  // already Calabi-Yau: no step taken
    CHECK(r.trace.residual.size() == 1);
    CHECK(r.trace.residual[0] <= 1e-12);
    for (std::size_t i = 0; i < r.phi.size(); ++i) CHECK(r.phi[i] == 0.0);
}

TEST_CASE("damped Newton converges quadratically from a raw state") {
    auto grid = RadialGrid::log_uniform(3, 1.0, 300.0, 3000);
    auto raw = make_initial_state(3, {0.3, 0.05}, grid);

    NewtonConfig cfg;
    cfg.z_min = 5.0;
    cfg.z_max = 50.0;
    cfg.tolerance = 1e-10;
    cfg.max_iterations = 20;
    auto r = newton_solve(raw, cfg);

    CHECK(r.trace.converged);
    CHECK(r.trace.step_norm.size() <= 16);
    CHECK(r.trace.residual.front() == doctest::Approx(0.1216).epsilon(0.05));
    CHECK(r.trace.residual.back() <= 1e-10);
    CHECK(r.trace.residual.size() == r.trace.step_norm.size() + 1);
    CHECK(r.trace.damping.size() == r.trace.step_norm.size());

    // The early phase must damp (full steps lose positivity), the late
    // phase must take full steps and contract quadratically.
    CHECK(*std::min_element(r.trace.damping.begin(), r.trace.damping.end()) <
          1.0);
    int quadratic_steps = 0;
    for (std::size_t k = 0; k + 1 < r.trace.residual.size(); ++k) {
        const double rk = r.trace.residual[k];
        const double rk1 = r.trace.residual[k + 1];
        if (r.trace.damping[k] == 1.0 && rk < 0.05 && rk1 > 1e-10) {
            CHECK(rk1 <= 2.0 * rk * rk);
            ++quadratic_steps;
        }
    }
    CHECK(quadratic_steps >= 2);

    // Positivity held at every accepted step, in particular at the last.
    CHECK(positivity_ok(compose_with_potential(r.state, r.phi)));
    CHECK(r.phi[0] == 0.0);
    CHECK(r.phi[r.phi.size() - 1] == 0.0);
}

TEST_CASE("exhausted iteration budget still returns the residual history") {
    auto grid = RadialGrid::log_uniform(3, 1.0, 300.0, 3000);
    auto raw = make_initial_state(3, {0.3, 0.05}, grid);
    // Default budget: 12 iterations toward 1e-11.  The raw state's huge
    // potential puts the evaluation floor of the discrete residual near
    // 1e-11, so this must come back unconverged but fully recorded.
    auto r = newton_solve(raw, NewtonConfig{});
    CHECK_FALSE(r.trace.converged);
    CHECK(r.trace.residual.size() == 13);
    CHECK(r.trace.residual.back() <= 1e-8);
    CHECK(r.trace.residual.back() > 1e-11);
}

TEST_CASE("post-pipeline state solves to the rounding floor in one step") {
    const auto& p = pipe();
    CHECK(p.r50.trace.converged);
    CHECK(p.r50.trace.step_norm.size() <= 3);
    CHECK(p.r50.trace.residual.front() <= 1e-8);
    CHECK(p.r50.trace.residual.back() <= 1e-12);
    CHECK(p.r50.phi.sup_norm() <= 1e-6);
    CHECK(positivity_ok(compose_with_potential(p.r50.state, p.r50.phi)));
}

TEST_CASE("truncation error is bounded by the boundary mismatch") {
    const auto& p = pipe();
    // The two solutions differ by (approximately) the harmonic extension of
    // the shorter window's boundary value, so the interior gap obeys a
    // maximum principle against |phi_80(50)|.
    double gap = 0.0;
    const auto& z1 = p.r50.phi.grid()->z();
    for (std::size_t i = 0; i < z1.size() && z1[i] <= 40.0; ++i) {
        gap = std::max(gap, std::abs(p.r50.phi[i] - p.r80.phi.eval(z1[i])));
    }
    CHECK(gap <= 1.5 * std::abs(p.r80.phi.eval(50.0)));
    CHECK(gap <= 2e-7);
}

TEST_CASE("decay summary of the solved potential") {
    const auto& p = pipe();
    auto rep = phi_decay_report(p.r80.state, p.r80.phi, 5.0, 80.0);

    CHECK(rep.phi.fit.measurable);
    CHECK(rep.phi.fit.exponent > -2.5);
    CHECK(rep.phi.fit.exponent < -1.2);

    // The Dirichlet window pins a harmonic beta*z component whose metric
    // contribution scales like z^{-n}; that floor (not the interior source)
    // sets the fitted order, while the absolute size stays at the boundary
    // scale of the tiny potential.
    CHECK(rep.metric.fit.measurable);
    CHECK(rep.metric.fit.exponent == doctest::Approx(-3.0).epsilon(0.2));
    CHECK(rep.metric.weighted_sup <= 1e-3);
    MESSAGE("solved-potential metric order ", rep.metric.fit.exponent,
            " vs final defect order ", p.fin.report.fit.exponent);

    // Composite metric approaches the cone at rate 1.
    CHECK(rep.closeness.measurable);
    CHECK(rep.closeness.exponent == doctest::Approx(-1.0).epsilon(0.1));

    CHECK_THROWS_WITH_AS((void)phi_decay_report(p.r80.state, p.r80.phi,
                                                80.5, 81.0),
                         doctest::Contains("window too short"),
                         std::runtime_error);

    // The pure model's potential is identically zero: degenerate reports.
    auto grid = RadialGrid::log_uniform(3, 5.0, 50.0, 200);
    auto model = make_initial_state(3, {0.0, 0.0}, grid);
    auto zero = RadialFunction::zero(grid);
    auto rep0 = phi_decay_report(model, zero, 5.0, 50.0);
    CHECK_FALSE(rep0.phi.fit.measurable);
    CHECK_FALSE(rep0.metric.fit.measurable);
    CHECK(rep0.phi.weighted_sup == 0.0);
}
