#include "calabi/decay_iteration.h"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "calabi/mode_ode.h"
#include "calabi/parallel.h"

namespace calabi {

namespace {

// Absolute evaluation noise of the determinant ratio: the O(1) horizontal
// and fiber factors are assembled in a handful of floating operations, so
// values of |F| below ~10 ulp of 1 are rounding bias, not signal.  The bias
// is systematic (it varies smoothly in z), so slope estimators must treat
// everything below this amplitude as unmeasured.
constexpr double kRatioNoise = 2e-14;

// Row n-1 of Pascal's triangle: binom(n-1, 0..n-1).
std::vector<double> binomial_row(int n) {
    std::vector<double> row(static_cast<std::size_t>(n), 1.0);
    for (int j = 1; j < n; ++j) {
        row[static_cast<std::size_t>(j)] =
            row[static_cast<std::size_t>(j - 1)] *
            static_cast<double>(n - j) / static_cast<double>(j);
    }
    return row;
}

void check_state(const RadialMetricState& state, const char* who) {
    if (state.n < 2) {
        throw std::invalid_argument(std::string(who) + ": need n >= 2");
    }
    if (state.c.size() != static_cast<std::size_t>(state.n - 1)) {
        throw std::invalid_argument(std::string(who) +
                                    ": need n-1 wedge ratios");
    }
    if (!state.A.grid() || state.A.grid() != state.B.grid()) {
        throw std::invalid_argument(std::string(who) +
                                    ": A and B must share one grid");
    }
    if (state.A.grid()->n() != state.n) {
        throw std::invalid_argument(std::string(who) +
                                    ": grid fibration degree mismatch");
    }
}

// Determinant ratio (1 + n z^{n-1} B) sum_j binom(n-1,j) (z+A)^{n-1-j} c_j
// / z^{n-1} at one grid point; F = 1 - ratio.
double ratio_at(const RadialMetricState& state,
                const std::vector<double>& binom, std::size_t i) {
    const int n = state.n;
    const auto& grid = state.grid();
    const double z = grid->z(i);
    const double zn1 = std::pow(z, n - 1.0);
    const double za = z + state.A[i];
    double horizontal = 0.0;
    double power = 1.0;  // (z+A)^{n-1-j}, filled from j = n-1 downward
    for (int j = n - 1; j >= 0; --j) {
        const double cj =
            (j == 0) ? 1.0 : state.c[static_cast<std::size_t>(j - 1)];
        horizontal += binom[static_cast<std::size_t>(j)] * cj * power;
        power *= za;
    }
    return (1.0 + n * zn1 * state.B[i]) * horizontal / zn1;
}

// Asymptotic decay exponent of F used to pick integration anchors; when the
// back of the grid has no measurable signal the source is treated as fully
// decayed so that both antiderivatives vanish at infinity.
double anchoring_exponent(const RadialFunction& f) {
    const double p = tail_exponent(f.grid()->z(), f.values(), kRatioNoise);
    if (std::isfinite(p)) return p;
    return -static_cast<double>(f.grid()->n() + 6);
}

// Shared single-step update: one Green solve of u'' = n z^{n-1} v and the
// exact chain-rule update of (A, B).  Appends nothing; returns the new state
// plus the solve through the out-parameters.
RadialMetricState advance(const RadialMetricState& state,
                          const RadialFunction& v, double delta,
                          RadialFunction* u_out, RadialFunction* grad_out) {
    const auto& grid = state.grid();
    const int n = state.n;
    const std::size_t count = grid->size();

    RadialFunction u = fiber_mode_solve(v, delta);
    const auto& up = u.dz();

    std::vector<double> a_new(count), b_new(count), grad(count);
    parallel_for_index(count, [&](std::size_t i) {
        const double z = grid->z(i);
        const double zn1 = std::pow(z, n - 1.0);
        // du/dt and d^2u/dt^2 via t = z^n; u'' is eliminated through the ODE,
        // so the update is exact rather than finite-differenced.
        const double du_dt = up[i] / (n * zn1);
        const double d2u_dt2 =
            (v[i] - (n - 1.0) * up[i] / (n * z * zn1)) / (n * zn1);
        a_new[i] = state.A[i] + du_dt;
        b_new[i] = state.B[i] + d2u_dt2;
        grad[i] = std::abs(up[i]) /
                  (std::sqrt(static_cast<double>(n)) *
                   std::pow(z, 0.5 * (n - 1.0)));
    });

    RadialMetricState next;
    next.n = n;
    next.c = state.c;
    next.A = RadialFunction(grid, std::move(a_new));
    next.B = RadialFunction(grid, std::move(b_new));
    if (grad_out) *grad_out = RadialFunction(grid, std::move(grad));
    if (u_out) *u_out = std::move(u);
    return next;
}

// Restriction of a sampled function to a z-window.
void window_samples(const RadialFunction& f, double lo, double hi,
                    std::vector<double>* x, std::vector<double>* y) {
    const auto& z = f.grid()->z();
    for (std::size_t i = 0; i < z.size(); ++i) {
        if (z[i] < lo || z[i] > hi) continue;
        x->push_back(z[i]);
        y->push_back(f[i]);
    }
}

}  // namespace

RadialMetricState make_initial_state(int n, std::vector<double> c,
                                     GridPtr grid) {
    if (!grid) throw std::invalid_argument("make_initial_state: null grid");
    RadialMetricState state;
    state.n = n;
    state.c = std::move(c);
    state.A = RadialFunction::zero(grid);
    state.B = RadialFunction::zero(grid);
    check_state(state, "make_initial_state");
    return state;
}

RadialFunction ma_ratio(const RadialMetricState& state) {
    check_state(state, "ma_ratio");
    const auto& grid = state.grid();
    const std::size_t count = grid->size();
    const auto binom = binomial_row(state.n);

    std::vector<double> f(count);
    parallel_for_index(count, [&](std::size_t i) {
        f[i] = 1.0 - ratio_at(state, binom, i);
    });
    for (std::size_t i = 0; i < count; ++i) {
        if (!(f[i] < 1.0)) {  // ratio <= 0 (or NaN): degenerate metric
            std::ostringstream os;
            os << "ma_ratio: determinant ratio is not positive at z = "
               << grid->z(i) << " (ratio = " << 1.0 - f[i] << ")";
            throw std::runtime_error(os.str());
        }
    }
    return RadialFunction(grid, std::move(f));
}

bool positivity_ok(const RadialMetricState& state, double* z_bad) {
    check_state(state, "positivity_ok");
    const auto& grid = state.grid();
    const auto binom = binomial_row(state.n);
    for (std::size_t i = 0; i < grid->size(); ++i) {
        const double ratio = ratio_at(state, binom, i);
        if (!(ratio > 0.0)) {
            if (z_bad) *z_bad = grid->z(i);
            return false;
        }
    }
    return true;
}

RadialFunction first_order_sum(const RadialMetricState& state) {
    check_state(state, "first_order_sum");
    if (state.A.sup_norm() != 0.0 || state.B.sup_norm() != 0.0) {
        throw std::invalid_argument(
            "first_order_sum: only defined on the bare divisor state (A = B "
            "= 0)");
    }
    const auto& grid = state.grid();
    const int n = state.n;
    std::vector<double> f(grid->size(), 0.0);
    for (std::size_t i = 0; i < grid->size(); ++i) {
        const double z = grid->z(i);
        double sum = 0.0;
        for (int j = 1; j <= n - 1; ++j) {
            sum += (n - j) * state.c[static_cast<std::size_t>(j - 1)] /
                   (n * std::pow(z, static_cast<double>(j)));
        }
        f[i] = sum;
    }
    return RadialFunction(grid, std::move(f));
}

std::vector<double> horizontal_eigenvalues(int n,
                                           const std::vector<double>& c) {
    if (n < 2 || c.size() != static_cast<std::size_t>(n - 1)) {
        throw std::invalid_argument(
            "horizontal_eigenvalues: need n >= 2 and n-1 wedge ratios");
    }
    const auto binom = binomial_row(n);
    // Monic polynomial sum_j binom(n-1,j) c_j x^{n-1-j}; its roots are -s_i.
    const int deg = n - 1;
    std::vector<double> coeff(static_cast<std::size_t>(deg) + 1);
    for (int j = 0; j <= deg; ++j) {
        coeff[static_cast<std::size_t>(j)] =
            binom[static_cast<std::size_t>(j)] *
            (j == 0 ? 1.0 : c[static_cast<std::size_t>(j - 1)]);
    }
    std::vector<double> s;
    if (deg == 1) {
        s.push_back(coeff[1]);
        return s;
    }

    // Durand-Kerner on the monic polynomial.
    using cd = std::complex<double>;
    auto eval = [&](cd x) {
        cd acc(0.0, 0.0);
        for (int j = 0; j <= deg; ++j) {
            acc = acc * x + coeff[static_cast<std::size_t>(j)];
        }
        return acc;
    };
    double radius = 0.0;
    for (int j = 1; j <= deg; ++j) {
        radius = std::max(
            radius, std::pow(std::abs(coeff[static_cast<std::size_t>(j)]),
                             1.0 / j));
    }
    radius = std::max(radius, 0.5);
    std::vector<cd> roots(static_cast<std::size_t>(deg));
    const cd seed(0.4, 0.9);
    cd pw(1.0, 0.0);
    for (auto& r : roots) {
        pw *= seed;
        r = radius * pw;
    }
    for (int sweep = 0; sweep < 200; ++sweep) {
        double moved = 0.0;
        for (std::size_t i = 0; i < roots.size(); ++i) {
            cd denom(1.0, 0.0);
            for (std::size_t k = 0; k < roots.size(); ++k) {
                if (k != i) denom *= roots[i] - roots[k];
            }
            const cd step = eval(roots[i]) / denom;
            roots[i] -= step;
            moved = std::max(moved, std::abs(step));
        }
        if (moved < 1e-14 * std::max(1.0, radius)) break;
    }
    for (const auto& r : roots) {
        if (std::abs(r.imag()) > 1e-8 * std::max(1.0, std::abs(r))) {
            throw std::runtime_error(
                "horizontal_eigenvalues: divisor form has complex "
                "eigenvalues against the reference");
        }
        s.push_back(-r.real());
    }
    std::sort(s.begin(), s.end());
    return s;
}

RadialFunction metric_closeness(const RadialMetricState& state) {
    check_state(state, "metric_closeness");
    const auto s = horizontal_eigenvalues(state.n, state.c);
    const auto& grid = state.grid();
    const int n = state.n;
    std::vector<double> d(grid->size());
    parallel_for_index(grid->size(), [&](std::size_t i) {
        const double z = grid->z(i);
        double worst = n * std::pow(z, n - 1.0) * std::abs(state.B[i]);
        for (double si : s) {
            worst = std::max(worst, std::abs(state.A[i] + si) / z);
        }
        d[i] = worst;
    });
    return RadialFunction(grid, std::move(d));
}

IterationResult iterate(const RadialMetricState& initial, int steps) {
    check_state(initial, "iterate");
    if (steps < 0 || steps > initial.n + 2) {
        throw std::invalid_argument(
            "iterate: the decay schedule justifies at most n+2 steps");
    }
    IterationResult result;
    result.states.push_back(initial);
    result.F.push_back(ma_ratio(initial));

    for (int step = 1; step <= steps; ++step) {
        const RadialFunction& v = result.F.back();
        const double delta = anchoring_exponent(v);
        RadialFunction u, grad;
        RadialMetricState next =
            advance(result.states.back(), v, delta, &u, &grad);
        result.source_decay.push_back(delta);
        result.u.push_back(std::move(u));
        result.gradient.push_back(std::move(grad));
        result.F.push_back(ma_ratio(next));
        result.states.push_back(std::move(next));
    }
    result.state = result.states.back();
    return result;
}

std::vector<DecayReport> decay_reports(const IterationResult& result,
                                       double window_lo, double window_hi) {
    std::vector<DecayReport> reports;
    for (std::size_t j = 0; j < result.F.size(); ++j) {
        std::vector<double> x, y;
        window_samples(result.F[j], window_lo, window_hi, &x, &y);
        if (x.size() < 2) {
            throw std::invalid_argument(
                "decay_reports: fit window contains fewer than two grid "
                "points");
        }
        reports.push_back(make_decay_report(static_cast<int>(j),
                                            -(static_cast<double>(j) + 1.0),
                                            x, y));
    }
    return reports;
}

EndIntegral end_volume_integral(const RadialMetricState& state) {
    check_state(state, "end_volume_integral");
    const RadialFunction F = ma_ratio(state);
    const auto& grid = state.grid();
    const int n = grid->n();
    const std::size_t count = grid->size();

    // Integrability gate: the end has infinite volume, so the defect must
    // decay strictly faster than z^{-n}.  A defect whose entire back quarter
    // sits below the evaluation noise has already died out and passes; an
    // above-noise tail must measure an integrable order.
    double back_max = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        if (grid->z(i) < 0.25 * grid->z_back()) continue;
        back_max = std::max(back_max, std::abs(F[i]));
    }
    double delta = -static_cast<double>(n + 2);
    if (back_max > kRatioNoise) {
        delta = tail_exponent(grid->z(), F.values(), kRatioNoise);
        if (!std::isfinite(delta)) {
            const auto fit = fit_power_law_protocol(grid->z(), F.values());
            delta = fit.measurable ? fit.exponent
                                   : -static_cast<double>(n + 2);
        }
        if (!(delta < -static_cast<double>(n))) {
            std::ostringstream os;
            os << "end_volume_integral: defect decays like z^(" << delta
               << "), not integrable against the end volume (needs order < -"
               << n << ")";
            throw std::runtime_error(os.str());
        }
    }

    std::vector<double> w(count);
    double l1 = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        w[i] = n * std::pow(grid->z(i), n - 1.0) * F[i];
    }
    {
        std::vector<double> aw(count);
        for (std::size_t i = 0; i < count; ++i) aw[i] = std::abs(w[i]);
        l1 = grid_integral(grid->z(), aw);
    }

    // The volume weight amplifies evaluation noise near the back; the tail
    // model must not see sub-noise samples of w = F n z^{n-1}.
    const double zf = grid->z_front(), zb = grid->z_back();
    const double w_noise =
        kRatioNoise * n * std::pow(0.5 * zb, n - 1.0);
    const auto tail = integral_tail(grid->z(), w, n - 1.0 + delta, w_noise);
    EndIntegral out;
    out.tail = tail.value;
    out.value = grid_integral(grid->z(), w) + tail.value;
    // Error budget: pointwise evaluation noise of the determinant ratio
    // (~2e-15 of the O(1) terms) integrated over the end and over the
    // unreachable [z_back, infinity) region, quadrature truncation
    // proportional to the L1 mass, and the tail-model distrust.
    out.tolerance = 2e-15 * (std::pow(zb, n) - std::pow(zf, n)) +
                    2e-15 * std::pow(zb, static_cast<double>(n)) +
                    1e-12 * l1 + tail.error;
    return out;
}

double compatibility_lambda(const RadialMetricState& state, double vol_d,
                            double fiber_normalization) {
    if (!(vol_d > 0.0) || !(fiber_normalization > 0.0)) {
        throw std::invalid_argument(
            "compatibility_lambda: volume factors must be positive");
    }
    // 0 = lambda Vol_D nu + C with C = -Vol_D nu int F n z^{n-1} dz: both
    // sides carry the same volume factors, which cancel.
    return end_volume_integral(state).value;
}

double compatibility_lambda_refined(const RadialMetricState& state,
                                    double vol_d,
                                    double fiber_normalization) {
    if (!(vol_d > 0.0) || !(fiber_normalization > 0.0)) {
        throw std::invalid_argument(
            "compatibility_lambda_refined: volume factors must be positive");
    }
    double lambda = 0.0;
    RadialMetricState current = state;
    for (int pass = 0; pass < 6; ++pass) {
        const EndIntegral e = end_volume_integral(current);
        if (std::abs(e.value) <= 0.5 * e.tolerance) break;
        // The cut-off harmonic direction moves the end integral by -lambda
        // per unit volume at linear order, so the Newton slope is -1.
        lambda += e.value;
        current = apply_linear_z(state, lambda);
    }
    return lambda;
}

RadialMetricState apply_linear_z(const RadialMetricState& state,
                                 double lambda) {
    check_state(state, "apply_linear_z");
    if (lambda == 0.0) return state;
    const auto& grid = state.grid();
    const int n = state.n;
    const std::size_t count = grid->size();
    const double t1 = grid->t(0);
    const double t2 = std::pow(3.0 * grid->z_front(), static_cast<double>(n));
    const double dt = t2 - t1;

    std::vector<double> a_new(count), b_new(count);
    parallel_for_index(count, [&](std::size_t i) {
        const double z = grid->z(i);
        const double t = grid->t(i);
        const double zdot = std::pow(z, 1.0 - n) / n;
        const double zddot =
            (1.0 / n) * (1.0 / n - 1.0) * std::pow(t, 1.0 / n - 2.0);
        double chi = 1.0, chi_p = 0.0, chi_pp = 0.0;
        if (t <= t1) {
            chi = 0.0;
        } else if (t < t2) {
            const double sv = (t - t1) / dt;
            chi = sv * sv * sv * (10.0 + sv * (-15.0 + 6.0 * sv));
            chi_p = 30.0 * sv * sv * (1.0 - sv) * (1.0 - sv) / dt;
            chi_pp = (60.0 * sv - 180.0 * sv * sv + 120.0 * sv * sv * sv) /
                     (dt * dt);
        }
        a_new[i] = state.A[i] + lambda * (chi_p * z + chi * zdot);
        b_new[i] = state.B[i] +
                   lambda * (chi_pp * z + 2.0 * chi_p * zdot + chi * zddot);
    });

    RadialMetricState out;
    out.n = n;
    out.c = state.c;
    out.A = RadialFunction(grid, std::move(a_new));
    out.B = RadialFunction(grid, std::move(b_new));
    return out;
}

FinalStepResult final_step(const RadialMetricState& state, double window_lo,
                           double window_hi) {
    check_state(state, "final_step");
    const RadialFunction v = ma_ratio(state);
    const double delta = anchoring_exponent(v);
    RadialFunction u, grad;
    RadialMetricState next = advance(state, v, delta, &u, &grad);

    FinalStepResult out;
    out.F = ma_ratio(next);
    out.state = std::move(next);

    std::vector<double> x, y;
    window_samples(out.F, window_lo, window_hi, &x, &y);
    if (x.size() < 2) {
        throw std::runtime_error(
            "final_step: fit window too short to measure the decay order");
    }
    // A window whose samples all sit below the measurement floor is not an
    // error: the defect has decayed past everything measurable, and the
    // report says so (fit.measurable = false, weighted_sup ~ 0).
    out.report = make_decay_report(state.n + 2,
                                   -(static_cast<double>(state.n) + 2.0), x, y);

    const RadialFunction closeness = metric_closeness(out.state);
    std::vector<double> cx, cy;
    window_samples(closeness, window_lo, window_hi, &cx, &cy);
    out.closeness = fit_power_law_protocol(cx, cy);
    return out;
}

}  // namespace calabi
