#include "calabi/ma_solver.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace calabi {

namespace {

// 3-point stencils in difference form: derivative estimates are linear
// combinations of (f_neighbor - f_center), so constants are annihilated
// exactly in floating point.
struct Stencil3 {
    std::size_t lo = 0, hi = 0;  // neighbor indices
    double d1_lo = 0.0, d1_hi = 0.0;
    double d2_lo = 0.0, d2_hi = 0.0;
};

std::vector<Stencil3> build_stencils(const std::vector<double>& z) {
    const std::size_t m = z.size();
    std::vector<Stencil3> st(m);
    for (std::size_t i = 0; i < m; ++i) {
        Stencil3& s = st[i];
        if (i == 0 || i + 1 == m) {
            // One-sided: quadratic through the three end points.
            const bool left = (i == 0);
            const std::size_t a = left ? 1 : m - 2;
            const std::size_t b = left ? 2 : m - 3;
            const double h1 = std::abs(z[a] - z[i]);
            const double h2 = std::abs(z[b] - z[a]);
            s.lo = a;
            s.hi = b;
            const double sign = left ? 1.0 : -1.0;
            s.d1_lo = sign * (h1 + h2) / (h1 * h2);
            s.d1_hi = sign * -h1 / (h2 * (h1 + h2));
            // f'' of the quadratic through the three end points is constant:
            //   2[(f_b - f_a)/h2 - (f_a - f_i)/h1]/(h1+h2),
            // rewritten against the center value f_i.
            s.d2_lo = -2.0 * (1.0 / h1 + 1.0 / h2) / (h1 + h2);
            s.d2_hi = 2.0 / (h2 * (h1 + h2));
        } else {
            const double h1 = z[i] - z[i - 1];
            const double h2 = z[i + 1] - z[i];
            s.lo = i - 1;
            s.hi = i + 1;
            s.d1_lo = -h2 / (h1 * (h1 + h2));
            s.d1_hi = h1 / (h2 * (h1 + h2));
            s.d2_lo = 2.0 / (h1 * (h1 + h2));
            s.d2_hi = 2.0 / (h2 * (h1 + h2));
        }
    }
    return st;
}

double apply_d1(const Stencil3& s, const std::vector<double>& f,
                std::size_t i) {
    return s.d1_lo * (f[s.lo] - f[i]) + s.d1_hi * (f[s.hi] - f[i]);
}

double apply_d2(const Stencil3& s, const std::vector<double>& f,
                std::size_t i) {
    return s.d2_lo * (f[s.lo] - f[i]) + s.d2_hi * (f[s.hi] - f[i]);
}

// Chain factors from z-derivatives to t-derivatives (t = z^n):
//   dphi/dt      = phi_z * z^{1-n}/n
//   d^2phi/dt^2  = z^{2-2n}/n^2 * (phi_zz + (1-n) phi_z / z).
struct ChainFactors {
    double a1;  // dphi/dt = a1 * phi_z
    double b1;  // d^2phi/dt^2 = b1 * phi_z + b2 * phi_zz
    double b2;
};

ChainFactors chain_at(int n, double z) {
    const double zn1 = std::pow(z, 1.0 - n);
    ChainFactors cf;
    cf.a1 = zn1 / n;
    cf.b2 = zn1 * zn1 / (n * static_cast<double>(n));
    cf.b1 = cf.b2 * (1.0 - n) / z;
    return cf;
}

void check_same_grid(const RadialMetricState& state,
                     const RadialFunction& phi) {
    if (phi.grid() != state.grid() || phi.size() != state.A.size()) {
        throw std::invalid_argument(
            "potential must be sampled on the state's grid");
    }
}

// Pointwise derivatives of the determinant ratio with respect to the
// composite coefficients, evaluated at the composite state:
//   dF/dA = -P H' / z^{n-1},   dF/dB = -n H,
// with P = 1 + n z^{n-1} B_c and H = sum_j binom(n-1,j) c_j (z+A_c)^{n-1-j}.
void ratio_derivatives(const RadialMetricState& composite,
                       std::vector<double>* dF_dA,
                       std::vector<double>* dF_dB) {
    const int n = composite.n;
    const auto& z = composite.grid()->z();
    const std::size_t m = z.size();
    std::vector<double> binom(static_cast<std::size_t>(n), 1.0);
    for (std::size_t j = 1; j < binom.size(); ++j) {
        binom[j] = binom[j - 1] * (n - static_cast<double>(j)) / j;
    }
    dF_dA->resize(m);
    dF_dB->resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        const double zi = z[i];
        const double zn1 = std::pow(zi, n - 1.0);
        const double x = zi + composite.A[i];
        double H = 0.0, Hp = 0.0;
        for (int j = n - 1; j >= 0; --j) {
            const double cj =
                (j == 0) ? 1.0
                         : binom[static_cast<std::size_t>(j)] *
                               composite.c[static_cast<std::size_t>(j - 1)];
            const double p = std::pow(x, n - 1.0 - j);
            H += cj * p;
            if (j < n - 1) Hp += cj * (n - 1.0 - j) * p / x;
        }
        const double P = 1.0 + n * zn1 * composite.B[i];
        (*dF_dA)[i] = -P * Hp / zn1;
        (*dF_dB)[i] = -static_cast<double>(n) * H;
    }
}

double interior_max(const std::vector<double>& r) {
    double m = 0.0;
    for (std::size_t i = 1; i + 1 < r.size(); ++i) {
        m = std::max(m, std::abs(r[i]));
    }
    return m;
}

// Tridiagonal solve (Thomas algorithm), diagonals indexed by row.
std::vector<double> solve_tridiagonal(std::vector<double> sub,
                                      std::vector<double> diag,
                                      std::vector<double> sup,
                                      std::vector<double> rhs) {
    const std::size_t m = diag.size();
    for (std::size_t i = 1; i < m; ++i) {
        const double w = sub[i] / diag[i - 1];
        diag[i] -= w * sup[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    std::vector<double> x(m);
    x[m - 1] = rhs[m - 1] / diag[m - 1];
    for (std::size_t i = m - 1; i-- > 0;) {
        x[i] = (rhs[i] - sup[i] * x[i + 1]) / diag[i];
    }
    return x;
}

}  // namespace

RadialMetricState restrict_to_window(const RadialMetricState& state,
                                     double z_min, double z_max) {
    const auto& z = state.grid()->z();
    std::vector<double> zw;
    std::vector<double> aw, bw;
    for (std::size_t i = 0; i < z.size(); ++i) {
        if (z[i] < z_min || z[i] > z_max) continue;
        zw.push_back(z[i]);
        aw.push_back(state.A[i]);
        bw.push_back(state.B[i]);
    }
    if (zw.size() < 8) {
        throw std::invalid_argument(
            "window [" + std::to_string(z_min) + ", " + std::to_string(z_max) +
            "] contains fewer than 8 grid points");
    }
    auto grid = std::make_shared<RadialGrid>(state.n, std::move(zw));
    RadialMetricState out;
    out.n = state.n;
    out.c = state.c;
    out.A = RadialFunction(grid, std::move(aw));
    out.B = RadialFunction(grid, std::move(bw));
    return out;
}

RadialMetricState compose_with_potential(const RadialMetricState& state,
                                         const RadialFunction& phi) {
    check_same_grid(state, phi);
    const auto& z = state.grid()->z();
    const auto st = build_stencils(z);
    RadialMetricState out = state;
    for (std::size_t i = 0; i < z.size(); ++i) {
        const auto cf = chain_at(state.n, z[i]);
        const double p1 = apply_d1(st[i], phi.values(), i);
        const double p2 = apply_d2(st[i], phi.values(), i);
        out.A[i] += cf.a1 * p1;
        out.B[i] += cf.b1 * p1 + cf.b2 * p2;
    }
    return out;
}

RadialFunction ma_residual(const RadialMetricState& state,
                           const RadialFunction& phi) {
    return ma_ratio(compose_with_potential(state, phi));
}

std::vector<double> linearized_residual(const RadialMetricState& state,
                                        const RadialFunction& phi,
                                        const RadialFunction& v) {
    check_same_grid(state, phi);
    check_same_grid(state, v);
    const auto composite = compose_with_potential(state, phi);
    std::vector<double> dF_dA, dF_dB;
    ratio_derivatives(composite, &dF_dA, &dF_dB);
    const auto& z = state.grid()->z();
    const auto st = build_stencils(z);
    std::vector<double> out(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) {
        const auto cf = chain_at(state.n, z[i]);
        const double v1 = apply_d1(st[i], v.values(), i);
        const double v2 = apply_d2(st[i], v.values(), i);
        out[i] = dF_dA[i] * cf.a1 * v1 +
                 dF_dB[i] * (cf.b1 * v1 + cf.b2 * v2);
    }
    return out;
}

NewtonResult newton_solve(const RadialMetricState& state,
                          const NewtonConfig& config) {
    if (config.z_min < 1.0 || config.z_max <= config.z_min) {
        throw std::invalid_argument(
            "newton_solve: window must satisfy 1 <= z_min < z_max");
    }
    if (!(config.tolerance > 0.0) || config.max_iterations < 1) {
        throw std::invalid_argument(
            "newton_solve: tolerance must be positive and at least one "
            "iteration allowed");
    }

    NewtonResult res;
    res.state = restrict_to_window(state, config.z_min, config.z_max);
    const auto& grid = res.state.grid();
    const auto& z = grid->z();
    const std::size_t m = z.size();
    const auto st = build_stencils(z);

    RadialFunction phi = RadialFunction::zero(grid);
    RadialMetricState composite = res.state;  // phi = 0
    RadialFunction F = ma_ratio(composite);
    double res_max = interior_max(F.values());
    res.trace.residual.push_back(res_max);

    for (int iter = 0; iter < config.max_iterations; ++iter) {
        if (res_max < config.tolerance) {
            res.trace.converged = true;
            break;
        }

        // Assemble the tridiagonal exact Jacobian on the interior unknowns
        // phi_1 .. phi_{m-2}.
        std::vector<double> dF_dA, dF_dB;
        ratio_derivatives(composite, &dF_dA, &dF_dB);
        const std::size_t k = m - 2;
        std::vector<double> sub(k, 0.0), diag(k, 0.0), sup(k, 0.0), rhs(k);
        for (std::size_t i = 1; i + 1 < m; ++i) {
            const auto cf = chain_at(res.state.n, z[i]);
            const Stencil3& s = st[i];
            // Coefficients of (phi_lo - phi_i) and (phi_hi - phi_i).
            const double w_lo = dF_dA[i] * cf.a1 * s.d1_lo +
                                dF_dB[i] * (cf.b1 * s.d1_lo + cf.b2 * s.d2_lo);
            const double w_hi = dF_dA[i] * cf.a1 * s.d1_hi +
                                dF_dB[i] * (cf.b1 * s.d1_hi + cf.b2 * s.d2_hi);
            const std::size_t r = i - 1;
            diag[r] = -(w_lo + w_hi);
            if (s.lo >= 1) sub[r] = w_lo;           // phi_0 = 0 is dropped
            if (s.hi <= m - 2) sup[r] = w_hi;       // phi_{m-1} = 0 likewise
            rhs[r] = -F[i];
        }
        const auto delta = solve_tridiagonal(std::move(sub), std::move(diag),
                                             std::move(sup), std::move(rhs));

        double step_sup = 0.0;
        for (double d : delta) step_sup = std::max(step_sup, std::abs(d));

        // Backtracking: halve until the composite stays positive and the
        // interior residual actually drops.
        double alpha = 1.0;
        bool accepted = false;
        for (int h = 0; h <= config.max_halvings; ++h) {
            RadialFunction cand = phi;
            for (std::size_t i = 1; i + 1 < m; ++i) {
                cand[i] += alpha * delta[i - 1];
            }
            auto cand_state = compose_with_potential(res.state, cand);
            if (positivity_ok(cand_state)) {
                auto Fc = ma_ratio(cand_state);
                const double cand_max = interior_max(Fc.values());
                if (cand_max <= (1.0 - 0.25 * alpha) * res_max) {
                    phi = std::move(cand);
                    composite = std::move(cand_state);
                    F = std::move(Fc);
                    res_max = cand_max;
                    res.trace.step_norm.push_back(alpha * step_sup);
                    res.trace.damping.push_back(alpha);
                    res.trace.residual.push_back(res_max);
                    accepted = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        if (!accepted) break;  // damping exhausted; trace tells the story
        if (res_max < config.tolerance) {
            res.trace.converged = true;
            break;
        }
    }

    res.phi = std::move(phi);
    res.residual = std::move(F);
    return res;
}

PhiDecayReport phi_decay_report(const RadialMetricState& state,
                                const RadialFunction& phi, double fit_lo,
                                double fit_hi) {
    check_same_grid(state, phi);
    const auto& z = state.grid()->z();
    const auto st = build_stencils(z);
    const int n = state.n;

    std::vector<double> xs, phis, metrics;
    for (std::size_t i = 0; i < z.size(); ++i) {
        if (z[i] < fit_lo || z[i] > fit_hi) continue;
        const auto cf = chain_at(n, z[i]);
        const double p1 = apply_d1(st[i], phi.values(), i);
        const double p2 = apply_d2(st[i], phi.values(), i);
        const double dt1 = cf.a1 * p1;             // shear contribution
        const double dt2 = cf.b1 * p1 + cf.b2 * p2;  // fiber contribution
        xs.push_back(z[i]);
        phis.push_back(phi[i]);
        metrics.push_back(std::max(std::abs(dt1) / z[i],
                                   n * std::pow(z[i], n - 1.0) *
                                       std::abs(dt2)));
    }
    if (xs.size() < 2) {
        throw std::runtime_error(
            "phi_decay_report: fit window too short to measure anything");
    }

    PhiDecayReport out;
    out.phi = make_decay_report(0, -2.0, xs, phis);
    out.metric = make_decay_report(1, -(n + 2.0), xs, metrics);

    const auto composite = compose_with_potential(state, phi);
    auto close = metric_closeness(composite);
    std::vector<double> cs;
    cs.reserve(xs.size());
    for (std::size_t i = 0; i < z.size(); ++i) {
        if (z[i] < fit_lo || z[i] > fit_hi) continue;
        cs.push_back(close[i]);
    }
    out.closeness = fit_power_law_protocol(xs, cs);
    return out;
}

}  // namespace calabi
