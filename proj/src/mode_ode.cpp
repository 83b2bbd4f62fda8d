#include "calabi/mode_ode.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "calabi/fitting.h"
#include "calabi/linalg.h"
#include "calabi/special_functions.h"

namespace calabi {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Signed log-space value s * e^{lg}: all integral accumulation happens in
// this representation because D and G individually overflow doubles well
// inside the working range while every quantity of interest (their
// products with the cumulative integrals) stays moderate.
struct SLog {
    double lg = kNegInf;
    double sgn = 0.0;
};

SLog slog_add(const SLog& a, const SLog& b) {
    if (a.sgn == 0.0) return b;
    if (b.sgn == 0.0) return a;
    const SLog& big = a.lg >= b.lg ? a : b;
    const SLog& small = a.lg >= b.lg ? b : a;
    const double inner =
        1.0 + (small.sgn * big.sgn) * std::exp(small.lg - big.lg);
    if (!(inner > 0.0)) return SLog{};  // exact cancellation
    return SLog{big.lg + std::log(inner), big.sgn};
}

// 8-point Gauss-Legendre rule on [-1, 1].
constexpr double kGL8Nodes[4] = {
    0.18343464249564980494, 0.52553240991632898582,
    0.79666647741362673959, 0.96028985649753623168};
constexpr double kGL8Weights[4] = {
    0.36268378337836198297, 0.31370664587788728734,
    0.22238103445337447054, 0.10122853629037625915};

}  // namespace

// --- FundamentalPair ------------------------------------------------------------

FundamentalPair FundamentalPair::zero_mode(int n, double lambda) {
    if (n < 2) throw std::domain_error("fundamental pair: need n >= 2");
    if (!(lambda > 0.0)) {
        throw std::domain_error("fundamental pair: zero mode needs lambda > 0");
    }
    FundamentalPair p;
    p.n_ = n;
    p.lambda_ = lambda;
    p.j_ = 0;
    return p;
}

FundamentalPair FundamentalPair::nonzero_mode(int n, double lambda, int j) {
    FundamentalPair p;
    p.n_ = n;
    p.lambda_ = lambda;
    p.j_ = j;
    // Validates n >= 2, j >= 1, lambda >= 0.
    (void)KummerParams::from_mode(n, lambda, j);
    return p;
}

double FundamentalPair::exponent(double z) const {
    if (j_ == 0) {
        return 2.0 * std::sqrt(lambda_ / n_) * std::pow(z, 0.5 * n_);
    }
    return 0.5 * j_ * std::pow(z, n_);
}

double FundamentalPair::decay_rate(double z) const {
    if (j_ == 0) {
        return std::sqrt(n_ * lambda_) * std::pow(z, 0.5 * n_ - 1.0);
    }
    return 0.5 * j_ * n_ * std::pow(z, n_ - 1.0);
}

double FundamentalPair::sigma_d_exact(double z) const {
    if (j_ == 0) {
        const double y = exponent(z);
        return 0.5 * std::log(z) + log_bessel_K_scaled(1.0 / n_, y);
    }
    const auto p = KummerParams::from_mode(n_, lambda_, j_);
    const double y = -static_cast<double>(j_) * std::pow(z, n_);
    // log D + j z^n / 2 = log psi_flat - y  (slowly varying).
    return log_psi_flat_shifted(p, y);
}

double FundamentalPair::sigma_g_exact(double z) const {
    if (j_ == 0) {
        const double y = exponent(z);
        return 0.5 * std::log(z) + log_bessel_I_scaled(1.0 / n_, y);
    }
    const auto p = KummerParams::from_mode(n_, lambda_, j_);
    const double y = -static_cast<double>(j_) * std::pow(z, n_);
    return log_phi_sharp(p, y);  // log G - j z^n / 2
}

void FundamentalPair::prepare(double z_lo, double z_hi, std::size_t points) {
    if (!(z_lo > 0.0) || !(z_hi > z_lo)) {
        throw std::domain_error("fundamental pair: bad tabulation range");
    }
    points = std::max<std::size_t>(points, 16);
    table_lo_ = std::log(z_lo);
    table_hi_ = std::log(z_hi);
    table_dx_ = (table_hi_ - table_lo_) / static_cast<double>(points - 1);
    table_sigma_d_.assign(points, 0.0);
    table_sigma_g_.assign(points, 0.0);
    for (std::size_t i = 0; i < points; ++i) {
        const double z = std::exp(table_lo_ + table_dx_ * i);
        table_sigma_d_[i] = sigma_d_exact(z);
        table_sigma_g_[i] = sigma_g_exact(z);
    }
}

double FundamentalPair::sigma_interp(const std::vector<double>& table,
                                     double z) const {
    const double x = std::log(z);
    const std::size_t count = table.size();
    const double pos = (x - table_lo_) / table_dx_;
    long base = static_cast<long>(std::floor(pos)) - 2;
    base = std::max<long>(0, std::min<long>(base, count - 6));
    double value = 0.0;
    for (int k = 0; k < 6; ++k) {
        const double xk = table_lo_ + table_dx_ * (base + k);
        double lk = 1.0;
        for (int m = 0; m < 6; ++m) {
            if (m == k) continue;
            const double xm = table_lo_ + table_dx_ * (base + m);
            lk *= (x - xm) / (xk - xm);
        }
        value += lk * table[base + k];
    }
    return value;
}

double FundamentalPair::log_D(double z) const {
    const double x = std::log(z);
    if (prepared() && x >= table_lo_ && x <= table_hi_) {
        return sigma_interp(table_sigma_d_, z) - exponent(z);
    }
    return sigma_d_exact(z) - exponent(z);
}

double FundamentalPair::log_G(double z) const {
    const double x = std::log(z);
    if (prepared() && x >= table_lo_ && x <= table_hi_) {
        return sigma_interp(table_sigma_g_, z) + exponent(z);
    }
    return sigma_g_exact(z) + exponent(z);
}

double FundamentalPair::expected_wronskian() const {
    if (j_ == 0) return -0.5 * n_;
    const auto p = KummerParams::from_mode(n_, lambda_, j_);
    return gamma_fn(p.alpha - 1.0) / gamma_fn(p.alpha - p.beta) *
           std::pow(static_cast<double>(j_), 1.0 / n_);
}

double FundamentalPair::numeric_wronskian(double z, double relative_step) const {
    const double h = relative_step * z;
    std::vector<double> nodes(5);
    for (int k = 0; k < 5; ++k) nodes[k] = z + (k - 2) * h;
    // Keep the window inside the domain of the confluent pair (z^n >= 1/j).
    if (j_ >= 1) {
        const double zmin =
            std::pow(1.0 / static_cast<double>(j_), 1.0 / n_) * (1.0 + 1e-12);
        if (nodes[0] < zmin) {
            const double shift = zmin - nodes[0];
            for (auto& s : nodes) s += shift;
        }
    }
    auto w = fd_weights(z, nodes, 1);
    double ld_prime = 0.0, lg_prime = 0.0;
    for (int k = 0; k < 5; ++k) {
        ld_prime += w[1][k] * log_D(nodes[k]);
        lg_prime += w[1][k] * log_G(nodes[k]);
    }
    // W = D'G - DG' = D G (logD' - logG'); log(DG) stays moderate.
    return std::exp(log_D(z) + log_G(z)) * (ld_prime - lg_prime);
}

// --- Green-representation solver ------------------------------------------------

namespace {

// log |W| for the Green prefactor n/W (W < 0 in both branches).
double log_abs_wronskian(const FundamentalPair& pair) {
    if (pair.fiber_j() == 0) return std::log(0.5 * pair.n());
    const auto p =
        KummerParams::from_mode(pair.n(), pair.lambda_value(), pair.fiber_j());
    return log_abs_gamma(p.alpha - 1.0) - std::lgamma(p.alpha - p.beta) +
           std::log(static_cast<double>(pair.fiber_j())) / pair.n();
}

// Integral of e^{log_f(s)} * v(s) over [a, b] by Gauss-Legendre panels sized
// so the exponent varies by at most ~1 per panel.
SLog weighted_panel(const std::function<double(double)>& log_f,
                    const std::function<double(double)>& v, double rate_bound,
                    int n, double a, double b) {
    const double width = b - a;
    std::size_t nsub = static_cast<std::size_t>(
        std::ceil((rate_bound + (n + 4.0) / a) * width));
    nsub = std::max<std::size_t>(1, std::min<std::size_t>(nsub, 20000));
    const double sub_w = width / static_cast<double>(nsub);
    // Collect the 8 log-magnitudes and signs per subpanel, then combine.
    SLog total;
    for (std::size_t k = 0; k < nsub; ++k) {
        const double lo = a + sub_w * k;
        const double center = lo + 0.5 * sub_w;
        const double half = 0.5 * sub_w;
        double logs[8];
        double signs[8];
        double top = kNegInf;
        for (int q = 0; q < 4; ++q) {
            for (int pm = 0; pm < 2; ++pm) {
                const int idx = 2 * q + pm;
                const double s =
                    center + (pm == 0 ? -1.0 : 1.0) * half * kGL8Nodes[q];
                const double vv = v(s);
                if (vv == 0.0 || !std::isfinite(vv)) {
                    logs[idx] = kNegInf;
                    signs[idx] = 0.0;
                    continue;
                }
                logs[idx] = log_f(s) + std::log(std::abs(vv)) +
                            std::log(kGL8Weights[q] * half);
                signs[idx] = vv > 0.0 ? 1.0 : -1.0;
                top = std::max(top, logs[idx]);
            }
        }
        if (top == kNegInf) continue;
        double acc = 0.0;
        for (int idx = 0; idx < 8; ++idx) {
            if (signs[idx] == 0.0) continue;
            acc += signs[idx] * std::exp(logs[idx] - top);
        }
        if (acc == 0.0) continue;
        total = slog_add(
            total, SLog{top + std::log(std::abs(acc)), acc > 0.0 ? 1.0 : -1.0});
    }
    return total;
}

}  // namespace

GreenSolution green_solve(FundamentalPair& pair, const RadialFunction& v,
                          double source_decay,
                          const std::function<double(double)>* v_exact) {
    const auto& grid = v.grid();
    if (!grid) throw std::invalid_argument("green_solve: source has no grid");
    const int n = grid->n();
    if (n != pair.n()) {
        throw std::invalid_argument("green_solve: grid/pair dimension mismatch");
    }
    const std::size_t count = grid->size();
    const double z_back = grid->z_back();
    if (!pair.prepared()) pair.prepare(grid->z_front(), z_back);

    std::function<double(double)> v_eval;
    if (v_exact != nullptr) {
        v_eval = *v_exact;
    } else {
        v_eval = [&v](double s) { return v.eval(s); };
    }
    auto log_g_weight = [&](double s) {
        return pair.log_G(s) + (n - 1.0) * std::log(s);
    };
    auto log_d_weight = [&](double s) {
        return pair.log_D(s) + (n - 1.0) * std::log(s);
    };

    // Upward cumulative integral of G s^{n-1} v from the left edge.
    std::vector<SLog> up(count);
    for (std::size_t i = 0; i + 1 < count; ++i) {
        const double a = grid->z(i), b = grid->z(i + 1);
        const double rate =
            std::max(pair.decay_rate(a), pair.decay_rate(b));
        up[i + 1] = slog_add(
            up[i], weighted_panel(log_g_weight, v_eval, rate, n, a, b));
    }

    // Downward cumulative integral of D s^{n-1} v from infinity, seeded with
    // the first-order tail estimate beyond the grid end.
    std::vector<SLog> down(count);
    SLog tail;
    const double v_end = v[count - 1];
    if (v_end != 0.0) {
        tail.lg = pair.log_D(z_back) + (n - 1.0) * std::log(z_back) +
                  std::log(std::abs(v_end)) - std::log(pair.decay_rate(z_back));
        tail.sgn = v_end > 0.0 ? 1.0 : -1.0;
    }
    down[count - 1] = tail;
    for (std::size_t i = count - 1; i-- > 0;) {
        const double a = grid->z(i), b = grid->z(i + 1);
        const double rate =
            std::max(pair.decay_rate(a), pair.decay_rate(b));
        down[i] = slog_add(
            down[i + 1], weighted_panel(log_d_weight, v_eval, rate, n, a, b));
    }

    // u = (n/W) [D * up + G * down]; n/W < 0.
    const double log_c = std::log(static_cast<double>(n)) -
                         log_abs_wronskian(pair);
    std::vector<double> u_values(count, 0.0);
    for (std::size_t i = 0; i < count; ++i) {
        const double z = grid->z(i);
        SLog first{pair.log_D(z) + up[i].lg, up[i].sgn};
        SLog second{pair.log_G(z) + down[i].lg, down[i].sgn};
        SLog sum = slog_add(first, second);
        if (sum.sgn != 0.0) {
            u_values[i] = -sum.sgn * std::exp(log_c + sum.lg);
        }
    }

    GreenSolution out;
    out.u = RadialFunction(grid, std::move(u_values));
    out.mode = Mode{pair.lambda_value(), pair.fiber_j()};
    out.source_decay = source_decay;
    // First-order Laplace closure of the tail has relative error of order
    // (algebraic derivative scale)/(rate * z); propagate it to u at z_N.
    const double closure_rel =
        (2.0 * n + std::abs(source_decay)) /
        (z_back * pair.decay_rate(z_back));
    out.tail_remainder_bound =
        tail.sgn == 0.0
            ? 0.0
            : 2.0 * closure_rel *
                  std::exp(log_c + pair.log_G(z_back) + tail.lg);

    // Pointwise ODE residual from grid finite differences.
    const auto d2 = out.u.dzz();
    const double jn = static_cast<double>(pair.fiber_j()) * n;
    double worst = 0.0;
    for (std::size_t i = 2; i + 2 < count; ++i) {
        const double z = grid->z(i);
        const double q = n * pair.lambda_value() * std::pow(z, n - 2.0) +
                         0.25 * jn * jn * std::pow(z, 2.0 * n - 2.0);
        const double w = n * std::pow(z, n - 1.0) * v[i];
        const double r = d2[i] - q * out.u[i] - w;
        const double scale = std::abs(q * out.u[i]) + std::abs(w) + 1e-300;
        worst = std::max(worst, std::abs(r) / scale);
    }
    out.max_relative_residual = worst;

    // Weighted sup shapes reported for the decay bookkeeping.
    double sup_lambda = 0.0, sup_full = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        const double z = grid->z(i);
        const double zs = std::pow(z, source_decay + 1.0);
        const double au = std::abs(out.u[i]);
        sup_lambda = std::max(sup_lambda, au * pair.lambda_value() / zs);
        const double full =
            n * pair.lambda_value() + 0.25 * jn * jn * std::pow(z, n);
        sup_full = std::max(sup_full, au * full / zs);
    }
    out.weighted_sup_lambda = sup_lambda;
    out.weighted_sup_full = sup_full;
    return out;
}

// --- Fiber mode (q = 0) ---------------------------------------------------------

RadialFunction fiber_mode_solve(const RadialFunction& v, double source_decay) {
    const auto& grid = v.grid();
    if (!grid) throw std::invalid_argument("fiber_mode_solve: source has no grid");
    const int n = grid->n();
    const std::size_t count = grid->size();
    const double delta = source_decay;

    std::vector<double> w(count);
    for (std::size_t i = 0; i < count; ++i) {
        w[i] = n * std::pow(grid->z(i), n - 1.0) * v[i];
    }
    auto w_cum = cumulative_integral(grid->z(), w);

    // First antiderivative u' of w: from infinity when the tail converges
    // (delta < -n), else from the left edge.  The closure beyond the grid is
    // the slope-extrapolated tail model, which reduces to the frozen-exponent
    // estimate for pure power sources.  A decay exponent estimated from
    // samples carries noise, and right at the threshold the closure divides
    // by a vanishing exponent gap, so anchoring at infinity additionally
    // demands a 0.2 margin past the threshold; the left-edge anchor is valid
    // for every decay rate, it merely keeps an integration constant.
    const double margin = 0.2;
    std::vector<double> up(count);
    if (delta < -static_cast<double>(n) - margin) {
        const double tail =
            integral_tail(grid->z(), w, n - 1.0 + delta).value;
        for (std::size_t i = 0; i < count; ++i) {
            up[i] = w_cum[i] - w_cum[count - 1] - tail;
        }
    } else {
        up = w_cum;
    }

    // Second antiderivative: from infinity when u' is integrable there
    // (delta < -n-1), else from the left edge.
    auto up_cum = cumulative_integral(grid->z(), up);
    std::vector<double> u(count);
    if (delta < -(n + 1.0) - margin) {
        const double tail = integral_tail(grid->z(), up, n + delta).value;
        for (std::size_t i = 0; i < count; ++i) {
            u[i] = up_cum[i] - up_cum[count - 1] - tail;
        }
    } else {
        u = up_cum;
    }

    RadialFunction out(grid, std::move(u));
    out.set_dz(std::move(up));
    out.set_dzz(std::move(w));
    return out;
}

// --- Finite-difference boundary-value cross-check -------------------------------

RadialFunction brute_force_bvp(int n, const Mode& mode,
                               const std::function<double(double)>& v,
                               double z_lo, double z_hi, double u_lo,
                               double u_hi, std::size_t m) {
    if (m < 8) throw std::invalid_argument("brute_force_bvp: need m >= 8");
    if (!(z_hi > z_lo) || !(z_lo > 0.0)) {
        throw std::invalid_argument("brute_force_bvp: bad interval");
    }
    const std::size_t count = m + 1;
    const double h = (z_hi - z_lo) / static_cast<double>(m);
    std::vector<double> nodes(count);
    for (std::size_t i = 0; i < count; ++i) nodes[i] = z_lo + h * i;

    const double jn = static_cast<double>(mode.j) * n;
    auto q_of = [&](double z) {
        return n * mode.lambda * std::pow(z, n - 2.0) +
               0.25 * jn * jn * std::pow(z, 2.0 * n - 2.0);
    };

    DenseMatrix a(count, count);
    std::vector<double> rhs(count, 0.0);
    a(0, 0) = 1.0;
    rhs[0] = u_lo;
    a(count - 1, count - 1) = 1.0;
    rhs[count - 1] = u_hi;

    // Centered 5-point second-derivative weights (uniform grid).
    const double c5[5] = {-1.0 / 12.0, 16.0 / 12.0, -30.0 / 12.0, 16.0 / 12.0,
                          -1.0 / 12.0};
    for (std::size_t i = 1; i + 1 < count; ++i) {
        const double z = nodes[i];
        if (i >= 2 && i + 2 < count) {
            for (int k = 0; k < 5; ++k) {
                a(i, i + k - 2) += c5[k] / (h * h);
            }
        } else {
            // One-sided 6-point row anchored at the nearer boundary.
            const std::size_t base = i < 2 ? 0 : count - 6;
            std::vector<double> local(nodes.begin() + base,
                                      nodes.begin() + base + 6);
            auto wts = fd_weights(z, local, 2);
            for (int k = 0; k < 6; ++k) {
                a(i, base + k) += wts[2][k];
            }
        }
        a(i, i) -= q_of(z);
        rhs[i] = n * std::pow(z, n - 1.0) * v(z);
    }

    auto solution = solve_dense(a, rhs);
    return RadialFunction(std::make_shared<const RadialGrid>(n, nodes),
                          std::move(solution));
}

}  // namespace calabi
