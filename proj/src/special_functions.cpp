#include "calabi/special_functions.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace calabi {

namespace {

constexpr double kPi = std::numbers::pi;

bool is_nonpositive_integer(double x) {
    return x <= 0.0 && std::abs(x - std::round(x)) < 1e-13;
}

// log cosh(x) without overflow.
double log_cosh(double x) {
    const double a = std::abs(x);
    return a + std::log1p(std::exp(-2.0 * a)) - std::numbers::ln2;
}

}  // namespace

// --- Gamma -------------------------------------------------------------------

double gamma_fn(double x) {
    if (is_nonpositive_integer(x)) {
        throw std::domain_error("gamma_fn: pole at non-positive integer");
    }
    return std::tgamma(x);
}

double log_abs_gamma(double x) {
    if (is_nonpositive_integer(x)) {
        throw std::domain_error("log_abs_gamma: pole at non-positive integer");
    }
    return std::lgamma(x);
}

int gamma_sign(double x) {
    if (is_nonpositive_integer(x)) {
        throw std::domain_error("gamma_sign: pole at non-positive integer");
    }
    if (x > 0.0) return 1;
    // Reflection: sign(Gamma(x)) = sign(sin(pi x)) for x < 0.
    return std::sin(kPi * x) >= 0.0 ? 1 : -1;
}

// --- Bessel ------------------------------------------------------------------

double log_bessel_K_scaled(double nu, double y, const QuadratureOptions& opt) {
    if (!(y > 0.0)) throw std::domain_error("bessel_K: need y > 0");
    nu = std::abs(nu);  // K is even in the order
    // Truncation point T: the integrand exp(-y(cosh t - 1) + log cosh(nu t))
    // is below e^{-55} past T, certifying the dropped tail.
    double T = std::acosh(1.0 + (60.0 + 25.0 * nu) / y);
    while (y * (std::cosh(T) - 1.0) - nu * T < 55.0) T *= 1.25;
    auto f = [&](double t) {
        return std::exp(-y * (std::cosh(t) - 1.0) + log_cosh(nu * t));
    };
    auto r = integrate(f, 0.0, T, opt);
    if (!r.converged) {
        throw std::runtime_error("bessel_K: quadrature did not converge");
    }
    return std::log(r.value);
}

double log_bessel_I_scaled(double nu, double y, const QuadratureOptions& opt) {
    if (!(y > 0.0)) throw std::domain_error("bessel_I: need y > 0");
    if (!(nu > -1.0)) throw std::domain_error("bessel_I: need nu > -1");
    // e^{-y} I_nu(y) = (1/pi) Int_0^pi e^{-y(1-cos a)} cos(nu a) da
    //                - (sin(nu pi)/pi) e^{-2y} Int_0^inf e^{-y(cosh t -1) - nu t} dt
    auto f1 = [&](double a) {
        return std::exp(-y * (1.0 - std::cos(a))) * std::cos(nu * a);
    };
    // For large y the mass sits in a spike near a = 0 that a panel over the
    // whole of [0, pi] would step over; shrink the domain to where the
    // exponential exceeds e^{-60-25|nu|} (the dropped tail is certified
    // below that).
    const double cut = (60.0 + 25.0 * std::abs(nu)) / y;
    const double a_max = cut >= 2.0 ? kPi : std::acos(1.0 - cut);
    auto r1 = integrate(f1, 0.0, a_max, opt);
    if (!r1.converged) {
        throw std::runtime_error("bessel_I: quadrature did not converge");
    }
    double value = r1.value / kPi;

    const double s = std::sin(nu * kPi);
    if (std::abs(s) > 1e-14 && 2.0 * y < 700.0) {
        double T = std::acosh(1.0 + (60.0 + 25.0 * std::abs(nu)) / y);
        while (y * (std::cosh(T) - 1.0) + nu * T < 55.0) T *= 1.25;
        auto f2 = [&](double t) {
            return std::exp(-y * (std::cosh(t) - 1.0) - nu * t);
        };
        auto r2 = integrate(f2, 0.0, T, opt);
        if (!r2.converged) {
            throw std::runtime_error("bessel_I: quadrature did not converge");
        }
        value -= s / kPi * std::exp(-2.0 * y) * r2.value;
    }
    if (!(value > 0.0)) {
        throw std::runtime_error(
            "bessel_I: cancellation exhausted the representation's accuracy");
    }
    return std::log(value);
}

double bessel_K(double nu, double y) {
    if (y < 0.05) {
        throw std::domain_error(
            "bessel_K: y below supported range (representation used only for "
            "y >= 0.05)");
    }
    return std::exp(-y + log_bessel_K_scaled(nu, y));
}

double bessel_I(double nu, double y) {
    return std::exp(y + log_bessel_I_scaled(nu, y));
}

double bessel_K_prime_over_n(int n, double y) {
    if (n < 2) throw std::domain_error("bessel_K_prime_over_n: need n >= 2");
    const double np = static_cast<double>(n);
    return -0.5 * (bessel_K((np + 1.0) / np, y) + bessel_K((np - 1.0) / np, y));
}

// --- Scaled-I cache ------------------------------------------------------------

ScaledBesselICache::ScaledBesselICache(double nu) : nu_(nu) {
    if (!(nu > -1.0)) {
        throw std::domain_error("ScaledBesselICache: need nu > -1");
    }
    constexpr std::size_t kCount = 4001;
    log_lo_ = std::log(1e-6);
    log_hi_ = std::log(1e8);
    step_ = (log_hi_ - log_lo_) / static_cast<double>(kCount - 1);
    table_.resize(kCount);
    QuadratureOptions opt;
    opt.abs_tol = 1e-16;
    opt.rel_tol = 1e-13;
    for (std::size_t i = 0; i < kCount; ++i) {
        const double y = std::exp(log_lo_ + step_ * static_cast<double>(i));
        table_[i] = log_bessel_I_scaled(nu_, y, opt);
    }
}

double ScaledBesselICache::log_scaled(double y) const {
    if (!(y > 0.0)) throw std::domain_error("log_scaled: need y > 0");
    const double x = std::log(y);
    if (x < log_lo_) {
        // I_nu(y) ~ (y/2)^nu / Gamma(nu+1) * (1 + y^2/(4(nu+1)) + ...)
        return nu_ * std::log(0.5 * y) - std::lgamma(nu_ + 1.0) - y +
               std::log1p(y * y / (4.0 * (nu_ + 1.0)) +
                          y * y * y * y / (32.0 * (nu_ + 1.0) * (nu_ + 2.0)));
    }
    if (x > log_hi_) {
        // Ihat ~ 1/sqrt(2 pi y) * (1 - a1/y + a2/y^2), a1 = (4nu^2-1)/8.
        const double m = 4.0 * nu_ * nu_;
        const double a1 = (m - 1.0) / 8.0;
        const double a2 = (m - 1.0) * (m - 9.0) / 128.0;
        return -0.5 * std::log(2.0 * kPi * y) + std::log1p(-a1 / y + a2 / (y * y));
    }
    // 6-point Lagrange interpolation on the uniform log grid.
    const auto count = table_.size();
    auto i0 = static_cast<std::ptrdiff_t>((x - log_lo_) / step_) - 2;
    i0 = std::clamp<std::ptrdiff_t>(i0, 0,
                                    static_cast<std::ptrdiff_t>(count) - 6);
    double result = 0.0;
    for (std::ptrdiff_t a = i0; a < i0 + 6; ++a) {
        double basis = 1.0;
        const double xa = log_lo_ + step_ * static_cast<double>(a);
        for (std::ptrdiff_t b = i0; b < i0 + 6; ++b) {
            if (b == a) continue;
            const double xb = log_lo_ + step_ * static_cast<double>(b);
            basis *= (x - xb) / (xa - xb);
        }
        result += basis * table_[static_cast<std::size_t>(a)];
    }
    return result;
}

const ScaledBesselICache& scaled_bessel_I_cache(double nu) {
    static std::mutex mu;
    static std::map<long long, std::unique_ptr<const ScaledBesselICache>> cache;
    long long key = 0;
    static_assert(sizeof(key) == sizeof(nu));
    std::memcpy(&key, &nu, sizeof(key));
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(key);
    if (it == cache.end()) {
        it = cache.emplace(key, std::make_unique<ScaledBesselICache>(nu)).first;
    }
    return *it->second;
}

// --- Confluent pair -------------------------------------------------------------

KummerParams KummerParams::from_mode(int n, double lambda, int j) {
    if (n < 2) throw std::domain_error("KummerParams: need n >= 2");
    if (j < 1) throw std::domain_error("KummerParams: need j >= 1");
    if (lambda < 0.0) throw std::domain_error("KummerParams: need lambda >= 0");
    KummerParams p;
    p.n = n;
    const double np = static_cast<double>(n);
    p.alpha = 1.0 - 1.0 / np;
    p.beta = (np - 1.0) / (2.0 * np) - lambda / (np * static_cast<double>(j));
    p.Q = p.alpha - p.beta - 1.0;
    p.gamma_n = 0.5 + 1.0 / np;
    return p;
}

namespace {

void check_kummer_domain(const KummerParams& p, double y) {
    if (!(y <= -1.0)) {
        throw std::domain_error("confluent pair: need y <= -1");
    }
    if (!(p.Q > -1.0)) {
        throw std::domain_error("confluent pair: need Q > -1");
    }
}

}  // namespace

double log_psi_flat_shifted(const KummerParams& p, double y) {
    check_kummer_domain(p, y);
    const double Y = -y;
    const double Q = p.Q;
    const double lg = std::lgamma(Q + 1.0);
    // Normalized integrand of J/Gamma(Q+1) with J = Int e^{-w} w^Q (1+w/Y)^{beta-1} dw;
    // bounded by ~1/sqrt(2 pi Q) at the peak for large Q, <= 1 always.
    auto log_integrand = [&](double w) {
        return -w + Q * std::log(w) - lg + (p.beta - 1.0) * std::log1p(w / Y);
    };
    QuadratureOptions opt;
    opt.abs_tol = 1e-15;
    opt.rel_tol = 1e-12;
    double total = 0.0;
    if (Q <= 0.5) {
        // w in [0,1] with the w = x^{1/(Q+1)} substitution that absorbs the
        // integrable w^Q endpoint behavior exactly.
        const double a = 1.0 / (Q + 1.0);
        auto f1 = [&](double x) {
            const double w = std::pow(x, a);
            return std::exp(-w + (p.beta - 1.0) * std::log1p(w / Y));
        };
        total += integrate(f1, 0.0, 1.0, opt).value * a * std::exp(-lg);
        auto f2 = [&](double w) { return std::exp(log_integrand(w)); };
        auto tail = integrate_to_infinity(f2, 1.0, 0.5, opt);
        if (!tail.converged) {
            throw std::runtime_error("psi_flat: tail quadrature failed");
        }
        total += tail.value;
    } else {
        const double s = std::sqrt(Q + 1.0);
        const double lo = std::max(0.0, Q - 16.0 * s - 10.0);
        const double hi = Q + 16.0 * s + 20.0;
        auto f = [&](double w) { return std::exp(log_integrand(w)); };
        total += integrate(f, lo, hi, opt).value;
        const double rate = 0.9 * (1.0 - Q / hi);
        auto tail = integrate_to_infinity(f, hi, rate, opt);
        if (!tail.converged) {
            throw std::runtime_error("psi_flat: tail quadrature failed");
        }
        total += tail.value;
        // Mass below lo (when lo > 0) is bounded by lo * exp(log_integrand(lo))
        // < e^{-100} relative by the window construction.
    }
    if (!(total > 0.0)) {
        throw std::runtime_error("psi_flat: non-positive quadrature value");
    }
    return -(Q + 1.0) * std::log(Y) + std::log(total);
}

double log_psi_flat(const KummerParams& p, double y) {
    return y + log_psi_flat_shifted(p, y);
}

double log_phi_sharp(const KummerParams& p, double y) {
    check_kummer_domain(p, y);
    const double Y = -y;
    const double pw = p.alpha - 2.0 * p.beta;  // = 2 lambda / (n j) >= 0
    const double nu = p.alpha - 1.0;           // in (-1, 0)
    const auto& icache = scaled_bessel_I_cache(nu);
    // After u = sqrt(s) and extraction of e^{Y} (which cancels e^{y}):
    //   integral = e^{Y} * 2 Int_0^inf exp(h(u)) du,
    //   h(u) = -(u-Y)^2/Y + pw log u + log Ihat_nu(2u).
    auto h = [&](double u) {
        return -(u - Y) * (u - Y) / Y + pw * std::log(u) +
               icache.log_scaled(2.0 * u);
    };
    // Algebraic peak of the first two terms; the Ihat factor only nudges it.
    const double ustar = 0.5 * (Y + std::sqrt(Y * Y + 2.0 * pw * Y));
    const double escale = h(ustar);
    const double w0 = std::sqrt(0.5 * Y) + 1.0;
    double lo = ustar, hi = ustar;
    for (int i = 0; i < 400 && lo > 0.0 && h(lo) > escale - 80.0; ++i) {
        lo = std::max(0.0, lo - w0);
    }
    for (int i = 0; i < 400 && h(hi) > escale - 80.0; ++i) hi += w0;

    QuadratureOptions opt;
    opt.abs_tol = 1e-15;
    opt.rel_tol = 1e-12;
    const double singular_power = 2.0 * p.Q + 1.0;  // integrand ~ u^{2Q+1} at 0
    double total = 0.0;
    if (lo <= 0.0 && singular_power < 0.0) {
        // [0,1]: u = x^{1/(2Q+2)} absorbs the endpoint power exactly.
        const double a = 1.0 / (singular_power + 1.0);
        auto f1 = [&](double x) {
            const double u = std::pow(x, a);
            const double e = h(u) - singular_power * std::log(u) - escale;
            return std::exp(e);
        };
        total += integrate(f1, 0.0, 1.0, opt).value * a;
        auto f2 = [&](double u) { return std::exp(h(u) - escale); };
        total += integrate(f2, 1.0, hi, opt).value;
    } else {
        auto f = [&](double u) { return std::exp(h(u) - escale); };
        total += integrate(f, std::max(lo, 0.0), hi, opt).value;
    }
    if (!(total > 0.0)) {
        throw std::runtime_error("phi_sharp: non-positive quadrature value");
    }
    return std::lgamma(p.alpha) - std::lgamma(p.Q + 1.0) +
           (p.beta - p.alpha) * std::log(Y) + escale + std::log(2.0 * total);
}

double psi_flat(const KummerParams& p, double y) {
    return std::exp(log_psi_flat(p, y));
}

double phi_sharp(const KummerParams& p, double y) {
    return std::exp(log_phi_sharp(p, y));
}

// --- Laplace-method critical data ---------------------------------------------

LaplaceCritical laplace_critical(double Q, double gamma_n, double y) {
    if (!(y < 0.0)) throw std::domain_error("laplace_critical: need y < 0");
    if (!(Q >= 0.0)) throw std::domain_error("laplace_critical: need Q >= 0");
    const double Y = -y;
    LaplaceCritical out;
    out.t0 = 0.5 * (-1.0 + std::sqrt(1.0 + 4.0 * Q / Y));
    out.F_t0 =
        Q > 0.0 ? y * out.t0 + Q * std::log(out.t0 / (out.t0 + 1.0)) : 0.0;
    out.u0 = 0.5 * std::sqrt(Y) *
             (1.0 + std::sqrt(1.0 + 4.0 * Q / Y + 2.0 * gamma_n / Y));
    out.G_u0 = -out.u0 * out.u0 + 2.0 * std::sqrt(Y) * out.u0 +
               (2.0 * Q + gamma_n) * std::log(out.u0);
    return out;
}

EnvelopePair psi_flat_envelope(const KummerParams& p, double y) {
    const double Y = -y;
    if (p.Q <= 1.0) {
        const double shape = y + (p.beta - p.alpha) * std::log(Y);
        return {shape, shape};
    }
    const auto c = laplace_critical(p.Q, p.gamma_n, y);
    const double base = y + c.F_t0 - std::lgamma(p.Q + 1.0);
    const double np = static_cast<double>(p.n);
    return {base - (0.25 + 0.5 / np) * std::log(p.Q) - std::log(Y),
            base + 0.25 * std::log(p.Q)};
}

EnvelopePair phi_sharp_envelope(const KummerParams& p, double y) {
    const double Y = -y;
    if (p.Q <= 1.0) {
        const double shape = -p.beta * std::log(Y);
        return {shape, shape};
    }
    const auto c = laplace_critical(p.Q, p.gamma_n, y);
    const double np = static_cast<double>(p.n);
    const double base = y + c.G_u0 - std::lgamma(p.Q + 1.0) +
                        (2.0 - np) / (4.0 * np) * std::log(Y);
    return {base - 0.25 * std::log(p.Q), base};
}

}  // namespace calabi
