#include "calabi/fitting.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace calabi {

double measurement_floor() {
    return 1000.0 * std::numeric_limits<double>::epsilon();
}

std::pair<double, double> linear_fit(const std::vector<double>& x,
                                     const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw std::invalid_argument("linear_fit: need >= 2 paired samples");
    }
    const auto n = static_cast<double>(x.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double det = n * sxx - sx * sx;
    if (std::abs(det) < 1e-300) {
        throw std::invalid_argument("linear_fit: degenerate abscissae");
    }
    const double b = (n * sxy - sx * sy) / det;
    const double a = (sy - b * sx) / n;
    return {a, b};
}

namespace {

PowerLawFit fit_in_window(const std::vector<double>& x,
                          const std::vector<double>& f, double lo, double hi) {
    PowerLawFit out;
    out.window_lo = lo;
    out.window_hi = hi;
    const double floor = measurement_floor();
    std::vector<double> lx, lf;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] < lo || x[i] > hi) continue;
        if (!(std::abs(f[i]) > floor)) continue;
        lx.push_back(std::log(x[i]));
        lf.push_back(std::log(std::abs(f[i])));
    }
    out.points = lx.size();
    if (lx.size() < 2) return out;
    const auto [a, b] = linear_fit(lx, lf);
    out.measurable = true;
    out.log_coeff = a;
    out.exponent = b;
    double ss = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        const double r = lf[i] - (a + b * lx[i]);
        ss += r * r;
    }
    out.residual = std::sqrt(ss / static_cast<double>(lx.size()));
    return out;
}

}  // namespace

PowerLawFit fit_power_law(const std::vector<double>& x,
                          const std::vector<double>& f, double window_lo,
                          double window_hi, std::size_t min_points) {
    if (x.size() != f.size()) {
        throw std::invalid_argument("fit_power_law: size mismatch");
    }
    if (x.empty()) throw std::invalid_argument("fit_power_law: empty input");
    PowerLawFit fit = fit_in_window(x, f, window_lo, window_hi);
    // Widen the window toward smaller x until enough measurable points
    // participate (decay means the small-x side is where amplitude lives).
    double lo = window_lo;
    const double lo_min = *std::min_element(x.begin(), x.end());
    while (fit.points < min_points && lo > lo_min * (1.0 + 1e-12)) {
        lo = std::max(lo / 1.1, lo_min);
        fit = fit_in_window(x, f, lo, window_hi);
        fit.widened = true;
    }
    return fit;
}

PowerLawFit fit_power_law_protocol(const std::vector<double>& x,
                                   const std::vector<double>& f,
                                   std::size_t min_points) {
    if (x.empty()) throw std::invalid_argument("fit protocol: empty grid");
    const double lo = *std::min_element(x.begin(), x.end());
    const double hi = *std::max_element(x.begin(), x.end());
    // Upper half in log scale: [sqrt(lo*hi), hi].
    const double mid = std::sqrt(lo * hi);
    return fit_power_law(x, f, mid, hi, min_points);
}

DecayReport make_decay_report(int index, double target,
                              const std::vector<double>& x,
                              const std::vector<double>& f) {
    DecayReport rep;
    rep.index = index;
    rep.target = target;
    rep.fit = fit_power_law_protocol(x, f);
    double sup = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sup = std::max(sup, std::abs(f[i]) * std::pow(x[i], -target));
    }
    rep.weighted_sup = sup;
    return rep;
}

namespace {

// One-term closure: freeze the last sample and integrate g_back (x/x_back)^p.
TailEstimate one_term_tail(double x_back, double g_back, double p) {
    TailEstimate t;
    t.exponent = p;
    if (!(p < -1.05)) {
        t.not_integrable = true;
        return t;
    }
    t.value = -g_back * x_back / (p + 1.0);
    // The single-sample model carries no information about the next
    // correction; distrust it wholesale.
    t.error = std::abs(t.value);
    return t;
}

// Log-log slope of |g| restricted to x in [lo, hi]; returns the slope and the
// geometric-mean abscissa of the participating points via out-parameters.
// Fails when too few samples clear the floor or when the survivors cluster
// in a corner of the window (a slope fitted on a cluster is noise).
bool window_slope(const std::vector<double>& x, const std::vector<double>& g,
                  double lo, double hi, double abs_floor, double* slope,
                  double* center) {
    std::vector<double> lx, lg;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] < lo || x[i] > hi) continue;
        if (!(std::abs(g[i]) > abs_floor)) continue;
        lx.push_back(std::log(x[i]));
        lg.push_back(std::log(std::abs(g[i])));
    }
    if (lx.size() < 5) return false;
    const auto [lx_min, lx_max] = std::minmax_element(lx.begin(), lx.end());
    if (*lx_max - *lx_min < 0.4 * std::log(hi / lo)) return false;
    const auto [a, b] = linear_fit(lx, lg);
    (void)a;
    double mean_lx = 0.0;
    for (double v : lx) mean_lx += v;
    mean_lx /= static_cast<double>(lx.size());
    *slope = b;
    *center = std::exp(mean_lx);
    return true;
}

}  // namespace

double tail_exponent(const std::vector<double>& x,
                     const std::vector<double>& f, double noise_floor) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    if (x.size() != f.size() || x.size() < 2) {
        throw std::invalid_argument("tail_exponent: need >= 2 paired samples");
    }
    const double x_back = x.back();

    // Scale reference: the largest sample in the closure region [x_back/4, ..].
    double local_max = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] < 0.25 * x_back) continue;
        local_max = std::max(local_max, std::abs(f[i]));
    }
    if (local_max == 0.0) return nan;
    const double abs_floor =
        std::max(measurement_floor() * local_max, noise_floor);
    bool pos = false, neg = false;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] < 0.25 * x_back) continue;
        if (std::abs(f[i]) <= abs_floor) continue;
        (f[i] > 0.0 ? pos : neg) = true;
    }
    // A sign change inside the closure region means the samples are not yet
    // in their asymptotic regime.
    if (pos && neg) return nan;

    // Local slopes on [x_back/4, x_back/2] and [x_back/2, x_back],
    // extrapolated linearly in 1/x to the asymptotic exponent.
    double s1 = 0.0, c1 = 0.0, s2 = 0.0, c2 = 0.0;
    const bool ok1 =
        window_slope(x, f, 0.25 * x_back, 0.5 * x_back, abs_floor, &s1, &c1);
    const bool ok2 =
        window_slope(x, f, 0.5 * x_back, x_back, abs_floor, &s2, &c2);
    if (!ok1 || !ok2) return nan;
    const double inv_gap = 1.0 / c1 - 1.0 / c2;
    double p = s2;
    if (inv_gap > 0.0) {
        const double k = (s1 - s2) / inv_gap;
        p = s2 - k / c2;
    }
    // Reject wild extrapolations.
    if (!std::isfinite(p) || std::abs(p - s2) > 3.0) return nan;
    return p;
}

TailEstimate integral_tail(const std::vector<double>& x,
                           const std::vector<double>& g,
                           double fallback_exponent, double noise_floor) {
    if (x.size() != g.size() || x.size() < 2) {
        throw std::invalid_argument("integral_tail: need >= 2 paired samples");
    }
    const double x_back = x.back();
    const double g_back = g.back();

    double local_max = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] < 0.25 * x_back) continue;
        local_max = std::max(local_max, std::abs(g[i]));
    }
    if (local_max == 0.0) {
        TailEstimate t;  // integrand vanishes near the back: tail is zero
        t.exponent = fallback_exponent;
        return t;
    }
    const double abs_floor =
        std::max(measurement_floor() * local_max, noise_floor);

    const double p = tail_exponent(x, g, noise_floor);
    if (!std::isfinite(p) || !(p < -1.05)) {
        return one_term_tail(x_back, g_back, fallback_exponent);
    }

    // Two-term model g = (a + b/x) x^p on the top half, fitted linearly in 1/x.
    std::vector<double> u, yv;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] < 0.5 * x_back) continue;
        if (!(std::abs(g[i]) > abs_floor)) continue;
        u.push_back(1.0 / x[i]);
        yv.push_back(g[i] * std::pow(x[i], -p));
    }
    if (u.size() < 5) return one_term_tail(x_back, g_back, fallback_exponent);
    auto [a, b] = linear_fit(u, yv);
    if (a == 0.0) return one_term_tail(x_back, g_back, fallback_exponent);
    // The 1/x correction must stay a correction over the integration range.
    if (std::abs(b) > 0.5 * std::abs(a) * x_back) b = 0.0;
    double ss = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double r = yv[i] - (a + b * u[i]);
        ss += r * r;
    }
    const double rms = std::sqrt(ss / static_cast<double>(u.size()));

    TailEstimate t;
    t.exponent = p;
    t.extrapolated = true;
    t.value = -a * std::pow(x_back, p + 1.0) / (p + 1.0) -
              b * std::pow(x_back, p) / p;
    t.error = 0.3 * std::abs(t.value) +
              rms * std::pow(x_back, p + 1.0) / std::abs(p + 1.0);
    return t;
}

std::string DecayReport::summary() const {
    std::ostringstream os;
    os << "stage " << index << ": ";
    if (fit.measurable) {
        os << "fitted exponent " << fit.exponent << " (target " << target
           << ", residual " << fit.residual << ", " << fit.points
           << " points on [" << fit.window_lo << ", " << fit.window_hi << "]";
        if (fit.widened) os << ", window widened";
        os << ")";
    } else {
        os << "below measurement floor everywhere in the fit window (target "
           << target << ")";
    }
    os << "; sup |f| z^{" << -target << "} = " << weighted_sup;
    return os.str();
}

}  // namespace calabi
