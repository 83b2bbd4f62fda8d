#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <vector>

#include "calabi/special_functions.h"
#include "doctest.h"

using namespace calabi;

// Reference values below were frozen from an independent multiprecision
// implementation (direct function evaluation at 30 digits).

TEST_CASE("Gamma: classical values, poles, reflection, recurrence") {
    CHECK(gamma_fn(1.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(gamma_fn(0.5) ==
          doctest::Approx(1.7724538509055160).epsilon(1e-13));
    CHECK(gamma_fn(-1.0 / 3.0) ==
          doctest::Approx(-4.0623538182792013).epsilon(1e-12));
    CHECK_THROWS(gamma_fn(0.0));
    CHECK_THROWS(gamma_fn(-2.0));
    for (double x : {0.1, 0.37, 0.62, 0.83}) {
        const double lhs = gamma_fn(x) * gamma_fn(1.0 - x);
        const double rhs = 3.14159265358979323846 / std::sin(3.14159265358979323846 * x);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }
    for (double x : {-1.7, -0.4, 0.3, 1.9, 4.2}) {
        CHECK(gamma_fn(x + 1.0) ==
              doctest::Approx(x * gamma_fn(x)).epsilon(1e-12));
    }
    CHECK(gamma_sign(-1.0 / 3.0) == -1);
    CHECK(gamma_sign(-1.5) == 1);
    CHECK(std::exp(log_abs_gamma(-1.0 / 3.0)) ==
          doctest::Approx(4.0623538182792013).epsilon(1e-12));
}

TEST_CASE("Bessel K from the representation: anchors and symmetry") {
    // K_{1/2}(1) = sqrt(pi/2) e^{-1}.
    CHECK(bessel_K(0.5, 1.0) ==
          doctest::Approx(0.46106850444789456).epsilon(1e-12));
    CHECK(std::exp(log_bessel_K_scaled(1.0 / 3.0, 2.5)) ==
          doctest::Approx(0.77410657879006354).epsilon(1e-11));
    CHECK(std::exp(log_bessel_K_scaled(2.0 / 3.0, 7.0)) ==
          doctest::Approx(0.47991213585441933).epsilon(1e-11));
    CHECK(std::exp(log_bessel_K_scaled(0.25, 0.05)) ==
          doctest::Approx(3.7716847827191392).epsilon(1e-11));
    CHECK(std::exp(log_bessel_K_scaled(0.5, 50.0)) ==
          doctest::Approx(0.17724538509055160).epsilon(1e-11));
    // Even in the order.
    CHECK(bessel_K(1.0 / 3.0, 2.0) ==
          doctest::Approx(bessel_K(-1.0 / 3.0, 2.0)).epsilon(1e-12));
    CHECK_THROWS(bessel_K(0.5, 0.01));  // below supported range
}

TEST_CASE("Bessel I from the representation: anchors and regime bounds") {
    // I_{1/2}(1) = sqrt(2/pi) sinh(1).
    CHECK(bessel_I(0.5, 1.0) ==
          doctest::Approx(0.93767488824548765).epsilon(1e-11));
    CHECK(std::exp(log_bessel_I_scaled(1.0 / 3.0, 2.5)) ==
          doctest::Approx(0.26056440002871932).epsilon(1e-11));
    CHECK_THROWS(bessel_I(-1.5, 1.0));

    // Small-argument regime: I_nu(y) <= C(nu) y^nu on (0, 1].
    const double nu = 1.0 / 3.0;
    double cmax = 0.0;
    for (double y : {0.05, 0.1, 0.3, 0.6, 1.0}) {
        cmax = std::max(cmax, bessel_I(nu, y) / std::pow(y, nu));
    }
    CHECK(cmax < 5.0);
    // Growth regime: I_nu(y) >= C^{-1} e^y / sqrt(y) on [1, 50].
    double rmin = 1e300, rmax = 0.0;
    for (double y = 1.0; y <= 50.0; y += 7.0) {
        const double r =
            std::exp(log_bessel_I_scaled(nu, y)) * std::sqrt(y);
        rmin = std::min(rmin, r);
        rmax = std::max(rmax, r);
    }
    CHECK(rmin > 0.05);
    CHECK(rmax < 20.0);
}

TEST_CASE("K derivative combination: anchor, sign, envelope, FD agreement") {
    CHECK(bessel_K_prime_over_n(2, 2.0) ==
          doctest::Approx(-0.14992221496007681).epsilon(1e-10));
    for (double y : {1.0, 3.0, 10.0, 30.0}) {
        CHECK(bessel_K_prime_over_n(3, y) < 0.0);
        // Envelope C^{-1} e^{-y}/sqrt(y) < -K' < C e^{-y}/sqrt(y).
        const double ratio = -bessel_K_prime_over_n(3, y) /
                             (std::exp(-y) / std::sqrt(y));
        CHECK(ratio > 0.05);
        CHECK(ratio < 20.0);
    }
    // Central difference of K matches the closed-form derivative combination.
    const double y = 4.0, h = 1e-4;
    const double fd =
        (bessel_K(1.0 / 3.0, y + h) - bessel_K(1.0 / 3.0, y - h)) / (2 * h);
    CHECK(bessel_K_prime_over_n(3, y) ==
          doctest::Approx(fd).epsilon(1e-6));
}

TEST_CASE("scaled-I cache matches direct values across all regimes") {
    const auto& cache = scaled_bessel_I_cache(-1.0 / 3.0);
    struct Anchor {
        double y, log_value;
    };
    const Anchor anchors[] = {
        {1e-5, 3.7655306067333677},        // below-range asymptotic
        {0.37, -0.060117235456519629},     // table interior
        {123.0, -3.3244638075013083},      // table interior
        {54321.0, -6.3702703405284811},    // table interior
        {3.0e7, -9.5272925007030726},      // table interior (upper end)
        {2.5e9, -11.738716817587178},      // above-range asymptotic
    };
    for (const auto& a : anchors) {
        CHECK(cache.log_scaled(a.y) ==
              doctest::Approx(a.log_value).epsilon(5e-11));
    }
    // Consistency with the adaptive evaluation at random points.
    for (double y : {0.002, 0.9, 17.0, 4321.0}) {
        CHECK(cache.log_scaled(y) ==
              doctest::Approx(log_bessel_I_scaled(-1.0 / 3.0, y))
                  .epsilon(1e-10));
    }
}

namespace {

struct KummerCase {
    int n;
    double lambda;
    int j;
    double z;
    double log_psi;
    double log_phi;
};

// Frozen multiprecision references for both quadrature paths.
const KummerCase kKummerCases[] = {
    {3, 2.0, 1, 1.5, -4.8767545592928049, 0.70986538879142360},   // Q = 0
    {3, 7.5, 2, 1.2, -6.0088821187902120, 1.6991742916818936},    // Q = 7/12
    {3, 40.0, 1, 2.0, -47.570185731349772, 15.780025864110193},   // Q large
    {3, 2.0, 1, 10.0, -1006.9090863970748, 2.6057353681415693},   // |y|=1000
    {2, 0.7, 1, 3.0, -10.382983966912662, 0.38900826782089020},   // Q < 0
    {3, 0.0, 1, 2.0, -8.7181160707262126, -1.3423308042856428},   // Q = -2/3
};

}  // namespace

TEST_CASE("confluent pair matches frozen references on both branches") {
    for (const auto& c : kKummerCases) {
        auto p = KummerParams::from_mode(c.n, c.lambda, c.j);
        const double y = -static_cast<double>(c.j) * std::pow(c.z, c.n);
        CHECK(log_psi_flat(p, y) == doctest::Approx(c.log_psi).epsilon(5e-10));
        CHECK(log_phi_sharp(p, y) == doctest::Approx(c.log_phi).epsilon(5e-10));
    }
}

TEST_CASE("confluent pair parameter consistency and domain checks") {
    auto p = KummerParams::from_mode(3, 2.0, 1);
    CHECK(p.alpha == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(p.Q == doctest::Approx(p.alpha - p.beta - 1.0).epsilon(1e-15));
    CHECK(p.gamma_n == doctest::Approx(0.5 + 1.0 / 3.0).epsilon(1e-15));
    CHECK_THROWS(log_psi_flat(p, -0.5));   // y must be <= -1
    CHECK_THROWS(KummerParams::from_mode(3, 1.0, 0));
    CHECK_THROWS(KummerParams::from_mode(1, 1.0, 1));
}

TEST_CASE("psi_flat is positive and decreasing in -y") {
    auto p = KummerParams::from_mode(3, 2.0, 1);
    double prev = 1e300;
    for (double Y : {2.0, 4.0, 8.0, 16.0, 32.0}) {
        const double v = psi_flat(p, -Y);
        CHECK(v > 0.0);
        CHECK(v < prev);
        prev = v;
    }
    CHECK(phi_sharp(p, -3.0) > 0.0);
}

TEST_CASE("laplace critical points and values") {
    auto c = laplace_critical(3.0, 5.0 / 6.0, -4.0);
    CHECK(c.t0 == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(c.F_t0 == doctest::Approx(-5.2958368660043291).epsilon(1e-13));
    CHECK(c.u0 == doctest::Approx(3.1015867021530819).epsilon(1e-13));
    CHECK(c.G_u0 == doctest::Approx(10.521251173965951).epsilon(1e-13));
    auto z = laplace_critical(0.0, 5.0 / 6.0, -4.0);
    CHECK(z.t0 == 0.0);
    CHECK(z.F_t0 == 0.0);
    CHECK_THROWS(laplace_critical(3.0, 5.0 / 6.0, 1.0));
}

TEST_CASE("lemma envelopes hold with moderate constants on both branches") {
    // Q <= 1 branch: C^{-1} <= psi/shape <= 1 (upper constant is exactly 1).
    for (const auto& c : {kKummerCases[0], kKummerCases[3], kKummerCases[5]}) {
        auto p = KummerParams::from_mode(c.n, c.lambda, c.j);
        const double y = -static_cast<double>(c.j) * std::pow(c.z, c.n);
        auto env = psi_flat_envelope(p, y);
        const double lp = log_psi_flat(p, y);
        CHECK(lp <= env.log_hi + 1e-9);
        CHECK(lp >= env.log_lo - std::log(20.0));
        auto envp = phi_sharp_envelope(p, y);
        const double lf = log_phi_sharp(p, y);
        CHECK(lf <= envp.log_hi + std::log(20.0));
        CHECK(lf >= envp.log_lo - std::log(20.0));
    }
    // Q >= 1 branch.
    {
        const auto& c = kKummerCases[2];
        auto p = KummerParams::from_mode(c.n, c.lambda, c.j);
        const double y = -std::pow(c.z, c.n);
        auto env = psi_flat_envelope(p, y);
        const double lp = log_psi_flat(p, y);
        CHECK(lp <= env.log_hi + std::log(20.0));
        CHECK(lp >= env.log_lo - std::log(20.0));
        auto envp = phi_sharp_envelope(p, y);
        const double lf = log_phi_sharp(p, y);
        CHECK(lf <= envp.log_hi + std::log(20.0));
        CHECK(lf >= envp.log_lo - std::log(20.0));
    }
}
