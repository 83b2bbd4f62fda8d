#include "calabi/acceptance.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "calabi/decay_iteration.h"
#include "calabi/fitting.h"
#include "calabi/grid.h"
#include "calabi/ma_solver.h"
#include "calabi/mode_ode.h"
#include "calabi/model_space.h"
#include "calabi/parallel.h"
#include "calabi/pipeline.h"
#include "calabi/special_functions.h"
#include "calabi/spectral_poisson.h"

namespace calabi {

namespace {

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return std::string(buf);
}

// ---- 1: special-function certification -------------------------------------

CheckResult check_special_functions() {
    CheckResult r{1, "special-function certification", true, ""};

    double worst_envelope = 0.0;
    for (int n : {2, 3, 4}) {
        const double nu = 1.0 / n;
        double k_lo = 1e300, k_hi = 0.0, i_lo = 1e300, i_hi = 0.0;
        for (int s = 0; s <= 120; ++s) {
            const double y = std::exp(std::log(1.0) +
                                      s * (std::log(50.0) / 120.0));
            const double rk =
                std::exp(0.5 * std::log(y) + log_bessel_K_scaled(nu, y));
            const double ri =
                std::exp(0.5 * std::log(y) + log_bessel_I_scaled(nu, y));
            if (!std::isfinite(rk) || !std::isfinite(ri) || rk <= 0.0 ||
                ri <= 0.0) {
                r.passed = false;
                r.detail = "non-finite scaled Bessel ratio at y=" + num(y);
                return r;
            }
            k_lo = std::min(k_lo, rk);
            k_hi = std::max(k_hi, rk);
            i_lo = std::min(i_lo, ri);
            i_hi = std::max(i_hi, ri);
        }
        worst_envelope =
            std::max({worst_envelope, k_hi / k_lo, i_hi / i_lo});
    }
    const bool env_ok = worst_envelope <= 20.0;

    // K_{1/2}(1) = sqrt(pi/2) e^{-1}.
    const double anchor = bessel_K(0.5, 1.0);
    const double exact = std::sqrt(std::acos(-1.0) / 2.0) * std::exp(-1.0);
    const double anchor_rel = std::abs(anchor - exact) / exact;
    const bool anchor_ok = anchor_rel <= 1e-10;

    r.passed = env_ok && anchor_ok;
    r.detail = "envelope ratio " + num(worst_envelope) +
               " (<= 20), half-order anchor rel err " + num(anchor_rel) +
               " (<= 1e-10)";
    return r;
}

// ---- 2: Wronskian constancy -------------------------------------------------

CheckResult check_wronskians() {
    CheckResult r{2, "Wronskian constancy", true, ""};
    const int n = 3;
    double worst = 0.0;
    for (double lambda : {1.0, 2.5, 7.0}) {
        auto pair = FundamentalPair::zero_mode(n, lambda);
        const double expected = pair.expected_wronskian();
        for (double z : {1.0, 2.0, 3.5, 5.0}) {
            const double w = pair.numeric_wronskian(z);
            worst = std::max(worst,
                             std::abs(w - expected) / std::abs(expected));
        }
    }
    for (double lambda : {1.0, 2.5, 7.0}) {
        for (int j : {1, 2, 3}) {
            auto pair = FundamentalPair::nonzero_mode(n, lambda, j);
            const double expected = pair.expected_wronskian();
            for (double z : {1.0, 2.0, 3.5, 5.0}) {
                const double w = pair.numeric_wronskian(z);
                worst = std::max(worst,
                                 std::abs(w - expected) / std::abs(expected));
            }
        }
    }
    r.passed = worst <= 1e-5;
    r.detail = "worst relative deviation " + num(worst) +
               " (<= 1e-5) over a 3x3 (lambda, j) grid plus zero modes";
    return r;
}

// ---- 3: Green solves vs the finite-difference oracle ------------------------

CheckResult check_green_vs_bvp() {
    CheckResult r{3, "Green solve vs BVP oracle", true, ""};
    const int n = 3;
    auto grid = RadialGrid::log_uniform(n, 1.0, 12.0, 700);
    const double deltas[5] = {-1.5, -2.0, -2.5, -3.0, -4.0};
    double worst = 0.0;

    struct Branch {
        double lambda;
        int j;
    };
    for (const Branch b : {Branch{1.0, 0}, Branch{2.0, 1}}) {
        auto pair = (b.j == 0)
                        ? FundamentalPair::zero_mode(n, b.lambda)
                        : FundamentalPair::nonzero_mode(n, b.lambda, b.j);
        pair.prepare(1.0, 12.0);
        for (double d : deltas) {
            std::function<double(double)> vf = [d](double s) {
                return std::pow(s, d);
            };
            auto v = RadialFunction::sample(grid, vf);
            auto sol = green_solve(pair, v, d, &vf);

            const double z_hi = 6.0;
            auto bvp = brute_force_bvp(n, Mode{b.lambda, b.j}, vf, 1.0, z_hi,
                                       sol.u.eval(1.0), sol.u.eval(z_hi),
                                       1000);
            double scale = 0.0, err = 0.0;
            for (std::size_t i = 0; i < bvp.size(); ++i) {
                scale = std::max(scale, std::abs(bvp[i]));
            }
            for (std::size_t i = 10; i + 10 < bvp.size(); i += 7) {
                err = std::max(err, std::abs(bvp[i] -
                                             sol.u.eval(bvp.grid()->z(i))));
            }
            worst = std::max(worst, err / scale);
        }
    }
    r.passed = worst <= 1e-6;
    r.detail = "worst interior relative L-inf " + num(worst) +
               " (<= 1e-6) over 5 sources x 2 branches";
    return r;
}

// ---- 4: weighted-sup bound shapes -------------------------------------------

CheckResult check_bound_shapes() {
    CheckResult r{4, "weighted-sup bound shapes", true, ""};
    const int n = 3;
    auto grid = RadialGrid::log_uniform(n, 1.0, 40.0, 900);
    const double delta = -2.0;
    std::function<double(double)> vf = [](double s) { return 1.0 / (s * s); };
    auto v = RadialFunction::sample(grid, vf);

    auto stability = [](const std::vector<double>& vals, double* spread) {
        double lo = 1e300, hi = 0.0;
        for (double x : vals) {
            if (!std::isfinite(x) || x <= 0.0) return false;
            lo = std::min(lo, x);
            hi = std::max(hi, x);
        }
        *spread = hi / lo;
        // "stable within +-20%": max/min <= 1.2/0.8.
        return *spread <= 1.5;
    };

    std::string detail;
    bool ok = true;

    std::vector<double> zero_vals;
    for (double lambda : {1.0, 2.0, 4.0, 8.0, 16.0}) {
        auto pair = FundamentalPair::zero_mode(n, lambda);
        pair.prepare(1.0, 40.0);
        zero_vals.push_back(green_solve(pair, v, delta, &vf)
                                .weighted_sup_lambda);
    }
    double spread = 0.0;
    ok &= stability(zero_vals, &spread);
    detail += "zero-mode spread " + num(spread);

    for (int j : {1, 2, 3}) {
        std::vector<double> vals;
        for (double lambda : {1.0, 2.0, 4.0, 8.0, 16.0}) {
            auto pair = FundamentalPair::nonzero_mode(n, lambda, j);
            pair.prepare(1.0, 40.0);
            vals.push_back(green_solve(pair, v, delta, &vf)
                               .weighted_sup_full);
        }
        ok &= stability(vals, &spread);
        detail += ", j=" + std::to_string(j) + " spread " + num(spread);
    }
    r.passed = ok;
    r.detail = detail + " (each <= 1.5 as lambda doubles across 1..16)";
    return r;
}

// ---- shared pipeline context for 5-8 ----------------------------------------

struct PipelineContext {
    GridPtr grid;
    RadialMetricState initial;
    IterationResult res;
    std::vector<DecayReport> reports;
    double lambda = 0.0;
    EndIntegral post_integral;
    PowerLawFit order_before, order_after;
    RadialMetricState adjusted;
    FinalStepResult fin;
    NewtonResult newton;
};

PowerLawFit window_protocol_fit(const RadialFunction& f, double lo,
                                double hi) {
    std::vector<double> x, y;
    const auto& z = f.grid()->z();
    for (std::size_t i = 0; i < z.size(); ++i) {
        if (z[i] < lo || z[i] > hi) continue;
        x.push_back(z[i]);
        y.push_back(f[i]);
    }
    return fit_power_law_protocol(x, y);
}

PipelineContext build_context(const ExperimentConfig& cfg) {
    PipelineContext ctx;
    ctx.grid = RadialGrid::log_uniform(cfg.n, cfg.z_min, cfg.z_max,
                                       cfg.grid_points);
    ctx.initial = make_initial_state(cfg.n, cfg.c, ctx.grid);
    ctx.res = iterate(ctx.initial, cfg.iteration_steps);
    ctx.reports = decay_reports(ctx.res, cfg.fit_lo, cfg.fit_hi);
    ctx.lambda = compatibility_lambda_refined(ctx.res.state, cfg.base_volume,
                                              cfg.fiber_normalization);
    ctx.adjusted = apply_linear_z(ctx.res.state, ctx.lambda);
    ctx.post_integral = end_volume_integral(ctx.adjusted);
    ctx.order_before =
        window_protocol_fit(ctx.res.F.back(), cfg.fit_lo, cfg.fit_hi);
    ctx.order_after =
        window_protocol_fit(ma_ratio(ctx.adjusted), cfg.fit_lo, cfg.fit_hi);
    ctx.fin = final_step(ctx.adjusted, cfg.fit_lo, cfg.fit_hi);
    ctx.newton = newton_solve(ctx.fin.state, cfg.newton);
    return ctx;
}

// ---- 5: iteration decay rates ------------------------------------------------

CheckResult check_iteration_decay(const PipelineContext& ctx) {
    CheckResult r{5, "iteration decay rates", true, ""};
    r.detail = "fitted orders";
    for (std::size_t j = 0; j < ctx.reports.size(); ++j) {
        const auto& rep = ctx.reports[j];
        const double target = rep.target;
        bool ok;
        if (rep.fit.measurable) {
            // Two-sided for the first two stages; beyond that the schedule
            // is a guarantee, so overshooting (faster decay) passes.
            ok = rep.fit.exponent <= target + 0.2 &&
                 (j > 1 || rep.fit.exponent >= target - 0.2);
            r.detail += " " + num(rep.fit.exponent);
        } else {
            ok = rep.weighted_sup <= 1e-6;
            r.detail += " (floor)";
        }
        r.passed &= ok;
    }
    r.detail += " vs targets -1..-" +
                std::to_string(ctx.reports.size()) + " (band 0.2)";
    return r;
}

// ---- 6: compatibility adjustment ----------------------------------------------

CheckResult check_compatibility(const PipelineContext& ctx) {
    CheckResult r{6, "compatibility adjustment", true, ""};
    const bool integral_ok =
        std::abs(ctx.post_integral.value) <= 10.0 * ctx.post_integral.tolerance;
    const double shift = (ctx.order_before.measurable &&
                          ctx.order_after.measurable)
                             ? ctx.order_after.exponent -
                                   ctx.order_before.exponent
                             : 0.0;
    const bool order_ok = std::abs(shift) <= 0.2;
    r.passed = integral_ok && order_ok;
    r.detail = "lambda " + num(ctx.lambda) + ", post end-integral " +
               num(ctx.post_integral.value) + " (10x tol " +
               num(10.0 * ctx.post_integral.tolerance) + "), order shift " +
               num(shift) + " (<= 0.2)";
    return r;
}

// ---- 7: final decay order ------------------------------------------------------

CheckResult check_final_decay(const PipelineContext& ctx, int n) {
    CheckResult r{7, "final decay order", true, ""};
    const double gate = -(n + 2.0) + 0.2;
    if (ctx.fin.report.fit.measurable) {
        r.passed = ctx.fin.report.fit.exponent <= gate;
        r.detail = "fitted order " + num(ctx.fin.report.fit.exponent) +
                   " (<= " + num(gate) + "), weighted sup " +
                   num(ctx.fin.report.weighted_sup);
    } else {
        r.passed = ctx.fin.report.weighted_sup <= 1e-6;
        r.detail = "below measurement floor, weighted sup " +
                   num(ctx.fin.report.weighted_sup);
    }
    return r;
}

// ---- 8: Newton Monge-Ampere ------------------------------------------------------

CheckResult check_newton(const PipelineContext& ctx,
                         const ExperimentConfig& cfg) {
    CheckResult r{8, "Newton Monge-Ampere solve", true, ""};
    const auto& tr = ctx.newton.trace;
    const std::size_t steps = tr.step_norm.size();
    const bool solved =
        tr.converged && tr.residual.back() < 1e-10 && steps <= 12;

    // Quadratic contraction certificate on the full-step iterates.
    double kappa = 0.0;
    bool kappa_ok = true;
    for (std::size_t k = 0; k + 1 < tr.residual.size() && k < tr.damping.size();
         ++k) {
        if (tr.damping[k] != 1.0) continue;
        const double a = tr.residual[k], b = tr.residual[k + 1];
        if (a < 0.1 && b > 5e-16) {
            kappa = std::max(kappa, b / (a * a));
        }
    }
    kappa_ok = std::isfinite(kappa);

    // phi == 0 recovered exactly on the unperturbed model.
    auto model = make_initial_state(
        cfg.n, std::vector<double>(static_cast<std::size_t>(cfg.n - 1), 0.0),
        ctx.grid);
    auto mr = newton_solve(model, cfg.newton);
    bool model_exact = mr.trace.converged;
    for (std::size_t i = 0; i < mr.phi.size(); ++i) {
        model_exact &= (mr.phi[i] == 0.0);
    }

    r.passed = solved && kappa_ok && model_exact;
    r.detail = "residual " + num(tr.residual.back()) + " in " +
               std::to_string(steps) + " steps (< 1e-10, <= 12), kappa " +
               num(kappa) + ", model potential " +
               (model_exact ? "exactly zero" : "NOT zero");
    return r;
}

// ---- 9: geometry checks -----------------------------------------------------------

CheckResult check_geometry(const ExperimentConfig& cfg) {
    CheckResult r{9, "model geometry", true, ""};
    ModelParams params;
    params.n = cfg.n;
    params.base_volume = cfg.base_volume;
    params.fiber_normalization = cfg.fiber_normalization;

    // Delta z = 0 with finite-difference derivatives.  The grid stays
    // moderate on purpose: u'' of the linear profile is pure rounding noise
    // amplified by 1/h^2, so over-refining manufactures error.
    auto grid = RadialGrid::log_uniform(cfg.n, 1.0, 50.0, 1000);
    auto uz = RadialFunction::sample(grid, [](double z) { return z; });
    auto lap = laplacian_separated(params, uz, Mode{0.0, 0});
    const double harmonic = lap.sup_norm();
    const bool harmonic_ok = harmonic <= 1e-10;

    // Volume growth against geodesic distance.
    std::vector<double> log_d, log_v;
    for (int s = 0; s <= 60; ++s) {
        const double z =
            10.0 * std::exp(s * (std::log(200.0 / 10.0) / 60.0));
        log_d.push_back(std::log(radial_distance(params, 1.0, z)));
        log_v.push_back(std::log(volume_of_shell(params, 1.0, z)));
    }
    const double vol_slope = linear_fit(log_d, log_v).second;
    const double vol_expected = 2.0 * cfg.n / (cfg.n + 1.0);
    const bool vol_ok = std::abs(vol_slope - vol_expected) <= 0.05;

    // Weyl growth of the surrogate spectrum.
    const auto weyl = weyl_growth_fit(cfg.n, 8, 8, 1.0, 50, 500);
    const double weyl_expected = 2.0 / (2.0 * cfg.n - 1.0);
    const bool weyl_ok =
        weyl.measurable && std::abs(weyl.exponent - weyl_expected) <= 0.08;

    r.passed = harmonic_ok && vol_ok && weyl_ok;
    r.detail = "sup|Delta z| " + num(harmonic) + " (<= 1e-10), volume slope " +
               num(vol_slope) + " (" + num(vol_expected) +
               " +- 0.05), Weyl slope " + num(weyl.exponent) + " (" +
               num(weyl_expected) + " +- 0.08)";
    return r;
}

// ---- 10: determinism ---------------------------------------------------------------

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

CheckResult check_determinism(const ExperimentConfig& cfg) {
    CheckResult r{10, "byte-identical reruns", true, ""};
    ExperimentConfig a = cfg, b = cfg;
    a.out_dir = cfg.out_dir + "/det_serial";
    b.out_dir = cfg.out_dir + "/det_parallel";

    const std::size_t saved = worker_threads();
    set_worker_threads(1);
    auto ma = run_pipeline(a);
    set_worker_threads(8);
    auto mb = run_pipeline(b);
    set_worker_threads(saved);

    if (ma.csv_files != mb.csv_files) {
        r.passed = false;
        r.detail = "runs emitted different file sets";
        return r;
    }
    std::size_t compared = 0;
    for (const auto& name : ma.csv_files) {
        const auto ta = read_file(std::filesystem::path(a.out_dir) / name);
        const auto tb = read_file(std::filesystem::path(b.out_dir) / name);
        if (ta.empty() || ta != tb) {
            r.passed = false;
            r.detail = "file " + name + " differs between thread counts";
            return r;
        }
        ++compared;
    }
    // The manifests must agree too (same hash, same stage outcomes).
    if (manifest_to_json(ma) != manifest_to_json(mb)) {
        r.passed = false;
        r.detail = "manifests differ between thread counts";
        return r;
    }
    r.detail = std::to_string(compared) +
               " files byte-identical across 1 and 8 worker threads";
    return r;
}

}  // namespace

std::vector<CheckResult> acceptance_checks(const ExperimentConfig& cfg,
                                           std::vector<int> ids) {
    cfg.validate();
    if (ids.empty()) ids = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    std::sort(ids.begin(), ids.end());

    std::optional<PipelineContext> ctx;
    auto context = [&]() -> const PipelineContext& {
        if (!ctx) ctx = build_context(cfg);
        return *ctx;
    };

    std::vector<CheckResult> out;
    for (int id : ids) {
        switch (id) {
            case 1: out.push_back(check_special_functions()); break;
            case 2: out.push_back(check_wronskians()); break;
            case 3: out.push_back(check_green_vs_bvp()); break;
            case 4: out.push_back(check_bound_shapes()); break;
            case 5: out.push_back(check_iteration_decay(context())); break;
            case 6: out.push_back(check_compatibility(context())); break;
            case 7: out.push_back(check_final_decay(context(), cfg.n)); break;
            case 8: out.push_back(check_newton(context(), cfg)); break;
            case 9: out.push_back(check_geometry(cfg)); break;
            case 10: out.push_back(check_determinism(cfg)); break;
            default:
                throw std::invalid_argument(
                    "acceptance check ids must lie in 1..10");
        }
    }
    return out;
}

}  // namespace calabi
