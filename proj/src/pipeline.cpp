#include "calabi/pipeline.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "calabi/csvio.h"
#include "calabi/decay_iteration.h"
#include "calabi/fitting.h"
#include "calabi/grid.h"
#include "calabi/ma_solver.h"
#include "json.hpp"

namespace calabi {

const char kToolVersion[] = "calab 0.1.0";

namespace {

std::string fmt(const char* pattern, double a, double b = 0.0,
                double c = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), pattern, a, b, c);
    return std::string(buf);
}

// Schedule gate shared by the iterate and final stages: a measurable fit
// must sit within 0.2 of the target from above -- overshooting (faster
// decay) is success, and the first two stages are also bounded from below.
// An unmeasurable fit passes only when the weighted sup certifies that the
// defect sits below the measurement floor on the whole window.
bool decay_gate(const DecayReport& r, bool two_sided, std::string* note) {
    if (r.fit.measurable) {
        const bool upper = r.fit.exponent <= r.target + 0.2;
        const bool lower = !two_sided || r.fit.exponent >= r.target - 0.2;
        *note += fmt(" %.4f", r.fit.exponent);
        return upper && lower;
    }
    *note += " (below floor)";
    return r.weighted_sup <= 1e-6;
}

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

void write_text(const std::string& dir, const std::string& name,
                const std::string& text) {
    const std::filesystem::path p = std::filesystem::path(dir) / name;
    if (p.has_parent_path()) {
        std::filesystem::create_directories(p.parent_path());
    }
    std::ofstream out(p, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open for writing: " + p.string());
    }
    out << text;
}

struct StageIO {
    const ExperimentConfig& cfg;
    RunManifest& manifest;

    void save(const std::string& name, const CsvTable& table) {
        write_csv(cfg.out_dir + "/" + name, table);
        manifest.csv_files.push_back(name);
    }
    void save_text(const std::string& name, const std::string& text) {
        write_text(cfg.out_dir, name, text);
    }
};

}  // namespace

bool RunManifest::all_passed() const {
    if (stages.empty()) return false;
    for (const auto& s : stages) {
        if (!s.ran || !s.passed) return false;
    }
    return true;
}

std::string manifest_to_json(const RunManifest& m) {
    nlohmann::json j;
    j["config_hash"] = m.config_hash;
    j["version"] = m.version;
    j["csv_files"] = m.csv_files;
    j["stages"] = nlohmann::json::array();
    for (const auto& s : m.stages) {
        j["stages"].push_back({{"name", s.name},
                               {"ran", s.ran},
                               {"passed", s.passed},
                               {"detail", s.detail}});
    }
    return j.dump(2) + "\n";
}

RunManifest run_pipeline(const ExperimentConfig& cfg) {
    cfg.validate();
    RunManifest manifest;
    manifest.config_hash = config_hash(cfg);
    manifest.version = kToolVersion;
    StageIO io{cfg, manifest};

    auto grid = RadialGrid::log_uniform(cfg.n, cfg.z_min, cfg.z_max,
                                        cfg.grid_points);
    auto initial = make_initial_state(cfg.n, cfg.c, grid);

    IterationResult res;
    RadialMetricState adjusted;
    FinalStepResult fin;
    bool have_final = false;

    const char* stage_names[] = {"iterate", "compatibility", "final_step",
                                 "newton"};
    std::size_t failed_at = 4;

    for (std::size_t stage = 0; stage < 4; ++stage) {
        StageResult sr;
        sr.name = stage_names[stage];
        if (failed_at < stage) {
            sr.detail = "skipped: earlier stage failed";
            manifest.stages.push_back(sr);
            continue;
        }
        sr.ran = true;
        try {
            switch (stage) {
                case 0: {  // decay-improvement iteration
                    res = iterate(initial, cfg.iteration_steps);
                    auto reports = decay_reports(res, cfg.fit_lo, cfg.fit_hi);

                    CsvTable decay;
                    decay.header.push_back("z");
                    for (std::size_t j = 0; j < res.F.size(); ++j) {
                        decay.header.push_back("F_" + std::to_string(j));
                    }
                    for (std::size_t i = 0; i < grid->size(); ++i) {
                        std::vector<double> row = {grid->z(i)};
                        for (const auto& F : res.F) row.push_back(F[i]);
                        decay.rows.push_back(std::move(row));
                    }
                    io.save("decay.csv", decay);
                    io.save_text("decay.svg",
                                 svg_log_plot(decay, "defect decay |F_j(z)|"));

                    CsvTable corr;
                    corr.header.push_back("z");
                    for (std::size_t j = 0; j < res.u.size(); ++j) {
                        corr.header.push_back("u_" + std::to_string(j + 1));
                        corr.header.push_back("grad_" + std::to_string(j + 1));
                    }
                    for (std::size_t i = 0; i < grid->size(); ++i) {
                        std::vector<double> row = {grid->z(i)};
                        for (std::size_t j = 0; j < res.u.size(); ++j) {
                            row.push_back(res.u[j][i]);
                            row.push_back(res.gradient[j][i]);
                        }
                        corr.rows.push_back(std::move(row));
                    }
                    io.save("corrections.csv", corr);

                    CsvTable rep;
                    rep.header = {"index",     "target",   "exponent",
                                  "residual",  "points",   "window_lo",
                                  "window_hi", "widened",  "weighted_sup",
                                  "measurable"};
                    for (const auto& r : reports) {
                        rep.rows.push_back(
                            {static_cast<double>(r.index), r.target,
                             r.fit.exponent, r.fit.residual,
                             static_cast<double>(r.fit.points),
                             r.fit.window_lo, r.fit.window_hi,
                             r.fit.widened ? 1.0 : 0.0, r.weighted_sup,
                             r.fit.measurable ? 1.0 : 0.0});
                    }
                    io.save("decay_reports.csv", rep);

                    sr.passed = true;
                    sr.detail = "orders";
                    for (std::size_t j = 0; j < reports.size(); ++j) {
                        sr.passed &=
                            decay_gate(reports[j], j <= 1, &sr.detail);
                    }
                    break;
                }
                case 1: {  // compatibility adjustment
                    const auto E0 = end_volume_integral(res.state);
                    const double lam_lin = compatibility_lambda(
                        res.state, cfg.base_volume, cfg.fiber_normalization);
                    const double lam = compatibility_lambda_refined(
                        res.state, cfg.base_volume, cfg.fiber_normalization);
                    adjusted = apply_linear_z(res.state, lam);
                    const auto E1 = end_volume_integral(adjusted);

                    const auto before =
                        window_protocol_fit(res.F.back(), cfg.fit_lo,
                                            cfg.fit_hi);
                    const auto after = window_protocol_fit(
                        ma_ratio(adjusted), cfg.fit_lo, cfg.fit_hi);

                    CsvTable t;
                    t.header = {"lambda_linear", "lambda_refined",
                                "end_before",    "tol_before",
                                "end_after",     "tol_after",
                                "order_before",  "order_after"};
                    t.rows.push_back({lam_lin, lam, E0.value, E0.tolerance,
                                      E1.value, E1.tolerance, before.exponent,
                                      after.exponent});
                    io.save("compatibility.csv", t);

                    const bool integral_ok =
                        std::abs(E1.value) <= 10.0 * E1.tolerance;
                    const bool order_ok =
                        !(before.measurable && after.measurable) ||
                        std::abs(before.exponent - after.exponent) <= 0.2;
                    sr.passed = integral_ok && order_ok;
                    sr.detail =
                        fmt("lambda %.6e, post-integral %.3e", lam, E1.value) +
                        fmt(" (tol %.3e), order shift %.4f", E1.tolerance,
                            (before.measurable && after.measurable)
                                ? after.exponent - before.exponent
                                : 0.0);
                    break;
                }
                case 2: {  // final improvement step
                    fin = final_step(adjusted, cfg.fit_lo, cfg.fit_hi);
                    have_final = true;

                    CsvTable t;
                    t.header = {"z", "F_final", "closeness"};
                    auto close = metric_closeness(fin.state);
                    for (std::size_t i = 0; i < grid->size(); ++i) {
                        t.rows.push_back({grid->z(i), fin.F[i], close[i]});
                    }
                    io.save("final.csv", t);

                    CsvTable rep;
                    rep.header = {"target",   "exponent",     "residual",
                                  "points",   "widened",      "weighted_sup",
                                  "measurable", "closeness_order"};
                    rep.rows.push_back(
                        {fin.report.target, fin.report.fit.exponent,
                         fin.report.fit.residual,
                         static_cast<double>(fin.report.fit.points),
                         fin.report.fit.widened ? 1.0 : 0.0,
                         fin.report.weighted_sup,
                         fin.report.fit.measurable ? 1.0 : 0.0,
                         fin.closeness.exponent});
                    io.save("final_report.csv", rep);

                    sr.detail = "order";
                    sr.passed = decay_gate(fin.report, false, &sr.detail);
                    sr.detail += fmt(" (target %.1f), closeness order %.4f",
                                     fin.report.target,
                                     fin.closeness.exponent);
                    break;
                }
                case 3: {  // Newton Monge-Ampere solve
                    const auto& start = have_final ? fin.state : res.state;
                    auto r = newton_solve(start, cfg.newton);

                    CsvTable trace;
                    trace.header = {"step", "residual", "step_norm",
                                    "damping"};
                    for (std::size_t k = 0; k < r.trace.residual.size(); ++k) {
                        trace.rows.push_back(
                            {static_cast<double>(k), r.trace.residual[k],
                             k ? r.trace.step_norm[k - 1] : 0.0,
                             k ? r.trace.damping[k - 1] : 0.0});
                    }
                    io.save("newton_trace.csv", trace);

                    CsvTable phi;
                    phi.header = {"z", "phi", "residual"};
                    const auto& wz = r.phi.grid()->z();
                    for (std::size_t i = 0; i < wz.size(); ++i) {
                        phi.rows.push_back({wz[i], r.phi[i], r.residual[i]});
                    }
                    io.save("phi.csv", phi);

                    const std::size_t steps = r.trace.step_norm.size();
                    sr.passed = r.trace.converged &&
                                r.trace.residual.back() < 1e-10 &&
                                steps <= 12;
                    sr.detail = fmt("residual %.3e in %.0f steps",
                                    r.trace.residual.back(),
                                    static_cast<double>(steps));
                    break;
                }
            }
        } catch (const std::exception& e) {
            sr.passed = false;
            sr.detail = std::string("error: ") + e.what();
            failed_at = stage;
        }
        if (!sr.passed && failed_at == 4) failed_at = stage;
        manifest.stages.push_back(std::move(sr));
    }
    return manifest;
}

void emit_report(const ExperimentConfig& cfg, const RunManifest& m) {
    write_text(cfg.out_dir, "manifest.json", manifest_to_json(m));

    std::string txt = std::string(m.version) + "\nconfig " + m.config_hash +
                      "\n\nstages:\n";
    for (const auto& s : m.stages) {
        txt += "  [" +
               std::string(!s.ran ? "SKIP" : (s.passed ? "PASS" : "FAIL")) +
               "] " + s.name + ": " + s.detail + "\n";
    }
    txt += "\nfiles:\n";
    for (const auto& f : m.csv_files) txt += "  " + f + "\n";
    write_text(cfg.out_dir, "report.txt", txt);
}

}  // namespace calabi
