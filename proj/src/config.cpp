#include "calabi/config.h"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace calabi {

namespace {

using nlohmann::json;

void require(bool ok, const std::string& field, const std::string& why) {
    if (!ok) {
        throw std::invalid_argument("config field '" + field + "' " + why);
    }
}

}  // namespace

void ExperimentConfig::validate() const {
    require(n >= 2, "n", "must be at least 2");
    require(base_volume > 0.0, "base_volume", "must be positive");
    require(fiber_normalization > 0.0, "fiber_normalization",
            "must be positive");
    require(c.size() == static_cast<std::size_t>(n - 1), "c",
            "must have exactly n-1 entries");
    require(z_min >= 1.0, "z_min", "must be at least 1");
    require(z_max > z_min, "z_max", "must exceed z_min");
    require(grid_points >= 64, "grid_points", "must be at least 64");
    require(max_torus_freq >= 0, "max_torus_freq", "must be non-negative");
    require(max_fiber_freq >= 0, "max_fiber_freq", "must be non-negative");
    require(truncation >= 1, "truncation", "must be at least 1");
    require(iteration_steps >= 0 && iteration_steps <= n + 2,
            "iteration_steps", "must lie in [0, n+2]");
    require(fit_lo >= z_min && fit_hi <= z_max && fit_lo < fit_hi, "fit_lo",
            "fit window must lie inside the grid");
    require(newton.z_min >= z_min && newton.z_max <= z_max &&
                newton.z_min < newton.z_max,
            "newton.z_min", "Newton window must lie inside the grid");
    require(newton.tolerance > 0.0, "newton.tolerance", "must be positive");
    require(newton.max_iterations >= 1, "newton.max_iterations",
            "must be at least 1");
    require(!out_dir.empty(), "out_dir", "must not be empty");
}

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
    return a.n == b.n && a.base_volume == b.base_volume &&
           a.fiber_normalization == b.fiber_normalization && a.c == b.c &&
           a.z_min == b.z_min && a.z_max == b.z_max &&
           a.grid_points == b.grid_points &&
           a.max_torus_freq == b.max_torus_freq &&
           a.max_fiber_freq == b.max_fiber_freq &&
           a.truncation == b.truncation &&
           a.iteration_steps == b.iteration_steps && a.fit_lo == b.fit_lo &&
           a.fit_hi == b.fit_hi && a.newton.z_min == b.newton.z_min &&
           a.newton.z_max == b.newton.z_max &&
           a.newton.tolerance == b.newton.tolerance &&
           a.newton.max_iterations == b.newton.max_iterations &&
           a.newton.max_halvings == b.newton.max_halvings &&
           a.out_dir == b.out_dir && a.seed == b.seed &&
           a.threads == b.threads;
}

std::string config_to_json(const ExperimentConfig& cfg) {
    json j;
    j["n"] = cfg.n;
    j["base_volume"] = cfg.base_volume;
    j["fiber_normalization"] = cfg.fiber_normalization;
    j["c"] = cfg.c;
    j["z_min"] = cfg.z_min;
    j["z_max"] = cfg.z_max;
    j["grid_points"] = cfg.grid_points;
    j["max_torus_freq"] = cfg.max_torus_freq;
    j["max_fiber_freq"] = cfg.max_fiber_freq;
    j["truncation"] = cfg.truncation;
    j["iteration_steps"] = cfg.iteration_steps;
    j["fit_lo"] = cfg.fit_lo;
    j["fit_hi"] = cfg.fit_hi;
    j["newton"] = {{"z_min", cfg.newton.z_min},
                   {"z_max", cfg.newton.z_max},
                   {"tolerance", cfg.newton.tolerance},
                   {"max_iterations", cfg.newton.max_iterations},
                   {"max_halvings", cfg.newton.max_halvings}};
    j["out_dir"] = cfg.out_dir;
    j["seed"] = cfg.seed;
    j["threads"] = cfg.threads;
    return j.dump(2) + "\n";  // nlohmann objects keep keys sorted
}

ExperimentConfig config_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("config is not valid JSON: ") +
                                    e.what());
    }
    if (!j.is_object()) {
        throw std::invalid_argument("config must be a JSON object");
    }

    static const std::set<std::string> known = {
        "n",          "base_volume", "fiber_normalization",
        "c",          "z_min",       "z_max",
        "grid_points", "max_torus_freq", "max_fiber_freq",
        "truncation", "iteration_steps", "fit_lo",
        "fit_hi",     "newton",      "out_dir",
        "seed",       "threads"};
    static const std::set<std::string> known_newton = {
        "z_min", "z_max", "tolerance", "max_iterations", "max_halvings"};
    for (const auto& item : j.items()) {
        if (!known.count(item.key())) {
            throw std::invalid_argument("unknown config key '" + item.key() +
                                        "'");
        }
    }

    ExperimentConfig cfg;
    try {
        if (j.contains("n")) cfg.n = j["n"].get<int>();
        if (j.contains("base_volume"))
            cfg.base_volume = j["base_volume"].get<double>();
        if (j.contains("fiber_normalization"))
            cfg.fiber_normalization = j["fiber_normalization"].get<double>();
        if (j.contains("c")) cfg.c = j["c"].get<std::vector<double>>();
        if (j.contains("z_min")) cfg.z_min = j["z_min"].get<double>();
        if (j.contains("z_max")) cfg.z_max = j["z_max"].get<double>();
        if (j.contains("grid_points"))
            cfg.grid_points = j["grid_points"].get<std::size_t>();
        if (j.contains("max_torus_freq"))
            cfg.max_torus_freq = j["max_torus_freq"].get<int>();
        if (j.contains("max_fiber_freq"))
            cfg.max_fiber_freq = j["max_fiber_freq"].get<int>();
        if (j.contains("truncation"))
            cfg.truncation = j["truncation"].get<std::size_t>();
        if (j.contains("iteration_steps"))
            cfg.iteration_steps = j["iteration_steps"].get<int>();
        if (j.contains("fit_lo")) cfg.fit_lo = j["fit_lo"].get<double>();
        if (j.contains("fit_hi")) cfg.fit_hi = j["fit_hi"].get<double>();
        if (j.contains("newton")) {
            const auto& nj = j["newton"];
            if (!nj.is_object()) {
                throw std::invalid_argument(
                    "config key 'newton' must be an object");
            }
            for (const auto& item : nj.items()) {
                if (!known_newton.count(item.key())) {
                    throw std::invalid_argument("unknown config key 'newton." +
                                                item.key() + "'");
                }
            }
            if (nj.contains("z_min"))
                cfg.newton.z_min = nj["z_min"].get<double>();
            if (nj.contains("z_max"))
                cfg.newton.z_max = nj["z_max"].get<double>();
            if (nj.contains("tolerance"))
                cfg.newton.tolerance = nj["tolerance"].get<double>();
            if (nj.contains("max_iterations"))
                cfg.newton.max_iterations = nj["max_iterations"].get<int>();
            if (nj.contains("max_halvings"))
                cfg.newton.max_halvings = nj["max_halvings"].get<int>();
        }
        if (j.contains("out_dir"))
            cfg.out_dir = j["out_dir"].get<std::string>();
        if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
        if (j.contains("threads"))
            cfg.threads = j["threads"].get<std::size_t>();
    } catch (const json::type_error& e) {
        throw std::invalid_argument(std::string("config type error: ") +
                                    e.what());
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    if (path.empty()) {
        ExperimentConfig cfg;
        cfg.validate();
        return cfg;
    }
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open config file: " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return config_from_json(buf.str());
}

std::string config_hash(const ExperimentConfig& cfg) {
    // The hash identifies the numerical experiment.  Where the outputs are
    // written and how many workers computed them must not change it, or two
    // otherwise identical runs could never be recognized as the same.
    ExperimentConfig canonical = cfg;
    canonical.out_dir = ExperimentConfig{}.out_dir;
    canonical.threads = ExperimentConfig{}.threads;
    const std::string text = config_to_json(canonical);
    std::uint64_t h = 1469598103934665603ull;  // FNV offset basis
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 1099511628211ull;  // FNV prime
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(h));
    return std::string(buf);
}

}  // namespace calabi
