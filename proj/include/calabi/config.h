#pragma once
// Experiment configuration: one JSON-compatible document describing the
// model, the grid, the surrogate mode set, the iteration, and the Newton
// window.  The canonical serialized form (sorted keys, fixed indentation)
// is what gets hashed, so equal configurations hash equally by construction.

#include <cstdint>
#include <string>
#include <vector>

#include "calabi/ma_solver.h"

namespace calabi {

struct ExperimentConfig {
    // Model parameters.
    int n = 3;
    double base_volume = 1.0;          // cross-section volume factor
    double fiber_normalization = 1.0;  // circle-fiber length
    std::vector<double> c = {0.3, 0.05};

    // Radial grid (log-uniform in z).
    double z_min = 1.0;
    double z_max = 300.0;
    std::size_t grid_points = 3000;

    // Surrogate mode set for the full Poisson solve.
    int max_torus_freq = 2;
    int max_fiber_freq = 2;
    std::size_t truncation = 64;

    // Decay-improvement iteration and its fit window.
    int iteration_steps = 3;
    double fit_lo = 5.0;
    double fit_hi = 200.0;

    // Monge-Ampere Newton window.
    NewtonConfig newton;

    // Run plumbing.
    std::string out_dir = "out";
    std::uint64_t seed = 20240817;
    std::size_t threads = 0;  // 0 = hardware default

    // Throws std::invalid_argument naming the offending field.
    void validate() const;
};

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b);

// Canonical JSON (sorted keys, two-space indent, trailing newline).
std::string config_to_json(const ExperimentConfig& cfg);

// Parse and validate.  Unknown keys are rejected (schema check); missing
// keys keep their defaults.
ExperimentConfig config_from_json(const std::string& text);

// Read a config file; empty path yields the default config.
ExperimentConfig load_config(const std::string& path);

// FNV-1a (64-bit) over the canonical JSON text, as 16 hex digits.  out_dir
// and threads are normalized to their defaults first: the hash identifies
// the numerical experiment, not its output location or worker count.
std::string config_hash(const ExperimentConfig& cfg);

}  // namespace calabi
