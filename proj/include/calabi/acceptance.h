#pragma once
// The ten numbered acceptance checks of the laboratory, each returning an
// honest pass/fail with the measured numbers in the detail string.  The
// same functions back the CLI subcommands and the acceptance test binary.

#include <string>
#include <vector>

#include "calabi/config.h"

namespace calabi {

struct CheckResult {
    int id = 0;
    std::string name;
    bool passed = false;
    std::string detail;
};

// Run the numbered checks (1..10) in order; empty ids = all ten.
// Checks 5-8 share one pipeline run; check 10 runs the pipeline twice more
// (different thread counts) and byte-compares the outputs under
// cfg.out_dir.
std::vector<CheckResult> acceptance_checks(const ExperimentConfig& cfg,
                                           std::vector<int> ids = {});

}  // namespace calabi
