#pragma once
// Orchestration of the full experiment: decay-improvement iteration, the
// compatibility adjustment, the final improvement step, and the Newton
// Monge-Ampere solve, with every stage's numbers persisted as CSV and a
// deterministic run manifest (no timestamps: identical configs must produce
// byte-identical outputs).

#include <string>
#include <vector>

#include "calabi/config.h"

namespace calabi {

extern const char kToolVersion[];

struct StageResult {
    std::string name;
    bool ran = false;
    bool passed = false;
    std::string detail;
};

struct RunManifest {
    std::string config_hash;
    std::string version;
    std::vector<StageResult> stages;
    std::vector<std::string> csv_files;  // names relative to the output dir

    bool all_passed() const;
};

std::string manifest_to_json(const RunManifest& m);

// iterate -> compatibility -> final step -> Newton.  Each stage writes its
// CSVs into cfg.out_dir as it completes; a failing stage is recorded with
// its diagnostics and the remaining stages are skipped (ran = false).
RunManifest run_pipeline(const ExperimentConfig& cfg);

// manifest.json and report.txt for a completed run.
void emit_report(const ExperimentConfig& cfg, const RunManifest& m);

}  // namespace calabi
