// Acceptance gate: runs the ten release criteria end to end and prints one
// pass/fail line per criterion.  Exit code 0 only when every criterion holds.

#include <algorithm>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <vector>

#include "calabi/acceptance.h"
#include "calabi/config.h"

int main() {
    calabi::ExperimentConfig cfg;
    cfg.out_dir =
        (std::filesystem::temp_directory_path() / "calab_acceptance").string();

    std::vector<calabi::CheckResult> results;
    try {
        results = calabi::acceptance_checks(cfg);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "acceptance run aborted: %s\n", e.what());
        return 2;
    }

    bool all_passed = true;
    for (const auto& r : results) {
        std::printf("[%s] %2d. %s: %s\n", r.passed ? "PASS" : "FAIL", r.id,
                    r.name.c_str(), r.detail.c_str());
        all_passed &= r.passed;
    }
    std::printf("%s: %zu/%zu criteria passed\n",
                all_passed ? "ACCEPTANCE PASSED" : "ACCEPTANCE FAILED",
                static_cast<std::size_t>(
                    std::count_if(results.begin(), results.end(),
                                  [](const auto& r) { return r.passed; })),
                results.size());
    return all_passed ? 0 : 1;
}
