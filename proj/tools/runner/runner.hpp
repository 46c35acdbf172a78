#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "config.hpp"

namespace pdhj::tools {

enum ExitCode : int { kExitPass = 0, kExitCheckFailed = 1, kExitUsage = 2, kExitCompute = 3 };

inline constexpr const char* kOutRootEnv = "PDHJ_OUT_ROOT";

struct RunOptions {
    std::filesystem::path out_dir;  // empty: <out root>/<kind>-seed<seed>
    std::string config_path;        // echoed in the manifest
    std::size_t jobs = 1;
};

struct RunOutcome {
    bool passed = false;
    std::filesystem::path out_dir;
    std::string metric_name;
    double metric = 0.0;
};

// $PDHJ_OUT_ROOT, or "pdhj-runs" when unset.
std::filesystem::path default_out_root();

// Writes manifest.json, then computes and writes result.json and the CSV
// tables. Library errors propagate as pdhj::Error.
RunOutcome run_experiment(const ExperimentConfig& config, const RunOptions& options, std::ostream& log);

struct SummaryRow {
    std::string run;
    std::string kind;
    std::string metric;
    std::string value;
    std::string verdict;  // PASS | FAIL | INCOMPLETE
};

// One row per run directory below `dir` (the directory itself counts when it
// holds a manifest). A run lacking manifest.json or result.json is INCOMPLETE.
std::vector<SummaryRow> collect_summary(const std::filesystem::path& dir);
void print_summary(const std::vector<SummaryRow>& rows, std::ostream& os);
// 0 when every row passed (or there are none), 1 otherwise.
int summary_status(const std::vector<SummaryRow>& rows);

}  // namespace pdhj::tools
