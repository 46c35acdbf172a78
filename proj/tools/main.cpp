#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "pdhj/error.hpp"
#include "pdhj/parallel.hpp"
#include "runner/config.hpp"
#include "runner/runner.hpp"

#ifndef PDHJ_VERSION
#define PDHJ_VERSION "unknown"
#endif

namespace {

using namespace pdhj::tools;

struct RunArgs {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> jobs;
};

int run_kind(const std::string& subcommand, const RunArgs& args) {
    ExperimentConfig cfg;
    try {
        cfg = load_config(args.config);
        if (to_string(cfg.kind) != subcommand) {
            throw UsageError("kind", std::string("config is for '") + to_string(cfg.kind) + "', not '" + subcommand + "'");
        }
    } catch (const UsageError& e) {
        std::cerr << "pdhj: usage error: " << e.what() << "\n";
        return kExitUsage;
    }
    if (args.seed) {
        cfg.seed = *args.seed;
    }
    RunOptions opt;
    opt.out_dir = args.out;
    opt.config_path = args.config;
    opt.jobs = args.jobs.value_or(pdhj::default_jobs());
    if (opt.jobs == 0) {
        std::cerr << "pdhj: usage error: `--jobs`: must be at least 1\n";
        return kExitUsage;
    }
    try {
        const RunOutcome r = run_experiment(cfg, opt, std::cout);
        return r.passed ? kExitPass : kExitCheckFailed;
    } catch (const UsageError& e) {
        std::cerr << "pdhj: usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const pdhj::ConfigurationError& e) {
        std::cerr << "pdhj: " << e.what() << "\n";
        return kExitUsage;
    } catch (const pdhj::Error& e) {
        std::cerr << "pdhj: error in " << e.module() << ": " << e.what() << "\n";
        return kExitCompute;
    } catch (const std::exception& e) {
        std::cerr << "pdhj: error: " << e.what() << "\n";
        return kExitCompute;
    }
}

int summary(const std::string& dir) {
    try {
        const auto rows = collect_summary(dir);
        print_summary(rows, std::cout);
        return summary_status(rows);
    } catch (const pdhj::Error& e) {
        std::cerr << "pdhj: " << e.what() << "\n";
        return kExitUsage;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Path-dependent Hamilton-Jacobi experiments"};
    app.set_version_flag("--version", PDHJ_VERSION);
    app.require_subcommand(1);

    RunArgs args;
    const std::string out_help = std::string("Output directory (default: $") + kOutRootEnv + " or pdhj-runs, then <kind>-seed<seed>)";
    for (const auto& name : kind_names()) {
        CLI::App* sub = app.add_subcommand(name, "Run a " + name + " experiment");
        sub->add_option("--config", args.config, "Experiment config (JSON)")->required();
        sub->add_option("--out", args.out, out_help);
        sub->add_option("--seed", args.seed, "Override the config seed");
        sub->add_option("--jobs", args.jobs, "Worker threads for inner loops");
        sub->callback([]() {});
    }
    std::string summary_dir;
    CLI::App* sum = app.add_subcommand("summary", "Tabulate the runs below a results directory");
    sum->add_option("dir", summary_dir, "Results directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }
    if (sum->parsed()) {
        return summary(summary_dir);
    }
    for (const auto& name : kind_names()) {
        if (app.got_subcommand(name)) {
            return run_kind(name, args);
        }
    }
    return kExitUsage;
}
