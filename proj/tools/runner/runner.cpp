#include "runner.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <memory>
#include <ostream>
#include <sstream>

#include "pdhj/error.hpp"
#include "pdhj/parallel.hpp"
#include "pdhj/path_io.hpp"
#include "pdhj/random.hpp"
#include "pdhj/serialize.hpp"

#ifndef PDHJ_VERSION
#define PDHJ_VERSION "unknown"
#endif

namespace pdhj::tools {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream os(p, std::ios::binary);
    if (!os) {
        throw ConfigurationError("cli", "cannot write " + p.string());
    }
    os << text;
}

void write_json(const fs::path& p, const json& j) { write_text(p, j.dump(2) + "\n"); }

template <typename Fn>
void write_stream(const fs::path& p, Fn&& fn) {
    std::ostringstream os;
    fn(os);
    write_text(p, os.str());
}

std::string utc_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

json library_versions() {
    return {{"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                          std::to_string(EIGEN_MINOR_VERSION)},
            {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                  std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                  std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
            {"rng", kRngAlgorithm}};
}

OperatorSpec make_operator(const OperatorBlock& b) {
    const auto d = static_cast<Eigen::Index>(b.dim);
    if (b.kind == "identity") {
        return build_linear(Eigen::MatrixXd::Identity(d, d));
    }
    if (b.kind == "linear") {
        return build_linear(b.matrix);
    }
    return build_p_laplacian(b.dim, b.p_exp);
}

StateLattice make_lattice(const LatticeBlock& l) { return StateLattice(l.lo, l.hi, l.points); }

struct Result {
    bool passed = false;
    std::string metric_name;
    double metric = 0.0;
    json body = json::object();
};

// ---------------------------------------------------------------------------

Result run_solve(const ExperimentConfig& c, const fs::path& out, std::size_t jobs) {
    const OperatorSpec op = make_operator(*c.op);
    const AuditReport audit = audit_hypotheses(op, c.solve.audit_samples, c.seed, c.horizon);
    const TimeGrid grid = TimeGrid::uniform(0.0, c.horizon, c.time_steps);
    if (!grid.index_of(c.solve.t0)) {
        throw UsageError("solve.t0", "must be a node of the uniform time grid");
    }
    const DelayDynamics dyn{op, c.solve.lipschitz_L};
    const Path x0 = Path::constant(grid, c.solve.x0);

    std::vector<SolveReport> reports;
    if (c.solve.forcing == "constant") {
        const Vec f = c.solve.value;
        reports.push_back(solve_delay_evolution(dyn, c.solve.t0, x0, [f](const PathPrefix&) { return f; }));
        reports.back().forcing_algorithm = "constant";
    } else {
        reports = sample_reachable_set(dyn, c.solve.t0, x0, c.solve.count, c.seed, jobs);
    }

    Result r;
    r.metric_name = "residual_estimate";
    json solves = json::array();
    for (const auto& s : reports) {
        r.metric = std::max(r.metric, s.residual_estimate);
        solves.push_back(to_json(s));
    }
    r.passed = audit.passed();
    r.body["audit"] = to_json(audit);
    r.body["solves"] = solves;
    write_stream(out / "path.csv", [&](std::ostream& os) { write_path_csv(os, reports.front().path); });
    if (reports.size() > 1) {
        write_stream(out / "reachable.csv", [&](std::ostream& os) {
            os << "sample,t";
            for (std::size_t d = 1; d <= c.op->dim; ++d) {
                os << ",x_" << d;
            }
            os << "\n";
            for (std::size_t i = 0; i < reports.size(); ++i) {
                const Path& p = reports[i].path;
                for (std::size_t k = 0; k < p.grid().size(); ++k) {
                    os << i << "," << num(p.grid().node(k));
                    for (Eigen::Index d = 0; d < p.value(k).size(); ++d) {
                        os << "," << num(p.value(k)[d]);
                    }
                    os << "\n";
                }
            }
        });
    }
    return r;
}

Result run_upsilon(const ExperimentConfig& c, const fs::path& out, std::ostream& log) {
    BatteryOptions opt;
    opt.bound_pairs = c.upsilon.bound_pairs;
    opt.chain_paths = c.upsilon.chain_paths;
    opt.seed = c.seed;
    opt.epsilon = c.upsilon.epsilon;
    opt.lambda_L = c.lambda_L;
    opt.horizon = c.horizon;
    const BatteryReport rep = run_upsilon_battery(opt);

    Result r;
    r.passed = rep.passed();
    r.metric_name = "violations";
    std::size_t violations = 0;
    log << std::left << std::setw(22) << "check" << std::setw(12) << "evaluations" << std::setw(12) << "violations"
        << "verdict\n";
    for (const auto& ch : rep.checks) {
        violations += ch.violations;
        log << std::left << std::setw(22) << ch.name << std::setw(12) << ch.evaluations << std::setw(12)
            << ch.violations << (ch.passed ? "PASS" : "FAIL") << "\n";
    }
    r.metric = static_cast<double>(violations);
    r.body["battery"] = to_json(rep);
    write_stream(out / "checks.csv", [&](std::ostream& os) {
        os << "name,evaluations,violations,metric_name,metric,passed\n";
        for (const auto& ch : rep.checks) {
            os << ch.name << "," << ch.evaluations << "," << ch.violations << "," << ch.metric_name << ","
               << num(ch.metric) << "," << (ch.passed ? "true" : "false") << "\n";
        }
    });
    return r;
}

Result run_game_value(const ExperimentConfig& c, const fs::path& out, std::size_t jobs) {
    const GameSpec spec = make_game(*c.game);
    const TimeGrid grid = TimeGrid::uniform(0.0, c.horizon, c.time_steps);
    const StateLattice lattice = make_lattice(*c.lattice);
    const ValueTable table = dp_value(spec, grid, lattice, jobs);

    bool dpp = true;
    for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
        for (Side s : {Side::Lower, Side::Upper}) {
            dpp = dpp && dp_backup(spec, grid, lattice, k, table.side(s)[k + 1], s, jobs) == table.side(s)[k];
        }
    }
    bool ordered = true;
    double max_gap = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        for (std::size_t i = 0; i < lattice.size(); ++i) {
            ordered = ordered && table.v_minus[k][i] <= table.v_plus[k][i] + 1e-12;
            max_gap = std::max(max_gap, table.v_plus[k][i] - table.v_minus[k][i]);
        }
    }
    bool terminal = true;
    for (std::size_t i = 0; i < lattice.size(); ++i) {
        const double h = spec.h_state(lattice.point(i));
        terminal = terminal && table.v_minus.back()[i] == h && table.v_plus.back()[i] == h;
    }
    const HamiltonianEval ham = hamiltonian_state(spec, c.game_value.t, c.game_value.x, c.game_value.z);

    Result r;
    r.passed = dpp && ordered && terminal;
    r.metric_name = "isaacs_gap";
    r.metric = ham.isaacs_gap;
    r.body["checks"] = {{"dpp_bit_exact", dpp}, {"ordered", ordered}, {"terminal_exact", terminal}};
    r.body["max_value_gap"] = max_gap;
    r.body["hamiltonian"] = to_json(ham);
    r.body["probe"] = {{"t", c.game_value.t},
                       {"x", vec_to_json(c.game_value.x)},
                       {"z", vec_to_json(c.game_value.z)},
                       {"v_minus", table.value_at(Side::Lower, c.game_value.t, c.game_value.x)},
                       {"v_plus", table.value_at(Side::Upper, c.game_value.t, c.game_value.x)}};
    r.body["grid"] = to_json(grid);
    r.body["lattice"] = to_json(lattice);
    r.body["control_grid_id"] = table.control_grid_id;
    write_stream(out / "value_table.csv", [&](std::ostream& os) { write_value_table_csv(os, table); });
    return r;
}

Result run_isaacs(const ExperimentConfig& c) {
    const GameSpec spec = make_game(*c.game);
    const LipschitzAudit audit = audit_hamiltonian_lipschitz(spec, c.isaacs.samples, c.seed, c.isaacs.radius);
    Result r;
    r.passed = audit.passed();
    r.metric_name = "max_isaacs_gap";
    r.metric = audit.max_gap;
    r.body["audit"] = to_json(audit);
    r.body["l_f"] = spec.l_f;
    r.body["isaacs_condition_sampled"] = audit.max_gap == 0.0;
    return r;
}

Result run_feedback(const ExperimentConfig& c, const fs::path& out, std::size_t jobs) {
    const GameSpec spec = make_game(*c.game);
    const TimeGrid grid = TimeGrid::uniform(0.0, c.horizon, c.time_steps);
    auto table = std::make_shared<const ValueTable>(dp_value(spec, grid, make_lattice(*c.lattice), jobs));

    FeedbackExperiment ex;
    ex.t0 = c.feedback.t0;
    ex.x0 = c.feedback.x0;
    ex.epsilon = c.feedback.epsilon;
    ex.partition_steps = c.feedback.partition_steps;
    ex.adversaries = c.feedback.adversaries;
    ex.calibration_random = c.feedback.calibration_random;
    ex.seed = c.seed;
    ex.strategy = {c.feedback.library_size, c.feedback.library_seed, c.feedback.include_lattice};
    ex.jobs = jobs;
    const FeedbackExperimentReport rep = run_feedback_experiment(spec, table, ex);

    Result r;
    r.passed = rep.passed;
    r.metric_name = "guaranteed_result";
    r.metric = rep.result.estimate;
    r.body["feedback"] = to_json(rep);

    write_stream(out / "partitions.csv", [&](std::ostream& os) {
        os << "steps,delta,estimate,tolerance,v_plus,v_minus,upper_ok,lower_ok,worst_adversary,m_hat,lyapunov_within\n";
        for (std::size_t i = 0; i < rep.result.partitions.size(); ++i) {
            const auto& p = rep.result.partitions[i];
            os << p.steps << "," << num(p.delta) << "," << num(p.estimate) << "," << num(rep.tolerances[i]) << ","
               << num(rep.v_plus) << "," << num(rep.v_minus) << "," << (rep.upper_ok[i] ? "true" : "false") << ","
               << (rep.lower_ok[i] ? "true" : "false") << "," << p.worst_adversary << "," << num(p.lyapunov.m_hat)
               << "," << num(p.lyapunov.fraction_within) << "\n";
        }
    });
    // Traces of the worst adversary per partition, replayed deterministically.
    const LyapunovParams params = LyapunovParams::create(ex.epsilon, spec.lambda_L, spec.horizon);
    const FeedbackStrategy strategy = extremal_shift_strategy(spec, params, table, ex.t0, ex.x0, ex.strategy);
    const auto adversaries = adversary_suite(spec, table, ex.adversaries, ex.seed);
    for (const auto& p : rep.result.partitions) {
        for (const auto& a : adversaries) {
            if (a.name == p.worst_adversary) {
                const StrategyTrace t = run_feedback_game(spec, strategy, a, make_partition(strategy, p.steps));
                write_stream(out / ("trace_" + std::to_string(p.steps) + ".csv"),
                             [&](std::ostream& os) { write_trace_csv(os, t); });
                break;
            }
        }
    }
    return r;
}

Result run_minimax(const ExperimentConfig& c, const fs::path& out, std::size_t jobs) {
    const GameSpec spec = make_game(*c.game);
    const TimeGrid grid = TimeGrid::uniform(0.0, c.horizon, c.time_steps);
    const ValueTable table = dp_value(spec, grid, make_lattice(*c.lattice), jobs);
    const MinimaxBlock& m = c.minimax;
    const auto sites = random_sites(table, m.sites, c.seed, m.horizon, m.z_radius);

    // Per site: minimax super, minimax sub, then optionally viscosity super, sub.
    const std::size_t per = m.viscosity ? 4 : 2;
    std::vector<ResidualReport> reports(sites.size() * per);
    parallel_for(sites.size(), jobs, [&](std::size_t i) {
        ResidualOptions opt;
        opt.horizon = m.horizon;
        opt.budget = m.budget;
        opt.seed = stream_seed(c.seed, i);
        opt.side = m.side;
        opt.tolerance = m.tolerance;
        reports[i * per] = minimax_residual(table, spec, sites[i], Direction::Super, opt);
        reports[i * per + 1] = minimax_residual(table, spec, sites[i], Direction::Sub, opt);
        if (m.viscosity) {
            reports[i * per + 2] = viscosity_residual(table, spec, sites[i], m.viscosity_c, Direction::Super, opt);
            reports[i * per + 3] = viscosity_residual(table, spec, sites[i], m.viscosity_c, Direction::Sub, opt);
        }
    });

    std::size_t failed_sites = 0;
    std::size_t violations = 0;
    std::size_t vacuous = 0;
    json list = json::array();
    for (std::size_t i = 0; i < sites.size(); ++i) {
        const bool ok = reports[i * per].passed && reports[i * per + 1].passed;
        failed_sites += ok ? 0 : 1;
        for (std::size_t j = 2; j < per; ++j) {
            violations += reports[i * per + j].verdict == "violation" ? 1 : 0;
            vacuous += reports[i * per + j].verdict == "vacuous" ? 1 : 0;
        }
    }
    for (const auto& rep : reports) {
        list.push_back(to_json(rep));
    }

    Result r;
    r.passed = failed_sites == 0 && violations == 0;
    r.metric_name = "failed_sites";
    r.metric = static_cast<double>(failed_sites);
    r.body["sites"] = sites.size();
    r.body["failed_sites"] = failed_sites;
    r.body["viscosity_violations"] = violations;
    r.body["viscosity_vacuous"] = vacuous;
    r.body["reports"] = list;
    write_stream(out / "residuals.csv", [&](std::ostream& os) {
        const std::size_t d = table.lattice.dim();
        os << "site,t0";
        for (std::size_t k = 1; k <= d; ++k) {
            os << ",x_" << k;
        }
        for (std::size_t k = 1; k <= d; ++k) {
            os << ",z_" << k;
        }
        os << ",check,direction,slack,tolerance,verdict\n";
        for (std::size_t i = 0; i < reports.size(); ++i) {
            const ResidualReport& rep = reports[i];
            os << i / per << "," << num(rep.site.t0);
            for (Eigen::Index k = 0; k < rep.site.x0.size(); ++k) {
                os << "," << num(rep.site.x0[k]);
            }
            for (Eigen::Index k = 0; k < rep.site.z.size(); ++k) {
                os << "," << num(rep.site.z[k]);
            }
            os << "," << rep.check << "," << to_string(rep.direction) << "," << num(rep.slack) << ","
               << num(rep.tolerance) << "," << rep.verdict << "\n";
        }
    });
    return r;
}

Result run_stability(const ExperimentConfig& c, const fs::path& out, std::size_t jobs) {
    const GameSpec spec = make_game(*c.game);
    const TimeGrid grid = TimeGrid::uniform(0.0, c.horizon, c.time_steps);
    const StabilityReport rep =
        stability_experiment(spec, c.stability.family, c.stability.n_list, grid, make_lattice(*c.lattice), jobs);
    Result r;
    r.passed = rep.passed;
    r.metric_name = "last_distance";
    r.metric = rep.distances.empty() ? 0.0 : rep.distances.back();
    r.body["stability"] = to_json(rep);
    write_stream(out / "distances.csv", [&](std::ostream& os) {
        os << "n,magnitude,distance\n";
        for (std::size_t i = 0; i < rep.n_list.size(); ++i) {
            os << rep.n_list[i] << "," << num(rep.magnitudes[i]) << "," << num(rep.distances[i]) << "\n";
        }
    });
    return r;
}

}  // namespace

fs::path default_out_root() {
    const char* env = std::getenv(kOutRootEnv);
    return env && *env ? fs::path(env) : fs::path("pdhj-runs");
}

RunOutcome run_experiment(const ExperimentConfig& config, const RunOptions& options, std::ostream& log) {
    RunOutcome outcome;
    outcome.out_dir = options.out_dir.empty()
                          ? default_out_root() / (std::string(to_string(config.kind)) + "-seed" + std::to_string(config.seed))
                          : options.out_dir;
    std::error_code ec;
    fs::create_directories(outcome.out_dir, ec);
    if (ec) {
        throw ConfigurationError("cli", "cannot create output directory " + outcome.out_dir.string() + ": " + ec.message());
    }
    fs::remove(outcome.out_dir / "result.json", ec);

    json config_echo = config.resolved;
    config_echo["seed"] = config.seed;
    const json manifest = {{"tool", "pdhj"},
                           {"version", PDHJ_VERSION},
                           {"schema_version", kSchemaVersion},
                           {"kind", to_string(config.kind)},
                           {"seed", config.seed},
                           {"jobs", options.jobs},
                           {"config_path", options.config_path},
                           {"config", config_echo},
                           {"libraries", library_versions()},
                           {"started_at", utc_now()}};
    write_json(outcome.out_dir / "manifest.json", manifest);

    Result r;
    const fs::path& out = outcome.out_dir;
    switch (config.kind) {
        case Kind::Solve:
            r = run_solve(config, out, options.jobs);
            break;
        case Kind::UpsilonCheck:
            r = run_upsilon(config, out, log);
            break;
        case Kind::GameValue:
            r = run_game_value(config, out, options.jobs);
            break;
        case Kind::IsaacsCheck:
            r = run_isaacs(config);
            break;
        case Kind::FeedbackRun:
            r = run_feedback(config, out, options.jobs);
            break;
        case Kind::MinimaxCheck:
            r = run_minimax(config, out, options.jobs);
            break;
        case Kind::StabilityRun:
            r = run_stability(config, out, options.jobs);
            break;
    }

    json result = r.body;
    result["kind"] = to_string(config.kind);
    result["seed"] = config.seed;
    result["passed"] = r.passed;
    result["key_metric"] = {{"name", r.metric_name}, {"value", r.metric}};
    write_json(out / "result.json", result);

    outcome.passed = r.passed;
    outcome.metric_name = r.metric_name;
    outcome.metric = r.metric;
    log << to_string(config.kind) << ": " << (r.passed ? "PASS" : "FAIL") << "  " << r.metric_name << " = "
        << num(r.metric) << "  (" << out.string() << ")\n";
    return outcome;
}

// ---------------------------------------------------------------------------
// Summary

namespace {

std::optional<json> read_json(const fs::path& p) {
    std::ifstream in(p);
    if (!in) {
        return std::nullopt;
    }
    try {
        return json::parse(in);
    } catch (const json::exception&) {
        return std::nullopt;
    }
}

SummaryRow summarize(const fs::path& dir, const std::string& name) {
    SummaryRow row{name, "-", "-", "-", "INCOMPLETE"};
    const auto manifest = read_json(dir / "manifest.json");
    const auto result = read_json(dir / "result.json");
    if (manifest && manifest->contains("kind") && (*manifest)["kind"].is_string()) {
        row.kind = (*manifest)["kind"].get<std::string>();
    }
    if (!manifest || !result) {
        return row;
    }
    try {
        row.metric = result->at("key_metric").at("name").get<std::string>();
        row.value = num(result->at("key_metric").at("value").get<double>());
        row.verdict = result->at("passed").get<bool>() ? "PASS" : "FAIL";
    } catch (const json::exception&) {
        row.verdict = "INCOMPLETE";
    }
    return row;
}

bool looks_like_run(const fs::path& dir) {
    return fs::exists(dir / "manifest.json") || fs::exists(dir / "result.json");
}

}  // namespace

std::vector<SummaryRow> collect_summary(const fs::path& dir) {
    if (!fs::is_directory(dir)) {
        throw ConfigurationError("cli", "results directory " + dir.string() + " does not exist");
    }
    std::vector<SummaryRow> rows;
    if (looks_like_run(dir)) {
        rows.push_back(summarize(dir, "."));
    }
    std::vector<fs::path> subs;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.is_directory()) {
            subs.push_back(e.path());
        }
    }
    std::sort(subs.begin(), subs.end());
    for (const auto& s : subs) {
        rows.push_back(summarize(s, s.filename().string()));
    }
    return rows;
}

void print_summary(const std::vector<SummaryRow>& rows, std::ostream& os) {
    std::size_t w_run = 3;
    std::size_t w_kind = 4;
    std::size_t w_metric = 6;
    std::size_t w_value = 5;
    for (const auto& r : rows) {
        w_run = std::max(w_run, r.run.size());
        w_kind = std::max(w_kind, r.kind.size());
        w_metric = std::max(w_metric, r.metric.size());
        w_value = std::max(w_value, r.value.size());
    }
    auto line = [&](const std::string& a, const std::string& b, const std::string& c, const std::string& d,
                    const std::string& e) {
        os << std::left << std::setw(static_cast<int>(w_run + 2)) << a << std::setw(static_cast<int>(w_kind + 2)) << b
           << std::setw(static_cast<int>(w_metric + 2)) << c << std::setw(static_cast<int>(w_value + 2)) << d << e
           << "\n";
    };
    line("run", "kind", "metric", "value", "verdict");
    for (const auto& r : rows) {
        line(r.run, r.kind, r.metric, r.value, r.verdict);
    }
}

int summary_status(const std::vector<SummaryRow>& rows) {
    for (const auto& r : rows) {
        if (r.verdict != "PASS") {
            return kExitCheckFailed;
        }
    }
    return kExitPass;
}

}  // namespace pdhj::tools
