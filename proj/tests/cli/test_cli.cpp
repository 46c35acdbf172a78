#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <unistd.h>
#include <sys/wait.h>

#include <nlohmann/json.hpp>

#include "pdhj/error.hpp"
#include "pdhj/path_io.hpp"
#include "runner/config.hpp"
#include "runner/runner.hpp"

using namespace pdhj;
using namespace pdhj::tools;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kConfigs = PDHJ_CONFIG_DIR;
const fs::path kGolden = PDHJ_GOLDEN_DIR;

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("pdhj-cli-test-" + std::to_string(::getpid())) / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

// Compares against the golden file. PDHJ_UPDATE_GOLDEN=1 rewrites it.
void expect_golden(const std::string& actual, const std::string& name) {
    const fs::path g = kGolden / name;
    if (const char* u = std::getenv("PDHJ_UPDATE_GOLDEN"); u && std::string(u) == "1") {
        std::ofstream(g, std::ios::binary) << actual;
    }
    ASSERT_TRUE(fs::exists(g)) << "missing golden file " << g;
    EXPECT_EQ(actual, slurp(g)) << "golden mismatch for " << name;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(PDHJ_BIN) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string usage_message(const json& doc) {
    try {
        parse_config(doc);
    } catch (const UsageError& e) {
        return e.what();
    }
    return "";
}

json pq_game(const std::string& kind) {
    json doc = json::parse(R"({
      "schema_version": 1,
      "operator": {"kind": "identity", "dim": 1},
      "dynamics": "product",
      "running_cost": {"kind": "zero"},
      "controls": {"p_points": [-1, 1], "q_points": [-1, 1]},
      "lattice": {"lo": -2, "hi": 2, "points": 17},
      "time_steps": 8
    })");
    doc["kind"] = kind;
    return doc;
}

RunOutcome run_in(const json& doc, const fs::path& dir) {
    std::ostringstream log;
    RunOptions opt;
    opt.out_dir = dir;
    opt.config_path = "inline";
    return run_experiment(parse_config(doc), opt, log);
}

}  // namespace

TEST(Config, MissingControlGridNamesTheField) {
    json doc = pq_game("game-value");
    doc["controls"].erase("q_points");
    const std::string msg = usage_message(doc);
    EXPECT_NE(msg.find("`controls.q_points`"), std::string::npos) << msg;
}

TEST(Config, UnknownFieldIsAnError) {
    json doc = pq_game("game-value");
    doc["lattice"]["spacing"] = 0.1;
    EXPECT_NE(usage_message(doc).find("`lattice.spacing`: unknown field"), std::string::npos);
    doc = pq_game("game-value");
    doc["feedback"] = json::object();
    EXPECT_NE(usage_message(doc).find("`feedback`"), std::string::npos);
}

TEST(Config, SchemaVersionIsChecked) {
    json doc = pq_game("game-value");
    doc["schema_version"] = 2;
    EXPECT_NE(usage_message(doc).find("schema_version"), std::string::npos);
    doc.erase("schema_version");
    EXPECT_NE(usage_message(doc).find("`schema_version`: missing"), std::string::npos);
}

TEST(Config, TypeErrorsCarryThePath) {
    json doc = pq_game("game-value");
    doc["lattice"]["points"] = "many";
    EXPECT_NE(usage_message(doc).find("`lattice.points`"), std::string::npos);
    doc = pq_game("game-value");
    doc["controls"]["p_points"][1] = "x";
    EXPECT_NE(usage_message(doc).find("`controls.p_points[1]`"), std::string::npos);
}

TEST(Config, DefaultsAreEchoed) {
    const ExperimentConfig cfg = parse_config(pq_game("minimax-check"));
    EXPECT_EQ(cfg.resolved["seed"], 1);
    EXPECT_EQ(cfg.resolved["minimax"]["sites"], 20);
    EXPECT_EQ(cfg.resolved["minimax"]["tolerance"]["c"], 0.1);
    EXPECT_EQ(cfg.resolved["horizon"], 1.0);
    EXPECT_EQ(cfg.resolved["terminal_cost"]["kind"], "abs");
}

TEST(Config, ShippedExamplesParse) {
    for (const auto& e : fs::directory_iterator(kConfigs)) {
        if (e.path().filename() == "game_value_missing_q.json") {
            EXPECT_THROW(load_config(e.path().string()), UsageError);
        } else {
            EXPECT_NO_THROW(load_config(e.path().string())) << e.path();
        }
    }
}

TEST(Run, GameValueReportsProductGap) {
    const fs::path dir = scratch("gap");
    const RunOutcome r = run_in(pq_game("game-value"), dir);
    EXPECT_TRUE(r.passed);
    EXPECT_EQ(r.metric_name, "isaacs_gap");
    EXPECT_EQ(r.metric, 2.0);
    const json result = json::parse(slurp(dir / "result.json"));
    EXPECT_EQ(result["hamiltonian"]["f_plus"], 1.0);
    EXPECT_EQ(result["hamiltonian"]["f_minus"], -1.0);
    EXPECT_TRUE(fs::exists(dir / "value_table.csv"));
}

TEST(Run, UpsilonDefaultConfigPasses) {
    const fs::path dir = scratch("upsilon");
    json doc = {{"schema_version", 1}, {"kind", "upsilon-check"}};
    const RunOutcome r = run_in(doc, dir);
    EXPECT_TRUE(r.passed);
    const json manifest = json::parse(slurp(dir / "manifest.json"));
    EXPECT_EQ(manifest["kind"], "upsilon-check");
    EXPECT_EQ(manifest["config"]["upsilon"]["bound_pairs"], 1000);
    EXPECT_TRUE(manifest.contains("libraries"));
    EXPECT_TRUE(fs::exists(dir / "checks.csv"));
}

TEST(Run, ResultJsonIsByteIdentical) {
    json doc = pq_game("minimax-check");
    doc["minimax"] = {{"sites", 4}, {"budget", 16}};
    const fs::path a = scratch("repro-a");
    const fs::path b = scratch("repro-b");
    run_in(doc, a);
    run_in(doc, b);
    EXPECT_EQ(slurp(a / "result.json"), slurp(b / "result.json"));
    EXPECT_EQ(slurp(a / "residuals.csv"), slurp(b / "residuals.csv"));
    EXPECT_EQ(json::parse(slurp(a / "result.json")).count("started_at"), 0u);
}

TEST(Run, ManifestIsWrittenBeforeAComputeFailure) {
    // A lattice too narrow for the dynamics makes the oracle raise.
    json doc = pq_game("game-value");
    doc["lattice"] = {{"lo", -0.01}, {"hi", 0.01}, {"points", 3}};
    doc["horizon"] = 5.0;
    const fs::path dir = scratch("crash");
    EXPECT_THROW(run_in(doc, dir), pdhj::Error);
    EXPECT_TRUE(fs::exists(dir / "manifest.json"));
    EXPECT_FALSE(fs::exists(dir / "result.json"));
    const auto rows = collect_summary(dir);
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_EQ(rows[0].verdict, "INCOMPLETE");
}

TEST(Run, SolvePathMatchesGolden) {
    const fs::path dir = scratch("solve");
    const ExperimentConfig cfg = load_config((kConfigs / "solve.json").string());
    std::ostringstream log;
    RunOptions opt;
    opt.out_dir = dir;
    run_experiment(cfg, opt, log);
    const std::string csv = slurp(dir / "path.csv");
    expect_golden(csv, "path.csv");
    std::istringstream in(csv);
    expect_golden(path_to_json(read_path_csv(in)).dump(2) + "\n", "path.json");
}

TEST(Summary, EmptyDirectory) {
    const fs::path dir = scratch("empty");
    const auto rows = collect_summary(dir);
    EXPECT_TRUE(rows.empty());
    EXPECT_EQ(summary_status(rows), 0);
}

TEST(Summary, TableMatchesGolden) {
    const fs::path dir = scratch("table");
    auto fake = [&](const std::string& name, const std::string& kind, bool passed, const std::string& metric,
                    double value, bool with_result) {
        fs::create_directories(dir / name);
        std::ofstream(dir / name / "manifest.json") << json{{"kind", kind}}.dump();
        if (with_result) {
            std::ofstream(dir / name / "result.json")
                << json{{"passed", passed}, {"key_metric", {{"name", metric}, {"value", value}}}}.dump();
        }
    };
    fake("a-upsilon", "upsilon-check", true, "violations", 0.0, true);
    fake("b-isaacs", "isaacs-check", false, "max_isaacs_gap", 0.25, true);
    fake("c-crashed", "feedback-run", false, "", 0.0, false);
    fs::create_directories(dir / "d-stray");
    const auto rows = collect_summary(dir);
    std::ostringstream os;
    print_summary(rows, os);
    expect_golden(os.str(), "summary.txt");
    EXPECT_EQ(summary_status(rows), 1);
}

TEST(Binary, ExitCodes) {
    const fs::path root = scratch("binary");
    const std::string cfg = (kConfigs / "isaacs_desk.json").string();
    EXPECT_EQ(run_cli("isaacs-check --config " + cfg + " --out " + (root / "pass").string()), 0);

    // An understated l_f makes the Lipschitz audit fail.
    json bad = json::parse(slurp(kConfigs / "isaacs_desk.json"));
    bad["l_f"] = 0.1;
    std::ofstream(root / "bad.json") << bad.dump();
    EXPECT_EQ(run_cli("isaacs-check --config " + (root / "bad.json").string() + " --out " + (root / "fail").string()),
              1);

    EXPECT_EQ(run_cli("summary " + root.string()), 1);
    fs::remove_all(root / "fail");
    EXPECT_EQ(run_cli("summary " + root.string()), 0);

    EXPECT_EQ(run_cli("game-value --config " + (kConfigs / "game_value_missing_q.json").string()), 2);
    EXPECT_EQ(run_cli("game-value --config " + cfg), 2);
    EXPECT_EQ(run_cli("isaacs-check"), 2);
    EXPECT_EQ(run_cli("no-such-command"), 2);
}

TEST(Binary, OutRootFromEnvironment) {
    const fs::path root = scratch("envroot");
    const std::string cmd = "PDHJ_OUT_ROOT=" + root.string() + " " + std::string(PDHJ_BIN) +
                            " isaacs-check --seed 9 --config " + (kConfigs / "isaacs_desk.json").string() +
                            " > /dev/null 2>&1";
    ASSERT_EQ(std::system(cmd.c_str()), 0);
    EXPECT_TRUE(fs::exists(root / "isaacs-check-seed9" / "result.json"));
    const json m = json::parse(slurp(root / "isaacs-check-seed9" / "manifest.json"));
    EXPECT_EQ(m["seed"], 9);
}
