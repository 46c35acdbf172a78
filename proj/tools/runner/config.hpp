#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pdhj/game.hpp"
#include "pdhj/minimax.hpp"
#include "pdhj/stability.hpp"

namespace pdhj::tools {

inline constexpr int kSchemaVersion = 1;

// Schema violation. `path` is the dotted field path, e.g. `controls.q_points`.
class UsageError : public std::runtime_error {
public:
    UsageError(std::string path, const std::string& what)
        : std::runtime_error(path.empty() ? what : "`" + path + "`: " + what), path_(std::move(path)) {}
    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

enum class Kind { Solve, UpsilonCheck, GameValue, FeedbackRun, MinimaxCheck, StabilityRun, IsaacsCheck };

const char* to_string(Kind k);
Kind kind_from_string(const std::string& s);  // throws UsageError
const std::vector<std::string>& kind_names();

struct OperatorBlock {
    std::string kind = "identity";  // identity | linear | p-laplacian
    std::size_t dim = 1;            // node count for p-laplacian
    Eigen::MatrixXd matrix;
    double p_exp = 2.0;
};

struct SolveBlock {
    double t0 = 0.0;
    Vec x0;                          // constant history on [0, t0]
    std::string forcing = "constant";  // constant | random
    Vec value;                       // constant forcing
    std::size_t count = 8;           // random: reachable-set samples
    double lipschitz_L = 1.0;
    std::size_t audit_samples = 200;
};

struct UpsilonBlock {
    std::size_t bound_pairs = 1000;
    std::size_t chain_paths = 100;
    double epsilon = 0.25;
};

struct GameValueBlock {
    double t = 0.0;
    Vec x;  // default: origin
    Vec z;  // default: all ones
};

struct IsaacsBlock {
    std::size_t samples = 1000;
    double radius = 2.0;
};

struct FeedbackBlock {
    double t0 = 0.0;
    Vec x0;
    double epsilon = 0.25;
    std::vector<std::size_t> partition_steps = {8, 16, 32};
    std::size_t adversaries = 200;
    std::size_t calibration_random = 16;
    std::size_t library_size = 64;
    std::uint64_t library_seed = 7;
    bool include_lattice = true;
};

struct MinimaxBlock {
    std::size_t sites = 20;
    double horizon = 0.25;
    std::size_t budget = 64;
    Side side = Side::Upper;
    ToleranceModel tolerance;
    double z_radius = 2.0;
    bool viscosity = true;
    double viscosity_c = 0.0;
};

struct StabilityBlock {
    PerturbationFamily family = PerturbationFamily::TerminalShift;
    std::vector<std::size_t> n_list = {2, 4, 8, 16};
};

struct LatticeBlock {
    std::vector<double> lo;
    std::vector<double> hi;
    std::vector<std::size_t> points;
};

/**
 * ExperimentConfig: validated form of a run configuration.
 *
 * `resolved` echoes the configuration with every default filled in; it is
 * what the manifest records.
 */
struct ExperimentConfig {
    int schema_version = kSchemaVersion;
    Kind kind = Kind::UpsilonCheck;
    std::uint64_t seed = 1;
    double horizon = 1.0;
    double lambda_L = 0.1;
    std::size_t time_steps = 32;
    std::optional<OperatorBlock> op;
    std::optional<BuiltinGame> game;
    std::optional<LatticeBlock> lattice;
    SolveBlock solve;
    UpsilonBlock upsilon;
    GameValueBlock game_value;
    IsaacsBlock isaacs;
    FeedbackBlock feedback;
    MinimaxBlock minimax;
    StabilityBlock stability;
    nlohmann::json resolved;
};

// Validates the whole document before anything is computed. Unknown and
// missing fields raise UsageError with the field path.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::string& path);

}  // namespace pdhj::tools
