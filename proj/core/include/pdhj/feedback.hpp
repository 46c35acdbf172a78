#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "pdhj/game.hpp"
#include "pdhj/upsilon.hpp"
#include "pdhj/value.hpp"

namespace pdhj {

struct FeedbackOptions {
    std::size_t library_size = 64;   // reachable-set samples in the companion library
    std::uint64_t library_seed = 7;
    bool include_lattice = true;     // also lattice points lifted to constant paths
};

struct CompanionChoice {
    std::size_t index = 0;      // into the library (samples first, then lattice points)
    bool from_lattice = false;
    double objective = 0.0;     // u(t, x~(t)) + ν^ε(t, x - x~), the value of u_a^ε
    Vec z;                      // ∂xν^ε(t, x - x~)
};

/**
 * FeedbackStrategy: extremal-shift rule for the minimising player.
 *
 * At a partition node the companion path x~ minimises u(t, x~(t)) +
 * ν^ε(t, x - x~) over the library, and p is the smallest-index minimiser of
 * max_q (l + (f, ∂xν^ε(t, x - x~))). Paths live on the value table's grid.
 */
class FeedbackStrategy {
public:
    FeedbackStrategy(const GameSpec& spec, const LyapunovParams& params, std::shared_ptr<const ValueTable> u,
                     double t0, const Vec& x0, const FeedbackOptions& options = {});

    CompanionChoice companion(const PathPrefix& x) const;
    std::size_t choose(const PathPrefix& x) const;
    std::size_t choose(const PathPrefix& x, CompanionChoice& companion_out) const;

    const GameSpec& spec() const { return *spec_; }
    const LyapunovParams& params() const { return params_; }
    const ValueTable& table() const { return *u_; }
    const TimeGrid& grid() const { return u_->grid; }
    double t0() const { return t0_; }
    const Path& initial_path() const { return x0_path_; }
    std::size_t library_size() const { return library_.size() + lattice_points_.size(); }
    const FeedbackOptions& options() const { return options_; }

private:
    std::shared_ptr<const GameSpec> spec_;
    LyapunovParams params_;
    std::shared_ptr<const ValueTable> u_;
    double t0_;
    Path x0_path_;
    FeedbackOptions options_;
    std::vector<Path> library_;
    std::vector<std::vector<double>> library_u_;  // u at library_[j] node k
    std::vector<Vec> lattice_points_;
};

FeedbackStrategy extremal_shift_strategy(const GameSpec& spec, const LyapunovParams& params,
                                         std::shared_ptr<const ValueTable> u, double t0, const Vec& x0,
                                         const FeedbackOptions& options = {});

// q-policy of the second player: picks a q-index per solver step, knowing
// the committed p-index.
struct Adversary {
    std::string name;
    std::function<std::size_t(const PathPrefix& x, std::size_t p_index, std::size_t step)> pick;
};

Adversary constant_adversary(std::size_t q_index);
// Stateless: q = hash(seed, step) mod |Q|.
Adversary random_adversary(std::uint64_t seed, std::size_t q_count);
Adversary switching_adversary(std::size_t period, std::size_t q_a, std::size_t q_b);
// argmax_q [Δ l + v_plus(successor)], smallest index on ties.
Adversary greedy_dp_adversary(const GameSpec& spec, std::shared_ptr<const ValueTable> table);

// Constants, alternating switches, the greedy adversary, then random
// adversaries (streams of `seed`) until `count` entries.
std::vector<Adversary> adversary_suite(const GameSpec& spec, std::shared_ptr<const ValueTable> table,
                                       std::size_t count, std::uint64_t seed);

struct StepDiagnostic {
    double t_start = 0.0;
    double t_end = 0.0;
    std::size_t p_index = 0;
    double integral_cost = 0.0;  // ∫ l over the partition step (left-point rule)
    double u_before = 0.0;       // u_a^ε at t_start
    double u_after = 0.0;        // u_a^ε at t_end
    double lhs = 0.0;            // integral_cost + u_after - u_before
    std::size_t companion_index = 0;
    bool companion_from_lattice = false;
};

struct StrategyTrace {
    std::string adversary;
    TimeGrid partition;
    TimeGrid solver_grid;
    std::vector<std::size_t> p_indices;  // per partition step
    std::vector<std::size_t> q_indices;  // per solver step from t0
    Path path;
    double running_cost = 0.0;
    double terminal_cost = 0.0;
    double payoff = 0.0;                 // running_cost + terminal_cost
    std::vector<StepDiagnostic> steps;
};

// Partition nodes must be nodes of the strategy grid, starting at t0 and
// ending at T.
StrategyTrace run_feedback_game(const GameSpec& spec, const FeedbackStrategy& strategy, const Adversary& adversary,
                                const TimeGrid& partition);

// Partition of [t0, T] with `steps` equal steps.
TimeGrid make_partition(const FeedbackStrategy& strategy, std::size_t steps);

struct LyapunovCheck {
    double m_hat = 0.0;
    std::size_t steps = 0;
    std::size_t within = 0;          // lhs <= m_hat Δt
    std::size_t beyond_double = 0;   // lhs > 2 m_hat Δt
    double fraction_within = 0.0;
    double max_ratio = 0.0;          // max lhs / Δt
    bool passed = false;             // fraction >= 0.95 and beyond_double == 0
};

// max over all steps of lhs / Δt (clamped at 0).
double calibrate_m_hat(const std::vector<StrategyTrace>& traces);
LyapunovCheck check_lyapunov(const std::vector<StrategyTrace>& traces, double m_hat);

struct PartitionResult {
    std::size_t steps = 0;
    double delta = 0.0;
    double estimate = 0.0;           // max payoff over the adversaries
    std::string worst_adversary;
    double min_payoff = 0.0;
    std::size_t runs = 0;
    LyapunovCheck lyapunov;
};

struct GuaranteedResult {
    double estimate = 0.0;           // max over partitions and adversaries
    std::size_t adversary_budget = 0;
    std::uint64_t adversary_seed = 0;
    std::vector<PartitionResult> partitions;
};

// Max payoff over the adversaries and partitions. When `calibration` is not
// empty, m_hat is calibrated on it per partition and the Lyapunov check is
// run on the adversary traces.
GuaranteedResult estimate_guaranteed_result(const GameSpec& spec, const FeedbackStrategy& strategy,
                                            const std::vector<Adversary>& adversaries,
                                            const std::vector<std::size_t>& partition_steps,
                                            const std::vector<Adversary>& calibration = {}, std::size_t jobs = 1,
                                            std::uint64_t adversary_seed = 0);

struct FeedbackExperiment {
    double t0 = 0.0;
    Vec x0;
    double epsilon = 0.25;
    std::vector<std::size_t> partition_steps = {8, 16, 32};
    std::size_t adversaries = 200;
    std::size_t calibration_random = 16;
    std::uint64_t seed = 1;
    FeedbackOptions strategy;
    std::size_t jobs = 1;
};

struct FeedbackExperimentReport {
    double v_plus = 0.0;
    double v_minus = 0.0;
    double epsilon = 0.0;
    double epsilon0 = 0.0;
    double lattice_spacing = 0.0;
    double monotone_tolerance = 0.0;
    GuaranteedResult result;
    std::vector<double> tolerances;   // per partition: l_f δ + ε + lattice spacing
    std::vector<bool> upper_ok;       // estimate <= v_plus + tol
    std::vector<bool> lower_ok;       // estimate >= v_minus - tol
    bool monotone_ok = false;         // estimates weakly decrease as δ shrinks
    bool lyapunov_ok = false;
    bool passed = false;
};

FeedbackExperimentReport run_feedback_experiment(const GameSpec& spec, std::shared_ptr<const ValueTable> table,
                                                 const FeedbackExperiment& config);

}  // namespace pdhj
