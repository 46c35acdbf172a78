#include "pdhj/feedback.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "pdhj/error.hpp"
#include "pdhj/parallel.hpp"
#include "pdhj/random.hpp"

namespace pdhj {

// ---------------------------------------------------------------------------
// Strategy

namespace {

std::shared_ptr<const ValueTable> non_null(std::shared_ptr<const ValueTable> u) {
    if (!u) {
        throw ConfigurationError("game", "feedback strategy needs a value table");
    }
    return u;
}

}  // namespace

FeedbackStrategy::FeedbackStrategy(const GameSpec& spec, const LyapunovParams& params,
                                   std::shared_ptr<const ValueTable> u, double t0, const Vec& x0,
                                   const FeedbackOptions& options)
    : spec_(std::make_shared<GameSpec>(spec)),
      params_(params),
      u_(non_null(std::move(u))),
      t0_(t0),
      x0_path_(Path::constant(u_->grid, x0)),
      options_(options) {
    const auto k0 = u_->grid.index_of(t0);
    if (!k0) {
        throw DomainError("game", "t0 must be a node of the value table grid");
    }
    if (static_cast<std::size_t>(x0.size()) != spec.dim()) {
        throw DomainError("game", "x0 dimension does not match the game");
    }

    const DelayDynamics dyn{spec.op, spec.l_f};
    const auto& c = spec.controls;
    library_.reserve(options.library_size);
    for (std::size_t j = 0; j < options.library_size; ++j) {
        Rng rng(stream_seed(options.library_seed, j));
        ForcingSelector pick = [&](const PathPrefix& x) -> Vec {
            const std::size_t p = rng() % c.p_points.size();
            const std::size_t q = rng() % c.q_points.size();
            return spec.f(x, c.p_points[p], c.q_points[q]);
        };
        library_.push_back(solve_delay_evolution(dyn, t0, x0_path_, pick).path);
        std::vector<double> uv(u_->grid.size(), std::numeric_limits<double>::quiet_NaN());
        for (std::size_t k = *k0; k < u_->grid.size(); ++k) {
            uv[k] = u_->value(Side::Upper, k, library_.back().value(k));
        }
        library_u_.push_back(std::move(uv));
    }
    if (options.include_lattice) {
        for (std::size_t i = 0; i < u_->lattice.size(); ++i) {
            lattice_points_.push_back(u_->lattice.point(i));
        }
    }
    if (library_size() == 0) {
        throw ConfigurationError("game", "companion library is empty");
    }
}

CompanionChoice FeedbackStrategy::companion(const PathPrefix& x) const {
    const std::size_t k = x.index();
    const double t = x.time();
    CompanionChoice best;
    best.objective = std::numeric_limits<double>::infinity();
    auto consider = [&](std::size_t index, bool lattice, double u_value, const auto& other_at) {
        double sup = 0.0;
        for (std::size_t i = 0; i <= k; ++i) {
            sup = std::max(sup, (x.at_node(i) - other_at(i)).norm());
        }
        const Vec diff = x.current() - other_at(k);
        const NuEval nu = lyapunov_nu_from(params_, t, diff, sup);
        const double obj = u_value + nu.value;
        if (obj < best.objective) {
            best.objective = obj;
            best.index = index;
            best.from_lattice = lattice;
            best.z = nu.dx;
        }
    };
    for (std::size_t j = 0; j < library_.size(); ++j) {
        const Path& other = library_[j];
        consider(j, false, library_u_[j][k], [&](std::size_t i) -> const Vec& { return other.value(i); });
    }
    for (std::size_t j = 0; j < lattice_points_.size(); ++j) {
        const Vec& c = lattice_points_[j];
        consider(library_.size() + j, true, u_->v_plus[k][j], [&](std::size_t) -> const Vec& { return c; });
    }
    return best;
}

std::size_t FeedbackStrategy::choose(const PathPrefix& x, CompanionChoice& companion_out) const {
    companion_out = companion(x);
    return hamiltonian(*spec_, x, companion_out.z).plus_p;
}

std::size_t FeedbackStrategy::choose(const PathPrefix& x) const {
    CompanionChoice c;
    return choose(x, c);
}

FeedbackStrategy extremal_shift_strategy(const GameSpec& spec, const LyapunovParams& params,
                                         std::shared_ptr<const ValueTable> u, double t0, const Vec& x0,
                                         const FeedbackOptions& options) {
    return FeedbackStrategy(spec, params, std::move(u), t0, x0, options);
}

// ---------------------------------------------------------------------------
// Adversaries

Adversary constant_adversary(std::size_t q_index) {
    return {"constant/" + std::to_string(q_index), [q_index](const PathPrefix&, std::size_t, std::size_t) {
                return q_index;
            }};
}

Adversary random_adversary(std::uint64_t seed, std::size_t q_count) {
    return {"random/" + std::to_string(seed), [seed, q_count](const PathPrefix&, std::size_t, std::size_t step) {
                return static_cast<std::size_t>(stream_seed(seed, step) % q_count);
            }};
}

Adversary switching_adversary(std::size_t period, std::size_t q_a, std::size_t q_b) {
    return {"switching/" + std::to_string(period) + "/" + std::to_string(q_a) + "-" + std::to_string(q_b),
            [=](const PathPrefix&, std::size_t, std::size_t step) { return (step / period) % 2 == 0 ? q_a : q_b; }};
}

Adversary greedy_dp_adversary(const GameSpec& spec, std::shared_ptr<const ValueTable> table) {
    auto s = std::make_shared<GameSpec>(spec);
    return {"greedy-dp", [s, table](const PathPrefix& x, std::size_t p, std::size_t step) {
                const Eigen::MatrixXd pay = dp_payoff_table(*s, *table, Side::Upper, step, x.current());
                return measurable_selection(pay.row(static_cast<Eigen::Index>(p)), 1.0).front();
            }};
}

std::vector<Adversary> adversary_suite(const GameSpec& spec, std::shared_ptr<const ValueTable> table,
                                       std::size_t count, std::uint64_t seed) {
    const std::size_t nq = spec.controls.q_points.size();
    std::vector<Adversary> out;
    for (std::size_t q = 0; q < nq; ++q) {
        out.push_back(constant_adversary(q));
    }
    for (std::size_t period : {1, 2, 4}) {
        for (std::size_t a = 0; a < nq; ++a) {
            for (std::size_t b = a + 1; b < nq; ++b) {
                out.push_back(switching_adversary(period, a, b));
            }
        }
    }
    out.push_back(greedy_dp_adversary(spec, std::move(table)));
    for (std::size_t i = 0; out.size() < count; ++i) {
        out.push_back(random_adversary(stream_seed(seed, i), nq));
    }
    if (out.size() > count) {
        out.resize(count);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Game runs

TimeGrid make_partition(const FeedbackStrategy& strategy, std::size_t steps) {
    return TimeGrid::uniform(strategy.t0(), strategy.grid().t_end(), steps);
}

StrategyTrace run_feedback_game(const GameSpec& spec, const FeedbackStrategy& strategy, const Adversary& adversary,
                                const TimeGrid& partition) {
    const TimeGrid& grid = strategy.grid();
    if (std::abs(partition.t_start() - strategy.t0()) > 1e-12 ||
        std::abs(partition.t_end() - grid.t_end()) > 1e-12) {
        throw DomainError("game", "partition must run from t0 to T");
    }
    std::vector<std::size_t> nodes;
    for (double t : partition.nodes()) {
        const auto k = grid.index_of(t);
        if (!k) {
            throw DomainError("game", "partition node " + std::to_string(t) + " is not a solver grid node");
        }
        nodes.push_back(*k);
    }

    const auto& c = spec.controls;
    std::vector<Vec> values(strategy.initial_path().values().begin(), strategy.initial_path().values().end());
    StrategyTrace trace{adversary.name, partition, grid, {}, {}, strategy.initial_path(), 0.0, 0.0, 0.0, {}};
    const SolveOptions solve;
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
        const std::size_t ka = nodes[i];
        const std::size_t kb = nodes[i + 1];
        StepDiagnostic d;
        d.t_start = grid.node(ka);
        d.t_end = grid.node(kb);
        CompanionChoice comp;
        const std::size_t p = strategy.choose(PathPrefix(grid, std::span<const Vec>(values.data(), ka + 1)), comp);
        d.p_index = p;
        d.u_before = comp.objective;
        d.companion_index = comp.index;
        d.companion_from_lattice = comp.from_lattice;
        trace.p_indices.push_back(p);
        for (std::size_t k = ka; k < kb; ++k) {
            const PathPrefix prefix(grid, std::span<const Vec>(values.data(), k + 1));
            const std::size_t q = adversary.pick(prefix, p, k);
            if (q >= c.q_points.size()) {
                throw DomainError("game", "adversary '" + adversary.name + "' returned an invalid q-index");
            }
            trace.q_indices.push_back(q);
            const Vec f = spec.f(prefix, c.p_points[p], c.q_points[q]);
            const double l = spec.ell(prefix, c.p_points[p], c.q_points[q]);
            if (!f.allFinite() || !std::isfinite(l)) {
                throw EvaluationError("game", "non-finite f or l at solver step " + std::to_string(k));
            }
            d.integral_cost += grid.step(k) * l;
            values[k + 1] = implicit_euler_step(spec.op, grid.node(k + 1), grid.step(k), values[k], f, solve, k).state;
        }
        d.u_after = strategy.companion(PathPrefix(grid, std::span<const Vec>(values.data(), kb + 1))).objective;
        d.lhs = d.integral_cost + d.u_after - d.u_before;
        trace.running_cost += d.integral_cost;
        trace.steps.push_back(d);
    }
    trace.path = Path(grid, std::move(values));
    trace.terminal_cost = spec.h(trace.path);
    trace.payoff = trace.running_cost + trace.terminal_cost;
    return trace;
}

double calibrate_m_hat(const std::vector<StrategyTrace>& traces) {
    double m = 0.0;
    for (const auto& tr : traces) {
        for (const auto& s : tr.steps) {
            m = std::max(m, s.lhs / (s.t_end - s.t_start));
        }
    }
    return m;
}

LyapunovCheck check_lyapunov(const std::vector<StrategyTrace>& traces, double m_hat) {
    LyapunovCheck out;
    out.m_hat = m_hat;
    out.max_ratio = -std::numeric_limits<double>::infinity();
    for (const auto& tr : traces) {
        for (const auto& s : tr.steps) {
            const double dt = s.t_end - s.t_start;
            ++out.steps;
            out.max_ratio = std::max(out.max_ratio, s.lhs / dt);
            if (s.lhs <= m_hat * dt + 1e-12) {
                ++out.within;
            }
            if (s.lhs > 2.0 * m_hat * dt + 1e-12) {
                ++out.beyond_double;
            }
        }
    }
    out.fraction_within = out.steps ? static_cast<double>(out.within) / static_cast<double>(out.steps) : 1.0;
    out.passed = out.fraction_within >= 0.95 && out.beyond_double == 0;
    return out;
}

namespace {

std::vector<StrategyTrace> run_all(const GameSpec& spec, const FeedbackStrategy& strategy,
                                   const std::vector<Adversary>& adversaries, const TimeGrid& partition,
                                   std::size_t jobs) {
    std::vector<std::optional<StrategyTrace>> slots(adversaries.size());
    parallel_for(adversaries.size(), jobs, [&](std::size_t i) {
        slots[i] = run_feedback_game(spec, strategy, adversaries[i], partition);
    });
    std::vector<StrategyTrace> out;
    out.reserve(slots.size());
    for (auto& s : slots) {
        out.push_back(std::move(*s));
    }
    return out;
}

}  // namespace

GuaranteedResult estimate_guaranteed_result(const GameSpec& spec, const FeedbackStrategy& strategy,
                                            const std::vector<Adversary>& adversaries,
                                            const std::vector<std::size_t>& partition_steps,
                                            const std::vector<Adversary>& calibration, std::size_t jobs,
                                            std::uint64_t adversary_seed) {
    if (adversaries.empty()) {
        throw ParameterError("game", "adversary budget must be at least 1");
    }
    if (partition_steps.empty()) {
        throw ParameterError("game", "at least one partition is required");
    }
    GuaranteedResult out;
    out.adversary_budget = adversaries.size();
    out.adversary_seed = adversary_seed;
    out.estimate = -std::numeric_limits<double>::infinity();
    for (std::size_t steps : partition_steps) {
        const TimeGrid partition = make_partition(strategy, steps);
        const std::vector<StrategyTrace> traces = run_all(spec, strategy, adversaries, partition, jobs);
        PartitionResult pr;
        pr.steps = steps;
        pr.delta = partition.mesh();
        pr.runs = traces.size();
        pr.estimate = -std::numeric_limits<double>::infinity();
        pr.min_payoff = std::numeric_limits<double>::infinity();
        for (const auto& tr : traces) {
            if (tr.payoff > pr.estimate) {
                pr.estimate = tr.payoff;
                pr.worst_adversary = tr.adversary;
            }
            pr.min_payoff = std::min(pr.min_payoff, tr.payoff);
        }
        if (!calibration.empty()) {
            const double m_hat = calibrate_m_hat(run_all(spec, strategy, calibration, partition, jobs));
            pr.lyapunov = check_lyapunov(traces, m_hat);
        }
        out.estimate = std::max(out.estimate, pr.estimate);
        out.partitions.push_back(std::move(pr));
    }
    return out;
}

FeedbackExperimentReport run_feedback_experiment(const GameSpec& spec, std::shared_ptr<const ValueTable> table,
                                                 const FeedbackExperiment& config) {
    FeedbackExperimentReport rep;
    const LyapunovParams params = LyapunovParams::create(config.epsilon, spec.lambda_L, spec.horizon);
    rep.epsilon = params.epsilon;
    rep.epsilon0 = params.epsilon0;
    rep.lattice_spacing = table->lattice.max_spacing();
    rep.monotone_tolerance = rep.lattice_spacing;
    rep.v_plus = table->value_at(Side::Upper, config.t0, config.x0);
    rep.v_minus = table->value_at(Side::Lower, config.t0, config.x0);

    const FeedbackStrategy strategy = extremal_shift_strategy(spec, params, table, config.t0, config.x0, config.strategy);
    const std::vector<Adversary> adversaries = adversary_suite(spec, table, config.adversaries, config.seed);
    // Calibration set: the deterministic families plus random adversaries on a
    // seed stream disjoint from the test set.
    const std::size_t nq = spec.controls.q_points.size();
    const std::size_t fixed = nq + 3 * (nq * (nq - 1) / 2) + 1;
    const std::vector<Adversary> calibration =
        adversary_suite(spec, table, fixed + config.calibration_random, stream_seed(config.seed, 0xCA11B));

    std::vector<std::size_t> steps = config.partition_steps;
    std::sort(steps.begin(), steps.end());
    rep.result = estimate_guaranteed_result(spec, strategy, adversaries, steps, calibration, config.jobs, config.seed);

    rep.monotone_ok = true;
    rep.lyapunov_ok = true;
    bool sandwich = true;
    for (std::size_t i = 0; i < rep.result.partitions.size(); ++i) {
        const PartitionResult& pr = rep.result.partitions[i];
        const double tol = spec.l_f * pr.delta + rep.epsilon + rep.lattice_spacing;
        rep.tolerances.push_back(tol);
        rep.upper_ok.push_back(pr.estimate <= rep.v_plus + tol);
        rep.lower_ok.push_back(pr.estimate >= rep.v_minus - tol);
        sandwich = sandwich && rep.upper_ok.back() && rep.lower_ok.back();
        rep.lyapunov_ok = rep.lyapunov_ok && pr.lyapunov.passed;
        if (i > 0 && pr.estimate > rep.result.partitions[i - 1].estimate + rep.monotone_tolerance) {
            rep.monotone_ok = false;
        }
    }
    rep.passed = sandwich && rep.monotone_ok && rep.lyapunov_ok;
    return rep;
}

}  // namespace pdhj
