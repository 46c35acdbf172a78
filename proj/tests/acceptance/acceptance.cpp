// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "pdhj/error.hpp"
#include "pdhj/evolution.hpp"
#include "pdhj/feedback.hpp"
#include "pdhj/game.hpp"
#include "pdhj/minimax.hpp"
#include "pdhj/random.hpp"
#include "pdhj/stability.hpp"
#include "pdhj/upsilon.hpp"
#include "pdhj/value.hpp"

using namespace pdhj;

namespace {

// Pinned limits.
constexpr double kBoundsSeconds = 5.0;
constexpr double kChainSeconds = 30.0;
constexpr double kSolverSeconds = 10.0;
constexpr double kDpSeconds = 60.0;
constexpr double kRatioLo = 1.7;
constexpr double kRatioHi = 2.3;
constexpr double kMonotoneFloor = -1e-12;
constexpr double kKinkOrder = 0.9;
constexpr double kSmoothOrder = 1.9;
constexpr double kLyapunovFraction = 0.95;
constexpr std::size_t kAdversaries = 200;
constexpr std::size_t kSites = 20;

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), f, a);
    return buf;
}

const BatteryCheck* find_check(const BatteryReport& r, const std::string& name) {
    for (const auto& c : r.checks) {
        if (c.name == name) {
            return &c;
        }
    }
    return nullptr;
}

Outcome upsilon_bounds() {
    const auto t0 = std::chrono::steady_clock::now();
    BatteryOptions opt;
    opt.bound_pairs = 1000;
    opt.chain_paths = 0;
    const BatteryReport r = run_upsilon_battery(opt);
    const double sec = seconds_since(t0);
    const BatteryCheck* c = find_check(r, "psi_bounds");
    const bool ok = c && c->evaluations == 1000 && c->violations == 0 && sec < kBoundsSeconds;
    return {ok, "pairs=" + std::to_string(c ? c->evaluations : 0) + " violations=" +
                    std::to_string(c ? c->violations : 0) + fmt(" min_ratio=%.6f", c ? c->metric : 0.0) +
                    fmt(" time=%.2fs", sec)};
}

Outcome chain_rule() {
    const auto t0 = std::chrono::steady_clock::now();
    BatteryOptions opt;
    opt.bound_pairs = 0;
    opt.chain_paths = 100;
    const BatteryReport r = run_upsilon_battery(opt);
    const double sec = seconds_since(t0);
    const BatteryCheck* u = find_check(r, "chain_rule_upsilon");
    const BatteryCheck* n = find_check(r, "chain_rule_nu");
    const bool orders = (r.kink_cases == 0 || r.min_kink_order >= kKinkOrder) &&
                        (r.smooth_cases == 0 || r.min_smooth_order >= kSmoothOrder);
    const bool ok = u && n && u->evaluations == 100 && n->evaluations == 100 && u->violations == 0 &&
                    n->violations == 0 && orders && sec < kChainSeconds;
    return {ok, "paths=100 kink_cases=" + std::to_string(r.kink_cases) + fmt(" min_kink_order=%.3f", r.min_kink_order) +
                    " smooth_cases=" + std::to_string(r.smooth_cases) +
                    fmt(" min_smooth_order=%.3f", r.min_smooth_order) + " exact=" + std::to_string(r.exact_cases) +
                    fmt(" time=%.2fs", sec)};
}

Outcome theta_range() {
    BatteryOptions opt;
    opt.bound_pairs = 1000;
    opt.chain_paths = 0;
    opt.seed = 2;
    const BatteryReport r = run_upsilon_battery(opt);
    const BatteryCheck* th = find_check(r, "theta_range");
    const BatteryCheck* dx = find_check(r, "dx_bound");
    const bool ok = th && dx && th->violations == 0 && dx->violations == 0;
    return {ok, "evaluations=" + std::to_string(th ? th->evaluations : 0) + fmt(" max_theta=%.6f", th ? th->metric : 0.0) +
                    fmt(" max_dx_ratio=%.6f", dx ? dx->metric : 0.0)};
}

double linear_error(std::size_t n, double x0, double f) {
    const TimeGrid grid = TimeGrid::uniform(0.0, 1.0, n);
    DelayDynamics dyn{build_linear(Eigen::MatrixXd::Identity(1, 1)), std::abs(f)};
    const Path start = Path::constant(grid, Vec::Constant(1, x0));
    const SolveReport r =
        solve_delay_evolution(dyn, 0.0, start, [f](const PathPrefix&) { return Vec::Constant(1, f); });
    double err = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double t = grid.node(k);
        const double exact = f + (x0 - f) * std::exp(-t);
        err = std::max(err, std::abs(r.path.value(k)[0] - exact));
    }
    return err;
}

Outcome solver_order() {
    const auto t0 = std::chrono::steady_clock::now();
    bool ok = true;
    std::string detail;
    for (const auto& [x0, f] : std::vector<std::pair<double, double>>{{1.0, 0.0}, {0.0, 1.0}}) {
        double prev = linear_error(32, x0, f);
        detail += f == 0.0 ? "exp(-t) ratios:" : " 1-exp(-t) ratios:";
        for (std::size_t n = 64; n <= 512; n *= 2) {
            const double e = linear_error(n, x0, f);
            const double ratio = prev / e;
            ok = ok && ratio >= kRatioLo && ratio <= kRatioHi;
            detail += fmt(" %.4f", ratio);
            prev = e;
        }
    }
    const double sec = seconds_since(t0);
    ok = ok && sec < kSolverSeconds;
    return {ok, detail + fmt(" time=%.2fs", sec)};
}

Outcome operator_audits() {
    bool ok = true;
    double min_pair = std::numeric_limits<double>::infinity();
    double min_margin = std::numeric_limits<double>::infinity();
    std::size_t cases = 0;
    for (double p : {2.0, 3.0, 4.0}) {
        for (std::size_t nodes : {8u, 16u, 32u}) {
            const OperatorSpec op = build_p_laplacian(nodes, p);
            const AuditReport a = audit_hypotheses(op, 1000, 11 + cases);
            ++cases;
            min_pair = std::min(min_pair, a.min_monotonicity_normalized);
            min_margin = std::min(min_margin, a.min_coercivity_ratio / op.c2);
            ok = ok && op.c2 > 0.0 && a.samples == 1000 && a.min_monotonicity_normalized >= kMonotoneFloor &&
                 a.min_coercivity_ratio >= op.c2 && !a.monotonicity_violated && !a.coercivity_violated;
        }
    }
    return {ok, "cases=" + std::to_string(cases) + " samples=1000" + fmt(" min_pairing=%.3e", min_pair) +
                    fmt(" min_ratio/c2=%.4f", min_margin)};
}

Outcome hamiltonian_facts() {
    const GameSpec product = make_game(non_isaacs_game());
    BuiltinGame sum_cfg = non_isaacs_game();
    sum_cfg.dynamics = "sum";
    const GameSpec sum = make_game(sum_cfg);
    const GameSpec desk = make_game(desk_isaacs_game());

    std::size_t order = 0;
    std::size_t samples = 0;
    for (const GameSpec* g : {&product, &sum, &desk}) {
        const LipschitzAudit a = audit_hamiltonian_lipschitz(*g, 1000, 5);
        order += a.order_violations;
        samples += a.samples;
    }
    const Vec one = Vec::Ones(1);
    const Vec zero = Vec::Zero(1);
    const HamiltonianEval hp = hamiltonian_state(product, 0.0, zero, one);
    const HamiltonianEval hs = hamiltonian_state(sum, 0.0, zero, one);
    const bool ok = order == 0 && hp.isaacs_gap == 2.0 && hp.f_plus == 1.0 && hp.f_minus == -1.0 &&
                    hs.isaacs_gap == 0.0;
    return {ok, "sampled=" + std::to_string(samples) + " order_violations=" + std::to_string(order) +
                    fmt(" product_gap=%.17g", hp.isaacs_gap) + fmt(" sum_gap=%.17g", hs.isaacs_gap)};
}

Outcome dp_coherence() {
    const GameSpec spec = make_game(non_isaacs_game());
    const TimeGrid grid = TimeGrid::uniform(0.0, spec.horizon, 32);
    const StateLattice lattice = StateLattice::uniform(1, -2.0, 2.0, 64);
    const auto t0 = std::chrono::steady_clock::now();
    const ValueTable table = dp_value(spec, grid, lattice);
    const double sec = seconds_since(t0);

    bool dpp = true;
    for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
        for (Side s : {Side::Lower, Side::Upper}) {
            dpp = dpp && dp_backup(spec, grid, lattice, k, table.side(s)[k + 1], s) == table.side(s)[k];
        }
    }
    bool ordered = true;
    double max_gap = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        for (std::size_t i = 0; i < lattice.size(); ++i) {
            ordered = ordered && table.v_minus[k][i] <= table.v_plus[k][i];
            max_gap = std::max(max_gap, table.v_plus[k][i] - table.v_minus[k][i]);
        }
    }
    bool terminal = true;
    const std::size_t n = grid.size() - 1;
    for (std::size_t i = 0; i < lattice.size(); ++i) {
        const double h = spec.h_state(lattice.point(i));
        terminal = terminal && table.v_minus[n][i] == h && table.v_plus[n][i] == h;
    }
    const bool ok = dpp && ordered && terminal && sec < kDpSeconds;
    return {ok, std::string("dpp_bit_exact=") + (dpp ? "yes" : "no") + " ordered=" + (ordered ? "yes" : "no") +
                    " terminal_exact=" + (terminal ? "yes" : "no") + fmt(" max_gap=%.4f", max_gap) +
                    fmt(" time=%.2fs", sec)};
}

Outcome feedback_efficacy() {
    const GameSpec spec = make_game(desk_isaacs_game());
    const TimeGrid grid = TimeGrid::uniform(0.0, spec.horizon, 32);
    const StateLattice lattice = StateLattice::uniform(1, -2.0, 2.0, 65);
    auto table = std::make_shared<const ValueTable>(dp_value(spec, grid, lattice));
    FeedbackExperiment cfg;
    cfg.t0 = 0.0;
    cfg.x0 = Vec::Constant(1, 0.5);
    cfg.epsilon = 0.25;
    cfg.partition_steps = {8, 16, 32};
    cfg.adversaries = kAdversaries;
    cfg.seed = 1;
    const FeedbackExperimentReport r = run_feedback_experiment(spec, table, cfg);

    bool upper = true;
    std::string detail = fmt("v_plus=%.5f", r.v_plus) + fmt(" v_minus=%.5f", r.v_minus) + " estimates:";
    bool bounded = true;
    double min_fraction = 1.0;
    for (std::size_t i = 0; i < r.result.partitions.size(); ++i) {
        const auto& p = r.result.partitions[i];
        upper = upper && r.upper_ok[i];
        bounded = bounded && p.lyapunov.beyond_double == 0;
        min_fraction = std::min(min_fraction, p.lyapunov.fraction_within);
        detail += fmt(" %.5f", p.estimate) + fmt("(tol %.4f)", r.tolerances[i]);
    }
    const bool lyap = min_fraction >= kLyapunovFraction && bounded;
    const bool ok = r.result.partitions.size() == 3 && upper && r.monotone_ok && lyap && r.lyapunov_ok;
    return {ok, detail + std::string(" monotone=") + (r.monotone_ok ? "yes" : "no") +
                    fmt(" lyapunov_within=%.4f", min_fraction) + " beyond_2m=" + (bounded ? "0" : ">0") +
                    " adversaries=" + std::to_string(kAdversaries)};
}

Outcome measurable_selection_check() {
    Rng rng(stream_seed(9, 0));
    bool ok = true;
    for (int i = 0; i < 50; ++i) {
        const Eigen::Index np = 1 + static_cast<Eigen::Index>(rng() % 6);
        const Eigen::Index nq = 1 + static_cast<Eigen::Index>(rng() % 6);
        Eigen::MatrixXd h(np, nq);
        for (Eigen::Index a = 0; a < np; ++a) {
            for (Eigen::Index b = 0; b < nq; ++b) {
                // coarse values so ties occur
                h(a, b) = std::round(uniform(rng, -3.0, 3.0));
            }
        }
        const auto sel = measurable_selection(h, 1e-3);
        for (Eigen::Index a = 0; a < np; ++a) {
            const double best = h.row(a).maxCoeff();
            Eigen::Index first = 0;
            while (h(a, first) != best) {
                ++first;
            }
            ok = ok && h(a, static_cast<Eigen::Index>(sel[static_cast<std::size_t>(a)])) == best &&
                 static_cast<Eigen::Index>(sel[static_cast<std::size_t>(a)]) == first;
        }
    }
    Eigen::MatrixXd pq(3, 3);
    const double grid[3] = {-1.0, 0.0, 1.0};
    for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) {
            pq(a, b) = grid[a] * grid[b];
        }
    }
    const bool ties = measurable_selection(pq, 0.1) == std::vector<std::size_t>{0, 0, 2} &&
                      measurable_selection(Eigen::MatrixXd::Constant(4, 5, 2.5), 0.1) ==
                          std::vector<std::size_t>(4, 0);
    return {ok && ties, std::string("random_matrices=50 exact=") + (ok ? "yes" : "no") +
                            " tie_cases=" + (ties ? "match" : "mismatch")};
}

Outcome minimax_residuals() {
    const GameSpec spec = make_game(desk_isaacs_game());
    const TimeGrid grid = TimeGrid::uniform(0.0, spec.horizon, 32);
    const StateLattice lattice = StateLattice::uniform(1, -2.0, 2.0, 65);
    const ValueTable table = dp_value(spec, grid, lattice);
    ResidualOptions opt;
    opt.side = Side::Upper;
    const auto sites = random_sites(table, kSites, 3, opt.horizon);
    std::size_t pass = 0;
    double worst_super = -1e300;
    double worst_sub = 1e300;
    for (std::size_t i = 0; i < sites.size(); ++i) {
        opt.seed = stream_seed(3, i);
        const ResidualReport sup = minimax_residual(table, spec, sites[i], Direction::Super, opt);
        const ResidualReport sub = minimax_residual(table, spec, sites[i], Direction::Sub, opt);
        worst_super = std::max(worst_super, sup.slack);
        worst_sub = std::min(worst_sub, sub.slack);
        pass += sup.passed && sub.passed ? 1 : 0;
    }

    ValueTable bumped = table;
    const std::size_t kb = 8;
    const std::size_t ib = 40;
    bumped.v_plus[kb][ib] += 1.0;
    std::vector<Site> probe = random_sites(bumped, kSites, 4, opt.horizon);
    probe.push_back({grid.node(kb), lattice.point(ib), Vec::Zero(1)});
    std::size_t caught = 0;
    for (std::size_t i = 0; i < probe.size(); ++i) {
        opt.seed = stream_seed(4, i);
        const ResidualReport sup = minimax_residual(bumped, spec, probe[i], Direction::Super, opt);
        const ResidualReport sub = minimax_residual(bumped, spec, probe[i], Direction::Sub, opt);
        caught += sup.passed && sub.passed ? 0 : 1;
    }
    const double tol = opt.tolerance(lattice.max_spacing(), grid.mesh(), opt.budget);
    const bool ok = pass == sites.size() && caught >= 1;
    return {ok, "sites_passed=" + std::to_string(pass) + "/" + std::to_string(sites.size()) +
                    fmt(" max_super_slack=%.4f", worst_super) + fmt(" min_sub_slack=%.4f", worst_sub) +
                    fmt(" tol=%.4f", tol) + " mutation_failures=" + std::to_string(caught)};
}

Outcome stability() {
    const GameSpec spec = make_game(desk_isaacs_game());
    const TimeGrid grid = TimeGrid::uniform(0.0, spec.horizon, 16);
    const StateLattice lattice = StateLattice::uniform(1, -2.0, 2.0, 33);
    const std::vector<std::size_t> ns{2, 4, 8, 16};
    const StabilityReport shift = stability_experiment(spec, PerturbationFamily::TerminalShift, ns, grid, lattice);
    const StabilityReport drift = stability_experiment(spec, PerturbationFamily::Drift, ns, grid, lattice);
    double shift_err = 0.0;
    for (std::size_t i = 0; i < ns.size(); ++i) {
        shift_err = std::max(shift_err, std::abs(shift.distances[i] - 1.0 / static_cast<double>(ns[i])));
    }
    std::string d;
    for (double v : drift.distances) {
        d += fmt(" %.5f", v);
    }
    const bool ok = shift.passed && shift.matches_magnitude && drift.passed && drift.strictly_decreasing;
    return {ok, fmt("shift_max_error=%.2e", shift_err) + " drift_distances:" + d};
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria{
        {"upsilon-bounds", upsilon_bounds},
        {"chain-rule", chain_rule},
        {"theta-range", theta_range},
        {"solver-order", solver_order},
        {"operator-audits", operator_audits},
        {"hamiltonian-facts", hamiltonian_facts},
        {"dp-coherence", dp_coherence},
        {"feedback-efficacy", feedback_efficacy},
        {"measurable-selection", measurable_selection_check},
        {"minimax-residuals", minimax_residuals},
        {"stability", stability},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += o.pass ? 0 : 1;
        std::printf("%s %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].name, o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
