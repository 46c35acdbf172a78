#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pdhj/path.hpp"

namespace pdhj {

enum class OperatorKind { Linear, PLaplacian1D, Custom };

const char* to_string(OperatorKind kind);

/**
 * OperatorSpec: monotone coercive operator A(t, .) : V -> V*.
 *
 * `eval` must be reentrant; the solver and the audits call it from several
 * threads. `jacobian` is optional, a forward-difference Jacobian is used
 * when it is empty. c1, a1_bound bound ‖A(t,x)‖_* <= a1 + c1 ‖x‖^{p-1};
 * c2 is the coercivity constant in <A(t,x), x> >= c2 ‖x‖^p.
 */
struct OperatorSpec {
    StateSpace space = StateSpace::euclidean(1);
    std::function<Vec(double, const Vec&)> eval;
    std::function<Eigen::MatrixXd(double, const Vec&)> jacobian;
    double c1 = 0.0;
    double c2 = 1.0;
    double a1_bound = 0.0;
    OperatorKind kind = OperatorKind::Custom;
    std::string name = "custom";

    Vec apply(double t, const Vec& x) const;
    Eigen::MatrixXd jacobian_at(double t, const Vec& x) const;
};

// A(t, x) = M x. Constants are derived from M: c2 from the symmetric part's
// smallest eigenvalue, c1 from the spectral norm.
OperatorSpec build_linear(const Eigen::MatrixXd& m, double p_exp = 2.0);

// Dirichlet finite-difference p-Laplacian on (0, 1) with `nodes` interior
// nodes: A(x)_i = -(psi(D_{i+1/2}) - psi(D_{i-1/2})) / h, psi(s) = |s|^{p-2} s.
// c1 is an a-priori bound; c2 is half the smallest coercivity ratio found by
// descent on the V-sphere.
OperatorSpec build_p_laplacian(std::size_t nodes, double p_exp);

struct AuditReport {
    std::size_t samples = 0;
    std::uint64_t seed = 0;
    double min_monotonicity = 0.0;             // min <A x - A y, x - y>
    double min_monotonicity_normalized = 0.0;  // same, divided by ‖Ax-Ay‖_* ‖x-y‖
    double min_coercivity_ratio = 0.0;         // min <A x, x> / ‖x‖^p
    double max_boundedness_ratio = 0.0;        // max ‖A x‖_* / (a1 + c1 ‖x‖^{p-1})
    bool monotonicity_violated = false;
    bool coercivity_violated = false;
    bool boundedness_violated = false;
    std::vector<std::string> violations;

    bool passed() const { return !monotonicity_violated && !coercivity_violated && !boundedness_violated; }
};

// Samples (t, x, y) and checks monotonicity, coercivity against op.c2 and
// boundedness against (op.a1_bound, op.c1). Non-finite operator output
// throws AuditFailure naming the sample.
AuditReport audit_hypotheses(const OperatorSpec& op, std::size_t samples, std::uint64_t seed,
                             double t_max = 1.0);

struct DelayDynamics {
    OperatorSpec op;
    double lipschitz_L = 0.0;
};

// Forcing f_k for the step [t_k, t_{k+1}], chosen from the path known up to
// t_k (left endpoint, explicit in the delay argument).
using ForcingSelector = std::function<Vec(const PathPrefix&)>;

struct SolveOptions {
    double tolerance = 1e-10;       // step residual <= tolerance * (1 + |x_k|)
    std::size_t max_newton = 50;
    std::size_t max_fallback = 2000;
    bool check_growth_bound = true;
    double bound_tolerance = 1e-12;
};

struct NewtonSummary {
    std::size_t total_iterations = 0;
    std::size_t max_iterations = 0;
    std::size_t fallback_steps = 0;
};

struct StepResult {
    Vec state;
    double residual = 0.0;
    std::size_t iterations = 0;
    bool used_fallback = false;
};

// One implicit-Euler step: solves (y - x)/dt + A(t_next, y) = f for y.
// Damped Newton, falling back to a step-halving relaxation y <- y - w G(y).
StepResult implicit_euler_step(const OperatorSpec& op, double t_next, double dt, const Vec& x,
                               const Vec& f, const SolveOptions& options = {},
                               std::size_t step_index = 0);

struct SolveReport {
    Path path;
    std::size_t start_index = 0;      // index of t0 on the path grid
    std::vector<Vec> forcing_trace;   // f_k for k = start_index .. n-1
    std::size_t step_count = 0;
    double residual_estimate = 0.0;   // max scaled step residual
    NewtonSummary newton;
    std::string forcing_algorithm = "caller-supplied";
};

// Solves x' + A(t, x) = f^x on [t0, T] with x = x0 on [0, t0]. The grid of x0
// is the solver grid and must contain t0 as a node; values of x0 after t0 are
// ignored. Throws SolverError on non-convergence and ContractError when a
// forcing exceeds L (1 + ‖x(. ∧ t_k)‖_∞).
SolveReport solve_delay_evolution(const DelayDynamics& dyn, double t0, const Path& x0,
                                  const ForcingSelector& forcing, const SolveOptions& options = {});

// `count` solves with piecewise-constant forcings drawn uniformly from the
// ball of radius L (1 + ‖x(. ∧ t_k)‖_∞) at each step. Sample i uses the
// stream stream_seed(seed, i), so results do not depend on `jobs`.
std::vector<SolveReport> sample_reachable_set(const DelayDynamics& dyn, double t0, const Path& x0,
                                              std::size_t count, std::uint64_t seed,
                                              std::size_t jobs = 1);

}  // namespace pdhj
