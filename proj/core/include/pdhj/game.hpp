#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pdhj/evolution.hpp"
#include "pdhj/path.hpp"

namespace pdhj {

// Finite ordered stand-ins for the compacta P and Q. Index 0 wins ties.
struct ControlGrid {
    std::vector<Vec> p_points;
    std::vector<Vec> q_points;

    void validate() const;
    std::string id() const;  // stable textual fingerprint of both grids
};

using PathDynamics = std::function<Vec(const PathPrefix& x, const Vec& p, const Vec& q)>;
using PathRunningCost = std::function<double(const PathPrefix& x, const Vec& p, const Vec& q)>;
using PathTerminalCost = std::function<double(const Path& x)>;

using StateDynamics = std::function<Vec(double t, const Vec& x, const Vec& p, const Vec& q)>;
using StateRunningCost = std::function<double(double t, const Vec& x, const Vec& p, const Vec& q)>;
using StateTerminalCost = std::function<double(const Vec& x)>;

/**
 * GameSpec: x' + A(t, x) = f(t, x, p, q) with payoff ∫ ℓ dt + h(x).
 *
 * f, ℓ and h act on the known prefix of the path. A Markovian game also
 * provides the state-level versions (functions of x(t) only); the dynamic
 * programming oracle and everything built on it need those.
 */
struct GameSpec {
    OperatorSpec op;
    PathDynamics f;
    PathRunningCost ell;
    PathTerminalCost h;
    StateDynamics f_state;
    StateRunningCost ell_state;
    StateTerminalCost h_state;
    ControlGrid controls;
    double l_f = 0.0;       // |f| <= l_f (1 + ‖x(. ∧ t)‖_∞)
    double lambda_L = 0.1;  // Λ_L, enters ε0 of the Lyapunov function
    double horizon = 1.0;   // T
    std::string name = "custom";

    bool markovian() const { return static_cast<bool>(f_state) && static_cast<bool>(ell_state) && static_cast<bool>(h_state); }
    std::size_t dim() const { return op.space.dim(); }
    void validate() const;

    // Builds a Markovian spec; the path-level callbacks read x(t) only.
    static GameSpec markov(OperatorSpec op, StateDynamics f, StateRunningCost ell, StateTerminalCost h,
                           ControlGrid controls, double l_f, double lambda_L, double horizon, std::string name);
};

struct HamiltonianEval {
    double f_minus = 0.0;  // max_q min_p (ℓ + (f, z))
    double f_plus = 0.0;   // min_p max_q (ℓ + (f, z))
    std::size_t plus_p = 0;   // argmin over p of max_q
    std::size_t plus_q = 0;   // argmax over q at plus_p
    std::size_t minus_q = 0;  // argmax over q of min_p
    std::size_t minus_p = 0;  // argmin over p at minus_q
    double isaacs_gap = 0.0;
};

// Exact min/max over a |P| x |Q| table with smallest-index tie breaking.
HamiltonianEval minmax_table(const Eigen::MatrixXd& values);

HamiltonianEval hamiltonian(const GameSpec& spec, const PathPrefix& x, const Vec& z);
HamiltonianEval hamiltonian(const GameSpec& spec, double t, const Path& x, const Vec& z);
HamiltonianEval hamiltonian_state(const GameSpec& spec, double t, const Vec& x, const Vec& z);

struct LipschitzAudit {
    std::size_t samples = 0;
    std::uint64_t seed = 0;
    double max_ratio_minus = 0.0;
    double max_ratio_plus = 0.0;
    double max_ratio = 0.0;
    double max_gap = 0.0;            // largest F+ - F- seen
    double min_gap = 0.0;            // smallest F+ - F- seen (negative means a bug)
    std::size_t order_violations = 0;  // F- > F+
    std::size_t growth_violations = 0; // |f| > l_f (1 + sup)
    bool flagged = false;              // ratio above l_f + tolerance
    bool passed() const { return !flagged && order_violations == 0 && growth_violations == 0; }
};

// Samples (t, x, z1, z2) with states uniform in the box [-radius, radius]^d
// (constant history) and compares |F(z1) - F(z2)| with l_f (1 + sup) |z1 - z2|.
LipschitzAudit audit_hamiltonian_lipschitz(const GameSpec& spec, std::size_t samples, std::uint64_t seed,
                                           double radius = 2.0);

// For each row p of h (rows P, columns Q) the smallest q-index attaining the
// row maximum. The finite cover by all of Q makes the selection exact, so it
// is epsilon-optimal for every epsilon > 0.
std::vector<std::size_t> measurable_selection(const Eigen::MatrixXd& h, double epsilon);

// Parameters of the named built-in games used by the runner and the tests.
struct BuiltinGame {
    std::size_t dim = 1;
    std::string operator_kind = "identity";  // identity | linear | p-laplacian
    Eigen::MatrixXd matrix;                  // for linear
    double p_exp = 2.0;                      // for p-laplacian
    std::string dynamics = "sum";            // sum (p + q) | product (p * q) | zero
    std::string running_cost = "zero";       // zero | constant | quadratic (weight |x|^2)
    double running_value = 0.0;
    double running_weight = 0.0;
    std::string terminal_cost = "abs";       // zero | constant | abs (|x|) | quadratic (|x|^2)
    double terminal_value = 0.0;
    double cost_scale = 1.0;                 // multiplies ℓ and h
    ControlGrid controls;
    double l_f = -1.0;                       // < 0: max_{p,q} |f(p, q)|
    double lambda_L = 0.1;
    double horizon = 1.0;
};

GameSpec make_game(const BuiltinGame& config);

// Desk-scale Isaacs game: dim 1, A = identity, f = p + q,
// P = {-1, -0.5, 0, 0.5, 1}, Q = {-0.5, 0, 0.5}, ℓ = w x^2, h = |x(T)|.
BuiltinGame desk_isaacs_game(double running_weight = 0.5);
// f = p q with P = Q = {-1, 1}, ℓ = 0, h = |x(T)|: F+ - F- = 2 |z|.
BuiltinGame non_isaacs_game();
// ℓ = c, f = 0, h = 0, A = identity: u(t, x) = c (T - t).
BuiltinGame constant_game(double c);

}  // namespace pdhj
