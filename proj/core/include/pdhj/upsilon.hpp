#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "pdhj/path.hpp"

namespace pdhj {

// (3 - sqrt 5) / 2: the lower sandwich constant of Υ against the squared sup.
inline const double kKappa = (3.0 - std::sqrt(5.0)) / 2.0;

struct UpsilonEval {
    double value = 0.0;
    Vec dx;           // path derivative
    double dt = 0.0;  // always 0
};

// Υ from the two quantities it depends on: the current value x(t) and the
// running sup S = ‖x(. ∧ t)‖_∞. The zero branch is taken when
// S <= 1e-14 (1 + |x(t)|).
UpsilonEval upsilon_from(const Vec& current, double sup);
bool upsilon_zero_branch(const Vec& current, double sup);

// Υ(t, x) = (S^2 - |x(t)|^2)^2 / S^2 + 2 |x(t)|^2, ∂xΥ = 4 |x(t)|^2 / S^2 x(t).
UpsilonEval upsilon(double t, const Path& x);

struct PenaltyEval {
    double value = 0.0;
    double theta = 0.0;
    Vec grad;
};

// θ = 4 |x(t)|^2 / S^2, 0 on the zero branch.
double theta_from(const Vec& current, double sup);

// Ψ(t, x, y) = Υ(t, x - y), θ(t, x, y), ∂xΨ = θ (x(t) - y(t)).
PenaltyEval penalty_psi(double t, const Path& x, const Path& y);

struct LyapunovParams {
    double epsilon = 0.0;
    double lambda_L = 0.0;
    double horizon = 0.0;  // T
    double kappa = kKappa;
    double epsilon0 = 0.0;

    // Validates lambda_L > 0, T > 0 and epsilon in (0, epsilon0].
    static LyapunovParams create(double epsilon, double lambda_L, double horizon);
    static double epsilon0_for(double lambda_L, double horizon);

    double alpha(double t) const;
    double alpha_dt(double t) const;
};

struct NuEval {
    double value = 0.0;
    double dt = 0.0;
    Vec dx;
    double alpha = 0.0;
    double beta = 0.0;
};

NuEval lyapunov_nu_from(const LyapunovParams& params, double t, const Vec& current, double sup);

// ν^ε = α^ε β^ε with β^ε = sqrt(ε^4 + Υ).
NuEval lyapunov_nu(const LyapunovParams& params, double t, const Path& x);

struct BatteryOptions {
    std::size_t bound_pairs = 1000;
    std::size_t chain_paths = 100;
    std::uint64_t seed = 1;
    double epsilon = 0.25;
    double lambda_L = 0.1;
    double horizon = 1.0;
};

struct BatteryCheck {
    std::string name;
    std::size_t evaluations = 0;
    std::size_t violations = 0;
    double metric = 0.0;  // worst observed value of the checked quantity
    std::string metric_name;
    bool passed = false;
};

struct BatteryReport {
    std::vector<BatteryCheck> checks;
    double min_kink_order = 0.0;
    double min_smooth_order = 0.0;
    std::size_t kink_cases = 0;
    std::size_t smooth_cases = 0;
    std::size_t exact_cases = 0;
    bool passed() const;
};

// Randomised property battery for Υ, Ψ, θ and ν^ε, including the chain-rule
// refinement study.
BatteryReport run_upsilon_battery(const BatteryOptions& options);

}  // namespace pdhj
