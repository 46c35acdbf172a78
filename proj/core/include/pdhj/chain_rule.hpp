#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pdhj/path.hpp"
#include "pdhj/upsilon.hpp"

namespace pdhj {

/**
 * SmoothCurve: a trajectory given by closed-form value and derivative.
 *
 * `breakpoints` lists times where |x| may have a non-smooth local maximum
 * (grid nodes of a piecewise-linear path); they are added to the candidates
 * used to compute the running sup exactly.
 */
struct SmoothCurve {
    double t_start = 0.0;
    std::function<Vec(double)> value;
    std::function<Vec(double)> derivative;
    std::vector<double> breakpoints;

    static SmoothCurve from_path(const Path& x);
};

/**
 * Running sup of |x| for a SmoothCurve on [t_start, t_end], from the local
 * maxima of |x| (dense sampling followed by golden-section refinement).
 */
class RunningSup {
public:
    RunningSup(const SmoothCurve& curve, double t_end, std::size_t samples = 2048);
    double at(double t) const;
    // Max of |x| over the candidate maximisers up to t, without x(t) itself.
    double prior(double t) const;
    bool attains(double t) const;

private:
    const SmoothCurve* curve_;
    std::vector<double> times_;   // candidate maximiser locations, sorted
    std::vector<double> prefix_;  // prefix max of |x| over the candidates
};

enum class ChainFunctional { Upsilon, Nu, PsiSlice };

const char* to_string(ChainFunctional f);

struct ChainRuleFunctional {
    ChainFunctional kind = ChainFunctional::Upsilon;
    std::optional<LyapunovParams> params;  // required for Nu
    std::optional<SmoothCurve> partner;    // y for the Ψ(., ., y) slice
};

struct ChainRuleOptions {
    std::vector<std::size_t> levels = {16, 32, 64, 128, 256, 512, 1024, 2048};
    double floor = 1e-13;     // gaps below floor * (1 + |lhs| + ∫|integrand|) count as exact
    std::size_t fit_levels = 3;  // the order is fitted on the finest levels above the floor
};

struct ChainRuleReport {
    std::string functional;
    double t0 = 0.0;
    double t1 = 0.0;
    double lhs = 0.0;                 // φ(t1, x) - φ(t0, x)
    double rhs = 0.0;                 // finest-level quadrature
    double abs_gap = 0.0;
    double rel_gap = 0.0;
    std::vector<std::size_t> levels;
    std::vector<double> gaps;
    double observed_order = 0.0;      // slope of log gap envelope against log h, finest levels
    bool exact = false;               // all gaps under the floor
    bool kink = false;                // sup attainment starts or stops inside (t0, t1)
    std::vector<double> kink_times;   // where it does; extra quadrature nodes
    double required_order = 1.9;
    bool passed = false;
};

// Compares φ(t1) - φ(t0) with the composite trapezoid of ∂tφ + (x', ∂xφ) on
// [t0, t1] for each refinement level, the kink times added as nodes. Throws ContractError when the curve's
// derivative jumps inside [t0, t1].
ChainRuleReport verify_chain_rule(const ChainRuleFunctional& functional, const SmoothCurve& x, double t0,
                                  double t1, const ChainRuleOptions& options = {});

ChainRuleReport verify_chain_rule(const ChainRuleFunctional& functional, const Path& x, double t0, double t1,
                                  const ChainRuleOptions& options = {});

}  // namespace pdhj
