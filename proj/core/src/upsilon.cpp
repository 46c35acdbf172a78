#include "pdhj/upsilon.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pdhj/chain_rule.hpp"
#include "pdhj/error.hpp"
#include "pdhj/random.hpp"

namespace pdhj {

bool upsilon_zero_branch(const Vec& current, double sup) { return sup <= 1e-14 * (1.0 + current.norm()); }

namespace {

// |x(t)|^2 / sup^2, clamped to 1 when rounding puts |x(t)| above the sup.
double attainment_ratio(double c2, double s2) { return std::min(1.0, c2 / s2); }

}  // namespace

UpsilonEval upsilon_from(const Vec& current, double sup) {
    UpsilonEval out;
    out.dx = Vec::Zero(current.size());
    if (upsilon_zero_branch(current, sup)) {
        return out;
    }
    const double c2 = current.squaredNorm();
    const double s2 = sup * sup;
    const double d = s2 - c2;
    out.value = d * d / s2 + 2.0 * c2;
    out.dx = (4.0 * attainment_ratio(c2, s2)) * current;
    return out;
}

UpsilonEval upsilon(double t, const Path& x) {
    const double s = sup_norm(x, t);
    return upsilon_from(x.at(t), s);
}

double theta_from(const Vec& current, double sup) {
    if (upsilon_zero_branch(current, sup)) {
        return 0.0;
    }
    return 4.0 * attainment_ratio(current.squaredNorm(), sup * sup);
}

PenaltyEval penalty_psi(double t, const Path& x, const Path& y) {
    if (x.dim() != y.dim()) {
        throw DomainError("upsilon", "penalty_psi: paths have different dimensions");
    }
    const Path d = difference(x, y);
    const Vec cur = d.at(t);
    const double s = sup_norm(d, t);
    PenaltyEval out;
    out.value = upsilon_from(cur, s).value;
    out.theta = theta_from(cur, s);
    out.grad = out.theta * cur;
    return out;
}

// ---------------------------------------------------------------------------
// Lyapunov function

double LyapunovParams::epsilon0_for(double lambda_L, double horizon) {
    return std::exp(-2.0 * lambda_L * horizon / kKappa) / (2.0 * std::sqrt(kKappa));
}

LyapunovParams LyapunovParams::create(double epsilon, double lambda_L, double horizon) {
    if (!(lambda_L > 0.0) || !std::isfinite(lambda_L)) {
        throw ParameterError("upsilon", "lambda_L must be positive");
    }
    if (!(horizon > 0.0) || !std::isfinite(horizon)) {
        throw ParameterError("upsilon", "horizon T must be positive");
    }
    LyapunovParams p;
    p.lambda_L = lambda_L;
    p.horizon = horizon;
    p.epsilon0 = epsilon0_for(lambda_L, horizon);
    if (!(epsilon > 0.0) || epsilon > p.epsilon0) {
        throw ParameterError("upsilon", "epsilon = " + std::to_string(epsilon) + " outside (0, epsilon0 = " +
                                            std::to_string(p.epsilon0) + "]");
    }
    p.epsilon = epsilon;
    return p;
}

double LyapunovParams::alpha(double t) const {
    return (std::exp(-2.0 * lambda_L * t / kappa) - epsilon * std::sqrt(kappa)) / epsilon;
}

double LyapunovParams::alpha_dt(double t) const {
    return -(2.0 * lambda_L / (kappa * epsilon)) * std::exp(-2.0 * lambda_L * t / kappa);
}

NuEval lyapunov_nu_from(const LyapunovParams& params, double t, const Vec& current, double sup) {
    const UpsilonEval u = upsilon_from(current, sup);
    const double e2 = params.epsilon * params.epsilon;
    NuEval out;
    out.alpha = params.alpha(t);
    out.beta = std::sqrt(e2 * e2 + u.value);
    out.value = out.alpha * out.beta;
    out.dt = params.alpha_dt(t) * out.beta;
    out.dx = (out.alpha / (2.0 * out.beta)) * u.dx;
    return out;
}

NuEval lyapunov_nu(const LyapunovParams& params, double t, const Path& x) {
    return lyapunov_nu_from(params, t, x.at(t), sup_norm(x, t));
}

// ---------------------------------------------------------------------------
// Battery

bool BatteryReport::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const BatteryCheck& c) { return c.passed; });
}

namespace {

Path random_path(Rng& rng) {
    const auto dim = static_cast<Eigen::Index>(1 + rng() % 3);
    const std::size_t steps = 8 + rng() % 25;
    const double scale = std::pow(10.0, uniform(rng, -1.0, 1.0));
    std::vector<Vec> values;
    for (std::size_t i = 0; i <= steps; ++i) {
        values.push_back(scale * gaussian_vec(rng, dim));
    }
    return Path(TimeGrid::uniform(0.0, 1.0, steps), std::move(values));
}

// Random time: a grid node half of the time, otherwise uniform in the span.
double random_time(Rng& rng, const Path& x) {
    if (rng() % 2 == 0) {
        return x.grid().node(rng() % x.grid().size());
    }
    return uniform(rng, x.grid().t_start(), x.grid().t_end());
}

SmoothCurve random_curve(Rng& rng) {
    const auto dim = static_cast<Eigen::Index>(1 + rng() % 3);
    const Vec a = gaussian_vec(rng, dim);
    const Vec b = gaussian_vec(rng, dim);
    std::vector<Vec> amp;
    std::vector<double> freq;
    std::vector<double> phase;
    for (int k = 0; k < 3; ++k) {
        amp.push_back(gaussian_vec(rng, dim) * 0.7);
        freq.push_back(uniform(rng, 1.0, 8.0));
        phase.push_back(uniform(rng, 0.0, 6.283185307179586));
    }
    SmoothCurve c;
    c.t_start = 0.0;
    c.value = [=](double s) {
        Vec v = a + s * b;
        for (std::size_t k = 0; k < amp.size(); ++k) {
            v += std::sin(freq[k] * s + phase[k]) * amp[k];
        }
        return v;
    };
    c.derivative = [=](double s) {
        Vec v = b;
        for (std::size_t k = 0; k < amp.size(); ++k) {
            v += freq[k] * std::cos(freq[k] * s + phase[k]) * amp[k];
        }
        return v;
    };
    return c;
}

}  // namespace

BatteryReport run_upsilon_battery(const BatteryOptions& options) {
    BatteryReport report;
    Rng rng(stream_seed(options.seed, 0));

    BatteryCheck bounds{"psi_bounds", 0, 0, std::numeric_limits<double>::infinity(), "min psi/sup^2", false};
    BatteryCheck theta{"theta_range", 0, 0, 0.0, "max theta", false};
    BatteryCheck grad{"dx_bound", 0, 0, 0.0, "max |dx|/(4|x(t)|)", false};
    BatteryCheck attain{"theta_attainment", 0, 0, 0.0, "mismatches", false};
    BatteryCheck dt_zero{"dt_zero", 0, 0, 0.0, "max |dt|", false};
    BatteryCheck nonant{"non_anticipativity", 0, 0, 0.0, "max |difference|", false};

    for (std::size_t i = 0; i < options.bound_pairs; ++i) {
        const Path x = random_path(rng);
        std::vector<Vec> yv;
        for (std::size_t k = 0; k < x.grid().size(); ++k) {
            yv.push_back(gaussian_vec(rng, static_cast<Eigen::Index>(x.dim())) * uniform(rng, 0.0, 2.0));
        }
        const Path other(x.grid(), std::move(yv));
        const double t = random_time(rng, x);

        const PenaltyEval pe = penalty_psi(t, x, other);
        const double s = sup_norm(difference(x, other), t);
        const double s2 = s * s;
        ++bounds.evaluations;
        if (s2 > 0.0) {
            const double r = pe.value / s2;
            bounds.metric = std::min(bounds.metric, r);
            if (r < kKappa * (1.0 - 1e-12) || r > 3.0 * (1.0 + 1e-12)) {
                ++bounds.violations;
            }
        }

        ++theta.evaluations;
        theta.metric = std::max(theta.metric, pe.theta);
        if (!(pe.theta >= 0.0 && pe.theta <= 4.0)) {
            ++theta.violations;
        }

        const UpsilonEval u = upsilon(t, x);
        const Vec cur = x.at(t);
        ++grad.evaluations;
        const double cn = cur.norm();
        if (cn > 0.0) {
            grad.metric = std::max(grad.metric, u.dx.norm() / (4.0 * cn));
        }
        if (u.dx.norm() > 4.0 * cn * (1.0 + 1e-12)) {
            ++grad.violations;
        }

        ++attain.evaluations;
        const double sx = sup_norm(x, t);
        const bool attains = cn >= sx * (1.0 - 1e-12);
        const double th = theta_from(cur, sx);
        const bool four = th >= 4.0 * (1.0 - 2e-12);
        if (attains != four) {
            ++attain.violations;
        }

        ++dt_zero.evaluations;
        if (u.dt != 0.0) {
            ++dt_zero.violations;
            dt_zero.metric = std::max(dt_zero.metric, std::abs(u.dt));
        }

        ++nonant.evaluations;
        const UpsilonEval us = upsilon(t, stop_path(x, t));
        const double diff = std::abs(us.value - u.value) + (us.dx - u.dx).norm();
        nonant.metric = std::max(nonant.metric, diff);
        if (diff != 0.0) {
            ++nonant.violations;
        }
    }
    attain.metric = static_cast<double>(attain.violations);
    bounds.passed = bounds.violations == 0;
    theta.passed = theta.violations == 0;
    grad.passed = grad.violations == 0;
    attain.passed = attain.violations == 0;
    dt_zero.passed = dt_zero.violations == 0;
    nonant.passed = nonant.violations == 0;
    report.checks.insert(report.checks.end(), {bounds, theta, grad, attain, dt_zero, nonant});

    // Υ is 2-homogeneous, so scaling toward the zero path must track δ^2 until
    // the zero branch takes over, and the branch value itself is 0.
    BatteryCheck approach{"zero_branch_approach", 0, 0, 0.0, "max relative deviation", false};
    for (std::size_t i = 0; i < 20; ++i) {
        const Path x = random_path(rng);
        const double t = random_time(rng, x);
        const UpsilonEval base = upsilon(t, x);
        for (int k = 1; k <= 20; ++k) {
            const double delta = std::pow(10.0, -k);
            std::vector<Vec> vals;
            for (const auto& v : x.values()) {
                vals.push_back(delta * v);
            }
            const UpsilonEval scaled = upsilon(t, Path(x.grid(), std::move(vals)));
            ++approach.evaluations;
            const double expect = delta * delta * base.value;
            const double dev = std::abs(scaled.value - expect);
            if (scaled.value == 0.0) {
                // zero branch: allowed only once the sup is at the threshold scale
                if (sup_norm(x, t) * delta > 1e-13) {
                    ++approach.violations;
                }
                continue;
            }
            const double rel = expect > 0.0 ? dev / expect : dev;
            approach.metric = std::max(approach.metric, rel);
            if (rel > 1e-10) {
                ++approach.violations;
            }
        }
    }
    {
        const Path zero = Path::constant(TimeGrid::uniform(0.0, 1.0, 4), Vec::Zero(2));
        const UpsilonEval z = upsilon(0.5, zero);
        ++approach.evaluations;
        if (z.value != 0.0 || z.dx.norm() != 0.0) {
            ++approach.violations;
        }
    }
    approach.passed = approach.violations == 0;
    report.checks.push_back(approach);

    const double eps0 = LyapunovParams::epsilon0_for(options.lambda_L, options.horizon);
    const LyapunovParams params = LyapunovParams::create(std::min(options.epsilon, eps0), options.lambda_L,
                                                         options.horizon);
    const LyapunovParams edge = LyapunovParams::create(eps0, options.lambda_L, options.horizon);
    BatteryCheck alpha{"alpha_positive", 0, 0, std::numeric_limits<double>::infinity(), "min alpha at eps0", false};
    for (std::size_t k = 0; k <= 1000; ++k) {
        const double t = options.horizon * static_cast<double>(k) / 1000.0;
        const double a = edge.alpha(t);
        alpha.metric = std::min(alpha.metric, a);
        ++alpha.evaluations;
        if (!(a > 0.0)) {
            ++alpha.violations;
        }
    }
    alpha.passed = alpha.violations == 0;
    report.checks.push_back(alpha);

    BatteryCheck chain_u{"chain_rule_upsilon", 0, 0, std::numeric_limits<double>::infinity(), "min order", false};
    BatteryCheck chain_n{"chain_rule_nu", 0, 0, std::numeric_limits<double>::infinity(), "min order", false};
    double kink_min = std::numeric_limits<double>::infinity();
    double smooth_min = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < options.chain_paths; ++i) {
        const SmoothCurve curve = random_curve(rng);
        const double t0 = uniform(rng, 0.0, 0.6);
        const double t1 = std::min(1.0, t0 + uniform(rng, 0.2, 0.5));
        for (int which = 0; which < 2; ++which) {
            ChainRuleFunctional fn;
            fn.kind = which == 0 ? ChainFunctional::Upsilon : ChainFunctional::Nu;
            if (which == 1) {
                fn.params = params;
            }
            const ChainRuleReport r = verify_chain_rule(fn, curve, t0, t1);
            BatteryCheck& c = which == 0 ? chain_u : chain_n;
            ++c.evaluations;
            if (!r.passed) {
                ++c.violations;
            }
            if (r.exact) {
                ++report.exact_cases;
                continue;
            }
            c.metric = std::min(c.metric, r.observed_order);
            if (r.kink) {
                ++report.kink_cases;
                kink_min = std::min(kink_min, r.observed_order);
            } else {
                ++report.smooth_cases;
                smooth_min = std::min(smooth_min, r.observed_order);
            }
        }
    }
    chain_u.passed = chain_u.violations == 0;
    chain_n.passed = chain_n.violations == 0;
    report.checks.push_back(chain_u);
    report.checks.push_back(chain_n);
    report.min_kink_order = std::isfinite(kink_min) ? kink_min : 0.0;
    report.min_smooth_order = std::isfinite(smooth_min) ? smooth_min : 0.0;

    return report;
}

}  // namespace pdhj
