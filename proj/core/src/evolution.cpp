#include "pdhj/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "pdhj/error.hpp"
#include "pdhj/parallel.hpp"
#include "pdhj/random.hpp"

namespace pdhj {

const char* to_string(OperatorKind kind) {
    switch (kind) {
        case OperatorKind::Linear:
            return "linear";
        case OperatorKind::PLaplacian1D:
            return "p-laplacian-1d";
        case OperatorKind::Custom:
            return "custom";
    }
    return "custom";
}

Vec OperatorSpec::apply(double t, const Vec& x) const {
    if (!eval) {
        throw ConfigurationError("evolution", "operator '" + name + "' has no evaluation function");
    }
    return eval(t, x);
}

Eigen::MatrixXd OperatorSpec::jacobian_at(double t, const Vec& x) const {
    if (jacobian) {
        return jacobian(t, x);
    }
    const Eigen::Index n = x.size();
    Eigen::MatrixXd j(n, n);
    const Vec base = apply(t, x);
    Vec probe = x;
    for (Eigen::Index c = 0; c < n; ++c) {
        const double h = 1e-7 * (1.0 + std::abs(x[c]));
        probe[c] = x[c] + h;
        j.col(c) = (apply(t, probe) - base) / h;
        probe[c] = x[c];
    }
    return j;
}

// ---------------------------------------------------------------------------
// Builders

OperatorSpec build_linear(const Eigen::MatrixXd& m, double p_exp) {
    if (m.rows() != m.cols() || m.rows() == 0) {
        throw ParameterError("evolution", "linear operator needs a non-empty square matrix");
    }
    if (p_exp != 2.0) {
        throw ParameterError("evolution", "a linear operator is only coercive with p = 2");
    }
    const auto dim = static_cast<std::size_t>(m.rows());
    OperatorSpec op;
    op.space = StateSpace::euclidean(dim, 2.0);
    op.eval = [m](double, const Vec& x) -> Vec { return m * x; };
    op.jacobian = [m](double, const Vec&) -> Eigen::MatrixXd { return m; };
    const Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
    op.c2 = es.eigenvalues().minCoeff();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    op.c1 = svd.singularValues()(0);
    op.a1_bound = 0.0;
    op.kind = OperatorKind::Linear;
    op.name = "linear";
    return op;
}

namespace {

double psi(double s, double p) { return std::pow(std::abs(s), p - 2.0) * s; }
double dpsi(double s, double p) { return (p - 1.0) * std::pow(std::abs(s), p - 2.0); }

Vec p_laplacian_apply(const Vec& x, double p, double h) {
    const Eigen::Index n = x.size();
    Vec out(n);
    auto flux = [&](Eigen::Index i) {  // psi(D_{i+1/2}), i in [-1, n-1]
        const double left = i < 0 ? 0.0 : x[i];
        const double right = i + 1 >= n ? 0.0 : x[i + 1];
        return psi((right - left) / h, p);
    };
    double prev = flux(-1);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double next = flux(i);
        out[i] = (prev - next) / h;
        prev = next;
    }
    return out;
}

Eigen::MatrixXd p_laplacian_jacobian(const Vec& x, double p, double h) {
    const Eigen::Index n = x.size();
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n, n);
    auto slope = [&](Eigen::Index i) {
        const double left = i < 0 ? 0.0 : x[i];
        const double right = i + 1 >= n ? 0.0 : x[i + 1];
        return dpsi((right - left) / h, p) / (h * h);
    };
    for (Eigen::Index i = 0; i < n; ++i) {
        const double lo = slope(i - 1);
        const double hi = slope(i);
        j(i, i) = lo + hi;
        if (i > 0) {
            j(i, i - 1) = -lo;
        }
        if (i + 1 < n) {
            j(i, i + 1) = -hi;
        }
    }
    return j;
}

// Minimises <A x, x> / ‖x‖^p over the V-sphere by Barzilai-Borwein gradient
// descent from a handful of starts (smooth modes and random vectors).
double minimise_coercivity_ratio(const OperatorSpec& op) {
    const auto n = static_cast<Eigen::Index>(op.space.dim());
    const double p = op.space.p_exp();
    auto ratio = [&](const Vec& x) {
        const double nv = op.space.v_norm(x);
        return op.space.pairing(op.apply(0.0, x), x) / std::pow(nv, p);
    };
    auto grad = [&](const Vec& x) {
        Vec g(n);
        Vec probe = x;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double h = 1e-6 * std::max(1.0, std::abs(x[i]));
            probe[i] = x[i] + h;
            const double up = ratio(probe);
            probe[i] = x[i] - h;
            const double down = ratio(probe);
            probe[i] = x[i];
            g[i] = (up - down) / (2.0 * h);
        }
        return g;
    };
    auto normalise = [&](Vec x) { return Vec(x / op.space.v_norm(x)); };

    std::vector<Vec> starts;
    for (int mode = 1; mode <= 3; ++mode) {
        Vec s(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            s[i] = std::sin(mode * std::numbers::pi * static_cast<double>(i + 1) / static_cast<double>(n + 1));
        }
        if (s.norm() > 0.0) {
            starts.push_back(s);
        }
    }
    Rng rng(stream_seed(0x5eed, static_cast<std::uint64_t>(n)));
    for (int r = 0; r < 4; ++r) {
        starts.push_back(gaussian_vec(rng, n));
    }

    double best = std::numeric_limits<double>::infinity();
    for (const Vec& s0 : starts) {
        Vec x = normalise(s0);
        double fx = ratio(x);
        Vec g = grad(x);
        double step = 1e-3;
        for (int it = 0; it < 400 && g.norm() > 1e-12 * std::max(1.0, std::abs(fx)); ++it) {
            Vec candidate = normalise(x - step * g);
            double fc = ratio(candidate);
            int halvings = 0;
            while (!(fc < fx) && halvings < 40) {
                step *= 0.5;
                candidate = normalise(x - step * g);
                fc = ratio(candidate);
                ++halvings;
            }
            if (!(fc < fx)) {
                break;
            }
            const Vec g_new = grad(candidate);
            const Vec s = candidate - x;
            const Vec y = g_new - g;
            const double sy = s.dot(y);
            step = sy > 0.0 ? s.squaredNorm() / sy : step * 2.0;
            x = candidate;
            fx = fc;
            g = g_new;
        }
        best = std::min(best, fx);
    }
    return best;
}

}  // namespace

OperatorSpec build_p_laplacian(std::size_t nodes, double p_exp) {
    if (nodes < 2) {
        throw ParameterError("evolution", "p-Laplacian needs at least 2 interior nodes");
    }
    if (!(p_exp >= 2.0)) {
        throw ParameterError("evolution", "p-Laplacian needs p >= 2");
    }
    const double h = 1.0 / static_cast<double>(nodes + 1);
    OperatorSpec op;
    op.space = StateSpace::euclidean(nodes, p_exp);
    op.eval = [p_exp, h](double, const Vec& x) -> Vec { return p_laplacian_apply(x, p_exp, h); };
    op.jacobian = [p_exp, h](double, const Vec& x) -> Eigen::MatrixXd {
        return p_laplacian_jacobian(x, p_exp, h);
    };
    op.kind = OperatorKind::PLaplacian1D;
    op.name = "p-laplacian-1d";
    // |A_i| <= (2/h)^p ‖x‖_∞^{p-1}, |.|_* <= |.|_2 <= sqrt(n) max |A_i|, ‖x‖_∞ <= ‖x‖_V.
    op.c1 = std::sqrt(static_cast<double>(nodes)) * std::pow(2.0 / h, p_exp);
    op.a1_bound = 0.0;
    op.c2 = 0.5 * minimise_coercivity_ratio(op);
    return op;
}

// ---------------------------------------------------------------------------
// Audit

AuditReport audit_hypotheses(const OperatorSpec& op, std::size_t samples, std::uint64_t seed, double t_max) {
    if (samples == 0) {
        throw ParameterError("evolution", "audit needs at least one sample");
    }
    AuditReport report;
    report.samples = samples;
    report.seed = seed;
    report.min_monotonicity = std::numeric_limits<double>::infinity();
    report.min_monotonicity_normalized = std::numeric_limits<double>::infinity();
    report.min_coercivity_ratio = std::numeric_limits<double>::infinity();
    report.max_boundedness_ratio = 0.0;

    const auto n = static_cast<Eigen::Index>(op.space.dim());
    const double p = op.space.p_exp();
    Rng rng(stream_seed(seed, 0));
    auto random_vec = [&]() {
        const double scale = std::pow(10.0, uniform(rng, -2.0, 2.0));
        Vec v(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            v[i] = scale * uniform(rng, -1.0, 1.0);
        }
        return v;
    };
    auto record = [&](std::string msg) {
        if (report.violations.size() < 20) {
            report.violations.push_back(std::move(msg));
        }
    };

    for (std::size_t s = 0; s < samples; ++s) {
        const double t = uniform(rng, 0.0, t_max);
        const Vec x = random_vec();
        const Vec y = random_vec();
        const Vec ax = op.apply(t, x);
        const Vec ay = op.apply(t, y);
        if (ax.size() != n || ay.size() != n) {
            throw AuditFailure("operator returned a vector of the wrong dimension", s);
        }
        if (!ax.allFinite() || !ay.allFinite()) {
            std::ostringstream os;
            os << "non-finite operator output at t=" << t;
            throw AuditFailure(os.str(), s);
        }

        const Vec dx = x - y;
        const Vec da = ax - ay;
        const double pairing = op.space.pairing(da, dx);
        const double scale = op.space.dual_norm(da) * op.space.v_norm(dx);
        const double normalized = scale > 0.0 ? pairing / scale : 0.0;
        report.min_monotonicity = std::min(report.min_monotonicity, pairing);
        report.min_monotonicity_normalized = std::min(report.min_monotonicity_normalized, normalized);
        if (normalized < -1e-12) {
            report.monotonicity_violated = true;
            record("monotonicity: <Ax-Ay,x-y> = " + std::to_string(pairing) + " at sample " + std::to_string(s));
        }

        const double xv = op.space.v_norm(x);
        if (xv > 0.0) {
            const double ratio = op.space.pairing(ax, x) / std::pow(xv, p);
            report.min_coercivity_ratio = std::min(report.min_coercivity_ratio, ratio);
            if (ratio <= 0.0 || ratio < op.c2 * (1.0 - 1e-12)) {
                report.coercivity_violated = true;
                record("coercivity: ratio " + std::to_string(ratio) + " below c2 = " + std::to_string(op.c2) +
                       " at sample " + std::to_string(s));
            }
            const double bound = op.a1_bound + op.c1 * std::pow(xv, p - 1.0);
            const double dual = op.space.dual_norm(ax);
            const double bratio = bound > 0.0 ? dual / bound : (dual > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
            report.max_boundedness_ratio = std::max(report.max_boundedness_ratio, bratio);
            if (bratio > 1.0 + 1e-12) {
                report.boundedness_violated = true;
                record("boundedness: ratio " + std::to_string(bratio) + " at sample " + std::to_string(s));
            }
        }
    }
    return report;
}

// ---------------------------------------------------------------------------
// Implicit Euler

StepResult implicit_euler_step(const OperatorSpec& op, double t_next, double dt, const Vec& x, const Vec& f,
                               const SolveOptions& options, std::size_t step_index) {
    const Eigen::Index n = x.size();
    const double target = options.tolerance * (1.0 + x.norm());
    // Scaled residual H(y) = y - x + dt (A(t_next, y) - f).
    auto residual = [&](const Vec& y) -> Vec { return y - x + dt * (op.apply(t_next, y) - f); };

    StepResult out;
    Vec y = x;
    Vec r = residual(y);
    double rn = r.norm();
    if (!std::isfinite(rn)) {
        throw SolverError("evolution", "non-finite residual at the initial iterate", step_index);
    }
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);
    std::size_t it = 0;
    bool stalled = false;
    while (rn > target && it < options.max_newton) {
        ++it;
        const Eigen::MatrixXd jac = eye + dt * op.jacobian_at(t_next, y);
        const Vec delta = jac.partialPivLu().solve(-r);
        if (!delta.allFinite()) {
            stalled = true;
            break;
        }
        double lambda = 1.0;
        Vec trial = y + delta;
        Vec rt = residual(trial);
        double rtn = rt.norm();
        while (!(rtn <= (1.0 - 1e-4 * lambda) * rn) && lambda > 1e-8) {
            lambda *= 0.5;
            trial = y + lambda * delta;
            rt = residual(trial);
            rtn = rt.norm();
        }
        if (!(rtn < rn)) {
            stalled = true;
            break;
        }
        y = std::move(trial);
        r = std::move(rt);
        rn = rtn;
    }
    out.iterations = it;

    if (rn > target) {
        // Relaxation y <- y - w H(y); H is strongly monotone so small w contracts.
        out.used_fallback = true;
        double w = 1.0;
        for (std::size_t k = 0; k < options.max_fallback && rn > target; ++k) {
            Vec trial = y - w * r;
            Vec rt = residual(trial);
            double rtn = rt.norm();
            int halvings = 0;
            while (!(rtn < rn) && halvings < 60) {
                w *= 0.5;
                trial = y - w * r;
                rt = residual(trial);
                rtn = rt.norm();
                ++halvings;
            }
            if (!(rtn < rn)) {
                break;
            }
            y = std::move(trial);
            r = std::move(rt);
            rn = rtn;
            w = std::min(1.0, 2.0 * w);
        }
        (void)stalled;
    }
    if (!(rn <= target)) {
        std::ostringstream os;
        os << "implicit Euler step did not converge: residual " << rn << " > " << target;
        throw SolverError("evolution", os.str(), step_index);
    }
    out.state = std::move(y);
    out.residual = rn / (1.0 + x.norm());
    return out;
}

SolveReport solve_delay_evolution(const DelayDynamics& dyn, double t0, const Path& x0,
                                  const ForcingSelector& forcing, const SolveOptions& options) {
    const TimeGrid& grid = x0.grid();
    const auto start = grid.index_of(t0);
    if (!start) {
        throw DomainError("evolution", "t0 = " + std::to_string(t0) + " is not a node of the solver grid");
    }
    if (x0.dim() != dyn.op.space.dim()) {
        throw DomainError("evolution", "initial path dimension does not match the operator");
    }
    if (!forcing) {
        throw ParameterError("evolution", "a forcing selector is required");
    }

    std::vector<Vec> values(x0.values().begin(), x0.values().end());
    SolveReport report{Path(x0), *start, {}, 0, 0.0, {}, "caller-supplied"};
    report.forcing_trace.reserve(grid.size() - *start);
    double running_sup = 0.0;
    for (std::size_t i = 0; i <= *start; ++i) {
        running_sup = std::max(running_sup, values[i].norm());
    }

    for (std::size_t k = *start; k + 1 < grid.size(); ++k) {
        const PathPrefix prefix(grid, std::span<const Vec>(values.data(), k + 1));
        Vec f = forcing(prefix);
        if (f.size() != x0.values().front().size() || !f.allFinite()) {
            throw ContractError("evolution", "forcing at step " + std::to_string(k) + " has wrong size or is not finite");
        }
        if (options.check_growth_bound) {
            const double bound = dyn.lipschitz_L * (1.0 + running_sup);
            if (f.norm() > bound * (1.0 + options.bound_tolerance) + options.bound_tolerance) {
                std::ostringstream os;
                os << "forcing |f| = " << f.norm() << " exceeds L(1 + sup) = " << bound << " at step " << k;
                throw ContractError("evolution", os.str());
            }
        }
        const double dt = grid.step(k);
        StepResult step = implicit_euler_step(dyn.op, grid.node(k + 1), dt, values[k], f, options, k);
        report.newton.total_iterations += step.iterations;
        report.newton.max_iterations = std::max(report.newton.max_iterations, step.iterations);
        report.newton.fallback_steps += step.used_fallback ? 1 : 0;
        report.residual_estimate = std::max(report.residual_estimate, step.residual);
        values[k + 1] = std::move(step.state);
        running_sup = std::max(running_sup, values[k + 1].norm());
        report.forcing_trace.push_back(std::move(f));
        ++report.step_count;
    }
    report.path = Path(grid, std::move(values));
    return report;
}

std::vector<SolveReport> sample_reachable_set(const DelayDynamics& dyn, double t0, const Path& x0,
                                              std::size_t count, std::uint64_t seed, std::size_t jobs) {
    if (count == 0) {
        throw ParameterError("evolution", "sample count must be at least 1");
    }
    std::vector<std::optional<SolveReport>> slots(count);
    parallel_for(count, jobs, [&](std::size_t i) {
        Rng rng(stream_seed(seed, i));
        const double L = dyn.lipschitz_L;
        ForcingSelector selector = [&rng, L](const PathPrefix& x) -> Vec {
            const double radius = L * (1.0 + x.running_sup());
            return uniform_in_ball(rng, x.current().size(), radius);
        };
        SolveReport r = solve_delay_evolution(dyn, t0, x0, selector);
        r.forcing_algorithm = std::string("uniform-ball/") + kRngAlgorithm + "/seed=" + std::to_string(seed) +
                              "/stream=" + std::to_string(i);
        slots[i] = std::move(r);
    });
    std::vector<SolveReport> out;
    out.reserve(count);
    for (auto& s : slots) {
        out.push_back(std::move(*s));
    }
    return out;
}

}  // namespace pdhj
