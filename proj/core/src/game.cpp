#include "pdhj/game.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "pdhj/error.hpp"
#include "pdhj/random.hpp"

namespace pdhj {

namespace {

std::string vec_text(const Vec& v) {
    std::string out = "(";
    char buf[32];
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g", v[i]);
        out += (i ? "," : "");
        out += buf;
    }
    return out + ")";
}

void check_points(const std::vector<Vec>& pts, const char* name) {
    if (pts.empty()) {
        throw ParameterError("game", std::string(name) + " control grid is empty");
    }
    for (const auto& v : pts) {
        if (v.size() != pts.front().size() || v.size() == 0) {
            throw ParameterError("game", std::string(name) + " control points have inconsistent dimensions");
        }
        if (!v.allFinite()) {
            throw ParameterError("game", std::string(name) + " control points must be finite");
        }
    }
}

}  // namespace

void ControlGrid::validate() const {
    check_points(p_points, "P");
    check_points(q_points, "Q");
}

std::string ControlGrid::id() const {
    std::string out = "P[";
    for (const auto& p : p_points) {
        out += vec_text(p);
    }
    out += "]Q[";
    for (const auto& q : q_points) {
        out += vec_text(q);
    }
    return out + "]";
}

void GameSpec::validate() const {
    controls.validate();
    if (!f || !ell || !h) {
        throw ConfigurationError("game", "game '" + name + "' is missing f, l or h");
    }
    if (!(horizon > 0.0)) {
        throw ParameterError("game", "horizon must be positive");
    }
    if (!(l_f >= 0.0)) {
        throw ParameterError("game", "l_f must be non-negative");
    }
}

GameSpec GameSpec::markov(OperatorSpec op, StateDynamics f, StateRunningCost ell, StateTerminalCost h,
                          ControlGrid controls, double l_f, double lambda_L, double horizon, std::string name) {
    GameSpec g;
    g.op = std::move(op);
    g.f = [f](const PathPrefix& x, const Vec& p, const Vec& q) { return f(x.time(), x.current(), p, q); };
    g.ell = [ell](const PathPrefix& x, const Vec& p, const Vec& q) { return ell(x.time(), x.current(), p, q); };
    g.h = [h](const Path& x) { return h(x.values().back()); };
    g.f_state = std::move(f);
    g.ell_state = std::move(ell);
    g.h_state = std::move(h);
    g.controls = std::move(controls);
    g.l_f = l_f;
    g.lambda_L = lambda_L;
    g.horizon = horizon;
    g.name = std::move(name);
    g.validate();
    return g;
}

// ---------------------------------------------------------------------------
// Hamiltonians

HamiltonianEval minmax_table(const Eigen::MatrixXd& values) {
    if (values.rows() == 0 || values.cols() == 0) {
        throw ParameterError("game", "empty payoff table");
    }
    HamiltonianEval out;
    // min_p max_q
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
        Eigen::Index arg = 0;
        for (Eigen::Index j = 1; j < values.cols(); ++j) {
            if (values(i, j) > values(i, arg)) {
                arg = j;
            }
        }
        const double row_max = values(i, arg);
        if (i == 0 || row_max < out.f_plus) {
            out.f_plus = row_max;
            out.plus_p = static_cast<std::size_t>(i);
            out.plus_q = static_cast<std::size_t>(arg);
        }
    }
    // max_q min_p
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
        Eigen::Index arg = 0;
        for (Eigen::Index i = 1; i < values.rows(); ++i) {
            if (values(i, j) < values(arg, j)) {
                arg = i;
            }
        }
        const double col_min = values(arg, j);
        if (j == 0 || col_min > out.f_minus) {
            out.f_minus = col_min;
            out.minus_q = static_cast<std::size_t>(j);
            out.minus_p = static_cast<std::size_t>(arg);
        }
    }
    out.isaacs_gap = out.f_plus - out.f_minus;
    return out;
}

namespace {

template <typename Fn, typename Cost>
HamiltonianEval enumerate(const ControlGrid& c, const Vec& z, Fn&& f, Cost&& ell) {
    Eigen::MatrixXd table(static_cast<Eigen::Index>(c.p_points.size()), static_cast<Eigen::Index>(c.q_points.size()));
    for (std::size_t i = 0; i < c.p_points.size(); ++i) {
        for (std::size_t j = 0; j < c.q_points.size(); ++j) {
            const Vec fv = f(c.p_points[i], c.q_points[j]);
            const double lv = ell(c.p_points[i], c.q_points[j]);
            if (fv.size() != z.size()) {
                throw DomainError("game", "f and z have different dimensions");
            }
            if (!fv.allFinite() || !std::isfinite(lv)) {
                throw EvaluationError("game", "non-finite f or l at control pair (" + std::to_string(i) + ", " +
                                                  std::to_string(j) + ")");
            }
            table(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = lv + fv.dot(z);
        }
    }
    return minmax_table(table);
}

}  // namespace

HamiltonianEval hamiltonian(const GameSpec& spec, const PathPrefix& x, const Vec& z) {
    return enumerate(
        spec.controls, z, [&](const Vec& p, const Vec& q) { return spec.f(x, p, q); },
        [&](const Vec& p, const Vec& q) { return spec.ell(x, p, q); });
}

HamiltonianEval hamiltonian(const GameSpec& spec, double t, const Path& x, const Vec& z) {
    const Path stopped = stop_path(x, t);
    const auto idx = stopped.grid().index_of(t);
    const PathPrefix prefix(stopped.grid(), stopped.values().subspan(0, *idx + 1));
    return hamiltonian(spec, prefix, z);
}

HamiltonianEval hamiltonian_state(const GameSpec& spec, double t, const Vec& x, const Vec& z) {
    if (!spec.markovian()) {
        throw ConfigurationError("game", "state-level Hamiltonian needs a Markovian game");
    }
    return enumerate(
        spec.controls, z, [&](const Vec& p, const Vec& q) { return spec.f_state(t, x, p, q); },
        [&](const Vec& p, const Vec& q) { return spec.ell_state(t, x, p, q); });
}

LipschitzAudit audit_hamiltonian_lipschitz(const GameSpec& spec, std::size_t samples, std::uint64_t seed,
                                           double radius) {
    if (samples == 0) {
        throw ParameterError("game", "audit needs at least one sample");
    }
    spec.validate();
    LipschitzAudit report;
    report.samples = samples;
    report.seed = seed;
    report.min_gap = std::numeric_limits<double>::infinity();
    const auto dim = static_cast<Eigen::Index>(spec.dim());
    Rng rng(stream_seed(seed, 0));
    const TimeGrid grid = TimeGrid::uniform(0.0, spec.horizon, 4);
    for (std::size_t s = 0; s < samples; ++s) {
        std::vector<Vec> hist;
        for (std::size_t k = 0; k < grid.size(); ++k) {
            Vec v(dim);
            for (Eigen::Index i = 0; i < dim; ++i) {
                v[i] = uniform(rng, -radius, radius);
            }
            hist.push_back(v);
        }
        const std::size_t k = rng() % grid.size();
        const PathPrefix x(grid, std::span<const Vec>(hist.data(), k + 1));
        const double sup = x.running_sup();
        const Vec z1 = 2.0 * gaussian_vec(rng, dim);
        const Vec z2 = (s % 10 == 0) ? z1 : Vec(2.0 * gaussian_vec(rng, dim));
        const HamiltonianEval h1 = hamiltonian(spec, x, z1);
        const HamiltonianEval h2 = hamiltonian(spec, x, z2);
        for (const auto* h : {&h1, &h2}) {
            report.max_gap = std::max(report.max_gap, h->isaacs_gap);
            report.min_gap = std::min(report.min_gap, h->isaacs_gap);
            if (h->f_minus > h->f_plus) {
                ++report.order_violations;
            }
        }
        const double dz = (z1 - z2).norm();
        if (dz > 0.0) {
            const double denom = (1.0 + sup) * dz;
            report.max_ratio_minus = std::max(report.max_ratio_minus, std::abs(h1.f_minus - h2.f_minus) / denom);
            report.max_ratio_plus = std::max(report.max_ratio_plus, std::abs(h1.f_plus - h2.f_plus) / denom);
        }
        for (const auto& p : spec.controls.p_points) {
            for (const auto& q : spec.controls.q_points) {
                if (spec.f(x, p, q).norm() > spec.l_f * (1.0 + sup) * (1.0 + 1e-12) + 1e-12) {
                    ++report.growth_violations;
                }
            }
        }
    }
    report.max_ratio = std::max(report.max_ratio_minus, report.max_ratio_plus);
    report.flagged = report.max_ratio > spec.l_f * (1.0 + 1e-9) + 1e-12;
    return report;
}

std::vector<std::size_t> measurable_selection(const Eigen::MatrixXd& h, double epsilon) {
    if (!(epsilon > 0.0)) {
        throw ParameterError("game", "selection epsilon must be positive");
    }
    if (h.rows() == 0 || h.cols() == 0) {
        throw ParameterError("game", "selection needs a non-empty table");
    }
    std::vector<std::size_t> out(static_cast<std::size_t>(h.rows()));
    for (Eigen::Index i = 0; i < h.rows(); ++i) {
        const double best = h.row(i).maxCoeff();
        Eigen::Index n = 0;
        while (h(i, n) != best) {
            ++n;
        }
        out[static_cast<std::size_t>(i)] = static_cast<std::size_t>(n);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Built-in games

GameSpec make_game(const BuiltinGame& c) {
    if (c.dim == 0) {
        throw ParameterError("game", "dimension must be positive");
    }
    c.controls.validate();
    const auto dim = static_cast<Eigen::Index>(c.dim);
    for (const auto* pts : {&c.controls.p_points, &c.controls.q_points}) {
        if (pts->front().size() != dim) {
            throw ParameterError("game", "control points must have the state dimension");
        }
    }

    OperatorSpec op;
    if (c.operator_kind == "identity") {
        op = build_linear(Eigen::MatrixXd::Identity(dim, dim));
    } else if (c.operator_kind == "linear") {
        if (c.matrix.rows() != dim || c.matrix.cols() != dim) {
            throw ParameterError("game", "linear operator matrix must be dim x dim");
        }
        op = build_linear(c.matrix);
    } else if (c.operator_kind == "p-laplacian") {
        op = build_p_laplacian(c.dim, c.p_exp);
    } else {
        throw ParameterError("game", "unknown operator kind '" + c.operator_kind + "'");
    }

    StateDynamics f;
    if (c.dynamics == "sum") {
        f = [](double, const Vec&, const Vec& p, const Vec& q) -> Vec { return p + q; };
    } else if (c.dynamics == "product") {
        f = [](double, const Vec&, const Vec& p, const Vec& q) -> Vec { return p.cwiseProduct(q); };
    } else if (c.dynamics == "zero") {
        f = [](double, const Vec& x, const Vec&, const Vec&) -> Vec { return Vec::Zero(x.size()); };
    } else {
        throw ParameterError("game", "unknown dynamics '" + c.dynamics + "'");
    }

    const double scale = c.cost_scale;
    StateRunningCost ell;
    if (c.running_cost == "zero") {
        ell = [](double, const Vec&, const Vec&, const Vec&) { return 0.0; };
    } else if (c.running_cost == "constant") {
        const double v = scale * c.running_value;
        ell = [v](double, const Vec&, const Vec&, const Vec&) { return v; };
    } else if (c.running_cost == "quadratic") {
        const double w = c.running_weight;
        ell = [w, scale](double, const Vec& x, const Vec&, const Vec&) { return scale * (w * x.squaredNorm()); };
    } else {
        throw ParameterError("game", "unknown running cost '" + c.running_cost + "'");
    }

    StateTerminalCost h;
    if (c.terminal_cost == "zero") {
        h = [](const Vec&) { return 0.0; };
    } else if (c.terminal_cost == "constant") {
        const double v = scale * c.terminal_value;
        h = [v](const Vec&) { return v; };
    } else if (c.terminal_cost == "abs") {
        h = [scale](const Vec& x) { return scale * x.norm(); };
    } else if (c.terminal_cost == "quadratic") {
        h = [scale](const Vec& x) { return scale * x.squaredNorm(); };
    } else {
        throw ParameterError("game", "unknown terminal cost '" + c.terminal_cost + "'");
    }

    double l_f = c.l_f;
    if (l_f < 0.0) {
        l_f = 0.0;
        const Vec origin = Vec::Zero(dim);
        for (const auto& p : c.controls.p_points) {
            for (const auto& q : c.controls.q_points) {
                l_f = std::max(l_f, f(0.0, origin, p, q).norm());
            }
        }
    }
    std::ostringstream name;
    name << c.dynamics << "/" << c.operator_kind << "/" << c.running_cost << "/" << c.terminal_cost;
    return GameSpec::markov(std::move(op), f, ell, h, c.controls, l_f, c.lambda_L, c.horizon, name.str());
}

namespace {

std::vector<Vec> scalars(std::initializer_list<double> xs) {
    std::vector<Vec> out;
    for (double x : xs) {
        out.push_back(Vec::Constant(1, x));
    }
    return out;
}

}  // namespace

BuiltinGame desk_isaacs_game(double running_weight) {
    BuiltinGame g;
    g.dynamics = "sum";
    g.running_cost = running_weight > 0.0 ? "quadratic" : "zero";
    g.running_weight = running_weight;
    g.terminal_cost = "abs";
    g.controls.p_points = scalars({-1.0, -0.5, 0.0, 0.5, 1.0});
    g.controls.q_points = scalars({-0.5, 0.0, 0.5});
    g.l_f = 1.5;
    g.lambda_L = 0.1;
    return g;
}

BuiltinGame non_isaacs_game() {
    BuiltinGame g;
    g.dynamics = "product";
    g.running_cost = "zero";
    g.terminal_cost = "abs";
    g.controls.p_points = scalars({-1.0, 1.0});
    g.controls.q_points = scalars({-1.0, 1.0});
    g.l_f = 1.0;
    return g;
}

BuiltinGame constant_game(double c) {
    BuiltinGame g;
    g.dynamics = "zero";
    g.running_cost = "constant";
    g.running_value = c;
    g.terminal_cost = "zero";
    g.controls.p_points = scalars({0.0});
    g.controls.q_points = scalars({0.0});
    g.l_f = 0.0;
    return g;
}

}  // namespace pdhj
