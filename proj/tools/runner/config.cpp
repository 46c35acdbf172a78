#include "config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace pdhj::tools {

using nlohmann::json;

namespace {

const std::vector<std::pair<Kind, std::string>>& kind_table() {
    static const std::vector<std::pair<Kind, std::string>> t{
        {Kind::Solve, "solve"},
        {Kind::UpsilonCheck, "upsilon-check"},
        {Kind::GameValue, "game-value"},
        {Kind::FeedbackRun, "feedback-run"},
        {Kind::MinimaxCheck, "minimax-check"},
        {Kind::StabilityRun, "stability-run"},
        {Kind::IsaacsCheck, "isaacs-check"},
    };
    return t;
}

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

std::string type_name(const json& j) { return j.type_name(); }

// One JSON object of the config. Every read marks the key as used, and
// finish() rejects whatever is left. Resolved values go to `out`.
class Node {
public:
    Node(const json& j, std::string path, json& out) : j_(&j), path_(std::move(path)), out_(&out) {
        if (!j.is_object()) {
            throw UsageError(path_, "expected an object, got " + type_name(j));
        }
        *out_ = json::object();
    }

    bool has(const std::string& key) const { return j_->contains(key); }
    std::string path(const std::string& key) const { return join(path_, key); }

    const json* get(const std::string& key, bool required) {
        used_.insert(key);
        if (!j_->contains(key)) {
            if (required) {
                throw UsageError(path(key), "missing required field");
            }
            return nullptr;
        }
        return &j_->at(key);
    }

    double number(const std::string& key, std::optional<double> def) {
        const json* v = get(key, !def);
        double x = def.value_or(0.0);
        if (v) {
            if (!v->is_number()) {
                throw UsageError(path(key), "expected a number, got " + type_name(*v));
            }
            x = v->get<double>();
            if (!std::isfinite(x)) {
                throw UsageError(path(key), "must be finite");
            }
        }
        (*out_)[key] = x;
        return x;
    }

    double positive(const std::string& key, std::optional<double> def) {
        const double x = number(key, def);
        if (!(x > 0.0)) {
            throw UsageError(path(key), "must be positive");
        }
        return x;
    }

    std::uint64_t u64(const std::string& key, std::optional<std::uint64_t> def) {
        const json* v = get(key, !def);
        std::uint64_t x = def.value_or(0);
        if (v) {
            x = as_u64(*v, path(key));
        }
        (*out_)[key] = x;
        return x;
    }

    std::size_t count(const std::string& key, std::optional<std::size_t> def, std::size_t min = 0) {
        const auto x = static_cast<std::size_t>(u64(key, def));
        if (x < min) {
            throw UsageError(path(key), "must be at least " + std::to_string(min));
        }
        return x;
    }

    bool flag(const std::string& key, bool def) {
        const json* v = get(key, false);
        bool x = def;
        if (v) {
            if (!v->is_boolean()) {
                throw UsageError(path(key), "expected a boolean, got " + type_name(*v));
            }
            x = v->get<bool>();
        }
        (*out_)[key] = x;
        return x;
    }

    std::string choice(const std::string& key, std::optional<std::string> def, const std::vector<std::string>& allowed) {
        const json* v = get(key, !def);
        std::string x = def.value_or("");
        if (v) {
            if (!v->is_string()) {
                throw UsageError(path(key), "expected a string, got " + type_name(*v));
            }
            x = v->get<std::string>();
        }
        if (std::find(allowed.begin(), allowed.end(), x) == allowed.end()) {
            std::string list;
            for (const auto& a : allowed) {
                list += (list.empty() ? "" : ", ") + a;
            }
            throw UsageError(path(key), "'" + x + "' is not one of: " + list);
        }
        (*out_)[key] = x;
        return x;
    }

    // Number or array of numbers; a scalar is broadcast to `dim`.
    std::vector<double> reals(const std::string& key, std::size_t dim, std::optional<std::vector<double>> def) {
        const json* v = get(key, !def);
        std::vector<double> x = def.value_or(std::vector<double>{});
        if (v) {
            x = reals_of(*v, path(key), dim);
        }
        (*out_)[key] = x;
        return x;
    }

    Vec vec(const std::string& key, std::size_t dim, std::optional<Vec> def) {
        std::optional<std::vector<double>> d;
        if (def) {
            d = std::vector<double>(def->data(), def->data() + def->size());
        }
        const auto x = reals(key, dim, d);
        return Eigen::Map<const Vec>(x.data(), static_cast<Eigen::Index>(x.size()));
    }

    std::vector<std::size_t> counts(const std::string& key, std::size_t dim,
                                    std::optional<std::vector<std::size_t>> def, std::size_t min = 0) {
        const json* v = get(key, !def);
        std::vector<std::size_t> x = def.value_or(std::vector<std::size_t>{});
        if (v) {
            x.clear();
            if (v->is_array()) {
                for (std::size_t i = 0; i < v->size(); ++i) {
                    x.push_back(static_cast<std::size_t>(as_u64(v->at(i), path(key) + "[" + std::to_string(i) + "]")));
                }
            } else {
                x.assign(dim == 0 ? 1 : dim, static_cast<std::size_t>(as_u64(*v, path(key))));
            }
            if (dim != 0 && x.size() != dim) {
                throw UsageError(path(key), "expected " + std::to_string(dim) + " entries, got " +
                                                std::to_string(x.size()));
            }
            if (x.empty()) {
                throw UsageError(path(key), "must not be empty");
            }
        }
        for (std::size_t c : x) {
            if (c < min) {
                throw UsageError(path(key), "entries must be at least " + std::to_string(min));
            }
        }
        (*out_)[key] = x;
        return x;
    }

    // Non-empty list of points; scalars are 1-vectors.
    std::vector<Vec> points(const std::string& key, std::size_t dim) {
        const json* v = get(key, true);
        if (!v->is_array() || v->empty()) {
            throw UsageError(path(key), "expected a non-empty array of points");
        }
        std::vector<Vec> out;
        json echo = json::array();
        for (std::size_t i = 0; i < v->size(); ++i) {
            const std::string p = path(key) + "[" + std::to_string(i) + "]";
            const json& e = v->at(i);
            const auto xs = e.is_number() ? reals_of(json::array({e}), p, 0) : reals_of(e, p, 0);
            if (xs.size() != dim) {
                throw UsageError(p, "point has " + std::to_string(xs.size()) + " coordinates, state dimension is " +
                                        std::to_string(dim));
            }
            out.push_back(Eigen::Map<const Vec>(xs.data(), static_cast<Eigen::Index>(xs.size())));
            echo.push_back(xs);
        }
        (*out_)[key] = echo;
        return out;
    }

    Eigen::MatrixXd matrix(const std::string& key, std::size_t dim) {
        const json* v = get(key, true);
        if (!v->is_array() || v->size() != dim) {
            throw UsageError(path(key), "expected " + std::to_string(dim) + " rows");
        }
        Eigen::MatrixXd m(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
        for (std::size_t r = 0; r < dim; ++r) {
            const auto row = reals_of(v->at(r), path(key) + "[" + std::to_string(r) + "]", 0);
            if (row.size() != dim) {
                throw UsageError(path(key) + "[" + std::to_string(r) + "]",
                                 "expected " + std::to_string(dim) + " entries");
            }
            for (std::size_t c = 0; c < dim; ++c) {
                m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row[c];
            }
        }
        (*out_)[key] = *v;
        return m;
    }

    Node child(const std::string& key, bool required) {
        static const json empty = json::object();
        const json* v = get(key, required);
        return Node(v ? *v : empty, path(key), (*out_)[key]);
    }

    void finish() const {
        for (auto it = j_->begin(); it != j_->end(); ++it) {
            if (!used_.count(it.key())) {
                throw UsageError(path(it.key()), "unknown field");
            }
        }
    }

private:
    static std::uint64_t as_u64(const json& v, const std::string& p) {
        if (!v.is_number_integer()) {
            throw UsageError(p, "expected a non-negative integer, got " + type_name(v));
        }
        if (v.is_number_unsigned()) {
            return v.get<std::uint64_t>();
        }
        const auto s = v.get<std::int64_t>();
        if (s < 0) {
            throw UsageError(p, "must be non-negative");
        }
        return static_cast<std::uint64_t>(s);
    }

    static std::vector<double> reals_of(const json& v, const std::string& p, std::size_t dim) {
        std::vector<double> x;
        if (v.is_number()) {
            x.assign(dim == 0 ? 1 : dim, v.get<double>());
        } else if (v.is_array()) {
            for (std::size_t i = 0; i < v.size(); ++i) {
                if (!v[i].is_number()) {
                    throw UsageError(p + "[" + std::to_string(i) + "]", "expected a number, got " + type_name(v[i]));
                }
                x.push_back(v[i].get<double>());
            }
        } else {
            throw UsageError(p, "expected a number or an array of numbers, got " + type_name(v));
        }
        for (double e : x) {
            if (!std::isfinite(e)) {
                throw UsageError(p, "entries must be finite");
            }
        }
        if (dim != 0 && x.size() != dim) {
            throw UsageError(p, "expected " + std::to_string(dim) + " entries, got " + std::to_string(x.size()));
        }
        return x;
    }

    const json* j_;
    std::string path_;
    json* out_;
    std::set<std::string> used_;
};

OperatorBlock parse_operator(Node n) {
    OperatorBlock op;
    op.kind = n.choice("kind", std::string("identity"), {"identity", "linear", "p-laplacian"});
    op.dim = n.count("dim", 1, 1);
    if (op.kind == "linear") {
        op.matrix = n.matrix("matrix", op.dim);
    }
    if (op.kind == "p-laplacian") {
        if (op.dim < 2) {
            throw UsageError(n.path("dim"), "p-laplacian needs at least 2 nodes");
        }
        op.p_exp = n.number("p_exp", 2.0);
        if (op.p_exp < 2.0) {
            throw UsageError(n.path("p_exp"), "must be at least 2");
        }
    }
    n.finish();
    return op;
}

BuiltinGame parse_game(Node& root, const OperatorBlock& op, double horizon, double lambda_L) {
    BuiltinGame g;
    g.dim = op.dim;
    g.operator_kind = op.kind;
    g.matrix = op.matrix;
    g.p_exp = op.p_exp;
    g.horizon = horizon;
    g.lambda_L = lambda_L;
    g.dynamics = root.choice("dynamics", std::nullopt, {"sum", "product", "zero"});
    {
        Node rc = root.child("running_cost", false);
        g.running_cost = rc.choice("kind", std::string("zero"), {"zero", "constant", "quadratic"});
        if (g.running_cost == "constant") {
            g.running_value = rc.number("value", std::nullopt);
        }
        if (g.running_cost == "quadratic") {
            g.running_weight = rc.number("weight", std::nullopt);
        }
        rc.finish();
    }
    {
        Node tc = root.child("terminal_cost", false);
        g.terminal_cost = tc.choice("kind", std::string("abs"), {"zero", "constant", "abs", "quadratic"});
        if (g.terminal_cost == "constant") {
            g.terminal_value = tc.number("value", std::nullopt);
        }
        tc.finish();
    }
    g.cost_scale = root.number("cost_scale", 1.0);
    {
        Node c = root.child("controls", true);
        g.controls.p_points = c.points("p_points", op.dim);
        g.controls.q_points = c.points("q_points", op.dim);
        c.finish();
    }
    g.l_f = root.number("l_f", -1.0);
    return g;
}

LatticeBlock parse_lattice(Node n, std::size_t dim) {
    LatticeBlock l;
    l.lo = n.reals("lo", dim, std::nullopt);
    l.hi = n.reals("hi", dim, std::nullopt);
    l.points = n.counts("points", dim, std::nullopt, 2);
    for (std::size_t d = 0; d < dim; ++d) {
        if (!(l.hi[d] > l.lo[d])) {
            throw UsageError(n.path("hi"), "must exceed lo in every coordinate");
        }
    }
    n.finish();
    return l;
}

}  // namespace

const char* to_string(Kind k) {
    for (const auto& [kind, name] : kind_table()) {
        if (kind == k) {
            return name.c_str();
        }
    }
    return "unknown";
}

Kind kind_from_string(const std::string& s) {
    for (const auto& [kind, name] : kind_table()) {
        if (name == s) {
            return kind;
        }
    }
    throw UsageError("kind", "unknown experiment kind '" + s + "'");
}

const std::vector<std::string>& kind_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> n;
        for (const auto& e : kind_table()) {
            n.push_back(e.second);
        }
        return n;
    }();
    return names;
}

ExperimentConfig parse_config(const json& doc) {
    ExperimentConfig cfg;
    Node root(doc, "", cfg.resolved);

    const json* version = root.get("schema_version", true);
    if (!version->is_number_integer() || version->get<std::int64_t>() != kSchemaVersion) {
        throw UsageError("schema_version", "unsupported schema version (expected " + std::to_string(kSchemaVersion) + ")");
    }
    cfg.resolved["schema_version"] = kSchemaVersion;
    cfg.kind = kind_from_string(root.choice("kind", std::nullopt, kind_names()));
    cfg.seed = root.u64("seed", 1);

    switch (cfg.kind) {
        case Kind::Solve: {
            cfg.op = parse_operator(root.child("operator", true));
            cfg.horizon = root.positive("horizon", 1.0);
            cfg.time_steps = root.count("time_steps", 32, 1);
            Node s = root.child("solve", true);
            const std::size_t d = cfg.op->dim;
            cfg.solve.t0 = s.number("t0", 0.0);
            if (cfg.solve.t0 < 0.0 || cfg.solve.t0 >= cfg.horizon) {
                throw UsageError(s.path("t0"), "must lie in [0, horizon)");
            }
            cfg.solve.x0 = s.vec("x0", d, std::nullopt);
            cfg.solve.lipschitz_L = s.number("lipschitz_L", 1.0);
            if (cfg.solve.lipschitz_L < 0.0) {
                throw UsageError(s.path("lipschitz_L"), "must be non-negative");
            }
            cfg.solve.forcing = s.choice("forcing", std::string("constant"), {"constant", "random"});
            if (cfg.solve.forcing == "constant") {
                cfg.solve.value = s.vec("value", d, Vec(Vec::Zero(static_cast<Eigen::Index>(d))));
            } else {
                cfg.solve.count = s.count("count", 8, 1);
            }
            cfg.solve.audit_samples = s.count("audit_samples", 200, 1);
            s.finish();
            break;
        }
        case Kind::UpsilonCheck: {
            cfg.horizon = root.positive("horizon", 1.0);
            cfg.lambda_L = root.positive("lambda_L", 0.1);
            Node u = root.child("upsilon", false);
            cfg.upsilon.bound_pairs = u.count("bound_pairs", 1000);
            cfg.upsilon.chain_paths = u.count("chain_paths", 100);
            cfg.upsilon.epsilon = u.positive("epsilon", 0.25);
            u.finish();
            break;
        }
        default: {
            cfg.op = parse_operator(root.child("operator", true));
            cfg.horizon = root.positive("horizon", 1.0);
            cfg.lambda_L = root.positive("lambda_L", 0.1);
            cfg.game = parse_game(root, *cfg.op, cfg.horizon, cfg.lambda_L);
            const std::size_t d = cfg.op->dim;
            if (cfg.kind != Kind::IsaacsCheck) {
                cfg.time_steps = root.count("time_steps", 32, 1);
                cfg.lattice = parse_lattice(root.child("lattice", true), d);
            }
            const Vec origin = Vec::Zero(static_cast<Eigen::Index>(d));
            if (cfg.kind == Kind::GameValue) {
                Node b = root.child("game_value", false);
                cfg.game_value.t = b.number("t", 0.0);
                cfg.game_value.x = b.vec("x", d, origin);
                cfg.game_value.z = b.vec("z", d, Vec(Vec::Ones(static_cast<Eigen::Index>(d))));
                b.finish();
            } else if (cfg.kind == Kind::IsaacsCheck) {
                Node b = root.child("isaacs", false);
                cfg.isaacs.samples = b.count("samples", 1000, 1);
                cfg.isaacs.radius = b.positive("radius", 2.0);
                b.finish();
            } else if (cfg.kind == Kind::FeedbackRun) {
                Node b = root.child("feedback", false);
                cfg.feedback.t0 = b.number("t0", 0.0);
                cfg.feedback.x0 = b.vec("x0", d, origin);
                cfg.feedback.epsilon = b.positive("epsilon", 0.25);
                cfg.feedback.partition_steps = b.counts("partition_steps", 0, std::vector<std::size_t>{8, 16, 32}, 1);
                cfg.feedback.adversaries = b.count("adversaries", 200, 1);
                cfg.feedback.calibration_random = b.count("calibration_random", 16);
                cfg.feedback.library_size = b.count("library_size", 64);
                cfg.feedback.library_seed = b.u64("library_seed", 7);
                cfg.feedback.include_lattice = b.flag("include_lattice", true);
                b.finish();
            } else if (cfg.kind == Kind::MinimaxCheck) {
                Node b = root.child("minimax", false);
                cfg.minimax.sites = b.count("sites", 20, 1);
                cfg.minimax.horizon = b.positive("horizon", 0.25);
                cfg.minimax.budget = b.count("budget", 64, 1);
                cfg.minimax.side = b.choice("side", std::string("upper"), {"upper", "lower"}) == "upper" ? Side::Upper
                                                                                                     : Side::Lower;
                {
                    Node t = b.child("tolerance", false);
                    cfg.minimax.tolerance.a = t.number("a", 1.0);
                    cfg.minimax.tolerance.b = t.number("b", 1.0);
                    cfg.minimax.tolerance.c = t.number("c", 0.1);
                    t.finish();
                }
                cfg.minimax.z_radius = b.positive("z_radius", 2.0);
                cfg.minimax.viscosity = b.flag("viscosity", true);
                cfg.minimax.viscosity_c = b.number("viscosity_c", 0.0);
                b.finish();
            } else if (cfg.kind == Kind::StabilityRun) {
                Node b = root.child("stability", false);
                cfg.stability.family =
                    perturbation_from_string(b.choice("family", std::string("terminal-shift"), {"terminal-shift", "drift"}));
                cfg.stability.n_list = b.counts("n_list", 0, std::vector<std::size_t>{2, 4, 8, 16}, 1);
                b.finish();
            }
            break;
        }
    }
    root.finish();
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw UsageError("", "cannot open config file '" + path + "'");
    }
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw UsageError("", "config file '" + path + "' is not valid JSON: " + e.what());
    }
    return parse_config(doc);
}

}  // namespace pdhj::tools
