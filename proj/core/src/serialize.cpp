#include "pdhj/serialize.hpp"

#include <cstdio>

#include "pdhj/path_io.hpp"

namespace pdhj {

using nlohmann::json;

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

json vec_to_json(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Vec vec_from_json(const json& j) {
    const auto xs = j.get<std::vector<double>>();
    return Eigen::Map<const Vec>(xs.data(), static_cast<Eigen::Index>(xs.size()));
}

json to_json(const TimeGrid& g) {
    return {{"t_start", g.t_start()}, {"t_end", g.t_end()}, {"n_steps", g.n_steps()}, {"mesh", g.mesh()},
            {"uniform", g.is_uniform()}};
}

json to_json(const AuditReport& r) {
    return {{"samples", r.samples},
            {"seed", r.seed},
            {"min_monotonicity", r.min_monotonicity},
            {"min_monotonicity_normalized", r.min_monotonicity_normalized},
            {"min_coercivity_ratio", r.min_coercivity_ratio},
            {"max_boundedness_ratio", r.max_boundedness_ratio},
            {"monotonicity_violated", r.monotonicity_violated},
            {"coercivity_violated", r.coercivity_violated},
            {"boundedness_violated", r.boundedness_violated},
            {"violations", r.violations},
            {"passed", r.passed()}};
}

json to_json(const SolveReport& r) {
    json forcing = json::array();
    for (const auto& f : r.forcing_trace) {
        forcing.push_back(vec_to_json(f));
    }
    return {{"grid", to_json(r.path.grid())},
            {"start_index", r.start_index},
            {"step_count", r.step_count},
            {"residual_estimate", r.residual_estimate},
            {"newton", {{"total_iterations", r.newton.total_iterations},
                        {"max_iterations", r.newton.max_iterations},
                        {"fallback_steps", r.newton.fallback_steps}}},
            {"forcing_algorithm", r.forcing_algorithm},
            {"forcing_trace", forcing},
            {"final_state", vec_to_json(r.path.values().back())}};
}

json to_json(const UpsilonEval& e) { return {{"value", e.value}, {"dx", vec_to_json(e.dx)}, {"dt", e.dt}}; }

json to_json(const ChainRuleReport& r) {
    return {{"functional", r.functional},
            {"t0", r.t0},
            {"t1", r.t1},
            {"lhs", r.lhs},
            {"rhs", r.rhs},
            {"abs_gap", r.abs_gap},
            {"rel_gap", r.rel_gap},
            {"levels", r.levels},
            {"gaps", r.gaps},
            {"observed_order", r.observed_order},
            {"exact", r.exact},
            {"kink", r.kink},
            {"kink_times", r.kink_times},
            {"required_order", r.required_order},
            {"passed", r.passed}};
}

json to_json(const BatteryReport& r) {
    json checks = json::array();
    for (const auto& c : r.checks) {
        checks.push_back({{"name", c.name},
                          {"evaluations", c.evaluations},
                          {"violations", c.violations},
                          {"metric", c.metric},
                          {"metric_name", c.metric_name},
                          {"passed", c.passed}});
    }
    return {{"checks", checks},
            {"min_kink_order", r.min_kink_order},
            {"min_smooth_order", r.min_smooth_order},
            {"kink_cases", r.kink_cases},
            {"smooth_cases", r.smooth_cases},
            {"exact_cases", r.exact_cases},
            {"passed", r.passed()}};
}

json to_json(const HamiltonianEval& h) {
    return {{"f_minus", h.f_minus}, {"f_plus", h.f_plus},   {"isaacs_gap", h.isaacs_gap},
            {"plus_p", h.plus_p},   {"plus_q", h.plus_q},   {"minus_q", h.minus_q},
            {"minus_p", h.minus_p}};
}

json to_json(const LipschitzAudit& a) {
    return {{"samples", a.samples},
            {"seed", a.seed},
            {"max_ratio_minus", a.max_ratio_minus},
            {"max_ratio_plus", a.max_ratio_plus},
            {"max_ratio", a.max_ratio},
            {"max_gap", a.max_gap},
            {"min_gap", a.min_gap},
            {"order_violations", a.order_violations},
            {"growth_violations", a.growth_violations},
            {"flagged", a.flagged},
            {"passed", a.passed()}};
}

json to_json(const StateLattice& l) {
    return {{"lo", l.lo()}, {"hi", l.hi()}, {"points", l.points()}, {"max_spacing", l.max_spacing()}};
}

json to_json(const ValueTable& t) {
    return {{"grid", to_json(t.grid)},
            {"lattice", to_json(t.lattice)},
            {"control_grid_id", t.control_grid_id},
            {"v_minus", t.v_minus},
            {"v_plus", t.v_plus}};
}

json to_json(const StrategyTrace& t) {
    json steps = json::array();
    for (const auto& s : t.steps) {
        steps.push_back({{"t_start", s.t_start},
                         {"t_end", s.t_end},
                         {"p_index", s.p_index},
                         {"integral_cost", s.integral_cost},
                         {"u_before", s.u_before},
                         {"u_after", s.u_after},
                         {"lhs", s.lhs},
                         {"companion_index", s.companion_index},
                         {"companion_from_lattice", s.companion_from_lattice}});
    }
    return {{"adversary", t.adversary},
            {"partition", to_json(t.partition)},
            {"p_indices", t.p_indices},
            {"q_indices", t.q_indices},
            {"path", path_to_json(t.path)},
            {"running_cost", t.running_cost},
            {"terminal_cost", t.terminal_cost},
            {"payoff", t.payoff},
            {"steps", steps}};
}

json to_json(const LyapunovCheck& c) {
    return {{"m_hat", c.m_hat},
            {"steps", c.steps},
            {"within", c.within},
            {"beyond_double", c.beyond_double},
            {"fraction_within", c.fraction_within},
            {"max_ratio", c.max_ratio},
            {"passed", c.passed}};
}

json to_json(const GuaranteedResult& r) {
    json parts = json::array();
    for (const auto& p : r.partitions) {
        parts.push_back({{"steps", p.steps},
                         {"delta", p.delta},
                         {"estimate", p.estimate},
                         {"worst_adversary", p.worst_adversary},
                         {"min_payoff", p.min_payoff},
                         {"runs", p.runs},
                         {"lyapunov", to_json(p.lyapunov)}});
    }
    return {{"estimate", r.estimate},
            {"adversary_budget", r.adversary_budget},
            {"adversary_seed", r.adversary_seed},
            {"partitions", parts}};
}

json to_json(const FeedbackExperimentReport& r) {
    std::vector<bool> up(r.upper_ok.begin(), r.upper_ok.end());
    std::vector<bool> lo(r.lower_ok.begin(), r.lower_ok.end());
    return {{"v_plus", r.v_plus},
            {"v_minus", r.v_minus},
            {"epsilon", r.epsilon},
            {"epsilon0", r.epsilon0},
            {"lattice_spacing", r.lattice_spacing},
            {"monotone_tolerance", r.monotone_tolerance},
            {"tolerances", r.tolerances},
            {"upper_ok", up},
            {"lower_ok", lo},
            {"monotone_ok", r.monotone_ok},
            {"lyapunov_ok", r.lyapunov_ok},
            {"result", to_json(r.result)},
            {"passed", r.passed}};
}

json to_json(const ResidualReport& r) {
    json j = {{"check", r.check},
              {"site", {{"t0", r.site.t0}, {"x0", vec_to_json(r.site.x0)}, {"z", vec_to_json(r.site.z)}}},
              {"direction", to_string(r.direction)},
              {"side", to_string(r.side)},
              {"budget", r.budget},
              {"seed", r.seed},
              {"candidates", r.candidates},
              {"best_candidate", r.best_candidate},
              {"best_candidate_kind", r.best_candidate_kind},
              {"best_time", r.best_time},
              {"lhs", r.lhs},
              {"rhs", r.rhs},
              {"slack", r.slack},
              {"tolerance", r.tolerance},
              {"passed", r.passed},
              {"verdict", r.verdict},
              {"evidence", r.evidence}};
    if (r.check == "viscosity") {
        j["c"] = r.c;
        j["certificate"] = r.certificate;
        j["certificate_extremum"] = r.certificate_extremum;
    }
    return j;
}

json to_json(const StabilityReport& r) {
    return {{"family", to_string(r.family)},
            {"n_list", r.n_list},
            {"magnitudes", r.magnitudes},
            {"distances", r.distances},
            {"identity_distance", r.identity_distance},
            {"non_increasing", r.non_increasing},
            {"strictly_decreasing", r.strictly_decreasing},
            {"matches_magnitude", r.matches_magnitude},
            {"shift_tolerance", r.shift_tolerance},
            {"passed", r.passed}};
}

void write_value_table_csv(std::ostream& os, const ValueTable& t) {
    os << "t";
    for (std::size_t d = 1; d <= t.lattice.dim(); ++d) {
        os << ",x_" << d;
    }
    os << ",v_minus,v_plus\n";
    for (std::size_t k = 0; k < t.grid.size(); ++k) {
        for (std::size_t i = 0; i < t.lattice.size(); ++i) {
            os << num(t.grid.node(k));
            const Vec x = t.lattice.point(i);
            for (Eigen::Index d = 0; d < x.size(); ++d) {
                os << "," << num(x[d]);
            }
            os << "," << num(t.v_minus[k][i]) << "," << num(t.v_plus[k][i]) << "\n";
        }
    }
}

void write_trace_csv(std::ostream& os, const StrategyTrace& t) {
    os << "t_start,t_end,p_index,integral_cost,u_before,u_after,lhs\n";
    for (const auto& s : t.steps) {
        os << num(s.t_start) << "," << num(s.t_end) << "," << s.p_index << "," << num(s.integral_cost) << ","
           << num(s.u_before) << "," << num(s.u_after) << "," << num(s.lhs) << "\n";
    }
}

}  // namespace pdhj
