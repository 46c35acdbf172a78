#pragma once

#include <ostream>

#include <nlohmann/json.hpp>

#include "pdhj/chain_rule.hpp"
#include "pdhj/evolution.hpp"
#include "pdhj/feedback.hpp"
#include "pdhj/game.hpp"
#include "pdhj/minimax.hpp"
#include "pdhj/stability.hpp"
#include "pdhj/upsilon.hpp"
#include "pdhj/value.hpp"

namespace pdhj {

nlohmann::json vec_to_json(const Vec& v);
Vec vec_from_json(const nlohmann::json& j);

nlohmann::json to_json(const TimeGrid& g);
nlohmann::json to_json(const AuditReport& r);
nlohmann::json to_json(const SolveReport& r);
nlohmann::json to_json(const UpsilonEval& e);
nlohmann::json to_json(const ChainRuleReport& r);
nlohmann::json to_json(const BatteryReport& r);
nlohmann::json to_json(const HamiltonianEval& h);
nlohmann::json to_json(const LipschitzAudit& a);
nlohmann::json to_json(const StateLattice& l);
nlohmann::json to_json(const ValueTable& t);
nlohmann::json to_json(const StrategyTrace& t);
nlohmann::json to_json(const LyapunovCheck& c);
nlohmann::json to_json(const GuaranteedResult& r);
nlohmann::json to_json(const FeedbackExperimentReport& r);
nlohmann::json to_json(const ResidualReport& r);
nlohmann::json to_json(const StabilityReport& r);

// t, x_1..x_d, v_minus, v_plus; one row per (time node, lattice point).
void write_value_table_csv(std::ostream& os, const ValueTable& t);
// Per partition step: t_start, t_end, p_index, integral_cost, u_before, u_after, lhs.
void write_trace_csv(std::ostream& os, const StrategyTrace& t);

}  // namespace pdhj
