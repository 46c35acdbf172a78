#include "pdhj/stability.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "pdhj/error.hpp"

namespace pdhj {

const char* to_string(PerturbationFamily f) {
    return f == PerturbationFamily::TerminalShift ? "terminal-shift" : "drift";
}

PerturbationFamily perturbation_from_string(const std::string& name) {
    if (name == "terminal-shift") {
        return PerturbationFamily::TerminalShift;
    }
    if (name == "drift") {
        return PerturbationFamily::Drift;
    }
    throw ParameterError("minimax", "unknown perturbation family '" + name + "'");
}

GameSpec perturb_game(const GameSpec& spec, PerturbationFamily family, double magnitude) {
    if (!spec.markovian()) {
        throw ConfigurationError("minimax", "perturbation families need a Markovian game");
    }
    if (!(magnitude >= 0.0)) {
        throw ParameterError("minimax", "perturbation magnitude must be non-negative");
    }
    StateDynamics f = spec.f_state;
    StateTerminalCost h = spec.h_state;
    double l_f = spec.l_f;
    if (family == PerturbationFamily::TerminalShift) {
        h = [base = spec.h_state, magnitude](const Vec& x) { return base(x) + magnitude; };
    } else {
        f = [base = spec.f_state, magnitude](double t, const Vec& x, const Vec& p, const Vec& q) -> Vec {
            const Vec drift = (0.5 * magnitude) * (std::numbers::pi * x.array()).sin().matrix();
            return base(t, x, p, q) + drift;
        };
        l_f += 0.5 * magnitude * std::sqrt(static_cast<double>(spec.dim()));
    }
    return GameSpec::markov(spec.op, f, spec.ell_state, h, spec.controls, l_f, spec.lambda_L, spec.horizon,
                            spec.name + "+" + to_string(family));
}

double table_distance(const ValueTable& a, const ValueTable& b) {
    if (!(a.grid == b.grid) || a.lattice.size() != b.lattice.size()) {
        throw DomainError("minimax", "tables live on different grids");
    }
    double d = 0.0;
    for (std::size_t k = 0; k < a.grid.size(); ++k) {
        for (std::size_t i = 0; i < a.lattice.size(); ++i) {
            d = std::max({d, std::abs(a.v_plus[k][i] - b.v_plus[k][i]), std::abs(a.v_minus[k][i] - b.v_minus[k][i])});
        }
    }
    return d;
}

StabilityReport stability_experiment(const GameSpec& spec, PerturbationFamily family,
                                     const std::vector<std::size_t>& n_list, const TimeGrid& grid,
                                     const StateLattice& lattice, std::size_t jobs) {
    if (n_list.empty()) {
        throw ParameterError("minimax", "n_list must not be empty");
    }
    for (std::size_t i = 0; i < n_list.size(); ++i) {
        if (n_list[i] == 0 || (i > 0 && n_list[i] <= n_list[i - 1])) {
            throw ParameterError("minimax", "n_list must be positive and strictly increasing");
        }
    }
    StabilityReport r;
    r.family = family;
    r.n_list = n_list;
    const ValueTable base = dp_value(spec, grid, lattice, jobs);
    r.identity_distance = table_distance(base, dp_value(perturb_game(spec, family, 0.0), grid, lattice, jobs));
    for (std::size_t n : n_list) {
        const double m = 1.0 / static_cast<double>(n);
        r.magnitudes.push_back(m);
        r.distances.push_back(table_distance(base, dp_value(perturb_game(spec, family, m), grid, lattice, jobs)));
    }
    r.non_increasing = true;
    r.strictly_decreasing = true;
    r.matches_magnitude = true;
    for (std::size_t i = 0; i < r.distances.size(); ++i) {
        if (std::abs(r.distances[i] - r.magnitudes[i]) > r.shift_tolerance) {
            r.matches_magnitude = false;
        }
        if (i > 0) {
            r.non_increasing = r.non_increasing && r.distances[i] <= r.distances[i - 1];
            r.strictly_decreasing = r.strictly_decreasing && r.distances[i] < r.distances[i - 1];
        }
    }
    const bool family_ok = family == PerturbationFamily::TerminalShift ? (r.matches_magnitude && r.non_increasing)
                                                                        : r.strictly_decreasing;
    r.passed = family_ok && r.identity_distance == 0.0;
    return r;
}

}  // namespace pdhj
