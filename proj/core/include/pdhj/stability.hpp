#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "pdhj/game.hpp"
#include "pdhj/value.hpp"

namespace pdhj {

enum class PerturbationFamily {
    TerminalShift,  // h_n = h + 1/n
    Drift,          // f_n = f + (1/n) 0.5 sin(pi x), so F_n(z) = F(z) + (1/n)(0.5 sin(pi x), z)
};

const char* to_string(PerturbationFamily f);
PerturbationFamily perturbation_from_string(const std::string& name);

// The member of the family with the given magnitude (magnitude 0 returns an
// equivalent copy of the game).
GameSpec perturb_game(const GameSpec& spec, PerturbationFamily family, double magnitude);

struct StabilityReport {
    PerturbationFamily family = PerturbationFamily::TerminalShift;
    std::vector<std::size_t> n_list;
    std::vector<double> magnitudes;      // 1/n
    std::vector<double> distances;       // max over the table of |u_n - u|, both sides
    double identity_distance = 0.0;      // distance for magnitude 0
    bool non_increasing = false;
    bool strictly_decreasing = false;
    bool matches_magnitude = false;      // |distance - 1/n| <= shift_tolerance for every n
    double shift_tolerance = 1e-12;
    bool passed = false;
};

// Sup distance between two tables on the same grid and lattice.
double table_distance(const ValueTable& a, const ValueTable& b);

// Terminal shift passes when distances equal 1/n and never increase; the
// drift family passes when distances strictly decrease. Both need the
// unperturbed rerun at distance 0.
StabilityReport stability_experiment(const GameSpec& spec, PerturbationFamily family,
                                     const std::vector<std::size_t>& n_list, const TimeGrid& grid,
                                     const StateLattice& lattice, std::size_t jobs = 1);

}  // namespace pdhj
