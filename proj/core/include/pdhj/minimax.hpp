#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "pdhj/game.hpp"
#include "pdhj/value.hpp"

namespace pdhj {

enum class Direction { Sub, Super };

const char* to_string(Direction d);

struct Site {
    double t0 = 0.0;  // must be a node of the value table grid
    Vec x0;
    Vec z;
};

// tol = a * lattice_spacing + b * mesh + c / sqrt(budget)
struct ToleranceModel {
    double a = 1.0;
    double b = 1.0;
    double c = 0.1;
    double operator()(double spacing, double mesh, std::size_t budget) const;
};

struct ResidualOptions {
    double horizon = 0.25;
    std::size_t budget = 64;
    std::uint64_t seed = 1;
    Side side = Side::Upper;  // which table; F+ is paired with the upper value, F- with the lower
    ToleranceModel tolerance;
};

/**
 * ResidualReport: outcome of one sampled sub/super check.
 *
 * The existential quantifier over trajectories is replaced by the best of
 * `budget` candidate characteristics, so a pass is evidence, not proof.
 */
struct ResidualReport {
    std::string check;  // "minimax" or "viscosity"
    Site site;
    Direction direction = Direction::Super;
    Side side = Side::Upper;
    std::size_t budget = 0;
    std::uint64_t seed = 0;
    std::size_t candidates = 0;
    std::size_t best_candidate = 0;
    std::string best_candidate_kind;
    double best_time = 0.0;
    double lhs = 0.0;  // u(t0, x0)
    double rhs = 0.0;  // ∫ ((-f, z) + F) ds + u(t, x(t)) at the reported extremum
    double slack = 0.0;
    double tolerance = 0.0;
    bool passed = false;
    // viscosity only
    double c = 0.0;
    double certificate_extremum = 0.0;  // sampled max (super) or min (sub) of φ + φ~ - u
    bool certificate = false;
    std::string verdict;  // pass | violation | vacuous (viscosity), pass | fail (minimax)
    std::string evidence = "sampled characteristics; pass is evidence, not proof";
};

// Sampled check of the minimax sub/supersolution inequality along the
// candidate characteristics from the site over (t0, t0 + horizon].
ResidualReport minimax_residual(const ValueTable& u, const GameSpec& spec, const Site& site, Direction direction,
                                const ResidualOptions& options = {});

// Canonical test pair φ(t, x) = u(t0, x0) + (t - t0)(c - F(t0, x0, z)) +
// (x(t) - x0, z) with φ~^z = ∫ <A(s, x(s)), z> ds. When the sampled
// extremum certificate holds the inequality reduces to c <= tol (super) or
// c >= -tol (sub); otherwise the check is vacuous.
ResidualReport viscosity_residual(const ValueTable& u, const GameSpec& spec, const Site& site, double c,
                                  Direction direction, const ResidualOptions& options = {});

// Random sites: t0 uniform over nodes strictly before T - horizon (at least
// the first node), x0 uniform in the central `fraction` of the lattice box, z
// uniform in [-z_radius, z_radius]^d.
std::vector<Site> random_sites(const ValueTable& u, std::size_t count, std::uint64_t seed, double horizon,
                               double z_radius = 2.0, double fraction = 0.8);

}  // namespace pdhj
