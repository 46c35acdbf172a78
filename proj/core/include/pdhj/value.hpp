#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "pdhj/evolution.hpp"
#include "pdhj/game.hpp"
#include "pdhj/path.hpp"

namespace pdhj {

/**
 * StateLattice: tensor grid of states, points[d] uniformly spaced nodes on
 * [lo[d], hi[d]]. Point index is row-major with the last coordinate fastest.
 */
class StateLattice {
public:
    StateLattice(std::vector<double> lo, std::vector<double> hi, std::vector<std::size_t> points);
    static StateLattice uniform(std::size_t dim, double lo, double hi, std::size_t points);

    std::size_t dim() const { return lo_.size(); }
    std::size_t size() const { return total_; }
    const std::vector<double>& lo() const { return lo_; }
    const std::vector<double>& hi() const { return hi_; }
    const std::vector<std::size_t>& points() const { return points_; }
    double spacing(std::size_t d) const;
    double max_spacing() const;
    Vec point(std::size_t index) const;

    // Distance by which x lies outside the box (0 inside).
    double outside_margin(const Vec& x) const;
    // Multilinear interpolation of `values` (one per point). Throws
    // LatticeError with the margin when x is outside the box.
    double interpolate(const std::vector<double>& values, const Vec& x) const;

private:
    std::vector<double> lo_;
    std::vector<double> hi_;
    std::vector<std::size_t> points_;
    std::vector<std::size_t> strides_;
    std::size_t total_ = 0;
};

enum class Side { Lower, Upper };

const char* to_string(Side side);

struct ValueTable {
    TimeGrid grid;
    StateLattice lattice;
    std::vector<std::vector<double>> v_minus;  // [time index][lattice index]
    std::vector<std::vector<double>> v_plus;
    std::string control_grid_id;

    const std::vector<std::vector<double>>& side(Side s) const { return s == Side::Upper ? v_plus : v_minus; }
    std::vector<std::vector<double>>& side(Side s) { return s == Side::Upper ? v_plus : v_minus; }
    // Interpolated value at node k of the time grid.
    double value(Side s, std::size_t k, const Vec& x) const;
    // Value at time t: linear in time between the neighbouring nodes.
    double value_at(Side s, double t, const Vec& x) const;
};

// Implicit-Euler successor of the state x at node k under the control pair.
Vec dp_successor(const GameSpec& spec, const TimeGrid& grid, std::size_t k, const Vec& x, const Vec& p, const Vec& q,
                 const SolveOptions& options = {});

// One backward step of the recursion: the slice at node k from the slice at
// k + 1. Upper: min_p max_q [Δ l + v(successor)]; lower: max_q min_p.
std::vector<double> dp_backup(const GameSpec& spec, const TimeGrid& grid, const StateLattice& lattice,
                              std::size_t k, const std::vector<double>& next, Side side, std::size_t jobs = 1);

// Full backward recursion for both sides; the terminal slice is h at the
// lattice points. Needs a Markovian game.
ValueTable dp_value(const GameSpec& spec, const TimeGrid& grid, const StateLattice& lattice, std::size_t jobs = 1);

// Payoff table Δ l(t_k, x, p, q) + v_{k+1}(successor) over P x Q.
Eigen::MatrixXd dp_payoff_table(const GameSpec& spec, const ValueTable& table, Side side, std::size_t k,
                                const Vec& x);

}  // namespace pdhj
