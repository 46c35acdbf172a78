#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace pdhj {

// Element of the pivot space H (and of V, V*: at finite dimension all three
// share the same coordinates and only the norms differ).
using Vec = Eigen::VectorXd;

/**
 * TimeGrid: strictly increasing list of time nodes t_0 < ... < t_n.
 *
 * Uniform grids are the default; partitions used by the feedback game may be
 * arbitrary and are built with from_nodes().
 */
class TimeGrid {
public:
    static TimeGrid uniform(double t_start, double t_end, std::size_t n_steps);
    static TimeGrid from_nodes(std::vector<double> nodes);

    double t_start() const { return nodes_.front(); }
    double t_end() const { return nodes_.back(); }
    std::size_t n_steps() const { return nodes_.size() - 1; }
    std::size_t size() const { return nodes_.size(); }
    double node(std::size_t i) const { return nodes_[i]; }
    std::span<const double> nodes() const { return nodes_; }
    double step(std::size_t k) const { return nodes_[k + 1] - nodes_[k]; }
    double mesh() const;
    bool is_uniform() const { return uniform_; }

    // True when t lies in [t_start, t_end] up to a relative tolerance.
    bool contains(double t) const;
    // Index of the node equal to t (within tol * span), if any.
    std::optional<std::size_t> index_of(double t, double tol = 1e-12) const;
    // Index k with t in [t_k, t_{k+1}]; the last segment for t == t_end.
    std::size_t segment(double t) const;
    // Last node index with t_k <= t (up to tolerance).
    std::size_t last_index_at_or_before(double t) const;

    // Uniform refinement: every step split into `factor` equal pieces.
    TimeGrid refined(std::size_t factor) const;

    bool operator==(const TimeGrid& other) const { return nodes_ == other.nodes_; }

private:
    explicit TimeGrid(std::vector<double> nodes, bool uniform);

    std::vector<double> nodes_;
    bool uniform_ = false;
};

// Union of node sets; both grids must span the same interval.
TimeGrid merge_grids(const TimeGrid& a, const TimeGrid& b);

/**
 * StateSpace: finite-dimensional Gelfand triple V ⊂ H ⊂ V*.
 *
 * |v|_H is Euclidean. ‖v‖_V = dim^{1/2-1/p} (Σ w_i |v_i|^p)^{1/p} with w_i >= 1,
 * which by Hölder dominates |v|_H with embedding constant 1. The duality
 * pairing coincides with the Euclidean inner product.
 */
class StateSpace {
public:
    static StateSpace euclidean(std::size_t dim, double p_exp = 2.0);
    StateSpace(std::size_t dim, std::vector<double> v_weights, double p_exp);

    std::size_t dim() const { return dim_; }
    std::span<const double> v_weights() const { return weights_; }
    double p_exp() const { return p_; }
    double q_exp() const { return q_; }

    double h_norm(const Vec& v) const;
    double v_norm(const Vec& v) const;
    double dual_norm(const Vec& g) const;
    double pairing(const Vec& g, const Vec& v) const { return g.dot(v); }

private:
    std::size_t dim_;
    std::vector<double> weights_;
    double p_;
    double q_;
};

/**
 * Path: samples of a continuous trajectory in H, one per grid node, read as
 * the piecewise-linear interpolant. Immutable after construction.
 */
class Path {
public:
    Path(TimeGrid grid, std::vector<Vec> values);

    static Path constant(TimeGrid grid, const Vec& value);
    static Path from_function(TimeGrid grid, const std::function<Vec(double)>& fn);

    const TimeGrid& grid() const { return grid_; }
    std::span<const Vec> values() const { return values_; }
    const Vec& value(std::size_t i) const { return values_[i]; }
    std::size_t dim() const { return static_cast<std::size_t>(values_.front().size()); }

    // Interpolated value at time t; throws DomainError outside the span.
    Vec at(double t) const;
    // Exact for piecewise-linear paths when `grid` contains the original nodes.
    Path resample(const TimeGrid& grid) const;

private:
    TimeGrid grid_;
    std::vector<Vec> values_;
};

/**
 * PathPrefix: non-owning view of a path known on nodes 0..k of its grid.
 *
 * This is what dynamics and cost callbacks see, so they cannot look past the
 * current time.
 */
class PathPrefix {
public:
    PathPrefix(const TimeGrid& grid, std::span<const Vec> known);

    std::size_t index() const { return known_.size() - 1; }
    double time() const { return grid_->node(index()); }
    const Vec& current() const { return known_.back(); }
    const Vec& at_node(std::size_t i) const { return known_[i]; }
    std::span<const Vec> known() const { return known_; }
    const TimeGrid& grid() const { return *grid_; }
    // max_{s <= t} |x(s)|_H; exact for the interpolant since t is a node.
    double running_sup() const;
    // The stopped path x(. ∧ t) on the full grid.
    Path stopped() const;

private:
    const TimeGrid* grid_;
    std::span<const Vec> known_;
};

// x(. ∧ t). If t is not a grid node it is inserted so the result represents
// the stopped interpolant exactly.
Path stop_path(const Path& x, double t);

// max_{s <= t} |x(s)|_H of the interpolant.
double sup_norm(const Path& x, double t);

// |t1 - t2| + ‖x1(. ∧ t1) - x2(. ∧ t2)‖_∞. Grids may differ but must share
// the same span.
double d_infinity(double t1, const Path& x1, double t2, const Path& x2);

// Pointwise difference x - y on the union grid.
Path difference(const Path& x, const Path& y);

}  // namespace pdhj
