#include "pdhj/path.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pdhj/error.hpp"

namespace pdhj {

namespace {

constexpr double kTimeTol = 1e-12;

double span_tol(double a, double b) { return kTimeTol * std::max(1.0, std::abs(b - a)); }

}  // namespace

// ---------------------------------------------------------------------------
// TimeGrid

TimeGrid::TimeGrid(std::vector<double> nodes, bool uniform)
    : nodes_(std::move(nodes)), uniform_(uniform) {}

TimeGrid TimeGrid::uniform(double t_start, double t_end, std::size_t n_steps) {
    if (n_steps == 0) {
        throw ParameterError("pathcore", "time grid needs at least one step");
    }
    if (!(t_end - t_start > 0.0) || !std::isfinite(t_start) || !std::isfinite(t_end)) {
        throw ParameterError("pathcore", "time grid requires t_end > t_start");
    }
    std::vector<double> nodes(n_steps + 1);
    const double dt = (t_end - t_start) / static_cast<double>(n_steps);
    for (std::size_t i = 0; i <= n_steps; ++i) {
        nodes[i] = t_start + dt * static_cast<double>(i);
    }
    nodes.back() = t_end;
    return TimeGrid(std::move(nodes), true);
}

TimeGrid TimeGrid::from_nodes(std::vector<double> nodes) {
    if (nodes.size() < 2) {
        throw ParameterError("pathcore", "time grid needs at least two nodes");
    }
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (!std::isfinite(nodes[i])) {
            throw ParameterError("pathcore", "time grid nodes must be finite");
        }
        if (i > 0 && !(nodes[i] > nodes[i - 1])) {
            throw ParameterError("pathcore", "time grid nodes must be strictly increasing");
        }
    }
    return TimeGrid(std::move(nodes), false);
}

double TimeGrid::mesh() const {
    double m = 0.0;
    for (std::size_t k = 0; k + 1 < nodes_.size(); ++k) {
        m = std::max(m, nodes_[k + 1] - nodes_[k]);
    }
    return m;
}

bool TimeGrid::contains(double t) const {
    const double tol = span_tol(t_start(), t_end());
    return t >= t_start() - tol && t <= t_end() + tol;
}

std::optional<std::size_t> TimeGrid::index_of(double t, double tol) const {
    const double abs_tol = tol * std::max(1.0, t_end() - t_start());
    auto it = std::lower_bound(nodes_.begin(), nodes_.end(), t - abs_tol);
    if (it != nodes_.end() && std::abs(*it - t) <= abs_tol) {
        return static_cast<std::size_t>(it - nodes_.begin());
    }
    return std::nullopt;
}

std::size_t TimeGrid::segment(double t) const {
    if (!contains(t)) {
        throw DomainError("pathcore", "time " + std::to_string(t) + " outside grid span");
    }
    auto it = std::upper_bound(nodes_.begin(), nodes_.end(), t);
    std::size_t k = it == nodes_.begin() ? 0 : static_cast<std::size_t>(it - nodes_.begin()) - 1;
    return std::min(k, n_steps() - 1);
}

std::size_t TimeGrid::last_index_at_or_before(double t) const {
    if (!contains(t)) {
        throw DomainError("pathcore", "time " + std::to_string(t) + " outside grid span");
    }
    if (auto idx = index_of(t)) {
        return *idx;
    }
    auto it = std::upper_bound(nodes_.begin(), nodes_.end(), t);
    return it == nodes_.begin() ? 0 : static_cast<std::size_t>(it - nodes_.begin()) - 1;
}

TimeGrid TimeGrid::refined(std::size_t factor) const {
    if (factor == 0) {
        throw ParameterError("pathcore", "refinement factor must be positive");
    }
    std::vector<double> nodes;
    nodes.reserve(n_steps() * factor + 1);
    for (std::size_t k = 0; k < n_steps(); ++k) {
        const double a = nodes_[k];
        const double h = (nodes_[k + 1] - a) / static_cast<double>(factor);
        for (std::size_t j = 0; j < factor; ++j) {
            nodes.push_back(a + h * static_cast<double>(j));
        }
    }
    nodes.push_back(t_end());
    return TimeGrid(std::move(nodes), uniform_);
}

TimeGrid merge_grids(const TimeGrid& a, const TimeGrid& b) {
    if (a == b) {
        return a;
    }
    const double tol = span_tol(a.t_start(), a.t_end());
    if (std::abs(a.t_start() - b.t_start()) > tol || std::abs(a.t_end() - b.t_end()) > tol) {
        throw DomainError("pathcore", "paths live on incompatible time spans");
    }
    std::vector<double> nodes;
    nodes.reserve(a.size() + b.size());
    std::merge(a.nodes().begin(), a.nodes().end(), b.nodes().begin(), b.nodes().end(),
               std::back_inserter(nodes));
    std::vector<double> unique;
    unique.reserve(nodes.size());
    for (double t : nodes) {
        if (unique.empty() || t - unique.back() > tol) {
            unique.push_back(t);
        }
    }
    unique.back() = a.t_end();
    return TimeGrid::from_nodes(std::move(unique));
}

// ---------------------------------------------------------------------------
// StateSpace

StateSpace StateSpace::euclidean(std::size_t dim, double p_exp) {
    return StateSpace(dim, std::vector<double>(dim, 1.0), p_exp);
}

StateSpace::StateSpace(std::size_t dim, std::vector<double> v_weights, double p_exp)
    : dim_(dim), weights_(std::move(v_weights)), p_(p_exp) {
    if (dim_ == 0) {
        throw ParameterError("pathcore", "state space dimension must be positive");
    }
    if (weights_.size() != dim_) {
        throw ParameterError("pathcore", "one V-weight per coordinate is required");
    }
    for (double w : weights_) {
        if (!(w >= 1.0) || !std::isfinite(w)) {
            throw ParameterError("pathcore", "V-weights must be finite and >= 1");
        }
    }
    if (!(p_ >= 2.0) || !std::isfinite(p_)) {
        throw ParameterError("pathcore", "exponent p must satisfy p >= 2");
    }
    q_ = p_ / (p_ - 1.0);
}

double StateSpace::h_norm(const Vec& v) const { return v.norm(); }

double StateSpace::v_norm(const Vec& v) const {
    double s = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) {
        s += weights_[i] * std::pow(std::abs(v[static_cast<Eigen::Index>(i)]), p_);
    }
    const double scale = std::pow(static_cast<double>(dim_), 0.5 - 1.0 / p_);
    return scale * std::pow(s, 1.0 / p_);
}

double StateSpace::dual_norm(const Vec& g) const {
    // Dual of w-weighted l^p is (Σ w_i^{1-q} |g_i|^q)^{1/q}; the scalar factor inverts.
    double s = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) {
        s += std::pow(weights_[i], 1.0 - q_) * std::pow(std::abs(g[static_cast<Eigen::Index>(i)]), q_);
    }
    const double scale = std::pow(static_cast<double>(dim_), 0.5 - 1.0 / p_);
    return std::pow(s, 1.0 / q_) / scale;
}

// ---------------------------------------------------------------------------
// Path

Path::Path(TimeGrid grid, std::vector<Vec> values) : grid_(std::move(grid)), values_(std::move(values)) {
    if (values_.size() != grid_.size()) {
        throw DomainError("pathcore", "path needs exactly one value per grid node");
    }
    const auto d = values_.front().size();
    if (d == 0) {
        throw DomainError("pathcore", "path values must have positive dimension");
    }
    for (const auto& v : values_) {
        if (v.size() != d) {
            throw DomainError("pathcore", "path values have inconsistent dimension");
        }
        if (!v.allFinite()) {
            throw DomainError("pathcore", "path values must be finite");
        }
    }
}

Path Path::constant(TimeGrid grid, const Vec& value) {
    std::vector<Vec> values(grid.size(), value);
    return Path(std::move(grid), std::move(values));
}

Path Path::from_function(TimeGrid grid, const std::function<Vec(double)>& fn) {
    std::vector<Vec> values;
    values.reserve(grid.size());
    for (double t : grid.nodes()) {
        values.push_back(fn(t));
    }
    return Path(std::move(grid), std::move(values));
}

Vec Path::at(double t) const {
    const std::size_t k = grid_.segment(t);
    const double a = grid_.node(k);
    const double b = grid_.node(k + 1);
    const double w = std::clamp((t - a) / (b - a), 0.0, 1.0);
    if (w == 0.0) {
        return values_[k];
    }
    if (w == 1.0) {
        return values_[k + 1];
    }
    return (1.0 - w) * values_[k] + w * values_[k + 1];
}

Path Path::resample(const TimeGrid& grid) const {
    if (grid == grid_) {
        return *this;
    }
    std::vector<Vec> values;
    values.reserve(grid.size());
    for (double t : grid.nodes()) {
        values.push_back(at(t));
    }
    return Path(grid, std::move(values));
}

// ---------------------------------------------------------------------------
// PathPrefix

PathPrefix::PathPrefix(const TimeGrid& grid, std::span<const Vec> known) : grid_(&grid), known_(known) {
    if (known_.empty() || known_.size() > grid.size()) {
        throw DomainError("pathcore", "path prefix must cover between 1 and all grid nodes");
    }
}

double PathPrefix::running_sup() const {
    double s = 0.0;
    for (const auto& v : known_) {
        s = std::max(s, v.norm());
    }
    return s;
}

Path PathPrefix::stopped() const {
    std::vector<Vec> values(known_.begin(), known_.end());
    values.resize(grid_->size(), known_.back());
    return Path(*grid_, std::move(values));
}

// ---------------------------------------------------------------------------
// Free functions

Path stop_path(const Path& x, double t) {
    const TimeGrid& g = x.grid();
    if (!g.contains(t)) {
        throw DomainError("pathcore", "stop time " + std::to_string(t) + " outside grid span");
    }
    if (auto idx = g.index_of(t)) {
        std::vector<Vec> values(x.values().begin(), x.values().end());
        for (std::size_t i = *idx + 1; i < values.size(); ++i) {
            values[i] = values[*idx];
        }
        return Path(g, std::move(values));
    }
    std::vector<double> nodes(g.nodes().begin(), g.nodes().end());
    nodes.insert(std::upper_bound(nodes.begin(), nodes.end(), t), t);
    const Path refined = x.resample(TimeGrid::from_nodes(std::move(nodes)));
    return stop_path(refined, t);
}

double sup_norm(const Path& x, double t) {
    const TimeGrid& g = x.grid();
    if (!g.contains(t)) {
        throw DomainError("pathcore", "time " + std::to_string(t) + " outside grid span");
    }
    const std::size_t last = g.last_index_at_or_before(t);
    double s = 0.0;
    for (std::size_t i = 0; i <= last; ++i) {
        s = std::max(s, x.value(i).norm());
    }
    return std::max(s, x.at(t).norm());
}

Path difference(const Path& x, const Path& y) {
    if (x.dim() != y.dim()) {
        throw DomainError("pathcore", "paths have different dimensions");
    }
    if (x.grid() == y.grid()) {
        std::vector<Vec> values;
        values.reserve(x.grid().size());
        for (std::size_t i = 0; i < x.grid().size(); ++i) {
            values.push_back(x.value(i) - y.value(i));
        }
        return Path(x.grid(), std::move(values));
    }
    const TimeGrid g = merge_grids(x.grid(), y.grid());
    return difference(x.resample(g), y.resample(g));
}

double d_infinity(double t1, const Path& x1, double t2, const Path& x2) {
    if (!x1.grid().contains(t1) || !x2.grid().contains(t2)) {
        throw DomainError("pathcore", "d_infinity time outside grid span");
    }
    const Path s1 = stop_path(x1, t1);
    const Path s2 = stop_path(x2, t2);
    const Path diff = difference(s1, s2);
    double m = 0.0;
    for (const auto& v : diff.values()) {
        m = std::max(m, v.norm());
    }
    return std::abs(t1 - t2) + m;
}

}  // namespace pdhj
