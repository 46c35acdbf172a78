#include "pdhj/value.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pdhj/error.hpp"
#include "pdhj/parallel.hpp"

namespace pdhj {

// ---------------------------------------------------------------------------
// StateLattice

StateLattice::StateLattice(std::vector<double> lo, std::vector<double> hi, std::vector<std::size_t> points)
    : lo_(std::move(lo)), hi_(std::move(hi)), points_(std::move(points)) {
    if (lo_.empty() || lo_.size() != hi_.size() || lo_.size() != points_.size()) {
        throw ParameterError("game", "lattice lo, hi and points must have the same non-zero length");
    }
    strides_.assign(lo_.size(), 1);
    total_ = 1;
    for (std::size_t d = lo_.size(); d-- > 0;) {
        if (!(hi_[d] > lo_[d]) || !std::isfinite(lo_[d]) || !std::isfinite(hi_[d])) {
            throw ParameterError("game", "lattice needs lo < hi in every coordinate");
        }
        if (points_[d] < 2) {
            throw ParameterError("game", "lattice needs at least 2 points per coordinate");
        }
        strides_[d] = total_;
        total_ *= points_[d];
    }
}

StateLattice StateLattice::uniform(std::size_t dim, double lo, double hi, std::size_t points) {
    return StateLattice(std::vector<double>(dim, lo), std::vector<double>(dim, hi),
                        std::vector<std::size_t>(dim, points));
}

double StateLattice::spacing(std::size_t d) const {
    return (hi_[d] - lo_[d]) / static_cast<double>(points_[d] - 1);
}

double StateLattice::max_spacing() const {
    double m = 0.0;
    for (std::size_t d = 0; d < dim(); ++d) {
        m = std::max(m, spacing(d));
    }
    return m;
}

Vec StateLattice::point(std::size_t index) const {
    Vec v(static_cast<Eigen::Index>(dim()));
    for (std::size_t d = 0; d < dim(); ++d) {
        const std::size_t i = (index / strides_[d]) % points_[d];
        // Exact endpoints: the last node is hi, not lo + (n-1) h.
        v[static_cast<Eigen::Index>(d)] =
            i + 1 == points_[d] ? hi_[d] : lo_[d] + static_cast<double>(i) * spacing(d);
    }
    return v;
}

double StateLattice::outside_margin(const Vec& x) const {
    double m = 0.0;
    for (std::size_t d = 0; d < dim(); ++d) {
        const double v = x[static_cast<Eigen::Index>(d)];
        m = std::max({m, lo_[d] - v, v - hi_[d]});
    }
    return m;
}

double StateLattice::interpolate(const std::vector<double>& values, const Vec& x) const {
    if (static_cast<std::size_t>(x.size()) != dim()) {
        throw DomainError("game", "state dimension does not match the lattice");
    }
    if (values.size() != total_) {
        throw DomainError("game", "value slice has the wrong size");
    }
    std::vector<std::size_t> base(dim());
    std::vector<double> frac(dim());
    for (std::size_t d = 0; d < dim(); ++d) {
        const double v = x[static_cast<Eigen::Index>(d)];
        const double tol = 1e-12 * (hi_[d] - lo_[d]);
        if (!(v >= lo_[d] - tol && v <= hi_[d] + tol)) {
            std::ostringstream os;
            os << "state " << v << " outside lattice [" << lo_[d] << ", " << hi_[d] << "] in coordinate " << d;
            throw LatticeError(os.str(), outside_margin(x));
        }
        const double u = std::clamp((v - lo_[d]) / spacing(d), 0.0, static_cast<double>(points_[d] - 1));
        std::size_t i = static_cast<std::size_t>(std::floor(u));
        i = std::min(i, points_[d] - 2);
        base[d] = i;
        frac[d] = u - static_cast<double>(i);
    }
    double out = 0.0;
    const std::size_t corners = std::size_t{1} << dim();
    for (std::size_t c = 0; c < corners; ++c) {
        double w = 1.0;
        std::size_t idx = 0;
        for (std::size_t d = 0; d < dim(); ++d) {
            const bool up = (c >> d) & 1U;
            w *= up ? frac[d] : 1.0 - frac[d];
            idx += (base[d] + (up ? 1 : 0)) * strides_[d];
        }
        if (w != 0.0) {
            out += w * values[idx];
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// ValueTable

const char* to_string(Side side) { return side == Side::Upper ? "upper" : "lower"; }

double ValueTable::value(Side s, std::size_t k, const Vec& x) const {
    return lattice.interpolate(side(s).at(k), x);
}

double ValueTable::value_at(Side s, double t, const Vec& x) const {
    if (!grid.contains(t)) {
        throw DomainError("game", "time outside the value table grid");
    }
    if (auto k = grid.index_of(t)) {
        return value(s, *k, x);
    }
    const std::size_t k = grid.segment(t);
    const double w = (t - grid.node(k)) / grid.step(k);
    return (1.0 - w) * value(s, k, x) + w * value(s, k + 1, x);
}

// ---------------------------------------------------------------------------
// Recursion

Vec dp_successor(const GameSpec& spec, const TimeGrid& grid, std::size_t k, const Vec& x, const Vec& p, const Vec& q,
                 const SolveOptions& options) {
    const Vec f = spec.f_state(grid.node(k), x, p, q);
    if (!f.allFinite()) {
        throw EvaluationError("game", "non-finite f at node " + std::to_string(k));
    }
    return implicit_euler_step(spec.op, grid.node(k + 1), grid.step(k), x, f, options, k).state;
}

namespace {

void require_markov(const GameSpec& spec) {
    if (!spec.markovian()) {
        throw ConfigurationError("game", "the dynamic programming oracle needs a Markovian game");
    }
}

// Payoff table at x; `margin` collects how far successors left the lattice.
Eigen::MatrixXd payoff_table(const GameSpec& spec, const TimeGrid& grid, const StateLattice& lattice, std::size_t k,
                             const std::vector<double>& next, const Vec& x, double& margin) {
    const auto& c = spec.controls;
    Eigen::MatrixXd table(static_cast<Eigen::Index>(c.p_points.size()), static_cast<Eigen::Index>(c.q_points.size()));
    const double dt = grid.step(k);
    const double t = grid.node(k);
    for (std::size_t i = 0; i < c.p_points.size(); ++i) {
        for (std::size_t j = 0; j < c.q_points.size(); ++j) {
            const double l = spec.ell_state(t, x, c.p_points[i], c.q_points[j]);
            if (!std::isfinite(l)) {
                throw EvaluationError("game", "non-finite l at node " + std::to_string(k));
            }
            const Vec y = dp_successor(spec, grid, k, x, c.p_points[i], c.q_points[j]);
            const double out = lattice.outside_margin(y);
            double v = 0.0;
            if (out > 1e-12 * lattice.max_spacing()) {
                margin = std::max(margin, out);
                v = std::numeric_limits<double>::quiet_NaN();
            } else {
                v = lattice.interpolate(next, y);
            }
            table(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = dt * l + v;
        }
    }
    return table;
}

}  // namespace

std::vector<double> dp_backup(const GameSpec& spec, const TimeGrid& grid, const StateLattice& lattice,
                              std::size_t k, const std::vector<double>& next, Side side, std::size_t jobs) {
    require_markov(spec);
    if (k + 1 >= grid.size()) {
        throw DomainError("game", "backup index must be below the last node");
    }
    std::vector<double> out(lattice.size());
    std::vector<double> margins(lattice.size(), 0.0);
    parallel_for(lattice.size(), jobs, [&](std::size_t i) {
        const Eigen::MatrixXd table = payoff_table(spec, grid, lattice, k, next, lattice.point(i), margins[i]);
        if (margins[i] > 0.0) {
            return;
        }
        const HamiltonianEval mm = minmax_table(table);
        out[i] = side == Side::Upper ? mm.f_plus : mm.f_minus;
    });
    const double worst = *std::max_element(margins.begin(), margins.end());
    if (worst > 0.0) {
        std::ostringstream os;
        os << "successor states leave the lattice at node " << k << "; expand the box by at least " << worst;
        throw LatticeError(os.str(), worst);
    }
    return out;
}

ValueTable dp_value(const GameSpec& spec, const TimeGrid& grid, const StateLattice& lattice, std::size_t jobs) {
    require_markov(spec);
    spec.validate();
    if (lattice.dim() != spec.dim()) {
        throw DomainError("game", "lattice dimension does not match the game");
    }
    ValueTable table{grid, lattice, {}, {}, spec.controls.id()};
    const std::size_t n = grid.size();
    std::vector<double> terminal(lattice.size());
    for (std::size_t i = 0; i < lattice.size(); ++i) {
        terminal[i] = spec.h_state(lattice.point(i));
        if (!std::isfinite(terminal[i])) {
            throw EvaluationError("game", "non-finite terminal cost at lattice point " + std::to_string(i));
        }
    }
    table.v_minus.assign(n, {});
    table.v_plus.assign(n, {});
    table.v_minus[n - 1] = terminal;
    table.v_plus[n - 1] = terminal;
    for (std::size_t k = n - 1; k-- > 0;) {
        table.v_plus[k] = dp_backup(spec, grid, lattice, k, table.v_plus[k + 1], Side::Upper, jobs);
        table.v_minus[k] = dp_backup(spec, grid, lattice, k, table.v_minus[k + 1], Side::Lower, jobs);
    }
    return table;
}

Eigen::MatrixXd dp_payoff_table(const GameSpec& spec, const ValueTable& table, Side side, std::size_t k,
                                const Vec& x) {
    require_markov(spec);
    double margin = 0.0;
    Eigen::MatrixXd out = payoff_table(spec, table.grid, table.lattice, k, table.side(side).at(k + 1), x, margin);
    if (margin > 0.0) {
        std::ostringstream os;
        os << "successor of the state leaves the lattice at node " << k << " by " << margin;
        throw LatticeError(os.str(), margin);
    }
    return out;
}

}  // namespace pdhj
