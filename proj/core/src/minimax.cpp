#include "pdhj/minimax.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pdhj/error.hpp"
#include "pdhj/random.hpp"

namespace pdhj {

const char* to_string(Direction d) { return d == Direction::Super ? "super" : "sub"; }

double ToleranceModel::operator()(double spacing, double mesh, std::size_t budget) const {
    return a * spacing + b * mesh + c / std::sqrt(static_cast<double>(std::max<std::size_t>(budget, 1)));
}

namespace {

struct Characteristic {
    std::string kind;
    std::vector<Vec> states;    // x_k for k = k0 .. k_end
    std::vector<Vec> forcings;  // f_k for k = k0 .. k_end - 1
};

std::size_t argmax_row(const Eigen::MatrixXd& m, std::size_t row) {
    Eigen::Index best = 0;
    for (Eigen::Index j = 1; j < m.cols(); ++j) {
        if (m(static_cast<Eigen::Index>(row), j) > m(static_cast<Eigen::Index>(row), best)) {
            best = j;
        }
    }
    return static_cast<std::size_t>(best);
}

std::size_t argmin_col(const Eigen::MatrixXd& m, std::size_t col) {
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < m.rows(); ++i) {
        if (m(i, static_cast<Eigen::Index>(col)) < m(best, static_cast<Eigen::Index>(col))) {
            best = i;
        }
    }
    return static_cast<std::size_t>(best);
}

// ℓ + (f, z) over P x Q at state x.
Eigen::MatrixXd hamiltonian_table(const GameSpec& spec, double t, const Vec& x, const Vec& z) {
    const auto& c = spec.controls;
    Eigen::MatrixXd m(static_cast<Eigen::Index>(c.p_points.size()), static_cast<Eigen::Index>(c.q_points.size()));
    for (std::size_t i = 0; i < c.p_points.size(); ++i) {
        for (std::size_t j = 0; j < c.q_points.size(); ++j) {
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                spec.ell_state(t, x, c.p_points[i], c.q_points[j]) + spec.f_state(t, x, c.p_points[i], c.q_points[j]).dot(z);
        }
    }
    return m;
}

// Control pair of the value-guided characteristic: the player whose
// Hamiltonian optimum is taken at z, the other responds through the table.
std::pair<std::size_t, std::size_t> guided_pair(const GameSpec& spec, const ValueTable& u, Side side,
                                                Direction dir, std::size_t k, const Vec& x, const Vec& z) {
    const Eigen::MatrixXd hz = hamiltonian_table(spec, u.grid.node(k), x, z);
    const Eigen::MatrixXd dp = dp_payoff_table(spec, u, side, k, x);
    if (side == Side::Upper) {
        if (dir == Direction::Super) {
            const std::size_t p = minmax_table(dp).plus_p;
            return {p, argmax_row(hz, p)};
        }
        const std::size_t p = minmax_table(hz).plus_p;
        return {p, argmax_row(dp, p)};
    }
    if (dir == Direction::Super) {
        const std::size_t q = minmax_table(hz).minus_q;
        return {argmin_col(dp, q), q};
    }
    const std::size_t q = minmax_table(dp).minus_q;
    return {argmin_col(hz, q), q};
}

struct Window {
    std::size_t k0 = 0;
    std::size_t k_end = 0;
};

Window window_for(const ValueTable& u, const Site& site, double horizon) {
    const auto k0 = u.grid.index_of(site.t0);
    if (!k0) {
        throw DomainError("minimax", "site time must be a node of the value table grid");
    }
    if (!(horizon > 0.0)) {
        throw ParameterError("minimax", "horizon must be positive");
    }
    const double t_stop = std::min(site.t0 + horizon, u.grid.t_end());
    const std::size_t k_end = u.grid.last_index_at_or_before(t_stop);
    if (k_end <= *k0) {
        throw ParameterError("minimax", "horizon shorter than one grid step");
    }
    return {*k0, k_end};
}

std::vector<Characteristic> characteristics(const ValueTable& u, const GameSpec& spec, const Site& site,
                                            Direction dir, const ResidualOptions& opt, const Window& w) {
    if (!spec.markovian()) {
        throw ConfigurationError("minimax", "residual checks need a Markovian game");
    }
    if (opt.budget == 0) {
        throw ParameterError("minimax", "search budget must be at least 1");
    }
    const auto& c = spec.controls;
    const std::size_t np = c.p_points.size();
    const std::size_t nq = c.q_points.size();
    std::vector<Characteristic> out;
    out.reserve(opt.budget);
    for (std::size_t i = 0; i < opt.budget; ++i) {
        Characteristic ch;
        Rng rng(stream_seed(opt.seed, i));
        if (i == 0) {
            ch.kind = "value-guided";
        } else if (i <= np * nq) {
            ch.kind = "constant/" + std::to_string((i - 1) / nq) + "-" + std::to_string((i - 1) % nq);
        } else {
            ch.kind = "random-stepwise";
        }
        ch.states.push_back(site.x0);
        for (std::size_t k = w.k0; k < w.k_end; ++k) {
            const Vec& x = ch.states.back();
            std::size_t p = 0;
            std::size_t q = 0;
            if (i == 0) {
                std::tie(p, q) = guided_pair(spec, u, opt.side, dir, k, x, site.z);
            } else if (i <= np * nq) {
                p = (i - 1) / nq;
                q = (i - 1) % nq;
            } else {
                p = rng() % np;
                q = rng() % nq;
            }
            const Vec f = spec.f_state(u.grid.node(k), x, c.p_points[p], c.q_points[q]);
            ch.states.push_back(
                implicit_euler_step(spec.op, u.grid.node(k + 1), u.grid.step(k), x, f, {}, k).state);
            ch.forcings.push_back(f);
        }
        out.push_back(std::move(ch));
    }
    return out;
}

double side_hamiltonian(const GameSpec& spec, Side side, double t, const Vec& x, const Vec& z) {
    const HamiltonianEval h = hamiltonian_state(spec, t, x, z);
    return side == Side::Upper ? h.f_plus : h.f_minus;
}

void check_site(const GameSpec& spec, const Site& site) {
    if (static_cast<std::size_t>(site.x0.size()) != spec.dim() || static_cast<std::size_t>(site.z.size()) != spec.dim()) {
        throw DomainError("minimax", "site state or z has the wrong dimension");
    }
}

}  // namespace

ResidualReport minimax_residual(const ValueTable& u, const GameSpec& spec, const Site& site, Direction direction,
                                const ResidualOptions& options) {
    check_site(spec, site);
    const Window w = window_for(u, site, options.horizon);
    const auto chars = characteristics(u, spec, site, direction, options, w);

    ResidualReport r;
    r.check = "minimax";
    r.site = site;
    r.direction = direction;
    r.side = options.side;
    r.budget = options.budget;
    r.seed = options.seed;
    r.candidates = chars.size();
    r.lhs = u.value(options.side, w.k0, site.x0);
    r.tolerance = options.tolerance(u.lattice.max_spacing(), u.grid.mesh(), options.budget);

    const bool super = direction == Direction::Super;
    double best = super ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < chars.size(); ++i) {
        const auto& ch = chars[i];
        double acc = 0.0;
        double ext = super ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::infinity();
        double ext_t = 0.0;
        for (std::size_t s = 0; s + 1 < ch.states.size(); ++s) {
            const std::size_t k = w.k0 + s;
            const double t = u.grid.node(k);
            acc += u.grid.step(k) *
                   (-ch.forcings[s].dot(site.z) + side_hamiltonian(spec, options.side, t, ch.states[s], site.z));
            const double phi = acc + u.value(options.side, k + 1, ch.states[s + 1]) - r.lhs;
            if (super ? phi > ext : phi < ext) {
                ext = phi;
                ext_t = u.grid.node(k + 1);
            }
        }
        if (super ? ext < best : ext > best) {
            best = ext;
            r.best_candidate = i;
            r.best_candidate_kind = ch.kind;
            r.best_time = ext_t;
        }
    }
    r.slack = best;
    r.rhs = r.lhs + best;
    r.passed = super ? r.slack <= r.tolerance : r.slack >= -r.tolerance;
    r.verdict = r.passed ? "pass" : "fail";
    return r;
}

ResidualReport viscosity_residual(const ValueTable& u, const GameSpec& spec, const Site& site, double c,
                                  Direction direction, const ResidualOptions& options) {
    check_site(spec, site);
    const Window w = window_for(u, site, options.horizon);
    const auto chars = characteristics(u, spec, site, direction, options, w);

    ResidualReport r;
    r.check = "viscosity";
    r.site = site;
    r.direction = direction;
    r.side = options.side;
    r.budget = options.budget;
    r.seed = options.seed;
    r.candidates = chars.size();
    r.c = c;
    r.tolerance = options.tolerance(u.lattice.max_spacing(), u.grid.mesh(), options.budget);
    const double u0 = u.value(options.side, w.k0, site.x0);
    const double f0 = side_hamiltonian(spec, options.side, site.t0, site.x0, site.z);
    r.lhs = u0;

    const bool super = direction == Direction::Super;
    double ext = super ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < chars.size(); ++i) {
        const auto& ch = chars[i];
        double tilde = 0.0;
        for (std::size_t s = 0; s + 1 < ch.states.size(); ++s) {
            const std::size_t k = w.k0 + s;
            const double t1 = u.grid.node(k + 1);
            const Vec& x1 = ch.states[s + 1];
            tilde += u.grid.step(k) * spec.op.apply(t1, x1).dot(site.z);
            const double phi = u0 + (t1 - site.t0) * (c - f0) + (x1 - site.x0).dot(site.z);
            const double psi = phi + tilde - u.value(options.side, k + 1, x1);
            if (super ? psi > ext : psi < ext) {
                ext = psi;
                r.best_candidate = i;
                r.best_candidate_kind = ch.kind;
                r.best_time = t1;
            }
        }
    }
    r.certificate_extremum = ext;
    r.certificate = super ? ext <= 0.0 : ext >= 0.0;
    // With ∂xφ = z the A-terms cancel and ∂tφ + F(t0, x0, z) = c.
    r.slack = c;
    r.rhs = c;
    if (!r.certificate) {
        r.verdict = "vacuous";
        r.passed = false;
    } else {
        r.passed = super ? c <= r.tolerance : c >= -r.tolerance;
        r.verdict = r.passed ? "pass" : "violation";
    }
    return r;
}

std::vector<Site> random_sites(const ValueTable& u, std::size_t count, std::uint64_t seed, double horizon,
                               double z_radius, double fraction) {
    Rng rng(stream_seed(seed, 0x517E));
    const std::size_t dim = u.lattice.dim();
    std::size_t k_max = 0;
    for (std::size_t k = 0; k + 1 < u.grid.size(); ++k) {
        if (u.grid.node(k) + horizon <= u.grid.t_end() + 1e-12) {
            k_max = k;
        }
    }
    std::vector<Site> out;
    for (std::size_t i = 0; i < count; ++i) {
        Site s;
        s.t0 = u.grid.node(rng() % (k_max + 1));
        s.x0 = Vec(static_cast<Eigen::Index>(dim));
        s.z = Vec(static_cast<Eigen::Index>(dim));
        for (std::size_t d = 0; d < dim; ++d) {
            const double mid = 0.5 * (u.lattice.lo()[d] + u.lattice.hi()[d]);
            const double half = 0.5 * fraction * (u.lattice.hi()[d] - u.lattice.lo()[d]);
            s.x0[static_cast<Eigen::Index>(d)] = uniform(rng, mid - half, mid + half);
            s.z[static_cast<Eigen::Index>(d)] = uniform(rng, -z_radius, z_radius);
        }
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace pdhj
