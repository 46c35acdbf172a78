#pragma once

// Hand-rolled generators for the property tests. Every generator draws from
// an explicit Rng so failures replay from the printed seed.

#include <cmath>
#include <cstdint>
#include <vector>

#include "pdhj/path.hpp"
#include "pdhj/random.hpp"

namespace pdhj::testgen {

inline Rng rng_for(std::uint64_t seed, std::uint64_t trial) { return Rng(stream_seed(seed, trial)); }

inline Vec vec(Rng& rng, std::size_t dim, double scale = 1.0) {
    Vec v(static_cast<Eigen::Index>(dim));
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        v[i] = uniform(rng, -scale, scale);
    }
    return v;
}

inline std::size_t index(Rng& rng, std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

// Non-uniform grid on [0, T] with n steps.
inline TimeGrid grid(Rng& rng, std::size_t n, double T = 1.0) {
    std::vector<double> w(n);
    double total = 0.0;
    for (auto& x : w) {
        x = 0.2 + uniform01(rng);
        total += x;
    }
    std::vector<double> nodes{0.0};
    for (std::size_t i = 0; i + 1 < n; ++i) {
        nodes.push_back(nodes.back() + T * w[i] / total);
    }
    nodes.push_back(T);
    return TimeGrid::from_nodes(nodes);
}

// Random walk path, occasionally with flat stretches.
inline Path walk(Rng& rng, const TimeGrid& g, std::size_t dim, double scale = 1.0) {
    std::vector<Vec> v{vec(rng, dim, scale)};
    for (std::size_t k = 1; k < g.size(); ++k) {
        const bool flat = uniform01(rng) < 0.1;
        v.push_back(flat ? v.back() : Vec(v.back() + vec(rng, dim, scale * std::sqrt(g.step(k - 1)) * 2.0)));
    }
    return Path(g, v);
}

inline Path walk(Rng& rng, std::size_t dim, std::size_t n_lo = 4, std::size_t n_hi = 40) {
    const TimeGrid g = uniform01(rng) < 0.5 ? TimeGrid::uniform(0.0, 1.0, index(rng, n_lo, n_hi))
                                            : grid(rng, index(rng, n_lo, n_hi));
    return walk(rng, g, dim);
}

}  // namespace pdhj::testgen
