#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "pdhj/path.hpp"

namespace pdhj {

// Identifier recorded in reports that draw random numbers.
inline constexpr const char* kRngAlgorithm = "mt19937_64/splitmix64-streams";

// SplitMix64 finalizer; used to derive independent stream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Seed of stream `index` derived from a base seed.
constexpr std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index) {
    return splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

using Rng = std::mt19937_64;

inline double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

inline double uniform(Rng& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Vec gaussian_vec(Rng& rng, Eigen::Index dim) {
    std::normal_distribution<double> n(0.0, 1.0);
    Vec v(dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
        v[i] = n(rng);
    }
    return v;
}

// Uniform sample from the closed ball of the given radius.
inline Vec uniform_in_ball(Rng& rng, Eigen::Index dim, double radius) {
    if (radius <= 0.0) {
        return Vec::Zero(dim);
    }
    Vec dir = gaussian_vec(rng, dim);
    double n = dir.norm();
    while (n == 0.0) {
        dir = gaussian_vec(rng, dim);
        n = dir.norm();
    }
    const double r = radius * std::pow(uniform01(rng), 1.0 / static_cast<double>(dim));
    return dir * (r / n);
}

}  // namespace pdhj
