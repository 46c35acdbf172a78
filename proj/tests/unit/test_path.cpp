#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "gen.hpp"
#include "pdhj/error.hpp"
#include "pdhj/path.hpp"
#include "pdhj/path_io.hpp"

using namespace pdhj;

namespace {

constexpr std::uint64_t kSeed = 20240611;

Vec v1(double x) { return Vec::Constant(1, x); }

double brute_sup(const Path& x, double t, std::size_t refine) {
    const TimeGrid fine = x.grid().refined(refine);
    double m = 0.0;
    for (std::size_t k = 0; k < fine.size() && fine.node(k) <= t; ++k) {
        m = std::max(m, x.at(fine.node(k)).norm());
    }
    return std::max(m, x.at(t).norm());
}

}  // namespace

TEST(TimeGrid, UniformNodesAndLookup) {
    const TimeGrid g = TimeGrid::uniform(0.0, 1.0, 4);
    EXPECT_EQ(g.size(), 5u);
    EXPECT_DOUBLE_EQ(g.node(2), 0.5);
    EXPECT_DOUBLE_EQ(g.mesh(), 0.25);
    EXPECT_EQ(g.index_of(0.75).value(), 3u);
    EXPECT_FALSE(g.index_of(0.3).has_value());
    EXPECT_EQ(g.segment(1.0), 3u);
    EXPECT_EQ(g.last_index_at_or_before(0.3), 1u);
}

TEST(TimeGrid, RejectsNonIncreasingNodes) {
    EXPECT_THROW(TimeGrid::from_nodes({0.0, 0.5, 0.5, 1.0}), Error);
    EXPECT_THROW(TimeGrid::from_nodes({0.0}), Error);
}

TEST(StopPath, ConstantIsItsOwnStop) {
    const Path c = Path::constant(TimeGrid::uniform(0.0, 1.0, 8), v1(2.5));
    for (double t : {0.0, 0.3, 0.5, 1.0}) {
        const Path s = stop_path(c, t);
        for (std::size_t k = 0; k < s.grid().size(); ++k) {
            EXPECT_EQ(s.value(k)[0], 2.5);
        }
    }
}

TEST(StopPath, RampStoppedAtHalf) {
    const Path ramp = Path::from_function(TimeGrid::uniform(0.0, 1.0, 10), [](double s) { return v1(s); });
    const Path s = stop_path(ramp, 0.5);
    for (double t : {0.0, 0.2, 0.5, 0.55, 0.8, 1.0}) {
        EXPECT_NEAR(s.at(t)[0], std::min(t, 0.5), 1e-15);
    }
}

TEST(StopPath, OffGridTimeIsInserted) {
    const Path ramp = Path::from_function(TimeGrid::uniform(0.0, 1.0, 4), [](double s) { return v1(s); });
    const Path s = stop_path(ramp, 0.3);
    EXPECT_TRUE(s.grid().index_of(0.3).has_value());
    EXPECT_NEAR(s.at(0.9)[0], 0.3, 1e-15);
}

TEST(StopPath, IdempotentOnRandomPaths) {
    for (std::uint64_t trial = 0; trial < 200; ++trial) {
        Rng rng = testgen::rng_for(kSeed, trial);
        const Path x = testgen::walk(rng, 1 + trial % 3);
        const double t = uniform01(rng);
        const Path once = stop_path(x, t);
        const Path twice = stop_path(once, t);
        ASSERT_EQ(once.grid(), twice.grid()) << "trial " << trial;
        for (std::size_t k = 0; k < once.grid().size(); ++k) {
            ASSERT_EQ(once.value(k), twice.value(k)) << "trial " << trial << " node " << k;
        }
    }
}

TEST(SupNorm, Oracles) {
    const TimeGrid g = TimeGrid::uniform(0.0, 1.0, 16);
    EXPECT_EQ(sup_norm(Path::constant(g, Vec::Zero(3)), 1.0), 0.0);
    const Path down = Path::from_function(g, [](double s) { return v1(1.0 - s); });
    EXPECT_DOUBLE_EQ(sup_norm(down, 1.0), 1.0);
}

TEST(SupNorm, MatchesRefinedSampling) {
    for (std::uint64_t trial = 0; trial < 200; ++trial) {
        Rng rng = testgen::rng_for(kSeed + 1, trial);
        const Path x = testgen::walk(rng, 1 + trial % 4);
        const double t = uniform01(rng);
        const double s = sup_norm(x, t);
        const double brute = brute_sup(x, t, 10);
        // The norm of a linear interpolant is convex in time, so maxima sit at
        // nodes or at t; refined sampling can only undershoot.
        ASSERT_GE(s, brute - 1e-12) << "trial " << trial;
        ASSERT_NEAR(s, brute, 1e-12 * (1.0 + s)) << "trial " << trial;
    }
}

TEST(DInfinity, Oracles) {
    const TimeGrid g = TimeGrid::uniform(0.0, 1.0, 8);
    const Path zero = Path::constant(g, Vec::Zero(2));
    EXPECT_EQ(d_infinity(0.4, zero, 0.4, zero), 0.0);
    EXPECT_DOUBLE_EQ(d_infinity(0.0, zero, 1.0, zero), 1.0);
}

TEST(DInfinity, TriangleInequality) {
    for (std::uint64_t trial = 0; trial < 100; ++trial) {
        Rng rng = testgen::rng_for(kSeed + 2, trial);
        const std::size_t dim = 1 + trial % 3;
        const Path a = testgen::walk(rng, dim);
        const Path b = testgen::walk(rng, dim);
        const Path c = testgen::walk(rng, dim);
        const double ta = uniform01(rng), tb = uniform01(rng), tc = uniform01(rng);
        const double ab = d_infinity(ta, a, tb, b);
        const double bc = d_infinity(tb, b, tc, c);
        const double ac = d_infinity(ta, a, tc, c);
        ASSERT_LE(ac, ab + bc + 1e-12) << "trial " << trial;
        ASSERT_NEAR(ab, d_infinity(tb, b, ta, a), 1e-14) << "trial " << trial;
    }
}

TEST(StateSpace, NormsAndPairing) {
    Rng rng = testgen::rng_for(kSeed + 3, 0);
    for (double p : {2.0, 3.0, 4.0}) {
        const StateSpace s = StateSpace::euclidean(5, p);
        EXPECT_DOUBLE_EQ(s.q_exp(), p / (p - 1.0));
        for (int i = 0; i < 100; ++i) {
            const Vec v = testgen::vec(rng, 5);
            const Vec h = testgen::vec(rng, 5);
            EXPECT_GE(s.v_norm(v), s.h_norm(v) - 1e-12);
            EXPECT_EQ(s.pairing(h, v), h.dot(v));
            EXPECT_LE(std::abs(s.pairing(h, v)), s.dual_norm(h) * s.v_norm(v) + 1e-12);
        }
    }
}

TEST(PathPrefix, RunningSupAndStop) {
    const TimeGrid g = TimeGrid::uniform(0.0, 1.0, 4);
    std::vector<Vec> values{v1(0.0), v1(-3.0), v1(1.0), v1(2.0), v1(0.0)};
    const PathPrefix pre(g, std::span<const Vec>(values.data(), 3));
    EXPECT_EQ(pre.index(), 2u);
    EXPECT_DOUBLE_EQ(pre.time(), 0.5);
    EXPECT_DOUBLE_EQ(pre.running_sup(), 3.0);
    const Path s = pre.stopped();
    EXPECT_EQ(s.value(4)[0], 1.0);
}

TEST(PathIo, CsvRoundTripIsLossless) {
    for (std::uint64_t trial = 0; trial < 50; ++trial) {
        Rng rng = testgen::rng_for(kSeed + 4, trial);
        const Path x = testgen::walk(rng, 1 + trial % 3);
        std::stringstream ss;
        write_path_csv(ss, x);
        const Path y = read_path_csv(ss);
        ASSERT_EQ(x.grid(), y.grid());
        for (std::size_t k = 0; k < x.grid().size(); ++k) {
            ASSERT_EQ(x.value(k), y.value(k));
        }
        const Path z = path_from_json(path_to_json(x));
        for (std::size_t k = 0; k < x.grid().size(); ++k) {
            ASSERT_EQ(x.value(k), z.value(k));
        }
    }
}

TEST(PathIo, RejectsMalformedCsv) {
    std::stringstream ss("t,x_1\n0,1\n0.5\n");
    EXPECT_THROW(read_path_csv(ss), Error);
}
