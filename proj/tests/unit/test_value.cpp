#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "gen.hpp"
#include "pdhj/error.hpp"
#include "pdhj/value.hpp"

using namespace pdhj;

namespace {

constexpr std::uint64_t kSeed = 1234;

Vec v1(double x) { return Vec::Constant(1, x); }

}  // namespace

TEST(Lattice, InterpolationIsExactOnAffineFunctions) {
    const StateLattice l({-1.0, 0.0}, {1.0, 2.0}, {5, 9});
    std::vector<double> vals(l.size());
    for (std::size_t i = 0; i < l.size(); ++i) {
        const Vec p = l.point(i);
        vals[i] = 0.5 + 2.0 * p[0] - 3.0 * p[1];
    }
    Rng rng = testgen::rng_for(kSeed, 0);
    for (int trial = 0; trial < 100; ++trial) {
        Vec x(2);
        x << uniform(rng, -1.0, 1.0), uniform(rng, 0.0, 2.0);
        EXPECT_NEAR(l.interpolate(vals, x), 0.5 + 2.0 * x[0] - 3.0 * x[1], 1e-12);
    }
}

TEST(Lattice, OutsideTheBoxRaisesWithMargin) {
    const StateLattice l = StateLattice::uniform(1, -1.0, 1.0, 5);
    std::vector<double> vals(l.size(), 0.0);
    try {
        l.interpolate(vals, v1(1.5));
        FAIL() << "expected LatticeError";
    } catch (const LatticeError& e) {
        EXPECT_NEAR(e.margin(), 0.5, 1e-12);
    }
}

TEST(DpValue, ZeroGameIsZero) {
    const GameSpec spec = make_game(constant_game(0.0));
    const ValueTable t = dp_value(spec, TimeGrid::uniform(0.0, 1.0, 8), StateLattice::uniform(1, -1.0, 1.0, 9));
    for (const auto& side : {t.v_minus, t.v_plus}) {
        for (const auto& slice : side) {
            for (double v : slice) {
                EXPECT_EQ(v, 0.0);
            }
        }
    }
}

TEST(DpValue, ConstantRunningCostAccumulates) {
    const GameSpec spec = make_game(constant_game(0.75));
    const TimeGrid g = TimeGrid::uniform(0.0, 1.0, 8);
    const ValueTable t = dp_value(spec, g, StateLattice::uniform(1, -1.0, 1.0, 9));
    for (std::size_t k = 0; k < g.size(); ++k) {
        EXPECT_NEAR(t.v_plus[k][4], 0.75 * (1.0 - g.node(k)), 1e-14);
        EXPECT_NEAR(t.v_minus[k][0], 0.75 * (1.0 - g.node(k)), 1e-14);
    }
}

TEST(DpValue, ProductGameOrderedWithStrictGap) {
    const GameSpec spec = make_game(non_isaacs_game());
    const ValueTable t = dp_value(spec, TimeGrid::uniform(0.0, 1.0, 16), StateLattice::uniform(1, -2.0, 2.0, 33));
    double gap = 0.0;
    for (std::size_t k = 0; k < t.grid.size(); ++k) {
        for (std::size_t i = 0; i < t.lattice.size(); ++i) {
            ASSERT_LE(t.v_minus[k][i], t.v_plus[k][i] + 1e-12);
            gap = std::max(gap, t.v_plus[k][i] - t.v_minus[k][i]);
        }
    }
    EXPECT_GT(gap, 1e-3);
}

TEST(DpValue, SingleStepMatchesEnumeration) {
    const GameSpec spec = make_game(desk_isaacs_game());
    const TimeGrid g = TimeGrid::uniform(0.0, 1.0, 1);
    const StateLattice l = StateLattice::uniform(1, -3.0, 3.0, 61);
    const ValueTable t = dp_value(spec, g, l);
    const auto& P = spec.controls.p_points;
    const auto& Q = spec.controls.q_points;
    for (std::size_t i = 10; i < 51; i += 5) {
        const Vec x = l.point(i);
        double upper = std::numeric_limits<double>::infinity();
        double lower = -std::numeric_limits<double>::infinity();
        Eigen::MatrixXd m(static_cast<Eigen::Index>(P.size()), static_cast<Eigen::Index>(Q.size()));
        for (std::size_t p = 0; p < P.size(); ++p) {
            for (std::size_t q = 0; q < Q.size(); ++q) {
                const Vec y = dp_successor(spec, g, 0, x, P[p], Q[q]);
                m(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q)) =
                    g.step(0) * spec.ell_state(0.0, x, P[p], Q[q]) + l.interpolate(t.v_plus[1], y);
            }
        }
        for (Eigen::Index p = 0; p < m.rows(); ++p) {
            upper = std::min(upper, m.row(p).maxCoeff());
        }
        for (Eigen::Index q = 0; q < m.cols(); ++q) {
            lower = std::max(lower, m.col(q).minCoeff());
        }
        EXPECT_DOUBLE_EQ(t.v_plus[0][i], upper) << "point " << i;
        EXPECT_DOUBLE_EQ(t.v_minus[0][i], lower) << "point " << i;
    }
}

TEST(DpValue, BackupReproducesTableBitwise) {
    const GameSpec spec = make_game(non_isaacs_game());
    const TimeGrid g = TimeGrid::uniform(0.0, 1.0, 8);
    const StateLattice l = StateLattice::uniform(1, -2.0, 2.0, 21);
    const ValueTable t = dp_value(spec, g, l);
    for (std::size_t k = 0; k + 1 < g.size(); ++k) {
        EXPECT_EQ(dp_backup(spec, g, l, k, t.v_plus[k + 1], Side::Upper), t.v_plus[k]);
        EXPECT_EQ(dp_backup(spec, g, l, k, t.v_minus[k + 1], Side::Lower), t.v_minus[k]);
    }
}

TEST(DpValue, TerminalSliceIsH) {
    const GameSpec spec = make_game(desk_isaacs_game());
    const StateLattice l = StateLattice::uniform(1, -2.0, 2.0, 17);
    const ValueTable t = dp_value(spec, TimeGrid::uniform(0.0, 1.0, 4), l);
    for (std::size_t i = 0; i < l.size(); ++i) {
        EXPECT_EQ(t.v_plus.back()[i], std::abs(l.point(i)[0]));
        EXPECT_EQ(t.v_minus.back()[i], std::abs(l.point(i)[0]));
    }
}

TEST(DpValue, IndependentOfJobs) {
    const GameSpec spec = make_game(desk_isaacs_game());
    const TimeGrid g = TimeGrid::uniform(0.0, 1.0, 8);
    const StateLattice l = StateLattice::uniform(1, -2.0, 2.0, 33);
    const ValueTable a = dp_value(spec, g, l, 1);
    const ValueTable b = dp_value(spec, g, l, 4);
    EXPECT_EQ(a.v_plus, b.v_plus);
    EXPECT_EQ(a.v_minus, b.v_minus);
}

TEST(DpValue, ValueAtInterpolatesInTime) {
    const GameSpec spec = make_game(constant_game(1.0));
    const ValueTable t = dp_value(spec, TimeGrid::uniform(0.0, 1.0, 4), StateLattice::uniform(1, -1.0, 1.0, 5));
    EXPECT_NEAR(t.value_at(Side::Upper, 0.1, v1(0.3)), 0.9, 1e-14);
}
