#include <gtest/gtest.h>

#include <cmath>

#include "pdhj/error.hpp"
#include "pdhj/minimax.hpp"
#include "pdhj/random.hpp"
#include "pdhj/stability.hpp"

using namespace pdhj;

namespace {

struct Desk {
    GameSpec spec = make_game(desk_isaacs_game());
    TimeGrid grid = TimeGrid::uniform(0.0, 1.0, 32);
    StateLattice lattice = StateLattice::uniform(1, -2.0, 2.0, 65);
    ValueTable table = dp_value(spec, grid, lattice);
};

const Desk& desk() {
    static const Desk d;
    return d;
}

}  // namespace

TEST(Minimax, ConstantGameHasZeroSlack) {
    const GameSpec spec = make_game(constant_game(0.6));
    const ValueTable t = dp_value(spec, TimeGrid::uniform(0.0, 1.0, 16), StateLattice::uniform(1, -1.0, 1.0, 17));
    for (double t0 : {0.0, 0.25, 0.5}) {
        const Site s{t0, Vec::Zero(1), Vec::Zero(1)};
        for (Direction d : {Direction::Super, Direction::Sub}) {
            const ResidualReport r = minimax_residual(t, spec, s, d);
            EXPECT_NEAR(r.slack, 0.0, 1e-12);
            EXPECT_TRUE(r.passed);
            EXPECT_EQ(r.verdict, "pass");
        }
    }
}

TEST(Viscosity, ConstantGameCanonicalPairIsExact) {
    const GameSpec spec = make_game(constant_game(0.6));
    const ValueTable t = dp_value(spec, TimeGrid::uniform(0.0, 1.0, 16), StateLattice::uniform(1, -1.0, 1.0, 17));
    const Site s{0.25, Vec::Zero(1), Vec::Zero(1)};
    for (Direction d : {Direction::Super, Direction::Sub}) {
        const ResidualReport r = viscosity_residual(t, spec, s, 0.0, d);
        EXPECT_NEAR(r.slack, 0.0, 1e-12);
        EXPECT_NE(r.verdict, "violation");
    }
}

TEST(Minimax, DeskGamePassesAtRandomSites) {
    const Desk& d = desk();
    ResidualOptions opt;
    const auto sites = random_sites(d.table, 20, 11, opt.horizon);
    for (std::size_t i = 0; i < sites.size(); ++i) {
        opt.seed = stream_seed(11, i);
        EXPECT_TRUE(minimax_residual(d.table, d.spec, sites[i], Direction::Super, opt).passed) << "site " << i;
        EXPECT_TRUE(minimax_residual(d.table, d.spec, sites[i], Direction::Sub, opt).passed) << "site " << i;
        for (Direction dir : {Direction::Super, Direction::Sub}) {
            EXPECT_NE(viscosity_residual(d.table, d.spec, sites[i], 0.0, dir, opt).verdict, "violation");
        }
    }
}

TEST(Minimax, BumpedTableFailsAtTheBump) {
    const Desk& d = desk();
    ValueTable bumped = d.table;
    bumped.v_plus[8][40] += 1.0;
    const Site s{d.grid.node(8), d.lattice.point(40), Vec::Zero(1)};
    const bool sup = minimax_residual(bumped, d.spec, s, Direction::Super).passed;
    const bool sub = minimax_residual(bumped, d.spec, s, Direction::Sub).passed;
    EXPECT_FALSE(sup && sub);
}

TEST(Viscosity, LargeTestSlopeIsVacuous) {
    const Desk& d = desk();
    const Site s{d.grid.node(4), d.lattice.point(32), Vec::Constant(1, 0.5)};
    const ResidualReport r = viscosity_residual(d.table, d.spec, s, 50.0, Direction::Super);
    EXPECT_EQ(r.verdict, "vacuous");
    EXPECT_FALSE(r.passed);
}

TEST(Minimax, RandomSitesRespectTheirRanges) {
    const Desk& d = desk();
    const auto sites = random_sites(d.table, 200, 5, 0.25, 1.5);
    for (const auto& s : sites) {
        ASSERT_TRUE(d.grid.index_of(s.t0).has_value());
        ASSERT_LT(s.t0, 1.0 - 0.25 + 1e-12);
        ASSERT_LE(std::abs(s.x0[0]), 0.8 * 2.0 + 1e-12);
        ASSERT_LE(std::abs(s.z[0]), 1.5);
    }
}

TEST(Minimax, ToleranceModel) {
    const ToleranceModel m{1.0, 2.0, 0.5};
    EXPECT_DOUBLE_EQ(m(0.1, 0.05, 25), 0.1 + 0.1 + 0.1);
}

TEST(Stability, TerminalShiftIsExact) {
    const Desk& d = desk();
    const TimeGrid g = TimeGrid::uniform(0.0, 1.0, 8);
    const StateLattice l = StateLattice::uniform(1, -2.0, 2.0, 17);
    const StabilityReport r =
        stability_experiment(d.spec, PerturbationFamily::TerminalShift, {2, 4, 8, 16}, g, l);
    ASSERT_EQ(r.distances.size(), 4u);
    for (std::size_t i = 0; i < 4; ++i) {
        EXPECT_NEAR(r.distances[i], 1.0 / static_cast<double>(r.n_list[i]), 1e-12);
    }
    EXPECT_EQ(r.identity_distance, 0.0);
    EXPECT_TRUE(r.passed);
}

TEST(Stability, DriftDistancesDecrease) {
    const Desk& d = desk();
    const StabilityReport r = stability_experiment(d.spec, PerturbationFamily::Drift, {2, 4, 8, 16},
                                                   TimeGrid::uniform(0.0, 1.0, 8), StateLattice::uniform(1, -2.0, 2.0, 17));
    EXPECT_TRUE(r.strictly_decreasing);
    EXPECT_TRUE(r.passed);
}

TEST(Stability, ZeroMagnitudeIsTheSameGame) {
    const Desk& d = desk();
    const GameSpec same = perturb_game(d.spec, PerturbationFamily::Drift, 0.0);
    const TimeGrid g = TimeGrid::uniform(0.0, 1.0, 4);
    const StateLattice l = StateLattice::uniform(1, -2.0, 2.0, 9);
    EXPECT_EQ(table_distance(dp_value(same, g, l), dp_value(d.spec, g, l)), 0.0);
}
