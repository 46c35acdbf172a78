#include <benchmark/benchmark.h>

#include <cmath>

#include "pdhj/evolution.hpp"
#include "pdhj/game.hpp"
#include "pdhj/upsilon.hpp"
#include "pdhj/value.hpp"

namespace {

using namespace pdhj;

void BM_DpValueDesk(benchmark::State& state) {
    const GameSpec spec = make_game(desk_isaacs_game());
    const auto points = static_cast<std::size_t>(state.range(0));
    const TimeGrid grid = TimeGrid::uniform(0.0, spec.horizon, 32);
    const StateLattice lattice = StateLattice::uniform(1, -2.0, 2.0, points);
    for (auto _ : state) {
        benchmark::DoNotOptimize(dp_value(spec, grid, lattice));
    }
    state.SetItemsProcessed(state.iterations() * static_cast<long>(points * 32));
}
BENCHMARK(BM_DpValueDesk)->Arg(33)->Arg(65)->Arg(129)->Unit(benchmark::kMillisecond);

void BM_UpsilonEval(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const TimeGrid grid = TimeGrid::uniform(0.0, 1.0, n);
    const Path x = Path::from_function(grid, [](double t) {
        Vec v(2);
        v << std::sin(3.0 * t), std::cos(2.0 * t) - 0.5;
        return v;
    });
    for (auto _ : state) {
        benchmark::DoNotOptimize(upsilon(0.7, x));
    }
}
BENCHMARK(BM_UpsilonEval)->Arg(64)->Arg(1024)->Arg(16384);

void BM_ImplicitStepPLaplacian(benchmark::State& state) {
    const auto nodes = static_cast<std::size_t>(state.range(0));
    const OperatorSpec op = build_p_laplacian(nodes, 3.0);
    const Vec x = Vec::LinSpaced(static_cast<Eigen::Index>(nodes), -1.0, 1.0);
    const Vec f = Vec::Ones(static_cast<Eigen::Index>(nodes));
    for (auto _ : state) {
        benchmark::DoNotOptimize(implicit_euler_step(op, 0.01, 0.01, x, f));
    }
}
BENCHMARK(BM_ImplicitStepPLaplacian)->Arg(8)->Arg(32)->Arg(128);

}  // namespace
BENCHMARK_MAIN();
