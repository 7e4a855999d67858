// Serial reference against the OpenMP kernels: the target-grid optimizer and the
// Monte Carlo simulator on Rayleigh links with the five-mode set.

#include "coarq/designer.hpp"
#include "coarq/modes.hpp"
#include "coarq/scenario.hpp"
#include "coarq/simulator.hpp"

#include <benchmark/benchmark.h>

#include <string>

namespace {

using namespace coarq;

const ModeSet& modes()
{
    static const ModeSet ms =
        build_mode_set(load_mode_set_file(std::string(COARQ_DATA_DIR) + "/modes/hiperlan2_5mode.json"));
    return ms;
}

CoopProblem problem(double p_bar_db, int grid)
{
    const double p = db_to_linear(p_bar_db);
    return CoopProblem{modes(), SnrDistribution::exponential(p), SnrDistribution::exponential(10.0 * p), 10.0 * p,
                       1e-3, grid};
}

void optimize(benchmark::State& state, Execution exec)
{
    const auto pb = problem(15.0, static_cast<int>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(optimize_coop(pb, exec));
    }
}

void simulate(benchmark::State& state, Execution exec)
{
    const auto pb = problem(15.0, 100);
    const auto d = optimize_coop(pb);
    const RelayLinkModel model{*d.sd_design, *d.rd_design, pb.sr_snr, 1};
    SimConfig cfg;
    cfg.frames = static_cast<std::uint64_t>(state.range(0));
    cfg.exec = exec;
    for (auto _ : state) {
        benchmark::DoNotOptimize(run(model, cfg));
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * state.range(0));
}

}  // namespace

BENCHMARK_CAPTURE(optimize, serial, Execution::serial)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(optimize, parallel, Execution::parallel)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(simulate, serial, Execution::serial)->Arg(1 << 20)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(simulate, parallel, Execution::parallel)->Arg(1 << 20)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
