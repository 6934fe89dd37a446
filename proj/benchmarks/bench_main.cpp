#include <benchmark/benchmark.h>

#include "fairbench/inprocess.hpp"
#include "fairbench/metrics.hpp"
#include "fairbench/multistage.hpp"
#include "fairbench/postprocess.hpp"
#include "fairbench/preprocess.hpp"
#include "fairbench/simulation.hpp"

using namespace fairbench;

namespace {

Dataset sim_data(int n) {
    SimConfig cfg;
    cfg.n = n;
    cfg.seed = 7;
    return generate_simulation(cfg, 0);
}

void BM_GenerateSimulation(benchmark::State& state) {
    SimConfig cfg;
    cfg.n = static_cast<int>(state.range(0));
    cfg.seed = 7;
    int r = 0;
    for (auto _ : state) {
        auto data = generate_simulation(cfg, r++ % 8);
        benchmark::DoNotOptimize(data);
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_GenerateSimulation)->Arg(1000)->Arg(5000)->Arg(20000);

void BM_DeviationMetrics(benchmark::State& state) {
    const auto data = sim_data(static_cast<int>(state.range(0)));
    const auto model = train_logistic(data);
    for (auto _ : state) {
        benchmark::DoNotOptimize(ind_metric(data, model, "a1"));
        benchmark::DoNotOptimize(sp_metric(data, model, "a1"));
        benchmark::DoNotOptimize(sf_metric(data, model, "a1"));
    }
}
BENCHMARK(BM_DeviationMetrics)->Arg(5000)->Arg(20000);

void BM_TrainLogistic(benchmark::State& state) {
    const auto data = sim_data(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(train_logistic(data));
    }
}
BENCHMARK(BM_TrainLogistic)->Arg(1000)->Arg(5000);

void BM_TrainMetaFair(benchmark::State& state) {
    const auto data = sim_data(static_cast<int>(state.range(0)));
    MetaFairParams params;
    for (auto _ : state) {
        benchmark::DoNotOptimize(train_metafair(data, "a1", params));
    }
}
BENCHMARK(BM_TrainMetaFair)->Arg(1000)->Arg(5000);

void BM_SelectThreshold(benchmark::State& state) {
    const auto data = sim_data(static_cast<int>(state.range(0)));
    const auto model = train_logistic(data);
    const auto scores = model.score_all(data);
    for (auto _ : state) {
        benchmark::DoNotOptimize(select_threshold(scores, data, "a1"));
    }
}
BENCHMARK(BM_SelectThreshold)->Arg(5000)->Arg(20000);

void BM_DiRemove(benchmark::State& state) {
    const auto data = sim_data(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(di_remove(data, "a1"));
    }
}
BENCHMARK(BM_DiRemove)->Arg(5000)->Arg(20000);

void BM_RunPipeline(benchmark::State& state) {
    const auto data = sim_data(5000);
    const auto parts = split(data, 0.6, 0.2, 0.2, 3);
    PipelineSpec spec;
    spec.pre = ReweighSpec{};
    spec.in = PiRegSpec{};
    spec.seed = 1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(run_pipeline(spec, parts.train, parts.val, parts.test));
    }
}
BENCHMARK(BM_RunPipeline);

}  // namespace

int main(int argc, char** argv) {
    benchmark::Initialize(&argc, argv);
    if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
    benchmark::RunSpecifiedBenchmarks();
    benchmark::Shutdown();
    return 0;
}
