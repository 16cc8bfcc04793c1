#include <benchmark/benchmark.h>

#include "recurlab/transfer_operator.h"

namespace recurlab {
namespace {

void BM_BuildUlamDoubling(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(BuildUlam(SystemSpec::Doubling(), state.range(0)).gap);
}
BENCHMARK(BM_BuildUlamDoubling)->RangeMultiplier(4)->Range(256, 16384)->Unit(benchmark::kMillisecond);

void BM_BuildUlamGoldenBeta(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(BuildUlam(SystemSpec::GoldenBeta(), state.range(0)).gap);
}
BENCHMARK(BM_BuildUlamGoldenBeta)->RangeMultiplier(4)->Range(256, 4096)->Unit(benchmark::kMillisecond);

void BM_CorrelationFit(benchmark::State& state) {
  const SystemSpec beta = SystemSpec::GoldenBeta();
  const UlamOperator op = BuildUlam(beta, state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(FitCorrelationDecay(op, beta).tau);
}
BENCHMARK(BM_CorrelationFit)->Arg(1024)->Arg(4096)->Unit(benchmark::kMillisecond);

void BM_MeasureSeries(benchmark::State& state) {
  const SystemSpec beta = SystemSpec::GoldenBeta();
  const UlamOperator op = BuildUlam(beta, 4096);
  const RadiusSequence seq(PowerLaw{1, 2});
  for (auto _ : state) benchmark::DoNotOptimize(MeasureSeries(op, beta, seq, state.range(0)).raabe);
}
BENCHMARK(BM_MeasureSeries)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace recurlab

BENCHMARK_MAIN();
