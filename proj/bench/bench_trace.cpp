// Parallel vs serial sequence tracing on a slowly converging Weibull sequence.
#include <benchmark/benchmark.h>

#include "momdiag/diagnosis.hpp"
#include "momdiag/moments.hpp"

using namespace momdiag;

namespace {

const MomentProvider& provider() {
  static const MomentProvider g = weibull_moments(ExactRational::parse("0.45"));
  return g;
}

void BM_TraceParallel(benchmark::State& state) {
  const unsigned n_max = static_cast<unsigned>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(trace_sequences(provider(), n_max, PrecisionContext{}));
}

void BM_TraceSerial(benchmark::State& state) {
  const unsigned n_max = static_cast<unsigned>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(trace_sequences_serial(provider(), n_max, PrecisionContext{}));
}

}  // namespace

BENCHMARK(BM_TraceParallel)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_TraceSerial)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
