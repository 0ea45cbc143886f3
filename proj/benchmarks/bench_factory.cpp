#include <benchmark/benchmark.h>
static void BM_placeholder(benchmark::State& st) { for (auto _ : st) benchmark::DoNotOptimize(1); }
BENCHMARK(BM_placeholder);
BENCHMARK_MAIN();
