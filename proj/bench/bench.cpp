// Parallel kernels against their serial references.

#include <benchmark/benchmark.h>

#include "btsa/enumerate.hpp"
#include "btsa/fixtures.hpp"
#include "btsa/lp.hpp"
#include "btsa/psom.hpp"

using namespace btsa;

namespace {

const BuiltModel& network_year() {
  static const BuiltModel m = [] {
    const auto sc = synth_case(1, 8736, SynthProfile::three_bus);
    return build_full(validate_or_throw(sc.spec, sc.series), ModelVariant::ed_network);
  }();
  return m;
}

const ValidatedCase& regime() {
  static const ValidatedCase c = [] {
    const auto sc = regime_case();
    return validate_or_throw(sc.spec, sc.series);
  }();
  return c;
}

void BM_solve_blocks_parallel(benchmark::State& st) {
  const auto& m = network_year();
  for (auto _ : st) benchmark::DoNotOptimize(solve(m.lp).objective);
}

void BM_solve_blocks_serial(benchmark::State& st) {
  const auto& m = network_year();
  for (auto _ : st) benchmark::DoNotOptimize(solve_serial(m.lp).objective);
}

void BM_census_parallel(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(zero_error_census(regime()).n_zero_error);
}

void BM_census_serial(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(zero_error_census_serial(regime()).n_zero_error);
}

}  // namespace

BENCHMARK(BM_solve_blocks_parallel)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_solve_blocks_serial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_census_parallel)->Unit(benchmark::kMillisecond)->UseRealTime()->Iterations(3);
BENCHMARK(BM_census_serial)->Unit(benchmark::kMillisecond)->UseRealTime()->Iterations(3);

BENCHMARK_MAIN();
