// Serial reference vs OpenMP kernels.
//
//   bench_kernels --benchmark_counters_tabular=true
//
// OpenMP rates use wall time. Thread counts above the core count only
// measure scheduling overhead.

#include <benchmark/benchmark.h>

#include <random>

#include "phasor_sentinel/correlation.hpp"
#include "phasor_sentinel/detection.hpp"
#include "phasor_sentinel/fleet.hpp"
#include "phasor_sentinel/parallel.hpp"
#include "phasor_sentinel/svm.hpp"

using namespace phasor_sentinel;

namespace {

const ChannelTable& minute_table() {
  static const ChannelTable table = ChannelTable::from_dataset(generate_minute(default_fleet_config(), 1));
  return table;
}

struct TrainedModel {
  SvmModel model;
  FeatureMatrix probe;
};

const TrainedModel& trained() {
  static const TrainedModel t = [] {
    const auto cfg = default_fleet_config();
    const auto s = apply_spoof(generate_minute(cfg, 1), suite_spec(suite_entry("S1"), 1, cfg.pmu_count, cfg.seed));
    ExampleOptions opt;
    opt.stride = 10;
    const auto train = build_examples(s, opt);
    TrainedModel out{train_svm(train.x, train.y), {}};
    opt.stride = 1;
    opt.timing = TimingRule::Early;
    out.probe = build_examples(s, opt).x;
    return out;
  }();
  return t;
}

void BM_CorrelateSerial(benchmark::State& state) {
  const auto& table = minute_table();
  const int w = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(correlate_fleet_serial(table, w, kAllParameters));
  state.counters["cycles/s"] =
      benchmark::Counter(static_cast<double>(table.cycles()) * state.iterations(), benchmark::Counter::kIsRate);
}

void BM_CorrelateOmp(benchmark::State& state) {
  const auto& table = minute_table();
  const int w = static_cast<int>(state.range(0));
  const int jobs = static_cast<int>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(correlate_fleet(table, w, kAllParameters, jobs));
  state.counters["cycles/s"] =
      benchmark::Counter(static_cast<double>(table.cycles()) * state.iterations(), benchmark::Counter::kIsRate);
}

void BM_CorrelateBatchReference(benchmark::State& state) {
  const auto& table = minute_table();
  for (auto _ : state) benchmark::DoNotOptimize(correlate_fleet_batch(table, 300, kAllParameters));
  state.counters["cycles/s"] =
      benchmark::Counter(static_cast<double>(table.cycles()) * state.iterations(), benchmark::Counter::kIsRate);
}

void BM_DecideSerial(benchmark::State& state) {
  const auto& t = trained();
  for (auto _ : state) benchmark::DoNotOptimize(decide_batch_serial(t.model, t.probe));
  state.counters["rows/s"] =
      benchmark::Counter(static_cast<double>(t.probe.rows()) * state.iterations(), benchmark::Counter::kIsRate);
  state.counters["SVs"] = static_cast<double>(t.model.coef.size());
}

void BM_DecideOmp(benchmark::State& state) {
  const auto& t = trained();
  const int jobs = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(decide_batch(t.model, t.probe, jobs));
  state.counters["rows/s"] =
      benchmark::Counter(static_cast<double>(t.probe.rows()) * state.iterations(), benchmark::Counter::kIsRate);
}

}  // namespace

BENCHMARK(BM_CorrelateSerial)->Arg(60)->Arg(300)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CorrelateOmp)->Args({60, 1})->Args({300, 1})->Args({300, 2})->Args({300, 4})->UseRealTime()->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CorrelateBatchReference)->Unit(benchmark::kMillisecond)->Iterations(1);
BENCHMARK(BM_DecideSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DecideOmp)->Arg(1)->Arg(2)->Arg(4)->UseRealTime()->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
