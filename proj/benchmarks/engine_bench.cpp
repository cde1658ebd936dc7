#include <benchmark/benchmark.h>

#include "rtsim/engine.hpp"
#include "rtsim/metrics.hpp"
#include "rtsim/oracle.hpp"
#include "rtsim/workload.hpp"

namespace {

using namespace rtsim;

// Ten hyperperiods (1 s) of the 3 x 5 application.
void BM_Table1(benchmark::State& state) {
  Table1Params p;
  p.protocol = kAllProtocols[state.range(0)];
  p.overheads = {5376, 5514, 2000, 7000, 0};
  const auto s = build_table1_scenario(p);
  std::size_t events = 0;
  for (auto _ : state) {
    auto t = run(s, kNsPerS);
    events = t.events.size();
    benchmark::DoNotOptimize(t);
  }
  state.SetLabel(std::string(to_string(p.protocol)));
  state.counters["events"] = static_cast<double>(events);
  state.counters["events/s"] =
      benchmark::Counter(static_cast<double>(events * state.iterations()), benchmark::Counter::kIsRate);
}
BENCHMARK(BM_Table1)->DenseRange(0, 4)->Unit(benchmark::kMillisecond);

void BM_Table1Summarize(benchmark::State& state) {
  Table1Params p;
  p.protocol = kAllProtocols[state.range(0)];
  const auto s = build_table1_scenario(p);
  const auto t = run(s, kNsPerS);
  for (auto _ : state) benchmark::DoNotOptimize(summarize(t, s));
  state.SetLabel(std::string(to_string(p.protocol)));
}
BENCHMARK(BM_Table1Summarize)->DenseRange(0, 4)->Unit(benchmark::kMillisecond);

// The step oracle on the reduced slice at 100 ns per unit, guard horizon.
void BM_OracleSlice(benchmark::State& state) {
  Table1Params p;
  p.protocol = kAllProtocols[state.range(0)];
  p.unit_ns = 100;
  const auto s = build_table1_slice(p);
  const TimeNs horizon = OracleGuard{}.max_horizon;
  for (auto _ : state) benchmark::DoNotOptimize(step_oracle(s, horizon));
  state.SetLabel(std::string(to_string(p.protocol)));
}
BENCHMARK(BM_OracleSlice)->DenseRange(0, 4)->Unit(benchmark::kMillisecond);

void BM_EngineSlice(benchmark::State& state) {
  Table1Params p;
  p.protocol = kAllProtocols[state.range(0)];
  p.unit_ns = 100;
  const auto s = build_table1_slice(p);
  const TimeNs horizon = OracleGuard{}.max_horizon;
  for (auto _ : state) benchmark::DoNotOptimize(run(s, horizon));
  state.SetLabel(std::string(to_string(p.protocol)));
}
BENCHMARK(BM_EngineSlice)->DenseRange(0, 4)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
