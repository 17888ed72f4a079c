// Serial reference against the OpenMP batch kernel, on Peterson's program.

#include "lodin/parser.hpp"
#include "lodin/props.hpp"
#include "lodin/simulation.hpp"

#include <benchmark/benchmark.h>
#include <omp.h>

#include <fstream>
#include <sstream>

namespace {

using namespace lodin;

const ExplicitEngine& peterson() {
  static const ExplicitEngine e = [] {
    std::ifstream in(std::string(LODIN_CORPUS_DIR) + "/peterson.ll");
    std::stringstream ss;
    ss << in.rdbuf();
    auto m = ir::parse_module(ss.str());
    m.set_entry_points({"petersons1", "petersons2"});
    return ExplicitEngine(m);
  }();
  return e;
}

const props::Prop& race() {
  static const auto p = props::parse_prop("DataRace");
  return *p;
}

void BM_BatchSerial(benchmark::State& st) {
  const auto& e = peterson();
  const auto runs = static_cast<std::uint64_t>(st.range(0));
  std::uint64_t first = 0;
  for (auto _ : st) {
    benchmark::DoNotOptimize(simulate_batch_serial(e, race(), 5000, 42, first, runs));
    first += runs;
  }
  st.SetItemsProcessed(static_cast<std::int64_t>(st.iterations() * runs));
}

void BM_BatchParallel(benchmark::State& st) {
  const auto& e = peterson();
  const auto runs = static_cast<std::uint64_t>(st.range(0));
  std::uint64_t first = 0;
  for (auto _ : st) {
    benchmark::DoNotOptimize(simulate_batch(e, race(), 5000, 42, first, runs));
    first += runs;
  }
  st.SetItemsProcessed(static_cast<std::int64_t>(st.iterations() * runs));
  st.counters["threads"] = omp_get_max_threads();
}

} // namespace

BENCHMARK(BM_BatchSerial)->Arg(64)->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BatchParallel)->Arg(64)->Arg(1024)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
