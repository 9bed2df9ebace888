#include <benchmark/benchmark.h>

#include <string>

#include "econevo/balancer.hpp"
#include "econevo/experiment.hpp"
#include "econevo/simulation.hpp"

using namespace econevo;

namespace {

EconomyGraph fixture(const char* name) {
  return load_economy_file(std::string(ECONEVO_FIXTURE_DIR) + "/" + name);
}

Execution mode(const benchmark::State& state) {
  return state.range(0) ? Execution::Parallel : Execution::Serial;
}

void BM_Ensemble(benchmark::State& state) {
  const CompiledEconomy archer(fixture("archer.json"));
  const auto runs = static_cast<std::size_t>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(simulate_ensemble(archer, 30, runs, 1, mode(state)));
  state.SetItemsProcessed(state.iterations() * state.range(1));
}
BENCHMARK(BM_Ensemble)->ArgNames({"parallel", "runs"})->ArgsProduct({{0, 1}, {16, 256}});

void BM_CaseStudyBalance(benchmark::State& state) {
  const std::vector<EconomyGraph> graphs{fixture("mage.json"), fixture("archer.json")};
  BalanceObjective obj;
  obj.kind = ObjectiveKind::InterEconomyPair;
  obj.pool = obj.pool2 = "damage";
  obj.observe_step = obj.sim_length = 30;
  obj.runs = 10;
  obj.alpha = 0.0;  // never terminates early, so every iteration does the same work
  BalanceParams params;
  params.population_size = 20;
  params.max_generations = 10;
  params.seed = 1;
  params.exec = mode(state);
  for (auto _ : state) benchmark::DoNotOptimize(balance(graphs, obj, params));
}
BENCHMARK(BM_CaseStudyBalance)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_DeskSweep(benchmark::State& state) {
  BenchmarkSpec spec;
  spec.graph_count = 6;
  spec.max_generations = 20;
  spec.population = 10;
  for (auto _ : state) benchmark::DoNotOptimize(run_benchmark(spec, mode(state)));
}
BENCHMARK(BM_DeskSweep)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
