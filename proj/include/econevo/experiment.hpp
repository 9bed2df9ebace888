#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "econevo/balancer.hpp"
#include "econevo/economy.hpp"

namespace econevo {

/// Sweep over generated economies: each economy gets one random pool,
/// target and simulation length, then is balanced once per alpha.
struct BenchmarkSpec {
  std::size_t graph_count = 30;
  int nodes_lo = 5;
  int nodes_hi = 20;
  int target_lo = 20;
  int target_hi = 100;
  std::size_t sim_lo = 10;
  std::size_t sim_hi = 30;
  std::vector<double> alphas{0.05, 0.01, 0.0};
  std::size_t population = 20;
  std::size_t max_generations = 200;
  std::size_t runs = 10;
  int generator_population = 10;
  int generator_max_steps = 50000;
  std::size_t attempts_per_graph = 10;  // generation attempts allowed per requested graph
  std::uint64_t seed = 1;

  void check() const;
};

BenchmarkSpec load_benchmark_spec(std::string_view json_text);

struct RunSummary {
  double alpha = 0.0;
  bool balanced = false;
  bool improved = false;
  bool initially_balanced = false;
  bool elitism_ok = true;
  std::size_t generations = 0;
  double initial_best_fitness = 0.0;
  double best_fitness = 0.0;
  double elapsed_ms = 0.0;
};

struct BenchmarkCase {
  std::size_t graph_id = 0;
  std::size_t node_count = 0;
  std::string pool;
  double target = 0.0;
  std::size_t sim_length = 0;
  std::size_t generator_generations = 0;
  std::vector<RunSummary> runs;  // one per alpha, in spec order
};

struct AlphaRow {
  double alpha = 0.0;
  double balanced_pct = 0.0;
  double improved_pct = 0.0;
  double initial_balanced_pct = 0.0;
  double median_generations = 0.0;
  double median_time_s = 0.0;
};

struct BenchmarkResult {
  std::vector<AlphaRow> rows;  // empty when no economy was balanced
  std::vector<BenchmarkCase> cases;
  std::size_t generation_attempts = 0;
  std::size_t generation_failures = 0;
  std::size_t elitism_violations = 0;
};

BenchmarkResult run_benchmark(const BenchmarkSpec& spec, Execution exec = Execution::Parallel);

/// Table with one row per metric and one column per alpha. Wall-time cells
/// are left empty unless `timing` is set so output stays reproducible.
std::string benchmark_csv(const BenchmarkResult& result, bool timing);
std::string benchmark_json(const BenchmarkResult& result, bool timing);

double median(std::vector<double> values);

}  // namespace econevo
