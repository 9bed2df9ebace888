// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

#include <unistd.h>

#include "cli.hpp"
#include "econevo/balancer.hpp"
#include "econevo/experiment.hpp"
#include "econevo/generator.hpp"
#include "econevo/simulation.hpp"
#include "oracle.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;
using namespace econevo;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fixed(double v, int digits = 1) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(digits);
  s << v;
  return s.str();
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

EconomyGraph torch_with_coal_cost(int x) {
  EconomyGraph g = testing_support::fixture("minecraft_torch.json");
  for (std::size_t e = 0; e < g.edge_count(); ++e)
    if (g.edges()[e].from == "coal" && g.edges()[e].to == "torch_converter") g.set_weight(e, x);
  return g;
}

std::string read_config(const std::string& name) {
  return slurp(fs::path(ECONEVO_CONFIG_DIR) / name);
}

// 1 ---------------------------------------------------------------------------
Outcome generator_validity() {
  Rng rng(2024);
  int valid = 0, infeasible = 0;
  for (int i = 0; i < 50; ++i) {
    GeneratorConfig cfg;
    const int total = std::uniform_int_distribution<int>(5, 20)(rng);
    cfg.node_counts = sample_node_counts(total, rng);
    cfg.seed = rng();
    cfg.max_steps = 50000;
    const auto res = generate(cfg);
    if (res.valid && is_valid(res.graph)) {
      ++valid;
      continue;
    }
    auto count = [&](NodeKind k) { return cfg.node_counts.count(k) ? cfg.node_counts.at(k) : 0; };
    infeasible += !oracle::capacity_feasible(count(NodeKind::Source), count(NodeKind::RandomGate),
                                             count(NodeKind::Pool) + count(NodeKind::FixedPool),
                                             count(NodeKind::Converter), count(NodeKind::Drain));
  }
  const int failed = 50 - valid;
  return {valid >= 45, std::to_string(valid) + "/50 valid within 50k iterations (need 45); of " +
                           std::to_string(failed) + " failures " + std::to_string(infeasible) +
                           " are node sets with no valid wiring"};
}

// 2 ---------------------------------------------------------------------------
Outcome oracle_equivalence() {
  std::mt19937_64 rng(77);
  int agree = 0, zero = 0;
  for (int i = 0; i < 1000; ++i) {
    auto g = i % 2 ? testing_support::random_graph(rng, 8) : testing_support::guided_graph(rng, 8);
    const int expected = oracle::violations(testing_support::kind_names(g), testing_support::index_edges(g));
    const int got = graph_fitness(g);
    agree += (got == 0) == (expected == 0) && got == expected;
    zero += expected == 0;
  }
  return {agree == 1000, std::to_string(agree) + "/1000 agree, " + std::to_string(zero) + " with zero violations"};
}

// 3 ---------------------------------------------------------------------------
Outcome minecraft_traces() {
  const auto one = simulate(torch_with_coal_cost(1), 40, 0);
  const auto two = simulate(torch_with_coal_cost(2), 40, 0);
  int mismatches = 0;
  for (std::size_t t = 0; t <= 40; ++t) {
    const auto ti = static_cast<std::int64_t>(t);
    mismatches += one.at(t, "torches") != (t < 2 ? 0 : 4 * (ti - 1));
    mismatches += two.at(t, "torches") != 4 * (ti / 2);
  }
  return {mismatches == 0, "X=1 torches(16)=" + std::to_string(one.at(16, "torches")) + ", X=2 torches(16)=" +
                               std::to_string(two.at(16, "torches")) + ", " + std::to_string(mismatches) +
                               " mismatches over t=0..40"};
}

// 4 ---------------------------------------------------------------------------
Outcome gate_statistics() {
  const auto start = std::chrono::steady_clock::now();
  const auto trace = simulate(testing_support::gate_split(0.7, 0.3), 10000, 99);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const double a = double(trace.at(10000, "a")), b = double(trace.at(10000, "b"));
  const double sigma = std::sqrt(10000 * 0.7 * 0.3);
  const bool ok = std::abs(a - 7000) <= 3 * sigma && std::abs(b - 3000) <= 3 * sigma && a + b == 10000 && secs < 1.0;
  return {ok, "routed (" + fixed(a, 0) + ", " + fixed(b, 0) + "), 3 sigma = " + fixed(3 * sigma) + ", " +
                  fixed(secs, 3) + " s"};
}

// 5 ---------------------------------------------------------------------------
Outcome fitness_suite() {
  constexpr double tol = 1e-12;
  int failed = 0, total = 0;
  auto check = [&](bool ok) {
    ++total;
    failed += !ok;
  };
  check(prop(50, 100) == 0.5);
  check(prop(100, 100) == 1.0);
  check(prop(0, 7) == 0.0);
  check(prop(0, 0) == 1.0);
  try {
    prop(-1, 2);
    check(false);
  } catch (const EconomyError&) {
    check(true);
  }
  const std::vector<double> spread{90, 110}, exact{100, 100, 100}, zeros{0, 0, 0};
  check(std::abs(fitness_f1(spread, 100, 0.05) - (0.05 + (0.9 + 100.0 / 110.0) / 2)) <= tol);
  check(std::abs(fitness_f1(exact, 100, 0.01) - 1.01) <= tol);
  check(fitness_f1(zeros, 5, 0.0) == 0.0);

  const auto det = simulate_ensemble(testing_support::chain(), 10, 4, 0);
  const auto det2 = simulate_ensemble(testing_support::chain(), 10, 4, 50);
  check(std::abs(fitness_f2(det, det2, "d", "d", 10, 0.05) - 1.05) <= tol);
  const std::vector<double> mage(10, 55.0), archer{48, 50, 52, 53, 54, 55, 56, 57, 58, 55};
  double mean_prop = 0;
  for (double x : archer) mean_prop += std::min(x, 55.0) / std::max(x, 55.0) / 10;
  const double f = fitness_paired(mage, archer, 0.05);
  check(std::abs(f - 0.05 - mean_prop) <= tol && std::abs(f - 1.0) < 0.01);
  const std::vector<double> dead(10, 0.0), alive(10, 3.0);
  check(fitness_paired(dead, alive, 0.05) == 0.05);

  check(apply_crossover_op(CrossoverOp::Sum, 3, 2, GeneKind::Amount) == 5);
  check(apply_crossover_op(CrossoverOp::Difference, 4, 4, GeneKind::Amount) == 1);
  check(apply_mutation(2, 3, false, GeneKind::Amount) == 1);
  check(apply_mutation(2, 1, true, GeneKind::Amount) == 3);
  return {failed == 0, std::to_string(total - failed) + "/" + std::to_string(total) + " examples"};
}

// 6 and 8 ---------------------------------------------------------------------
BenchmarkResult g_bench;
double g_bench_seconds = 0;

Outcome alpha_ordering() {
  const auto spec = load_benchmark_spec(read_config("bench_desk.json"));
  const auto start = std::chrono::steady_clock::now();
  g_bench = run_benchmark(spec);
  g_bench_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (g_bench.rows.size() != 3 || g_bench.cases.size() != 30)
    return {false, "only " + std::to_string(g_bench.cases.size()) + " economies generated"};
  const double b05 = g_bench.rows[0].balanced_pct, b01 = g_bench.rows[1].balanced_pct,
               b00 = g_bench.rows[2].balanced_pct;
  return {b05 >= b01 && b01 >= b00 && b05 >= 75.0,
          "balanced % = " + fixed(b05) + " / " + fixed(b01) + " / " + fixed(b00) + " for alpha 0.05 / 0.01 / 0; " +
              fixed(g_bench_seconds) + " s"};
}

// 7 ---------------------------------------------------------------------------
std::vector<double> g_case_history;

Outcome case_study() {
  const ObjectiveDocument doc = load_objective(read_config("case_study.json"));
  const auto rep = balance({testing_support::fixture("mage.json"), testing_support::fixture("archer.json")},
                           doc.objective, doc.params);
  g_case_history = rep.history;
  const auto mage = simulate_ensemble(rep.balanced[0], 30, 100, 424242);
  const auto archer = simulate_ensemble(rep.balanced[1], 30, 100, 737373);
  const auto a = sample_stats(mage.observe("damage", 30)), b = sample_stats(archer.observe("damage", 30));
  const double gap = std::abs(a.mean - b.mean) / std::max(a.mean, b.mean);
  const bool ok = rep.best_fitness >= 1.0 && rep.generations <= 100 && gap <= 0.10;
  return {ok, "fitness " + fixed(rep.best_fitness, 4) + " after " + std::to_string(rep.generations) +
                  " generation(s); damage means " + fixed(a.mean, 2) + " vs " + fixed(b.mean, 2) + " (gap " +
                  fixed(100 * gap) + "%)"};
}

Outcome elitism() {
  std::size_t runs = 0, bad = 0;
  for (const auto& c : g_bench.cases)
    for (const auto& r : c.runs) {
      ++runs;
      bad += !r.elitism_ok;
    }
  bad += !history_nondecreasing(g_case_history);
  ++runs;
  const bool ok = bad == 0 && g_bench.elitism_violations == 0 && runs > 1;
  return {ok, std::to_string(runs) + " balance runs checked, " + std::to_string(bad) + " decreasing histories"};
}

// 9 ---------------------------------------------------------------------------
Outcome cli_determinism() {
  const fs::path root = fs::temp_directory_path() / ("econevo_accept_" + std::to_string(::getpid()));
  const std::string fx = ECONEVO_FIXTURE_DIR, cf = ECONEVO_CONFIG_DIR;
  fs::create_directories(root);
  {
    std::ofstream(root / "bench.json") << R"({"graph_count": 4, "nodes": [5, 10], "population": 8,
        "max_generations": 20, "runs": 4, "seed": 5})";
  }
  auto session = [&](const std::string& tag) {
    const fs::path d = root / tag;
    fs::create_directories(d);
    const std::vector<std::vector<std::string>> commands = {
        {"gen", cf + "/gen_small.json", "--out", (d / "gen.json").string()},
        {"sim", fx + "/archer.json", "--steps", "30", "--runs", "5", "--seed", "3", "--trace",
         (d / "trace.csv").string()},
        {"balance", fx + "/minecraft_torch.json", "--objective", cf + "/torch_absolute.json", "--out",
         (d / "torch.json").string()},
        {"balance", fx + "/mage.json", "--second", fx + "/archer.json", "--objective", cf + "/case_study.json",
         "--out", (d / "mage.json").string(), "--out2", (d / "archer.json").string()},
        {"bench", (root / "bench.json").string(), "--out", (d / "bench.json").string()},
    };
    std::string log;
    for (auto args : commands) {
      args.insert(args.begin(), "econevo");
      std::ostringstream out, err;
      log += std::to_string(cli::run(args, out, err)) + ":" + out.str();
    }
    return log;
  };
  const std::string log_a = session("a"), log_b = session("b");
  int files = 0, differ = 0;
  for (const auto& entry : fs::directory_iterator(root / "a")) {
    ++files;
    differ += slurp(entry.path()) != slurp(root / "b" / entry.path().filename());
  }
  fs::remove_all(root);
  const bool ok = files >= 9 && differ == 0 && log_a == log_b;
  return {ok, std::to_string(files) + " output files across gen/sim/balance/bench, " + std::to_string(differ) +
                  " differ; stdout " + (log_a == log_b ? "identical" : "differs")};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"generator validity", generator_validity},
      {"generator oracle equivalence", oracle_equivalence},
      {"deterministic simulation oracle", minecraft_traces},
      {"gate statistics", gate_statistics},
      {"prop/fitness examples", fitness_suite},
      {"alpha ordering on the desk benchmark", alpha_ordering},
      {"case study balance", case_study},
      {"elitism", elitism},
      {"CLI determinism", cli_determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failures += !o.pass;
    std::cout << "criterion " << i + 1 << " [" << (o.pass ? "PASS" : "FAIL") << "] " << criteria[i].first
              << ": " << o.detail << std::endl;
  }
  std::cout << (failures ? std::to_string(failures) + " criterion/criteria failed" : "all criteria passed")
            << std::endl;
  return failures ? 1 : 0;
}
