#include "cli.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "econevo/balancer.hpp"
#include "econevo/economy.hpp"
#include "econevo/experiment.hpp"
#include "econevo/generator.hpp"
#include "econevo/simulation.hpp"

namespace econevo::cli {

namespace {

using nlohmann::json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << content;
}

std::string sibling(const std::string& path, const std::string& suffix) {
  std::filesystem::path p(path);
  return (p.parent_path() / (p.stem().string() + suffix)).string();
}

json timing_value(bool timing, double ms) { return timing ? json(ms) : json(nullptr); }

// ---------------------------------------------------------------------------
// gen
// ---------------------------------------------------------------------------

struct GenOptions {
  std::string config;
  std::string out;
  std::string report;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
  bool timing = false;
};

int cmd_gen(const GenOptions& o, std::ostream& out) {
  GeneratorConfig cfg = load_generator_config(read_file(o.config));
  if (o.seed) cfg.seed = *o.seed;
  const GenerationResult res = generate(cfg);

  json report = {{"valid", res.valid},
                 {"generations", res.generations},
                 {"iterations", res.generations},
                 {"elapsed_ms", timing_value(o.timing, res.elapsed_ms)},
                 {"final_fitness", res.final_fitness},
                 {"components", res.components}};
  write_file(o.report.empty() ? sibling(o.out, ".report.json") : o.report, report.dump(2) + "\n");
  if (!res.valid) {
    if (!o.quiet)
      out << "generation failed after " << res.generations << " generations (best fitness "
          << res.final_fitness << ", " << res.components << " component(s))\n";
    return kDomainFailure;
  }
  save_economy_file(res.graph, o.out);
  if (!o.quiet)
    out << "valid economy with " << res.graph.node_count() << " nodes and "
        << res.graph.edge_count() << " edges after " << res.generations << " generations\n";
  return kSuccess;
}

// ---------------------------------------------------------------------------
// sim
// ---------------------------------------------------------------------------

struct SimOptions {
  std::string economy;
  std::size_t steps = 0;
  std::size_t runs = 1;
  std::uint64_t seed = 0;
  std::string trace;
  bool quiet = false;
};

int cmd_sim(const SimOptions& o, std::ostream& out) {
  if (o.steps < 1) throw UsageError("--steps must be at least 1");
  if (o.runs < 1) throw UsageError("--runs must be at least 1");
  const EconomyGraph graph = load_economy_file(o.economy);
  const CompiledEconomy compiled(graph);
  const RunEnsemble ens = simulate_ensemble(compiled, o.steps, o.runs, o.seed);

  if (!o.trace.empty()) {
    std::ostringstream csv;
    write_trace_csv(csv, ens);
    write_file(o.trace, csv.str());
  }
  if (!o.quiet) {
    out << "node_id,mean,stddev (step " << o.steps << ", " << o.runs << " run(s))\n";
    for (std::size_t idx : compiled.monitored()) {
      const std::string& id = graph.node(idx).id;
      const auto obs = ens.observe(id, o.steps);
      const SampleStats s = sample_stats(obs);
      out << id << ',' << std::setprecision(10) << s.mean << ',' << s.stddev << '\n';
    }
  }
  return kSuccess;
}

// ---------------------------------------------------------------------------
// balance
// ---------------------------------------------------------------------------

struct BalanceOptions {
  std::string economy;
  std::string second;
  std::string objective;
  std::string out;
  std::string out2;
  std::string report;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
  bool timing = false;
};

int cmd_balance(const BalanceOptions& o, std::ostream& out) {
  ObjectiveDocument doc = load_objective(read_file(o.objective));
  if (o.seed) doc.params.seed = *o.seed;
  const bool inter = doc.objective.kind == ObjectiveKind::InterEconomyPair;
  if (!o.second.empty() && !inter)
    throw UsageError("--second is only valid with an inter_pair objective");
  if (o.second.empty() && inter) throw UsageError("inter_pair objective needs --second");

  std::vector<EconomyGraph> graphs{load_economy_file(o.economy)};
  if (inter) graphs.push_back(load_economy_file(o.second));

  const BalanceReport rep = balance(graphs, doc.objective, doc.params);

  json observations = json::array();
  for (const auto& ob : rep.observations)
    observations.push_back({{"pool", ob.economy_pool}, {"mean", ob.stats.mean}, {"stddev", ob.stats.stddev}});
  json report = {{"best_weights", rep.best_weights},
                 {"best_fitness", rep.best_fitness},
                 {"initial_best_fitness", rep.initial_best_fitness},
                 {"generations", rep.generations},
                 {"terminated_by", std::string(to_string(rep.terminated_by))},
                 {"history", rep.history},
                 {"observations", std::move(observations)},
                 {"objective", std::string(to_string(doc.objective.kind))},
                 {"alpha", doc.objective.alpha},
                 {"elapsed_ms", timing_value(o.timing, rep.elapsed_ms)}};
  write_file(o.report.empty() ? sibling(o.out, ".report.json") : o.report, report.dump(2) + "\n");
  save_economy_file(rep.balanced[0], o.out);
  if (inter) save_economy_file(rep.balanced[1], o.out2.empty() ? sibling(o.out, ".second.json") : o.out2);

  if (!o.quiet) {
    out << std::string(to_string(rep.terminated_by)) << " after " << rep.generations
        << " generation(s), best fitness " << std::setprecision(10) << rep.best_fitness << '\n';
    for (const auto& ob : rep.observations)
      out << "  " << ob.economy_pool << ": " << ob.stats.mean << " +/- " << ob.stats.stddev << '\n';
  }
  return rep.balanced_result() ? kSuccess : kDomainFailure;
}

// ---------------------------------------------------------------------------
// bench
// ---------------------------------------------------------------------------

struct BenchOptions {
  std::string spec;
  std::string out;
  std::string csv;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
  bool timing = false;
};

int cmd_bench(const BenchOptions& o, std::ostream& out) {
  BenchmarkSpec spec = load_benchmark_spec(read_file(o.spec));
  if (o.seed) spec.seed = *o.seed;
  const BenchmarkResult res = run_benchmark(spec);
  write_file(o.out, benchmark_json(res, o.timing));
  const std::string table = benchmark_csv(res, o.timing);
  write_file(o.csv.empty() ? sibling(o.out, ".csv") : o.csv, table);
  if (!o.quiet) {
    out << res.cases.size() << " economies (" << res.generation_failures
        << " generation failures)\n"
        << table;
  }
  return kSuccess;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Generate, simulate and balance graph-based game economies", "econevo"};
  app.require_subcommand(1);

  GenOptions gen;
  auto* gen_cmd = app.add_subcommand("gen", "Connect a node multiset into a valid economy");
  gen_cmd->add_option("config", gen.config, "Generator config (JSON)")->required();
  gen_cmd->add_option("--out", gen.out, "Economy file to write")->required();
  gen_cmd->add_option("--report", gen.report, "Run report (default: <out>.report.json)");
  gen_cmd->add_option("--seed", gen.seed, "Override the config seed");
  gen_cmd->add_flag("--quiet", gen.quiet);
  gen_cmd->add_flag("--timing", gen.timing, "Record wall time in the report");

  SimOptions sim;
  auto* sim_cmd = app.add_subcommand("sim", "Simulate an economy");
  sim_cmd->add_option("economy", sim.economy, "Economy file")->required();
  sim_cmd->add_option("--steps", sim.steps, "Number of time steps")->required();
  sim_cmd->add_option("--runs", sim.runs, "Number of seeded runs");
  sim_cmd->add_option("--seed", sim.seed, "Base seed");
  sim_cmd->add_option("--trace,--out", sim.trace, "Trace CSV to write");
  sim_cmd->add_flag("--quiet", sim.quiet);

  BalanceOptions bal;
  auto* bal_cmd = app.add_subcommand("balance", "Balance economy weights toward an objective");
  bal_cmd->add_option("economy", bal.economy, "Economy file")->required();
  bal_cmd->add_option("--second", bal.second, "Second economy (inter_pair objectives)");
  bal_cmd->add_option("--objective", bal.objective, "Objective file (JSON)")->required();
  bal_cmd->add_option("--out", bal.out, "Balanced economy file")->required();
  bal_cmd->add_option("--out2", bal.out2, "Balanced second economy (default: <out>.second.json)");
  bal_cmd->add_option("--report", bal.report, "Report file (default: <out>.report.json)");
  bal_cmd->add_option("--seed", bal.seed, "Override the objective seed");
  bal_cmd->add_flag("--quiet", bal.quiet);
  bal_cmd->add_flag("--timing", bal.timing, "Record wall time in the report");

  BenchOptions bench;
  auto* bench_cmd = app.add_subcommand("bench", "Generate economies and sweep alpha");
  bench_cmd->add_option("spec", bench.spec, "Benchmark spec (JSON)")->required();
  bench_cmd->add_option("--out", bench.out, "Result JSON")->required();
  bench_cmd->add_option("--csv", bench.csv, "Result table (default: <out>.csv)");
  bench_cmd->add_option("--seed", bench.seed, "Override the spec seed");
  bench_cmd->add_flag("--quiet", bench.quiet);
  bench_cmd->add_flag("--timing", bench.timing, "Record wall times");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();  // program name
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }

  try {
    if (*gen_cmd) return cmd_gen(gen, out);
    if (*sim_cmd) return cmd_sim(sim, out);
    if (*bal_cmd) return cmd_balance(bal, out);
    if (*bench_cmd) return cmd_bench(bench, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kDomainFailure;
  }
  return kUsage;
}

}  // namespace econevo::cli
