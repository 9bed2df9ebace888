#include "econevo/experiment.hpp"

#include <algorithm>
#include <iomanip>
#include <optional>
#include <sstream>

#include <json.hpp>

#include "econevo/generator.hpp"

namespace econevo {

namespace {

using nlohmann::json;

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  std::uint64_t x = a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t kGenerateTag = 1;
constexpr std::uint64_t kCaseTag = 2;
constexpr std::uint64_t kBalanceTag = 3;

struct Attempt {
  bool valid = false;
  std::size_t generations = 0;
  EconomyGraph graph;
};

Attempt generate_attempt(const BenchmarkSpec& spec, std::size_t attempt) {
  Rng rng(mix(mix(spec.seed, kGenerateTag), attempt));
  const int total = std::uniform_int_distribution<int>(spec.nodes_lo, spec.nodes_hi)(rng);
  GeneratorConfig cfg;
  cfg.node_counts = sample_node_counts(total, rng);
  cfg.population_size = spec.generator_population;
  cfg.max_steps = spec.generator_max_steps;
  cfg.seed = rng();
  auto res = generate(cfg);
  return {res.valid, res.generations, std::move(res.graph)};
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

}  // namespace

void BenchmarkSpec::check() const {
  auto fail = [](const std::string& m) { throw EconomyError(ErrorCode::InvalidArgument, m); };
  if (nodes_lo < 2 || nodes_lo > nodes_hi) fail("node range must satisfy 2 <= lo <= hi");
  if (target_lo < 1 || target_lo > target_hi) fail("target range must satisfy 1 <= lo <= hi");
  if (sim_lo < 1 || sim_lo > sim_hi) fail("sim_length range must satisfy 1 <= lo <= hi");
  if (alphas.empty()) fail("alpha list must be nonempty");
  for (double a : alphas)
    if (!(a >= 0.0)) fail("alphas must be nonnegative");
  if (population < 2) fail("balancer population must be at least 2");
  if (runs < 1) fail("runs must be at least 1");
  if (generator_population < 1 || generator_max_steps < 1) fail("generator settings must be positive");
}

BenchmarkSpec load_benchmark_spec(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw EconomyError(ErrorCode::Schema, std::string("benchmark spec is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw EconomyError(ErrorCode::Schema, "benchmark spec must be an object");
  BenchmarkSpec s;
  try {
    auto range = [&](const char* key, auto& lo, auto& hi) {
      if (!doc.contains(key)) return;
      const json& r = doc[key];
      if (!r.is_array() || r.size() != 2)
        throw EconomyError(ErrorCode::Schema, std::string("'") + key + "' must be [lo, hi]");
      lo = r[0].get<std::decay_t<decltype(lo)>>();
      hi = r[1].get<std::decay_t<decltype(hi)>>();
    };
    auto scalar = [&](const char* key, auto& field) {
      if (doc.contains(key)) field = doc[key].get<std::decay_t<decltype(field)>>();
    };
    scalar("graph_count", s.graph_count);
    range("nodes", s.nodes_lo, s.nodes_hi);
    range("target", s.target_lo, s.target_hi);
    range("sim_length", s.sim_lo, s.sim_hi);
    scalar("alphas", s.alphas);
    scalar("population", s.population);
    scalar("max_generations", s.max_generations);
    scalar("runs", s.runs);
    scalar("generator_population", s.generator_population);
    scalar("generator_max_steps", s.generator_max_steps);
    scalar("attempts_per_graph", s.attempts_per_graph);
    scalar("seed", s.seed);
  } catch (const json::exception& e) {
    throw EconomyError(ErrorCode::Schema, std::string("benchmark spec: ") + e.what());
  }
  s.check();
  return s;
}

double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

BenchmarkResult run_benchmark(const BenchmarkSpec& spec, Execution exec) {
  spec.check();
  BenchmarkResult result;

  // Generation: attempts run in batches; the first graph_count successes in
  // attempt order are kept, so the outcome does not depend on scheduling.
  std::vector<EconomyGraph> graphs;
  std::vector<std::size_t> gen_steps;
  const std::size_t max_attempts = spec.graph_count * spec.attempts_per_graph;
  std::size_t next = 0;
  while (graphs.size() < spec.graph_count && next < max_attempts) {
    const std::size_t batch = std::min(spec.graph_count - graphs.size(), max_attempts - next);
    std::vector<Attempt> attempts(batch);
    const auto count = static_cast<std::ptrdiff_t>(batch);
    if (exec == Execution::Parallel) {
#pragma omp parallel for schedule(dynamic)
      for (std::ptrdiff_t i = 0; i < count; ++i)
        attempts[static_cast<std::size_t>(i)] = generate_attempt(spec, next + static_cast<std::size_t>(i));
    } else {
      for (std::ptrdiff_t i = 0; i < count; ++i)
        attempts[static_cast<std::size_t>(i)] = generate_attempt(spec, next + static_cast<std::size_t>(i));
    }
    next += batch;
    for (auto& a : attempts) {
      if (!a.valid) {
        ++result.generation_failures;
        continue;
      }
      if (graphs.size() < spec.graph_count) {
        graphs.push_back(std::move(a.graph));
        gen_steps.push_back(a.generations);
      }
    }
  }
  result.generation_attempts = next;

  // One pool, target and length per graph, shared by every alpha.
  result.cases.resize(graphs.size());
  for (std::size_t g = 0; g < graphs.size(); ++g) {
    BenchmarkCase& c = result.cases[g];
    Rng rng(mix(mix(spec.seed, kCaseTag), g));
    std::vector<std::string> pools;
    for (const Node& n : graphs[g].nodes())
      if (is_observable(n.kind)) pools.push_back(n.id);
    c.graph_id = g;
    c.node_count = graphs[g].node_count();
    c.pool = pools[std::uniform_int_distribution<std::size_t>(0, pools.size() - 1)(rng)];
    c.target = std::uniform_int_distribution<int>(spec.target_lo, spec.target_hi)(rng);
    c.sim_length = std::uniform_int_distribution<std::size_t>(spec.sim_lo, spec.sim_hi)(rng);
    c.generator_generations = gen_steps[g];
    c.runs.resize(spec.alphas.size());
  }

  const std::size_t jobs = graphs.size() * spec.alphas.size();
  const auto job_count = static_cast<std::ptrdiff_t>(jobs);
  auto run_job = [&](std::ptrdiff_t j) {
    const std::size_t g = static_cast<std::size_t>(j) / spec.alphas.size();
    const std::size_t a = static_cast<std::size_t>(j) % spec.alphas.size();
    const BenchmarkCase& c = result.cases[g];
    BalanceObjective obj;
    obj.kind = ObjectiveKind::AbsoluteValue;
    obj.pool = c.pool;
    obj.target_value = c.target;
    obj.sim_length = c.sim_length;
    obj.observe_step = c.sim_length;
    obj.runs = spec.runs;
    obj.alpha = spec.alphas[a];
    BalanceParams params;
    params.population_size = spec.population;
    params.max_generations = spec.max_generations;
    params.seed = mix(mix(spec.seed, kBalanceTag), g);  // same seed for every alpha
    params.exec = Execution::Serial;
    const BalanceReport rep = balance({graphs[g]}, obj, params);

    RunSummary& s = result.cases[g].runs[a];
    s.alpha = obj.alpha;
    s.balanced = rep.balanced_result();
    s.improved = rep.improved();
    s.initially_balanced = rep.initially_balanced();
    s.elitism_ok = history_nondecreasing(rep.history);
    s.generations = rep.generations;
    s.initial_best_fitness = rep.initial_best_fitness;
    s.best_fitness = rep.best_fitness;
    s.elapsed_ms = rep.elapsed_ms;
  };
  if (exec == Execution::Parallel) {
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t j = 0; j < job_count; ++j) run_job(j);
  } else {
    for (std::ptrdiff_t j = 0; j < job_count; ++j) run_job(j);
  }

  if (result.cases.empty()) return result;
  const double n = static_cast<double>(result.cases.size());
  for (std::size_t a = 0; a < spec.alphas.size(); ++a) {
    AlphaRow row;
    row.alpha = spec.alphas[a];
    std::vector<double> gens, times;
    double bal = 0, imp = 0, init = 0;
    for (const auto& c : result.cases) {
      const RunSummary& s = c.runs[a];
      bal += s.balanced;
      imp += s.improved;
      init += s.initially_balanced;
      if (!s.elitism_ok) ++result.elitism_violations;
      gens.push_back(static_cast<double>(s.generations));
      times.push_back(s.elapsed_ms / 1000.0);
    }
    row.balanced_pct = 100.0 * bal / n;
    row.improved_pct = 100.0 * imp / n;
    row.initial_balanced_pct = 100.0 * init / n;
    row.median_generations = median(gens);
    row.median_time_s = median(times);
    result.rows.push_back(row);
  }
  return result;
}

std::string benchmark_csv(const BenchmarkResult& result, bool timing) {
  std::ostringstream os;
  os << "metric";
  for (const auto& r : result.rows) os << ",alpha=" << fmt(r.alpha);
  os << '\n';
  if (result.rows.empty()) return os.str();
  auto line = [&](const char* label, auto getter, bool show = true) {
    os << label;
    for (const auto& r : result.rows) {
      os << ',';
      if (show) os << fmt(getter(r));
    }
    os << '\n';
  };
  line("Balanced (%)", [](const AlphaRow& r) { return r.balanced_pct; });
  line("Improved (%)", [](const AlphaRow& r) { return r.improved_pct; });
  line("Initial balanced (%)", [](const AlphaRow& r) { return r.initial_balanced_pct; });
  line("Median generations", [](const AlphaRow& r) { return r.median_generations; });
  line("Median execution time (s)", [](const AlphaRow& r) { return r.median_time_s; }, timing);
  return os.str();
}

std::string benchmark_json(const BenchmarkResult& result, bool timing) {
  json doc;
  json rows = json::array();
  for (const auto& r : result.rows) {
    rows.push_back({{"alpha", r.alpha},
                    {"balanced_pct", r.balanced_pct},
                    {"improved_pct", r.improved_pct},
                    {"initial_balanced_pct", r.initial_balanced_pct},
                    {"median_generations", r.median_generations},
                    {"median_time_s", timing ? json(r.median_time_s) : json(nullptr)}});
  }
  json cases = json::array();
  for (const auto& c : result.cases) {
    json runs = json::array();
    for (const auto& s : c.runs) {
      runs.push_back({{"alpha", s.alpha},
                      {"balanced", s.balanced},
                      {"improved", s.improved},
                      {"initial_balanced", s.initially_balanced},
                      {"elitism_ok", s.elitism_ok},
                      {"generations", s.generations},
                      {"initial_best_fitness", s.initial_best_fitness},
                      {"best_fitness", s.best_fitness},
                      {"elapsed_ms", timing ? json(s.elapsed_ms) : json(nullptr)}});
    }
    cases.push_back({{"graph_id", c.graph_id},
                     {"nodes", c.node_count},
                     {"pool", c.pool},
                     {"target", c.target},
                     {"sim_length", c.sim_length},
                     {"generator_generations", c.generator_generations},
                     {"runs", std::move(runs)}});
  }
  doc["rows"] = std::move(rows);
  doc["cases"] = std::move(cases);
  doc["generation_attempts"] = result.generation_attempts;
  doc["generation_failures"] = result.generation_failures;
  doc["elitism_violations"] = result.elitism_violations;
  return doc.dump(2) + "\n";
}

}  // namespace econevo
