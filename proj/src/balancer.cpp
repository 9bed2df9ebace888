#include "econevo/balancer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <numeric>

#include <json.hpp>

namespace econevo {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t generation, std::uint64_t index) {
  return splitmix64(splitmix64(splitmix64(seed) ^ generation) ^ index);
}

constexpr std::uint64_t kFinalStatsTag = 0xf1a1f1a1f1a1f1a1ULL;
constexpr std::uint64_t kSecondEconomyTag = 0x5ec0d5ec0d5ec0d5ULL;

void require(bool ok, const std::string& message) {
  if (!ok) throw EconomyError(ErrorCode::InvalidArgument, message);
}

void require_observable(const EconomyGraph& graph, const std::string& pool, const char* role) {
  const auto idx = graph.index_of(pool);
  require(idx.has_value(), std::string(role) + " '" + pool + "' does not exist");
  require(is_observable(graph.node(*idx).kind),
          std::string(role) + " '" + pool + "' is not a pool, fixed pool or drain");
}

}  // namespace

// ---------------------------------------------------------------------------
// Fitness
// ---------------------------------------------------------------------------

double prop(double observed, double reference) {
  require(observed >= 0.0 && reference >= 0.0, "prop needs nonnegative amounts");
  if (reference > observed) return observed / reference;
  if (observed > 0.0) return reference / observed;
  return 1.0;  // both zero
}

double fitness_f1(std::span<const double> observed, double target, double alpha) {
  require(!observed.empty(), "fitness needs at least one observation");
  double sum = 0.0;
  for (double s : observed) sum += prop(s, target);
  return alpha + sum / static_cast<double>(observed.size());
}

double fitness_paired(std::span<const double> a, std::span<const double> b, double alpha) {
  require(!a.empty(), "fitness needs at least one observation");
  require(a.size() == b.size(), "paired fitness needs the same number of runs on both sides");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += prop(a[i], b[i]);
  return alpha + sum / static_cast<double>(a.size());
}

double fitness_f1(const RunEnsemble& ensemble, std::string_view pool, std::size_t t, double target,
                  double alpha) {
  require(t <= ensemble.steps(), "observation step beyond simulation length");
  const auto obs = ensemble.observe(pool, t);
  return fitness_f1(obs, target, alpha);
}

double fitness_f2(const RunEnsemble& ensemble_a, const RunEnsemble& ensemble_b,
                  std::string_view pool_a, std::string_view pool_b, std::size_t t, double alpha) {
  require(ensemble_a.runs() == ensemble_b.runs(), "ensembles differ in run count");
  require(t <= ensemble_a.steps() && t <= ensemble_b.steps(),
          "observation step beyond simulation length");
  const auto a = ensemble_a.observe(pool_a, t);
  const auto b = ensemble_b.observe(pool_b, t);
  return fitness_paired(a, b, alpha);
}

double fitness_intra(const RunEnsemble& ensemble, std::string_view pool_a, std::string_view pool_b,
                     std::size_t t, double alpha) {
  return fitness_f2(ensemble, ensemble, pool_a, pool_b, t, alpha);
}

bool is_balanced(double fitness) {
  // Slack absorbs rounding in alpha + mean (e.g. 0.01 + 0.99).
  return fitness >= 1.0 - 1e-12;
}

// ---------------------------------------------------------------------------
// Objective
// ---------------------------------------------------------------------------

std::string_view to_string(ObjectiveKind kind) {
  switch (kind) {
    case ObjectiveKind::AbsoluteValue: return "absolute";
    case ObjectiveKind::IntraEconomyPair: return "intra_pair";
    case ObjectiveKind::InterEconomyPair: return "inter_pair";
  }
  return "absolute";
}

std::string_view to_string(Termination t) {
  return t == Termination::FitnessReached ? "fitness_reached" : "timeout";
}

void BalanceObjective::check(std::span<const EconomyGraph> graphs) const {
  require(graphs.size() == economies(),
          std::string(to_string(kind)) + " objective needs " + std::to_string(economies()) +
              " economy graph(s), got " + std::to_string(graphs.size()));
  require(sim_length >= 1, "sim_length must be at least 1");
  require(observe_step >= 1 && observe_step <= sim_length, "step must lie in [1, sim_length]");
  require(runs >= 1, "runs must be at least 1");
  require(std::isfinite(alpha) && alpha >= 0.0, "alpha must be a nonnegative number");
  for (const auto& g : graphs)
    if (!is_valid(g)) throw EconomyError(ErrorCode::InvalidGraph, "cannot balance an invalid economy");

  require_observable(graphs[0], pool, "pool");
  switch (kind) {
    case ObjectiveKind::AbsoluteValue:
      require(std::isfinite(target_value) && target_value > 0.0, "value must be positive");
      require(pool2.empty(), "absolute objective takes no second pool");
      break;
    case ObjectiveKind::IntraEconomyPair:
      require_observable(graphs[0], pool2, "pool2");
      break;
    case ObjectiveKind::InterEconomyPair:
      require_observable(graphs[1], pool2, "pool2");
      break;
  }
}

ObjectiveDocument load_objective(std::string_view json_text) {
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw EconomyError(ErrorCode::Schema, std::string("objective is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw EconomyError(ErrorCode::Schema, "objective must be a JSON object");

  auto need = [&](const char* key) -> const json& {
    if (!doc.contains(key)) throw EconomyError(ErrorCode::Schema, std::string("objective needs '") + key + "'");
    return doc[key];
  };
  auto as_count = [&](const char* key) -> std::size_t {
    const json& v = need(key);
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0)
      throw EconomyError(ErrorCode::Schema, std::string("'") + key + "' must be a nonnegative integer");
    return v.get<std::size_t>();
  };

  ObjectiveDocument out;
  BalanceObjective& o = out.objective;
  const json& kind = need("kind");
  if (!kind.is_string()) throw EconomyError(ErrorCode::Schema, "'kind' must be a string");
  const auto k = kind.get<std::string>();
  if (k == "absolute") o.kind = ObjectiveKind::AbsoluteValue;
  else if (k == "intra_pair") o.kind = ObjectiveKind::IntraEconomyPair;
  else if (k == "inter_pair") o.kind = ObjectiveKind::InterEconomyPair;
  else throw EconomyError(ErrorCode::Schema, "unknown objective kind '" + k + "'");

  const json& pool = need("pool");
  if (!pool.is_string()) throw EconomyError(ErrorCode::Schema, "'pool' must be a string");
  o.pool = pool.get<std::string>();
  if (doc.contains("pool2")) {
    if (!doc["pool2"].is_string()) throw EconomyError(ErrorCode::Schema, "'pool2' must be a string");
    o.pool2 = doc["pool2"].get<std::string>();
  }
  if (o.kind != ObjectiveKind::AbsoluteValue && o.pool2.empty())
    throw EconomyError(ErrorCode::Schema, "pair objectives need 'pool2'");
  if (o.kind == ObjectiveKind::AbsoluteValue) {
    const json& v = need("value");
    if (!v.is_number()) throw EconomyError(ErrorCode::Schema, "'value' must be a number");
    o.target_value = v.get<double>();
  }
  o.observe_step = as_count("step");
  o.sim_length = as_count("sim_length");
  o.runs = as_count("runs");
  const json& alpha = need("alpha");
  if (!alpha.is_number()) throw EconomyError(ErrorCode::Schema, "'alpha' must be a number");
  o.alpha = alpha.get<double>();

  BalanceParams& p = out.params;
  p.population_size = as_count("population");
  p.max_generations = as_count("max_generations");
  p.seed = need("seed").get<std::uint64_t>();
  if (doc.contains("mutations_per_generation")) p.mutations_per_generation = as_count("mutations_per_generation");
  if (doc.contains("eval_runs")) p.eval_runs = as_count("eval_runs");
  return out;
}

// ---------------------------------------------------------------------------
// Genome
// ---------------------------------------------------------------------------

GenomeLayout::GenomeLayout(std::vector<EconomyGraph> graphs) {
  graphs_.reserve(graphs.size());
  for (auto& g : graphs) graphs_.push_back(normalize_gate_weights(g));
  for (std::size_t k = 0; k < graphs_.size(); ++k) {
    const EconomyGraph& g = graphs_[k];
    for (std::size_t e = 0; e < g.edge_count(); ++e) {
      GeneSpec spec;
      spec.kind = g.node(g.edge_source(e)).kind == NodeKind::RandomGate ? GeneKind::Probability
                                                                        : GeneKind::Amount;
      spec.is_static = g.edges()[e].is_static;
      spec.fixed_value = g.edges()[e].weight;
      spec.economy = k;
      spec.edge = e;
      if (!spec.is_static) free_.push_back(genes_.size());
      genes_.push_back(spec);
    }
    // Free gate edges need probability mass left over by static siblings.
    for (std::size_t i = 0; i < g.node_count(); ++i) {
      if (g.node(i).kind != NodeKind::RandomGate) continue;
      double fixed = 0.0;
      bool has_free = false;
      for (std::size_t e : g.out_edges(i)) {
        if (g.edges()[e].is_static) fixed += g.edges()[e].weight;
        else has_free = true;
      }
      require(!has_free || fixed < 1.0 - 1e-9,
              "static edges of gate '" + g.node(i).id + "' leave no probability to balance");
    }
  }
}

GenomeWeightVector GenomeLayout::declared() const {
  GenomeWeightVector out(genes_.size());
  for (std::size_t i = 0; i < genes_.size(); ++i) out[i] = genes_[i].fixed_value;
  return out;
}

GenomeWeightVector GenomeLayout::random_genome(Rng& rng) const {
  GenomeWeightVector out = declared();
  std::uniform_int_distribution<int> amount(1, 5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t i : free_) {
    if (genes_[i].kind == GeneKind::Amount) out[i] = amount(rng);
    else out[i] = 1.0 - unit(rng);  // (0, 1]
  }
  return out;
}

std::vector<EconomyGraph> GenomeLayout::write(const GenomeWeightVector& genome) const {
  require(genome.size() == genes_.size(), "genome does not match the economy edge lists");
  std::vector<EconomyGraph> out = graphs_;
  for (std::size_t i : free_) {
    const GeneSpec& spec = genes_[i];
    if (spec.kind == GeneKind::Amount) out[spec.economy].set_weight(spec.edge, genome[i]);
  }
  for (std::size_t k = 0; k < out.size(); ++k) {
    EconomyGraph& g = out[k];
    for (std::size_t n = 0; n < g.node_count(); ++n) {
      if (g.node(n).kind != NodeKind::RandomGate) continue;
      double fixed = 0.0, free_sum = 0.0;
      for (std::size_t e : g.out_edges(n)) {
        if (g.edges()[e].is_static) fixed += g.edges()[e].weight;
      }
      // Genome indices of economy k start after all edges of earlier economies.
      std::size_t offset = 0;
      for (std::size_t j = 0; j < k; ++j) offset += graphs_[j].edge_count();
      for (std::size_t e : g.out_edges(n))
        if (!g.edges()[e].is_static) free_sum += genome[offset + e];
      if (free_sum <= 0.0) continue;
      for (std::size_t e : g.out_edges(n))
        if (!g.edges()[e].is_static) g.set_weight(e, genome[offset + e] / free_sum * (1.0 - fixed));
    }
  }
  return out;
}

double clamp_gene(double value, GeneKind kind) {
  if (kind == GeneKind::Amount) {
    if (value <= 0.0) return 1.0;
    return std::min(value, kMaxAmountGene);
  }
  return value <= 0.0 ? kMinProbabilityGene : value;
}

double apply_crossover_op(CrossoverOp op, double first, double second, GeneKind kind) {
  double v = first;
  switch (op) {
    case CrossoverOp::TakeFirst: v = first; break;
    case CrossoverOp::TakeSecond: v = second; break;
    case CrossoverOp::Sum: v = first + second; break;
    case CrossoverOp::Difference: v = first - second; break;
  }
  return clamp_gene(v, kind);
}

GenomeWeightVector crossover(const GenomeLayout& layout, const GenomeWeightVector& parent_k,
                             const GenomeWeightVector& parent_l, Rng& rng) {
  require(parent_k.size() == layout.size() && parent_l.size() == layout.size(),
          "crossover parents are not aligned to the same edge lists");
  GenomeWeightVector child = parent_k;
  std::uniform_int_distribution<int> pick(0, 3);
  for (std::size_t i : layout.free_genes())
    child[i] = apply_crossover_op(static_cast<CrossoverOp>(pick(rng)), parent_k[i], parent_l[i],
                                  layout.genes()[i].kind);
  return child;
}

double apply_mutation(double value, double delta, bool add, GeneKind kind) {
  return clamp_gene(add ? value + delta : value - delta, kind);
}

bool mutate_genome(const GenomeLayout& layout, GenomeWeightVector& genome, Rng& rng,
                   const MutationParams& params) {
  const auto& free = layout.free_genes();
  if (free.empty()) return false;
  const std::size_t i = free[std::uniform_int_distribution<std::size_t>(0, free.size() - 1)(rng)];
  const bool add = std::uniform_int_distribution<int>(0, 1)(rng) == 1;
  const GeneKind kind = layout.genes()[i].kind;
  double delta = 0.0;
  if (kind == GeneKind::Amount) {
    delta = std::uniform_int_distribution<int>(1, std::max(1, params.amount_delta_max))(rng);
  } else {
    delta = params.probability_delta_max *
            (1.0 - std::uniform_real_distribution<double>(0.0, 1.0)(rng));
  }
  genome[i] = apply_mutation(genome[i], delta, add, kind);
  return true;
}

std::optional<std::size_t> mutate(const GenomeLayout& layout,
                                  std::vector<GenomeWeightVector>& population, Rng& rng,
                                  const MutationParams& params) {
  require(!population.empty(), "mutation needs a nonempty population");
  if (layout.free_genes().empty()) return std::nullopt;
  const std::size_t who = std::uniform_int_distribution<std::size_t>(0, population.size() - 1)(rng);
  mutate_genome(layout, population[who], rng, params);
  return who;
}

// ---------------------------------------------------------------------------
// Search
// ---------------------------------------------------------------------------

namespace {

struct Observed {
  std::vector<double> a;
  std::vector<double> b;  // empty for absolute objectives
};

Observed observe(const GenomeLayout& layout, const BalanceObjective& objective,
                 const GenomeWeightVector& genome, std::uint64_t seed, std::size_t runs) {
  const auto graphs = layout.write(genome);
  const RunEnsemble ens_a = simulate_ensemble(CompiledEconomy(graphs[0]), objective.sim_length,
                                              runs, seed, Execution::Serial);
  Observed out;
  out.a = ens_a.observe(objective.pool, objective.observe_step);
  switch (objective.kind) {
    case ObjectiveKind::AbsoluteValue: break;
    case ObjectiveKind::IntraEconomyPair:
      out.b = ens_a.observe(objective.pool2, objective.observe_step);
      break;
    case ObjectiveKind::InterEconomyPair: {
      const RunEnsemble ens_b =
          simulate_ensemble(CompiledEconomy(graphs[1]), objective.sim_length, runs,
                            splitmix64(seed ^ kSecondEconomyTag), Execution::Serial);
      out.b = ens_b.observe(objective.pool2, objective.observe_step);
      break;
    }
  }
  return out;
}

struct Member {
  GenomeWeightVector genome;
  double mean_prop = 0.0;
};

void evaluate_batch(const GenomeLayout& layout, const BalanceObjective& objective,
                    std::vector<Member>& batch, std::uint64_t seed, std::uint64_t generation,
                    Execution exec) {
  const auto count = static_cast<std::ptrdiff_t>(batch.size());
  std::exception_ptr failure;
  auto eval_one = [&](std::ptrdiff_t i) {
    const auto idx = static_cast<std::size_t>(i);
    batch[idx].mean_prop = evaluate_genome(layout, objective, batch[idx].genome,
                                           derive_seed(seed, generation, idx));
  };
  if (exec == Execution::Parallel) {
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < count; ++i) {
      try {
        eval_one(i);
      } catch (...) {
#pragma omp critical
        if (!failure) failure = std::current_exception();
      }
    }
  } else {
    for (std::ptrdiff_t i = 0; i < count; ++i) eval_one(i);
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

double evaluate_genome(const GenomeLayout& layout, const BalanceObjective& objective,
                       const GenomeWeightVector& genome, std::uint64_t seed, std::size_t runs) {
  const Observed obs = observe(layout, objective, genome, seed, runs ? runs : objective.runs);
  if (objective.kind == ObjectiveKind::AbsoluteValue)
    return fitness_f1(obs.a, objective.target_value, 0.0);
  return fitness_paired(obs.a, obs.b, 0.0);
}

BalanceReport balance(std::vector<EconomyGraph> graphs, const BalanceObjective& objective,
                      const BalanceParams& params) {
  const auto start = std::chrono::steady_clock::now();
  objective.check(graphs);
  require(params.population_size >= 2, "balancer population must hold at least two genomes");
  const GenomeLayout layout(std::move(graphs));
  Rng rng(params.seed);

  // The declared weights are always a starting candidate.
  std::vector<Member> population(params.population_size);
  population.front().genome = layout.declared();
  for (std::size_t i = 1; i < population.size(); ++i) population[i].genome = layout.random_genome(rng);
  evaluate_batch(layout, objective, population, params.seed, 0, params.exec);

  // Ranking on mean agreement keeps the trajectory identical for every alpha.
  auto by_fitness = [](const Member& x, const Member& y) { return x.mean_prop > y.mean_prop; };
  std::stable_sort(population.begin(), population.end(), by_fitness);

  BalanceReport report;
  report.history.push_back(objective.alpha + population.front().mean_prop);
  report.initial_best_fitness = report.history.front();

  std::size_t generation = 0;
  bool reached = is_balanced(report.history.back());
  while (!reached && generation < params.max_generations) {
    ++generation;
    std::vector<std::size_t> order(population.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);

    std::vector<Member> fresh;
    for (std::size_t k = 0; k + 1 < order.size(); k += 2)
      fresh.push_back({crossover(layout, population[order[k]].genome,
                                 population[order[k + 1]].genome, rng),
                       0.0});

    for (std::size_t m = 0; m < params.mutations_per_generation; ++m) {
      const std::size_t pool = population.size() + fresh.size();
      const std::size_t who = std::uniform_int_distribution<std::size_t>(0, pool - 1)(rng);
      Member mutant = who < population.size() ? population[who] : fresh[who - population.size()];
      if (mutate_genome(layout, mutant.genome, rng, params.mutation)) fresh.push_back(std::move(mutant));
    }

    evaluate_batch(layout, objective, fresh, params.seed, generation, params.exec);
    for (auto& m : fresh) population.push_back(std::move(m));
    std::stable_sort(population.begin(), population.end(), by_fitness);
    population.resize(params.population_size);

    report.history.push_back(objective.alpha + population.front().mean_prop);
    reached = is_balanced(report.history.back());
  }

  const Member& best = population.front();
  report.best_weights = best.genome;
  report.best_fitness = report.history.back();
  report.generations = generation;
  report.terminated_by = reached ? Termination::FitnessReached : Termination::Timeout;
  report.balanced = layout.write(best.genome);

  const std::size_t eval_runs = params.eval_runs ? params.eval_runs : objective.runs;
  const Observed stats = observe(layout, objective, best.genome,
                                 splitmix64(params.seed ^ kFinalStatsTag), eval_runs);
  report.observations.push_back({objective.pool, sample_stats(stats.a)});
  if (!stats.b.empty()) report.observations.push_back({objective.pool2, sample_stats(stats.b)});

  report.elapsed_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return report;
}

bool history_nondecreasing(std::span<const double> history) {
  return std::adjacent_find(history.begin(), history.end(),
                            [](double a, double b) { return b < a; }) == history.end();
}

}  // namespace econevo
