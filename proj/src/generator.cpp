#include "econevo/generator.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>
#include <string>

#include <json.hpp>

namespace econevo {

void GeneratorConfig::check() const {
  int total = 0;
  for (const auto& [kind, count] : node_counts) {
    if (count < 0)
      throw EconomyError(ErrorCode::InvalidArgument,
                         "negative node count for " + std::string(to_string(kind)));
    total += count;
  }
  if (total < 2) throw EconomyError(ErrorCode::InvalidArgument, "generator needs at least two nodes");
  if (population_size < 1)
    throw EconomyError(ErrorCode::InvalidArgument, "population size must be positive");
  if (max_steps < 1) throw EconomyError(ErrorCode::InvalidArgument, "max_steps must be positive");
  if (!(remove_probability >= 0.0 && remove_probability <= 1.0))
    throw EconomyError(ErrorCode::InvalidArgument, "remove_probability must lie in [0,1]");
}

GeneratorConfig load_generator_config(std::string_view json_text) {
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw EconomyError(ErrorCode::Schema, std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("nodes") || !doc["nodes"].is_object())
    throw EconomyError(ErrorCode::Schema, "generator config needs a 'nodes' object");

  GeneratorConfig cfg;
  for (const auto& [name, value] : doc["nodes"].items()) {
    const auto kind = parse_node_kind(name);
    if (!kind) throw EconomyError(ErrorCode::UnknownKind, "unknown node kind '" + name + "'");
    if (!value.is_number_integer())
      throw EconomyError(ErrorCode::Schema, "count for '" + name + "' must be an integer");
    cfg.node_counts[*kind] = value.get<int>();
  }
  auto read_int = [&](const char* key, auto& field) {
    if (!doc.contains(key)) return;
    if (!doc[key].is_number_integer())
      throw EconomyError(ErrorCode::Schema, std::string("'") + key + "' must be an integer");
    field = doc[key].get<std::decay_t<decltype(field)>>();
  };
  read_int("population", cfg.population_size);
  read_int("max_steps", cfg.max_steps);
  read_int("seed", cfg.seed);
  if (doc.contains("remove_probability")) {
    if (!doc["remove_probability"].is_number())
      throw EconomyError(ErrorCode::Schema, "'remove_probability' must be a number");
    cfg.remove_probability = doc["remove_probability"].get<double>();
  }
  cfg.check();
  return cfg;
}

std::vector<Node> make_nodes(const GeneratorConfig& config) {
  std::vector<Node> nodes;
  for (NodeKind kind : kAllNodeKinds) {
    auto it = config.node_counts.find(kind);
    if (it == config.node_counts.end()) continue;
    for (int k = 0; k < it->second; ++k)
      nodes.push_back(Node{std::string(to_string(kind)) + "_" + std::to_string(k), kind, {}, 0});
  }
  return nodes;
}

// ---------------------------------------------------------------------------
// GenomeEdgeList
// ---------------------------------------------------------------------------

GenomeEdgeList::GenomeEdgeList(std::vector<NodeKind> kinds)
    : kinds_(std::move(kinds)), in_deg_(kinds_.size(), 0), out_deg_(kinds_.size(), 0) {}

bool GenomeEdgeList::can_add(std::size_t from, std::size_t to) const {
  if (from == to || from >= kinds_.size() || to >= kinds_.size()) return false;
  const NodeConstraint& cf = constraint_for(kinds_[from]);
  const NodeConstraint& ct = constraint_for(kinds_[to]);
  if (!cf.allowed_outputs.contains(kinds_[to]) || !ct.allowed_inputs.contains(kinds_[from]))
    return false;
  if (out_deg_[from] >= cf.max_out || in_deg_[to] >= ct.max_in) return false;
  return std::find(edges_.begin(), edges_.end(), std::pair{from, to}) == edges_.end();
}

bool GenomeEdgeList::try_add(std::size_t from, std::size_t to) {
  if (!can_add(from, to)) return false;
  edges_.emplace_back(from, to);
  ++out_deg_[from];
  ++in_deg_[to];
  return true;
}

void GenomeEdgeList::remove_at(std::size_t edge_index) {
  const auto [from, to] = edges_.at(edge_index);
  --out_deg_[from];
  --in_deg_[to];
  edges_.erase(edges_.begin() + static_cast<std::ptrdiff_t>(edge_index));
}

int GenomeEdgeList::fitness() const {
  // Insertion guards rule out kind and max-degree violations, but they are
  // counted anyway so the value always equals graph_fitness.
  int violations = 0;
  for (std::size_t i = 0; i < kinds_.size(); ++i) {
    const NodeConstraint& c = constraint_for(kinds_[i]);
    violations += in_deg_[i] < c.min_in;
    violations += in_deg_[i] > c.max_in;
    violations += out_deg_[i] < c.min_out;
    violations += out_deg_[i] > c.max_out;
  }
  for (const auto& [from, to] : edges_) {
    violations += !constraint_for(kinds_[from]).allowed_outputs.contains(kinds_[to]);
    violations += !constraint_for(kinds_[to]).allowed_inputs.contains(kinds_[from]);
  }
  return violations;
}

std::size_t GenomeEdgeList::component_count() const {
  std::vector<std::size_t> parent(kinds_.size());
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::size_t components = kinds_.size();
  for (const auto& [from, to] : edges_) {
    const std::size_t a = find(from), b = find(to);
    if (a != b) {
      parent[a] = b;
      --components;
    }
  }
  return components;
}

// ---------------------------------------------------------------------------
// Mutations
// ---------------------------------------------------------------------------

void mutate_add_edge(GenomeEdgeList& individual, Rng& rng) {
  const std::size_t n = individual.kinds().size();
  if (n < 2) return;
  const std::size_t a = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
  std::size_t b = std::uniform_int_distribution<std::size_t>(0, n - 2)(rng);
  if (b >= a) ++b;
  individual.try_add(a, b);
}

void mutate_remove_edge(std::vector<GenomeEdgeList>& population, Rng& rng,
                        double remove_probability) {
  if (population.empty()) return;
  if (!(std::uniform_real_distribution<double>(0.0, 1.0)(rng) < remove_probability)) return;
  auto& chosen = population[std::uniform_int_distribution<std::size_t>(0, population.size() - 1)(rng)];
  if (chosen.edges().empty()) return;
  chosen.remove_at(std::uniform_int_distribution<std::size_t>(0, chosen.edges().size() - 1)(rng));
}

EconomyGraph assemble_graph(const std::vector<Node>& nodes, const GenomeEdgeList& genome) {
  EconomyGraph graph;
  for (const Node& n : nodes) graph.add_node(n);
  std::vector<int> gate_out(nodes.size(), 0);
  for (const auto& [from, to] : genome.edges()) ++gate_out[from];
  for (const auto& [from, to] : genome.edges()) {
    const double w = nodes[from].kind == NodeKind::RandomGate ? 1.0 / gate_out[from] : 1.0;
    graph.add_edge(Edge{nodes[from].id, nodes[to].id, w, false});
  }
  return graph;
}

// ---------------------------------------------------------------------------
// generate
// ---------------------------------------------------------------------------

GenerationResult generate(const GeneratorConfig& config) {
  config.check();
  const auto start = std::chrono::steady_clock::now();
  const std::vector<Node> nodes = make_nodes(config);
  std::vector<NodeKind> kinds;
  kinds.reserve(nodes.size());
  for (const Node& n : nodes) kinds.push_back(n.kind);

  Rng rng(config.seed);
  std::vector<GenomeEdgeList> population(static_cast<std::size_t>(config.population_size),
                                         GenomeEdgeList(kinds));
  GenomeEdgeList best = population.front();
  int best_fitness = best.fitness();
  std::size_t best_components = best.component_count();

  GenerationResult result;
  auto finish = [&](const GenomeEdgeList& genome, bool valid, std::size_t generations) {
    result.valid = valid;
    result.generations = generations;
    result.final_fitness = genome.fitness();
    result.components = genome.component_count();
    result.graph = assemble_graph(nodes, genome);
    result.elapsed_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return result;
  };

  for (int gen = 1; gen <= config.max_steps; ++gen) {
    for (auto& individual : population) mutate_add_edge(individual, rng);
    mutate_remove_edge(population, rng, config.remove_probability);

    int gen_best = -1;
    for (const auto& individual : population) {
      const int f = individual.fitness();
      const std::size_t comps = individual.component_count();
      if (f == 0 && comps == 1) {
        result.best_fitness_history.push_back(0);
        return finish(individual, true, static_cast<std::size_t>(gen));
      }
      if (gen_best < 0 || f < gen_best) gen_best = f;
      if (f < best_fitness || (f == best_fitness && comps < best_components)) {
        best = individual;
        best_fitness = f;
        best_components = comps;
      }
    }
    result.best_fitness_history.push_back(gen_best);
  }
  return finish(best, false, static_cast<std::size_t>(config.max_steps));
}

std::map<NodeKind, int> sample_node_counts(int total, Rng& rng) {
  if (total < 2) throw EconomyError(ErrorCode::InvalidArgument, "need at least two nodes");
  std::vector<NodeKind> kinds(static_cast<std::size_t>(total));
  std::uniform_int_distribution<std::size_t> pick_kind(0, kAllNodeKinds.size() - 1);
  for (auto& k : kinds) k = kAllNodeKinds[pick_kind(rng)];

  auto force = [&](NodeKind wanted, NodeKind keep) {
    if (std::count(kinds.begin(), kinds.end(), wanted) > 0) return;
    const bool keep_is_rare = std::count(kinds.begin(), kinds.end(), keep) == 1;
    std::vector<std::size_t> candidates;
    for (std::size_t i = 0; i < kinds.size(); ++i)
      if (!(keep_is_rare && kinds[i] == keep)) candidates.push_back(i);
    kinds[candidates[std::uniform_int_distribution<std::size_t>(0, candidates.size() - 1)(rng)]] =
        wanted;
  };
  force(NodeKind::Source, NodeKind::Pool);
  force(NodeKind::Pool, NodeKind::Source);

  std::map<NodeKind, int> counts;
  for (NodeKind k : kinds) ++counts[k];
  return counts;
}

}  // namespace econevo
