#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "econevo/economy.hpp"
#include "econevo/simulation.hpp"

namespace econevo {

struct GeneratorConfig {
  std::map<NodeKind, int> node_counts;
  int population_size = 10;
  int max_steps = 50000;
  double remove_probability = 0.1;
  std::uint64_t seed = 0;

  /// Throws EconomyError(InvalidArgument) when the config cannot be run.
  void check() const;
};

GeneratorConfig load_generator_config(std::string_view json_text);

/// Node set implied by a config: ids "<kind>_<k>" in kind order.
std::vector<Node> make_nodes(const GeneratorConfig& config);

/// One generator individual: an edge list over a fixed node set. Degrees
/// are tracked so insertion checks stay O(degree).
class GenomeEdgeList {
 public:
  explicit GenomeEdgeList(std::vector<NodeKind> kinds);

  const std::vector<NodeKind>& kinds() const { return kinds_; }
  const std::vector<std::pair<std::size_t, std::size_t>>& edges() const { return edges_; }
  int in_degree(std::size_t node) const { return in_deg_[node]; }
  int out_degree(std::size_t node) const { return out_deg_[node]; }

  /// True iff from->to respects allowed kinds, both max degrees, and is new.
  bool can_add(std::size_t from, std::size_t to) const;
  bool try_add(std::size_t from, std::size_t to);
  void remove_at(std::size_t edge_index);

  /// Dissatisfied connection constraints summed over nodes; 0 is best.
  int fitness() const;
  std::size_t component_count() const;
  bool is_valid() const { return fitness() == 0 && component_count() == 1; }

 private:
  std::vector<NodeKind> kinds_;
  std::vector<std::pair<std::size_t, std::size_t>> edges_;
  std::vector<int> in_deg_;
  std::vector<int> out_deg_;
};

/// Samples two distinct vertices and adds the edge between them if allowed.
void mutate_add_edge(GenomeEdgeList& individual, Rng& rng);

/// With probability remove_probability, deletes one random edge of one
/// randomly chosen individual.
void mutate_remove_edge(std::vector<GenomeEdgeList>& population, Rng& rng,
                        double remove_probability);

/// Builds an economy from a node set and an edge list: amount edges get
/// weight 1, gate edges share probability uniformly.
EconomyGraph assemble_graph(const std::vector<Node>& nodes, const GenomeEdgeList& genome);

struct GenerationResult {
  bool valid = false;
  std::size_t generations = 0;
  int final_fitness = 0;
  std::size_t components = 0;
  double elapsed_ms = 0.0;
  EconomyGraph graph;  // the valid graph, or the best individual on failure
  std::vector<int> best_fitness_history;  // one entry per generation
};

GenerationResult generate(const GeneratorConfig& config);

/// Random node multiset of `total` nodes: uniform kind per node, then at
/// least one Source and one Pool are forced in.
std::map<NodeKind, int> sample_node_counts(int total, Rng& rng);

}  // namespace econevo
