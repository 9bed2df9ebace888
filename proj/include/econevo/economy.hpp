#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace econevo {

enum class NodeKind : std::uint8_t { Source, RandomGate, Pool, FixedPool, Converter, Drain };

constexpr std::array<NodeKind, 6> kAllNodeKinds = {NodeKind::Source,    NodeKind::RandomGate,
                                                   NodeKind::Pool,      NodeKind::FixedPool,
                                                   NodeKind::Converter, NodeKind::Drain};

std::string_view to_string(NodeKind kind);
std::optional<NodeKind> parse_node_kind(std::string_view text);

// Pools and fixed pools hold state; everything else is transient.
constexpr bool is_pool_like(NodeKind k) { return k == NodeKind::Pool || k == NodeKind::FixedPool; }
constexpr bool is_observable(NodeKind k) { return is_pool_like(k) || k == NodeKind::Drain; }

enum class ErrorCode {
  Schema,
  UnknownKind,
  DanglingEndpoint,
  NonpositiveWeight,
  DuplicateNode,
  DuplicateEdge,
  SelfLoop,
  InvalidArgument,
  Normalization,
  InvalidGraph,
};

class EconomyError : public std::runtime_error {
 public:
  EconomyError(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Bitmask over NodeKind; FixedPool is folded into Pool before lookup.
class KindSet {
 public:
  constexpr KindSet() = default;
  constexpr KindSet(std::initializer_list<NodeKind> kinds) {
    for (auto k : kinds) bits_ |= bit(k);
  }
  constexpr bool contains(NodeKind k) const { return (bits_ & bit(k)) != 0; }
  constexpr bool empty() const { return bits_ == 0; }

 private:
  static constexpr std::uint8_t bit(NodeKind k) {
    if (k == NodeKind::FixedPool) k = NodeKind::Pool;
    return static_cast<std::uint8_t>(1u << static_cast<unsigned>(k));
  }
  std::uint8_t bits_ = 0;
};

struct NodeConstraint {
  int min_in = 0;
  int max_in = 0;
  int min_out = 0;
  int max_out = 0;
  KindSet allowed_inputs;
  KindSet allowed_outputs;
};

/// Connection rules per node kind. FixedPool shares the Pool row.
const NodeConstraint& constraint_for(NodeKind kind);

struct Node {
  std::string id;
  NodeKind kind = NodeKind::Pool;
  std::string label;
  std::int64_t initial = 0;
};

struct Edge {
  std::string from;
  std::string to;
  double weight = 1.0;
  bool is_static = false;
};

/// Directed economy graph. Edge order is significant: the balancer maps
/// genome index i to edges()[i].
///
/// Structural rules are enforced on insertion: unique node ids, existing
/// endpoints, no self-loops, no parallel edges, positive weights, integral
/// weights on edges not leaving a random gate. Rule-table constraints and
/// connectivity are *not* enforced here; see validate_node / is_valid.
class EconomyGraph {
 public:
  std::size_t add_node(Node node);
  std::size_t add_edge(Edge edge);

  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Edge>& edges() const { return edges_; }
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return edges_.size(); }

  std::optional<std::size_t> index_of(std::string_view id) const;
  const Node& node(std::size_t index) const { return nodes_.at(index); }
  const Node& node(std::string_view id) const;

  std::size_t edge_source(std::size_t edge) const { return edge_from_.at(edge); }
  std::size_t edge_target(std::size_t edge) const { return edge_to_.at(edge); }
  const std::vector<std::size_t>& in_edges(std::size_t node) const { return in_.at(node); }
  const std::vector<std::size_t>& out_edges(std::size_t node) const { return out_.at(node); }

  void set_weight(std::size_t edge, double weight);

  // Free-text provenance note carried through load/save.
  const std::string& description() const { return description_; }
  void set_description(std::string text) { description_ = std::move(text); }

 private:
  void check_weight(std::size_t from_index, double weight, const Edge& edge) const;

  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
  std::vector<std::size_t> edge_from_;
  std::vector<std::size_t> edge_to_;
  std::vector<std::vector<std::size_t>> in_;
  std::vector<std::vector<std::size_t>> out_;
  std::unordered_map<std::string, std::size_t> index_;
  std::string description_;
};

/// Number of dissatisfied constraints for one node: one per violated degree
/// bound and one per incident edge whose other endpoint has a disallowed kind.
int validate_node(const EconomyGraph& graph, std::string_view node_id);
int validate_node(const EconomyGraph& graph, std::size_t node_index);

/// Sum of validate_node over all nodes; 0 is the best value.
int graph_fitness(const EconomyGraph& graph);

/// Number of weakly connected components (0 for an empty graph).
std::size_t weak_component_count(const EconomyGraph& graph);
bool is_weakly_connected(const EconomyGraph& graph);

/// Rule-table constraints hold for every node and the graph is one weak component.
/// An empty graph is not valid.
bool is_valid(const EconomyGraph& graph);

/// Scales the out-weights of every random gate so they sum to one.
EconomyGraph normalize_gate_weights(const EconomyGraph& graph);

EconomyGraph load_economy(std::string_view json_text);
std::string save_economy(const EconomyGraph& graph);

EconomyGraph load_economy_file(const std::string& path);
void save_economy_file(const EconomyGraph& graph, const std::string& path);

}  // namespace econevo
