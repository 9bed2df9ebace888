#include "econevo/economy.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

namespace econevo {

namespace {

using json = nlohmann::json;

constexpr std::array<std::string_view, 6> kKindNames = {"source",     "random_gate", "pool",
                                                        "fixed_pool", "converter",   "drain"};

const std::array<NodeConstraint, 6> kConstraints = {{
    // Source
    {0, 0, 1, 3, {}, {NodeKind::Pool, NodeKind::RandomGate}},
    // RandomGate
    {1, 1, 2, 3, {NodeKind::Source, NodeKind::Converter}, {NodeKind::Pool, NodeKind::Converter}},
    // Pool
    {1, 2, 0, 3,
     {NodeKind::Source, NodeKind::RandomGate, NodeKind::Converter},
     {NodeKind::Converter, NodeKind::Drain}},
    // FixedPool: same row as Pool
    {1, 2, 0, 3,
     {NodeKind::Source, NodeKind::RandomGate, NodeKind::Converter},
     {NodeKind::Converter, NodeKind::Drain}},
    // Converter
    {1, 3, 1, 1, {NodeKind::Pool, NodeKind::RandomGate}, {NodeKind::Pool, NodeKind::RandomGate}},
    // Drain
    {1, 2, 0, 0, {NodeKind::Pool}, {}},
}};

bool is_integral(double w) { return std::isfinite(w) && std::floor(w) == w; }

}  // namespace

std::string_view to_string(NodeKind kind) { return kKindNames[static_cast<std::size_t>(kind)]; }

std::optional<NodeKind> parse_node_kind(std::string_view text) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i)
    if (kKindNames[i] == text) return static_cast<NodeKind>(i);
  return std::nullopt;
}

const NodeConstraint& constraint_for(NodeKind kind) {
  return kConstraints[static_cast<std::size_t>(kind)];
}

// ---------------------------------------------------------------------------
// EconomyGraph
// ---------------------------------------------------------------------------

std::size_t EconomyGraph::add_node(Node node) {
  if (node.id.empty()) throw EconomyError(ErrorCode::Schema, "node id must be nonempty");
  if (index_.count(node.id))
    throw EconomyError(ErrorCode::DuplicateNode, "duplicate node id '" + node.id + "'");
  if (node.initial < 0)
    throw EconomyError(ErrorCode::Schema, "node '" + node.id + "' has negative initial amount");
  if (node.initial != 0 && !is_pool_like(node.kind))
    throw EconomyError(ErrorCode::Schema,
                       "node '" + node.id + "' of kind " + std::string(to_string(node.kind)) +
                           " cannot hold an initial amount");
  const std::size_t idx = nodes_.size();
  index_.emplace(node.id, idx);
  nodes_.push_back(std::move(node));
  in_.emplace_back();
  out_.emplace_back();
  return idx;
}

void EconomyGraph::check_weight(std::size_t from_index, double weight, const Edge& edge) const {
  const std::string name = "edge " + edge.from + "->" + edge.to;
  if (!std::isfinite(weight) || weight <= 0.0)
    throw EconomyError(ErrorCode::NonpositiveWeight, name + " has nonpositive weight");
  if (nodes_[from_index].kind != NodeKind::RandomGate && !is_integral(weight))
    throw EconomyError(ErrorCode::Schema, name + " carries an amount and needs an integer weight");
}

std::size_t EconomyGraph::add_edge(Edge edge) {
  const auto from = index_of(edge.from);
  const auto to = index_of(edge.to);
  if (!from)
    throw EconomyError(ErrorCode::DanglingEndpoint,
                       "edge " + edge.from + "->" + edge.to + ": unknown node '" + edge.from + "'");
  if (!to)
    throw EconomyError(ErrorCode::DanglingEndpoint,
                       "edge " + edge.from + "->" + edge.to + ": unknown node '" + edge.to + "'");
  if (*from == *to) throw EconomyError(ErrorCode::SelfLoop, "self-loop on node '" + edge.from + "'");
  for (std::size_t e : out_[*from])
    if (edge_to_[e] == *to)
      throw EconomyError(ErrorCode::DuplicateEdge,
                         "duplicate edge " + edge.from + "->" + edge.to);
  check_weight(*from, edge.weight, edge);

  const std::size_t idx = edges_.size();
  edges_.push_back(std::move(edge));
  edge_from_.push_back(*from);
  edge_to_.push_back(*to);
  out_[*from].push_back(idx);
  in_[*to].push_back(idx);
  return idx;
}

std::optional<std::size_t> EconomyGraph::index_of(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

const Node& EconomyGraph::node(std::string_view id) const {
  auto idx = index_of(id);
  if (!idx) throw EconomyError(ErrorCode::InvalidArgument, "unknown node '" + std::string(id) + "'");
  return nodes_[*idx];
}

void EconomyGraph::set_weight(std::size_t edge, double weight) {
  check_weight(edge_from_.at(edge), weight, edges_.at(edge));
  edges_[edge].weight = weight;
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

int validate_node(const EconomyGraph& graph, std::size_t node_index) {
  if (node_index >= graph.node_count())
    throw EconomyError(ErrorCode::InvalidArgument, "node index out of range");
  const NodeKind kind = graph.node(node_index).kind;
  const NodeConstraint& c = constraint_for(kind);
  const auto& ins = graph.in_edges(node_index);
  const auto& outs = graph.out_edges(node_index);
  const int in_deg = static_cast<int>(ins.size());
  const int out_deg = static_cast<int>(outs.size());

  int violations = 0;
  violations += in_deg < c.min_in;
  violations += in_deg > c.max_in;
  violations += out_deg < c.min_out;
  violations += out_deg > c.max_out;
  for (std::size_t e : ins)
    violations += !c.allowed_inputs.contains(graph.node(graph.edge_source(e)).kind);
  for (std::size_t e : outs)
    violations += !c.allowed_outputs.contains(graph.node(graph.edge_target(e)).kind);
  return violations;
}

int validate_node(const EconomyGraph& graph, std::string_view node_id) {
  auto idx = graph.index_of(node_id);
  if (!idx)
    throw EconomyError(ErrorCode::InvalidArgument,
                       "node '" + std::string(node_id) + "' is not part of the graph");
  return validate_node(graph, *idx);
}

int graph_fitness(const EconomyGraph& graph) {
  int total = 0;
  for (std::size_t i = 0; i < graph.node_count(); ++i) total += validate_node(graph, i);
  return total;
}

std::size_t weak_component_count(const EconomyGraph& graph) {
  const std::size_t n = graph.node_count();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::size_t components = n;
  for (std::size_t e = 0; e < graph.edge_count(); ++e) {
    const std::size_t a = find(graph.edge_source(e));
    const std::size_t b = find(graph.edge_target(e));
    if (a != b) {
      parent[a] = b;
      --components;
    }
  }
  return components;
}

bool is_weakly_connected(const EconomyGraph& graph) { return weak_component_count(graph) == 1; }

bool is_valid(const EconomyGraph& graph) {
  return graph.node_count() > 0 && graph_fitness(graph) == 0 && is_weakly_connected(graph);
}

EconomyGraph normalize_gate_weights(const EconomyGraph& graph) {
  EconomyGraph out = graph;
  for (std::size_t i = 0; i < graph.node_count(); ++i) {
    if (graph.node(i).kind != NodeKind::RandomGate) continue;
    const auto& outs = graph.out_edges(i);
    double sum = 0.0;
    for (std::size_t e : outs) sum += graph.edges()[e].weight;
    if (outs.empty() || !(sum > 0.0))
      throw EconomyError(ErrorCode::Normalization,
                         "random gate '" + graph.node(i).id + "' has no outgoing weight");
    // Already-normalized gates are left bit-identical so the operation is idempotent.
    if (std::abs(sum - 1.0) <= 1e-12) continue;
    for (std::size_t e : outs) out.set_weight(e, graph.edges()[e].weight / sum);
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON format
// ---------------------------------------------------------------------------

EconomyGraph load_economy(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw EconomyError(ErrorCode::Schema, std::string("economy is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw EconomyError(ErrorCode::Schema, "economy document must be an object");
  if (!doc.contains("nodes") || !doc["nodes"].is_array())
    throw EconomyError(ErrorCode::Schema, "economy document needs a 'nodes' array");
  if (!doc.contains("edges") || !doc["edges"].is_array())
    throw EconomyError(ErrorCode::Schema, "economy document needs an 'edges' array");

  EconomyGraph graph;
  if (doc.contains("description")) {
    if (!doc["description"].is_string())
      throw EconomyError(ErrorCode::Schema, "'description' must be a string");
    graph.set_description(doc["description"].get<std::string>());
  }

  std::size_t position = 0;
  for (const auto& jn : doc["nodes"]) {
    const std::string where = "nodes[" + std::to_string(position++) + "]";
    if (!jn.is_object()) throw EconomyError(ErrorCode::Schema, where + " must be an object");
    if (!jn.contains("id") || !jn["id"].is_string())
      throw EconomyError(ErrorCode::Schema, where + " needs a string 'id'");
    if (!jn.contains("kind") || !jn["kind"].is_string())
      throw EconomyError(ErrorCode::Schema, where + " needs a string 'kind'");
    Node node;
    node.id = jn["id"].get<std::string>();
    const auto kind_name = jn["kind"].get<std::string>();
    const auto kind = parse_node_kind(kind_name);
    if (!kind)
      throw EconomyError(ErrorCode::UnknownKind,
                         "node '" + node.id + "' has unknown kind '" + kind_name + "'");
    node.kind = *kind;
    if (jn.contains("label")) {
      if (!jn["label"].is_string())
        throw EconomyError(ErrorCode::Schema, "node '" + node.id + "': 'label' must be a string");
      node.label = jn["label"].get<std::string>();
    }
    if (jn.contains("initial")) {
      if (!jn["initial"].is_number_integer())
        throw EconomyError(ErrorCode::Schema,
                           "node '" + node.id + "': 'initial' must be an integer");
      node.initial = jn["initial"].get<std::int64_t>();
    }
    graph.add_node(std::move(node));
  }

  position = 0;
  for (const auto& je : doc["edges"]) {
    const std::string where = "edges[" + std::to_string(position++) + "]";
    if (!je.is_object()) throw EconomyError(ErrorCode::Schema, where + " must be an object");
    if (!je.contains("from") || !je["from"].is_string() || !je.contains("to") ||
        !je["to"].is_string())
      throw EconomyError(ErrorCode::Schema, where + " needs string 'from' and 'to'");
    if (!je.contains("weight") || !je["weight"].is_number())
      throw EconomyError(ErrorCode::Schema, where + " needs a numeric 'weight'");
    Edge edge;
    edge.from = je["from"].get<std::string>();
    edge.to = je["to"].get<std::string>();
    edge.weight = je["weight"].get<double>();
    if (je.contains("static")) {
      if (!je["static"].is_boolean())
        throw EconomyError(ErrorCode::Schema, where + ": 'static' must be a boolean");
      edge.is_static = je["static"].get<bool>();
    }
    graph.add_edge(std::move(edge));
  }
  return graph;
}

std::string save_economy(const EconomyGraph& graph) {
  json doc = json::object();
  if (!graph.description().empty()) doc["description"] = graph.description();
  json nodes = json::array();
  for (const Node& n : graph.nodes()) {
    json jn = {{"id", n.id}, {"kind", std::string(to_string(n.kind))}};
    if (!n.label.empty()) jn["label"] = n.label;
    if (n.initial != 0) jn["initial"] = n.initial;
    nodes.push_back(std::move(jn));
  }
  json edges = json::array();
  for (std::size_t e = 0; e < graph.edge_count(); ++e) {
    const Edge& edge = graph.edges()[e];
    json je = {{"from", edge.from}, {"to", edge.to}};
    if (graph.node(graph.edge_source(e)).kind == NodeKind::RandomGate)
      je["weight"] = edge.weight;
    else
      je["weight"] = static_cast<std::int64_t>(edge.weight);
    if (edge.is_static) je["static"] = true;
    edges.push_back(std::move(je));
  }
  doc["nodes"] = std::move(nodes);
  doc["edges"] = std::move(edges);
  return doc.dump(2) + "\n";
}

EconomyGraph load_economy_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open economy file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_economy(buf.str());
}

void save_economy_file(const EconomyGraph& graph, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write economy file '" + path + "'");
  out << save_economy(graph);
}

}  // namespace econevo
