#pragma once

// Test-only reference checkers. Written against the raw node/edge lists and
// a separately transcribed rule table; shares no code with the library.

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace oracle {

struct Rule {
  int max_in, max_out, min_out, min_in;
  std::set<std::string> inputs, outputs;
};

// Columns in the order the rule table prints them: max in, max out, min out, min in.
inline const std::map<std::string, Rule>& rules() {
  static const std::map<std::string, Rule> table = {
      {"source", {0, 3, 1, 0, {}, {"pool", "random_gate"}}},
      {"random_gate", {1, 3, 2, 1, {"source", "converter"}, {"pool", "converter"}}},
      {"pool", {2, 3, 0, 1, {"source", "random_gate", "converter"}, {"converter", "drain"}}},
      {"converter", {3, 1, 1, 1, {"pool", "random_gate"}, {"pool", "random_gate"}}},
      {"drain", {2, 0, 0, 1, {"pool"}, {}}},
  };
  return table;
}

inline std::string row_name(const std::string& kind) { return kind == "fixed_pool" ? "pool" : kind; }

/// kinds[i] is the kind name of node i; edges are (from, to) node indices.
inline int violations(const std::vector<std::string>& kinds,
                      const std::vector<std::pair<int, int>>& edges) {
  int total = 0;
  for (int v = 0; v < static_cast<int>(kinds.size()); ++v) {
    const Rule& r = rules().at(row_name(kinds[v]));
    int in = 0, out = 0;
    for (const auto& [a, b] : edges) {
      if (b == v) {
        ++in;
        if (!r.inputs.count(row_name(kinds[a]))) ++total;
      }
      if (a == v) {
        ++out;
        if (!r.outputs.count(row_name(kinds[b]))) ++total;
      }
    }
    if (in > r.max_in) ++total;
    if (in < r.min_in) ++total;
    if (out > r.max_out) ++total;
    if (out < r.min_out) ++total;
  }
  return total;
}

/// Breadth-first search over the undirected edge set.
inline bool connected(int n, const std::vector<std::pair<int, int>>& edges) {
  if (n == 0) return false;
  std::vector<bool> seen(n, false);
  std::vector<int> frontier{0};
  seen[0] = true;
  int reached = 1;
  while (!frontier.empty()) {
    const int v = frontier.back();
    frontier.pop_back();
    for (const auto& [a, b] : edges) {
      int w = -1;
      if (a == v) w = b;
      if (b == v) w = a;
      if (w >= 0 && !seen[w]) {
        seen[w] = true;
        ++reached;
        frontier.push_back(w);
      }
    }
  }
  return reached == n;
}

}  // namespace oracle

namespace oracle {

struct WeightedEdge {
  int from, to;
  long long weight;
};

/// Step-by-step reference for economies without random gates. Returns the
/// amount of every node for t = 0..steps.
inline std::vector<std::vector<long long>> reference_run(const std::vector<std::string>& ids,
                                                         const std::vector<std::string>& kinds,
                                                         const std::vector<WeightedEdge>& edges,
                                                         std::vector<long long> amounts,
                                                         int steps) {
  const int n = static_cast<int>(ids.size());
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int a, int b) { return ids[a] < ids[b]; });

  std::vector<long long> cap(n, -1);
  for (const auto& e : edges)
    if (kinds[e.from] == "fixed_pool") cap[e.from] = std::max(cap[e.from], e.weight);
  for (int i = 0; i < n; ++i)
    if (cap[i] >= 0) amounts[i] = std::min(amounts[i], cap[i]);

  std::vector<std::vector<long long>> history{amounts};
  for (int t = 0; t < steps; ++t) {
    for (int v : order)
      if (kinds[v] == "source")
        for (const auto& e : edges)
          if (e.from == v) amounts[e.to] += e.weight;

    std::vector<bool> done(n, false);
    for (bool progress = true; progress;) {
      progress = false;
      for (int v : order) {
        if (kinds[v] != "converter" || done[v]) continue;
        bool ready = true;
        for (const auto& e : edges)
          if (e.to == v && amounts[e.from] < e.weight) ready = false;
        if (!ready) continue;
        for (const auto& e : edges) {
          if (e.to == v) amounts[e.from] -= e.weight;
          if (e.from == v) amounts[e.to] += e.weight;
        }
        done[v] = progress = true;
      }
    }

    for (const auto& e : edges)
      if (kinds[e.to] == "drain" && amounts[e.from] >= e.weight) {
        amounts[e.from] -= e.weight;
        amounts[e.to] += e.weight;
      }
    for (int i = 0; i < n; ++i)
      if (cap[i] >= 0) amounts[i] = std::min(amounts[i], cap[i]);
    history.push_back(amounts);
  }
  return history;
}

}  // namespace oracle

namespace oracle {

/// Necessary condition for a node multiset to admit any valid wiring: an
/// assignment of edge counts per kind pair meeting every degree bound, with
/// room for at least N-1 edges so one component is possible.
/// Pool counts include fixed pools. False proves infeasibility.
inline bool capacity_feasible(int S, int G, int P, int C, int D) {
  using std::max;
  using std::min;
  for (int sg = 0; sg <= min({G, 3 * S, S * G}); ++sg) {
    const int cg = G - sg;  // every gate takes exactly one input
    if (cg < 0 || cg > C || cg > C * G) continue;
    const int cp = C - cg;  // every converter emits exactly one edge
    if (cp > C * P) continue;
    for (int gp = 0; gp <= min(3 * G, G * P); ++gp) {
      const int gc_lo = max(0, 2 * G - gp), gc_hi = min(3 * G - gp, G * C);
      if (gc_lo > gc_hi) continue;
      for (int sp = max(0, S - sg); sp <= min(3 * S - sg, S * P); ++sp) {
        const int pool_in = sp + gp + cp;
        if (pool_in < P || pool_in > 2 * P) continue;
        for (int pc = 0; pc <= min(3 * P, P * C); ++pc) {
          const int gc_max = min(gc_hi, 3 * C - pc);
          if (max(gc_lo, C - pc) > gc_max) continue;
          const int pd_max = min({2 * D, 3 * P - pc, P * D});
          if (D > pd_max) continue;
          if (sg + cg + cp + gp + gc_max + sp + pc + pd_max < S + G + P + C + D - 1) continue;
          return true;
        }
      }
    }
  }
  return false;
}

}  // namespace oracle
