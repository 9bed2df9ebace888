#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "econevo/economy.hpp"

namespace econevo {

using Rng = std::mt19937_64;

enum class Execution { Serial, Parallel };

/// Index-based, validated form of an EconomyGraph used by the stepper.
/// Construction refuses graphs that fail is_valid.
class CompiledEconomy {
 public:
  explicit CompiledEconomy(const EconomyGraph& graph);

  const EconomyGraph& graph() const { return graph_; }
  std::size_t node_count() const { return kinds_.size(); }
  NodeKind kind(std::size_t node) const { return kinds_[node]; }
  /// Balance cap of a fixed pool (its largest out-weight); -1 when uncapped.
  std::int64_t fixed_cap(std::size_t node) const { return fixed_cap_[node]; }

  /// Pools, fixed pools and drains in node order.
  const std::vector<std::size_t>& monitored() const { return monitored_; }
  std::size_t monitored_slot(std::string_view node_id) const;

 private:
  friend class Stepper;

  EconomyGraph graph_;
  std::vector<NodeKind> kinds_;
  std::vector<std::int64_t> amount_;          // per edge; 0 on gate edges
  std::vector<double> gate_cumulative_;       // per edge; cumulative share within its gate
  std::vector<std::size_t> sources_;          // ascending id
  std::vector<std::size_t> converters_;       // ascending id
  std::vector<std::size_t> drain_edges_;      // ascending edge index
  std::vector<std::int64_t> fixed_cap_;       // per node; -1 when uncapped
  std::vector<std::size_t> monitored_;
};

struct SimulationState {
  std::vector<std::int64_t> amounts;  // per node; pool balance or cumulative drain total
  std::size_t step = 0;

  static SimulationState initial(const CompiledEconomy& economy);
};

/// Optional per-node accounting of what one or more steps actually moved.
struct FlowLedger {
  std::vector<std::int64_t> inflow;
  std::vector<std::int64_t> outflow;
  std::vector<std::int64_t> discarded;

  explicit FlowLedger(std::size_t nodes) : inflow(nodes), outflow(nodes), discarded(nodes) {}
};

/// Advances one time step. Phase order: sources (gates route inline),
/// converters to a fixed point with at most one firing each, pool->drain
/// edges, fixed-pool clamp.
SimulationState step(const CompiledEconomy& economy, const SimulationState& state, Rng& rng,
                     FlowLedger* ledger = nullptr);

/// Snapshots t = 0..n of every monitored node.
class SimulationTrace {
 public:
  SimulationTrace(std::uint64_t seed, std::size_t steps, std::vector<std::string> monitored_ids);

  std::uint64_t seed() const { return seed_; }
  std::size_t steps() const { return steps_; }
  const std::vector<std::string>& monitored_ids() const { return ids_; }

  std::int64_t at(std::size_t t, std::size_t slot) const { return values_[t * ids_.size() + slot]; }
  std::int64_t at(std::size_t t, std::string_view node_id) const;
  std::span<const std::int64_t> snapshot(std::size_t t) const;
  std::vector<std::int64_t> series(std::string_view node_id) const;

  void record(std::size_t t, std::span<const std::int64_t> monitored_values);

  friend bool operator==(const SimulationTrace&, const SimulationTrace&) = default;

 private:
  std::size_t slot_of(std::string_view node_id) const;

  std::uint64_t seed_;
  std::size_t steps_;
  std::vector<std::string> ids_;
  std::vector<std::int64_t> values_;
};

SimulationTrace simulate(const CompiledEconomy& economy, std::size_t steps, std::uint64_t seed);
SimulationTrace simulate(const EconomyGraph& graph, std::size_t steps, std::uint64_t seed);

/// m traces of one economy with seeds base_seed + i.
class RunEnsemble {
 public:
  RunEnsemble() = default;
  explicit RunEnsemble(std::vector<SimulationTrace> traces);

  std::size_t runs() const { return traces_.size(); }
  std::size_t steps() const { return traces_.empty() ? 0 : traces_.front().steps(); }
  const std::vector<SimulationTrace>& traces() const { return traces_; }

  /// s_t of one node across all runs, in seed order.
  std::vector<double> observe(std::string_view node_id, std::size_t t) const;

  friend bool operator==(const RunEnsemble&, const RunEnsemble&) = default;

 private:
  std::vector<SimulationTrace> traces_;
};

RunEnsemble simulate_ensemble(const CompiledEconomy& economy, std::size_t steps, std::size_t runs,
                              std::uint64_t base_seed, Execution exec = Execution::Parallel);
RunEnsemble simulate_ensemble(const EconomyGraph& graph, std::size_t steps, std::size_t runs,
                              std::uint64_t base_seed, Execution exec = Execution::Parallel);

/// Header `run,step,node_id,amount`; runs by seed offset, steps ascending.
void write_trace_csv(std::ostream& out, const RunEnsemble& ensemble);

struct SampleStats {
  double mean = 0.0;
  double stddev = 0.0;  // population standard deviation
};
SampleStats sample_stats(std::span<const double> values);

}  // namespace econevo
