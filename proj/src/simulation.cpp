#include "econevo/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

namespace econevo {

CompiledEconomy::CompiledEconomy(const EconomyGraph& graph) : graph_(graph) {
  if (!is_valid(graph_))
    throw EconomyError(ErrorCode::InvalidGraph, "refusing to simulate an invalid economy");

  const std::size_t n = graph_.node_count();
  const std::size_t m = graph_.edge_count();
  kinds_.resize(n);
  for (std::size_t i = 0; i < n; ++i) kinds_[i] = graph_.node(i).kind;

  amount_.assign(m, 0);
  gate_cumulative_.assign(m, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& outs = graph_.out_edges(i);
    if (kinds_[i] == NodeKind::RandomGate) {
      double total = 0.0;
      for (std::size_t e : outs) total += graph_.edges()[e].weight;
      double running = 0.0;
      for (std::size_t e : outs) {
        running += graph_.edges()[e].weight / total;
        gate_cumulative_[e] = running;
      }
    } else {
      for (std::size_t e : outs) amount_[e] = static_cast<std::int64_t>(graph_.edges()[e].weight);
    }
  }

  auto by_id = [this](std::size_t a, std::size_t b) { return graph_.node(a).id < graph_.node(b).id; };
  for (std::size_t i = 0; i < n; ++i) {
    if (kinds_[i] == NodeKind::Source) sources_.push_back(i);
    if (kinds_[i] == NodeKind::Converter) converters_.push_back(i);
    if (is_observable(kinds_[i])) monitored_.push_back(i);
  }
  std::sort(sources_.begin(), sources_.end(), by_id);
  std::sort(converters_.begin(), converters_.end(), by_id);

  for (std::size_t e = 0; e < m; ++e)
    if (kinds_[graph_.edge_target(e)] == NodeKind::Drain) drain_edges_.push_back(e);

  fixed_cap_.assign(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    if (kinds_[i] != NodeKind::FixedPool) continue;
    for (std::size_t e : graph_.out_edges(i)) fixed_cap_[i] = std::max(fixed_cap_[i], amount_[e]);
  }
}

std::size_t CompiledEconomy::monitored_slot(std::string_view node_id) const {
  const auto idx = graph_.index_of(node_id);
  if (idx) {
    auto it = std::find(monitored_.begin(), monitored_.end(), *idx);
    if (it != monitored_.end()) return static_cast<std::size_t>(it - monitored_.begin());
  }
  throw EconomyError(ErrorCode::InvalidArgument,
                     "node '" + std::string(node_id) + "' is not a monitored pool or drain");
}

SimulationState SimulationState::initial(const CompiledEconomy& economy) {
  SimulationState s;
  s.amounts.assign(economy.node_count(), 0);
  for (std::size_t i = 0; i < economy.node_count(); ++i) s.amounts[i] = economy.graph().node(i).initial;
  for (std::size_t i = 0; i < economy.node_count(); ++i) {
    const std::int64_t cap = economy.fixed_cap(i);
    if (cap >= 0) s.amounts[i] = std::min(s.amounts[i], cap);
  }
  return s;
}

// ---------------------------------------------------------------------------
// Stepper
// ---------------------------------------------------------------------------

class Stepper {
 public:
  Stepper(const CompiledEconomy& eco, SimulationState& state, Rng& rng, FlowLedger* ledger)
      : eco_(eco), g_(eco.graph_), s_(state), rng_(rng), ledger_(ledger),
        staged_(g_.edge_count(), 0) {}

  void run() {
    for (std::size_t src : eco_.sources_)
      for (std::size_t e : g_.out_edges(src)) deliver(e, eco_.amount_[e]);

    std::vector<char> fired(eco_.node_count(), 0);
    bool any = true;
    while (any) {
      any = false;
      for (std::size_t c : eco_.converters_) {
        if (fired[c] || !can_fire(c)) continue;
        fire(c);
        fired[c] = 1;
        any = true;
      }
    }

    for (std::size_t e : eco_.drain_edges_) {
      const std::size_t pool = g_.edge_source(e);
      const std::int64_t w = eco_.amount_[e];
      if (s_.amounts[pool] < w) continue;
      s_.amounts[pool] -= w;
      s_.amounts[g_.edge_target(e)] += w;
      if (ledger_) {
        ledger_->outflow[pool] += w;
        ledger_->inflow[g_.edge_target(e)] += w;
      }
    }

    for (std::size_t i = 0; i < eco_.node_count(); ++i) {
      const std::int64_t cap = eco_.fixed_cap_[i];
      if (cap < 0 || s_.amounts[i] <= cap) continue;
      if (ledger_) ledger_->discarded[i] += s_.amounts[i] - cap;
      s_.amounts[i] = cap;
    }
    ++s_.step;
  }

 private:
  void deliver(std::size_t edge, std::int64_t units) {
    const std::size_t target = g_.edge_target(edge);
    switch (eco_.kinds_[target]) {
      case NodeKind::RandomGate: {
        // The whole batch follows one sampled edge.
        const auto& outs = g_.out_edges(target);
        const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng_);
        std::size_t chosen = outs.back();
        for (std::size_t e : outs) {
          if (u < eco_.gate_cumulative_[e]) {
            chosen = e;
            break;
          }
        }
        deliver(chosen, units);
        break;
      }
      case NodeKind::Converter:
        staged_[edge] += units;
        break;
      default:
        s_.amounts[target] += units;
        if (ledger_) ledger_->inflow[target] += units;
        break;
    }
  }

  bool can_fire(std::size_t converter) const {
    for (std::size_t e : g_.in_edges(converter)) {
      const std::size_t from = g_.edge_source(e);
      if (eco_.kinds_[from] == NodeKind::RandomGate) {
        if (staged_[e] <= 0) return false;
      } else if (s_.amounts[from] < eco_.amount_[e]) {
        return false;
      }
    }
    return true;
  }

  void fire(std::size_t converter) {
    for (std::size_t e : g_.in_edges(converter)) {
      const std::size_t from = g_.edge_source(e);
      if (eco_.kinds_[from] == NodeKind::RandomGate) {
        staged_[e] = 0;
      } else {
        s_.amounts[from] -= eco_.amount_[e];
        if (ledger_) ledger_->outflow[from] += eco_.amount_[e];
      }
    }
    const std::size_t out = g_.out_edges(converter).front();
    deliver(out, eco_.amount_[out]);
  }

  const CompiledEconomy& eco_;
  const EconomyGraph& g_;
  SimulationState& s_;
  Rng& rng_;
  FlowLedger* ledger_;
  std::vector<std::int64_t> staged_;  // gate deliveries waiting at converters; expire at step end
};

SimulationState step(const CompiledEconomy& economy, const SimulationState& state, Rng& rng,
                     FlowLedger* ledger) {
  if (state.amounts.size() != economy.node_count())
    throw EconomyError(ErrorCode::InvalidArgument, "state does not match the economy");
  SimulationState next = state;
  Stepper(economy, next, rng, ledger).run();
  return next;
}

// ---------------------------------------------------------------------------
// Traces
// ---------------------------------------------------------------------------

SimulationTrace::SimulationTrace(std::uint64_t seed, std::size_t steps,
                                 std::vector<std::string> monitored_ids)
    : seed_(seed), steps_(steps), ids_(std::move(monitored_ids)),
      values_((steps + 1) * ids_.size(), 0) {}

std::size_t SimulationTrace::slot_of(std::string_view node_id) const {
  auto it = std::find(ids_.begin(), ids_.end(), node_id);
  if (it == ids_.end())
    throw EconomyError(ErrorCode::InvalidArgument,
                       "node '" + std::string(node_id) + "' is not monitored");
  return static_cast<std::size_t>(it - ids_.begin());
}

std::int64_t SimulationTrace::at(std::size_t t, std::string_view node_id) const {
  if (t > steps_) throw EconomyError(ErrorCode::InvalidArgument, "step beyond trace length");
  return at(t, slot_of(node_id));
}

std::span<const std::int64_t> SimulationTrace::snapshot(std::size_t t) const {
  return std::span<const std::int64_t>(values_).subspan(t * ids_.size(), ids_.size());
}

std::vector<std::int64_t> SimulationTrace::series(std::string_view node_id) const {
  const std::size_t slot = slot_of(node_id);
  std::vector<std::int64_t> out(steps_ + 1);
  for (std::size_t t = 0; t <= steps_; ++t) out[t] = at(t, slot);
  return out;
}

void SimulationTrace::record(std::size_t t, std::span<const std::int64_t> monitored_values) {
  std::copy(monitored_values.begin(), monitored_values.end(),
            values_.begin() + static_cast<std::ptrdiff_t>(t * ids_.size()));
}

SimulationTrace simulate(const CompiledEconomy& economy, std::size_t steps, std::uint64_t seed) {
  if (steps < 1) throw EconomyError(ErrorCode::InvalidArgument, "simulation needs at least one step");
  std::vector<std::string> ids;
  ids.reserve(economy.monitored().size());
  for (std::size_t i : economy.monitored()) ids.push_back(economy.graph().node(i).id);
  SimulationTrace trace(seed, steps, std::move(ids));

  Rng rng(seed);
  SimulationState state = SimulationState::initial(economy);
  std::vector<std::int64_t> row(economy.monitored().size());
  auto snap = [&](std::size_t t) {
    for (std::size_t j = 0; j < row.size(); ++j) row[j] = state.amounts[economy.monitored()[j]];
    trace.record(t, row);
  };
  snap(0);
  for (std::size_t t = 1; t <= steps; ++t) {
    state = step(economy, state, rng);
    snap(t);
  }
  return trace;
}

SimulationTrace simulate(const EconomyGraph& graph, std::size_t steps, std::uint64_t seed) {
  return simulate(CompiledEconomy(graph), steps, seed);
}

RunEnsemble::RunEnsemble(std::vector<SimulationTrace> traces) : traces_(std::move(traces)) {
  for (const auto& t : traces_)
    if (t.steps() != traces_.front().steps() || t.monitored_ids() != traces_.front().monitored_ids())
      throw EconomyError(ErrorCode::InvalidArgument, "ensemble traces must share length and nodes");
}

std::vector<double> RunEnsemble::observe(std::string_view node_id, std::size_t t) const {
  std::vector<double> out;
  out.reserve(traces_.size());
  for (const auto& trace : traces_) out.push_back(static_cast<double>(trace.at(t, node_id)));
  return out;
}

RunEnsemble simulate_ensemble(const CompiledEconomy& economy, std::size_t steps, std::size_t runs,
                              std::uint64_t base_seed, Execution exec) {
  if (runs < 1) throw EconomyError(ErrorCode::InvalidArgument, "ensemble needs at least one run");
  if (steps < 1) throw EconomyError(ErrorCode::InvalidArgument, "simulation needs at least one step");
  std::vector<SimulationTrace> traces(runs, SimulationTrace(0, steps, {}));
  const auto count = static_cast<std::ptrdiff_t>(runs);
  if (exec == Execution::Parallel) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < count; ++i)
      traces[static_cast<std::size_t>(i)] = simulate(economy, steps, base_seed + static_cast<std::uint64_t>(i));
  } else {
    for (std::ptrdiff_t i = 0; i < count; ++i)
      traces[static_cast<std::size_t>(i)] = simulate(economy, steps, base_seed + static_cast<std::uint64_t>(i));
  }
  return RunEnsemble(std::move(traces));
}

RunEnsemble simulate_ensemble(const EconomyGraph& graph, std::size_t steps, std::size_t runs,
                              std::uint64_t base_seed, Execution exec) {
  return simulate_ensemble(CompiledEconomy(graph), steps, runs, base_seed, exec);
}

void write_trace_csv(std::ostream& out, const RunEnsemble& ensemble) {
  out << "run,step,node_id,amount\n";
  for (std::size_t r = 0; r < ensemble.runs(); ++r) {
    const auto& trace = ensemble.traces()[r];
    for (std::size_t t = 0; t <= trace.steps(); ++t)
      for (std::size_t j = 0; j < trace.monitored_ids().size(); ++j)
        out << r << ',' << t << ',' << trace.monitored_ids()[j] << ',' << trace.at(t, j) << '\n';
  }
}

SampleStats sample_stats(std::span<const double> values) {
  SampleStats s;
  if (values.empty()) return s;
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  double sq = 0.0;
  for (double v : values) sq += (v - s.mean) * (v - s.mean);
  s.stddev = std::sqrt(sq / static_cast<double>(values.size()));
  return s;
}

}  // namespace econevo
