#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "econevo/economy.hpp"
#include "econevo/simulation.hpp"

namespace econevo {

// ---------------------------------------------------------------------------
// Fitness
// ---------------------------------------------------------------------------

/// Agreement ratio of an observed and a reference amount, in [0,1].
/// Symmetric; prop(0,0) is 1.
double prop(double observed, double reference);

/// alpha + mean_i prop(observed_i, target).
double fitness_f1(std::span<const double> observed, double target, double alpha);
/// alpha + mean_i prop(a_i, b_i); run i of one side is paired with run i of the other.
double fitness_paired(std::span<const double> a, std::span<const double> b, double alpha);

double fitness_f1(const RunEnsemble& ensemble, std::string_view pool, std::size_t t, double target,
                  double alpha);
double fitness_f2(const RunEnsemble& ensemble_a, const RunEnsemble& ensemble_b,
                  std::string_view pool_a, std::string_view pool_b, std::size_t t, double alpha);
double fitness_intra(const RunEnsemble& ensemble, std::string_view pool_a, std::string_view pool_b,
                     std::size_t t, double alpha);

/// A genome terminates the search once its fitness reaches 1.
bool is_balanced(double fitness);

// ---------------------------------------------------------------------------
// Objective and parameters
// ---------------------------------------------------------------------------

enum class ObjectiveKind { AbsoluteValue, IntraEconomyPair, InterEconomyPair };

std::string_view to_string(ObjectiveKind kind);

struct BalanceObjective {
  ObjectiveKind kind = ObjectiveKind::AbsoluteValue;
  std::string pool;
  std::string pool2;
  double target_value = 0.0;
  std::size_t observe_step = 1;
  std::size_t sim_length = 1;
  std::size_t runs = 10;
  double alpha = 0.0;

  std::size_t economies() const { return kind == ObjectiveKind::InterEconomyPair ? 2 : 1; }
  /// Throws EconomyError(InvalidArgument) on any mismatch with `graphs`.
  void check(std::span<const EconomyGraph> graphs) const;
};

struct MutationParams {
  int amount_delta_max = 3;         // delta uniform in [1, max]
  double probability_delta_max = 0.25;  // delta uniform in (0, max]
};

struct BalanceParams {
  std::size_t population_size = 10;
  std::size_t max_generations = 100;
  std::uint64_t seed = 0;
  std::size_t mutations_per_generation = 1;
  MutationParams mutation;
  std::size_t eval_runs = 0;  // fresh runs for the final statistics; 0 means objective.runs
  Execution exec = Execution::Parallel;
};

struct ObjectiveDocument {
  BalanceObjective objective;
  BalanceParams params;
};

ObjectiveDocument load_objective(std::string_view json_text);

// ---------------------------------------------------------------------------
// Genome
// ---------------------------------------------------------------------------

enum class GeneKind { Amount, Probability };

constexpr double kMinProbabilityGene = 0.01;
constexpr double kMaxAmountGene = 1.0e6;

struct GeneSpec {
  GeneKind kind = GeneKind::Amount;
  bool is_static = false;
  double fixed_value = 0.0;  // meaningful for static genes
  std::size_t economy = 0;
  std::size_t edge = 0;
};

using GenomeWeightVector = std::vector<double>;

/// Maps genome indices onto the concatenated edge lists of one or two
/// economies. Input graphs are gate-normalized on construction.
class GenomeLayout {
 public:
  explicit GenomeLayout(std::vector<EconomyGraph> graphs);

  std::size_t size() const { return genes_.size(); }
  const std::vector<GeneSpec>& genes() const { return genes_; }
  const std::vector<std::size_t>& free_genes() const { return free_; }
  const std::vector<EconomyGraph>& base_graphs() const { return graphs_; }

  /// Declared weights of the input graphs as a genome.
  GenomeWeightVector declared() const;
  GenomeWeightVector random_genome(Rng& rng) const;

  /// Writes a genome into copies of the base graphs. Free gate genes share
  /// whatever probability the gate's static edges leave over.
  std::vector<EconomyGraph> write(const GenomeWeightVector& genome) const;

 private:
  std::vector<EconomyGraph> graphs_;
  std::vector<GeneSpec> genes_;
  std::vector<std::size_t> free_;
};

/// Results <= 0 become 1 for amounts and kMinProbabilityGene for probabilities.
double clamp_gene(double value, GeneKind kind);

enum class CrossoverOp { TakeFirst, TakeSecond, Sum, Difference };

double apply_crossover_op(CrossoverOp op, double first, double second, GeneKind kind);

/// Per free gene, one of the four crossover ops with equal probability.
GenomeWeightVector crossover(const GenomeLayout& layout, const GenomeWeightVector& parent_k,
                             const GenomeWeightVector& parent_l, Rng& rng);

double apply_mutation(double value, double delta, bool add, GeneKind kind);

/// Mutates one random free gene of `genome`. Returns false if none exists.
bool mutate_genome(const GenomeLayout& layout, GenomeWeightVector& genome, Rng& rng,
                   const MutationParams& params = {});

/// One random individual, one random free gene, +/- delta. Returns the index
/// of the mutated individual.
std::optional<std::size_t> mutate(const GenomeLayout& layout,
                                  std::vector<GenomeWeightVector>& population, Rng& rng,
                                  const MutationParams& params = {});

// ---------------------------------------------------------------------------
// Search
// ---------------------------------------------------------------------------

enum class Termination { FitnessReached, Timeout };

std::string_view to_string(Termination t);

struct ObservationStats {
  std::string economy_pool;
  SampleStats stats;
};

struct BalanceReport {
  GenomeWeightVector best_weights;
  double best_fitness = 0.0;
  double initial_best_fitness = 0.0;
  std::size_t generations = 0;
  Termination terminated_by = Termination::Timeout;
  std::vector<double> history;  // best fitness per generation, generation 0 first
  std::vector<ObservationStats> observations;
  std::vector<EconomyGraph> balanced;
  double elapsed_ms = 0.0;

  bool balanced_result() const { return terminated_by == Termination::FitnessReached; }
  bool improved() const { return best_fitness > initial_best_fitness; }
  bool initially_balanced() const { return is_balanced(initial_best_fitness); }
};

/// Mean agreement of one genome under the objective, before adding alpha.
double evaluate_genome(const GenomeLayout& layout, const BalanceObjective& objective,
                       const GenomeWeightVector& genome, std::uint64_t seed,
                       std::size_t runs = 0);

BalanceReport balance(std::vector<EconomyGraph> graphs, const BalanceObjective& objective,
                      const BalanceParams& params);

/// True iff the history never decreases.
bool history_nondecreasing(std::span<const double> history);

}  // namespace econevo
