#pragma once

// Partition function estimation: the build / calibrate / approximate loop
// per connected component, exact oracles and error reporting.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "ibia/approximation.hpp"
#include "ibia/incremental.hpp"
#include "ibia/model.hpp"

namespace ibia {

struct EstimateOptions {
  double mcs_p = 20.0;
  std::optional<double> mcs_im;  // defaults to mcs_p - 5
  Heuristic heuristic = Heuristic::MaxMI;
  std::uint64_t seed = 0;
  // Raise mcs_p by one whenever a build step cannot add any factor, instead
  // of failing.
  bool escalate_mcs = false;
  // A build step that would add nothing under WholeGroup is retried with
  // LargestFirst before escalating or failing.
  EvictionPolicy eviction = EvictionPolicy::LargestFirst;
  Grouping grouping = Grouping::Transitive;
  // Validate the forest after every build and approximation step.
  bool check_invariants = false;

  double effective_mcs_im() const { return mcs_im ? *mcs_im : mcs_p - 5.0; }
};

// One calibrated forest of the sequence, plus the approximation that
// followed it (absent for the last one).
struct StepRecord {
  double mcs_p = 0.0;  // bound used for this build (after any escalation)
  int factors_added = 0;
  int deferred = 0;
  double max_clique_size = 0.0;
  int num_cliques = 0;
  int num_trees = 0;
  std::vector<double> tree_log_nc;
  BuildStats build;
  std::optional<ApproxReport> approx;
  int approx_cliques = 0;   // cliques left after approximation
  int approx_trees = 0;
};

struct ComponentResult {
  VarSet vars;
  int num_factors = 0;
  double log_pr = 0.0;  // natural log
  std::vector<StepRecord> steps;
};

struct PrEstimate {
  double log10_pr = 0.0;  // -inf when the model has zero mass
  double log_pr = 0.0;
  double scalar_log_mass = 0.0;  // natural log
  std::vector<ComponentResult> components;
  double peak_clique_size = 0.0;
  bool approximated = false;
  double wall_seconds = 0.0;  // excluded from deterministic traces
};

// Throws InfeasibleError when a factor does not fit the bound or a build
// step adds nothing without escalation, InvalidArgument when mcs_im >= mcs_p.
PrEstimate estimate_log_pr(const Model& model, const EstimateOptions& options);

// The first forest: scanning in input order, each factor whose scope is
// disjoint from all earlier picks becomes its own clique. The other factors
// are returned in order as pending.
struct InitialForest {
  CliqueTreeForest ctf;
  std::vector<Factor> pending;
};
InitialForest initial_forest(const std::vector<int>& cards, const std::vector<Factor>& factors);

// Exhaustive natural-log partition function. Throws CapExceeded above
// `cap` joint states.
double brute_force_log_pr(const Model& model, std::size_t cap = std::size_t{1} << 22);

struct FullCompileStats {
  double max_clique_size = 0.0;
  std::optional<double> log_pr;  // natural log; set when the largest table fits the cap
};

// Min-fill compile of the whole induced graph, with exact inference when
// the largest clique has at most `cap` states.
FullCompileStats full_compile_stats(const Model& model, std::size_t cap = std::size_t{1} << 22);

// Largest clique of the first forest built at `mcs_p`, next to the min-fill
// compile of exactly the factors it holds.
struct BuildComparison {
  double mcs_incremental = 0.0;
  double mcs_full = 0.0;
  int factors_added = 0;
};
BuildComparison compare_first_build(const Model& component, double mcs_p);

struct ErrorValue {
  double error = 0.0;  // |log10 est - log10 ref| rounded to 3 decimals
  bool comparable = true;
};

ErrorValue compare_error(double est_log10, double ref_log10);

}  // namespace ibia
