#pragma once

// Shrinks a calibrated forest to a smaller clique size bound while keeping
// it valid, calibrated and with unchanged per-tree normalization constants,
// then turns its beliefs back into factors for the next build step.

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ibia/ctf.hpp"

namespace ibia {

struct InterfaceSet {
  VarSet ivs;
  std::map<CliqueId, VarSet> per_clique;  // interface variables of each clique

  bool contains(VarId v) const { return ibia::contains(ivs, v); }
};

// Variables of the forest that also occur in `remaining`.
InterfaceSet interface_variables(const CliqueTreeForest& ctf, const std::vector<Factor>& remaining);

// Mutual information (natural log) between x and y under the normalized
// pairwise marginal of `belief`. Zero for an all-zero belief.
double pairwise_mi(const Factor& belief, VarId x, VarId y);

// Largest MI between v and another interface variable of the clique; -inf
// when the clique has none.
double local_mi(const CliqueTreeForest& ctf, CliqueId c, VarId v, const InterfaceSet& iv);

// Largest local_mi over the cliques containing v.
double max_mi(const CliqueTreeForest& ctf, VarId v, const InterfaceSet& iv);

// Absorbs every clique contained in a neighbour into that neighbour; its
// other neighbours are reconnected with their sepset beliefs unchanged. A
// clique left with no variables and no neighbours has its mass moved to
// ctf.log_mass. Returns the number of cliques removed.
int remove_non_maximal(CliqueTreeForest& ctf);

struct ExactStep {
  VarId var = -1;
  VarSet collapsed;                 // union of the cliques holding var, var included
  std::vector<CliqueId> cliques;    // cliques that held var
  CliqueId result = -1;             // clique holding the marginal, -1 if absorbed
};

// Sums an interface-free variable out of the forest exactly. A variable in
// one clique is summed out of that clique. A variable in several cliques is
// handled only when the union of those cliques has size <= mcs_im; the
// cliques are merged into one and the variable summed out. Returns nullopt
// when skipped.
std::optional<ExactStep> exact_marginalize(CliqueTreeForest& ctf, VarId v, double mcs_im);

// Whether summing v out of every clique outside `retain` keeps each tree
// connected: every edge holding v that is not inside `retain` must keep a
// variable other than v.
bool keeps_connected(const CliqueTreeForest& ctf, VarId v, const std::vector<CliqueId>& retain);

// Sums v out of the beliefs and sepsets outside `retain` (a connected part of
// the cliques holding v). Throws InvalidArgument when `retain` is not such a
// part or the result would disconnect a tree.
void local_marginalize(CliqueTreeForest& ctf, VarId v, const std::vector<CliqueId>& retain);

// Retained subtree for v: connected groups of v's cliques that fit in
// mcs_im and keep the tree connected, preferring the one with the clique of
// largest local MI, then more cliques, then the lowest clique id. An empty
// vector means v may be dropped everywhere (non-interface variables only);
// nullopt means no legal choice.
std::optional<std::vector<CliqueId>> choose_retained_subtree(const CliqueTreeForest& ctf, VarId v,
                                                             const InterfaceSet& iv, double mcs_im);

enum class Heuristic { MaxMI, Random };

struct ApproxOptions {
  double mcs_im = 15.0;
  Heuristic heuristic = Heuristic::MaxMI;
  std::uint64_t seed = 0;
  // Run validity/calibration/NC checks after every modification and throw
  // InvariantError on failure.
  bool check_each_step = false;
};

struct LocalStep {
  VarId var = -1;
  CliqueId target = -1;              // oversize clique being reduced
  std::vector<CliqueId> retained;    // subtree that kept var
};

struct ApproxReport {
  VarSet ivs;
  int pruned_cliques = 0;     // cliques outside the interface subgraph
  int dropped_trees = 0;      // trees with no interface variable, folded into log_mass
  std::vector<ExactStep> exact;
  std::vector<LocalStep> local;
  double max_size_before = 0.0;
  double max_size_after = 0.0;
  bool bound_met = true;      // false when the loop stopped with oversize cliques
};

// Reduces a calibrated forest in place. Assigned factors are discarded (the
// beliefs carry the distribution); call reparameterize before the next
// build. `rng` drives the Random heuristic.
ApproxReport approximate_ctf(CliqueTreeForest& ctf, const std::vector<Factor>& remaining,
                             const ApproxOptions& options, std::mt19937_64& rng);

// Replaces the factor store with one factor per clique: the root (lowest id)
// of each tree gets its belief, every other clique its belief divided by the
// sepset belief towards the root.
void reparameterize(CliqueTreeForest& ctf);

}  // namespace ibia
