#pragma once

// Incremental construction of a clique tree forest under a clique size
// bound: factors are added group by group, re-triangulating only the part of
// the forest they touch.

#include <optional>
#include <vector>

#include "ibia/ctf.hpp"
#include "ibia/triangulation.hpp"

namespace ibia {

// How pending factors are batched into groups that are added together. Both
// modes look at the edges of the minimal subgraph covering each factor's
// in-forest scope; a factor whose subgraph has no edge (no forest variable,
// or a single clique) never joins another factor through it.
enum class Grouping {
  // Runs of consecutive factors: a factor joins the current run when its
  // subgraph shares an edge with the subgraphs of the run so far.
  ConsecutiveRuns,
  // Transitive closure of edge sharing over all pending factors; groups are
  // ordered by their first member.
  Transitive,
};

// Groups of indices into `pending`, members in pending order.
std::vector<std::vector<int>> group_factors(const std::vector<Factor>& pending,
                                            const CliqueTreeForest& ctf,
                                            Grouping mode = Grouping::ConsecutiveRuns);

// Replacement for the impacted subgraph. Nodes with `reuse` >= 0 are existing
// retained cliques carried over unchanged.
struct SubtreePlan {
  struct Node {
    VarSet vars;
    CliqueId reuse = -1;
  };
  std::vector<CliqueId> sg_min;
  VarSet elimination_set;
  std::vector<CliqueId> retained;
  std::vector<Node> nodes;
  std::vector<std::pair<int, int>> edges;         // node indices
  std::vector<std::pair<int, int>> old_factors;   // (factor store index, node)
  std::vector<int> new_factor_nodes;              // node per group factor
  double max_size = 0.0;
  bool within_bound = true;
};

// Builds the replacement subtree for adding `group` to the forest. The plan
// is always complete; `within_bound` is false when some triangulated clique
// is larger than mcs_p.
SubtreePlan construct_subtree(const CliqueTreeForest& ctf, const std::vector<Factor>& group,
                              double mcs_p);

// Replaces the plan's subgraph by its nodes, reconnects the cliques that
// were adjacent to it and stores/assigns the group's factors. Returns the
// ids of the cliques created or reused.
std::vector<CliqueId> splice(CliqueTreeForest& ctf, const SubtreePlan& plan,
                             const std::vector<Factor>& group);

// How a group that does not fit is shrunk before the next attempt.
enum class EvictionPolicy {
  LargestFirst,  // drop the factor with the largest clique size, retry
  WholeGroup,    // defer every factor of the group
};

struct BuildStats {
  int retriangulations = 0;
  int assigned_directly = 0;
  int groups_added = 0;
  int evictions = 0;
  std::vector<int> elimination_set_sizes;
  std::vector<int> retained_counts;
};

struct BuildResult {
  std::vector<Factor> deferred;  // in the order they were deferred
  BuildStats stats;
};

struct BuildOptions {
  double mcs_p = 20.0;
  EvictionPolicy eviction = EvictionPolicy::LargestFirst;
  Grouping grouping = Grouping::ConsecutiveRuns;
  // Check validity after every modification (slow; used by tests).
  bool check_each_step = false;
};

// Adds as many of `pending` as fit. Beliefs are dropped. Throws
// InfeasibleError when a single factor is larger than mcs_p and
// InvariantError when a step leaves the forest invalid.
BuildResult build_ctf(CliqueTreeForest& ctf, std::vector<Factor> pending,
                      const BuildOptions& options);

}  // namespace ibia
