#pragma once

// Clique tree forests: storage, structural checks, minimal subgraphs and
// small-instance joint reconstruction.

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "ibia/factor.hpp"

namespace ibia {

using CliqueId = int;

struct Clique {
  CliqueId id = -1;
  VarSet vars;
  std::vector<int> factors;  // indices into the forest's factor store
  std::optional<Factor> belief;
};

struct Sepset {
  CliqueId a = -1;  // a < b
  CliqueId b = -1;
  VarSet vars;
  std::optional<Factor> belief;
};

using EdgeKey = std::pair<CliqueId, CliqueId>;

inline EdgeKey edge_key(CliqueId x, CliqueId y) {
  return x < y ? EdgeKey{x, y} : EdgeKey{y, x};
}

class CliqueTreeForest {
 public:
  CliqueTreeForest() = default;
  explicit CliqueTreeForest(std::vector<int> cards) : cards_(std::move(cards)) {}

  const std::vector<int>& cards() const noexcept { return cards_; }
  int card(VarId v) const { return cards_.at(static_cast<std::size_t>(v)); }

  CliqueId add_clique(VarSet vars);
  // Inserts a clique under a caller-chosen id (used when copying sub-forests).
  void insert_clique(Clique c);
  // Removes the clique and its incident edges. Assigned factors are left
  // unassigned; the caller reassigns them.
  void remove_clique(CliqueId id);
  // Sets the clique's variables; incident sepsets are recomputed as
  // intersections and their beliefs dropped.
  void set_clique_vars(CliqueId id, VarSet vars);

  // Adds an edge whose sepset is the intersection of the two cliques.
  Sepset& connect(CliqueId a, CliqueId b);
  void disconnect(CliqueId a, CliqueId b);

  bool has_clique(CliqueId id) const { return cliques_.count(id) != 0; }
  bool has_edge(CliqueId a, CliqueId b) const { return sepsets_.count(edge_key(a, b)) != 0; }
  Clique& clique(CliqueId id);
  const Clique& clique(CliqueId id) const;
  Sepset& sepset(CliqueId a, CliqueId b);
  const Sepset& sepset(CliqueId a, CliqueId b) const;
  const std::set<CliqueId>& neighbors(CliqueId id) const;

  const std::map<CliqueId, Clique>& cliques() const noexcept { return cliques_; }
  const std::map<EdgeKey, Sepset>& sepsets() const noexcept { return sepsets_; }
  std::size_t num_cliques() const noexcept { return cliques_.size(); }
  bool empty() const noexcept { return cliques_.empty(); }

  int add_factor(Factor f);
  const Factor& factor(int index) const { return factors_.at(static_cast<std::size_t>(index)); }
  const std::vector<Factor>& factors() const noexcept { return factors_; }
  void assign(int factor_index, CliqueId id);
  // Drops every stored factor and clears all clique assignments.
  void clear_factors();

  // Connected components as sorted clique-id lists, ordered by smallest id.
  std::vector<std::vector<CliqueId>> trees() const;
  // Clique ids of the tree containing `id`.
  std::vector<CliqueId> tree_of(CliqueId id) const;
  VarSet vars() const;
  // var -> ids of cliques containing it (ascending).
  std::map<VarId, std::vector<CliqueId>> var_index() const;

  // Drops all clique and sepset beliefs.
  void clear_beliefs();

  // Log mass of trees that were collapsed to a scalar and removed.
  double log_mass = 0.0;
  bool calibrated = false;
  CliqueId next_id() const noexcept { return next_id_; }

 private:
  std::vector<int> cards_;
  std::map<CliqueId, Clique> cliques_;
  std::map<EdgeKey, Sepset> sepsets_;
  std::map<CliqueId, std::set<CliqueId>> adj_;
  std::vector<Factor> factors_;
  CliqueId next_id_ = 0;
};

// log2 of the product of member cardinalities. Throws InvalidArgument for a
// variable without a cardinality.
double clique_size(const VarSet& vars, const std::vector<int>& cards);
double max_clique_size(const CliqueTreeForest& ctf);

struct ValidityReport {
  bool forest = true;
  bool maximal = true;
  bool rip = true;
  bool sepsets_exact = true;
  bool factor_coverage = true;
  std::vector<std::string> violations;

  bool ok() const { return forest && maximal && rip && sepsets_exact && factor_coverage; }
};

// Checks every validity condition independently and lists all violations.
// Maximality is checked within each tree.
ValidityReport validate_ctf(const CliqueTreeForest& ctf);

// Minimal subgraph needed for the joint beliefs of `vars`: the Steiner
// subtree of the cliques containing them, then leaves whose restriction to
// `vars` is a subset of their remaining neighbour's are pruned recursively.
// Returns ascending clique ids. Throws InvalidArgument for a variable that
// is not in the forest.
std::vector<CliqueId> msg(const CliqueTreeForest& ctf, const VarSet& vars);

// Copy of the given cliques, the edges among them, their beliefs and their
// assigned factors.
CliqueTreeForest subforest(const CliqueTreeForest& ctf, const std::vector<CliqueId>& ids);

// prod(beliefs) / prod(sepset beliefs) over one calibrated tree as a single
// table over the sorted union of its variables. Throws CapExceeded when the
// table would have more than `cap` entries.
Factor joint_distribution(const CliqueTreeForest& ctf, const std::vector<CliqueId>& tree,
                          std::size_t cap = std::size_t{1} << 22);

// Product of the factors assigned to the given cliques, over the sorted union
// of the cliques' variables.
Factor assigned_product(const CliqueTreeForest& ctf, const std::vector<CliqueId>& cliques,
                        std::size_t cap = std::size_t{1} << 22);

// Graphviz rendering: cliques as nodes, sepsets as edge labels.
std::string to_dot(const CliqueTreeForest& ctf, const std::vector<std::string>& names = {});

}  // namespace ibia
