#pragma once

// Min-fill elimination and clique tree assembly, plus the elimination graph
// used when a group of factors is spliced into an existing forest.

#include <map>
#include <set>
#include <vector>

#include "ibia/ctf.hpp"
#include "ibia/factor.hpp"

namespace ibia {

using UGraph = std::map<VarId, std::set<VarId>>;

// Adds every variable of `vars` as a node and connects them pairwise.
void add_clique_edges(UGraph& g, const VarSet& vars);
UGraph induced_graph(const std::vector<Factor>& factors);
std::size_t edge_count(const UGraph& g);

struct EliminationOrder {
  std::vector<VarId> order;
  std::size_t fill_edges = 0;
};

// Greedy min-fill; ties go to fewer neighbours, then the lower variable id.
// Fill counts are updated only around the eliminated vertex.
EliminationOrder min_fill_order(const UGraph& g);

// Maximal elimination cliques connected into one tree per connected
// component of g.
struct CliqueTreeShape {
  std::vector<VarSet> cliques;
  std::vector<std::pair<int, int>> edges;  // indices into cliques
};

CliqueTreeShape eliminate_to_ct(const UGraph& g, const std::vector<VarId>& order);

// Convenience: the shape as a forest with no factors.
CliqueTreeForest to_forest(const CliqueTreeShape& shape, const std::vector<int>& cards);

struct EliminationGraph {
  UGraph graph;
  VarSet elimination_set;
  std::vector<CliqueId> retained;  // cliques of sg_min with a variable outside the set
};

// sg_min lists clique ids of `ctf`; edges among them are taken from ctf.
EliminationGraph build_elimination_graph(const CliqueTreeForest& ctf,
                                         const std::vector<CliqueId>& sg_min,
                                         const std::vector<Factor>& new_factors);

// log2 state count of the largest clique a min-fill compile of g produces.
double min_fill_max_clique_size(const UGraph& g, const std::vector<int>& cards);

}  // namespace ibia
