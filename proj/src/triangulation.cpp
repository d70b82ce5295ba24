#include "ibia/triangulation.hpp"

#include <algorithm>
#include <numeric>
#include <tuple>

#include "ibia/error.hpp"

namespace ibia {

void add_clique_edges(UGraph& g, const VarSet& vars) {
  for (VarId a : vars) {
    auto& na = g[a];
    for (VarId b : vars) {
      if (a != b) na.insert(b);
    }
  }
}

UGraph induced_graph(const std::vector<Factor>& factors) {
  UGraph g;
  for (const auto& f : factors) add_clique_edges(g, f.vars());
  return g;
}

std::size_t edge_count(const UGraph& g) {
  std::size_t n = 0;
  for (const auto& [v, nb] : g) n += nb.size();
  return n / 2;
}

namespace {

std::size_t fill_of(const UGraph& g, VarId v) {
  const auto& nb = g.at(v);
  std::size_t missing = 0;
  for (auto i = nb.begin(); i != nb.end(); ++i) {
    const auto& ni = g.at(*i);
    for (auto j = std::next(i); j != nb.end(); ++j) {
      if (!ni.count(*j)) ++missing;
    }
  }
  return missing;
}

}  // namespace

EliminationOrder min_fill_order(const UGraph& graph) {
  UGraph g = graph;
  using Key = std::tuple<std::size_t, std::size_t, VarId>;  // fill, degree, id
  std::set<Key> queue;
  std::map<VarId, Key> key;
  auto refresh = [&](VarId v) {
    auto it = key.find(v);
    if (it != key.end()) queue.erase(it->second);
    Key k{fill_of(g, v), g.at(v).size(), v};
    key[v] = k;
    queue.insert(k);
  };
  for (const auto& [v, nb] : g) refresh(v);

  EliminationOrder out;
  out.order.reserve(g.size());
  while (!queue.empty()) {
    const auto [fill, deg, v] = *queue.begin();
    queue.erase(queue.begin());
    key.erase(v);
    out.order.push_back(v);
    out.fill_edges += fill;

    const std::set<VarId> nb = g.at(v);
    for (VarId a : nb) {
      g[a].erase(v);
      for (VarId b : nb) {
        if (a != b) g[a].insert(b);
      }
    }
    g.erase(v);
    // Only the neighbourhood and its neighbours can see their fill change.
    std::set<VarId> touched(nb.begin(), nb.end());
    for (VarId a : nb) touched.insert(g.at(a).begin(), g.at(a).end());
    for (VarId t : touched) refresh(t);
  }
  return out;
}

CliqueTreeShape eliminate_to_ct(const UGraph& graph, const std::vector<VarId>& order) {
  if (order.size() != graph.size())
    throw InvalidArgument("eliminate_to_ct: order does not cover the graph");
  UGraph g = graph;
  std::map<VarId, int> pos;
  for (std::size_t i = 0; i < order.size(); ++i) pos[order[i]] = static_cast<int>(i);

  const int n = static_cast<int>(order.size());
  std::vector<VarSet> cl(static_cast<std::size_t>(n));
  std::vector<int> parent(static_cast<std::size_t>(n), -1);
  for (int i = 0; i < n; ++i) {
    const VarId v = order[static_cast<std::size_t>(i)];
    const std::set<VarId> nb = g.at(v);
    std::vector<VarId> c(nb.begin(), nb.end());
    c.push_back(v);
    cl[static_cast<std::size_t>(i)] = make_varset(std::move(c));
    int first = -1;
    for (VarId u : nb) {
      const int p = pos.at(u);
      if (first < 0 || p < first) first = p;
    }
    parent[static_cast<std::size_t>(i)] = first;
    for (VarId a : nb) {
      g[a].erase(v);
      for (VarId b : nb) {
        if (a != b) g[a].insert(b);
      }
    }
    g.erase(v);
  }

  std::vector<std::vector<int>> children(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    if (parent[static_cast<std::size_t>(i)] >= 0)
      children[static_cast<std::size_t>(parent[static_cast<std::size_t>(i)])].push_back(i);
  }
  std::vector<int> rep(static_cast<std::size_t>(n));
  std::iota(rep.begin(), rep.end(), 0);
  auto find = [&rep](int x) {
    while (rep[static_cast<std::size_t>(x)] != x) x = rep[static_cast<std::size_t>(x)];
    return x;
  };
  // A non-maximal elimination clique is contained in one of its children's
  // (representative) cliques; that child takes its place in the tree.
  for (int i = 0; i < n; ++i) {
    for (int j : children[static_cast<std::size_t>(i)]) {
      const int c = find(j);
      if (is_subset(cl[static_cast<std::size_t>(i)], cl[static_cast<std::size_t>(c)])) {
        rep[static_cast<std::size_t>(i)] = c;
        parent[static_cast<std::size_t>(c)] = parent[static_cast<std::size_t>(i)];
        break;
      }
    }
  }

  CliqueTreeShape out;
  std::map<int, int> index;
  for (int i = 0; i < n; ++i) {
    if (find(i) != i) continue;
    index[i] = static_cast<int>(out.cliques.size());
    out.cliques.push_back(cl[static_cast<std::size_t>(i)]);
  }
  for (int i = 0; i < n; ++i) {
    if (find(i) != i || parent[static_cast<std::size_t>(i)] < 0) continue;
    out.edges.emplace_back(index.at(i), index.at(find(parent[static_cast<std::size_t>(i)])));
  }
  return out;
}

CliqueTreeForest to_forest(const CliqueTreeShape& shape, const std::vector<int>& cards) {
  CliqueTreeForest f(cards);
  std::vector<CliqueId> ids;
  for (const auto& c : shape.cliques) ids.push_back(f.add_clique(c));
  for (const auto& [a, b] : shape.edges)
    f.connect(ids[static_cast<std::size_t>(a)], ids[static_cast<std::size_t>(b)]);
  return f;
}

EliminationGraph build_elimination_graph(const CliqueTreeForest& ctf,
                                         const std::vector<CliqueId>& sg_min,
                                         const std::vector<Factor>& new_factors) {
  EliminationGraph out;
  const std::set<CliqueId> in(sg_min.begin(), sg_min.end());
  std::vector<VarId> se;
  for (const auto& [k, s] : ctf.sepsets()) {
    if (in.count(k.first) && in.count(k.second)) se.insert(se.end(), s.vars.begin(), s.vars.end());
  }
  for (const auto& f : new_factors) se.insert(se.end(), f.scope.begin(), f.scope.end());
  out.elimination_set = make_varset(std::move(se));

  for (const auto& f : new_factors) add_clique_edges(out.graph, f.vars());
  for (CliqueId id : sg_min) {
    const VarSet& vars = ctf.clique(id).vars;
    add_clique_edges(out.graph, set_intersection(vars, out.elimination_set));
    if (!is_subset(vars, out.elimination_set)) out.retained.push_back(id);
  }
  return out;
}

double min_fill_max_clique_size(const UGraph& g, const std::vector<int>& cards) {
  const auto shape = eliminate_to_ct(g, min_fill_order(g).order);
  double m = 0.0;
  for (const auto& c : shape.cliques) m = std::max(m, clique_size(c, cards));
  return m;
}

}  // namespace ibia
