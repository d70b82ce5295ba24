#include "ibia/incremental.hpp"

#include <algorithm>
#include <numeric>

#include "ibia/error.hpp"

namespace ibia {

namespace {

constexpr double kSizeSlack = 1e-9;

std::optional<CliqueId> containing_clique(const CliqueTreeForest& ctf, const VarSet& vars) {
  std::optional<CliqueId> best;
  double best_size = 0.0;
  for (const auto& [id, c] : ctf.cliques()) {
    if (!is_subset(vars, c.vars)) continue;
    const double s = clique_size(c.vars, ctf.cards());
    if (!best || s < best_size) {
      best = id;
      best_size = s;
    }
  }
  return best;
}

// Smallest node containing `vars`, lowest index on ties; -1 if none.
int host_node(const std::vector<SubtreePlan::Node>& nodes, const VarSet& vars,
              const std::vector<int>& cards) {
  int best = -1;
  double best_size = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (!is_subset(vars, nodes[i].vars)) continue;
    const double s = clique_size(nodes[i].vars, cards);
    if (best < 0 || s < best_size) {
      best = static_cast<int>(i);
      best_size = s;
    }
  }
  return best;
}

VarSet group_scope(const std::vector<Factor>& group) {
  std::vector<VarId> all;
  for (const auto& f : group) all.insert(all.end(), f.scope.begin(), f.scope.end());
  return make_varset(std::move(all));
}

}  // namespace

namespace {

// Edges of the minimal subgraph covering each factor's in-forest scope.
std::vector<std::set<EdgeKey>> subgraph_edges(const std::vector<Factor>& pending,
                                              const CliqueTreeForest& ctf) {
  const VarSet fvars = ctf.vars();
  std::vector<std::set<EdgeKey>> out(pending.size());
  for (std::size_t i = 0; i < pending.size(); ++i) {
    const VarSet v = set_intersection(pending[i].vars(), fvars);
    if (v.empty()) continue;
    const auto sg = msg(ctf, v);
    const std::set<CliqueId> in(sg.begin(), sg.end());
    for (CliqueId a : sg) {
      for (CliqueId b : ctf.neighbors(a)) {
        if (a < b && in.count(b)) out[i].insert({a, b});
      }
    }
  }
  return out;
}

bool share_edge(const std::set<EdgeKey>& a, const std::set<EdgeKey>& b) {
  return std::any_of(a.begin(), a.end(), [&](const EdgeKey& e) { return b.count(e) != 0; });
}

}  // namespace

std::vector<std::vector<int>> group_factors(const std::vector<Factor>& pending,
                                            const CliqueTreeForest& ctf, Grouping mode) {
  const auto edges = subgraph_edges(pending, ctf);
  const int n = static_cast<int>(pending.size());
  std::vector<std::vector<int>> out;
  if (mode == Grouping::ConsecutiveRuns) {
    std::set<EdgeKey> run;
    for (int i = 0; i < n; ++i) {
      const auto& e = edges[static_cast<std::size_t>(i)];
      if (!out.empty() && share_edge(e, run)) {
        out.back().push_back(i);
        run.insert(e.begin(), e.end());
      } else {
        out.push_back({i});
        run = e;
      }
    }
    return out;
  }

  std::vector<int> parent(static_cast<std::size_t>(n));
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&parent](int x) {
    while (parent[static_cast<std::size_t>(x)] != x) x = parent[static_cast<std::size_t>(x)];
    return x;
  };
  std::map<EdgeKey, int> owner;
  for (int i = 0; i < n; ++i) {
    for (const auto& e : edges[static_cast<std::size_t>(i)]) {
      auto [it, fresh] = owner.emplace(e, i);
      if (fresh) continue;
      const int ra = find(it->second), rb = find(i);
      if (ra != rb) parent[static_cast<std::size_t>(std::max(ra, rb))] = std::min(ra, rb);
    }
  }
  std::map<int, std::vector<int>> by_root;
  for (int i = 0; i < n; ++i) by_root[find(i)].push_back(i);
  for (auto& [root, members] : by_root) out.push_back(std::move(members));
  return out;
}

SubtreePlan construct_subtree(const CliqueTreeForest& ctf, const std::vector<Factor>& group,
                              double mcs_p) {
  SubtreePlan plan;
  const VarSet v = set_intersection(group_scope(group), ctf.vars());
  if (!v.empty()) plan.sg_min = msg(ctf, v);

  EliminationGraph eg = build_elimination_graph(ctf, plan.sg_min, group);
  plan.elimination_set = eg.elimination_set;
  plan.retained = eg.retained;
  const auto shape = eliminate_to_ct(eg.graph, min_fill_order(eg.graph).order);
  for (const auto& c : shape.cliques) plan.nodes.push_back({c, -1});
  plan.edges = shape.edges;

  const auto& cards = ctf.cards();
  for (CliqueId rid : plan.retained) {
    const VarSet& cv = ctf.clique(rid).vars;
    const VarSet key = set_intersection(cv, plan.elimination_set);
    int replace = -1;
    for (std::size_t i = 0; i < plan.nodes.size(); ++i) {
      if (plan.nodes[i].reuse < 0 && is_subset(key, plan.nodes[i].vars) &&
          is_subset(plan.nodes[i].vars, cv)) {
        replace = static_cast<int>(i);
        break;
      }
    }
    if (replace >= 0) {
      plan.nodes[static_cast<std::size_t>(replace)] = {cv, rid};
      continue;
    }
    const int host = host_node(plan.nodes, key, cards);
    if (host < 0)
      throw InvariantError("no clique of the new subtree holds retained clique " +
                           std::to_string(rid));
    plan.nodes.push_back({cv, rid});
    plan.edges.emplace_back(host, static_cast<int>(plan.nodes.size()) - 1);
  }

  const std::set<CliqueId> retained(plan.retained.begin(), plan.retained.end());
  for (CliqueId id : plan.sg_min) {
    if (retained.count(id)) continue;
    for (int fi : ctf.clique(id).factors) {
      const int host = host_node(plan.nodes, ctf.factor(fi).vars(), cards);
      if (host < 0)
        throw InvariantError("no clique of the new subtree holds factor " + std::to_string(fi));
      plan.old_factors.emplace_back(fi, host);
    }
  }
  for (const auto& f : group) {
    const int host = host_node(plan.nodes, f.vars(), cards);
    if (host < 0) throw InvariantError("no clique of the new subtree holds a new factor");
    plan.new_factor_nodes.push_back(host);
  }

  for (const auto& n : plan.nodes) plan.max_size = std::max(plan.max_size, clique_size(n.vars, cards));
  plan.within_bound = plan.max_size <= mcs_p + kSizeSlack;
  return plan;
}

std::vector<CliqueId> splice(CliqueTreeForest& ctf, const SubtreePlan& plan,
                             const std::vector<Factor>& group) {
  const std::set<CliqueId> sg(plan.sg_min.begin(), plan.sg_min.end());
  const std::set<CliqueId> retained(plan.retained.begin(), plan.retained.end());

  std::vector<EdgeKey> internal;
  for (const auto& [k, s] : ctf.sepsets()) {
    if (sg.count(k.first) && sg.count(k.second)) internal.push_back(k);
  }
  for (const auto& [a, b] : internal) ctf.disconnect(a, b);

  std::vector<std::pair<CliqueId, VarSet>> outside;
  for (CliqueId id : plan.sg_min) {
    if (retained.count(id)) continue;
    for (CliqueId n : ctf.neighbors(id)) outside.emplace_back(n, ctf.sepset(id, n).vars);
    ctf.remove_clique(id);
  }

  std::vector<CliqueId> ids;
  for (const auto& node : plan.nodes) ids.push_back(node.reuse >= 0 ? node.reuse : ctf.add_clique(node.vars));
  for (const auto& [a, b] : plan.edges)
    ctf.connect(ids[static_cast<std::size_t>(a)], ids[static_cast<std::size_t>(b)]);
  for (const auto& [fi, node] : plan.old_factors) ctf.assign(fi, ids[static_cast<std::size_t>(node)]);
  for (std::size_t k = 0; k < group.size(); ++k)
    ctf.assign(ctf.add_factor(group[k]), ids[static_cast<std::size_t>(plan.new_factor_nodes[k])]);

  for (const auto& [n, sep] : outside) {
    const int host = host_node(plan.nodes, sep, ctf.cards());
    if (host < 0)
      throw InvariantError("no clique of the new subtree holds the sepset to clique " +
                           std::to_string(n));
    ctf.connect(n, ids[static_cast<std::size_t>(host)]);
  }
  return ids;
}

BuildResult build_ctf(CliqueTreeForest& ctf, std::vector<Factor> pending,
                      const BuildOptions& options) {
  BuildResult out;
  ctf.clear_beliefs();
  for (const auto& f : pending) {
    if (f.empty_scope()) throw InvalidArgument("build_ctf: factor with empty scope");
    if (clique_size(f.vars(), ctf.cards()) > options.mcs_p + kSizeSlack)
      throw InfeasibleError("a factor's scope is larger than the clique size bound");
  }

  auto check = [&](const char* what) {
    if (!options.check_each_step) return;
    const auto r = validate_ctf(ctf);
    if (!r.ok()) {
      std::string msg = std::string("invalid forest after ") + what + ":";
      for (const auto& v : r.violations) msg += " " + v + ";";
      throw InvariantError(msg);
    }
  };

  while (!pending.empty()) {
    std::vector<Factor> rest;
    for (auto& f : pending) {
      if (auto host = containing_clique(ctf, f.vars())) {
        ctf.assign(ctf.add_factor(std::move(f)), *host);
        ++out.stats.assigned_directly;
      } else {
        rest.push_back(std::move(f));
      }
    }
    pending = std::move(rest);
    if (pending.empty()) break;

    std::vector<int> members = group_factors(pending, ctf, options.grouping).front();
    std::vector<bool> used(pending.size(), false);
    while (!members.empty()) {
      std::vector<Factor> group;
      for (int i : members) group.push_back(pending[static_cast<std::size_t>(i)]);
      const SubtreePlan plan = construct_subtree(ctf, group, options.mcs_p);
      ++out.stats.retriangulations;
      out.stats.elimination_set_sizes.push_back(static_cast<int>(plan.elimination_set.size()));
      out.stats.retained_counts.push_back(static_cast<int>(plan.retained.size()));
      if (plan.within_bound) {
        splice(ctf, plan, group);
        ++out.stats.groups_added;
        for (int i : members) used[static_cast<std::size_t>(i)] = true;
        check("adding a group");
        break;
      }
      std::vector<int> evict;
      if (options.eviction == EvictionPolicy::WholeGroup) {
        evict = members;
      } else {
        int worst = members.front();
        double worst_size = -1.0;
        for (int i : members) {
          const double s = clique_size(pending[static_cast<std::size_t>(i)].vars(), ctf.cards());
          if (s >= worst_size) {
            worst = i;
            worst_size = s;
          }
        }
        evict = {worst};
      }
      for (int i : evict) {
        out.deferred.push_back(pending[static_cast<std::size_t>(i)]);
        used[static_cast<std::size_t>(i)] = true;
        members.erase(std::find(members.begin(), members.end(), i));
        ++out.stats.evictions;
      }
    }
    rest.clear();
    for (std::size_t i = 0; i < pending.size(); ++i) {
      if (!used[i]) rest.push_back(std::move(pending[i]));
    }
    pending = std::move(rest);
  }
  return out;
}

}  // namespace ibia
