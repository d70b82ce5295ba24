#include "ibia/ctf.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <sstream>

#include "ibia/error.hpp"

namespace ibia {

namespace {

std::string fmt_set(const VarSet& s, const std::vector<std::string>& names = {}) {
  std::string out = "{";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ",";
    const auto v = static_cast<std::size_t>(s[i]);
    out += v < names.size() ? names[v] : std::to_string(s[i]);
  }
  return out + "}";
}

std::size_t state_count(const VarSet& vars, const std::vector<int>& cards, std::size_t cap) {
  std::size_t n = 1;
  for (VarId v : vars) {
    n *= static_cast<std::size_t>(cards.at(static_cast<std::size_t>(v)));
    if (n > cap) throw CapExceeded("joint table exceeds the state cap");
  }
  return n;
}

std::vector<int> dims_of(const VarSet& vars, const std::vector<int>& cards) {
  std::vector<int> d;
  d.reserve(vars.size());
  for (VarId v : vars) d.push_back(cards.at(static_cast<std::size_t>(v)));
  return d;
}

}  // namespace

CliqueId CliqueTreeForest::add_clique(VarSet vars) {
  Clique c;
  c.id = next_id_;
  c.vars = std::move(vars);
  insert_clique(std::move(c));
  return next_id_ - 1;
}

void CliqueTreeForest::insert_clique(Clique c) {
  if (cliques_.count(c.id)) throw InvariantError("duplicate clique id " + std::to_string(c.id));
  next_id_ = std::max(next_id_, c.id + 1);
  adj_[c.id];
  cliques_.emplace(c.id, std::move(c));
}

void CliqueTreeForest::remove_clique(CliqueId id) {
  const auto nbrs = neighbors(id);
  for (CliqueId n : nbrs) disconnect(id, n);
  adj_.erase(id);
  cliques_.erase(id);
}

void CliqueTreeForest::set_clique_vars(CliqueId id, VarSet vars) {
  Clique& c = clique(id);
  c.vars = std::move(vars);
  for (CliqueId n : neighbors(id)) {
    Sepset& s = sepset(id, n);
    s.vars = set_intersection(c.vars, clique(n).vars);
    s.belief.reset();
  }
}

Sepset& CliqueTreeForest::connect(CliqueId a, CliqueId b) {
  if (a == b) throw InvariantError("self loop on clique " + std::to_string(a));
  Sepset s;
  const EdgeKey k = edge_key(a, b);
  s.a = k.first;
  s.b = k.second;
  s.vars = set_intersection(clique(a).vars, clique(b).vars);
  adj_[a].insert(b);
  adj_[b].insert(a);
  auto [it, _] = sepsets_.insert_or_assign(k, std::move(s));
  return it->second;
}

void CliqueTreeForest::disconnect(CliqueId a, CliqueId b) {
  sepsets_.erase(edge_key(a, b));
  adj_[a].erase(b);
  adj_[b].erase(a);
}

Clique& CliqueTreeForest::clique(CliqueId id) {
  auto it = cliques_.find(id);
  if (it == cliques_.end()) throw InvariantError("no clique " + std::to_string(id));
  return it->second;
}

const Clique& CliqueTreeForest::clique(CliqueId id) const {
  auto it = cliques_.find(id);
  if (it == cliques_.end()) throw InvariantError("no clique " + std::to_string(id));
  return it->second;
}

Sepset& CliqueTreeForest::sepset(CliqueId a, CliqueId b) {
  auto it = sepsets_.find(edge_key(a, b));
  if (it == sepsets_.end())
    throw InvariantError("no edge " + std::to_string(a) + "-" + std::to_string(b));
  return it->second;
}

const Sepset& CliqueTreeForest::sepset(CliqueId a, CliqueId b) const {
  auto it = sepsets_.find(edge_key(a, b));
  if (it == sepsets_.end())
    throw InvariantError("no edge " + std::to_string(a) + "-" + std::to_string(b));
  return it->second;
}

const std::set<CliqueId>& CliqueTreeForest::neighbors(CliqueId id) const {
  auto it = adj_.find(id);
  if (it == adj_.end()) throw InvariantError("no clique " + std::to_string(id));
  return it->second;
}

int CliqueTreeForest::add_factor(Factor f) {
  factors_.push_back(std::move(f));
  return static_cast<int>(factors_.size()) - 1;
}

void CliqueTreeForest::assign(int factor_index, CliqueId id) {
  clique(id).factors.push_back(factor_index);
}

void CliqueTreeForest::clear_factors() {
  factors_.clear();
  for (auto& [id, c] : cliques_) c.factors.clear();
}

std::vector<std::vector<CliqueId>> CliqueTreeForest::trees() const {
  std::vector<std::vector<CliqueId>> out;
  std::set<CliqueId> seen;
  for (const auto& [id, c] : cliques_) {
    if (seen.count(id)) continue;
    auto t = tree_of(id);
    seen.insert(t.begin(), t.end());
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<CliqueId> CliqueTreeForest::tree_of(CliqueId id) const {
  std::vector<CliqueId> out;
  std::set<CliqueId> seen{id};
  std::deque<CliqueId> q{id};
  while (!q.empty()) {
    CliqueId x = q.front();
    q.pop_front();
    out.push_back(x);
    for (CliqueId n : neighbors(x)) {
      if (seen.insert(n).second) q.push_back(n);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

VarSet CliqueTreeForest::vars() const {
  std::vector<VarId> all;
  for (const auto& [id, c] : cliques_) all.insert(all.end(), c.vars.begin(), c.vars.end());
  return make_varset(std::move(all));
}

std::map<VarId, std::vector<CliqueId>> CliqueTreeForest::var_index() const {
  std::map<VarId, std::vector<CliqueId>> idx;
  for (const auto& [id, c] : cliques_) {
    for (VarId v : c.vars) idx[v].push_back(id);
  }
  return idx;
}

void CliqueTreeForest::clear_beliefs() {
  for (auto& [id, c] : cliques_) c.belief.reset();
  for (auto& [k, s] : sepsets_) s.belief.reset();
  calibrated = false;
}

double clique_size(const VarSet& vars, const std::vector<int>& cards) {
  double bits = 0.0;
  for (VarId v : vars) {
    if (v < 0 || static_cast<std::size_t>(v) >= cards.size())
      throw InvalidArgument("clique_size: unknown variable " + std::to_string(v));
    bits += std::log2(static_cast<double>(cards[static_cast<std::size_t>(v)]));
  }
  return bits;
}

double max_clique_size(const CliqueTreeForest& ctf) {
  double m = 0.0;
  for (const auto& [id, c] : ctf.cliques()) m = std::max(m, clique_size(c.vars, ctf.cards()));
  return m;
}

ValidityReport validate_ctf(const CliqueTreeForest& ctf) {
  ValidityReport r;
  auto fail = [&r](bool& flag, std::string msg) {
    flag = false;
    r.violations.push_back(std::move(msg));
  };

  // Forest: an edge that joins two already-connected cliques closes a cycle.
  std::map<CliqueId, CliqueId> parent;
  for (const auto& [id, c] : ctf.cliques()) parent[id] = id;
  auto find = [&parent](CliqueId x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& [k, s] : ctf.sepsets()) {
    const CliqueId a = find(k.first), b = find(k.second);
    if (a == b) {
      fail(r.forest, "cycle through edge " + std::to_string(k.first) + "-" + std::to_string(k.second));
    } else {
      parent[std::max(a, b)] = std::min(a, b);
    }
    const VarSet expect = set_intersection(ctf.clique(k.first).vars, ctf.clique(k.second).vars);
    if (expect != s.vars)
      fail(r.sepsets_exact, "sepset " + std::to_string(k.first) + "-" + std::to_string(k.second) +
                                " is " + fmt_set(s.vars) + ", intersection is " + fmt_set(expect));
  }

  for (const auto& tree : ctf.trees()) {
    for (CliqueId i : tree) {
      for (CliqueId j : tree) {
        if (i == j) continue;
        const VarSet& a = ctf.clique(i).vars;
        const VarSet& b = ctf.clique(j).vars;
        // Equal cliques are reported once.
        if (is_subset(a, b) && (a != b || i < j))
          fail(r.maximal, "clique " + std::to_string(i) + " " + fmt_set(a) + " is contained in clique " +
                              std::to_string(j) + " " + fmt_set(b));
      }
    }
    std::map<VarId, std::vector<CliqueId>> holders;
    for (CliqueId i : tree) {
      for (VarId v : ctf.clique(i).vars) holders[v].push_back(i);
    }
    for (const auto& [v, ids] : holders) {
      std::set<CliqueId> in(ids.begin(), ids.end());
      std::set<CliqueId> seen{ids.front()};
      std::deque<CliqueId> q{ids.front()};
      while (!q.empty()) {
        CliqueId x = q.front();
        q.pop_front();
        for (CliqueId n : ctf.neighbors(x)) {
          if (in.count(n) && seen.insert(n).second) q.push_back(n);
        }
      }
      if (seen.size() != in.size())
        fail(r.rip, "cliques containing variable " + std::to_string(v) + " are not connected");
    }
  }

  std::vector<int> owners(ctf.factors().size(), 0);
  for (const auto& [id, c] : ctf.cliques()) {
    for (int fi : c.factors) {
      if (fi < 0 || static_cast<std::size_t>(fi) >= owners.size()) {
        fail(r.factor_coverage, "clique " + std::to_string(id) + " references missing factor " +
                                    std::to_string(fi));
        continue;
      }
      ++owners[static_cast<std::size_t>(fi)];
      if (!is_subset(ctf.factor(fi).vars(), c.vars))
        fail(r.factor_coverage, "factor " + std::to_string(fi) + " " + fmt_set(ctf.factor(fi).vars()) +
                                    " is not inside clique " + std::to_string(id) + " " +
                                    fmt_set(c.vars));
    }
  }
  for (std::size_t i = 0; i < owners.size(); ++i) {
    if (owners[i] != 1)
      fail(r.factor_coverage, "factor " + std::to_string(i) + " is assigned to " +
                                  std::to_string(owners[i]) + " cliques");
  }
  return r;
}

std::vector<CliqueId> msg(const CliqueTreeForest& ctf, const VarSet& query) {
  const VarSet vars = make_varset(query);
  const VarSet all = ctf.vars();
  for (VarId v : vars) {
    if (!contains(all, v))
      throw InvalidArgument("msg: variable " + std::to_string(v) + " is not in the forest");
  }
  std::vector<CliqueId> out;
  for (const auto& tree : ctf.trees()) {
    std::set<CliqueId> live(tree.begin(), tree.end());
    std::map<CliqueId, VarSet> content;
    bool any = false;
    for (CliqueId id : tree) {
      content[id] = set_intersection(ctf.clique(id).vars, vars);
      any = any || !content[id].empty();
    }
    if (!any) continue;

    auto live_degree = [&](CliqueId id) {
      int d = 0;
      for (CliqueId n : ctf.neighbors(id)) d += live.count(n) ? 1 : 0;
      return d;
    };
    auto live_neighbor = [&](CliqueId id) {
      for (CliqueId n : ctf.neighbors(id)) {
        if (live.count(n)) return n;
      }
      return -1;
    };

    // Steiner subtree: strip unmarked leaves.
    bool changed = true;
    while (changed) {
      changed = false;
      for (auto it = live.begin(); it != live.end();) {
        if (content[*it].empty() && live_degree(*it) <= 1) {
          it = live.erase(it);
          changed = true;
        } else {
          ++it;
        }
      }
    }
    // Prune leaves whose content is covered by their neighbour.
    changed = true;
    while (changed) {
      changed = false;
      for (auto it = live.rbegin(); it != live.rend(); ++it) {
        const CliqueId id = *it;
        if (live.size() > 1 && live_degree(id) == 1 &&
            is_subset(content[id], content[live_neighbor(id)])) {
          live.erase(id);
          changed = true;
          break;
        }
      }
    }
    out.insert(out.end(), live.begin(), live.end());
  }
  std::sort(out.begin(), out.end());
  return out;
}

CliqueTreeForest subforest(const CliqueTreeForest& ctf, const std::vector<CliqueId>& ids) {
  CliqueTreeForest out(ctf.cards());
  std::set<CliqueId> keep(ids.begin(), ids.end());
  for (CliqueId id : ids) {
    Clique c = ctf.clique(id);
    std::vector<int> fs;
    for (int fi : c.factors) fs.push_back(out.add_factor(ctf.factor(fi)));
    c.factors = std::move(fs);
    out.insert_clique(std::move(c));
  }
  for (const auto& [k, s] : ctf.sepsets()) {
    if (keep.count(k.first) && keep.count(k.second)) out.connect(k.first, k.second).belief = s.belief;
  }
  out.calibrated = ctf.calibrated;
  return out;
}

Factor joint_distribution(const CliqueTreeForest& ctf, const std::vector<CliqueId>& tree,
                          std::size_t cap) {
  std::vector<VarId> all;
  for (CliqueId id : tree) {
    const auto& v = ctf.clique(id).vars;
    all.insert(all.end(), v.begin(), v.end());
  }
  const VarSet u = make_varset(std::move(all));
  state_count(u, ctf.cards(), cap);
  Factor joint = Factor::scalar(0.0);
  for (CliqueId id : tree) {
    const Clique& c = ctf.clique(id);
    if (!c.belief) throw InvalidArgument("joint_distribution: clique without belief");
    joint = product(joint, *c.belief);
  }
  std::set<CliqueId> in(tree.begin(), tree.end());
  for (const auto& [k, s] : ctf.sepsets()) {
    if (!in.count(k.first) || !in.count(k.second)) continue;
    if (!s.belief) throw InvalidArgument("joint_distribution: sepset without belief");
    joint = divide(joint, *s.belief);
  }
  return reorder(joint, u);
}

Factor assigned_product(const CliqueTreeForest& ctf, const std::vector<CliqueId>& cliques,
                        std::size_t cap) {
  std::vector<VarId> all;
  for (CliqueId id : cliques) {
    const auto& v = ctf.clique(id).vars;
    all.insert(all.end(), v.begin(), v.end());
  }
  const VarSet u = make_varset(std::move(all));
  state_count(u, ctf.cards(), cap);
  Factor out = Factor::constant(u, dims_of(u, ctf.cards()), 0.0);
  for (CliqueId id : cliques) {
    for (int fi : ctf.clique(id).factors) out = product(out, ctf.factor(fi));
  }
  return reorder(out, u);
}

std::string to_dot(const CliqueTreeForest& ctf, const std::vector<std::string>& names) {
  std::ostringstream out;
  out << "graph ctf {\n  node [shape=box];\n";
  for (const auto& [id, c] : ctf.cliques())
    out << "  c" << id << " [label=\"C" << id << " " << fmt_set(c.vars, names) << "\"];\n";
  for (const auto& [k, s] : ctf.sepsets())
    out << "  c" << k.first << " -- c" << k.second << " [label=\"" << fmt_set(s.vars, names)
        << "\"];\n";
  out << "}\n";
  return out.str();
}

}  // namespace ibia
