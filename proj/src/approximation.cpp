#include "ibia/approximation.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <tuple>

#include "ibia/calibration.hpp"
#include "ibia/error.hpp"

namespace ibia {

namespace {

constexpr double kSizeSlack = 1e-9;

std::vector<CliqueId> cliques_with(const CliqueTreeForest& ctf, VarId v) {
  std::vector<CliqueId> out;
  for (const auto& [id, c] : ctf.cliques()) {
    if (contains(c.vars, v)) out.push_back(id);
  }
  return out;
}

const Factor& belief_of(const CliqueTreeForest& ctf, CliqueId id) {
  const auto& b = ctf.clique(id).belief;
  if (!b) throw InvalidArgument("clique " + std::to_string(id) + " has no belief");
  return *b;
}

void absorb(CliqueTreeForest& ctf, CliqueId from, CliqueId into) {
  const auto nbrs = ctf.neighbors(from);
  for (CliqueId n : nbrs) {
    if (n == into) continue;
    auto belief = ctf.sepset(from, n).belief;
    ctf.disconnect(from, n);
    ctf.connect(n, into).belief = std::move(belief);
  }
  auto& dst = ctf.clique(into).factors;
  const auto& src = ctf.clique(from).factors;
  dst.insert(dst.end(), src.begin(), src.end());
  ctf.remove_clique(from);
}

bool connected_within(const CliqueTreeForest& ctf, const std::vector<CliqueId>& part) {
  if (part.empty()) return true;
  const std::set<CliqueId> in(part.begin(), part.end());
  std::set<CliqueId> seen{part.front()};
  std::deque<CliqueId> q{part.front()};
  while (!q.empty()) {
    const CliqueId x = q.front();
    q.pop_front();
    for (CliqueId n : ctf.neighbors(x)) {
      if (in.count(n) && seen.insert(n).second) q.push_back(n);
    }
  }
  return seen.size() == in.size();
}

}  // namespace

InterfaceSet interface_variables(const CliqueTreeForest& ctf, const std::vector<Factor>& remaining) {
  std::vector<VarId> rv;
  for (const auto& f : remaining) rv.insert(rv.end(), f.scope.begin(), f.scope.end());
  InterfaceSet iv;
  iv.ivs = set_intersection(ctf.vars(), make_varset(std::move(rv)));
  for (const auto& [id, c] : ctf.cliques()) iv.per_clique[id] = set_intersection(c.vars, iv.ivs);
  return iv;
}

double pairwise_mi(const Factor& belief, VarId x, VarId y) {
  if (x == y) throw InvalidArgument("pairwise_mi: x and y must differ");
  if (!belief.has(x) || !belief.has(y)) throw InvalidArgument("pairwise_mi: variable not in scope");
  const Factor m = reorder(marginalize_onto(belief, make_varset({x, y})), {x, y});
  const double z = log_norm_constant(m);
  if (z == kLogZero) return 0.0;
  const int nx = m.dims[0], ny = m.dims[1];
  std::vector<double> lx(static_cast<std::size_t>(nx), kLogZero), ly(static_cast<std::size_t>(ny), kLogZero);
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < ny; ++j) {
      const double l = m.log_values[static_cast<std::size_t>(i * ny + j)] - z;
      lx[static_cast<std::size_t>(i)] = log_add(lx[static_cast<std::size_t>(i)], l);
      ly[static_cast<std::size_t>(j)] = log_add(ly[static_cast<std::size_t>(j)], l);
    }
  }
  double mi = 0.0;
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < ny; ++j) {
      const double l = m.log_values[static_cast<std::size_t>(i * ny + j)] - z;
      if (l == kLogZero) continue;
      mi += std::exp(l) * (l - lx[static_cast<std::size_t>(i)] - ly[static_cast<std::size_t>(j)]);
    }
  }
  return mi;
}

double local_mi(const CliqueTreeForest& ctf, CliqueId c, VarId v, const InterfaceSet& iv) {
  const VarSet others = without(set_intersection(ctf.clique(c).vars, iv.ivs), v);
  double best = kLogZero;
  for (VarId x : others) best = std::max(best, pairwise_mi(belief_of(ctf, c), v, x));
  return best;
}

double max_mi(const CliqueTreeForest& ctf, VarId v, const InterfaceSet& iv) {
  double best = kLogZero;
  for (CliqueId c : cliques_with(ctf, v)) best = std::max(best, local_mi(ctf, c, v, iv));
  return best;
}

int remove_non_maximal(CliqueTreeForest& ctf) {
  int removed = 0;
  for (bool changed = true; changed;) {
    changed = false;
    for (const auto& [id, c] : ctf.cliques()) {
      if (c.vars.empty() && ctf.neighbors(id).empty()) {
        ctf.log_mass += log_norm_constant(belief_of(ctf, id));
        ctf.remove_clique(id);
        ++removed;
        changed = true;
        break;
      }
    }
    if (changed) continue;
    for (const auto& [k, s] : ctf.sepsets()) {
      const VarSet& a = ctf.clique(k.first).vars;
      const VarSet& b = ctf.clique(k.second).vars;
      // k.first < k.second, so equal cliques fold into the lower id.
      if (is_subset(b, a)) {
        absorb(ctf, k.second, k.first);
      } else if (is_subset(a, b)) {
        absorb(ctf, k.first, k.second);
      } else {
        continue;
      }
      ++removed;
      changed = true;
      break;
    }
  }
  return removed;
}

std::optional<ExactStep> exact_marginalize(CliqueTreeForest& ctf, VarId v, double mcs_im) {
  ExactStep step;
  step.var = v;
  step.cliques = cliques_with(ctf, v);
  if (step.cliques.empty()) throw InvalidArgument("exact_marginalize: variable not in the forest");

  if (step.cliques.size() == 1) {
    Clique& c = ctf.clique(step.cliques.front());
    step.collapsed = c.vars;
    c.belief = marginalize(belief_of(ctf, c.id), v);
    c.vars = without(c.vars, v);
    step.result = c.id;
  } else {
    std::vector<VarId> all;
    for (CliqueId id : step.cliques) {
      const auto& vs = ctf.clique(id).vars;
      all.insert(all.end(), vs.begin(), vs.end());
    }
    step.collapsed = make_varset(std::move(all));
    if (clique_size(step.collapsed, ctf.cards()) > mcs_im + kSizeSlack) return std::nullopt;

    const VarSet rest = without(step.collapsed, v);
    Factor b = reorder(marginalize(joint_distribution(ctf, step.cliques), v), rest);
    const std::set<CliqueId> in(step.cliques.begin(), step.cliques.end());
    std::vector<std::pair<CliqueId, std::optional<Factor>>> outside;
    for (CliqueId id : step.cliques) {
      for (CliqueId n : ctf.neighbors(id)) {
        if (!in.count(n)) outside.emplace_back(n, ctf.sepset(id, n).belief);
      }
    }
    for (CliqueId id : step.cliques) ctf.remove_clique(id);
    step.result = ctf.add_clique(rest);
    ctf.clique(step.result).belief = std::move(b);
    for (auto& [n, belief] : outside) ctf.connect(n, step.result).belief = std::move(belief);
  }
  remove_non_maximal(ctf);
  if (!ctf.has_clique(step.result)) step.result = -1;
  return step;
}

bool keeps_connected(const CliqueTreeForest& ctf, VarId v, const std::vector<CliqueId>& retain) {
  const std::set<CliqueId> in(retain.begin(), retain.end());
  for (const auto& [k, s] : ctf.sepsets()) {
    if (!contains(s.vars, v)) continue;
    if (in.count(k.first) && in.count(k.second)) continue;
    if (s.vars.size() == 1) return false;
  }
  return true;
}

void local_marginalize(CliqueTreeForest& ctf, VarId v, const std::vector<CliqueId>& retain) {
  const auto holders = cliques_with(ctf, v);
  for (CliqueId id : retain) {
    if (!contains(ctf.clique(id).vars, v))
      throw InvalidArgument("local_marginalize: retained clique does not hold the variable");
  }
  if (!connected_within(ctf, retain))
    throw InvalidArgument("local_marginalize: retained cliques are not connected");
  if (!keeps_connected(ctf, v, retain))
    throw InvalidArgument("local_marginalize: would disconnect a tree");

  const std::set<CliqueId> in(retain.begin(), retain.end());
  for (CliqueId id : holders) {
    if (in.count(id)) continue;
    Clique& c = ctf.clique(id);
    c.belief = marginalize(belief_of(ctf, id), v);
    c.vars = without(c.vars, v);
  }
  for (const auto& [k, s0] : ctf.sepsets()) {
    if (!contains(s0.vars, v) || (in.count(k.first) && in.count(k.second))) continue;
    Sepset& s = ctf.sepset(k.first, k.second);
    if (!s.belief) throw InvalidArgument("local_marginalize: sepset without belief");
    s.belief = marginalize(*s.belief, v);
    s.vars = without(s.vars, v);
  }
  remove_non_maximal(ctf);
}

std::optional<std::vector<CliqueId>> choose_retained_subtree(const CliqueTreeForest& ctf, VarId v,
                                                             const InterfaceSet& iv, double mcs_im) {
  const auto holders = cliques_with(ctf, v);
  std::set<CliqueId> eligible;
  for (CliqueId id : holders) {
    if (clique_size(ctf.clique(id).vars, ctf.cards()) <= mcs_im + kSizeSlack) eligible.insert(id);
  }

  std::optional<std::vector<CliqueId>> best;
  double best_score = 0.0;
  std::set<CliqueId> seen;
  for (CliqueId start : eligible) {
    if (seen.count(start)) continue;
    std::vector<CliqueId> comp{start};
    seen.insert(start);
    for (std::size_t i = 0; i < comp.size(); ++i) {
      for (CliqueId n : ctf.neighbors(comp[i])) {
        if (eligible.count(n) && seen.insert(n).second) comp.push_back(n);
      }
    }
    std::sort(comp.begin(), comp.end());
    if (!keeps_connected(ctf, v, comp)) continue;
    double score = kLogZero;
    for (CliqueId id : comp) score = std::max(score, local_mi(ctf, id, v, iv));
    // Components are visited by ascending smallest id, so ties keep the earlier one.
    if (!best || score > best_score || (score == best_score && comp.size() > best->size())) {
      best = comp;
      best_score = score;
    }
  }
  if (best) return best;
  if (!iv.contains(v) && keeps_connected(ctf, v, {})) return std::vector<CliqueId>{};
  return std::nullopt;
}

namespace {

// Each current tree's log NC must match a distinct starting one, and the
// total mass (trees plus folded mass) must be unchanged.
void check_nc(const std::vector<double>& before, double mass_before, const CliqueTreeForest& ctf,
              const char* what) {
  auto after = tree_log_ncs(ctf);
  std::vector<bool> used(before.size(), false);
  for (double z : after) {
    bool matched = false;
    for (std::size_t i = 0; i < before.size() && !matched; ++i) {
      if (!used[i] && log_values_agree(before[i], z, 1e-9)) used[i] = matched = true;
    }
    if (!matched) throw InvariantError(std::string("tree normalization constant changed after ") + what);
  }
  double sb = mass_before, sa = ctf.log_mass;
  for (double z : before) sb += z;
  for (double z : after) sa += z;
  if (!log_values_agree(sb, sa, 1e-9))
    throw InvariantError(std::string("total mass changed after ") + what);
}

void check_forest(const CliqueTreeForest& ctf, const char* what) {
  const auto r = validate_ctf(ctf);
  if (!r.ok()) {
    std::string msg = std::string("invalid forest after ") + what + ":";
    for (const auto& v : r.violations) msg += " " + v + ";";
    throw InvariantError(msg);
  }
  const auto c = check_calibration(ctf, 1e-9);
  if (!c.ok()) throw InvariantError(std::string("calibration lost after ") + what);
}

}  // namespace

ApproxReport approximate_ctf(CliqueTreeForest& ctf, const std::vector<Factor>& remaining,
                             const ApproxOptions& options, std::mt19937_64& rng) {
  if (!ctf.calibrated) throw InvalidArgument("approximate_ctf: forest is not calibrated");
  ApproxReport report;
  ctf.clear_factors();
  report.max_size_before = max_clique_size(ctf);

  std::vector<double> nc_before;
  double mass_before = ctf.log_mass;
  if (options.check_each_step) nc_before = tree_log_ncs(ctf);
  auto checkpoint = [&](const char* what) {
    if (!options.check_each_step) return;
    check_forest(ctf, what);
    check_nc(nc_before, mass_before, ctf, what);
  };

  const InterfaceSet iv = interface_variables(ctf, remaining);
  report.ivs = iv.ivs;

  // Keep only the subgraph needed for the joint over the interface.
  {
    const auto keep_list = iv.ivs.empty() ? std::vector<CliqueId>{} : msg(ctf, iv.ivs);
    const std::set<CliqueId> keep(keep_list.begin(), keep_list.end());
    for (const auto& tree : ctf.trees()) {
      const bool any = std::any_of(tree.begin(), tree.end(), [&](CliqueId id) { return keep.count(id) != 0; });
      if (!any) {
        ctf.log_mass += log_nc(ctf, tree);
        ++report.dropped_trees;
      } else {
        report.pruned_cliques += static_cast<int>(
            std::count_if(tree.begin(), tree.end(), [&](CliqueId id) { return keep.count(id) == 0; }));
      }
      for (CliqueId id : tree) {
        if (!keep.count(id)) ctf.remove_clique(id);
      }
    }
    checkpoint("restricting to the interface subgraph");
  }

  // Exact marginalization until no non-interface variable qualifies.
  for (;;) {
    const auto index = ctf.var_index();
    std::optional<VarId> pick;
    for (const auto& [v, ids] : index) {
      if (!iv.contains(v) && ids.size() == 1) {
        pick = v;
        break;
      }
    }
    if (!pick) {
      double best = 0.0;
      for (const auto& [v, ids] : index) {
        if (iv.contains(v) || ids.size() < 2) continue;
        std::vector<VarId> all;
        for (CliqueId id : ids) {
          const auto& vs = ctf.clique(id).vars;
          all.insert(all.end(), vs.begin(), vs.end());
        }
        const double s = clique_size(make_varset(std::move(all)), ctf.cards());
        if (s <= options.mcs_im + kSizeSlack && (!pick || s < best)) {
          pick = v;
          best = s;
        }
      }
    }
    if (!pick) break;
    auto step = exact_marginalize(ctf, *pick, options.mcs_im);
    if (!step) throw InvariantError("exact marginalization refused a qualifying variable");
    report.exact.push_back(std::move(*step));
    checkpoint("exact marginalization");
  }

  // Local marginalization of the largest cliques.
  for (;;) {
    std::vector<std::pair<double, CliqueId>> oversize;
    for (const auto& [id, c] : ctf.cliques()) {
      const double s = clique_size(c.vars, ctf.cards());
      if (s > options.mcs_im + kSizeSlack) oversize.emplace_back(-s, id);
    }
    if (oversize.empty()) break;
    std::sort(oversize.begin(), oversize.end());

    bool progress = false;
    for (const auto& [neg, target] : oversize) {
      std::vector<VarId> nivs, ivs;
      for (VarId v : ctf.clique(target).vars) (iv.contains(v) ? ivs : nivs).push_back(v);
      if (options.heuristic == Heuristic::MaxMI) {
        auto by_mi = [&](std::vector<VarId>& vs) {
          std::vector<std::pair<double, VarId>> keyed;
          for (VarId v : vs) keyed.emplace_back(max_mi(ctf, v, iv), v);
          std::sort(keyed.begin(), keyed.end());
          for (std::size_t i = 0; i < vs.size(); ++i) vs[i] = keyed[i].second;
        };
        by_mi(nivs);
        by_mi(ivs);
      } else {
        std::shuffle(nivs.begin(), nivs.end(), rng);
        std::shuffle(ivs.begin(), ivs.end(), rng);
      }
      nivs.insert(nivs.end(), ivs.begin(), ivs.end());
      for (VarId v : nivs) {
        auto retain = choose_retained_subtree(ctf, v, iv, options.mcs_im);
        if (!retain) continue;
        local_marginalize(ctf, v, *retain);
        report.local.push_back({v, target, *retain});
        checkpoint("local marginalization");
        progress = true;
        break;
      }
      if (progress) break;
    }
    if (!progress) {
      report.bound_met = false;
      break;
    }
  }
  report.max_size_after = max_clique_size(ctf);
  return report;
}

void reparameterize(CliqueTreeForest& ctf) {
  ctf.clear_factors();
  for (const auto& tree : ctf.trees()) {
    const CliqueId root = tree.front();
    std::vector<std::pair<CliqueId, CliqueId>> order{{root, -1}};
    for (std::size_t i = 0; i < order.size(); ++i) {
      const auto [c, p] = order[i];
      for (CliqueId n : ctf.neighbors(c)) {
        if (n != p) order.emplace_back(n, c);
      }
    }
    for (const auto& [c, p] : order) {
      Factor f = belief_of(ctf, c);
      if (p >= 0) {
        const auto& mu = ctf.sepset(c, p).belief;
        if (!mu) throw InvalidArgument("reparameterize: sepset without belief");
        f = divide(f, *mu);
      }
      ctf.assign(ctf.add_factor(std::move(f)), c);
    }
  }
}

}  // namespace ibia
