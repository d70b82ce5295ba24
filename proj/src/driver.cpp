#include "ibia/driver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <random>

#include "ibia/calibration.hpp"
#include "ibia/error.hpp"
#include "ibia/triangulation.hpp"

namespace ibia {

namespace {

void check_forest(const CliqueTreeForest& ctf, const char* what) {
  const auto r = validate_ctf(ctf);
  if (r.ok()) return;
  std::string msg = std::string("invalid forest after ") + what + ":";
  for (const auto& v : r.violations) msg += " " + v + ";";
  throw InvariantError(msg);
}

StepRecord snapshot(const CliqueTreeForest& ctf, double mcs_p, int added, int deferred,
                    BuildStats stats) {
  StepRecord r;
  r.mcs_p = mcs_p;
  r.factors_added = added;
  r.deferred = deferred;
  r.max_clique_size = max_clique_size(ctf);
  r.num_cliques = static_cast<int>(ctf.num_cliques());
  r.num_trees = static_cast<int>(ctf.trees().size());
  r.tree_log_nc = tree_log_ncs(ctf);
  r.build = std::move(stats);
  return r;
}

ComponentResult run_component(const Model& part, const VarSet& vars, const EstimateOptions& opt,
                              std::mt19937_64& rng) {
  ComponentResult out;
  out.vars = vars;
  out.num_factors = static_cast<int>(part.factors.size());

  double mcs_p = opt.mcs_p;
  const double mcs_im = opt.effective_mcs_im();
  for (const auto& f : part.factors) {
    if (clique_size(f.vars(), part.cards) > mcs_p + 1e-9)
      throw InfeasibleError("a factor's scope is larger than the clique size bound");
  }

  auto [ctf, pending] = initial_forest(part.cards, part.factors);
  int in_forest = static_cast<int>(part.factors.size() - pending.size());
  for (;;) {
    BuildOptions bo;
    bo.mcs_p = mcs_p;
    bo.eviction = opt.eviction;
    bo.grouping = opt.grouping;
    bo.check_each_step = opt.check_invariants;
    const int before = static_cast<int>(pending.size());
    BuildResult built = build_ctf(ctf, pending, bo);
    int added = before - static_cast<int>(built.deferred.size());
    if (added == 0 && before > 0 && bo.eviction != EvictionPolicy::LargestFirst) {
      // Deferring whole groups stalled; shrink groups one factor at a time.
      bo.eviction = EvictionPolicy::LargestFirst;
      built = build_ctf(ctf, pending, bo);
      added = before - static_cast<int>(built.deferred.size());
    }
    while (added == 0 && before > 0) {
      if (!opt.escalate_mcs)
        throw InfeasibleError("no remaining factor fits the clique size bound " +
                              std::to_string(mcs_p));
      mcs_p += 1.0;
      bo.mcs_p = mcs_p;
      built = build_ctf(ctf, pending, bo);
      added = before - static_cast<int>(built.deferred.size());
    }
    in_forest += added;
    if (opt.check_invariants) check_forest(ctf, "build");

    calibrate(ctf);
    const int deferred = static_cast<int>(built.deferred.size());
    out.steps.push_back(snapshot(ctf, mcs_p, in_forest, deferred, std::move(built.stats)));
    in_forest = 0;

    const auto& ncs = out.steps.back().tree_log_nc;
    if (std::any_of(ncs.begin(), ncs.end(), [](double z) { return z == kLogZero; })) {
      // Some assignment-independent product is zero, so the total is zero.
      out.log_pr = kLogZero;
      return out;
    }
    if (built.deferred.empty()) break;

    ApproxOptions ao;
    ao.mcs_im = mcs_im;
    ao.heuristic = opt.heuristic;
    ao.seed = opt.seed;
    ao.check_each_step = opt.check_invariants;
    out.steps.back().approx = approximate_ctf(ctf, built.deferred, ao, rng);
    reparameterize(ctf);
    out.steps.back().approx_cliques = static_cast<int>(ctf.num_cliques());
    out.steps.back().approx_trees = static_cast<int>(ctf.trees().size());
    // Approximation resets the per-step count: the next forest starts from
    // the reparameterized beliefs.
    pending = std::move(built.deferred);
  }

  const auto trees = ctf.trees();
  if (trees.size() != 1)
    throw InvariantError("final forest of a connected component has " +
                         std::to_string(trees.size()) + " trees");
  out.log_pr = log_nc(ctf, trees.front()) + ctf.log_mass;
  return out;
}

}  // namespace

InitialForest initial_forest(const std::vector<int>& cards, const std::vector<Factor>& factors) {
  InitialForest out{CliqueTreeForest(cards), {}};
  std::set<VarId> taken;
  for (const auto& f : factors) {
    const bool disjoint = std::none_of(f.scope.begin(), f.scope.end(),
                                       [&](VarId v) { return taken.count(v) != 0; });
    if (disjoint && !f.empty_scope()) {
      taken.insert(f.scope.begin(), f.scope.end());
      const CliqueId id = out.ctf.add_clique(f.vars());
      out.ctf.assign(out.ctf.add_factor(f), id);
    } else {
      out.pending.push_back(f);
    }
  }
  return out;
}

PrEstimate estimate_log_pr(const Model& model, const EstimateOptions& options) {
  const auto t0 = std::chrono::steady_clock::now();
  if (!(options.effective_mcs_im() < options.mcs_p))
    throw InvalidArgument("mcs_im must be smaller than mcs_p");
  model.validate();

  PrEstimate est;
  const Components comps = connected_components(model);
  est.scalar_log_mass = comps.scalar_log_mass;
  std::mt19937_64 rng(options.seed);
  double total = comps.scalar_log_mass;
  for (std::size_t i = 0; i < comps.parts.size(); ++i) {
    est.components.push_back(run_component(comps.parts[i], comps.vars[i], options, rng));
    const auto& c = est.components.back();
    total += c.log_pr;
    for (const auto& s : c.steps) {
      est.peak_clique_size = std::max(est.peak_clique_size, s.max_clique_size);
      est.approximated = est.approximated || s.approx.has_value();
    }
  }
  est.log_pr = total;
  est.log10_pr = total == kLogZero ? kLogZero : total / std::numbers::ln10;
  est.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return est;
}

double brute_force_log_pr(const Model& model, std::size_t cap) {
  model.validate();
  const std::size_t n = model.cards.size();
  std::size_t states = 1;
  for (int c : model.cards) {
    states *= static_cast<std::size_t>(c);
    if (states > cap) throw CapExceeded("brute force over more joint states than the cap");
  }
  if (states == 0) return kLogZero;

  // Offset of each factor entry as a sum of per-variable contributions.
  struct Term {
    const Factor* f;
    std::vector<std::size_t> stride;  // per model variable, 0 if absent
  };
  std::vector<Term> terms;
  for (const auto& f : model.factors) {
    Term t{&f, std::vector<std::size_t>(n, 0)};
    std::size_t s = 1;
    for (std::size_t k = f.scope.size(); k-- > 0;) {
      t.stride[static_cast<std::size_t>(f.scope[k])] = s;
      s *= static_cast<std::size_t>(f.dims[k]);
    }
    terms.push_back(std::move(t));
  }

  std::vector<int> state(n, 0);
  double run_max = kLogZero, run_sum = 0.0;
  for (std::size_t idx = 0; idx < states; ++idx) {
    double lv = 0.0;
    for (const auto& t : terms) {
      std::size_t off = 0;
      for (std::size_t v = 0; v < n; ++v) off += t.stride[v] * static_cast<std::size_t>(state[v]);
      lv += t.f->log_values[off];
      if (lv == kLogZero) break;
    }
    if (lv != kLogZero) {
      if (lv > run_max) {
        run_sum = run_sum * std::exp(run_max - lv) + 1.0;
        run_max = lv;
      } else {
        run_sum += std::exp(lv - run_max);
      }
    }
    for (std::size_t v = n; v-- > 0;) {
      if (++state[v] < model.cards[v]) break;
      state[v] = 0;
    }
  }
  return run_max == kLogZero ? kLogZero : run_max + std::log(run_sum);
}

FullCompileStats full_compile_stats(const Model& model, std::size_t cap) {
  model.validate();
  FullCompileStats out;
  const Components comps = connected_components(model);
  double total = comps.scalar_log_mass;
  bool feasible = true;
  for (const auto& part : comps.parts) {
    std::vector<Factor> scoped;
    for (const auto& f : part.factors) {
      if (!f.empty_scope()) scoped.push_back(f);
    }
    const UGraph g = induced_graph(scoped);
    const auto shape = eliminate_to_ct(g, min_fill_order(g).order);
    double part_max = 0.0;
    for (const auto& c : shape.cliques) part_max = std::max(part_max, clique_size(c, part.cards));
    out.max_clique_size = std::max(out.max_clique_size, part_max);
    if (!feasible || std::exp2(part_max) > static_cast<double>(cap)) {
      feasible = false;
      continue;
    }
    CliqueTreeForest ctf = to_forest(shape, part.cards);
    for (const auto& f : scoped) {
      CliqueId host = -1;
      for (const auto& [id, c] : ctf.cliques()) {
        if (is_subset(f.vars(), c.vars)) {
          host = id;
          break;
        }
      }
      if (host < 0) throw InvariantError("full compile: no clique holds a factor");
      ctf.assign(ctf.add_factor(f), host);
    }
    calibrate(ctf);
    for (double z : tree_log_ncs(ctf)) total += z;
  }
  if (feasible) out.log_pr = total;
  return out;
}

BuildComparison compare_first_build(const Model& component, double mcs_p) {
  auto [ctf, pending] = initial_forest(component.cards, component.factors);
  BuildOptions bo;
  bo.mcs_p = mcs_p;
  bo.grouping = Grouping::Transitive;
  build_ctf(ctf, pending, bo);
  BuildComparison out;
  out.mcs_incremental = max_clique_size(ctf);
  out.factors_added = static_cast<int>(ctf.factors().size());
  const auto g = induced_graph(ctf.factors());
  out.mcs_full = min_fill_max_clique_size(g, component.cards);
  return out;
}

ErrorValue compare_error(double est_log10, double ref_log10) {
  if (est_log10 == kLogZero && ref_log10 == kLogZero) return {0.0, true};
  if (est_log10 == kLogZero || ref_log10 == kLogZero) return {0.0, false};
  const double e = std::abs(est_log10 - ref_log10);
  return {std::round(e * 1000.0) / 1000.0, true};
}

}  // namespace ibia
