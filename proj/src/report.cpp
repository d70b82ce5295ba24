#include "ibia/report.hpp"

#include <cmath>

namespace ibia {

namespace {

using nlohmann::json;

json log_value(double x) {
  if (std::isinf(x) && x < 0) return nullptr;
  return x;
}

json log_list(const std::vector<double>& xs) {
  json out = json::array();
  for (double x : xs) out.push_back(log_value(x));
  return out;
}

json build_json(const BuildStats& s) {
  return {{"retriangulations", s.retriangulations},
          {"assigned_directly", s.assigned_directly},
          {"groups_added", s.groups_added},
          {"evictions", s.evictions},
          {"elimination_set_sizes", s.elimination_set_sizes},
          {"retained_counts", s.retained_counts}};
}

json approx_json(const ApproxReport& r, int cliques, int trees) {
  json exact = json::array();
  for (const auto& e : r.exact)
    exact.push_back({{"var", e.var}, {"collapsed", e.collapsed}, {"cliques", e.cliques}});
  json local = json::array();
  for (const auto& l : r.local)
    local.push_back({{"var", l.var}, {"target", l.target}, {"retained", l.retained}});
  return {{"interface_vars", r.ivs},
          {"pruned_cliques", r.pruned_cliques},
          {"dropped_trees", r.dropped_trees},
          {"exact", exact},
          {"local", local},
          {"max_size_before", r.max_size_before},
          {"max_size_after", r.max_size_after},
          {"bound_met", r.bound_met},
          {"cliques", cliques},
          {"trees", trees}};
}

}  // namespace

const char* to_string(Heuristic h) { return h == Heuristic::MaxMI ? "maxmi" : "random"; }

const char* to_string(EvictionPolicy p) {
  return p == EvictionPolicy::LargestFirst ? "largest" : "group";
}

const char* to_string(Grouping g) {
  return g == Grouping::Transitive ? "transitive" : "runs";
}

json options_json(const EstimateOptions& o) {
  return {{"mcs_p", o.mcs_p},
          {"mcs_im", o.effective_mcs_im()},
          {"heuristic", to_string(o.heuristic)},
          {"seed", o.seed},
          {"escalate_mcs", o.escalate_mcs},
          {"eviction", to_string(o.eviction)},
          {"grouping", to_string(o.grouping)}};
}

json estimate_json(const PrEstimate& est, const EstimateOptions& options, bool include_timing) {
  json comps = json::array();
  for (const auto& c : est.components) {
    json steps = json::array();
    for (const auto& s : c.steps) {
      json step = {{"mcs_p", s.mcs_p},
                   {"factors_added", s.factors_added},
                   {"deferred", s.deferred},
                   {"max_clique_size", s.max_clique_size},
                   {"cliques", s.num_cliques},
                   {"trees", s.num_trees},
                   {"tree_log_nc", log_list(s.tree_log_nc)},
                   {"build", build_json(s.build)}};
      if (s.approx) step["approx"] = approx_json(*s.approx, s.approx_cliques, s.approx_trees);
      steps.push_back(std::move(step));
    }
    comps.push_back({{"vars", c.vars},
                     {"factors", c.num_factors},
                     {"log_pr", log_value(c.log_pr)},
                     {"steps", steps}});
  }
  json out = {{"log10_pr", log_value(est.log10_pr)},
              {"log_pr", log_value(est.log_pr)},
              {"zero_mass", std::isinf(est.log_pr) && est.log_pr < 0},
              {"scalar_log_mass", log_value(est.scalar_log_mass)},
              {"peak_clique_size", est.peak_clique_size},
              {"approximated", est.approximated},
              {"options", options_json(options)},
              {"components", comps}};
  if (include_timing) out["wall_seconds"] = est.wall_seconds;
  return out;
}

}  // namespace ibia
