#include "ibia/random_model.hpp"

#include <algorithm>

#include "ibia/error.hpp"

namespace ibia {

namespace {

int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

// `k` distinct variables from [0, n), sorted.
std::vector<VarId> pick_vars(std::mt19937_64& rng, int n, int k) {
  std::vector<VarId> out;
  while (static_cast<int>(out.size()) < k) {
    const VarId v = uniform_int(rng, 0, n - 1);
    if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

Factor random_factor(std::mt19937_64& rng, const std::vector<VarId>& scope,
                     const std::vector<int>& cards, const RandomModelSpec& spec) {
  std::vector<int> dims;
  std::size_t n = 1;
  for (VarId v : scope) {
    dims.push_back(cards.at(static_cast<std::size_t>(v)));
    n *= static_cast<std::size_t>(dims.back());
  }
  std::uniform_real_distribution<double> value(spec.low, spec.high);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::vector<double> t(n);
  for (auto& x : t) {
    x = value(rng);
    if (coin(rng) < spec.zero_fraction) x = 0.0;
  }
  return Factor::from_linear(scope, dims, t);
}

Model random_connected_model(std::mt19937_64& rng, const RandomModelSpec& spec) {
  if (spec.min_vars < 1 || spec.max_vars < spec.min_vars || spec.min_card < 1 ||
      spec.max_card < spec.min_card)
    throw InvalidArgument("random_connected_model: bad spec");
  Model m;
  const int n = uniform_int(rng, spec.min_vars, spec.max_vars);
  for (int i = 0; i < n; ++i) m.cards.push_back(uniform_int(rng, spec.min_card, spec.max_card));

  std::discrete_distribution<int> arity({spec.unary_weight, spec.pair_weight, spec.ternary_weight});
  for (int v = 1; v < n; ++v) {
    std::vector<VarId> scope{uniform_int(rng, 0, v - 1), v};
    if (v >= 2 && arity(rng) == 2) {
      VarId w = scope[0];
      while (w == scope[0]) w = uniform_int(rng, 0, v - 1);
      scope.push_back(w);
    }
    std::sort(scope.begin(), scope.end());
    m.factors.push_back(random_factor(rng, scope, m.cards, spec));
  }
  const int extra = static_cast<int>(spec.extra_factor_ratio * n + 0.5);
  for (int i = 0; i < extra; ++i) {
    const int k = std::min(arity(rng) + 1, n);
    m.factors.push_back(random_factor(rng, pick_vars(rng, n, k), m.cards, spec));
  }
  // Shuffle so the tree-forming factors are not all first.
  std::shuffle(m.factors.begin(), m.factors.end(), rng);
  return m;
}

}  // namespace ibia
