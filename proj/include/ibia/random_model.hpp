#pragma once

// Seeded random model suites for tests, the acceptance run and `ibia generate`.

#include <cstdint>
#include <random>

#include "ibia/model.hpp"

namespace ibia {

struct RandomModelSpec {
  int min_vars = 8;
  int max_vars = 14;
  int min_card = 2;
  int max_card = 2;
  // Extra factors beyond the ones that connect the variables, as a multiple
  // of the variable count.
  double extra_factor_ratio = 1.0;
  // Relative weights of unary, pairwise and ternary scopes.
  double unary_weight = 1.0;
  double pair_weight = 2.0;
  double ternary_weight = 2.0;
  // Entries are drawn uniformly from [low, high), then zeroed with this
  // probability.
  double low = 0.05;
  double high = 1.0;
  double zero_fraction = 0.05;
};

// A connected model: every variable after the first is tied to an earlier
// one by a pairwise or ternary factor, then extra factors of mixed arity
// are added over random scopes.
Model random_connected_model(std::mt19937_64& rng, const RandomModelSpec& spec);

// Random table over `scope` with the entry distribution from RandomModelSpec.
Factor random_factor(std::mt19937_64& rng, const std::vector<VarId>& scope,
                     const std::vector<int>& cards, const RandomModelSpec& spec);

}  // namespace ibia
