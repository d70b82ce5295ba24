#pragma once

// Naive reference computations for tests: explicit assignment enumeration,
// no shared code with the table algebra under test beyond the Factor struct.

#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <vector>

#include "ibia/factor.hpp"
#include "ibia/model.hpp"

namespace oracle {

using ibia::Factor;
using ibia::VarId;
using Assignment = std::map<VarId, int>;

// Calls fn for every assignment of `vars` (cards indexed by var id).
inline void for_each_assignment(const std::vector<VarId>& vars, const std::vector<int>& cards,
                                const std::function<void(const Assignment&)>& fn) {
  Assignment a;
  for (VarId v : vars) a[v] = 0;
  while (true) {
    fn(a);
    int i = static_cast<int>(vars.size()) - 1;
    for (; i >= 0; --i) {
      int& s = a[vars[static_cast<std::size_t>(i)]];
      if (++s < cards[static_cast<std::size_t>(vars[static_cast<std::size_t>(i)])]) break;
      s = 0;
    }
    if (i < 0) return;
  }
}

// Linear value of f at an assignment covering its scope.
inline double at(const Factor& f, const Assignment& a) {
  std::size_t idx = 0;
  for (std::size_t i = 0; i < f.scope.size(); ++i)
    idx = idx * static_cast<std::size_t>(f.dims[i]) + static_cast<std::size_t>(a.at(f.scope[i]));
  return std::exp(f.log_values[idx]);
}

inline std::vector<int> cards_for(const std::vector<Factor>& fs, int n) {
  std::vector<int> cards(static_cast<std::size_t>(n), 1);
  for (const Factor& f : fs)
    for (std::size_t i = 0; i < f.scope.size(); ++i)
      cards[static_cast<std::size_t>(f.scope[i])] = f.dims[i];
  return cards;
}

// Sum over all assignments of the model's variables of the factor product.
inline double partition_function(const ibia::Model& m) {
  std::vector<VarId> vars;
  for (int v = 0; v < m.num_vars(); ++v) vars.push_back(v);
  double z = 0.0;
  for_each_assignment(vars, m.cards, [&](const Assignment& a) {
    double p = 1.0;
    for (const Factor& f : m.factors) p *= at(f, a);
    z += p;
  });
  return z;
}

// Marginal of the product of `fs` over `keep`, as a map from assignment.
inline std::map<std::vector<int>, double> marginal(const std::vector<Factor>& fs,
                                                   const std::vector<VarId>& all,
                                                   const std::vector<int>& cards,
                                                   const std::vector<VarId>& keep) {
  std::map<std::vector<int>, double> out;
  for_each_assignment(all, cards, [&](const Assignment& a) {
    double p = 1.0;
    for (const Factor& f : fs) p *= at(f, a);
    std::vector<int> key;
    for (VarId v : keep) key.push_back(a.at(v));
    out[key] += p;
  });
  return out;
}

// Mutual information (natural log) of an unnormalized 2-D table.
inline double mutual_information(const std::vector<std::vector<double>>& p) {
  double z = 0.0;
  for (const auto& row : p)
    for (double x : row) z += x;
  std::vector<double> px(p.size(), 0.0), py(p[0].size(), 0.0);
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = 0; j < p[i].size(); ++j) {
      px[i] += p[i][j] / z;
      py[j] += p[i][j] / z;
    }
  double mi = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = 0; j < p[i].size(); ++j) {
      const double q = p[i][j] / z;
      if (q > 0) mi += q * std::log(q / (px[i] * py[j]));
    }
  return mi;
}

inline bool rel_close(double a, double b, double tol) {
  return std::fabs(a - b) <= tol * std::max({1e-300, std::fabs(a), std::fabs(b)});
}

// Random factor with distinct scope drawn from [0, n), dims from `cards`.
inline Factor random_factor(std::mt19937_64& rng, int n, const std::vector<int>& cards,
                            int max_arity, double zero_p = 0.1) {
  std::uniform_int_distribution<int> arity(1, max_arity);
  std::vector<VarId> pool;
  for (int v = 0; v < n; ++v) pool.push_back(v);
  std::shuffle(pool.begin(), pool.end(), rng);
  pool.resize(static_cast<std::size_t>(std::min(n, arity(rng))));
  std::vector<int> dims;
  std::size_t size = 1;
  for (VarId v : pool) {
    dims.push_back(cards[static_cast<std::size_t>(v)]);
    size *= static_cast<std::size_t>(dims.back());
  }
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> vals(size);
  for (auto& x : vals) x = u(rng) < zero_p ? 0.0 : 0.01 + u(rng);
  return Factor::from_linear(pool, dims, vals);
}

}  // namespace oracle
