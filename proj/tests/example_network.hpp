#pragma once

// Fourteen binary variables named a..o (no e) and twelve factors in a fixed
// order. With mcs_p = 4 the greedy first forest is {d,f,g}, {c,h,j}, {i,l}
// and the remaining factors exercise grouping, deferral, exact and local
// marginalization in a single approximation step.

#include <random>
#include <string>

#include "ibia/model.hpp"
#include "ibia/random_model.hpp"

namespace example {

inline constexpr const char* kNames = "abcdfghijklmno";

inline ibia::VarId var(char c) {
  for (int i = 0; kNames[i]; ++i)
    if (kNames[i] == c) return i;
  return -1;
}

inline ibia::VarSet vars(const std::string& s) {
  std::vector<ibia::VarId> out;
  for (char c : s) out.push_back(var(c));
  return ibia::make_varset(out);
}

inline std::string names(const ibia::VarSet& s) {
  std::string out;
  for (ibia::VarId v : s) out += kNames[v];
  return out;
}

inline ibia::Model network(std::uint64_t seed = 7) {
  static const char* scopes[] = {"dfg", "chj", "il", "hi",  "dgh", "dhk",
                                 "abf", "jm",  "fmn", "dmo", "fo",  "klo"};
  std::mt19937_64 rng(seed);
  ibia::RandomModelSpec spec;
  ibia::Model m;
  m.cards.assign(14, 2);
  for (const char* s : scopes) {
    std::vector<ibia::VarId> scope;
    for (const char* p = s; *p; ++p) scope.push_back(var(*p));
    m.factors.push_back(ibia::random_factor(rng, scope, m.cards, spec));
  }
  return m;
}

}  // namespace example
