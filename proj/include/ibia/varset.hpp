#pragma once

// Sorted, duplicate-free vectors of variable ids used as small sets.

#include <algorithm>
#include <initializer_list>
#include <iterator>
#include <vector>

namespace ibia {

using VarId = int;
using VarSet = std::vector<VarId>;

inline VarSet make_varset(std::vector<VarId> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

inline VarSet make_varset(std::initializer_list<VarId> v) {
  return make_varset(std::vector<VarId>(v));
}

inline bool contains(const VarSet& s, VarId v) {
  return std::binary_search(s.begin(), s.end(), v);
}

// a ⊆ b
inline bool is_subset(const VarSet& a, const VarSet& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

inline VarSet set_union(const VarSet& a, const VarSet& b) {
  VarSet out;
  out.reserve(a.size() + b.size());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

inline VarSet set_intersection(const VarSet& a, const VarSet& b) {
  VarSet out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

inline VarSet set_difference(const VarSet& a, const VarSet& b) {
  VarSet out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

inline bool intersects(const VarSet& a, const VarSet& b) {
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i < *j) {
      ++i;
    } else if (*j < *i) {
      ++j;
    } else {
      return true;
    }
  }
  return false;
}

inline VarSet without(const VarSet& s, VarId v) {
  VarSet out;
  out.reserve(s.size());
  for (VarId x : s) {
    if (x != v) out.push_back(x);
  }
  return out;
}

}  // namespace ibia
