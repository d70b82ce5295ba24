#pragma once

// Log-space potential tables and the table algebra used throughout
// (product, marginalization, division, normalization constant).
//
// Tables are row-major over `scope` with the last scope variable varying
// fastest. Entries are natural logs; an exact zero is stored as -infinity.

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "ibia/varset.hpp"

namespace ibia {

inline constexpr double kLogZero = -std::numeric_limits<double>::infinity();

struct Factor {
  std::vector<VarId> scope;
  std::vector<int> dims;
  std::vector<double> log_values;

  // Builds from linear (nonnegative) values. Throws InvalidArgument on a
  // length mismatch, duplicate scope variable or negative entry.
  static Factor from_linear(std::vector<VarId> scope, std::vector<int> dims,
                            std::span<const double> values);
  static Factor from_log(std::vector<VarId> scope, std::vector<int> dims,
                         std::vector<double> log_values);
  // Every entry equal to exp(log_value).
  static Factor constant(std::vector<VarId> scope, std::vector<int> dims,
                         double log_value = 0.0);
  static Factor scalar(double log_value);

  std::size_t size() const noexcept { return log_values.size(); }
  bool empty_scope() const noexcept { return scope.empty(); }
  bool has(VarId v) const noexcept;
  // Position of v in scope, or -1.
  int position(VarId v) const noexcept;
  int dim_of(VarId v) const;
  VarSet vars() const { return make_varset(scope); }

  double value(std::size_t i) const;
  std::vector<double> linear() const;
};

// Numerically stable log(sum(exp(x))). Returns -inf for an empty or
// all -inf input.
double log_sum_exp(std::span<const double> xs);

// log(exp(a) + exp(b)).
double log_add(double a, double b);

// Pointwise product. Result scope is a.scope followed by b's variables not
// already in a. Throws InvalidArgument on a cardinality mismatch.
Factor product(const Factor& a, const Factor& b);

// Sums v out of f. Throws InvalidArgument if v is not in scope.
Factor marginalize(const Factor& f, VarId v);

// Sums out every variable not in `keep`. The result keeps f's scope order.
Factor marginalize_onto(const Factor& f, const VarSet& keep);

// num / den with den broadcast over num's scope; 0/0 = 0. Throws
// InvalidArgument unless scope(den) ⊆ scope(num), CalibrationError on x/0
// with x > 0.
Factor divide(const Factor& num, const Factor& den);

// log of the sum of all entries; -inf when all entries are zero.
double log_norm_constant(const Factor& f);

// Same table with the scope permuted to `scope` (a permutation of f.scope).
Factor reorder(const Factor& f, const std::vector<VarId>& scope);

// Broadcasts f onto a superset scope with the given dims.
Factor expand(const Factor& f, const std::vector<VarId>& scope,
              const std::vector<int>& dims);

// Restricts v to `state` and drops it from the scope.
Factor slice(const Factor& f, VarId v, int state);

// Adds log_delta to every entry (multiplies by a positive constant).
Factor scale(const Factor& f, double log_delta);

}  // namespace ibia
