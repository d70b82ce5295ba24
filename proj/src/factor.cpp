#include "ibia/factor.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ibia/error.hpp"

namespace ibia {

namespace {

std::size_t table_size(const std::vector<int>& dims) {
  std::size_t n = 1;
  for (int d : dims) n *= static_cast<std::size_t>(d);
  return n;
}

std::vector<std::size_t> row_major_strides(const std::vector<int>& dims) {
  std::vector<std::size_t> s(dims.size());
  std::size_t acc = 1;
  for (std::size_t i = dims.size(); i-- > 0;) {
    s[i] = acc;
    acc *= static_cast<std::size_t>(dims[i]);
  }
  return s;
}

// Stride of each `target` variable inside f's table (0 when absent).
std::vector<std::size_t> strides_in(const Factor& f, const std::vector<VarId>& target) {
  const auto own = row_major_strides(f.dims);
  std::vector<std::size_t> out(target.size(), 0);
  for (std::size_t i = 0; i < target.size(); ++i) {
    int p = f.position(target[i]);
    if (p >= 0) out[i] = own[static_cast<std::size_t>(p)];
  }
  return out;
}

// Row-major walk over `dims` that tracks a linear offset into each operand.
class Odometer {
 public:
  Odometer(const std::vector<int>& dims, std::vector<std::vector<std::size_t>> strides)
      : dims_(dims), counter_(dims.size(), 0), strides_(std::move(strides)),
        offsets_(strides_.size(), 0) {}

  std::size_t offset(std::size_t operand) const { return offsets_[operand]; }

  void advance() {
    for (std::size_t d = dims_.size(); d-- > 0;) {
      if (++counter_[d] < dims_[d]) {
        for (std::size_t k = 0; k < offsets_.size(); ++k) offsets_[k] += strides_[k][d];
        return;
      }
      counter_[d] = 0;
      for (std::size_t k = 0; k < offsets_.size(); ++k)
        offsets_[k] -= strides_[k][d] * static_cast<std::size_t>(dims_[d] - 1);
    }
  }

 private:
  const std::vector<int>& dims_;
  std::vector<int> counter_;
  std::vector<std::vector<std::size_t>> strides_;
  std::vector<std::size_t> offsets_;
};

void check_shape(const std::vector<VarId>& scope, const std::vector<int>& dims,
                 std::size_t n_values) {
  if (scope.size() != dims.size())
    throw InvalidArgument("factor scope and dims differ in length");
  if (make_varset(scope).size() != scope.size())
    throw InvalidArgument("factor scope has a duplicate variable");
  for (int d : dims) {
    if (d < 1) throw InvalidArgument("factor dimension < 1");
  }
  if (table_size(dims) != n_values)
    throw InvalidArgument("factor table has " + std::to_string(n_values) +
                          " entries, expected " + std::to_string(table_size(dims)));
}

}  // namespace

Factor Factor::from_linear(std::vector<VarId> scope, std::vector<int> dims,
                           std::span<const double> values) {
  check_shape(scope, dims, values.size());
  Factor f;
  f.scope = std::move(scope);
  f.dims = std::move(dims);
  f.log_values.reserve(values.size());
  for (double x : values) {
    if (!(x >= 0.0)) throw InvalidArgument("factor entry is negative or NaN");
    f.log_values.push_back(x == 0.0 ? kLogZero : std::log(x));
  }
  return f;
}

Factor Factor::from_log(std::vector<VarId> scope, std::vector<int> dims,
                        std::vector<double> log_values) {
  check_shape(scope, dims, log_values.size());
  return Factor{std::move(scope), std::move(dims), std::move(log_values)};
}

Factor Factor::constant(std::vector<VarId> scope, std::vector<int> dims, double log_value) {
  const std::size_t n = table_size(dims);
  check_shape(scope, dims, n);
  return Factor{std::move(scope), std::move(dims), std::vector<double>(n, log_value)};
}

Factor Factor::scalar(double log_value) { return Factor{{}, {}, {log_value}}; }

bool Factor::has(VarId v) const noexcept { return position(v) >= 0; }

int Factor::position(VarId v) const noexcept {
  for (std::size_t i = 0; i < scope.size(); ++i) {
    if (scope[i] == v) return static_cast<int>(i);
  }
  return -1;
}

int Factor::dim_of(VarId v) const {
  int p = position(v);
  if (p < 0) throw InvalidArgument("variable " + std::to_string(v) + " not in factor scope");
  return dims[static_cast<std::size_t>(p)];
}

double Factor::value(std::size_t i) const { return std::exp(log_values[i]); }

std::vector<double> Factor::linear() const {
  std::vector<double> out(log_values.size());
  std::transform(log_values.begin(), log_values.end(), out.begin(),
                 [](double x) { return std::exp(x); });
  return out;
}

double log_sum_exp(std::span<const double> xs) {
  double m = kLogZero;
  for (double x : xs) m = std::max(m, x);
  if (m == kLogZero) return kLogZero;
  if (std::isinf(m)) return m;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

double log_add(double a, double b) {
  if (a < b) std::swap(a, b);
  if (b == kLogZero) return a;
  return a + std::log1p(std::exp(b - a));
}

Factor product(const Factor& a, const Factor& b) {
  Factor out;
  out.scope = a.scope;
  out.dims = a.dims;
  for (std::size_t i = 0; i < b.scope.size(); ++i) {
    int p = a.position(b.scope[i]);
    if (p >= 0) {
      if (a.dims[static_cast<std::size_t>(p)] != b.dims[i])
        throw InvalidArgument("cardinality mismatch for variable " + std::to_string(b.scope[i]));
      continue;
    }
    out.scope.push_back(b.scope[i]);
    out.dims.push_back(b.dims[i]);
  }
  const std::size_t n = table_size(out.dims);
  out.log_values.resize(n);
  Odometer it(out.dims, {strides_in(a, out.scope), strides_in(b, out.scope)});
  for (std::size_t i = 0; i < n; ++i, it.advance()) {
    const double x = a.log_values[it.offset(0)];
    const double y = b.log_values[it.offset(1)];
    out.log_values[i] = (x == kLogZero || y == kLogZero) ? kLogZero : x + y;
  }
  return out;
}

Factor marginalize_onto(const Factor& f, const VarSet& keep) {
  Factor out;
  for (std::size_t i = 0; i < f.scope.size(); ++i) {
    if (contains(keep, f.scope[i])) {
      out.scope.push_back(f.scope[i]);
      out.dims.push_back(f.dims[i]);
    }
  }
  if (out.scope.size() == f.scope.size()) return f;
  const std::size_t n_out = table_size(out.dims);
  // Running max-shifted accumulation per output cell, in two passes.
  std::vector<double> mx(n_out, kLogZero);
  Odometer it(f.dims, {strides_in(out, f.scope)});
  for (std::size_t i = 0; i < f.size(); ++i, it.advance()) {
    double& m = mx[it.offset(0)];
    m = std::max(m, f.log_values[i]);
  }
  std::vector<double> acc(n_out, 0.0);
  Odometer it2(f.dims, {strides_in(out, f.scope)});
  for (std::size_t i = 0; i < f.size(); ++i, it2.advance()) {
    const std::size_t o = it2.offset(0);
    if (mx[o] == kLogZero) continue;
    acc[o] += std::exp(f.log_values[i] - mx[o]);
  }
  out.log_values.resize(n_out);
  for (std::size_t o = 0; o < n_out; ++o)
    out.log_values[o] = mx[o] == kLogZero ? kLogZero : mx[o] + std::log(acc[o]);
  return out;
}

Factor marginalize(const Factor& f, VarId v) {
  if (!f.has(v))
    throw InvalidArgument("cannot marginalize variable " + std::to_string(v) +
                          ": not in factor scope");
  return marginalize_onto(f, without(f.vars(), v));
}

Factor divide(const Factor& num, const Factor& den) {
  for (std::size_t i = 0; i < den.scope.size(); ++i) {
    int p = num.position(den.scope[i]);
    if (p < 0) throw InvalidArgument("divisor scope is not a subset of the numerator scope");
    if (num.dims[static_cast<std::size_t>(p)] != den.dims[i])
      throw InvalidArgument("cardinality mismatch for variable " + std::to_string(den.scope[i]));
  }
  Factor out = num;
  Odometer it(num.dims, {strides_in(den, num.scope)});
  for (std::size_t i = 0; i < num.size(); ++i, it.advance()) {
    const double x = num.log_values[i];
    const double y = den.log_values[it.offset(0)];
    if (y == kLogZero) {
      if (x != kLogZero) throw CalibrationError("division of a positive entry by zero");
      out.log_values[i] = kLogZero;
    } else {
      out.log_values[i] = x == kLogZero ? kLogZero : x - y;
    }
  }
  return out;
}

double log_norm_constant(const Factor& f) { return log_sum_exp(f.log_values); }

Factor reorder(const Factor& f, const std::vector<VarId>& scope) {
  if (scope == f.scope) return f;
  if (make_varset(scope) != f.vars())
    throw InvalidArgument("reorder target is not a permutation of the scope");
  std::vector<int> dims;
  for (VarId v : scope) dims.push_back(f.dim_of(v));
  return expand(f, scope, dims);
}

Factor expand(const Factor& f, const std::vector<VarId>& scope, const std::vector<int>& dims) {
  for (std::size_t i = 0; i < f.scope.size(); ++i) {
    auto it = std::find(scope.begin(), scope.end(), f.scope[i]);
    if (it == scope.end()) throw InvalidArgument("expand target does not cover the scope");
    if (dims[static_cast<std::size_t>(it - scope.begin())] != f.dims[i])
      throw InvalidArgument("cardinality mismatch for variable " + std::to_string(f.scope[i]));
  }
  Factor out = Factor::constant(scope, dims, 0.0);
  Odometer it(out.dims, {strides_in(f, out.scope)});
  for (std::size_t i = 0; i < out.size(); ++i, it.advance())
    out.log_values[i] = f.log_values[it.offset(0)];
  return out;
}

Factor slice(const Factor& f, VarId v, int state) {
  const int p = f.position(v);
  if (p < 0) throw InvalidArgument("slice variable not in scope");
  if (state < 0 || state >= f.dims[static_cast<std::size_t>(p)])
    throw InvalidArgument("slice state out of range");
  Factor out;
  for (std::size_t i = 0; i < f.scope.size(); ++i) {
    if (static_cast<int>(i) == p) continue;
    out.scope.push_back(f.scope[i]);
    out.dims.push_back(f.dims[i]);
  }
  const std::size_t n = table_size(out.dims);
  out.log_values.resize(n);
  const auto own = row_major_strides(f.dims);
  std::vector<std::size_t> s;
  for (std::size_t i = 0; i < f.scope.size(); ++i) {
    if (static_cast<int>(i) != p) s.push_back(own[i]);
  }
  const std::size_t base = own[static_cast<std::size_t>(p)] * static_cast<std::size_t>(state);
  Odometer it(out.dims, {s});
  for (std::size_t i = 0; i < n; ++i, it.advance()) out.log_values[i] = f.log_values[base + it.offset(0)];
  return out;
}

Factor scale(const Factor& f, double log_delta) {
  Factor out = f;
  for (double& x : out.log_values) {
    if (x != kLogZero) x += log_delta;
  }
  return out;
}

}  // namespace ibia
