#include "ibia/calibration.hpp"

#include <algorithm>
#include <cmath>

#include "ibia/error.hpp"

namespace ibia {

namespace {

std::vector<int> dims_of(const VarSet& vars, const CliqueTreeForest& ctf) {
  std::vector<int> d;
  for (VarId v : vars) d.push_back(ctf.card(v));
  return d;
}

Factor initial_potential(const CliqueTreeForest& ctf, const Clique& c) {
  Factor f = Factor::constant(c.vars, dims_of(c.vars, ctf));
  for (int fi : c.factors) f = product(f, ctf.factor(fi));
  return f;
}

// Relative difference of two nonnegative numbers given as logs.
double rel_diff(double la, double lb) {
  if (la == kLogZero && lb == kLogZero) return 0.0;
  const double hi = std::max(la, lb), lo = std::min(la, lb);
  if (lo == kLogZero) return 1.0;
  return -std::expm1(lo - hi);
}

}  // namespace

bool log_values_agree(double a, double b, double tol) {
  if (a == b) return true;
  if (std::isinf(a) || std::isinf(b)) return false;
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

void calibrate(CliqueTreeForest& ctf) {
  for (const auto& tree : ctf.trees()) {
    const CliqueId root = tree.front();
    // Pre-order with parents; children visited in ascending id.
    std::vector<CliqueId> order{root};
    std::map<CliqueId, CliqueId> parent{{root, -1}};
    for (std::size_t i = 0; i < order.size(); ++i) {
      for (CliqueId n : ctf.neighbors(order[i])) {
        if (n != parent[order[i]]) {
          parent[n] = order[i];
          order.push_back(n);
        }
      }
    }
    std::map<CliqueId, Factor> psi;
    for (CliqueId id : tree) psi.emplace(id, initial_potential(ctf, ctf.clique(id)));

    std::map<std::pair<CliqueId, CliqueId>, Factor> message;  // (from, to)
    auto incoming = [&](CliqueId at, CliqueId skip) {
      Factor f = psi.at(at);
      for (CliqueId n : ctf.neighbors(at)) {
        if (n != skip) f = product(f, message.at({n, at}));
      }
      return f;
    };
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      const CliqueId c = *it, p = parent[c];
      if (p < 0) continue;
      message.insert_or_assign({c, p}, marginalize_onto(incoming(c, p), ctf.sepset(c, p).vars));
    }
    for (CliqueId c : order) {
      const CliqueId p = parent[c];
      if (p < 0) continue;
      message.insert_or_assign({p, c}, marginalize_onto(incoming(p, c), ctf.sepset(c, p).vars));
    }
    for (CliqueId id : tree) {
      Clique& c = ctf.clique(id);
      c.belief = reorder(incoming(id, -1), c.vars);
    }
    for (CliqueId c : order) {
      const CliqueId p = parent[c];
      if (p < 0) continue;
      Sepset& s = ctf.sepset(c, p);
      s.belief = reorder(product(message.at({c, p}), message.at({p, c})), s.vars);
    }
  }
  ctf.calibrated = true;
}

double log_nc(const CliqueTreeForest& ctf, const std::vector<CliqueId>& tree, double tol) {
  if (tree.empty()) throw InvalidArgument("log_nc: empty tree");
  double first = 0.0;
  for (std::size_t i = 0; i < tree.size(); ++i) {
    const Clique& c = ctf.clique(tree[i]);
    if (!c.belief) throw InvalidArgument("log_nc: clique without belief");
    const double z = log_norm_constant(*c.belief);
    if (i == 0) {
      first = z;
    } else if (!log_values_agree(first, z, tol)) {
      throw CalibrationError("clique beliefs disagree on the normalization constant");
    }
  }
  return first;
}

std::vector<double> tree_log_ncs(const CliqueTreeForest& ctf, double tol) {
  std::vector<double> out;
  for (const auto& t : ctf.trees()) out.push_back(log_nc(ctf, t, tol));
  return out;
}

CalibrationReport check_calibration(const CliqueTreeForest& ctf, double tol) {
  CalibrationReport r;
  for (const auto& [k, s] : ctf.sepsets()) {
    const Clique& a = ctf.clique(k.first);
    const Clique& b = ctf.clique(k.second);
    if (!a.belief || !b.belief || !s.belief)
      throw InvalidArgument("check_calibration: missing belief");
    const Factor pa = reorder(marginalize_onto(*a.belief, s.vars), s.vars);
    const Factor pb = reorder(marginalize_onto(*b.belief, s.vars), s.vars);
    const Factor mu = reorder(*s.belief, s.vars);
    double worst = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) {
      worst = std::max({worst, rel_diff(pa.log_values[i], mu.log_values[i]),
                        rel_diff(pb.log_values[i], mu.log_values[i])});
    }
    r.edges.push_back({k, worst});
    r.max_discrepancy = std::max(r.max_discrepancy, worst);
    if (worst > tol) r.flagged.push_back(k);
  }
  return r;
}

}  // namespace ibia
