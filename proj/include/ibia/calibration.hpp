#pragma once

// Two-pass exact message passing over every tree of a forest.

#include <vector>

#include "ibia/ctf.hpp"

namespace ibia {

// Sets unnormalized clique and sepset beliefs on every tree. A clique's
// initial potential is the product of its assigned factors (all ones when it
// has none). The root of each tree is its lowest clique id.
void calibrate(CliqueTreeForest& ctf);

// log normalization constant of one calibrated tree. Every clique belief is
// checked to agree within relative `tol`; CalibrationError otherwise.
double log_nc(const CliqueTreeForest& ctf, const std::vector<CliqueId>& tree, double tol = 1e-9);

// log NC of every tree, in trees() order.
std::vector<double> tree_log_ncs(const CliqueTreeForest& ctf, double tol = 1e-9);

struct EdgeDiscrepancy {
  EdgeKey edge;
  double discrepancy = 0.0;
};

struct CalibrationReport {
  double max_discrepancy = 0.0;
  std::vector<EdgeDiscrepancy> edges;  // every edge, in edge order
  std::vector<EdgeKey> flagged;        // edges above tolerance
  bool ok() const { return flagged.empty(); }
};

// For every edge, the largest relative difference (in the linear domain)
// between the sepset belief and each endpoint's projection onto the sepset.
// Throws InvalidArgument when a belief is missing.
CalibrationReport check_calibration(const CliqueTreeForest& ctf, double tol = 1e-9);

// |a - b| <= tol * max(1, |a|, |b|); two -inf values agree.
bool log_values_agree(double a, double b, double tol);

}  // namespace ibia
