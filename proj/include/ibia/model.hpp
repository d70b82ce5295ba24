#pragma once

// Discrete models: UAI parsing and writing, evidence reduction and
// connected-component splitting.

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "ibia/factor.hpp"

namespace ibia {

enum class ModelKind { Markov, Bayes };

struct Model {
  ModelKind kind = ModelKind::Markov;
  std::vector<int> cards;       // cardinality of variable i
  std::vector<Factor> factors;  // may include empty-scope scalar factors

  int num_vars() const noexcept { return static_cast<int>(cards.size()); }
  // Variables that occur in at least one factor scope.
  VarSet used_vars() const;
  // Throws InvalidArgument if a factor refers to an undeclared variable or
  // disagrees with the declared cardinality.
  void validate() const;
};

// Observed state per variable id.
struct Evidence {
  std::map<VarId, int> assignments;
};

Model parse_uai(std::string_view text);
Model read_uai_file(const std::string& path);
// Emits a UAI file that re-parses to bit-identical log tables.
std::string write_uai(const Model& model);

Evidence parse_evidence(std::string_view text);
Evidence read_evidence_file(const std::string& path);

// Slices every factor by the observed states. Evidence variables are removed
// from all scopes and their cardinality is set to 1, so they no longer
// contribute to sums over assignments. Factors whose scope becomes empty are
// kept as scalar factors.
Model apply_evidence(const Model& model, const Evidence& ev);

struct Components {
  // Each component carries the full cardinality vector and exactly the
  // factors whose scopes lie inside it.
  std::vector<Model> parts;
  std::vector<VarSet> vars;
  // log of (product of scalar factors) x (product of cardinalities of
  // variables that occur in no factor).
  double scalar_log_mass = 0.0;
};

Components connected_components(const Model& model);

}  // namespace ibia
