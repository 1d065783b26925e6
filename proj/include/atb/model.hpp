#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "atb/common.hpp"

namespace atb {

struct Variable {
  VarId id = 0;
  std::string name;
  std::size_t cardinality = 1;
};

/// Conditional probability table P(child | parents).
///
/// Rows are parent configurations in mixed radix over `parents` (last parent
/// fastest); within a row the child value varies fastest.
class Cpt {
 public:
  Cpt() = default;
  Cpt(VarId child, std::size_t child_cardinality, std::vector<VarId> parents,
      std::vector<std::size_t> parent_cardinalities, std::vector<double> table);

  VarId child() const { return child_; }
  std::size_t child_cardinality() const { return child_cardinality_; }
  const std::vector<VarId>& parents() const { return parents_; }
  const std::vector<std::size_t>& parent_cardinalities() const { return parent_cardinalities_; }
  const std::vector<double>& table() const { return table_; }

  std::size_t rows() const { return table_.size() / child_cardinality_; }
  double at(std::size_t row, Value x) const { return table_[row * child_cardinality_ + x]; }

  /// Row index of a parent configuration given as values aligned with parents().
  std::size_t row_of(const std::vector<Value>& parent_values) const;

 private:
  VarId child_ = 0;
  std::size_t child_cardinality_ = 1;
  std::vector<VarId> parents_;
  std::vector<std::size_t> parent_cardinalities_;
  std::vector<double> table_;
};

inline constexpr double kRowSumTolerance = 1e-9;

/// Directed acyclic model with one CPT per variable. Immutable once built.
class BayesianNetwork {
 public:
  BayesianNetwork() = default;
  /// Validates every structural invariant; throws ModelError on violation.
  /// `cpts` may be given in any order; they are re-indexed by child.
  BayesianNetwork(std::vector<Variable> variables, std::vector<Cpt> cpts);

  std::size_t size() const { return variables_.size(); }
  const Variable& variable(VarId v) const { return variables_.at(v); }
  const std::vector<Variable>& variables() const { return variables_; }
  std::size_t cardinality(VarId v) const { return variables_[v].cardinality; }
  std::size_t max_cardinality() const;
  const Cpt& cpt(VarId v) const { return cpts_.at(v); }
  const std::vector<VarId>& parents(VarId v) const { return cpts_[v].parents(); }
  const std::vector<VarId>& children(VarId v) const { return children_[v]; }
  /// Parents before children; ties by ascending id.
  const std::vector<VarId>& topological_order() const { return topo_; }
  /// Position of each variable in topological_order().
  std::size_t topological_rank(VarId v) const { return topo_rank_[v]; }

 private:
  std::vector<Variable> variables_;
  std::vector<Cpt> cpts_;
  std::vector<std::vector<VarId>> children_;
  std::vector<VarId> topo_;
  std::vector<std::size_t> topo_rank_;
};

/// Observed values, kept sorted by variable id with distinct keys.
class Evidence {
 public:
  using Entry = std::pair<VarId, Value>;

  Evidence() = default;
  /// Throws ModelError on a duplicate variable.
  explicit Evidence(std::vector<Entry> entries);

  /// Throws ModelError when `v` is already present.
  void set(VarId v, Value x);
  std::optional<Value> find(VarId v) const;
  bool contains(VarId v) const { return find(v).has_value(); }

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }
  const std::vector<Entry>& entries() const { return entries_; }

  /// Throws ModelError if a variable or value is out of range for `bn`.
  void validate(const BayesianNetwork& bn) const;

  friend bool operator==(const Evidence&, const Evidence&) = default;

 private:
  std::vector<Entry> entries_;
};

/// Ordered (variable, value) sequence with distinct variables; cutset
/// prefixes and arbitrary subsets both use this.
class PartialAssignment {
 public:
  using Entry = std::pair<VarId, Value>;

  PartialAssignment() = default;
  explicit PartialAssignment(std::vector<Entry> entries);

  void push_back(VarId v, Value x);
  PartialAssignment extended(VarId v, Value x) const;
  std::optional<Value> find(VarId v) const;

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }
  const std::vector<Entry>& entries() const { return entries_; }

  friend bool operator==(const PartialAssignment&, const PartialAssignment&) = default;
  friend auto operator<=>(const PartialAssignment&, const PartialAssignment&) = default;

 private:
  std::vector<Entry> entries_;
};

/// Union of evidence and an assignment; nullopt when they disagree on a
/// shared variable.
std::optional<Evidence> combine(const Evidence& e, const PartialAssignment& a);

/// Product of the CPT entries selected by a full assignment.
/// Throws ModelError when a variable is missing.
double joint_probability(const BayesianNetwork& bn, const PartialAssignment& full);
/// Same, for an assignment given as one value per variable id.
double joint_probability(const BayesianNetwork& bn, const std::vector<Value>& values);

/// Parents, children and co-parents of `x`, sorted ascending.
std::vector<VarId> markov_boundary(const BayesianNetwork& bn, VarId x);

/// A parent-closed subset of a network, renumbered densely.
struct Subnetwork {
  BayesianNetwork network;
  std::vector<VarId> to_original;                 // new id -> original id
  std::vector<std::optional<VarId>> from_original;  // original id -> new id

  /// Restricts evidence to retained variables and renumbers it.
  Evidence map_evidence(const Evidence& e) const;
};

/// Keeps `keep` (must be closed under parents) with the original CPTs.
Subnetwork induced_subnetwork(const BayesianNetwork& bn, const std::vector<VarId>& keep);

/// `seeds` together with all of their ancestors, sorted ascending.
std::vector<VarId> ancestral_set(const BayesianNetwork& bn, const std::vector<VarId>& seeds);

/// flag[v] is true when v is observed or has an observed descendant.
std::vector<bool> observed_or_has_observed_descendant(const BayesianNetwork& bn, const Evidence& e);

/// Removes every descendant of `x` that is unobserved and has no observed
/// descendant. The posterior of `x` given `e` is unchanged.
Subnetwork relevant_subnetwork(const BayesianNetwork& bn, VarId x, const Evidence& e);

}  // namespace atb
