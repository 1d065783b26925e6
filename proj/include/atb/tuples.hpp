#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "atb/exact.hpp"
#include "atb/graph.hpp"
#include "atb/model.hpp"

namespace atb {

/// Values aligned with Cutset::variables.
using CutsetTuple = std::vector<Value>;

PartialAssignment to_assignment(const Cutset& c, const CutsetTuple& t);

/// The h active tuples with their exact probabilities.
struct ActiveTupleSet {
  Cutset cutset;
  std::vector<std::size_t> cardinalities;  // of cutset.variables
  std::vector<CutsetTuple> tuples;
  std::vector<double> pe;     // P(c^i, e)
  std::vector<double> prior;  // P(c^i)
  /// joint[i][X][x] = P(x, c^i, e); empty until ensure_joint_tables().
  std::vector<std::vector<std::vector<double>>> joint;

  std::size_t size() const { return tuples.size(); }
  PartialAssignment assignment(std::size_t i) const { return to_assignment(cutset, tuples[i]); }
  /// S = sum of P(c^i, e).
  double mass() const;
  /// Sum of P(c^i).
  double prior_mass() const;
  /// The first h tuples. Selection order puts heavier tuples first, so
  /// prefixes are nested active sets.
  ActiveTupleSet prefix(std::size_t h) const;
};

struct TupleSelectionOptions {
  std::size_t exhaustive_cap = 4096;
  std::size_t scope_cap = kDefaultScopeCap;
  std::size_t init_retries = 100;
};

/// Picks h tuples of high P(c, e). For M <= exhaustive_cap this is the exact
/// top-h (P descending, then lexicographic); otherwise a seeded Gibbs chain
/// over the cutset ranks every tuple it evaluates. Throws ModelError if h > M.
ActiveTupleSet select_tuples_gibbs(const BayesianNetwork& bn, const Evidence& e, const Cutset& c, std::size_t h,
                                   std::size_t sweeps, std::uint64_t seed, const TupleSelectionOptions& opt = {});

/// Builds an active set from explicitly given tuples.
ActiveTupleSet make_active_set(const BayesianNetwork& bn, const Evidence& e, const Cutset& c,
                               std::vector<CutsetTuple> tuples, std::size_t scope_cap = kDefaultScopeCap);

/// Fills ActiveTupleSet::joint if it is not already present.
void ensure_joint_tables(const BayesianNetwork& bn, const Evidence& e, ActiveTupleSet& set,
                         std::size_t scope_cap = kDefaultScopeCap);

/// Active tuples plus the partially instantiated frontier left after pruning
/// every unmarked branch of the cutset search tree.
struct TruncatedTree {
  Cutset cutset;
  std::vector<std::size_t> cardinalities;
  std::vector<CutsetTuple> active;
  /// Prefixes c_{1:q}; the depth q is the prefix length. Lexicographic order.
  std::vector<CutsetTuple> partials;

  std::size_t size() const { return partials.size(); }
  PartialAssignment assignment(std::size_t j) const { return to_assignment(cutset, partials[j]); }
};

TruncatedTree build_truncated_tree(const Cutset& c, const std::vector<std::size_t>& cardinalities,
                                   const std::vector<CutsetTuple>& active);
inline TruncatedTree build_truncated_tree(const ActiveTupleSet& a) {
  return build_truncated_tree(a.cutset, a.cardinalities, a.tuples);
}

/// h * (d - 1) * |C| with d the largest cutset cardinality.
std::size_t partial_count_bound(const TruncatedTree& tree);

/// Exact P(e) mass of the active tuples and of the partial tuples.
std::pair<double, double> partition_check(const BayesianNetwork& bn, const Evidence& e, const TruncatedTree& tree,
                                          std::size_t scope_cap = kDefaultScopeCap);

}  // namespace atb
