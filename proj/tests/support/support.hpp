#pragma once

// Independent reference implementations used only by tests.

#include <cstdint>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include "atb/bound_propagation.hpp"
#include "atb/bounder.hpp"
#include "atb/graph.hpp"
#include "atb/model.hpp"

namespace atb::testing {

/// Every full assignment with its probability, computed straight from the
/// raw CPT tables.
class StateTable {
 public:
  explicit StateTable(const BayesianNetwork& bn);

  std::size_t size() const { return prob_.size(); }
  /// Sum of P(s) over states agreeing with every (variable, value) pair.
  double mass(const std::vector<std::pair<VarId, Value>>& fixed) const;
  double mass(const Evidence& e) const;
  /// P(X = x | e) for every variable; empty tables when P(e) = 0.
  std::vector<std::vector<double>> posterior(const Evidence& e) const;

 private:
  std::vector<std::size_t> cards_;
  std::vector<std::vector<Value>> states_;
  std::vector<double> prob_;
};

struct RandomNetworkOptions {
  std::size_t min_vars = 4;
  std::size_t max_vars = 10;
  std::size_t min_card = 2;
  std::size_t max_card = 3;
  std::size_t max_parents = 3;
  double zero_entry_rate = 0.05;
};

BayesianNetwork random_network(std::mt19937_64& rng, const RandomNetworkOptions& opt = {});

/// Random evidence on 0..max_size variables with values taken from one forward
/// sample, so P(e) > 0.
Evidence random_evidence(const BayesianNetwork& bn, std::mt19937_64& rng, std::size_t max_size = 3);

/// Network from explicit structure: cards, parents per variable, flat tables
/// (parents in listed order, last parent fastest, child innermost).
BayesianNetwork make_network(const std::vector<std::size_t>& cards, const std::vector<std::vector<VarId>>& parents,
                             const std::vector<std::vector<double>>& tables);

/// Chain A -> B with P(A=1) = 0.3, P(B=1|A=0) = 0.2, P(B=1|A=1) = 0.7.
BayesianNetwork chain_ab();
/// Four roots (cards 2,3,2,2); root k heads its own diamond of binary nodes.
BayesianNetwork example_31_network();

/// Exact treewidth by dynamic programming over vertex subsets (n <= 16).
std::size_t exact_treewidth(const UndirectedGraph& g);

/// Cycle test on the skeleton after deleting the out-edges of `cut`, by DFS.
bool dfs_loop_free(const BayesianNetwork& bn, const std::vector<VarId>& cut);

/// Optimum of a BlanketLp by enumerating basic solutions (size() <= 16).
std::optional<double> lp_by_vertices(const BlanketLp& lp, Sense sense);

/// Random LP whose constraints are feasible: intervals are drawn around the
/// marginals of a random distribution.
BlanketLp random_feasible_lp(std::mt19937_64& rng, std::size_t max_space, double point_rate = 0.0);

/// Plug-in that answers with the exact joint probability (tests the assembly
/// arithmetic with exact values substituted).
class ExactBounder : public JointBounder {
 public:
  ExactBounder(const StateTable& table, const Evidence& e) : table_(table), e_(e) {}
  std::string name() const override { return "exact"; }
  BounderCapabilities capabilities() const override { return {true, false}; }
  Interval bound(const PartialAssignment& a, const Extra& extra) const override;

 private:
  const StateTable& table_;
  const Evidence& e_;
};

/// Uniform double in [0, 1).
inline double unit(std::mt19937_64& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }
inline std::size_t pick(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

/// All full tuples of the given cardinalities in lexicographic order.
std::vector<std::vector<Value>> all_tuples(const std::vector<std::size_t>& cards);

}  // namespace atb::testing
