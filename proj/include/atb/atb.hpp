#pragma once

#include <map>
#include <mutex>
#include <vector>

#include "atb/bounder.hpp"
#include "atb/tuples.hpp"

namespace atb {

/// Memo of plug-in results keyed by (partial tuple, extra). Thread-safe.
class BoundCache {
 public:
  using Key = std::pair<CutsetTuple, Extra>;

  BoundCache(const JointBounder& bounder, const Cutset& cutset) : bounder_(bounder), cutset_(cutset) {}

  const JointBounder& bounder() const { return bounder_; }
  Interval get(const CutsetTuple& prefix, const Extra& extra);
  /// Evaluates the missing keys, spreading them over `jobs` threads.
  void prefill(const std::vector<Key>& keys, std::size_t jobs);
  /// Number of bounder calls made so far (cache misses).
  std::size_t evaluations() const;

 private:
  const JointBounder& bounder_;
  Cutset cutset_;
  mutable std::mutex mu_;
  std::map<Key, Interval> memo_;
  std::size_t evaluations_ = 0;
};

enum class CutsetCase2 {
  direct,      ///< bound P(c_{1:q}, c'_k, e) through the bounder
  decomposed,  ///< upper P(c'_k | c_{1:q}) * U(c_{1:q}, e); lower as direct
};

struct AtbOptions {
  CutsetCase2 cutset_case2 = CutsetCase2::direct;
  std::size_t scope_cap = kDefaultScopeCap;
};

/// Everything the assembly needs. `active` must carry joint tables.
struct AtbInputs {
  const BayesianNetwork& bn;
  const Evidence& e;
  const ActiveTupleSet& active;
  const TruncatedTree& tree;
  BoundCache& cache;
  AtbOptions options = {};
};

/// Intervals for every value of one variable.
struct VariableBounds {
  VarId variable = 0;
  std::vector<Interval> intervals;
  /// Distinct plug-in queries this variable's assembly consumed.
  std::size_t queries = 0;
  bool degenerate = false;
  std::size_t clamped = 0;
};

/// Non-cutset, unobserved X. Lower bound takes the tighter of the two
/// denominator bounds per partial tuple.
VariableBounds atb_variable_bounds(const AtbInputs& in, VarId x);
/// Cutset variable C_k, all values.
VariableBounds atb_cutset_variable_bounds(const AtbInputs& in, VarId ck);

Interval atb_marginal_bounds(const AtbInputs& in, VarId x, Value value);
Interval atb_cutset_marginal_bounds(const AtbInputs& in, VarId ck, Value value);

struct EvidenceBounds {
  Interval interval;
  bool clamped = false;
};
EvidenceBounds atb_evidence_bounds(const AtbInputs& in);

/// 1 - sum of active priors, floored at zero.
double unexplored_prior_mass(const ActiveTupleSet& active);

struct BcBounds {
  std::vector<Interval> intervals;
  bool degenerate = false;  // S = 0
};
/// Bounded-conditioning baseline for every value of X.
BcBounds bounded_conditioning_bounds(const BayesianNetwork& bn, const Evidence& e, const ActiveTupleSet& active,
                                     VarId x);
Interval bounded_conditioning_bounds(const AtbInputs& in, VarId x, Value value);

/// R / (S + R); 1 when S + R = 0.
double interval_bound_ih(const ActiveTupleSet& active);
inline double interval_bound_ih(const AtbInputs& in) { return interval_bound_ih(in.active); }

struct VariableReport {
  VarId variable = 0;
  bool cutset = false;
  std::vector<Interval> atb;
  std::vector<Interval> bc;
  std::size_t queries = 0;
  bool degenerate = false;
  bool bc_degenerate = false;
};

struct BoundsReport {
  std::vector<VariableReport> variables;  // unobserved variables, ascending id
  Interval pe;
  std::size_t h = 0;
  std::size_t m_prime = 0;
  std::size_t cutset_size = 0;
  double s = 0.0;  // sum of active P(c^i, e)
  double r = 0.0;  // unexplored prior mass
  double i_h = 1.0;
  std::size_t bounder_evaluations = 0;
  std::size_t max_queries_per_variable = 0;
  std::size_t clamp_events = 0;
  std::size_t degenerate_count = 0;
};

/// Bounds for every unobserved variable and for P(e). When jobs > 1 the
/// plug-in queries are evaluated concurrently before assembly.
BoundsReport compute_bounds_report(const AtbInputs& in, std::size_t jobs = 1);

}  // namespace atb
