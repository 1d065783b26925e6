#pragma once

#include <vector>

#include "atb/graph.hpp"
#include "atb/model.hpp"

namespace atb {

inline constexpr std::size_t kDefaultScopeCap = std::size_t{1} << 22;
inline constexpr std::size_t kOracleStateCap = std::size_t{1} << 20;
inline constexpr std::size_t kExactCutsetCap = std::size_t{1} << 16;

/// posterior[X][x] = P(X = x | e).
using PosteriorTables = std::vector<std::vector<double>>;

/// joint[X][x] = P(X = x, e) for every variable, observed ones included
/// (an observed X carries P(e) at its value and 0 elsewhere).
struct JointTables {
  double pe = 0.0;
  std::vector<std::vector<double>> joint;
};

struct ExactResult {
  double pe = 0.0;
  PosteriorTables posterior;
};

/// P(e) by bucket elimination along `o`, which must order every unobserved
/// variable. Barren variables are pruned first. Throws InferenceError when an
/// intermediate table would exceed `scope_cap` entries.
double bucket_eliminate_pe(const BayesianNetwork& bn, const Evidence& e, const Ordering& o,
                           std::size_t scope_cap = kDefaultScopeCap);
/// Same, with a min-fill ordering of the pruned network.
double bucket_eliminate_pe(const BayesianNetwork& bn, const Evidence& e, std::size_t scope_cap = kDefaultScopeCap);

/// P(x, e) for every variable and value, one elimination per unobserved variable.
JointTables joint_tables(const BayesianNetwork& bn, const Evidence& e, std::size_t scope_cap = kDefaultScopeCap);

/// P(x | e) for every variable. Throws InferenceError when P(e) = 0.
PosteriorTables bucket_eliminate_marginals(const BayesianNetwork& bn, const Evidence& e,
                                           std::size_t scope_cap = kDefaultScopeCap);

/// P(a, e); 0 when `a` contradicts `e`.
double conditioned_joint(const BayesianNetwork& bn, const Evidence& e, const PartialAssignment& a,
                         std::size_t scope_cap = kDefaultScopeCap);
/// P(x, a, e) for every variable; all zero when `a` contradicts `e`.
JointTables conditioned_joint_tables(const BayesianNetwork& bn, const Evidence& e, const PartialAssignment& a,
                                     std::size_t scope_cap = kDefaultScopeCap);

/// Brute-force summation over all full assignments. Throws InferenceError
/// past kOracleStateCap states. Posteriors are all zero when P(e) = 0.
ExactResult enumerate_oracle(const BayesianNetwork& bn, const Evidence& e);

/// Sum over every tuple of `c`. Throws InferenceError when the cutset space
/// exceeds `cap` or P(e) = 0.
ExactResult cutset_condition_exact(const BayesianNetwork& bn, const Evidence& e, const Cutset& c,
                                   std::size_t cap = kExactCutsetCap, std::size_t scope_cap = kDefaultScopeCap);

}  // namespace atb
