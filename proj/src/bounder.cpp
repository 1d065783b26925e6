#include "atb/bounder.hpp"

#include <algorithm>

namespace atb {

std::optional<PartialAssignment> with_extra(const PartialAssignment& a, const Extra& extra) {
  if (!extra) return a;
  if (auto x = a.find(extra->first)) {
    if (*x != extra->second) return std::nullopt;
    return a;
  }
  return a.extended(extra->first, extra->second);
}

Interval bf_bounds(const BayesianNetwork& bn, const Evidence&, const PartialAssignment& a, const Extra& extra,
                   std::size_t scope_cap) {
  const auto full = with_extra(a, extra);
  if (!full) return {0.0, 0.0};
  return {0.0, clamp01(conditioned_joint(bn, Evidence{}, *full, scope_cap))};
}

Interval BruteForceBounder::bound(const PartialAssignment& a, const Extra& extra) const {
  return bf_bounds(bn_, e_, a, prior_ == BfPrior::joint ? extra : Extra{}, scope_cap_);
}

Interval abdp_joint_bounds(const BayesianNetwork& bn, const Evidence& e, const PartialAssignment& a,
                           const Extra& extra, const AbdpOptions& opt) {
  const auto full = with_extra(a, extra);
  if (!full) return {0.0, 0.0};
  const double prior = clamp01(conditioned_joint(bn, Evidence{}, *full, opt.scope_cap));
  if (prior == 0.0 || !combine(e, *full)) return {0.0, 0.0};

  std::vector<VarId> chain;
  if (opt.evidence_order.empty()) {
    for (auto [v, x] : e) chain.push_back(v);
    std::sort(chain.begin(), chain.end(),
              [&](VarId u, VarId v) { return bn.topological_rank(u) < bn.topological_rank(v); });
  } else {
    chain = opt.evidence_order;
    for (auto [v, x] : e)
      if (std::find(chain.begin(), chain.end(), v) == chain.end()) chain.push_back(v);
  }

  Evidence observed;
  for (auto [v, x] : *full) observed.set(v, x);
  double lower = prior;
  double upper = prior;
  BdpOptions bdp = opt.bdp;
  for (VarId ej : chain) {
    const auto value = e.find(ej);
    if (!value || observed.contains(ej)) continue;
    std::vector<VarId> seeds{ej};
    for (auto [v, x] : observed) seeds.push_back(v);
    bdp.scope = ancestral_set(bn, seeds);
    const Interval step = bdp_iterate(bn, observed, bdp).at(ej, *value);
    lower *= step.lower;
    upper *= step.upper;
    if (upper == 0.0) break;
    observed.set(ej, *value);
  }
  return {std::min(lower, prior), std::min(upper, prior)};
}

}  // namespace atb
