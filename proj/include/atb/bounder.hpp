#pragma once

#include <optional>
#include <string>
#include <vector>

#include "atb/bound_propagation.hpp"
#include "atb/exact.hpp"
#include "atb/model.hpp"

namespace atb {

/// Optional single (variable, value) appended to a partial assignment.
using Extra = std::optional<Evidence::Entry>;

struct BounderCapabilities {
  /// Accepts any partial assignment, not only cutset prefixes.
  bool arbitrary_assignments = true;
  /// bound(a, nullopt).upper is exactly the prior P(a), so the uppers over a
  /// truncated frontier sum to one minus the active priors.
  bool prior_joint_upper = false;
};

/// Plug-in contract: bound(a, extra) brackets P(a, extra, e) for the
/// network and evidence the bounder was built with.
class JointBounder {
 public:
  virtual ~JointBounder() = default;
  virtual std::string name() const = 0;
  virtual BounderCapabilities capabilities() const = 0;
  /// Must be safe to call concurrently.
  virtual Interval bound(const PartialAssignment& a, const Extra& extra) const = 0;
};

/// a with `extra` appended; nullopt when extra contradicts a.
std::optional<PartialAssignment> with_extra(const PartialAssignment& a, const Extra& extra);

/// [0, P(a, extra)] with the prior computed by bucket elimination.
Interval bf_bounds(const BayesianNetwork& bn, const Evidence& e, const PartialAssignment& a, const Extra& extra,
                   std::size_t scope_cap = kDefaultScopeCap);

enum class BfPrior {
  joint,   ///< upper bound P(a, extra)
  prefix,  ///< upper bound P(a), ignoring extra
};

class BruteForceBounder : public JointBounder {
 public:
  BruteForceBounder(const BayesianNetwork& bn, const Evidence& e, BfPrior prior = BfPrior::joint,
                    std::size_t scope_cap = kDefaultScopeCap)
      : bn_(bn), e_(e), prior_(prior), scope_cap_(scope_cap) {}

  std::string name() const override { return "bf"; }
  BounderCapabilities capabilities() const override { return {true, true}; }
  Interval bound(const PartialAssignment& a, const Extra& extra) const override;

 private:
  const BayesianNetwork& bn_;
  const Evidence& e_;
  BfPrior prior_;
  std::size_t scope_cap_;
};

struct AbdpOptions {
  BdpOptions bdp;
  /// Order of the evidence factors in the chain rule; empty means topological.
  std::vector<VarId> evidence_order;
  std::size_t scope_cap = kDefaultScopeCap;
};

/// P(a, extra) * prod_j [L_j, U_j], where [L_j, U_j] bounds
/// P(e_j | a, extra, e_1..e_{j-1}) by bound propagation on the ancestral
/// network of the conditioning set; intersected with bf_bounds.
Interval abdp_joint_bounds(const BayesianNetwork& bn, const Evidence& e, const PartialAssignment& a,
                           const Extra& extra, const AbdpOptions& opt = {});

class AbdpBounder : public JointBounder {
 public:
  AbdpBounder(const BayesianNetwork& bn, const Evidence& e, AbdpOptions opt = {})
      : bn_(bn), e_(e), opt_(std::move(opt)) {}

  std::string name() const override { return "abdp"; }
  BounderCapabilities capabilities() const override { return {true, false}; }
  Interval bound(const PartialAssignment& a, const Extra& extra) const override {
    return abdp_joint_bounds(bn_, e_, a, extra, opt_);
  }

 private:
  const BayesianNetwork& bn_;
  const Evidence& e_;
  AbdpOptions opt_;
};

}  // namespace atb
