#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "atb/model.hpp"

namespace atb {

/// bounds[X][x] brackets P(X = x | e).
struct MarginalBounds {
  std::vector<std::vector<Interval>> bounds;

  static MarginalBounds vacuous(const BayesianNetwork& bn);
  const Interval& at(VarId v, Value x) const { return bounds[v][x]; }
  /// Largest endpoint movement between two bound sets of the same shape.
  static double max_change(const MarginalBounds& a, const MarginalBounds& b);
};

/// max or min of sum_b coefficients[b] * q(b) over distributions q on the
/// blanket configurations whose marginals respect `bounds`.
struct BlanketLp {
  /// Blanket variable cardinalities; configuration index has the first variable fastest.
  std::vector<std::size_t> cardinalities;
  /// bounds[i][v] constrains the q-mass of configurations with blanket variable i = v.
  std::vector<std::vector<Interval>> bounds;
  std::vector<double> coefficients;
  /// Configurations with admissible[b] false are forced to q(b) = 0. Empty means all admissible.
  std::vector<bool> admissible;

  std::size_t size() const { return coefficients.size(); }
  bool is_admissible(std::size_t b) const { return admissible.empty() || admissible[b]; }
  /// Value of blanket variable i in configuration b.
  Value digit(std::size_t b, std::size_t i) const;
};

enum class Sense { min, max };

/// Exact optimum by two-phase simplex; nullopt when the constraints are infeasible.
std::optional<double> solve_blanket_lp_exact(const BlanketLp& lp, Sense sense);

/// Relaxed optimum: for each blanket variable alone the problem is a
/// fractional knapsack solved exactly; the tightest of those (and of the
/// unconstrained extreme) is returned. Never tighter than the exact optimum.
/// Infeasible single-variable constraint sets are dropped.
double solve_blanket_lp_greedy(const BlanketLp& lp, Sense sense);

enum class LpMode { greedy, exact };

struct BdpOptions {
  std::size_t k = 1024;
  std::size_t max_iters = 50;
  double tol = 1e-6;
  LpMode lp = LpMode::greedy;
  /// Variables to update; empty means all. The set must be closed under
  /// the relevant Markov boundaries of its members (ancestral sets are).
  std::vector<VarId> scope;
  /// Called after every sweep with the sweep index and current bounds.
  std::function<void(std::size_t, const MarginalBounds&)> on_iteration;
};

/// Bound propagation over each variable's relevant Markov boundary, with
/// Gauss-Seidel sweeps in topological order. Observed variables get point
/// intervals; variables whose unobserved boundary space exceeds k keep [0,1].
MarginalBounds bdp_iterate(const BayesianNetwork& bn, const Evidence& e, const BdpOptions& opt = {});

}  // namespace atb
