#include "atb/bound_propagation.hpp"

#include <algorithm>
#include <limits>
#include <utility>

namespace atb {
namespace {

constexpr double kPivotEps = 1e-12;
constexpr double kFeasEps = 1e-9;

enum class RowKind { le, ge, eq };

struct LpRow {
  std::vector<double> a;
  RowKind kind;
  double b;
};

// Dense two-phase simplex with Bland's rule: max c.x s.t. rows, x >= 0.
// Returns nullopt when infeasible.
std::optional<double> simplex_max(const std::vector<double>& c, std::vector<LpRow> rows) {
  const std::size_t n = c.size();
  const std::size_t m = rows.size();
  for (LpRow& r : rows) {
    if (r.b < 0.0) {
      for (double& x : r.a) x = -x;
      r.b = -r.b;
      if (r.kind == RowKind::le) {
        r.kind = RowKind::ge;
      } else if (r.kind == RowKind::ge) {
        r.kind = RowKind::le;
      }
    }
  }
  std::size_t slacks = 0;
  std::size_t arts = 0;
  for (const LpRow& r : rows) {
    if (r.kind != RowKind::eq) ++slacks;
    if (r.kind != RowKind::le) ++arts;
  }
  const std::size_t first_art = n + slacks;
  const std::size_t cols = first_art + arts;
  std::vector<std::vector<double>> t(m, std::vector<double>(cols + 1, 0.0));
  std::vector<std::size_t> basis(m);
  std::size_t s = n;
  std::size_t art = first_art;
  for (std::size_t i = 0; i < m; ++i) {
    std::copy(rows[i].a.begin(), rows[i].a.end(), t[i].begin());
    t[i][cols] = rows[i].b;
    if (rows[i].kind == RowKind::le) {
      t[i][s] = 1.0;
      basis[i] = s++;
    } else {
      if (rows[i].kind == RowKind::ge) t[i][s++] = -1.0;
      t[i][art] = 1.0;
      basis[i] = art++;
    }
  }

  std::vector<double> r(cols + 1, 0.0);
  auto pivot = [&](std::size_t p, std::size_t j) {
    const double inv = 1.0 / t[p][j];
    for (double& x : t[p]) x *= inv;
    t[p][j] = 1.0;
    for (std::size_t i = 0; i < m; ++i) {
      if (i == p || t[i][j] == 0.0) continue;
      const double f = t[i][j];
      for (std::size_t k = 0; k <= cols; ++k) t[i][k] -= f * t[p][k];
      t[i][j] = 0.0;
    }
    const double f = r[j];
    if (f != 0.0)
      for (std::size_t k = 0; k <= cols; ++k) r[k] -= f * t[p][k];
    r[j] = 0.0;
    basis[p] = j;
  };
  auto optimize = [&](std::size_t allowed_cols) {
    for (;;) {
      std::size_t enter = allowed_cols;
      for (std::size_t j = 0; j < allowed_cols; ++j)
        if (r[j] > kPivotEps) {
          enter = j;
          break;
        }
      if (enter == allowed_cols) return true;
      std::size_t leave = m;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < m; ++i) {
        if (t[i][enter] <= kPivotEps) continue;
        const double ratio = t[i][cols] / t[i][enter];
        if (leave == m || ratio < best - kPivotEps) {
          best = ratio;
          leave = i;
        } else if (ratio <= best + kPivotEps && basis[i] < basis[leave]) {
          best = std::min(best, ratio);
          leave = i;
        }
      }
      if (leave == m) return false;  // unbounded
      pivot(leave, enter);
    }
  };

  // Phase 1: maximize minus the sum of artificials.
  for (std::size_t j = first_art; j < cols; ++j) r[j] = -1.0;
  for (std::size_t i = 0; i < m; ++i)
    if (basis[i] >= first_art)
      for (std::size_t k = 0; k <= cols; ++k) r[k] += t[i][k];
  optimize(cols);
  if (-r[cols] < -kFeasEps) return std::nullopt;

  // Drive artificials out of the basis; rows where that fails are redundant.
  std::vector<bool> dead(m, false);
  for (std::size_t i = 0; i < m; ++i) {
    if (basis[i] < first_art) continue;
    std::size_t j = 0;
    while (j < first_art && std::abs(t[i][j]) <= kPivotEps) ++j;
    if (j < first_art) {
      pivot(i, j);
    } else {
      dead[i] = true;
    }
  }
  for (std::size_t i = 0; i < m; ++i)
    if (dead[i]) std::fill(t[i].begin(), t[i].end(), 0.0);

  // Phase 2.
  std::fill(r.begin(), r.end(), 0.0);
  std::copy(c.begin(), c.end(), r.begin());
  for (std::size_t i = 0; i < m; ++i) {
    if (dead[i] || basis[i] >= n) continue;
    const double cb = c[basis[i]];
    if (cb != 0.0)
      for (std::size_t k = 0; k <= cols; ++k) r[k] -= cb * t[i][k];
  }
  for (std::size_t i = 0; i < m; ++i)
    if (!dead[i]) r[basis[i]] = 0.0;
  if (!optimize(first_art)) return std::numeric_limits<double>::infinity();
  return -r[cols];
}

std::vector<std::vector<Value>> digit_table(const BlanketLp& lp) {
  const std::size_t nv = lp.cardinalities.size();
  std::vector<std::vector<Value>> d(lp.size(), std::vector<Value>(nv, 0));
  std::vector<Value> cur(nv, 0);
  for (std::size_t b = 0; b < lp.size(); ++b) {
    d[b] = cur;
    for (std::size_t i = 0; i < nv; ++i) {
      if (++cur[i] < lp.cardinalities[i]) break;
      cur[i] = 0;
    }
  }
  return d;
}

// Greedy maximum; `sign` = -1 turns it into a minimum of the original.
double greedy_max(const BlanketLp& lp, double sign) {
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  double unconstrained = kNegInf;
  for (std::size_t b = 0; b < lp.size(); ++b)
    if (lp.is_admissible(b)) unconstrained = std::max(unconstrained, sign * lp.coefficients[b]);
  if (unconstrained == kNegInf) {
    for (std::size_t b = 0; b < lp.size(); ++b) unconstrained = std::max(unconstrained, sign * lp.coefficients[b]);
    return unconstrained;
  }
  double best = unconstrained;
  const auto digits = digit_table(lp);
  for (std::size_t i = 0; i < lp.cardinalities.size(); ++i) {
    const std::size_t card = lp.cardinalities[i];
    std::vector<double> group(card, kNegInf);
    for (std::size_t b = 0; b < lp.size(); ++b)
      if (lp.is_admissible(b)) group[digits[b][i]] = std::max(group[digits[b][i]], sign * lp.coefficients[b]);

    std::vector<double> lo(card);
    std::vector<double> hi(card);
    double lo_sum = 0.0;
    double hi_sum = 0.0;
    bool feasible = true;
    for (Value v = 0; v < card; ++v) {
      lo[v] = std::max(0.0, lp.bounds[i][v].lower);
      hi[v] = std::min(1.0, lp.bounds[i][v].upper);
      if (group[v] == kNegInf) hi[v] = 0.0;
      if (lo[v] > hi[v]) feasible = false;
      lo_sum += lo[v];
      hi_sum += hi[v];
    }
    if (!feasible || lo_sum > 1.0 + kFeasEps || hi_sum < 1.0 - kFeasEps) continue;

    std::vector<Value> order(card);
    for (Value v = 0; v < card; ++v) order[v] = v;
    std::sort(order.begin(), order.end(), [&](Value a, Value b) { return group[a] > group[b]; });
    double value = 0.0;
    double left = 1.0 - lo_sum;
    for (Value v = 0; v < card; ++v)
      if (lo[v] > 0.0) value += lo[v] * group[v];
    for (Value v : order) {
      if (left <= 0.0) break;
      const double pour = std::min(left, hi[v] - lo[v]);
      if (pour <= 0.0) continue;
      value += pour * group[v];
      left -= pour;
    }
    if (left > 0.0) value += left * group[order.front()];
    best = std::min(best, value);
  }
  return best;
}

}  // namespace

MarginalBounds MarginalBounds::vacuous(const BayesianNetwork& bn) {
  MarginalBounds mb;
  for (VarId v = 0; v < bn.size(); ++v) mb.bounds.emplace_back(bn.cardinality(v), Interval{0.0, 1.0});
  return mb;
}

double MarginalBounds::max_change(const MarginalBounds& a, const MarginalBounds& b) {
  double d = 0.0;
  for (std::size_t v = 0; v < a.bounds.size(); ++v)
    for (std::size_t x = 0; x < a.bounds[v].size(); ++x) {
      d = std::max(d, std::abs(a.bounds[v][x].lower - b.bounds[v][x].lower));
      d = std::max(d, std::abs(a.bounds[v][x].upper - b.bounds[v][x].upper));
    }
  return d;
}

Value BlanketLp::digit(std::size_t b, std::size_t i) const {
  for (std::size_t j = 0; j < i; ++j) b /= cardinalities[j];
  return b % cardinalities[i];
}

std::optional<double> solve_blanket_lp_exact(const BlanketLp& lp, Sense sense) {
  std::vector<std::size_t> cols;
  for (std::size_t b = 0; b < lp.size(); ++b)
    if (lp.is_admissible(b)) cols.push_back(b);
  if (cols.empty()) return std::nullopt;
  const double sign = sense == Sense::max ? 1.0 : -1.0;
  std::vector<double> c;
  for (std::size_t b : cols) c.push_back(sign * lp.coefficients[b]);

  std::vector<LpRow> rows;
  rows.push_back({std::vector<double>(cols.size(), 1.0), RowKind::eq, 1.0});
  for (std::size_t i = 0; i < lp.cardinalities.size(); ++i) {
    for (Value v = 0; v < lp.cardinalities[i]; ++v) {
      std::vector<double> a(cols.size(), 0.0);
      for (std::size_t j = 0; j < cols.size(); ++j)
        if (lp.digit(cols[j], i) == v) a[j] = 1.0;
      const Interval& iv = lp.bounds[i][v];
      if (iv.lower > 0.0) rows.push_back({a, RowKind::ge, iv.lower});
      if (iv.upper < 1.0) rows.push_back({a, RowKind::le, iv.upper});
    }
  }
  auto opt = simplex_max(c, std::move(rows));
  if (!opt) return std::nullopt;
  return sign * *opt;
}

double solve_blanket_lp_greedy(const BlanketLp& lp, Sense sense) {
  return sense == Sense::max ? greedy_max(lp, 1.0) : -greedy_max(lp, -1.0);
}

namespace {

struct VariablePlan {
  bool active = false;
  std::vector<VarId> free;          // unobserved boundary variables
  std::vector<double> coefficient;  // [b * card + x] = P(x | boundary configuration b)
  std::vector<bool> admissible;
};

VariablePlan plan_variable(const BayesianNetwork& bn, const Evidence& e, const std::vector<bool>& relevant_child,
                           VarId x, std::size_t k) {
  VariablePlan plan;
  std::vector<VarId> kids;
  for (VarId ch : bn.children(x))
    if (relevant_child[ch]) kids.push_back(ch);
  std::vector<VarId> boundary = bn.parents(x);
  for (VarId ch : kids) {
    boundary.push_back(ch);
    for (VarId p : bn.parents(ch))
      if (p != x) boundary.push_back(p);
  }
  std::sort(boundary.begin(), boundary.end());
  boundary.erase(std::unique(boundary.begin(), boundary.end()), boundary.end());

  std::vector<Value> values(bn.size(), 0);
  std::size_t space = 1;
  for (VarId b : boundary) {
    if (auto v = e.find(b)) {
      values[b] = *v;
      continue;
    }
    plan.free.push_back(b);
    if (space > k / bn.cardinality(b)) return plan;
    space *= bn.cardinality(b);
  }
  if (space > k) return plan;
  plan.active = true;

  auto cpt_value = [&](VarId v) {
    const Cpt& cpt = bn.cpt(v);
    std::vector<Value> pv;
    pv.reserve(cpt.parents().size());
    for (VarId p : cpt.parents()) pv.push_back(values[p]);
    return cpt.at(cpt.row_of(pv), values[v]);
  };
  const std::size_t dx = bn.cardinality(x);
  plan.coefficient.assign(space * dx, 0.0);
  plan.admissible.assign(space, false);
  std::vector<Value> digits(plan.free.size(), 0);
  std::vector<double> w(dx);
  for (std::size_t b = 0; b < space; ++b) {
    for (std::size_t i = 0; i < plan.free.size(); ++i) values[plan.free[i]] = digits[i];
    double z = 0.0;
    for (Value xv = 0; xv < dx; ++xv) {
      values[x] = xv;
      double p = cpt_value(x);
      for (std::size_t c = 0; c < kids.size() && p != 0.0; ++c) p *= cpt_value(kids[c]);
      w[xv] = p;
      z += p;
    }
    if (z > 0.0) {
      plan.admissible[b] = true;
      for (Value xv = 0; xv < dx; ++xv) plan.coefficient[b * dx + xv] = w[xv] / z;
    }
    for (std::size_t i = 0; i < digits.size(); ++i) {
      if (++digits[i] < bn.cardinality(plan.free[i])) break;
      digits[i] = 0;
    }
  }
  return plan;
}

}  // namespace

MarginalBounds bdp_iterate(const BayesianNetwork& bn, const Evidence& e, const BdpOptions& opt) {
  if (opt.k < 1) throw ModelError("bound propagation needs k >= 1");
  MarginalBounds mb = MarginalBounds::vacuous(bn);
  for (auto [v, x] : e)
    for (Value y = 0; y < bn.cardinality(v); ++y) mb.bounds[v][y] = y == x ? Interval{1.0, 1.0} : Interval{0.0, 0.0};

  std::vector<bool> in_scope(bn.size(), opt.scope.empty());
  for (VarId v : opt.scope) in_scope.at(v) = true;
  const std::vector<bool> relevant_child = observed_or_has_observed_descendant(bn, e);

  std::vector<VarId> order;
  std::vector<VariablePlan> plans(bn.size());
  for (VarId v : bn.topological_order()) {
    if (!in_scope[v] || e.contains(v)) continue;
    plans[v] = plan_variable(bn, e, relevant_child, v, opt.k);
    if (plans[v].active && std::find(plans[v].admissible.begin(), plans[v].admissible.end(), true) !=
                               plans[v].admissible.end())
      order.push_back(v);
  }

  BlanketLp lp;
  for (std::size_t it = 0; it < opt.max_iters && !order.empty(); ++it) {
    const MarginalBounds before = mb;
    for (VarId v : order) {
      const VariablePlan& plan = plans[v];
      const std::size_t dx = bn.cardinality(v);
      const std::size_t space = plan.admissible.size();
      lp.cardinalities.clear();
      lp.bounds.clear();
      for (VarId b : plan.free) {
        lp.cardinalities.push_back(bn.cardinality(b));
        lp.bounds.push_back(mb.bounds[b]);
      }
      lp.admissible = plan.admissible;
      lp.coefficients.resize(space);

      std::vector<Interval> next = mb.bounds[v];
      for (Value x = 0; x < dx; ++x) {
        for (std::size_t b = 0; b < space; ++b) lp.coefficients[b] = plan.coefficient[b * dx + x];
        double lo = 0.0;
        double hi = 1.0;
        if (opt.lp == LpMode::exact) {
          auto l = solve_blanket_lp_exact(lp, Sense::min);
          auto u = solve_blanket_lp_exact(lp, Sense::max);
          if (!l || !u) continue;
          lo = *l;
          hi = *u;
        } else {
          lo = solve_blanket_lp_greedy(lp, Sense::min);
          hi = solve_blanket_lp_greedy(lp, Sense::max);
        }
        if (lo > hi) std::swap(lo, hi);  // rounding on a point interval
        next[x].lower = std::max(next[x].lower, clamp01(lo));
        next[x].upper = std::min(next[x].upper, clamp01(hi));
      }
      double lower_sum = 0.0;
      double upper_sum = 0.0;
      for (const Interval& iv : next) {
        lower_sum += iv.lower;
        upper_sum += iv.upper;
      }
      for (Value x = 0; x < dx; ++x) {
        const double lo = 1.0 - (upper_sum - next[x].upper);
        const double hi = 1.0 - (lower_sum - next[x].lower);
        Interval cand{std::max(next[x].lower, lo), std::min(next[x].upper, hi)};
        if (cand.lower > cand.upper) cand = next[x];
        if (cand.lower <= cand.upper) mb.bounds[v][x] = cand;
      }
    }
    if (opt.on_iteration) opt.on_iteration(it, mb);
    if (MarginalBounds::max_change(before, mb) < opt.tol) break;
  }
  return mb;
}

}  // namespace atb
