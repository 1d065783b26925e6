#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace atb::testing {

StateTable::StateTable(const BayesianNetwork& bn) {
  const std::size_t n = bn.size();
  for (VarId v = 0; v < n; ++v) cards_.push_back(bn.cardinality(v));
  states_ = all_tuples(cards_);
  prob_.reserve(states_.size());
  for (const auto& s : states_) {
    double p = 1.0;
    for (VarId v = 0; v < n; ++v) {
      const Cpt& cpt = bn.cpt(v);
      std::size_t row = 0;
      for (std::size_t i = 0; i < cpt.parents().size(); ++i)
        row = row * cards_[cpt.parents()[i]] + s[cpt.parents()[i]];
      p *= cpt.table()[row * cards_[v] + s[v]];
    }
    prob_.push_back(p);
  }
}

double StateTable::mass(const std::vector<std::pair<VarId, Value>>& fixed) const {
  long double total = 0.0L;
  for (std::size_t i = 0; i < states_.size(); ++i) {
    bool ok = true;
    for (auto [v, x] : fixed)
      if (states_[i][v] != x) {
        ok = false;
        break;
      }
    if (ok) total += prob_[i];
  }
  return static_cast<double>(total);
}

double StateTable::mass(const Evidence& e) const { return mass(e.entries()); }

std::vector<std::vector<double>> StateTable::posterior(const Evidence& e) const {
  std::vector<std::vector<long double>> acc(cards_.size());
  for (std::size_t v = 0; v < cards_.size(); ++v) acc[v].assign(cards_[v], 0.0L);
  long double pe = 0.0L;
  for (std::size_t i = 0; i < states_.size(); ++i) {
    bool ok = true;
    for (auto [v, x] : e)
      if (states_[i][v] != x) ok = false;
    if (!ok) continue;
    pe += prob_[i];
    for (std::size_t v = 0; v < cards_.size(); ++v) acc[v][states_[i][v]] += prob_[i];
  }
  std::vector<std::vector<double>> out(cards_.size());
  if (pe <= 0.0L) return out;
  for (std::size_t v = 0; v < cards_.size(); ++v)
    for (long double a : acc[v]) out[v].push_back(static_cast<double>(a / pe));
  return out;
}

BayesianNetwork make_network(const std::vector<std::size_t>& cards, const std::vector<std::vector<VarId>>& parents,
                             const std::vector<std::vector<double>>& tables) {
  std::vector<Variable> vars;
  std::vector<Cpt> cpts;
  for (VarId v = 0; v < cards.size(); ++v) {
    vars.push_back({v, "v" + std::to_string(v), cards[v]});
    std::vector<std::size_t> pc;
    for (VarId p : parents[v]) pc.push_back(cards[p]);
    cpts.emplace_back(v, cards[v], parents[v], pc, tables[v]);
  }
  return BayesianNetwork(std::move(vars), std::move(cpts));
}

BayesianNetwork random_network(std::mt19937_64& rng, const RandomNetworkOptions& opt) {
  const std::size_t n = pick(rng, opt.min_vars, opt.max_vars);
  std::vector<std::size_t> cards(n);
  for (auto& c : cards) c = pick(rng, opt.min_card, opt.max_card);
  std::vector<std::vector<VarId>> parents(n);
  std::vector<std::vector<double>> tables(n);
  for (VarId v = 0; v < n; ++v) {
    std::vector<VarId> pool(v);
    for (VarId u = 0; u < v; ++u) pool[u] = u;
    std::shuffle(pool.begin(), pool.end(), rng);
    const std::size_t k = pick(rng, 0, std::min(opt.max_parents, v));
    parents[v].assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k));
    std::size_t rows = 1;
    for (VarId p : parents[v]) rows *= cards[p];
    for (std::size_t r = 0; r < rows; ++r) {
      std::vector<double> w(cards[v]);
      double z = 0.0;
      for (auto& x : w) {
        x = unit(rng) < opt.zero_entry_rate ? 0.0 : 0.02 + unit(rng);
        z += x;
      }
      if (z == 0.0) {
        w[pick(rng, 0, cards[v] - 1)] = 1.0;
        z = 1.0;
      }
      for (double x : w) tables[v].push_back(x / z);
    }
  }
  return make_network(cards, parents, tables);
}

Evidence random_evidence(const BayesianNetwork& bn, std::mt19937_64& rng, std::size_t max_size) {
  std::vector<Value> sample(bn.size());
  for (VarId v : bn.topological_order()) {
    const Cpt& cpt = bn.cpt(v);
    std::vector<Value> pv;
    for (VarId p : cpt.parents()) pv.push_back(sample[p]);
    const std::size_t row = cpt.row_of(pv);
    double u = unit(rng);
    Value chosen = 0;
    for (Value x = 0; x < cpt.child_cardinality(); ++x) {
      if (cpt.at(row, x) <= 0.0) continue;
      chosen = x;
      if (u < cpt.at(row, x)) break;
      u -= cpt.at(row, x);
    }
    sample[v] = chosen;
  }
  std::vector<VarId> ids(bn.size());
  for (VarId v = 0; v < bn.size(); ++v) ids[v] = v;
  std::shuffle(ids.begin(), ids.end(), rng);
  const std::size_t m = pick(rng, 0, std::min(max_size, bn.size() - 1));
  Evidence e;
  for (std::size_t i = 0; i < m; ++i) e.set(ids[i], sample[ids[i]]);
  return e;
}

BayesianNetwork chain_ab() { return make_network({2, 2}, {{}, {0}}, {{0.7, 0.3}, {0.8, 0.2, 0.3, 0.7}}); }

BayesianNetwork example_31_network() {
  std::vector<std::size_t> cards{2, 3, 2, 2};
  std::vector<std::vector<VarId>> parents(4);
  std::vector<std::vector<double>> tables;
  tables.push_back({0.55, 0.45});
  tables.push_back({0.2, 0.5, 0.3});
  tables.push_back({0.35, 0.65});
  tables.push_back({0.8, 0.2});
  double jitter = 0.0;
  for (VarId r = 0; r < 4; ++r) {
    const VarId b = cards.size();
    const VarId c = b + 1;
    const VarId d = b + 2;
    cards.insert(cards.end(), {2, 2, 2});
    parents.push_back({r});
    parents.push_back({r});
    parents.push_back({b, c});
    std::vector<double> tb;
    std::vector<double> tc;
    for (std::size_t x = 0; x < cards[r]; ++x) {
      const double pb = 0.15 + 0.3 * static_cast<double>(x) + jitter;
      const double pc = 0.7 - 0.25 * static_cast<double>(x) + jitter;
      tb.insert(tb.end(), {1.0 - pb, pb});
      tc.insert(tc.end(), {1.0 - pc, pc});
    }
    tables.push_back(tb);
    tables.push_back(tc);
    tables.push_back({0.9, 0.1, 0.35, 0.65, 0.45, 0.55, 0.05 + jitter, 0.95 - jitter});
    jitter += 0.03;
  }
  return make_network(cards, parents, tables);
}

std::size_t exact_treewidth(const UndirectedGraph& g) {
  const std::size_t n = g.size();
  if (n == 0) return 0;
  const std::size_t full = (std::size_t{1} << n) - 1;
  // q(S, v): vertices outside S + v reachable from v through S.
  auto q = [&](std::size_t s, std::size_t v) {
    std::size_t seen = std::size_t{1} << v;
    std::size_t out = 0;
    std::vector<std::size_t> stack{v};
    while (!stack.empty()) {
      const std::size_t u = stack.back();
      stack.pop_back();
      for (std::size_t w : g.neighbors(u)) {
        const std::size_t bit = std::size_t{1} << w;
        if (seen & bit) continue;
        seen |= bit;
        if (s & bit) {
          stack.push_back(w);
        } else {
          ++out;
        }
      }
    }
    return out;
  };
  constexpr std::size_t kInf = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> tw(full + 1, kInf);
  tw[0] = 0;
  for (std::size_t s = 1; s <= full; ++s) {
    for (std::size_t v = 0; v < n; ++v) {
      const std::size_t bit = std::size_t{1} << v;
      if (!(s & bit)) continue;
      const std::size_t rest = s & ~bit;
      tw[s] = std::min(tw[s], std::max(tw[rest], q(rest, v)));
    }
  }
  return tw[full];
}

bool dfs_loop_free(const BayesianNetwork& bn, const std::vector<VarId>& cut) {
  std::vector<std::vector<VarId>> adj(bn.size());
  for (VarId v = 0; v < bn.size(); ++v)
    for (VarId p : bn.parents(v)) {
      if (std::find(cut.begin(), cut.end(), p) != cut.end()) continue;
      adj[p].push_back(v);
      adj[v].push_back(p);
    }
  std::vector<int> state(bn.size(), 0);
  std::function<bool(VarId, VarId)> dfs = [&](VarId u, VarId from) {
    state[u] = 1;
    for (VarId w : adj[u]) {
      if (w == from) continue;
      if (state[w] == 1) return false;
      if (!dfs(w, u)) return false;
    }
    return true;
  };
  const VarId none = bn.size();
  for (VarId v = 0; v < bn.size(); ++v)
    if (state[v] == 0 && !dfs(v, none)) return false;
  return true;
}

namespace {

// Solves a k x k system by Gaussian elimination with partial pivoting.
std::optional<std::vector<double>> solve_dense(std::vector<std::vector<double>> a, std::vector<double> b) {
  const std::size_t k = b.size();
  for (std::size_t col = 0; col < k; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < k; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    if (std::abs(a[piv][col]) < 1e-12) return std::nullopt;
    std::swap(a[piv], a[col]);
    std::swap(b[piv], b[col]);
    for (std::size_t r = 0; r < k; ++r) {
      if (r == col) continue;
      const double f = a[r][col] / a[col][col];
      if (f == 0.0) continue;
      for (std::size_t c = col; c < k; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  for (std::size_t i = 0; i < k; ++i) b[i] /= a[i][i];
  return b;
}

void for_each_subset(std::size_t n, std::size_t k, const std::function<void(const std::vector<std::size_t>&)>& f) {
  std::vector<std::size_t> idx(k);
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t start, std::size_t depth) {
    if (depth == k) {
      f(idx);
      return;
    }
    for (std::size_t i = start; i + (k - depth) <= n; ++i) {
      idx[depth] = i;
      rec(i + 1, depth + 1);
    }
  };
  rec(0, 0);
}

}  // namespace

std::optional<double> lp_by_vertices(const BlanketLp& lp, Sense sense) {
  std::vector<std::size_t> cols;
  for (std::size_t b = 0; b < lp.size(); ++b)
    if (lp.is_admissible(b)) cols.push_back(b);
  // Rows as (coefficients over cols, rhs, is_upper); row 0 is the equality.
  struct Row {
    std::vector<double> a;
    double b;
    int kind;  // 0 equality, +1 "<=", -1 ">="
  };
  std::vector<Row> rows;
  rows.push_back({std::vector<double>(cols.size(), 1.0), 1.0, 0});
  for (std::size_t i = 0; i < lp.cardinalities.size(); ++i) {
    for (Value v = 0; v < lp.cardinalities[i]; ++v) {
      std::vector<double> a(cols.size(), 0.0);
      for (std::size_t j = 0; j < cols.size(); ++j) {
        std::size_t b = cols[j];
        for (std::size_t t = 0; t < i; ++t) b /= lp.cardinalities[t];
        if (b % lp.cardinalities[i] == v) a[j] = 1.0;
      }
      if (lp.bounds[i][v].lower > 0.0) rows.push_back({a, lp.bounds[i][v].lower, -1});
      if (lp.bounds[i][v].upper < 1.0) rows.push_back({a, lp.bounds[i][v].upper, +1});
    }
  }
  const double sign = sense == Sense::max ? 1.0 : -1.0;
  std::optional<double> best;
  const std::size_t n = cols.size();
  for (std::size_t k = 1; k <= std::min(n, rows.size()); ++k) {
    for_each_subset(rows.size() - 1, k - 1, [&](const std::vector<std::size_t>& extra_rows) {
      std::vector<std::size_t> tight{0};
      for (std::size_t r : extra_rows) tight.push_back(r + 1);
      for_each_subset(n, k, [&](const std::vector<std::size_t>& support) {
        std::vector<std::vector<double>> a(k, std::vector<double>(k));
        std::vector<double> rhs(k);
        for (std::size_t r = 0; r < k; ++r) {
          for (std::size_t c = 0; c < k; ++c) a[r][c] = rows[tight[r]].a[support[c]];
          rhs[r] = rows[tight[r]].b;
        }
        auto sol = solve_dense(a, rhs);
        if (!sol) return;
        std::vector<double> q(n, 0.0);
        for (std::size_t c = 0; c < k; ++c) {
          if ((*sol)[c] < -1e-9) return;
          q[support[c]] = std::max(0.0, (*sol)[c]);
        }
        for (const Row& row : rows) {
          double lhs = 0.0;
          for (std::size_t j = 0; j < n; ++j) lhs += row.a[j] * q[j];
          if (row.kind == 0 && std::abs(lhs - row.b) > 1e-9) return;
          if (row.kind > 0 && lhs > row.b + 1e-9) return;
          if (row.kind < 0 && lhs < row.b - 1e-9) return;
        }
        double obj = 0.0;
        for (std::size_t j = 0; j < n; ++j) obj += lp.coefficients[cols[j]] * q[j];
        if (!best || sign * obj > sign * *best) best = obj;
      });
    });
  }
  return best;
}

BlanketLp random_feasible_lp(std::mt19937_64& rng, std::size_t max_space, double point_rate) {
  BlanketLp lp;
  std::size_t space = 1;
  const std::size_t vars = pick(rng, 1, 4);
  for (std::size_t i = 0; i < vars; ++i) {
    const std::size_t c = pick(rng, 2, 3);
    if (space * c > max_space) break;
    lp.cardinalities.push_back(c);
    space *= c;
  }
  if (lp.cardinalities.empty()) {
    lp.cardinalities.push_back(2);
    space = 2;
  }
  std::vector<double> q(space);
  lp.admissible.assign(space, true);
  double z = 0.0;
  for (std::size_t b = 0; b < space; ++b) {
    if (unit(rng) < 0.1) lp.admissible[b] = false;
    q[b] = lp.admissible[b] ? unit(rng) : 0.0;
    z += q[b];
  }
  if (z == 0.0) {
    lp.admissible[0] = true;
    q[0] = 1.0;
    z = 1.0;
  }
  for (double& x : q) x /= z;
  for (std::size_t b = 0; b < space; ++b) lp.coefficients.push_back(unit(rng));
  for (std::size_t i = 0; i < lp.cardinalities.size(); ++i) {
    std::vector<double> marg(lp.cardinalities[i], 0.0);
    for (std::size_t b = 0; b < space; ++b) marg[lp.digit(b, i)] += q[b];
    std::vector<Interval> ivs;
    for (double m : marg) {
      const double r = unit(rng);
      if (r < point_rate) {
        ivs.push_back({m, m});
      } else if (r < point_rate + 0.2) {
        ivs.push_back({0.0, 1.0});
      } else {
        ivs.push_back({std::max(0.0, m - 0.3 * unit(rng)), std::min(1.0, m + 0.3 * unit(rng))});
      }
    }
    lp.bounds.push_back(ivs);
  }
  return lp;
}

Interval ExactBounder::bound(const PartialAssignment& a, const Extra& extra) const {
  const auto full = with_extra(a, extra);
  if (!full) return {0.0, 0.0};
  auto joint = combine(e_, *full);
  if (!joint) return {0.0, 0.0};
  const double p = table_.mass(*joint);
  return {p, p};
}

std::vector<std::vector<Value>> all_tuples(const std::vector<std::size_t>& cards) {
  std::vector<std::vector<Value>> out;
  std::vector<Value> t(cards.size(), 0);
  for (;;) {
    out.push_back(t);
    std::size_t d = cards.size();
    while (d > 0) {
      --d;
      if (++t[d] < cards[d]) break;
      t[d] = 0;
      if (d == 0) return out;
    }
    if (cards.empty()) return out;
  }
}

}  // namespace atb::testing
