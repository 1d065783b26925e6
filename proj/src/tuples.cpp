#include "atb/tuples.hpp"

#include <algorithm>
#include <map>
#include <random>

namespace atb {
namespace {

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

// Index drawn proportionally to `weights`; the last positive index absorbs rounding.
std::size_t draw(const std::vector<double>& weights, std::mt19937_64& rng) {
  const double total = compensated_sum(weights);
  double u = uniform01(rng) * total;
  std::size_t last = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    last = i;
    if (u < weights[i]) return i;
    u -= weights[i];
  }
  return last;
}

// Heavier first, then lexicographic.
bool ranks_before(double pa, const CutsetTuple& a, double pb, const CutsetTuple& b) {
  if (pa != pb) return pa > pb;
  return a < b;
}

std::vector<std::size_t> cutset_cards(const BayesianNetwork& bn, const Cutset& c) {
  std::vector<std::size_t> cards;
  for (VarId v : c.variables) cards.push_back(bn.cardinality(v));
  return cards;
}

bool next_tuple(CutsetTuple& t, const std::vector<std::size_t>& cards) {
  for (std::size_t d = t.size(); d-- > 0;) {
    if (++t[d] < cards[d]) return true;
    t[d] = 0;
  }
  return false;
}

}  // namespace

PartialAssignment to_assignment(const Cutset& c, const CutsetTuple& t) {
  PartialAssignment a;
  for (std::size_t i = 0; i < t.size(); ++i) a.push_back(c.variables[i], t[i]);
  return a;
}

double ActiveTupleSet::mass() const { return compensated_sum(pe); }
double ActiveTupleSet::prior_mass() const { return compensated_sum(prior); }

ActiveTupleSet ActiveTupleSet::prefix(std::size_t h) const {
  if (h > size()) throw ModelError("prefix longer than the active set");
  ActiveTupleSet out;
  out.cutset = cutset;
  out.cardinalities = cardinalities;
  out.tuples.assign(tuples.begin(), tuples.begin() + static_cast<std::ptrdiff_t>(h));
  out.pe.assign(pe.begin(), pe.begin() + static_cast<std::ptrdiff_t>(h));
  out.prior.assign(prior.begin(), prior.begin() + static_cast<std::ptrdiff_t>(h));
  if (!joint.empty()) out.joint.assign(joint.begin(), joint.begin() + static_cast<std::ptrdiff_t>(h));
  return out;
}

ActiveTupleSet make_active_set(const BayesianNetwork& bn, const Evidence& e, const Cutset& c,
                               std::vector<CutsetTuple> tuples, std::size_t scope_cap) {
  ActiveTupleSet set;
  set.cutset = c;
  set.cardinalities = cutset_cards(bn, c);
  for (std::size_t i = 0; i < tuples.size(); ++i) {
    if (tuples[i].size() != c.size()) throw ModelError("tuple length does not match the cutset");
    for (std::size_t k = 0; k < c.size(); ++k)
      if (tuples[i][k] >= set.cardinalities[k]) throw ModelError("tuple value out of range");
    for (std::size_t j = 0; j < i; ++j)
      if (tuples[j] == tuples[i]) throw ModelError("duplicate active tuple");
  }
  for (const auto& t : tuples) {
    const PartialAssignment a = to_assignment(c, t);
    set.pe.push_back(conditioned_joint(bn, e, a, scope_cap));
    set.prior.push_back(conditioned_joint(bn, Evidence{}, a, scope_cap));
  }
  set.tuples = std::move(tuples);
  return set;
}

void ensure_joint_tables(const BayesianNetwork& bn, const Evidence& e, ActiveTupleSet& set, std::size_t scope_cap) {
  if (set.joint.size() == set.size()) return;
  set.joint.clear();
  for (std::size_t i = 0; i < set.size(); ++i)
    set.joint.push_back(conditioned_joint_tables(bn, e, set.assignment(i), scope_cap).joint);
}

ActiveTupleSet select_tuples_gibbs(const BayesianNetwork& bn, const Evidence& e, const Cutset& c, std::size_t h,
                                   std::size_t sweeps, std::uint64_t seed, const TupleSelectionOptions& opt) {
  e.validate(bn);
  const std::size_t m = cutset_space_size(bn, c);
  if (h > m) throw ModelError("h = " + std::to_string(h) + " exceeds the cutset space size " + std::to_string(m));
  const auto cards = cutset_cards(bn, c);

  std::map<CutsetTuple, double> seen;
  auto evaluate = [&](const CutsetTuple& t) {
    auto it = seen.find(t);
    if (it != seen.end()) return it->second;
    const double p = conditioned_joint(bn, e, to_assignment(c, t), opt.scope_cap);
    seen.emplace(t, p);
    return p;
  };

  if (m <= opt.exhaustive_cap) {
    CutsetTuple t(c.size(), 0);
    do {
      evaluate(t);
    } while (next_tuple(t, cards));
  } else if (h > 0) {
    std::mt19937_64 rng(seed);
    CutsetTuple current(c.size(), 0);
    double p_current = 0.0;
    for (std::size_t attempt = 0; attempt < std::max<std::size_t>(1, opt.init_retries); ++attempt) {
      std::vector<Value> sample(bn.size(), 0);
      for (VarId v : bn.topological_order()) {
        if (auto x = e.find(v)) {
          sample[v] = *x;
          continue;
        }
        const Cpt& cpt = bn.cpt(v);
        std::vector<Value> pv;
        for (VarId p : cpt.parents()) pv.push_back(sample[p]);
        const std::size_t row = cpt.row_of(pv);
        std::vector<double> w(cpt.child_cardinality());
        for (Value x = 0; x < w.size(); ++x) w[x] = cpt.at(row, x);
        sample[v] = draw(w, rng);
      }
      for (std::size_t k = 0; k < c.size(); ++k) current[k] = sample[c.variables[k]];
      p_current = evaluate(current);
      if (p_current > 0.0) break;
    }
    for (std::size_t s = 0; s < sweeps; ++s) {
      for (std::size_t k = 0; k < c.size(); ++k) {
        std::vector<double> w(cards[k]);
        CutsetTuple t = current;
        for (Value x = 0; x < cards[k]; ++x) {
          t[k] = x;
          w[x] = evaluate(t);
        }
        if (compensated_sum(w) > 0.0) current[k] = draw(w, rng);
      }
    }
    // Top up with the lexicographically first unvisited tuples.
    CutsetTuple t(c.size(), 0);
    while (seen.size() < h) {
      evaluate(t);
      if (!next_tuple(t, cards)) break;
    }
  }

  std::vector<std::pair<double, CutsetTuple>> ranked;
  ranked.reserve(seen.size());
  for (const auto& [t, p] : seen) ranked.emplace_back(p, t);
  std::sort(ranked.begin(), ranked.end(),
            [](const auto& a, const auto& b) { return ranks_before(a.first, a.second, b.first, b.second); });

  ActiveTupleSet set;
  set.cutset = c;
  set.cardinalities = cards;
  for (std::size_t i = 0; i < h; ++i) {
    set.tuples.push_back(ranked[i].second);
    set.pe.push_back(ranked[i].first);
    set.prior.push_back(conditioned_joint(bn, Evidence{}, set.assignment(i), opt.scope_cap));
  }
  return set;
}

TruncatedTree build_truncated_tree(const Cutset& c, const std::vector<std::size_t>& cardinalities,
                                   const std::vector<CutsetTuple>& active) {
  TruncatedTree tree;
  tree.cutset = c;
  tree.cardinalities = cardinalities;
  tree.active = active;

  std::vector<CutsetTuple> sorted = active;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  if (sorted.empty()) {
    tree.partials.emplace_back();
    return tree;
  }

  // Walks the marked subtree spanned by sorted[lo, hi), all sharing `prefix`.
  CutsetTuple prefix;
  auto walk = [&](auto&& self, std::size_t lo, std::size_t hi) -> void {
    const std::size_t depth = prefix.size();
    if (depth == c.size()) return;
    std::size_t i = lo;
    for (Value v = 0; v < cardinalities[depth]; ++v) {
      std::size_t j = i;
      while (j < hi && sorted[j][depth] == v) ++j;
      prefix.push_back(v);
      if (j == i) {
        tree.partials.push_back(prefix);
      } else {
        self(self, i, j);
      }
      prefix.pop_back();
      i = j;
    }
  };
  walk(walk, 0, sorted.size());
  return tree;
}

std::size_t partial_count_bound(const TruncatedTree& tree) {
  std::size_t d = 1;
  for (std::size_t k : tree.cardinalities) d = std::max(d, k);
  return tree.active.size() * (d - 1) * tree.cutset.size();
}

std::pair<double, double> partition_check(const BayesianNetwork& bn, const Evidence& e, const TruncatedTree& tree,
                                          std::size_t scope_cap) {
  CompensatedSum active;
  CompensatedSum partial;
  for (const auto& t : tree.active) active += conditioned_joint(bn, e, to_assignment(tree.cutset, t), scope_cap);
  for (std::size_t j = 0; j < tree.size(); ++j) partial += conditioned_joint(bn, e, tree.assignment(j), scope_cap);
  return {active.value(), partial.value()};
}

}  // namespace atb
