#include "atb/exact.hpp"

#include <algorithm>
#include <limits>
#include <optional>

namespace atb {
namespace {

constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

// Table over `vars` (ascending); the first variable varies fastest.
struct Factor {
  std::vector<VarId> vars;
  std::vector<std::size_t> cards;
  std::vector<double> table{1.0};
};

std::size_t checked_size(const std::vector<std::size_t>& cards, std::size_t cap) {
  std::size_t m = 1;
  for (std::size_t c : cards) {
    if (c != 0 && m > cap / c) throw InferenceError("bucket table exceeds the scope cap of " + std::to_string(cap));
    m *= c;
  }
  if (m > cap) throw InferenceError("bucket table exceeds the scope cap of " + std::to_string(cap));
  return m;
}

Factor from_cpt(const BayesianNetwork& bn, VarId v, const Evidence& e) {
  const Cpt& cpt = bn.cpt(v);
  std::vector<VarId> family = cpt.parents();
  family.push_back(v);

  Factor f;
  for (VarId u : family)
    if (!e.contains(u)) f.vars.push_back(u);
  std::sort(f.vars.begin(), f.vars.end());
  for (VarId u : f.vars) f.cards.push_back(bn.cardinality(u));
  f.table.assign(checked_size(f.cards, kNone), 0.0);

  std::vector<std::size_t> slot(family.size(), kNone);
  std::vector<Value> values(family.size(), 0);
  for (std::size_t i = 0; i < family.size(); ++i) {
    if (auto x = e.find(family[i])) {
      values[i] = *x;
    } else {
      slot[i] = static_cast<std::size_t>(std::lower_bound(f.vars.begin(), f.vars.end(), family[i]) - f.vars.begin());
    }
  }
  std::vector<Value> digits(f.vars.size(), 0);
  std::vector<Value> parent_values(cpt.parents().size());
  for (std::size_t idx = 0; idx < f.table.size(); ++idx) {
    for (std::size_t i = 0; i < family.size(); ++i)
      if (slot[i] != kNone) values[i] = digits[slot[i]];
    std::copy(values.begin(), values.end() - 1, parent_values.begin());
    f.table[idx] = cpt.at(cpt.row_of(parent_values), values.back());
    for (std::size_t d = 0; d < digits.size(); ++d) {
      if (++digits[d] < f.cards[d]) break;
      digits[d] = 0;
    }
  }
  return f;
}

// Product of `in`, with `sum_out` (if not kNone) marginalized away.
Factor combine(const std::vector<const Factor*>& in, VarId sum_out, std::size_t cap) {
  Factor scope;
  for (const Factor* f : in) scope.vars.insert(scope.vars.end(), f->vars.begin(), f->vars.end());
  std::sort(scope.vars.begin(), scope.vars.end());
  scope.vars.erase(std::unique(scope.vars.begin(), scope.vars.end()), scope.vars.end());
  const std::size_t k = scope.vars.size();
  scope.cards.resize(k);
  for (const Factor* f : in)
    for (std::size_t i = 0; i < f->vars.size(); ++i)
      scope.cards[static_cast<std::size_t>(std::lower_bound(scope.vars.begin(), scope.vars.end(), f->vars[i]) -
                                           scope.vars.begin())] = f->cards[i];
  const std::size_t total = checked_size(scope.cards, cap);

  Factor out;
  for (std::size_t i = 0; i < k; ++i) {
    if (scope.vars[i] == sum_out) continue;
    out.vars.push_back(scope.vars[i]);
    out.cards.push_back(scope.cards[i]);
  }
  out.table.assign(checked_size(out.cards, cap), 0.0);

  // strides[f][d]: step in factor f's table when scope digit d increments.
  const std::size_t nf = in.size();
  std::vector<std::vector<std::size_t>> strides(nf + 1, std::vector<std::size_t>(k, 0));
  auto fill_strides = [&](const Factor& f, std::vector<std::size_t>& s) {
    std::size_t step = 1;
    for (std::size_t i = 0; i < f.vars.size(); ++i) {
      const auto d = static_cast<std::size_t>(std::lower_bound(scope.vars.begin(), scope.vars.end(), f.vars[i]) -
                                              scope.vars.begin());
      s[d] = step;
      step *= f.cards[i];
    }
  };
  for (std::size_t j = 0; j < nf; ++j) fill_strides(*in[j], strides[j]);
  fill_strides(out, strides[nf]);

  std::vector<std::size_t> index(nf + 1, 0);
  std::vector<Value> digits(k, 0);
  for (std::size_t step = 0; step < total; ++step) {
    double p = 1.0;
    for (std::size_t j = 0; j < nf && p != 0.0; ++j) p *= in[j]->table[index[j]];
    out.table[index[nf]] += p;
    for (std::size_t d = 0; d < k; ++d) {
      if (++digits[d] < scope.cards[d]) {
        for (std::size_t j = 0; j <= nf; ++j) index[j] += strides[j][d];
        break;
      }
      digits[d] = 0;
      for (std::size_t j = 0; j <= nf; ++j) index[j] -= strides[j][d] * (scope.cards[d] - 1);
    }
  }
  return out;
}

// Eliminates `sequence` in order; the product of what is left is returned.
Factor eliminate(std::vector<Factor> factors, const std::vector<VarId>& sequence, std::size_t n, std::size_t cap) {
  std::vector<std::size_t> pos(n, kNone);
  for (std::size_t i = 0; i < sequence.size(); ++i) pos[sequence[i]] = i;

  std::vector<std::vector<Factor>> buckets(sequence.size());
  std::vector<Factor> residual;
  auto place = [&](Factor&& f) {
    std::size_t first = kNone;
    for (VarId v : f.vars) first = std::min(first, pos[v]);
    if (first == kNone) {
      residual.push_back(std::move(f));
    } else {
      buckets[first].push_back(std::move(f));
    }
  };
  for (Factor& f : factors) place(std::move(f));

  for (std::size_t i = 0; i < sequence.size(); ++i) {
    if (buckets[i].empty()) continue;
    std::vector<const Factor*> in;
    for (const Factor& f : buckets[i]) in.push_back(&f);
    Factor message = combine(in, sequence[i], cap);
    buckets[i].clear();
    place(std::move(message));
  }
  std::vector<const Factor*> in;
  for (const Factor& f : residual) in.push_back(&f);
  return combine(in, kNone, cap);
}

// Mixed-radix increment, last digit fastest, skipping `fixed` digits.
// Returns false after wrapping past the final assignment.
bool advance(std::vector<Value>& digits, const std::vector<std::size_t>& cards, const std::vector<bool>* fixed) {
  for (std::size_t d = digits.size(); d-- > 0;) {
    if (fixed && (*fixed)[d]) continue;
    if (++digits[d] < cards[d]) return true;
    digits[d] = 0;
  }
  return false;
}

struct Problem {
  std::vector<Factor> factors;
  std::vector<VarId> unobserved;  // relevant, unobserved, not kept
};

Problem prepare(const BayesianNetwork& bn, const Evidence& e, std::optional<VarId> keep) {
  std::vector<VarId> seeds;
  for (auto [v, x] : e) seeds.push_back(v);
  if (keep) seeds.push_back(*keep);
  Problem pr;
  for (VarId v : ancestral_set(bn, seeds)) {
    pr.factors.push_back(from_cpt(bn, v, e));
    if (!e.contains(v) && v != keep) pr.unobserved.push_back(v);
  }
  return pr;
}

std::vector<VarId> min_fill_sequence(const BayesianNetwork& bn, const std::vector<VarId>& vars) {
  std::vector<bool> include(bn.size(), false);
  for (VarId v : vars) include[v] = true;
  return min_fill_ordering(moral_graph(bn), include).elimination_sequence();
}

Factor run(const BayesianNetwork& bn, const Evidence& e, std::optional<VarId> keep, std::size_t cap) {
  Problem pr = prepare(bn, e, keep);
  const auto seq = min_fill_sequence(bn, pr.unobserved);
  return eliminate(std::move(pr.factors), seq, bn.size(), cap);
}

}  // namespace

double bucket_eliminate_pe(const BayesianNetwork& bn, const Evidence& e, const Ordering& o, std::size_t scope_cap) {
  e.validate(bn);
  Problem pr = prepare(bn, e, std::nullopt);
  std::vector<bool> needed(bn.size(), false);
  for (VarId v : pr.unobserved) needed[v] = true;
  std::vector<VarId> seq;
  for (VarId v : o.elimination_sequence()) {
    if (v >= bn.size()) throw ModelError("ordering mentions unknown variable " + std::to_string(v));
    if (needed[v]) {
      seq.push_back(v);
      needed[v] = false;
    }
  }
  if (std::find(needed.begin(), needed.end(), true) != needed.end())
    throw ModelError("ordering does not cover every unobserved variable");
  return eliminate(std::move(pr.factors), seq, bn.size(), scope_cap).table[0];
}

double bucket_eliminate_pe(const BayesianNetwork& bn, const Evidence& e, std::size_t scope_cap) {
  e.validate(bn);
  return run(bn, e, std::nullopt, scope_cap).table[0];
}

JointTables joint_tables(const BayesianNetwork& bn, const Evidence& e, std::size_t scope_cap) {
  e.validate(bn);
  JointTables jt;
  jt.pe = run(bn, e, std::nullopt, scope_cap).table[0];
  jt.joint.resize(bn.size());
  for (VarId v = 0; v < bn.size(); ++v) {
    jt.joint[v].assign(bn.cardinality(v), 0.0);
    if (auto x = e.find(v)) {
      jt.joint[v][*x] = jt.pe;
    } else if (jt.pe == 0.0) {
      continue;
    } else {
      jt.joint[v] = run(bn, e, v, scope_cap).table;
    }
  }
  return jt;
}

PosteriorTables bucket_eliminate_marginals(const BayesianNetwork& bn, const Evidence& e, std::size_t scope_cap) {
  JointTables jt = joint_tables(bn, e, scope_cap);
  if (jt.pe <= 0.0) throw InferenceError("evidence has zero probability");
  PosteriorTables post = std::move(jt.joint);
  for (VarId v = 0; v < bn.size(); ++v) {
    if (auto x = e.find(v)) {
      std::fill(post[v].begin(), post[v].end(), 0.0);
      post[v][*x] = 1.0;
      continue;
    }
    const double z = compensated_sum(post[v]);
    for (double& p : post[v]) p /= z;
  }
  return post;
}

double conditioned_joint(const BayesianNetwork& bn, const Evidence& e, const PartialAssignment& a,
                         std::size_t scope_cap) {
  auto ea = combine(e, a);
  if (!ea) return 0.0;
  return bucket_eliminate_pe(bn, *ea, scope_cap);
}

JointTables conditioned_joint_tables(const BayesianNetwork& bn, const Evidence& e, const PartialAssignment& a,
                                     std::size_t scope_cap) {
  auto ea = combine(e, a);
  if (!ea) {
    JointTables jt;
    for (VarId v = 0; v < bn.size(); ++v) jt.joint.emplace_back(bn.cardinality(v), 0.0);
    return jt;
  }
  return joint_tables(bn, *ea, scope_cap);
}

ExactResult enumerate_oracle(const BayesianNetwork& bn, const Evidence& e) {
  e.validate(bn);
  std::size_t states = 1;
  for (VarId v = 0; v < bn.size(); ++v) {
    states *= bn.cardinality(v);
    if (states > kOracleStateCap) throw InferenceError("state space too large for enumeration");
  }
  std::vector<std::vector<CompensatedSum>> acc(bn.size());
  for (VarId v = 0; v < bn.size(); ++v) acc[v].resize(bn.cardinality(v));
  CompensatedSum pe;

  std::vector<Value> values(bn.size(), 0);
  std::vector<std::size_t> cards(bn.size());
  std::vector<bool> fixed(bn.size(), false);
  for (VarId v = 0; v < bn.size(); ++v) cards[v] = bn.cardinality(v);
  for (auto [v, x] : e) {
    values[v] = x;
    fixed[v] = true;
  }
  for (;;) {
    const double p = joint_probability(bn, values);
    pe += p;
    for (VarId v = 0; v < bn.size(); ++v) acc[v][values[v]] += p;
    if (!advance(values, cards, &fixed)) break;
  }

  ExactResult r;
  r.pe = pe.value();
  r.posterior.resize(bn.size());
  for (VarId v = 0; v < bn.size(); ++v) {
    r.posterior[v].assign(bn.cardinality(v), 0.0);
    if (r.pe > 0.0)
      for (Value x = 0; x < bn.cardinality(v); ++x) r.posterior[v][x] = acc[v][x].value() / r.pe;
  }
  return r;
}

ExactResult cutset_condition_exact(const BayesianNetwork& bn, const Evidence& e, const Cutset& c, std::size_t cap,
                                   std::size_t scope_cap) {
  e.validate(bn);
  if (cutset_space_size(bn, c) > cap) throw InferenceError("cutset space exceeds the exact-conditioning cap");
  std::vector<std::vector<CompensatedSum>> acc(bn.size());
  for (VarId v = 0; v < bn.size(); ++v) acc[v].resize(bn.cardinality(v));
  CompensatedSum pe;

  std::vector<Value> digits(c.size(), 0);
  std::vector<std::size_t> cards;
  for (VarId v : c.variables) cards.push_back(bn.cardinality(v));
  for (;;) {
    PartialAssignment a;
    for (std::size_t i = 0; i < c.size(); ++i) a.push_back(c.variables[i], digits[i]);
    const JointTables jt = conditioned_joint_tables(bn, e, a, scope_cap);
    pe += jt.pe;
    for (VarId v = 0; v < bn.size(); ++v)
      for (Value x = 0; x < bn.cardinality(v); ++x) acc[v][x] += jt.joint[v][x];
    if (!advance(digits, cards, nullptr)) break;
  }

  ExactResult r;
  r.pe = pe.value();
  if (r.pe <= 0.0) throw InferenceError("evidence has zero probability");
  r.posterior.resize(bn.size());
  for (VarId v = 0; v < bn.size(); ++v) {
    r.posterior[v].resize(bn.cardinality(v));
    for (Value x = 0; x < bn.cardinality(v); ++x) r.posterior[v][x] = acc[v][x].value() / r.pe;
  }
  return r;
}

}  // namespace atb
