#include "atb/atb.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

namespace atb {

Interval BoundCache::get(const CutsetTuple& prefix, const Extra& extra) {
  Key key{prefix, extra};
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
  }
  const Interval iv = bounder_.bound(to_assignment(cutset_, prefix), extra);
  std::lock_guard<std::mutex> lock(mu_);
  auto [it, inserted] = memo_.emplace(std::move(key), iv);
  if (inserted) ++evaluations_;
  return it->second;
}

void BoundCache::prefill(const std::vector<Key>& keys, std::size_t jobs) {
  std::vector<const Key*> missing;
  {
    std::lock_guard<std::mutex> lock(mu_);
    for (const Key& k : keys)
      if (!memo_.count(k)) missing.push_back(&k);
  }
  const std::size_t workers = std::min(std::max<std::size_t>(jobs, 1), missing.size());
  if (workers <= 1) {
    for (const Key* k : missing) get(k->first, k->second);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < missing.size(); i = next++) get(missing[i]->first, missing[i]->second);
    });
  for (auto& t : pool) t.join();
}

std::size_t BoundCache::evaluations() const {
  std::lock_guard<std::mutex> lock(mu_);
  return evaluations_;
}

namespace {

std::vector<double> active_joint(const ActiveTupleSet& active, VarId x, std::size_t card) {
  if (active.joint.size() != active.size()) throw ModelError("active tuple set lacks joint tables");
  std::vector<double> out(card);
  for (std::size_t v = 0; v < card; ++v) {
    CompensatedSum s;
    for (std::size_t i = 0; i < active.size(); ++i) s += active.joint[i][x][v];
    out[v] = s.value();
  }
  return out;
}

// Per-partial plug-in results for one variable.
struct PartialTerms {
  std::vector<std::vector<double>> lower;  // [j][x]
  std::vector<std::vector<double>> upper;  // [j][x]
  std::vector<double> total_upper;         // [j] upper on P(c_j, e)
};

VariableBounds assemble(VarId var, double s, const std::vector<double>& sx, const PartialTerms& t) {
  const std::size_t card = sx.size();
  const std::size_t m = t.total_upper.size();
  VariableBounds out;
  out.variable = var;
  out.intervals.resize(card);
  for (std::size_t x = 0; x < card; ++x) {
    CompensatedSum lnum, lden, unum, uden;
    lnum += sx[x];
    lden += s;
    unum += sx[x];
    uden += s;
    for (std::size_t j = 0; j < m; ++j) {
      double others_upper = 0.0;
      double others_lower = 0.0;
      for (std::size_t y = 0; y < card; ++y) {
        if (y == x) continue;
        others_upper += t.upper[j][y];
        others_lower += t.lower[j][y];
      }
      lnum += t.lower[j][x];
      lden += std::min(t.lower[j][x] + others_upper, t.total_upper[j]);
      unum += t.upper[j][x];
      uden += t.upper[j][x];
      uden += others_lower;
    }
    Interval& iv = out.intervals[x];
    if (lden.value() > 0.0) {
      iv.lower = lnum.value() / lden.value();
    } else {
      iv.lower = 0.0;
      out.degenerate = true;
    }
    if (uden.value() > 0.0) {
      iv.upper = unum.value() / uden.value();
    } else {
      iv.upper = 1.0;
      out.degenerate = true;
    }
    const Interval raw = iv;
    iv.lower = clamp01(iv.lower);
    iv.upper = clamp01(iv.upper);
    if (iv.lower > iv.upper) iv.lower = iv.upper;
    if (!(raw == iv)) ++out.clamped;
  }
  return out;
}

void check_query(const AtbInputs& in, VarId x) {
  if (x >= in.bn.size()) throw ModelError("unknown variable " + std::to_string(x));
  if (in.e.contains(x)) throw ModelError("variable " + std::to_string(x) + " is observed");
}

}  // namespace

VariableBounds atb_variable_bounds(const AtbInputs& in, VarId x) {
  check_query(in, x);
  if (in.tree.cutset.contains(x)) throw ModelError("variable " + std::to_string(x) + " is in the cutset");
  const std::size_t card = in.bn.cardinality(x);
  const std::size_t m = in.tree.size();
  PartialTerms t;
  t.lower.assign(m, std::vector<double>(card));
  t.upper.assign(m, std::vector<double>(card));
  t.total_upper.resize(m);
  for (std::size_t j = 0; j < m; ++j) {
    const auto& prefix = in.tree.partials[j];
    t.total_upper[j] = in.cache.get(prefix, std::nullopt).upper;
    for (Value v = 0; v < card; ++v) {
      const Interval iv = in.cache.get(prefix, Evidence::Entry{x, v});
      t.lower[j][v] = iv.lower;
      t.upper[j][v] = iv.upper;
    }
  }
  VariableBounds out = assemble(x, in.active.mass(), active_joint(in.active, x, card), t);
  out.queries = m * (1 + card);
  return out;
}

VariableBounds atb_cutset_variable_bounds(const AtbInputs& in, VarId ck) {
  check_query(in, ck);
  const std::size_t k = in.tree.cutset.position(ck);
  if (k == in.tree.cutset.size()) throw ModelError("variable " + std::to_string(ck) + " is not in the cutset");
  const std::size_t card = in.bn.cardinality(ck);
  const std::size_t m = in.tree.size();
  PartialTerms t;
  t.lower.assign(m, std::vector<double>(card, 0.0));
  t.upper.assign(m, std::vector<double>(card, 0.0));
  t.total_upper.resize(m);
  std::size_t queries = 0;
  for (std::size_t j = 0; j < m; ++j) {
    const auto& prefix = in.tree.partials[j];
    const Interval whole = in.cache.get(prefix, std::nullopt);
    ++queries;
    t.total_upper[j] = whole.upper;
    if (prefix.size() > k) {
      t.lower[j][prefix[k]] = whole.lower;
      t.upper[j][prefix[k]] = whole.upper;
      continue;
    }
    const PartialAssignment a = in.tree.assignment(j);
    const double prior_a = in.options.cutset_case2 == CutsetCase2::decomposed
                               ? conditioned_joint(in.bn, Evidence{}, a, in.options.scope_cap)
                               : 0.0;
    for (Value v = 0; v < card; ++v) {
      const Interval iv = in.cache.get(prefix, Evidence::Entry{ck, v});
      ++queries;
      t.lower[j][v] = iv.lower;
      t.upper[j][v] = iv.upper;
      if (in.options.cutset_case2 == CutsetCase2::decomposed) {
        const double joint = conditioned_joint(in.bn, Evidence{}, a.extended(ck, v), in.options.scope_cap);
        t.upper[j][v] = prior_a > 0.0 ? joint / prior_a * whole.upper : 0.0;
      }
    }
  }
  VariableBounds out = assemble(ck, in.active.mass(), active_joint(in.active, ck, card), t);
  out.queries = queries;
  return out;
}

Interval atb_marginal_bounds(const AtbInputs& in, VarId x, Value value) {
  return atb_variable_bounds(in, x).intervals.at(value);
}

Interval atb_cutset_marginal_bounds(const AtbInputs& in, VarId ck, Value value) {
  return atb_cutset_variable_bounds(in, ck).intervals.at(value);
}

double unexplored_prior_mass(const ActiveTupleSet& active) { return std::max(0.0, 1.0 - active.prior_mass()); }

EvidenceBounds atb_evidence_bounds(const AtbInputs& in) {
  const double s = in.active.mass();
  CompensatedSum lower;
  CompensatedSum upper;
  lower += s;
  upper += s;
  for (std::size_t j = 0; j < in.tree.size(); ++j) {
    const Interval iv = in.cache.get(in.tree.partials[j], std::nullopt);
    lower += iv.lower;
    upper += iv.upper;
  }
  double u = upper.value();
  // The frontier priors partition the unexplored prior mass.
  if (in.cache.bounder().capabilities().prior_joint_upper) u = s + unexplored_prior_mass(in.active);
  EvidenceBounds out;
  out.interval = {clamp01(lower.value()), clamp01(u)};
  out.clamped = out.interval.lower != lower.value() || out.interval.upper != u;
  if (out.interval.lower > out.interval.upper) out.interval.lower = out.interval.upper;
  return out;
}

BcBounds bounded_conditioning_bounds(const BayesianNetwork& bn, const Evidence& e, const ActiveTupleSet& active,
                                     VarId x) {
  const std::size_t card = bn.cardinality(x);
  BcBounds out;
  out.intervals.resize(card);
  if (auto obs = e.find(x)) {
    for (Value v = 0; v < card; ++v) out.intervals[v] = v == *obs ? Interval{1.0, 1.0} : Interval{0.0, 0.0};
    return out;
  }
  const double s = active.mass();
  const double r = unexplored_prior_mass(active);
  const auto sx = active_joint(active, x, card);
  for (Value v = 0; v < card; ++v) {
    Interval& iv = out.intervals[v];
    iv.lower = s + r > 0.0 ? clamp01(sx[v] / (s + r)) : 0.0;
    if (s > 0.0) {
      iv.upper = clamp01(sx[v] / s + r * (s + r) / s);
    } else {
      iv.upper = 1.0;
      out.degenerate = true;
    }
    if (iv.lower > iv.upper) iv.lower = iv.upper;
  }
  return out;
}

Interval bounded_conditioning_bounds(const AtbInputs& in, VarId x, Value value) {
  return bounded_conditioning_bounds(in.bn, in.e, in.active, x).intervals.at(value);
}

double interval_bound_ih(const ActiveTupleSet& active) {
  const double s = active.mass();
  const double r = unexplored_prior_mass(active);
  return s + r > 0.0 ? r / (s + r) : 1.0;
}

BoundsReport compute_bounds_report(const AtbInputs& in, std::size_t jobs) {
  const Cutset& c = in.tree.cutset;
  if (jobs > 1) {
    std::vector<BoundCache::Key> keys;
    for (const auto& prefix : in.tree.partials) {
      keys.emplace_back(prefix, std::nullopt);
      for (VarId v = 0; v < in.bn.size(); ++v) {
        if (in.e.contains(v)) continue;
        const std::size_t k = c.position(v);
        if (k < c.size() && prefix.size() > k) continue;
        for (Value x = 0; x < in.bn.cardinality(v); ++x) keys.emplace_back(prefix, Evidence::Entry{v, x});
      }
    }
    in.cache.prefill(keys, jobs);
  }

  BoundsReport rep;
  rep.h = in.active.size();
  rep.m_prime = in.tree.size();
  rep.cutset_size = c.size();
  rep.s = in.active.mass();
  rep.r = unexplored_prior_mass(in.active);
  rep.i_h = interval_bound_ih(in.active);
  for (VarId v = 0; v < in.bn.size(); ++v) {
    if (in.e.contains(v)) continue;
    VariableReport vr;
    vr.variable = v;
    vr.cutset = c.contains(v);
    VariableBounds vb = vr.cutset ? atb_cutset_variable_bounds(in, v) : atb_variable_bounds(in, v);
    vr.atb = std::move(vb.intervals);
    vr.queries = vb.queries;
    vr.degenerate = vb.degenerate;
    BcBounds bc = bounded_conditioning_bounds(in.bn, in.e, in.active, v);
    vr.bc = std::move(bc.intervals);
    vr.bc_degenerate = bc.degenerate;
    rep.max_queries_per_variable = std::max(rep.max_queries_per_variable, vr.queries);
    rep.clamp_events += vb.clamped;
    rep.degenerate_count += vb.degenerate ? 1 : 0;
    rep.variables.push_back(std::move(vr));
  }
  const EvidenceBounds eb = atb_evidence_bounds(in);
  rep.pe = eb.interval;
  rep.clamp_events += eb.clamped ? 1 : 0;
  rep.bounder_evaluations = in.cache.evaluations();
  return rep;
}

}  // namespace atb
