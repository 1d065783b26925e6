#include "atb/model.hpp"

#include <algorithm>
#include <deque>
#include <numeric>
#include <sstream>

namespace atb {

Cpt::Cpt(VarId child, std::size_t child_cardinality, std::vector<VarId> parents,
         std::vector<std::size_t> parent_cardinalities, std::vector<double> table)
    : child_(child),
      child_cardinality_(child_cardinality),
      parents_(std::move(parents)),
      parent_cardinalities_(std::move(parent_cardinalities)),
      table_(std::move(table)) {
  if (child_cardinality_ == 0) throw ModelError("cpt: child cardinality must be >= 1");
  if (parents_.size() != parent_cardinalities_.size())
    throw ModelError("cpt: parent cardinality list does not match parent list");
  std::size_t expected = child_cardinality_;
  for (std::size_t c : parent_cardinalities_) expected *= c;
  if (table_.size() != expected) {
    throw ModelError("cpt for variable " + std::to_string(child_) + ": table has " +
                     std::to_string(table_.size()) + " entries, expected " +
                     std::to_string(expected));
  }
}

std::size_t Cpt::row_of(const std::vector<Value>& parent_values) const {
  std::size_t row = 0;
  for (std::size_t i = 0; i < parents_.size(); ++i) {
    row = row * parent_cardinalities_[i] + parent_values[i];
  }
  return row;
}

BayesianNetwork::BayesianNetwork(std::vector<Variable> variables, std::vector<Cpt> cpts)
    : variables_(std::move(variables)) {
  const std::size_t n = variables_.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (variables_[i].id != i) throw ModelError("variable ids must be 0..n-1 in order");
    if (variables_[i].cardinality < 1)
      throw ModelError("variable " + std::to_string(i) + " has cardinality 0");
    if (variables_[i].name.empty()) variables_[i].name = std::to_string(i);
  }
  if (cpts.size() != n) {
    throw ModelError("expected " + std::to_string(n) + " cpts, got " + std::to_string(cpts.size()));
  }

  cpts_.resize(n);
  std::vector<bool> seen(n, false);
  for (auto& cpt : cpts) {
    const VarId c = cpt.child();
    if (c >= n) throw ModelError("cpt child " + std::to_string(c) + " out of range");
    if (seen[c]) throw ModelError("variable " + std::to_string(c) + " has more than one cpt");
    seen[c] = true;
    if (cpt.child_cardinality() != variables_[c].cardinality)
      throw ModelError("cpt for variable " + std::to_string(c) + " disagrees on its cardinality");
    std::vector<VarId> sorted = cpt.parents();
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw ModelError("cpt for variable " + std::to_string(c) + " repeats a parent");
    for (std::size_t i = 0; i < cpt.parents().size(); ++i) {
      const VarId p = cpt.parents()[i];
      if (p >= n) throw ModelError("parent " + std::to_string(p) + " out of range");
      if (p == c) throw ModelError("variable " + std::to_string(c) + " is its own parent");
      if (cpt.parent_cardinalities()[i] != variables_[p].cardinality)
        throw ModelError("cpt for variable " + std::to_string(c) + " disagrees on cardinality of parent " +
                         std::to_string(p));
    }
    for (std::size_t row = 0; row < cpt.rows(); ++row) {
      double sum = 0.0;
      for (Value x = 0; x < cpt.child_cardinality(); ++x) {
        const double p = cpt.at(row, x);
        if (!(p >= 0.0 && p <= 1.0))
          throw ModelError("cpt for variable " + std::to_string(c) + " row " + std::to_string(row) +
                           ": entry outside [0,1]");
        sum += p;
      }
      if (std::abs(sum - 1.0) > kRowSumTolerance) {
        std::ostringstream os;
        os.precision(17);
        os << "cpt for variable " << c << " row " << row << " sums to " << sum;
        throw ModelError(os.str());
      }
    }
    cpts_[c] = std::move(cpt);
  }

  children_.assign(n, {});
  for (VarId v = 0; v < n; ++v) {
    for (VarId p : cpts_[v].parents()) children_[p].push_back(v);
  }

  // Kahn's algorithm, smallest ready id first.
  std::vector<std::size_t> indegree(n);
  for (VarId v = 0; v < n; ++v) indegree[v] = cpts_[v].parents().size();
  std::vector<VarId> ready;
  for (VarId v = 0; v < n; ++v)
    if (indegree[v] == 0) ready.push_back(v);
  std::make_heap(ready.begin(), ready.end(), std::greater<>{});
  while (!ready.empty()) {
    std::pop_heap(ready.begin(), ready.end(), std::greater<>{});
    const VarId v = ready.back();
    ready.pop_back();
    topo_.push_back(v);
    for (VarId c : children_[v]) {
      if (--indegree[c] == 0) {
        ready.push_back(c);
        std::push_heap(ready.begin(), ready.end(), std::greater<>{});
      }
    }
  }
  if (topo_.size() != n) throw ModelError("parent structure contains a directed cycle");
  topo_rank_.resize(n);
  for (std::size_t i = 0; i < n; ++i) topo_rank_[topo_[i]] = i;
}

std::size_t BayesianNetwork::max_cardinality() const {
  std::size_t d = 1;
  for (const auto& v : variables_) d = std::max(d, v.cardinality);
  return d;
}

Evidence::Evidence(std::vector<Entry> entries) {
  for (auto [v, x] : entries) set(v, x);
}

void Evidence::set(VarId v, Value x) {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), v,
                             [](const Entry& e, VarId key) { return e.first < key; });
  if (it != entries_.end() && it->first == v)
    throw ModelError("duplicate evidence for variable " + std::to_string(v));
  entries_.insert(it, {v, x});
}

std::optional<Value> Evidence::find(VarId v) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), v,
                             [](const Entry& e, VarId key) { return e.first < key; });
  if (it != entries_.end() && it->first == v) return it->second;
  return std::nullopt;
}

void Evidence::validate(const BayesianNetwork& bn) const {
  for (auto [v, x] : entries_) {
    if (v >= bn.size()) throw ModelError("evidence variable " + std::to_string(v) + " out of range");
    if (x >= bn.cardinality(v))
      throw ModelError("evidence value " + std::to_string(x) + " out of range for variable " +
                       std::to_string(v));
  }
}

PartialAssignment::PartialAssignment(std::vector<Entry> entries) {
  for (auto [v, x] : entries) push_back(v, x);
}

void PartialAssignment::push_back(VarId v, Value x) {
  if (find(v)) throw ModelError("variable " + std::to_string(v) + " assigned twice");
  entries_.emplace_back(v, x);
}

PartialAssignment PartialAssignment::extended(VarId v, Value x) const {
  PartialAssignment out = *this;
  out.push_back(v, x);
  return out;
}

std::optional<Value> PartialAssignment::find(VarId v) const {
  for (auto [u, x] : entries_)
    if (u == v) return x;
  return std::nullopt;
}

std::optional<Evidence> combine(const Evidence& e, const PartialAssignment& a) {
  Evidence out = e;
  for (auto [v, x] : a) {
    if (auto existing = out.find(v)) {
      if (*existing != x) return std::nullopt;
    } else {
      out.set(v, x);
    }
  }
  return out;
}

double joint_probability(const BayesianNetwork& bn, const std::vector<Value>& values) {
  if (values.size() != bn.size()) throw ModelError("joint_probability needs one value per variable");
  double p = 1.0;
  std::vector<Value> pv;
  for (VarId v = 0; v < bn.size(); ++v) {
    const Cpt& cpt = bn.cpt(v);
    pv.clear();
    for (VarId q : cpt.parents()) pv.push_back(values[q]);
    p *= cpt.at(cpt.row_of(pv), values[v]);
    if (p == 0.0) return 0.0;
  }
  return p;
}

double joint_probability(const BayesianNetwork& bn, const PartialAssignment& full) {
  std::vector<Value> values(bn.size());
  std::vector<bool> set(bn.size(), false);
  for (auto [v, x] : full) {
    if (v >= bn.size() || x >= bn.cardinality(v)) throw ModelError("assignment out of range");
    values[v] = x;
    set[v] = true;
  }
  for (VarId v = 0; v < bn.size(); ++v) {
    if (!set[v]) throw ModelError("joint_probability: variable " + std::to_string(v) + " unassigned");
  }
  return joint_probability(bn, values);
}

std::vector<VarId> markov_boundary(const BayesianNetwork& bn, VarId x) {
  std::vector<VarId> out(bn.parents(x).begin(), bn.parents(x).end());
  for (VarId c : bn.children(x)) {
    out.push_back(c);
    for (VarId p : bn.parents(c))
      if (p != x) out.push_back(p);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

Evidence Subnetwork::map_evidence(const Evidence& e) const {
  Evidence out;
  for (auto [v, x] : e) {
    if (v < from_original.size() && from_original[v]) out.set(*from_original[v], x);
  }
  return out;
}

Subnetwork induced_subnetwork(const BayesianNetwork& bn, const std::vector<VarId>& keep) {
  Subnetwork sub;
  sub.from_original.assign(bn.size(), std::nullopt);
  std::vector<VarId> sorted = keep;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  for (VarId v : sorted) {
    sub.from_original[v] = sub.to_original.size();
    sub.to_original.push_back(v);
  }
  std::vector<Variable> vars;
  std::vector<Cpt> cpts;
  for (VarId nv = 0; nv < sub.to_original.size(); ++nv) {
    const VarId ov = sub.to_original[nv];
    vars.push_back({nv, bn.variable(ov).name, bn.cardinality(ov)});
    const Cpt& c = bn.cpt(ov);
    std::vector<VarId> parents;
    for (VarId p : c.parents()) {
      if (!sub.from_original[p]) throw ModelError("induced_subnetwork: kept set is not closed under parents");
      parents.push_back(*sub.from_original[p]);
    }
    cpts.emplace_back(nv, c.child_cardinality(), std::move(parents), c.parent_cardinalities(), c.table());
  }
  sub.network = BayesianNetwork(std::move(vars), std::move(cpts));
  return sub;
}

std::vector<VarId> ancestral_set(const BayesianNetwork& bn, const std::vector<VarId>& seeds) {
  std::vector<bool> in(bn.size(), false);
  std::vector<VarId> stack;
  for (VarId s : seeds) {
    if (!in[s]) {
      in[s] = true;
      stack.push_back(s);
    }
  }
  while (!stack.empty()) {
    const VarId v = stack.back();
    stack.pop_back();
    for (VarId p : bn.parents(v)) {
      if (!in[p]) {
        in[p] = true;
        stack.push_back(p);
      }
    }
  }
  std::vector<VarId> out;
  for (VarId v = 0; v < bn.size(); ++v)
    if (in[v]) out.push_back(v);
  return out;
}

std::vector<bool> observed_or_has_observed_descendant(const BayesianNetwork& bn, const Evidence& e) {
  std::vector<bool> flag(bn.size(), false);
  for (auto [v, x] : e) flag[v] = true;
  const auto& topo = bn.topological_order();
  for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
    for (VarId c : bn.children(*it)) {
      if (flag[c]) {
        flag[*it] = true;
        break;
      }
    }
  }
  return flag;
}

Subnetwork relevant_subnetwork(const BayesianNetwork& bn, VarId x, const Evidence& e) {
  const auto relevant = observed_or_has_observed_descendant(bn, e);
  std::vector<bool> descendant(bn.size(), false);
  std::deque<VarId> queue{x};
  while (!queue.empty()) {
    const VarId v = queue.front();
    queue.pop_front();
    for (VarId c : bn.children(v)) {
      if (!descendant[c]) {
        descendant[c] = true;
        queue.push_back(c);
      }
    }
  }
  std::vector<VarId> keep;
  for (VarId v = 0; v < bn.size(); ++v) {
    if (!(descendant[v] && !relevant[v])) keep.push_back(v);
  }
  return induced_subnetwork(bn, keep);
}

}  // namespace atb
