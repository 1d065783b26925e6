#include "atb/graph.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace atb {

void UndirectedGraph::add_edge(std::size_t u, std::size_t v) {
  if (u == v) return;
  adj_[u].insert(v);
  adj_[v].insert(u);
}

std::size_t UndirectedGraph::edge_count() const {
  std::size_t twice = 0;
  for (const auto& a : adj_) twice += a.size();
  return twice / 2;
}

std::vector<std::pair<std::size_t, std::size_t>> UndirectedGraph::edges() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t u = 0; u < adj_.size(); ++u)
    for (std::size_t v : adj_[u])
      if (u < v) out.emplace_back(u, v);
  return out;
}

UndirectedGraph UndirectedGraph::without(const std::vector<std::size_t>& removed) const {
  std::vector<bool> gone(size(), false);
  for (std::size_t v : removed) gone[v] = true;
  UndirectedGraph g(size());
  for (auto [u, v] : edges())
    if (!gone[u] && !gone[v]) g.add_edge(u, v);
  return g;
}

void Ordering::validate(std::size_t n) const {
  if (order.size() != n) throw ModelError("ordering does not cover every vertex");
  std::vector<bool> seen(n, false);
  for (std::size_t v : order) {
    if (v >= n || seen[v]) throw ModelError("ordering is not a permutation");
    seen[v] = true;
  }
}

bool Cutset::contains(VarId v) const { return position(v) < variables.size(); }

std::size_t Cutset::position(VarId v) const {
  auto it = std::find(variables.begin(), variables.end(), v);
  return static_cast<std::size_t>(it - variables.begin());
}

UndirectedGraph moral_graph(const BayesianNetwork& bn) {
  UndirectedGraph g(bn.size());
  for (VarId v = 0; v < bn.size(); ++v) {
    const auto& ps = bn.parents(v);
    for (std::size_t i = 0; i < ps.size(); ++i) {
      g.add_edge(ps[i], v);
      for (std::size_t j = i + 1; j < ps.size(); ++j) g.add_edge(ps[i], ps[j]);
    }
  }
  return g;
}

UndirectedGraph skeleton(const BayesianNetwork& bn) {
  UndirectedGraph g(bn.size());
  for (VarId v = 0; v < bn.size(); ++v)
    for (VarId p : bn.parents(v)) g.add_edge(p, v);
  return g;
}

std::size_t induced_width(const UndirectedGraph& g, const Ordering& o) {
  constexpr std::size_t kAbsent = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> pos(g.size(), kAbsent);
  for (std::size_t i = 0; i < o.order.size(); ++i) pos[o.order[i]] = i;

  std::vector<std::set<std::size_t>> adj(g.size());
  for (auto [u, v] : g.edges()) {
    if (pos[u] == kAbsent || pos[v] == kAbsent) continue;
    adj[u].insert(v);
    adj[v].insert(u);
  }
  std::size_t width = 0;
  for (auto it = o.order.rbegin(); it != o.order.rend(); ++it) {
    const std::size_t v = *it;
    std::vector<std::size_t> earlier;
    for (std::size_t u : adj[v])
      if (pos[u] < pos[v]) earlier.push_back(u);
    width = std::max(width, earlier.size());
    for (std::size_t i = 0; i < earlier.size(); ++i)
      for (std::size_t j = i + 1; j < earlier.size(); ++j) {
        adj[earlier[i]].insert(earlier[j]);
        adj[earlier[j]].insert(earlier[i]);
      }
  }
  return width;
}

Ordering min_fill_ordering(const UndirectedGraph& g, const std::vector<bool>& include) {
  const std::size_t n = g.size();
  std::vector<bool> alive(n, true);
  if (!include.empty()) alive = include;
  std::vector<std::set<std::size_t>> adj(n);
  for (auto [u, v] : g.edges()) {
    if (!alive[u] || !alive[v]) continue;
    adj[u].insert(v);
    adj[v].insert(u);
  }
  std::size_t remaining = static_cast<std::size_t>(std::count(alive.begin(), alive.end(), true));

  std::vector<std::size_t> sequence;
  sequence.reserve(remaining);
  while (remaining > 0) {
    std::size_t best = n;
    std::size_t best_fill = std::numeric_limits<std::size_t>::max();
    for (std::size_t v = 0; v < n; ++v) {
      if (!alive[v]) continue;
      std::size_t fill = 0;
      for (auto a = adj[v].begin(); a != adj[v].end() && fill < best_fill; ++a) {
        auto b = a;
        for (++b; b != adj[v].end(); ++b)
          if (!adj[*a].count(*b)) ++fill;
      }
      if (fill < best_fill) {
        best_fill = fill;
        best = v;
        if (fill == 0) break;
      }
    }
    const std::vector<std::size_t> nb(adj[best].begin(), adj[best].end());
    for (std::size_t i = 0; i < nb.size(); ++i) {
      adj[nb[i]].erase(best);
      for (std::size_t j = i + 1; j < nb.size(); ++j) {
        adj[nb[i]].insert(nb[j]);
        adj[nb[j]].insert(nb[i]);
      }
    }
    adj[best].clear();
    alive[best] = false;
    --remaining;
    sequence.push_back(best);
  }
  return Ordering{{sequence.rbegin(), sequence.rend()}};
}

namespace {

// Directed edges (parent -> child) surviving deletion of the cutset's out-edges.
std::vector<std::pair<VarId, VarId>> surviving_edges(const BayesianNetwork& bn, const std::vector<bool>& cut) {
  std::vector<std::pair<VarId, VarId>> out;
  for (VarId v = 0; v < bn.size(); ++v)
    for (VarId p : bn.parents(v))
      if (!cut[p]) out.emplace_back(p, v);
  return out;
}

// Vertices of the undirected 2-core of the given edge list.
std::vector<bool> two_core(std::size_t n, const std::vector<std::pair<VarId, VarId>>& edges) {
  std::vector<std::vector<VarId>> adj(n);
  for (auto [u, v] : edges) {
    adj[u].push_back(v);
    adj[v].push_back(u);
  }
  std::vector<std::size_t> deg(n);
  std::vector<bool> in(n, true);
  std::vector<VarId> stack;
  for (VarId v = 0; v < n; ++v) {
    deg[v] = adj[v].size();
    if (deg[v] <= 1) {
      in[v] = false;
      stack.push_back(v);
    }
  }
  while (!stack.empty()) {
    const VarId v = stack.back();
    stack.pop_back();
    for (VarId u : adj[v]) {
      if (in[u] && --deg[u] <= 1) {
        in[u] = false;
        stack.push_back(u);
      }
    }
  }
  return in;
}

}  // namespace

bool is_loop_cutset(const BayesianNetwork& bn, const std::vector<VarId>& cutset) {
  std::vector<bool> cut(bn.size(), false);
  for (VarId v : cutset) cut.at(v) = true;
  // Union-find over the surviving skeleton; a repeated component means a cycle.
  std::vector<std::size_t> parent(bn.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto root = [&](std::size_t v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  for (auto [u, v] : surviving_edges(bn, cut)) {
    const std::size_t ru = root(u);
    const std::size_t rv = root(v);
    if (ru == rv) return false;
    parent[ru] = rv;
  }
  return true;
}

Cutset find_loop_cutset(const BayesianNetwork& bn) {
  const std::size_t n = bn.size();
  std::vector<bool> cut(n, false);
  std::vector<VarId> chosen;
  for (;;) {
    const auto edges = surviving_edges(bn, cut);
    const auto core = two_core(n, edges);
    std::vector<std::size_t> degree(n, 0);
    std::vector<bool> has_out(n, false);
    for (auto [u, v] : edges) {
      if (!core[u] || !core[v]) continue;
      ++degree[u];
      ++degree[v];
      has_out[u] = true;
    }
    std::size_t best = n;
    for (VarId v = 0; v < n; ++v) {
      if (!core[v] || !has_out[v]) continue;
      if (best == n || degree[v] > degree[best]) best = v;
    }
    if (best == n) break;
    cut[best] = true;
    chosen.push_back(best);
  }

  for (std::size_t i = 0; i < chosen.size();) {
    std::vector<VarId> trial = chosen;
    trial.erase(trial.begin() + static_cast<std::ptrdiff_t>(i));
    if (is_loop_cutset(bn, trial)) {
      chosen = std::move(trial);
    } else {
      ++i;
    }
  }
  return Cutset{chosen, CutsetKind::loop, 0};
}

Cutset find_w_cutset(const BayesianNetwork& bn, std::size_t w) {
  const UndirectedGraph g = moral_graph(bn);
  std::vector<bool> include(bn.size(), true);
  std::vector<VarId> chosen;
  for (;;) {
    const UndirectedGraph rest = g.without(chosen);
    if (induced_width(rest, min_fill_ordering(rest, include)) <= w) break;
    std::size_t best = bn.size();
    for (VarId v = 0; v < bn.size(); ++v) {
      if (!include[v]) continue;
      if (best == bn.size() || rest.degree(v) > rest.degree(best)) best = v;
    }
    include[best] = false;
    chosen.push_back(best);
  }
  return Cutset{chosen, CutsetKind::w, w};
}

Cutset without_evidence(const Cutset& c, const Evidence& e) {
  Cutset out = c;
  out.variables.clear();
  for (VarId v : c.variables)
    if (!e.contains(v)) out.variables.push_back(v);
  return out;
}

std::size_t cutset_space_size(const BayesianNetwork& bn, const Cutset& c) {
  std::size_t m = 1;
  for (VarId v : c.variables) {
    const std::size_t d = bn.cardinality(v);
    if (m > std::numeric_limits<std::size_t>::max() / d) return std::numeric_limits<std::size_t>::max();
    m *= d;
  }
  return m;
}

}  // namespace atb
