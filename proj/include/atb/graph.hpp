#pragma once

#include <set>
#include <utility>
#include <vector>

#include "atb/model.hpp"

namespace atb {

/// Simple undirected graph over vertices 0..n-1.
class UndirectedGraph {
 public:
  UndirectedGraph() = default;
  explicit UndirectedGraph(std::size_t n) : adj_(n) {}

  std::size_t size() const { return adj_.size(); }
  /// Self-loops are ignored.
  void add_edge(std::size_t u, std::size_t v);
  bool has_edge(std::size_t u, std::size_t v) const { return adj_[u].count(v) > 0; }
  const std::set<std::size_t>& neighbors(std::size_t v) const { return adj_[v]; }
  std::size_t degree(std::size_t v) const { return adj_[v].size(); }
  std::size_t edge_count() const;
  /// Edges (u, v) with u < v in ascending order.
  std::vector<std::pair<std::size_t, std::size_t>> edges() const;

  /// Graph with the listed vertices (and incident edges) deleted; vertex ids are kept.
  UndirectedGraph without(const std::vector<std::size_t>& removed) const;

 private:
  std::vector<std::set<std::size_t>> adj_;
};

/// A permutation of the vertices. Elimination processes it from last to first.
struct Ordering {
  std::vector<std::size_t> order;

  /// Positions are validated; throws ModelError if `order` is not a permutation of 0..n-1.
  void validate(std::size_t n) const;
  std::vector<std::size_t> elimination_sequence() const { return {order.rbegin(), order.rend()}; }
};

enum class CutsetKind { loop, w };

/// Conditioning set in its search-tree expansion order C_1 .. C_p.
struct Cutset {
  std::vector<VarId> variables;
  CutsetKind kind = CutsetKind::loop;
  std::size_t w = 0;  // only meaningful for CutsetKind::w

  std::size_t size() const { return variables.size(); }
  bool empty() const { return variables.empty(); }
  bool contains(VarId v) const;
  /// Position of `v` in the expansion order, or size() when absent.
  std::size_t position(VarId v) const;
};

UndirectedGraph moral_graph(const BayesianNetwork& bn);
/// Underlying undirected graph of the DAG (no marriage edges).
UndirectedGraph skeleton(const BayesianNetwork& bn);

/// Width of the ordered graph after triangulating from the last vertex to the first.
/// Vertices absent from `o` are ignored, so `o` may order a subset.
std::size_t induced_width(const UndirectedGraph& g, const Ordering& o);

/// Greedy min-fill; ties broken by lowest vertex id. Only vertices with
/// `include[v]` set take part (all vertices when `include` is empty).
Ordering min_fill_ordering(const UndirectedGraph& g, const std::vector<bool>& include = {});

/// True iff deleting every out-edge of the cutset nodes leaves a DAG whose
/// underlying undirected graph has no cycle.
bool is_loop_cutset(const BayesianNetwork& bn, const std::vector<VarId>& cutset);
inline bool is_loop_cutset(const BayesianNetwork& bn, const Cutset& c) { return is_loop_cutset(bn, c.variables); }

/// Greedy loop-cutset: repeatedly take the max-degree allowed vertex of the
/// loopy core, then drop redundant picks. Order is the selection order.
Cutset find_loop_cutset(const BayesianNetwork& bn);

/// Greedy w-cutset: remove max-degree vertices of the moral graph until the
/// min-fill induced width of the rest is <= w.
Cutset find_w_cutset(const BayesianNetwork& bn, std::size_t w);

/// Drops evidence variables, keeping the relative order of the rest.
Cutset without_evidence(const Cutset& c, const Evidence& e);

/// Number of full cutset tuples, saturating at SIZE_MAX.
std::size_t cutset_space_size(const BayesianNetwork& bn, const Cutset& c);

}  // namespace atb
