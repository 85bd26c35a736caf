#include "graphclus/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "graphclus/parallel.hpp"

namespace graphclus {

EmbeddingSet::EmbeddingSet(Matrix features) : features_(std::move(features)) {
  for (std::size_t i = 0; i < features_.rows(); ++i) {
    auto row = features_.row(i);
    double norm_sq = 0.0;
    for (double x : row) norm_sq += x * x;
    const double norm = std::sqrt(norm_sq);
    if (!(norm > 0.0) || !std::isfinite(norm)) {
      throw std::invalid_argument("EmbeddingSet: row " + std::to_string(i) +
                                  " has zero or non-finite norm");
    }
    for (double& x : row) x /= norm;
  }
}

VertexSet::VertexSet(std::vector<VertexId> ids) : ids_(std::move(ids)) {
  if (ids_.empty()) throw std::invalid_argument("VertexSet: empty vertex set");
  std::sort(ids_.begin(), ids_.end());
  ids_.erase(std::unique(ids_.begin(), ids_.end()), ids_.end());
}

VertexSet::VertexSet(std::initializer_list<VertexId> ids)
    : VertexSet(std::vector<VertexId>(ids)) {}

bool VertexSet::contains(VertexId v) const noexcept {
  return std::binary_search(ids_.begin(), ids_.end(), v);
}

AffinityGraph AffinityGraph::from_edges(
    std::size_t n, std::span<const std::tuple<VertexId, VertexId, double>> edges) {
  AffinityGraph g(n);
  for (const auto& [a, b, w] : edges) {
    if (a >= n || b >= n) {
      throw std::out_of_range("AffinityGraph::from_edges: edge (" + std::to_string(a) + ", " +
                              std::to_string(b) + ") out of range for n=" + std::to_string(n));
    }
    if (a == b) continue;
    g.adjacency_[a].push_back({b, w});
    g.adjacency_[b].push_back({a, w});
  }
  for (auto& list : g.adjacency_) {
    std::stable_sort(list.begin(), list.end(),
                     [](const Edge& x, const Edge& y) { return x.to < y.to; });
    list.erase(std::unique(list.begin(), list.end(),
                           [](const Edge& x, const Edge& y) { return x.to == y.to; }),
               list.end());
  }
  return g;
}

std::optional<double> AffinityGraph::weight(VertexId a, VertexId b) const noexcept {
  if (a >= size()) return std::nullopt;
  const auto& list = adjacency_[a];
  auto it = std::lower_bound(list.begin(), list.end(), b,
                             [](const Edge& e, VertexId id) { return e.to < id; });
  if (it == list.end() || it->to != b) return std::nullopt;
  return it->weight;
}

std::size_t AffinityGraph::num_edges() const noexcept {
  std::size_t directed = 0;
  for (const auto& list : adjacency_) directed += list.size();
  return directed / 2;
}

std::size_t AffinityGraph::max_degree() const noexcept {
  std::size_t best = 0;
  for (const auto& list : adjacency_) best = std::max(best, list.size());
  return best;
}

bool AffinityGraph::is_symmetric() const noexcept {
  for (VertexId a = 0; a < size(); ++a) {
    for (const Edge& e : adjacency_[a]) {
      if (e.to == a) return false;
      auto back = weight(e.to, a);
      if (!back || *back != e.weight) return false;
    }
  }
  return true;
}

AffinityGraph build_knn_graph(const EmbeddingSet& emb, std::size_t k) {
  const std::size_t n = emb.size();
  if (k < 1 || k >= n) {
    throw std::invalid_argument("build_knn_graph: k=" + std::to_string(k) +
                                " must satisfy 1 <= k < n=" + std::to_string(n));
  }
  const std::size_t d = emb.dim();
  std::vector<std::vector<Edge>> selected(n);
  parallel_for(n, [&](std::size_t i) {
    std::vector<Edge> candidates;
    candidates.reserve(n - 1);
    const auto qi = emb.row(i);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const auto qj = emb.row(j);
      double dot = 0.0;
      for (std::size_t c = 0; c < d; ++c) dot += qi[c] * qj[c];
      candidates.push_back({static_cast<VertexId>(j), std::clamp(dot, -1.0, 1.0)});
    }
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(k),
                      candidates.end(), [](const Edge& x, const Edge& y) {
                        return x.weight > y.weight || (x.weight == y.weight && x.to < y.to);
                      });
    candidates.resize(k);
    selected[i] = std::move(candidates);
  });

  std::vector<std::tuple<VertexId, VertexId, double>> edges;
  edges.reserve(n * k);
  for (std::size_t i = 0; i < n; ++i)
    for (const Edge& e : selected[i]) edges.emplace_back(static_cast<VertexId>(i), e.to, e.weight);
  return AffinityGraph::from_edges(n, edges);
}

namespace {

struct DisjointSet {
  std::vector<VertexId> parent;
  explicit DisjointSet(std::size_t n) : parent(n) {
    std::iota(parent.begin(), parent.end(), VertexId{0});
  }
  VertexId find(VertexId x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(VertexId a, VertexId b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    // smaller id becomes the root so roots are component minima
    if (b < a) std::swap(a, b);
    parent[b] = a;
  }
};

}  // namespace

std::vector<VertexSet> connected_components(const AffinityGraph& g, const VertexSet* restrict) {
  const std::size_t n = g.size();
  std::vector<char> member(n, restrict ? 0 : 1);
  if (restrict) {
    for (VertexId v : *restrict) {
      if (v >= n) {
        throw std::out_of_range("connected_components: vertex " + std::to_string(v) +
                                " out of range for n=" + std::to_string(n));
      }
      member[v] = 1;
    }
  }
  DisjointSet dsu(n);
  for (VertexId a = 0; a < n; ++a) {
    if (!member[a]) continue;
    for (const Edge& e : g.neighbors(a))
      if (e.to > a && member[e.to]) dsu.unite(a, e.to);
  }
  std::vector<std::vector<VertexId>> groups(n);
  for (VertexId v = 0; v < n; ++v)
    if (member[v]) groups[dsu.find(v)].push_back(v);
  // roots are minima, so iterating roots in id order yields the required ordering
  std::vector<VertexSet> out;
  for (auto& group : groups)
    if (!group.empty()) out.emplace_back(std::move(group));
  return out;
}

AffinityGraph prune_edges(const AffinityGraph& g, double e_tau) {
  AffinityGraph out(g.size());
  for (std::size_t v = 0; v < g.size(); ++v) {
    for (const Edge& e : g.adjacency_[v])
      if (e.weight >= e_tau) out.adjacency_[v].push_back(e);
  }
  return out;
}

SubAdjacency induced_subgraph(const AffinityGraph& g, const VertexSet& v) {
  SubAdjacency sub{Matrix(v.size(), v.size()), v.ids()};
  const auto& ids = v.ids();
  for (std::size_t local = 0; local < ids.size(); ++local) {
    if (ids[local] >= g.size()) {
      throw std::out_of_range("induced_subgraph: vertex " + std::to_string(ids[local]) +
                              " out of range for n=" + std::to_string(g.size()));
    }
    for (const Edge& e : g.neighbors(ids[local])) {
      auto it = std::lower_bound(ids.begin(), ids.end(), e.to);
      if (it != ids.end() && *it == e.to)
        sub.adjacency(local, static_cast<std::size_t>(it - ids.begin())) = e.weight;
    }
  }
  return sub;
}

}  // namespace graphclus
