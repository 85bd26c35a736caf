#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <tuple>
#include <vector>

#include "graphclus/numerics.hpp"

namespace graphclus {

using VertexId = std::uint32_t;

/// N unit-norm feature vectors, one per row.
class EmbeddingSet {
 public:
  EmbeddingSet() = default;
  /// Normalizes every row to unit L2 norm. Throws std::invalid_argument on
  /// a zero-norm or non-finite row.
  explicit EmbeddingSet(Matrix features);

  std::size_t size() const noexcept { return features_.rows(); }
  std::size_t dim() const noexcept { return features_.cols(); }
  const Matrix& features() const noexcept { return features_; }
  std::span<const double> row(std::size_t i) const noexcept { return features_.row(i); }

 private:
  Matrix features_;
};

/// Sorted, duplicate-free, nonempty list of vertex ids.
class VertexSet {
 public:
  VertexSet() = default;
  /// Sorts and dedups; throws std::invalid_argument if empty.
  explicit VertexSet(std::vector<VertexId> ids);
  VertexSet(std::initializer_list<VertexId> ids);

  std::size_t size() const noexcept { return ids_.size(); }
  bool empty() const noexcept { return ids_.empty(); }
  const std::vector<VertexId>& ids() const noexcept { return ids_; }
  VertexId operator[](std::size_t i) const noexcept { return ids_[i]; }
  auto begin() const noexcept { return ids_.begin(); }
  auto end() const noexcept { return ids_.end(); }
  bool contains(VertexId v) const noexcept;

  friend bool operator==(const VertexSet&, const VertexSet&) = default;
  friend auto operator<=>(const VertexSet&, const VertexSet&) = default;

 private:
  std::vector<VertexId> ids_;
};

struct Edge {
  VertexId to;
  double weight;
};

/// Sparse symmetric weighted graph without self-loops. Each adjacency list is
/// sorted by neighbor id.
class AffinityGraph {
 public:
  AffinityGraph() = default;
  explicit AffinityGraph(std::size_t n) : adjacency_(n) {}

  /// Builds a symmetric graph from undirected edges. Self-loops are dropped;
  /// a repeated pair keeps the first weight seen.
  static AffinityGraph from_edges(std::size_t n,
                                  std::span<const std::tuple<VertexId, VertexId, double>> edges);

  std::size_t size() const noexcept { return adjacency_.size(); }
  std::span<const Edge> neighbors(VertexId v) const noexcept { return adjacency_[v]; }
  std::optional<double> weight(VertexId a, VertexId b) const noexcept;
  std::size_t num_edges() const noexcept;
  std::size_t max_degree() const noexcept;
  bool is_symmetric() const noexcept;

 private:
  friend AffinityGraph prune_edges(const AffinityGraph& g, double e_tau);
  std::vector<std::vector<Edge>> adjacency_;
};

/// Cosine-similarity KNN graph: every vertex links to its k most similar
/// others (ties by lower id), then edges are symmetrized by union. Weights are
/// clamped to [-1, 1]. Brute force O(n^2 d), parallel over query vertices.
AffinityGraph build_knn_graph(const EmbeddingSet& emb, std::size_t k);

/// Maximal connected components of g, or of the subgraph induced by
/// `restrict`. Components are sorted by their smallest member.
std::vector<VertexSet> connected_components(const AffinityGraph& g,
                                            const VertexSet* restrict = nullptr);

/// Keeps exactly the edges with weight >= e_tau.
AffinityGraph prune_edges(const AffinityGraph& g, double e_tau);

struct SubAdjacency {
  Matrix adjacency;            // |v| x |v|, symmetric, zero diagonal
  std::vector<VertexId> ids;   // local index -> global id
};

SubAdjacency induced_subgraph(const AffinityGraph& g, const VertexSet& v);

}  // namespace graphclus
