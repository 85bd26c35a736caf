#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "graphclus/graph.hpp"

namespace graphclus {

using ClassId = std::uint32_t;

/// Ground-truth class id per vertex.
class LabelSet {
 public:
  LabelSet() = default;
  explicit LabelSet(std::vector<ClassId> labels) : labels_(std::move(labels)) {}

  std::size_t size() const noexcept { return labels_.size(); }
  ClassId operator[](std::size_t v) const noexcept { return labels_[v]; }
  const std::vector<ClassId>& values() const noexcept { return labels_; }
  /// Number of vertices carrying each class id, indexed by id.
  std::vector<std::size_t> class_sizes() const;

  friend bool operator==(const LabelSet&, const LabelSet&) = default;

 private:
  std::vector<ClassId> labels_;
};

struct QualityScores {
  double iou = 0.0;
  double iop = 0.0;
};

struct PairwiseMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double fscore = 0.0;
  std::size_t num_clusters = 0;
};

/// "precision=<p> recall=<r> fscore=<f> clusters=<k>" with four decimals.
std::string format_metrics(const PairwiseMetrics& m);

/// Total assignment of vertices to contiguous cluster ids.
class ClusterSet {
 public:
  ClusterSet() = default;
  /// Renumbers ids contiguously in order of first appearance.
  explicit ClusterSet(std::span<const std::uint32_t> assignment);

  std::size_t size() const noexcept { return assignment_.size(); }
  std::size_t num_clusters() const noexcept { return num_clusters_; }
  std::uint32_t operator[](std::size_t v) const noexcept { return assignment_[v]; }
  const std::vector<std::uint32_t>& assignment() const noexcept { return assignment_; }
  /// Member lists per cluster id.
  std::vector<VertexSet> clusters() const;

  friend bool operator==(const ClusterSet&, const ClusterSet&) = default;

 private:
  std::vector<std::uint32_t> assignment_;
  std::size_t num_clusters_ = 0;
};

/// Most frequent label in p; ties go to the smallest class id.
ClassId majority_label(const VertexSet& p, const LabelSet& labels);

QualityScores quality_scores(const VertexSet& p, const LabelSet& labels);
/// Same, with class sizes precomputed by LabelSet::class_sizes().
QualityScores quality_scores(const VertexSet& p, const LabelSet& labels,
                             std::span<const std::size_t> class_sizes);

/// Pairwise precision/recall/F-score over unordered vertex pairs, computed
/// from the cluster-by-class contingency table.
PairwiseMetrics pairwise_metrics(const ClusterSet& pred, const LabelSet& labels);

struct KMeansConfig {
  std::size_t max_iterations = 100;
  double tolerance = 1e-6;   // relative inertia change
};

struct KMeansResult {
  ClusterSet clusters;
  double inertia = 0.0;
  std::size_t iterations = 0;
};

/// Lloyd's algorithm with k distinct random points as initial centers. A
/// cluster that empties is reseeded at the point farthest from its center.
KMeansResult kmeans_baseline(const EmbeddingSet& emb, std::size_t k, std::uint64_t seed,
                             const KMeansConfig& cfg = {});

}  // namespace graphclus
