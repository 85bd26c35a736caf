#pragma once

#include <cstddef>
#include <span>
#include <unordered_map>
#include <vector>

#include "graphclus/graph.hpp"

namespace graphclus {

struct SuperVertexConfig {
  double e_tau = 0.6;           // initial edge threshold
  std::size_t s_max = 300;      // components must be strictly smaller
  double delta = 0.05;          // threshold step per escalation
  std::size_t iterations = 2;   // levels of proposal generation
  std::size_t k = 80;           // KNN width of higher-level graphs
  std::size_t max_proposal_size = 600;

  /// Throws std::invalid_argument when a field is out of range.
  void validate() const;
};

/// Default edge-threshold grid used for multi-threshold proposal generation.
inline constexpr double kDefaultThresholdGrid[] = {0.6, 0.65, 0.7, 0.75};

/// Unordered collection of distinct vertex sets with the generation level
/// each was first produced at.
class ProposalSet {
 public:
  /// Adds `v` unless a set-equal proposal exists. Returns true if added.
  bool add(VertexSet v, std::size_t iteration);
  /// Adds every proposal of `other`, keeping first-seen provenance.
  void merge(const ProposalSet& other);

  std::size_t size() const noexcept { return proposals_.size(); }
  bool empty() const noexcept { return proposals_.empty(); }
  const std::vector<VertexSet>& proposals() const noexcept { return proposals_; }
  const std::vector<std::size_t>& iterations() const noexcept { return iterations_; }
  const VertexSet& operator[](std::size_t i) const noexcept { return proposals_[i]; }

 private:
  std::vector<VertexSet> proposals_;
  std::vector<std::size_t> iterations_;
  std::unordered_multimap<std::size_t, std::size_t> by_hash_;
};

struct SuperVertexPartition {
  std::vector<VertexSet> super_vertices;
  std::size_t escalations = 0;   // number of threshold raises performed
};

/// Threshold escalation: prune at e_tau, accept components smaller than
/// s_max, raise the threshold by delta and repeat on the remainder.
/// The result partitions [0, n).
SuperVertexPartition generate_super_vertices(const AffinityGraph& g,
                                             const SuperVertexConfig& cfg);

/// Mean of the member rows, renormalized. Throws std::domain_error when the
/// mean has zero norm.
std::vector<double> average_center(const EmbeddingSet& emb, const VertexSet& v);

/// Per-level partitions of [0, n). Level 0 is the super-vertex partition;
/// level i merges level i-1 sets whose centers are grouped by super-vertex
/// generation on a KNN graph over those centers. A merged set larger than
/// max_proposal_size is dropped and its constituents carried over unmerged.
/// Stops early when a level has fewer than two sets.
std::vector<std::vector<VertexSet>> generate_proposal_levels(const AffinityGraph& g,
                                                             const EmbeddingSet& emb,
                                                             const SuperVertexConfig& cfg);

/// Union of all levels, deduplicated, tagged with the level index.
ProposalSet generate_proposals(const AffinityGraph& g, const EmbeddingSet& emb,
                               const SuperVertexConfig& cfg);

/// generate_proposals once per threshold in `thresholds` (cfg.e_tau is
/// overridden), unioned in order.
ProposalSet generate_proposals_multi(const AffinityGraph& g, const EmbeddingSet& emb,
                                     const SuperVertexConfig& cfg,
                                     std::span<const double> thresholds);

}  // namespace graphclus
