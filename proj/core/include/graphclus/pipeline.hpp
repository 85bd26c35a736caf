#pragma once

#include <cstddef>
#include <cstdint>
#include <iterator>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "graphclus/eval.hpp"
#include "graphclus/gcn.hpp"
#include "graphclus/graph.hpp"
#include "graphclus/proposals.hpp"

namespace graphclus {

struct ScoredProposal {
  VertexSet vertices;
  double pred_iou = 0.0;
  double pred_iop = 0.0;
};

enum class PostProcess { deoverlap, nms };

struct PipelineConfig {
  double iop_low = 0.3;
  double iop_high = 0.7;
  double det_iou_min = 0.0;
  double seg_keep_threshold = 0.5;
  std::size_t num_hypotheses = 3;
  double deoverlap_iou_min = 0.0;
  bool use_segmentation = true;
  bool center_features = false;
  PostProcess post_process = PostProcess::deoverlap;
  double nms_iou_threshold = 0.3;

  void validate() const;
};

/// Scores every proposal with the detector, keeps those with
/// pred_iou >= det_iou_min, input order preserved.
std::vector<ScoredProposal> score_proposals(const GcnDetModel& det, const ProposalSet& proposals,
                                            const AffinityGraph& g, const EmbeddingSet& emb,
                                            const PipelineConfig& cfg);

/// Multi-hypothesis refinement of a proposal whose predicted IoP lies in
/// [iop_low, iop_high]; other proposals pass through unchanged. Never
/// returns an empty set or a vertex outside the input.
VertexSet segment_proposal(const GcnSegModel& seg, const ScoredProposal& sp,
                           const AffinityGraph& g, const EmbeddingSet& emb,
                           const PipelineConfig& cfg, Rng& rng);

/// Stable sort by pred_iou, descending.
void rank_by_iou(std::vector<ScoredProposal>& proposals);

/// Walks proposals in rank order, removing vertices claimed by earlier ones.
/// A nonempty remainder becomes a cluster unless it keeps less than
/// `min_keep_fraction` of its proposal. Throws std::invalid_argument if the
/// input is not sorted by pred_iou descending.
std::vector<VertexSet> de_overlap(std::span<const ScoredProposal> ranked,
                                  double min_keep_fraction = 0.0);

/// Set IoU of two vertex sets.
double set_iou(const VertexSet& a, const VertexSet& b);

/// Greedy suppression: a proposal is accepted iff its IoU with every accepted
/// proposal is below iou_threshold. Overlaps among accepted proposals are
/// resolved in favor of the earlier one. Requires descending pred_iou.
std::vector<VertexSet> nms(std::span<const ScoredProposal> ranked, double iou_threshold);

/// Total clustering from disjoint partial clusters: uncovered vertices become
/// singletons. Throws std::invalid_argument if a vertex is covered twice or
/// is out of range.
ClusterSet finalize(std::span<const VertexSet> partial, std::size_t n);

/// super_vertex.k is the KNN width of both the base graph and the
/// higher-level graphs.
struct ProposalConfig {
  SuperVertexConfig super_vertex;
  std::vector<double> thresholds{std::begin(kDefaultThresholdGrid),
                                 std::end(kDefaultThresholdGrid)};
};

struct StageReport {
  std::string stage;
  std::size_t count = 0;
  std::optional<PairwiseMetrics> metrics;
};

/// One line: "<stage> count=<n>[ precision=... recall=... fscore=... clusters=...]".
std::string format_stage(const StageReport& r);

struct PipelineResult {
  ClusterSet clusters;
  std::vector<StageReport> report;
};

/// Base KNN graph with k clamped to n - 1.
AffinityGraph build_base_graph(const EmbeddingSet& emb, const ProposalConfig& cfg);

/// Multi-threshold proposals over a base graph.
ProposalSet propose(const EmbeddingSet& emb, const AffinityGraph& g, const ProposalConfig& cfg);

/// propose -> score -> segment -> rank -> de-overlap (or NMS) -> finalize.
/// When labels are given, the report carries pairwise metrics per stage.
PipelineResult run_pipeline(const GcnDetModel& det, const GcnSegModel& seg,
                            const EmbeddingSet& emb, const LabelSet* labels,
                            const ProposalConfig& proposal_cfg, const PipelineConfig& cfg,
                            std::uint64_t seed);

/// Same as run_pipeline but starting from an existing graph and proposals.
PipelineResult run_pipeline_on(const GcnDetModel& det, const GcnSegModel& seg,
                               const EmbeddingSet& emb, const AffinityGraph& g,
                               const ProposalSet& proposals, const LabelSet* labels,
                               const PipelineConfig& cfg, std::uint64_t seed);

}  // namespace graphclus
