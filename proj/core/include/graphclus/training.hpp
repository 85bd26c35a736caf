#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "graphclus/eval.hpp"
#include "graphclus/gcn.hpp"
#include "graphclus/graph.hpp"
#include "graphclus/pipeline.hpp"
#include "graphclus/proposals.hpp"

namespace graphclus {

/// One detector sample per proposal, targets from the ground-truth labels.
std::vector<DetSample> build_det_samples(const AffinityGraph& g, const EmbeddingSet& emb,
                                         const LabelSet& labels, const ProposalSet& proposals,
                                         bool center_features = false);

/// Up to `seeds_per_proposal` segmenter samples per proposal with at least
/// `min_size` vertices. Seeds are drawn from a stream derived from `seed`.
std::vector<SegSample> build_seg_samples(const AffinityGraph& g, const EmbeddingSet& emb,
                                         const LabelSet& labels, const ProposalSet& proposals,
                                         std::size_t seeds_per_proposal, std::uint64_t seed,
                                         bool center_features = false, std::size_t min_size = 2);

struct SupervisedConfig {
  ProposalConfig proposals;
  GcnDims dims{0, 256, 64};          // dims.input 0 means "embedding dimension"
  Pooling pooling = Pooling::max;
  bool center_features = false;
  TrainConfig det_train{0.01, 0.9, 60, 16, 1};
  TrainConfig seg_train{0.01, 0.9, 30, 16, 2};
  std::size_t seeds_per_proposal = 4;
  std::uint64_t init_seed = 7;
};

struct TrainedDetector {
  GcnDetModel model;
  std::vector<double> epoch_losses;
  std::size_t num_samples = 0;
};

struct TrainedSegmenter {
  GcnSegModel model;
  std::vector<double> epoch_losses;
  std::size_t num_samples = 0;
};

/// Proposes on a labeled set and fits the detector.
TrainedDetector fit_detector(const EmbeddingSet& emb, const LabelSet& labels,
                             const SupervisedConfig& cfg);
TrainedDetector fit_detector(const AffinityGraph& g, const EmbeddingSet& emb,
                             const LabelSet& labels, const ProposalSet& proposals,
                             const SupervisedConfig& cfg);

/// Proposes on a labeled set and fits the segmenter.
TrainedSegmenter fit_segmenter(const EmbeddingSet& emb, const LabelSet& labels,
                               const SupervisedConfig& cfg);
TrainedSegmenter fit_segmenter(const AffinityGraph& g, const EmbeddingSet& emb,
                               const LabelSet& labels, const ProposalSet& proposals,
                               const SupervisedConfig& cfg);

}  // namespace graphclus
