#include "graphclus/training.hpp"

#include <memory>
#include <stdexcept>

#include "graphclus/parallel.hpp"

namespace graphclus {

std::vector<DetSample> build_det_samples(const AffinityGraph& g, const EmbeddingSet& emb,
                                         const LabelSet& labels, const ProposalSet& proposals,
                                         bool center_features) {
  if (labels.size() != emb.size()) {
    throw std::invalid_argument("build_det_samples: label count does not match embeddings");
  }
  const auto class_sizes = labels.class_sizes();
  std::vector<DetSample> samples(proposals.size());
  parallel_for(proposals.size(), [&](std::size_t i) {
    samples[i].instance = std::make_shared<const SubGraphInstance>(
        make_instance(g, emb, proposals[i], center_features));
    samples[i].target = quality_scores(proposals[i], labels, class_sizes);
  });
  return samples;
}

std::vector<SegSample> build_seg_samples(const AffinityGraph& g, const EmbeddingSet& emb,
                                         const LabelSet& labels, const ProposalSet& proposals,
                                         std::size_t seeds_per_proposal, std::uint64_t seed,
                                         bool center_features, std::size_t min_size) {
  if (labels.size() != emb.size()) {
    throw std::invalid_argument("build_seg_samples: label count does not match embeddings");
  }
  std::vector<SegSample> samples;
  for (std::size_t i = 0; i < proposals.size(); ++i) {
    const VertexSet& p = proposals[i];
    if (p.size() < min_size) continue;
    auto inst = std::make_shared<const SubGraphInstance>(
        make_instance(g, emb, p, center_features));
    Rng rng(mix_seed(seed, i));
    for (auto& st : seg_training_samples(p, labels, seeds_per_proposal, rng))
      samples.push_back({inst, st.seed, std::move(st.target)});
  }
  return samples;
}

namespace {

GcnDims resolve_dims(const SupervisedConfig& cfg, const EmbeddingSet& emb) {
  GcnDims dims = cfg.dims;
  if (dims.input == 0) dims.input = emb.dim();
  if (dims.input != emb.dim()) {
    throw std::invalid_argument("fit: model input dim " + std::to_string(dims.input) +
                                " does not match embedding dim " + std::to_string(emb.dim()));
  }
  return dims;
}

}  // namespace

TrainedDetector fit_detector(const AffinityGraph& g, const EmbeddingSet& emb,
                             const LabelSet& labels, const ProposalSet& proposals,
                             const SupervisedConfig& cfg) {
  const auto samples = build_det_samples(g, emb, labels, proposals, cfg.center_features);
  if (samples.empty()) throw std::invalid_argument("fit_detector: no proposals to train on");
  Rng rng(cfg.init_seed);
  auto result = train(GcnDetModel::init(resolve_dims(cfg, emb), rng, cfg.pooling),
                      std::span<const DetSample>(samples), cfg.det_train);
  return {std::move(result.model), std::move(result.epoch_losses), samples.size()};
}

TrainedDetector fit_detector(const EmbeddingSet& emb, const LabelSet& labels,
                             const SupervisedConfig& cfg) {
  const AffinityGraph g = build_base_graph(emb, cfg.proposals);
  return fit_detector(g, emb, labels, propose(emb, g, cfg.proposals), cfg);
}

TrainedSegmenter fit_segmenter(const AffinityGraph& g, const EmbeddingSet& emb,
                               const LabelSet& labels, const ProposalSet& proposals,
                               const SupervisedConfig& cfg) {
  const auto samples = build_seg_samples(g, emb, labels, proposals, cfg.seeds_per_proposal,
                                         cfg.seg_train.seed, cfg.center_features);
  if (samples.empty()) {
    throw std::invalid_argument("fit_segmenter: no proposal with at least two vertices");
  }
  Rng rng(mix_seed(cfg.init_seed, 1));
  auto result = train(GcnSegModel::init(resolve_dims(cfg, emb), rng),
                      std::span<const SegSample>(samples), cfg.seg_train);
  return {std::move(result.model), std::move(result.epoch_losses), samples.size()};
}

TrainedSegmenter fit_segmenter(const EmbeddingSet& emb, const LabelSet& labels,
                               const SupervisedConfig& cfg) {
  const AffinityGraph g = build_base_graph(emb, cfg.proposals);
  return fit_segmenter(g, emb, labels, propose(emb, g, cfg.proposals), cfg);
}

}  // namespace graphclus
