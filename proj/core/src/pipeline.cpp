#include "graphclus/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "graphclus/parallel.hpp"

namespace graphclus {

void PipelineConfig::validate() const {
  if (!(0.0 <= iop_low && iop_low <= iop_high && iop_high <= 1.0)) {
    throw std::invalid_argument("PipelineConfig: need 0 <= iop_low <= iop_high <= 1");
  }
  if (num_hypotheses < 1) throw std::invalid_argument("PipelineConfig: num_hypotheses must be >= 1");
}

std::vector<ScoredProposal> score_proposals(const GcnDetModel& det, const ProposalSet& proposals,
                                            const AffinityGraph& g, const EmbeddingSet& emb,
                                            const PipelineConfig& cfg) {
  std::vector<QualityScores> scores(proposals.size());
  parallel_for(proposals.size(), [&](std::size_t i) {
    scores[i] = det_forward(det, make_instance(g, emb, proposals[i], cfg.center_features));
  });
  std::vector<ScoredProposal> out;
  out.reserve(proposals.size());
  for (std::size_t i = 0; i < proposals.size(); ++i) {
    if (scores[i].iou < cfg.det_iou_min) continue;
    out.push_back({proposals[i], scores[i].iou, scores[i].iop});
  }
  return out;
}

VertexSet segment_proposal(const GcnSegModel& seg, const ScoredProposal& sp,
                           const AffinityGraph& g, const EmbeddingSet& emb,
                           const PipelineConfig& cfg, Rng& rng) {
  if (sp.vertices.empty()) throw std::invalid_argument("segment_proposal: empty proposal");
  if (sp.pred_iop < cfg.iop_low || sp.pred_iop > cfg.iop_high) return sp.vertices;

  const SubGraphInstance inst = make_instance(g, emb, sp.vertices, cfg.center_features);
  std::vector<double> best_probs;
  std::size_t best_count = 0;
  for (std::size_t seed : rng.sample_distinct(sp.vertices.size(), cfg.num_hypotheses)) {
    auto probs = seg_forward(seg, inst, seed);
    const auto count = static_cast<std::size_t>(std::count_if(
        probs.begin(), probs.end(), [&](double p) { return p >= cfg.seg_keep_threshold; }));
    if (count > best_count) {
      best_count = count;
      best_probs = std::move(probs);
    }
  }
  if (best_count == 0) return sp.vertices;
  std::vector<VertexId> kept;
  kept.reserve(best_count);
  for (std::size_t i = 0; i < best_probs.size(); ++i)
    if (best_probs[i] >= cfg.seg_keep_threshold) kept.push_back(sp.vertices[i]);
  return VertexSet(std::move(kept));
}

void rank_by_iou(std::vector<ScoredProposal>& proposals) {
  std::stable_sort(proposals.begin(), proposals.end(),
                   [](const ScoredProposal& a, const ScoredProposal& b) {
                     return a.pred_iou > b.pred_iou;
                   });
}

namespace {

void require_ranked(std::span<const ScoredProposal> ranked, const char* who) {
  for (std::size_t i = 1; i < ranked.size(); ++i) {
    if (ranked[i].pred_iou > ranked[i - 1].pred_iou) {
      throw std::invalid_argument(std::string(who) + ": proposals not sorted by pred_iou at index " +
                                  std::to_string(i));
    }
  }
}

std::size_t id_bound(std::span<const ScoredProposal> ranked) {
  std::size_t bound = 0;
  for (const auto& sp : ranked)
    if (!sp.vertices.empty()) bound = std::max<std::size_t>(bound, sp.vertices.ids().back() + 1);
  return bound;
}

}  // namespace

std::vector<VertexSet> de_overlap(std::span<const ScoredProposal> ranked,
                                  double min_keep_fraction) {
  require_ranked(ranked, "de_overlap");
  std::vector<char> seen(id_bound(ranked), 0);
  std::vector<VertexSet> clusters;
  std::vector<VertexId> remainder;
  for (const auto& sp : ranked) {
    remainder.clear();
    for (VertexId v : sp.vertices)
      if (!seen[v]) remainder.push_back(v);
    if (remainder.empty()) continue;
    if (static_cast<double>(remainder.size()) <
        min_keep_fraction * static_cast<double>(sp.vertices.size()))
      continue;
    for (VertexId v : remainder) seen[v] = 1;
    clusters.emplace_back(remainder);
  }
  return clusters;
}

double set_iou(const VertexSet& a, const VertexSet& b) {
  std::size_t inter = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++inter;
      ++ia;
      ++ib;
    }
  }
  const std::size_t uni = a.size() + b.size() - inter;
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

std::vector<VertexSet> nms(std::span<const ScoredProposal> ranked, double iou_threshold) {
  require_ranked(ranked, "nms");
  const std::size_t bound = id_bound(ranked);
  // vertex -> indices of accepted proposals containing it
  std::vector<std::vector<std::uint32_t>> holders(bound);
  std::vector<std::size_t> accepted_sizes;
  std::vector<std::size_t> overlap;
  std::vector<std::uint32_t> touched;
  std::vector<char> owned(bound, 0);
  std::vector<VertexSet> clusters;
  std::vector<VertexId> remainder;

  for (const auto& sp : ranked) {
    touched.clear();
    for (VertexId v : sp.vertices) {
      for (std::uint32_t a : holders[v]) {
        if (overlap[a]++ == 0) touched.push_back(a);
      }
    }
    bool suppressed = false;
    for (std::uint32_t a : touched) {
      const std::size_t inter = overlap[a];
      const double iou = static_cast<double>(inter) /
                         static_cast<double>(accepted_sizes[a] + sp.vertices.size() - inter);
      if (iou >= iou_threshold) suppressed = true;
      overlap[a] = 0;
    }
    if (suppressed) continue;

    const auto index = static_cast<std::uint32_t>(accepted_sizes.size());
    accepted_sizes.push_back(sp.vertices.size());
    overlap.push_back(0);
    remainder.clear();
    for (VertexId v : sp.vertices) {
      holders[v].push_back(index);
      if (!owned[v]) {
        owned[v] = 1;
        remainder.push_back(v);
      }
    }
    if (!remainder.empty()) clusters.emplace_back(remainder);
  }
  return clusters;
}

ClusterSet finalize(std::span<const VertexSet> partial, std::size_t n) {
  constexpr auto kUnassigned = static_cast<std::uint32_t>(-1);
  std::vector<std::uint32_t> assignment(n, kUnassigned);
  std::uint32_t next = 0;
  for (const VertexSet& cluster : partial) {
    for (VertexId v : cluster) {
      if (v >= n) {
        throw std::invalid_argument("finalize: vertex " + std::to_string(v) +
                                    " out of range for n=" + std::to_string(n));
      }
      if (assignment[v] != kUnassigned) {
        throw std::invalid_argument("finalize: vertex " + std::to_string(v) +
                                    " is covered by more than one cluster");
      }
      assignment[v] = next;
    }
    ++next;
  }
  for (auto& a : assignment)
    if (a == kUnassigned) a = next++;
  return ClusterSet(assignment);
}

std::string format_stage(const StageReport& r) {
  std::string line = r.stage + " count=" + std::to_string(r.count);
  if (r.metrics) line += " " + format_metrics(*r.metrics);
  return line;
}

AffinityGraph build_base_graph(const EmbeddingSet& emb, const ProposalConfig& cfg) {
  if (emb.size() < 2) {
    throw std::invalid_argument("build_base_graph: need at least two vertices");
  }
  return build_knn_graph(emb, std::min(cfg.super_vertex.k, emb.size() - 1));
}

ProposalSet propose(const EmbeddingSet& emb, const AffinityGraph& g, const ProposalConfig& cfg) {
  if (cfg.thresholds.empty()) return generate_proposals(g, emb, cfg.super_vertex);
  return generate_proposals_multi(g, emb, cfg.super_vertex, cfg.thresholds);
}

PipelineResult run_pipeline_on(const GcnDetModel& det, const GcnSegModel& seg,
                               const EmbeddingSet& emb, const AffinityGraph& g,
                               const ProposalSet& proposals, const LabelSet* labels,
                               const PipelineConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  if (labels && labels->size() != emb.size()) {
    throw std::invalid_argument("run_pipeline: " + std::to_string(labels->size()) +
                                " labels for " + std::to_string(emb.size()) + " vertices");
  }
  const std::size_t n = emb.size();
  PipelineResult result;
  auto metrics_of = [&](std::span<const ScoredProposal> ranked) -> std::optional<PairwiseMetrics> {
    if (!labels) return std::nullopt;
    const auto partial = de_overlap(ranked, cfg.deoverlap_iou_min);
    return pairwise_metrics(finalize(partial, n), *labels);
  };

  result.report.push_back({"propose", proposals.size(), std::nullopt});

  std::vector<ScoredProposal> scored = score_proposals(det, proposals, g, emb, cfg);
  {
    auto ranked = scored;
    rank_by_iou(ranked);
    result.report.push_back({"detect", scored.size(), metrics_of(ranked)});
  }

  if (cfg.use_segmentation) {
    std::vector<VertexSet> refined(scored.size());
    parallel_for(scored.size(), [&](std::size_t i) {
      Rng rng(mix_seed(seed, i));
      refined[i] = segment_proposal(seg, scored[i], g, emb, cfg, rng);
    });
    std::size_t changed = 0;
    for (std::size_t i = 0; i < scored.size(); ++i) {
      if (refined[i] != scored[i].vertices) ++changed;
      scored[i].vertices = std::move(refined[i]);
    }
    auto ranked = scored;
    rank_by_iou(ranked);
    result.report.push_back({"segment", changed, metrics_of(ranked)});
  }

  rank_by_iou(scored);
  std::vector<VertexSet> partial;
  if (cfg.post_process == PostProcess::nms) {
    partial = nms(scored, cfg.nms_iou_threshold);
    result.report.push_back({"nms", partial.size(), std::nullopt});
  } else {
    partial = de_overlap(scored, cfg.deoverlap_iou_min);
    result.report.push_back({"deoverlap", partial.size(), std::nullopt});
  }
  result.clusters = finalize(partial, n);
  std::optional<PairwiseMetrics> final_metrics;
  if (labels) final_metrics = pairwise_metrics(result.clusters, *labels);
  result.report.push_back({"finalize", result.clusters.num_clusters(), final_metrics});
  return result;
}

PipelineResult run_pipeline(const GcnDetModel& det, const GcnSegModel& seg,
                            const EmbeddingSet& emb, const LabelSet* labels,
                            const ProposalConfig& proposal_cfg, const PipelineConfig& cfg,
                            std::uint64_t seed) {
  const AffinityGraph g = build_base_graph(emb, proposal_cfg);
  const ProposalSet proposals = propose(emb, g, proposal_cfg);
  return run_pipeline_on(det, seg, emb, g, proposals, labels, cfg, seed);
}

}  // namespace graphclus
