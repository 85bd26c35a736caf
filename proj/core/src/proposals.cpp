#include "graphclus/proposals.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace graphclus {

void SuperVertexConfig::validate() const {
  if (!(delta > 0.0)) throw std::invalid_argument("SuperVertexConfig: delta must be > 0");
  if (s_max < 2) throw std::invalid_argument("SuperVertexConfig: s_max must be >= 2");
  if (iterations < 1) throw std::invalid_argument("SuperVertexConfig: iterations must be >= 1");
  if (k < 1) throw std::invalid_argument("SuperVertexConfig: k must be >= 1");
  if (max_proposal_size < 1)
    throw std::invalid_argument("SuperVertexConfig: max_proposal_size must be >= 1");
  if (!std::isfinite(e_tau)) throw std::invalid_argument("SuperVertexConfig: e_tau not finite");
}

namespace {

std::size_t hash_ids(const VertexSet& v) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (VertexId id : v) {
    h ^= id;
    h *= 0x100000001b3ULL;
  }
  return static_cast<std::size_t>(h ^ v.size());
}

}  // namespace

bool ProposalSet::add(VertexSet v, std::size_t iteration) {
  const std::size_t h = hash_ids(v);
  auto [first, last] = by_hash_.equal_range(h);
  for (auto it = first; it != last; ++it)
    if (proposals_[it->second] == v) return false;
  by_hash_.emplace(h, proposals_.size());
  proposals_.push_back(std::move(v));
  iterations_.push_back(iteration);
  return true;
}

void ProposalSet::merge(const ProposalSet& other) {
  for (std::size_t i = 0; i < other.size(); ++i) add(other.proposals_[i], other.iterations_[i]);
}

SuperVertexPartition generate_super_vertices(const AffinityGraph& g,
                                             const SuperVertexConfig& cfg) {
  cfg.validate();
  for (VertexId v = 0; v < g.size(); ++v)
    for (const Edge& e : g.neighbors(v))
      if (!std::isfinite(e.weight))
        throw std::invalid_argument("generate_super_vertices: non-finite edge weight at vertex " +
                                    std::to_string(v));

  SuperVertexPartition out;
  std::vector<VertexId> remaining;
  bool first_round = true;
  for (std::size_t round = 0;; ++round) {
    if (!first_round && remaining.empty()) break;
    // threshold from the round index, not by accumulation, so the schedule has no drift
    const double threshold = cfg.e_tau + static_cast<double>(round) * cfg.delta;
    const AffinityGraph pruned = prune_edges(g, threshold);
    std::vector<VertexSet> components;
    if (first_round) {
      components = connected_components(pruned);
    } else {
      const VertexSet restrict(remaining);
      components = connected_components(pruned, &restrict);
      ++out.escalations;
    }
    first_round = false;
    remaining.clear();
    for (auto& c : components) {
      if (c.size() < cfg.s_max) {
        out.super_vertices.push_back(std::move(c));
      } else {
        remaining.insert(remaining.end(), c.begin(), c.end());
      }
    }
  }
  std::sort(out.super_vertices.begin(), out.super_vertices.end(),
            [](const VertexSet& a, const VertexSet& b) { return a[0] < b[0]; });
  return out;
}

std::vector<double> average_center(const EmbeddingSet& emb, const VertexSet& v) {
  if (v.empty()) throw std::invalid_argument("average_center: empty vertex set");
  std::vector<double> center(emb.dim(), 0.0);
  for (VertexId id : v) {
    if (id >= emb.size()) {
      throw std::out_of_range("average_center: vertex " + std::to_string(id) +
                              " out of range for n=" + std::to_string(emb.size()));
    }
    const auto row = emb.row(id);
    for (std::size_t c = 0; c < center.size(); ++c) center[c] += row[c];
  }
  double norm_sq = 0.0;
  for (double& x : center) {
    x /= static_cast<double>(v.size());
    norm_sq += x * x;
  }
  const double norm = std::sqrt(norm_sq);
  if (!(norm > 1e-12)) {
    throw std::domain_error("average_center: zero-norm mean for the set starting at vertex " +
                            std::to_string(v[0]) + " (size " + std::to_string(v.size()) + ")");
  }
  for (double& x : center) x /= norm;
  return center;
}

std::vector<std::vector<VertexSet>> generate_proposal_levels(const AffinityGraph& g,
                                                             const EmbeddingSet& emb,
                                                             const SuperVertexConfig& cfg) {
  cfg.validate();
  if (g.size() != emb.size()) {
    throw std::invalid_argument("generate_proposal_levels: graph has " + std::to_string(g.size()) +
                                " vertices but embedding set has " + std::to_string(emb.size()));
  }
  std::vector<std::vector<VertexSet>> levels;
  levels.push_back(generate_super_vertices(g, cfg).super_vertices);

  for (std::size_t level = 1; level < cfg.iterations; ++level) {
    const auto& current = levels.back();
    const std::size_t m = current.size();
    if (m < 2) break;

    Matrix centers(m, emb.dim());
    for (std::size_t i = 0; i < m; ++i) {
      const auto c = average_center(emb, current[i]);
      std::copy(c.begin(), c.end(), centers.row(i).begin());
    }
    const AffinityGraph center_graph =
        build_knn_graph(EmbeddingSet(std::move(centers)), std::min(cfg.k, m - 1));
    const auto groups = generate_super_vertices(center_graph, cfg).super_vertices;

    std::vector<VertexSet> next;
    bool merged_any = false;
    for (const VertexSet& group : groups) {
      std::size_t total = 0;
      for (VertexId idx : group) total += current[idx].size();
      if (group.size() > 1 && total > cfg.max_proposal_size) {
        for (VertexId idx : group) next.push_back(current[idx]);
        continue;
      }
      if (group.size() == 1) {
        next.push_back(current[group[0]]);
        continue;
      }
      std::vector<VertexId> ids;
      ids.reserve(total);
      for (VertexId idx : group) ids.insert(ids.end(), current[idx].begin(), current[idx].end());
      next.emplace_back(std::move(ids));
      merged_any = true;
    }
    if (!merged_any) break;
    std::sort(next.begin(), next.end(),
              [](const VertexSet& a, const VertexSet& b) { return a[0] < b[0]; });
    levels.push_back(std::move(next));
  }
  return levels;
}

ProposalSet generate_proposals(const AffinityGraph& g, const EmbeddingSet& emb,
                               const SuperVertexConfig& cfg) {
  ProposalSet out;
  const auto levels = generate_proposal_levels(g, emb, cfg);
  for (std::size_t level = 0; level < levels.size(); ++level)
    for (const VertexSet& v : levels[level]) out.add(v, level);
  return out;
}

ProposalSet generate_proposals_multi(const AffinityGraph& g, const EmbeddingSet& emb,
                                     const SuperVertexConfig& cfg,
                                     std::span<const double> thresholds) {
  ProposalSet out;
  for (double t : thresholds) {
    SuperVertexConfig local = cfg;
    local.e_tau = t;
    out.merge(generate_proposals(g, emb, local));
  }
  return out;
}

}  // namespace graphclus
