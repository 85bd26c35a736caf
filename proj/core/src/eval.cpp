#include "graphclus/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <unordered_map>

namespace graphclus {

std::vector<std::size_t> LabelSet::class_sizes() const {
  std::vector<std::size_t> sizes;
  for (ClassId c : labels_) {
    if (c >= sizes.size()) sizes.resize(static_cast<std::size_t>(c) + 1, 0);
    ++sizes[c];
  }
  return sizes;
}

std::string format_metrics(const PairwiseMetrics& m) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "precision=%.4f recall=%.4f fscore=%.4f clusters=%zu",
                m.precision, m.recall, m.fscore, m.num_clusters);
  return buf;
}

ClusterSet::ClusterSet(std::span<const std::uint32_t> assignment) {
  std::unordered_map<std::uint32_t, std::uint32_t> remap;
  assignment_.reserve(assignment.size());
  for (std::uint32_t id : assignment) {
    auto [it, inserted] = remap.try_emplace(id, static_cast<std::uint32_t>(remap.size()));
    assignment_.push_back(it->second);
  }
  num_clusters_ = remap.size();
}

std::vector<VertexSet> ClusterSet::clusters() const {
  std::vector<std::vector<VertexId>> members(num_clusters_);
  for (std::size_t v = 0; v < assignment_.size(); ++v)
    members[assignment_[v]].push_back(static_cast<VertexId>(v));
  std::vector<VertexSet> out;
  out.reserve(members.size());
  for (auto& m : members) out.emplace_back(std::move(m));
  return out;
}

ClassId majority_label(const VertexSet& p, const LabelSet& labels) {
  if (p.empty()) throw std::invalid_argument("majority_label: empty proposal");
  std::unordered_map<ClassId, std::size_t> counts;
  for (VertexId v : p) {
    if (v >= labels.size()) {
      throw std::out_of_range("majority_label: vertex " + std::to_string(v) +
                              " has no label (n=" + std::to_string(labels.size()) + ")");
    }
    ++counts[labels[v]];
  }
  ClassId best = 0;
  std::size_t best_count = 0;
  for (const auto& [label, count] : counts) {
    if (count > best_count || (count == best_count && label < best)) {
      best = label;
      best_count = count;
    }
  }
  return best;
}

QualityScores quality_scores(const VertexSet& p, const LabelSet& labels,
                             std::span<const std::size_t> class_sizes) {
  const ClassId label = majority_label(p, labels);
  std::size_t intersection = 0;
  for (VertexId v : p)
    if (labels[v] == label) ++intersection;
  const std::size_t truth = label < class_sizes.size() ? class_sizes[label] : 0;
  const std::size_t uni = p.size() + truth - intersection;
  return {static_cast<double>(intersection) / static_cast<double>(uni),
          static_cast<double>(intersection) / static_cast<double>(p.size())};
}

QualityScores quality_scores(const VertexSet& p, const LabelSet& labels) {
  const auto sizes = labels.class_sizes();
  return quality_scores(p, labels, sizes);
}

namespace {

std::uint64_t pairs(std::uint64_t m) noexcept { return m * (m - (m > 0 ? 1 : 0)) / 2; }

}  // namespace

PairwiseMetrics pairwise_metrics(const ClusterSet& pred, const LabelSet& labels) {
  if (pred.size() != labels.size()) {
    throw std::invalid_argument("pairwise_metrics: " + std::to_string(pred.size()) +
                                " predictions vs " + std::to_string(labels.size()) + " labels");
  }
  std::vector<std::pair<std::uint32_t, ClassId>> cells(pred.size());
  for (std::size_t v = 0; v < pred.size(); ++v) cells[v] = {pred[v], labels[v]};
  std::sort(cells.begin(), cells.end());

  std::uint64_t same_both = 0;
  for (std::size_t i = 0; i < cells.size();) {
    std::size_t j = i;
    while (j < cells.size() && cells[j] == cells[i]) ++j;
    same_both += pairs(j - i);
    i = j;
  }
  std::vector<std::uint64_t> cluster_sizes(pred.num_clusters(), 0);
  for (std::size_t v = 0; v < pred.size(); ++v) ++cluster_sizes[pred[v]];
  std::uint64_t same_cluster = 0;
  for (auto s : cluster_sizes) same_cluster += pairs(s);
  std::uint64_t same_class = 0;
  for (auto s : labels.class_sizes()) same_class += pairs(s);

  PairwiseMetrics m;
  m.num_clusters = pred.num_clusters();
  m.precision = same_cluster == 0 ? 0.0
                                  : static_cast<double>(same_both) / static_cast<double>(same_cluster);
  m.recall = same_class == 0 ? 0.0
                             : static_cast<double>(same_both) / static_cast<double>(same_class);
  m.fscore = m.precision + m.recall > 0.0
                 ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
                 : 0.0;
  return m;
}

KMeansResult kmeans_baseline(const EmbeddingSet& emb, std::size_t k, std::uint64_t seed,
                             const KMeansConfig& cfg) {
  const std::size_t n = emb.size();
  const std::size_t d = emb.dim();
  if (k < 1 || k > n) {
    throw std::invalid_argument("kmeans_baseline: k=" + std::to_string(k) +
                                " must satisfy 1 <= k <= n=" + std::to_string(n));
  }
  Rng rng(seed);
  Matrix centers(k, d);
  {
    const auto picks = rng.sample_distinct(n, k);
    for (std::size_t c = 0; c < k; ++c) {
      const auto src = emb.row(picks[c]);
      std::copy(src.begin(), src.end(), centers.row(c).begin());
    }
  }

  auto sq_dist = [&](std::size_t v, std::size_t c) {
    const auto x = emb.row(v);
    const auto y = centers.row(c);
    double acc = 0.0;
    for (std::size_t i = 0; i < d; ++i) acc += (x[i] - y[i]) * (x[i] - y[i]);
    return acc;
  };

  std::vector<std::uint32_t> assign(n, 0);
  std::vector<double> dist(n, 0.0);
  double previous = std::numeric_limits<double>::infinity();
  KMeansResult result;
  for (std::size_t iter = 0; iter < cfg.max_iterations; ++iter) {
    result.iterations = iter + 1;
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t v = 0; v < n; ++v) {
      std::size_t best = 0;
      double best_d = sq_dist(v, 0);
      for (std::size_t c = 1; c < k; ++c) {
        const double dc = sq_dist(v, c);
        if (dc < best_d) {
          best_d = dc;
          best = c;
        }
      }
      assign[v] = static_cast<std::uint32_t>(best);
      dist[v] = best_d;
      ++counts[best];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] != 0) continue;
      // reseed at the farthest point whose own cluster can spare it
      std::size_t far = n;
      for (std::size_t v = 0; v < n; ++v) {
        if (counts[assign[v]] <= 1) continue;
        if (far == n || dist[v] > dist[far]) far = v;
      }
      if (far == n) continue;
      --counts[assign[far]];
      assign[far] = static_cast<std::uint32_t>(c);
      counts[c] = 1;
      dist[far] = 0.0;
      const auto src = emb.row(far);
      std::copy(src.begin(), src.end(), centers.row(c).begin());
    }
    double inertia = 0.0;
    for (double x : dist) inertia += x;

    centers.fill(0.0);
    for (std::size_t v = 0; v < n; ++v) {
      auto dst = centers.row(assign[v]);
      const auto src = emb.row(v);
      for (std::size_t i = 0; i < d; ++i) dst[i] += src[i];
    }
    for (std::size_t c = 0; c < k; ++c)
      for (double& x : centers.row(c)) x /= static_cast<double>(counts[c]);

    result.inertia = inertia;
    const bool converged =
        inertia == 0.0 ||
        (std::isfinite(previous) && std::abs(previous - inertia) <= cfg.tolerance * previous);
    previous = inertia;
    if (converged) break;
  }
  // inertia of the final assignment against the final centers
  double inertia = 0.0;
  for (std::size_t v = 0; v < n; ++v) inertia += sq_dist(v, assign[v]);
  result.inertia = inertia;
  result.clusters = ClusterSet(assign);
  return result;
}

}  // namespace graphclus
