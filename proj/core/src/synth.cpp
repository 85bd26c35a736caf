#include "graphclus/synth.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <string>

namespace graphclus {

void SynthConfig::validate() const {
  if (num_classes < 1) throw std::invalid_argument("SynthConfig: need at least one class");
  if (min_per_class < 1 || max_per_class < min_per_class)
    throw std::invalid_argument("SynthConfig: need 1 <= min_per_class <= max_per_class");
  if (dim < 2) throw std::invalid_argument("SynthConfig: dim must be >= 2");
  if (!(intra_class_noise >= 0.0)) throw std::invalid_argument("SynthConfig: noise must be >= 0");
  if (!(outlier_fraction >= 0.0 && outlier_fraction < 1.0))
    throw std::invalid_argument("SynthConfig: outlier_fraction must lie in [0, 1)");
}

namespace {

void random_unit(Rng& rng, std::span<double> out) {
  for (;;) {
    double norm_sq = 0.0;
    for (double& x : out) {
      x = rng.normal();
      norm_sq += x * x;
    }
    if (norm_sq > 1e-24) {
      const double norm = std::sqrt(norm_sq);
      for (double& x : out) x /= norm;
      return;
    }
  }
}

}  // namespace

LabeledEmbeddings synth_dataset(const SynthConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  std::vector<std::size_t> sizes(cfg.num_classes);
  for (auto& s : sizes) s = cfg.min_per_class + rng.below(cfg.max_per_class - cfg.min_per_class + 1);
  std::size_t n = 0;
  for (auto s : sizes) n += s;

  Matrix features(n, cfg.dim);
  std::vector<ClassId> labels(n);
  std::vector<double> center(cfg.dim);
  std::size_t row = 0;
  for (std::size_t c = 0; c < cfg.num_classes; ++c) {
    random_unit(rng, center);
    for (std::size_t m = 0; m < sizes[c]; ++m, ++row) {
      auto dst = features.row(row);
      for (std::size_t j = 0; j < cfg.dim; ++j)
        dst[j] = center[j] + cfg.intra_class_noise * rng.normal();
      labels[row] = static_cast<ClassId>(c);
    }
  }
  const auto outliers =
      static_cast<std::size_t>(std::llround(cfg.outlier_fraction * static_cast<double>(n)));
  for (std::size_t v : rng.sample_distinct(n, outliers)) random_unit(rng, features.row(v));
  return {EmbeddingSet(std::move(features)), LabelSet(std::move(labels))};
}

std::pair<LabeledEmbeddings, LabeledEmbeddings> split_by_class(const LabeledEmbeddings& data,
                                                               std::size_t train_classes,
                                                               std::uint64_t seed) {
  std::set<ClassId> present(data.labels.values().begin(), data.labels.values().end());
  std::vector<ClassId> classes(present.begin(), present.end());
  if (train_classes == 0 || train_classes >= classes.size()) {
    throw std::invalid_argument("split_by_class: train_classes=" + std::to_string(train_classes) +
                                " must leave both parts nonempty (" +
                                std::to_string(classes.size()) + " classes)");
  }
  Rng rng(seed);
  std::set<ClassId> train;
  for (std::size_t i : rng.sample_distinct(classes.size(), train_classes)) train.insert(classes[i]);

  auto take = [&](bool want_train) {
    std::vector<std::size_t> rows;
    for (std::size_t v = 0; v < data.labels.size(); ++v)
      if (train.contains(data.labels[v]) == want_train) rows.push_back(v);
    Matrix features(rows.size(), data.embeddings.dim());
    std::vector<ClassId> labels(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto src = data.embeddings.row(rows[i]);
      std::copy(src.begin(), src.end(), features.row(i).begin());
      labels[i] = data.labels[rows[i]];
    }
    return LabeledEmbeddings{EmbeddingSet(std::move(features)), LabelSet(std::move(labels))};
  };
  return {take(true), take(false)};
}

}  // namespace graphclus
