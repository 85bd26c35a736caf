#pragma once

#include <cstddef>
#include <cstdint>

#include "graphclus/eval.hpp"
#include "graphclus/graph.hpp"

namespace graphclus {

/// Gaussian-mixture stand-in for face embeddings on the unit sphere.
struct SynthConfig {
  std::size_t num_classes = 20;
  std::size_t min_per_class = 50;   // class sizes drawn uniformly from
  std::size_t max_per_class = 50;   // [min_per_class, max_per_class]
  std::size_t dim = 32;
  double intra_class_noise = 0.15;  // per-coordinate standard deviation
  double outlier_fraction = 0.0;    // share of points redrawn uniformly on the sphere
  std::uint64_t seed = 0;

  void validate() const;
};

struct LabeledEmbeddings {
  EmbeddingSet embeddings;
  LabelSet labels;
};

/// Each class gets a random unit center; members are center plus isotropic
/// noise, renormalized. round(outlier_fraction * n) members are then redrawn
/// uniformly on the sphere and keep their label. Vertices are class-major.
LabeledEmbeddings synth_dataset(const SynthConfig& cfg);

/// Partitions classes (not vertices) into a training part with
/// `train_classes` randomly chosen class ids and a test part with the rest.
/// Vertex order and class ids are preserved within each part.
std::pair<LabeledEmbeddings, LabeledEmbeddings> split_by_class(const LabeledEmbeddings& data,
                                                               std::size_t train_classes,
                                                               std::uint64_t seed);

}  // namespace graphclus
