#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "graphclus/eval.hpp"
#include "graphclus/graph.hpp"
#include "graphclus/numerics.hpp"

namespace graphclus {

/// One proposal prepared for the networks.
struct SubGraphInstance {
  Matrix features;             // |P| x d_in, rows in id order
  Matrix adjacency;            // |P| x |P|, symmetric, zero diagonal
  std::vector<VertexId> ids;   // local -> global
};

/// Builds the instance for proposal `p`. Negative affinities are clamped to
/// zero. When `center` is set, the proposal's mean feature is subtracted from
/// every row.
SubGraphInstance make_instance(const AffinityGraph& g, const EmbeddingSet& emb,
                               const VertexSet& p, bool center = false);

struct GcnLayerParams {
  Matrix weight;   // d_in x d_out
};

/// Linear map to a scalar: weight is d x 1, bias is 1 x 1.
struct LinearHead {
  Matrix weight;
  Matrix bias{1, 1};
};

enum class Pooling { max, mean, sum };

const char* pooling_name(Pooling p) noexcept;

struct GcnDims {
  std::size_t input = 0;
  std::size_t hidden1 = 256;
  std::size_t hidden2 = 64;
  friend bool operator==(const GcnDims&, const GcnDims&) = default;
};

/// Detector: two propagation layers, vertex pooling, IoU and IoP heads.
struct GcnDetModel {
  std::array<GcnLayerParams, 2> layers;
  LinearHead head_iou;
  LinearHead head_iop;
  Pooling pooling = Pooling::max;

  /// Weights drawn from uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)); biases 0.
  static GcnDetModel init(const GcnDims& dims, Rng& rng, Pooling pooling = Pooling::max);
  /// All-zero parameters of the same shape.
  static GcnDetModel zeros_like(const GcnDetModel& m);
  GcnDims dims() const noexcept;
};

/// Segmenter: the input carries one extra seed-indicator column.
struct GcnSegModel {
  std::array<GcnLayerParams, 2> layers;
  LinearHead head;

  /// dims.input is the feature dimension without the indicator column.
  static GcnSegModel init(const GcnDims& dims, Rng& rng);
  static GcnSegModel zeros_like(const GcnSegModel& m);
  /// Feature dimension without the indicator column.
  GcnDims dims() const noexcept;
};

/// Trainable parameters in declaration order: layer weights, then each
/// head's weight followed by its bias.
std::vector<Matrix*> parameters(GcnDetModel& m);
std::vector<const Matrix*> parameters(const GcnDetModel& m);
std::vector<Matrix*> parameters(GcnSegModel& m);
std::vector<const Matrix*> parameters(const GcnSegModel& m);

/// sigma(D^-1 (A + I) X W) with D_ii = 1 + sum_j A_ij; sigma is ReLU when
/// `activate`, identity otherwise. Throws std::invalid_argument on shape
/// mismatch or an asymmetric / non-zero-diagonal adjacency.
Matrix gcn_layer_forward(const Matrix& x, const Matrix& adj, const GcnLayerParams& w,
                         bool activate);

/// Row-normalized D^-1 (A + I) as a dense matrix.
Matrix propagation_matrix(const Matrix& adj);

/// Raw (unclamped) head outputs.
QualityScores det_forward_raw(const GcnDetModel& model, const SubGraphInstance& inst);
/// Inference outputs, clamped to [0, 1].
QualityScores det_forward(const GcnDetModel& model, const SubGraphInstance& inst);

struct DetSample {
  std::shared_ptr<const SubGraphInstance> instance;
  QualityScores target;
};

struct DetLossAndGrads {
  double loss = 0.0;
  GcnDetModel grads;
};

/// loss = mean over batch of ((iou - iou*)^2 + (iop - iop*)^2) / 2.
DetLossAndGrads det_loss_and_grads(const GcnDetModel& model, std::span<const DetSample> batch);
double det_loss(const GcnDetModel& model, std::span<const DetSample> batch);

/// Per-vertex logits for the given seed (local index).
std::vector<double> seg_logits(const GcnSegModel& model, const SubGraphInstance& inst,
                               std::size_t seed_vertex);
/// Per-vertex membership probabilities in (0, 1).
std::vector<double> seg_forward(const GcnSegModel& model, const SubGraphInstance& inst,
                                std::size_t seed_vertex);

struct SeedTarget {
  std::size_t seed = 0;          // local index into the proposal
  std::vector<double> target;    // 1 where the label equals the seed's label
};

/// Draws min(num_seeds, |p|) distinct seeds and their binary targets.
std::vector<SeedTarget> seg_training_samples(const VertexSet& p, const LabelSet& labels,
                                             std::size_t num_seeds, Rng& rng);

struct SegSample {
  std::shared_ptr<const SubGraphInstance> instance;
  std::size_t seed = 0;
  std::vector<double> target;
};

struct SegLossAndGrads {
  double loss = 0.0;
  GcnSegModel grads;
};

/// Mean over samples of the mean per-vertex binary cross-entropy, computed
/// from logits.
SegLossAndGrads seg_loss_and_grads(const GcnSegModel& model, std::span<const SegSample> batch);
double seg_loss(const GcnSegModel& model, std::span<const SegSample> batch);

struct TrainConfig {
  double learning_rate = 0.01;
  double momentum = 0.9;
  std::size_t epochs = 100;
  std::size_t batch_size = 16;
  std::uint64_t seed = 0;

  void validate() const;
};

template <typename Model>
struct TrainResult {
  Model model;
  std::vector<double> epoch_losses;   // mean training loss seen during each epoch
};

/// Momentum SGD (v = m v - lr g; p += v) over seeded shuffled mini-batches.
/// Throws std::runtime_error on a non-finite loss, naming epoch and batch.
TrainResult<GcnDetModel> train(GcnDetModel model, std::span<const DetSample> dataset,
                               const TrainConfig& cfg);
TrainResult<GcnSegModel> train(GcnSegModel model, std::span<const SegSample> dataset,
                               const TrainConfig& cfg);

}  // namespace graphclus
