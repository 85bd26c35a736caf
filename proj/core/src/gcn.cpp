#include "graphclus/gcn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>

#include "graphclus/parallel.hpp"

namespace graphclus {

SubGraphInstance make_instance(const AffinityGraph& g, const EmbeddingSet& emb,
                               const VertexSet& p, bool center) {
  if (g.size() != emb.size()) {
    throw std::invalid_argument("make_instance: graph/embedding size mismatch");
  }
  SubAdjacency sub = induced_subgraph(g, p);
  for (double& w : sub.adjacency.data()) w = std::max(w, 0.0);

  Matrix features(p.size(), emb.dim());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const auto src = emb.row(p[i]);
    std::copy(src.begin(), src.end(), features.row(i).begin());
  }
  if (center) {
    std::vector<double> mean(emb.dim(), 0.0);
    for (std::size_t i = 0; i < features.rows(); ++i)
      for (std::size_t c = 0; c < features.cols(); ++c) mean[c] += features(i, c);
    for (double& m : mean) m /= static_cast<double>(features.rows());
    for (std::size_t i = 0; i < features.rows(); ++i)
      for (std::size_t c = 0; c < features.cols(); ++c) features(i, c) -= mean[c];
  }
  return {std::move(features), std::move(sub.adjacency), std::move(sub.ids)};
}

const char* pooling_name(Pooling p) noexcept {
  switch (p) {
    case Pooling::max: return "max";
    case Pooling::mean: return "mean";
    case Pooling::sum: return "sum";
  }
  return "?";
}

namespace {

Matrix uniform_init(std::size_t rows, std::size_t cols, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(rows));
  Matrix m(rows, cols);
  for (double& x : m.data()) x = rng.uniform(-bound, bound);
  return m;
}

LinearHead head_init(std::size_t d, Rng& rng) { return {uniform_init(d, 1, rng), Matrix(1, 1)}; }

Matrix zeros_of(const Matrix& m) { return Matrix(m.rows(), m.cols()); }

void require_adjacency(const Matrix& adj) {
  if (adj.rows() != adj.cols()) {
    throw std::invalid_argument("gcn: adjacency must be square, got " + adj.shape());
  }
  for (std::size_t i = 0; i < adj.rows(); ++i) {
    if (adj(i, i) != 0.0) throw std::invalid_argument("gcn: adjacency diagonal must be zero");
    for (std::size_t j = i + 1; j < adj.cols(); ++j)
      if (adj(i, j) != adj(j, i))
        throw std::invalid_argument("gcn: adjacency is not symmetric at (" + std::to_string(i) +
                                    ", " + std::to_string(j) + ")");
  }
}

struct LayerTrace {
  Matrix input;
  Matrix pre;   // pre-activation
};

// Computes P x W in the cheaper association order.
Matrix propagate(const Matrix& prop, const Matrix& x, const Matrix& w) {
  if (x.cols() <= w.cols()) return matmul(matmul(prop, x), w);
  return matmul(prop, matmul(x, w));
}

Matrix layer_forward(const Matrix& prop, const Matrix& x, const Matrix& w, bool activate,
                     LayerTrace* trace) {
  Matrix pre = propagate(prop, x, w);
  Matrix out = activate ? relu(pre) : pre;
  if (trace) {
    trace->input = x;
    trace->pre = std::move(pre);
  }
  return out;
}

// Returns the gradient w.r.t. the layer input; accumulates into grad_w.
Matrix layer_backward(const Matrix& prop, const Matrix& w, const LayerTrace& trace,
                      bool activate, Matrix d_out, Matrix& grad_w, bool need_input_grad) {
  if (activate) {
    auto pre = trace.pre.data();
    auto d = d_out.data();
    for (std::size_t i = 0; i < d.size(); ++i)
      if (pre[i] <= 0.0) d[i] = 0.0;
  }
  const Matrix g = matmul_tn(prop, d_out);
  axpy(1.0, matmul_tn(trace.input, g), grad_w);
  if (!need_input_grad) return {};
  return matmul_nt(g, w);
}

void check_input(const Matrix& features, const Matrix& adj, std::size_t d_in, const char* who) {
  if (features.rows() == 0) throw std::invalid_argument(std::string(who) + ": empty instance");
  if (features.rows() != adj.rows()) {
    throw std::invalid_argument(std::string(who) + ": features " + features.shape() +
                                " do not match adjacency " + adj.shape());
  }
  if (features.cols() != d_in) {
    throw std::invalid_argument(std::string(who) + ": feature dim " +
                                std::to_string(features.cols()) + " but model expects " +
                                std::to_string(d_in));
  }
}

struct DetTrace {
  Matrix prop;
  LayerTrace l1, l2;
  Matrix h2;
  std::vector<std::size_t> argmax;   // per column, max pooling only
  Matrix pooled;                     // 1 x h2
};

QualityScores det_forward_traced(const GcnDetModel& model, const SubGraphInstance& inst,
                                 DetTrace* trace) {
  check_input(inst.features, inst.adjacency, model.layers[0].weight.rows(), "det_forward");
  Matrix prop = propagation_matrix(inst.adjacency);
  LayerTrace l1, l2;
  const bool keep = trace != nullptr;
  Matrix h1 = layer_forward(prop, inst.features, model.layers[0].weight, true, keep ? &l1 : nullptr);
  Matrix h2 = layer_forward(prop, h1, model.layers[1].weight, true, keep ? &l2 : nullptr);

  const std::size_t n = h2.rows();
  const std::size_t c = h2.cols();
  Matrix pooled(1, c);
  std::vector<std::size_t> argmax;
  switch (model.pooling) {
    case Pooling::max:
      argmax.assign(c, 0);
      for (std::size_t j = 0; j < c; ++j) {
        double best = h2(0, j);
        for (std::size_t i = 1; i < n; ++i) {
          if (h2(i, j) > best) {   // strict: lowest row wins ties
            best = h2(i, j);
            argmax[j] = i;
          }
        }
        pooled(0, j) = best;
      }
      break;
    case Pooling::mean:
    case Pooling::sum:
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < c; ++j) pooled(0, j) += h2(i, j);
      if (model.pooling == Pooling::mean)
        for (double& x : pooled.data()) x /= static_cast<double>(n);
      break;
  }
  QualityScores out{matmul(pooled, model.head_iou.weight)(0, 0) + model.head_iou.bias(0, 0),
                    matmul(pooled, model.head_iop.weight)(0, 0) + model.head_iop.bias(0, 0)};
  if (trace) {
    trace->prop = std::move(prop);
    trace->l1 = std::move(l1);
    trace->l2 = std::move(l2);
    trace->h2 = std::move(h2);
    trace->argmax = std::move(argmax);
    trace->pooled = std::move(pooled);
  }
  return out;
}

// Accumulates into grads the gradient of d_iou * iou + d_iop * iop.
void det_backward(const GcnDetModel& model, const DetTrace& t, double d_iou, double d_iop,
                  GcnDetModel& grads) {
  const std::size_t c = t.pooled.cols();
  Matrix d_pooled(1, c);
  for (std::size_t j = 0; j < c; ++j) {
    grads.head_iou.weight(j, 0) += d_iou * t.pooled(0, j);
    grads.head_iop.weight(j, 0) += d_iop * t.pooled(0, j);
    d_pooled(0, j) = d_iou * model.head_iou.weight(j, 0) + d_iop * model.head_iop.weight(j, 0);
  }
  grads.head_iou.bias(0, 0) += d_iou;
  grads.head_iop.bias(0, 0) += d_iop;

  const std::size_t n = t.h2.rows();
  Matrix d_h2(n, c);
  switch (model.pooling) {
    case Pooling::max:
      for (std::size_t j = 0; j < c; ++j) d_h2(t.argmax[j], j) = d_pooled(0, j);
      break;
    case Pooling::mean:
    case Pooling::sum: {
      const double scale = model.pooling == Pooling::mean ? 1.0 / static_cast<double>(n) : 1.0;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < c; ++j) d_h2(i, j) = d_pooled(0, j) * scale;
      break;
    }
  }
  Matrix d_h1 = layer_backward(t.prop, model.layers[1].weight, t.l2, true, std::move(d_h2),
                               grads.layers[1].weight, true);
  layer_backward(t.prop, model.layers[0].weight, t.l1, true, std::move(d_h1),
                 grads.layers[0].weight, false);
}

Matrix with_seed_column(const Matrix& features, std::size_t seed) {
  Matrix x(features.rows(), features.cols() + 1);
  for (std::size_t i = 0; i < features.rows(); ++i) {
    const auto src = features.row(i);
    std::copy(src.begin(), src.end(), x.row(i).begin());
    x(i, features.cols()) = i == seed ? 1.0 : 0.0;
  }
  return x;
}

struct SegTrace {
  Matrix prop;
  LayerTrace l1, l2;
  Matrix h2;
};

std::vector<double> seg_logits_traced(const GcnSegModel& model, const SubGraphInstance& inst,
                                      std::size_t seed, SegTrace* trace) {
  check_input(inst.features, inst.adjacency, model.dims().input, "seg_forward");
  if (seed >= inst.features.rows()) {
    throw std::out_of_range("seg_forward: seed " + std::to_string(seed) +
                            " out of range for proposal of size " +
                            std::to_string(inst.features.rows()));
  }
  Matrix prop = propagation_matrix(inst.adjacency);
  LayerTrace l1, l2;
  const bool keep = trace != nullptr;
  Matrix h1 = layer_forward(prop, with_seed_column(inst.features, seed), model.layers[0].weight,
                            true, keep ? &l1 : nullptr);
  Matrix h2 = layer_forward(prop, h1, model.layers[1].weight, true, keep ? &l2 : nullptr);
  const Matrix z = matmul(h2, model.head.weight);
  std::vector<double> logits(z.rows());
  for (std::size_t i = 0; i < z.rows(); ++i) logits[i] = z(i, 0) + model.head.bias(0, 0);
  if (trace) {
    trace->prop = std::move(prop);
    trace->l1 = std::move(l1);
    trace->l2 = std::move(l2);
    trace->h2 = std::move(h2);
  }
  return logits;
}

// Stable log(1 + exp(z)) - t z.
double bce_from_logit(double z, double t) noexcept {
  return std::max(z, 0.0) - z * t + std::log1p(std::exp(-std::abs(z)));
}

void add_into(std::vector<Matrix*> dst, std::vector<const Matrix*> src) {
  for (std::size_t i = 0; i < dst.size(); ++i) axpy(1.0, *src[i], *dst[i]);
}

template <typename Model, typename Sample, typename PerSample>
std::pair<double, Model> batched_grads(const Model& model, std::span<const Sample> batch,
                                       PerSample&& per_sample) {
  if (batch.empty()) throw std::invalid_argument("loss_and_grads: empty batch");
  std::vector<Model> slots(batch.size(), Model::zeros_like(model));
  std::vector<double> losses(batch.size(), 0.0);
  parallel_for(batch.size(), [&](std::size_t i) { losses[i] = per_sample(batch[i], slots[i]); });
  Model total = Model::zeros_like(model);
  double loss = 0.0;
  // fixed reduction order keeps results independent of the thread count
  for (std::size_t i = 0; i < batch.size(); ++i) {
    loss += losses[i];
    add_into(parameters(total), parameters(std::as_const(slots[i])));
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (Matrix* p : parameters(total))
    for (double& x : p->data()) x *= inv;
  return {loss * inv, std::move(total)};
}

template <typename Model, typename Sample, typename LossGrad>
TrainResult<Model> train_impl(Model model, std::span<const Sample> dataset,
                              const TrainConfig& cfg, LossGrad&& loss_and_grads) {
  cfg.validate();
  if (dataset.empty()) throw std::invalid_argument("train: empty dataset");
  Rng rng(cfg.seed);
  Model velocity = Model::zeros_like(model);
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<Sample> batch;
  TrainResult<Model> result;
  result.epoch_losses.reserve(cfg.epochs);
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    double epoch_loss = 0.0;
    for (std::size_t start = 0, b = 0; start < order.size(); start += cfg.batch_size, ++b) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
      batch.clear();
      for (std::size_t i = start; i < stop; ++i) batch.push_back(dataset[order[i]]);
      double loss = 0.0;
      Model grads;
      try {
        std::tie(loss, grads) = loss_and_grads(model, std::span<const Sample>(batch));
      } catch (const std::domain_error& e) {
        throw std::runtime_error("train: non-finite values at epoch " + std::to_string(epoch) +
                                 ", batch " + std::to_string(b) + ": " + e.what());
      }
      if (!std::isfinite(loss)) {
        throw std::runtime_error("train: non-finite loss at epoch " + std::to_string(epoch) +
                                 ", batch " + std::to_string(b));
      }
      epoch_loss += loss * static_cast<double>(stop - start);
      auto params = parameters(model);
      auto vel = parameters(velocity);
      auto grad = parameters(std::as_const(grads));
      for (std::size_t p = 0; p < params.size(); ++p) {
        auto v = vel[p]->data();
        auto g = grad[p]->data();
        auto w = params[p]->data();
        for (std::size_t i = 0; i < w.size(); ++i) {
          v[i] = cfg.momentum * v[i] - cfg.learning_rate * g[i];
          w[i] += v[i];
        }
      }
    }
    result.epoch_losses.push_back(epoch_loss / static_cast<double>(dataset.size()));
  }
  result.model = std::move(model);
  return result;
}

}  // namespace

GcnDetModel GcnDetModel::init(const GcnDims& dims, Rng& rng, Pooling pooling) {
  GcnDetModel m;
  m.layers[0].weight = uniform_init(dims.input, dims.hidden1, rng);
  m.layers[1].weight = uniform_init(dims.hidden1, dims.hidden2, rng);
  m.head_iou = head_init(dims.hidden2, rng);
  m.head_iop = head_init(dims.hidden2, rng);
  m.pooling = pooling;
  return m;
}

GcnDetModel GcnDetModel::zeros_like(const GcnDetModel& src) {
  GcnDetModel m;
  m.layers[0].weight = zeros_of(src.layers[0].weight);
  m.layers[1].weight = zeros_of(src.layers[1].weight);
  m.head_iou = {zeros_of(src.head_iou.weight), Matrix(1, 1)};
  m.head_iop = {zeros_of(src.head_iop.weight), Matrix(1, 1)};
  m.pooling = src.pooling;
  return m;
}

GcnDims GcnDetModel::dims() const noexcept {
  return {layers[0].weight.rows(), layers[0].weight.cols(), layers[1].weight.cols()};
}

GcnSegModel GcnSegModel::init(const GcnDims& dims, Rng& rng) {
  GcnSegModel m;
  m.layers[0].weight = uniform_init(dims.input + 1, dims.hidden1, rng);
  m.layers[1].weight = uniform_init(dims.hidden1, dims.hidden2, rng);
  m.head = head_init(dims.hidden2, rng);
  return m;
}

GcnSegModel GcnSegModel::zeros_like(const GcnSegModel& src) {
  GcnSegModel m;
  m.layers[0].weight = zeros_of(src.layers[0].weight);
  m.layers[1].weight = zeros_of(src.layers[1].weight);
  m.head = {zeros_of(src.head.weight), Matrix(1, 1)};
  return m;
}

GcnDims GcnSegModel::dims() const noexcept {
  const std::size_t in = layers[0].weight.rows();
  return {in == 0 ? 0 : in - 1, layers[0].weight.cols(), layers[1].weight.cols()};
}

std::vector<Matrix*> parameters(GcnDetModel& m) {
  return {&m.layers[0].weight, &m.layers[1].weight, &m.head_iou.weight,
          &m.head_iou.bias,    &m.head_iop.weight,  &m.head_iop.bias};
}

std::vector<const Matrix*> parameters(const GcnDetModel& m) {
  return {&m.layers[0].weight, &m.layers[1].weight, &m.head_iou.weight,
          &m.head_iou.bias,    &m.head_iop.weight,  &m.head_iop.bias};
}

std::vector<Matrix*> parameters(GcnSegModel& m) {
  return {&m.layers[0].weight, &m.layers[1].weight, &m.head.weight, &m.head.bias};
}

std::vector<const Matrix*> parameters(const GcnSegModel& m) {
  return {&m.layers[0].weight, &m.layers[1].weight, &m.head.weight, &m.head.bias};
}

Matrix propagation_matrix(const Matrix& adj) {
  require_adjacency(adj);
  const std::size_t n = adj.rows();
  Matrix prop(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    double degree = 1.0;
    for (std::size_t j = 0; j < n; ++j) degree += adj(i, j);
    for (std::size_t j = 0; j < n; ++j) prop(i, j) = adj(i, j) / degree;
    prop(i, i) = 1.0 / degree;
  }
  return prop;
}

Matrix gcn_layer_forward(const Matrix& x, const Matrix& adj, const GcnLayerParams& w,
                         bool activate) {
  if (x.rows() != adj.rows()) {
    throw std::invalid_argument("gcn_layer_forward: input " + x.shape() +
                                " does not match adjacency " + adj.shape());
  }
  if (x.cols() != w.weight.rows()) {
    throw std::invalid_argument("gcn_layer_forward: input " + x.shape() +
                                " does not match weight " + w.weight.shape());
  }
  return layer_forward(propagation_matrix(adj), x, w.weight, activate, nullptr);
}

QualityScores det_forward_raw(const GcnDetModel& model, const SubGraphInstance& inst) {
  return det_forward_traced(model, inst, nullptr);
}

QualityScores det_forward(const GcnDetModel& model, const SubGraphInstance& inst) {
  QualityScores raw = det_forward_raw(model, inst);
  return {std::clamp(raw.iou, 0.0, 1.0), std::clamp(raw.iop, 0.0, 1.0)};
}

DetLossAndGrads det_loss_and_grads(const GcnDetModel& model, std::span<const DetSample> batch) {
  auto [loss, grads] = batched_grads(model, batch, [&](const DetSample& s, GcnDetModel& g) {
    DetTrace trace;
    const QualityScores pred = det_forward_traced(model, *s.instance, &trace);
    const double e_iou = pred.iou - s.target.iou;
    const double e_iop = pred.iop - s.target.iop;
    det_backward(model, trace, e_iou, e_iop, g);
    return 0.5 * (e_iou * e_iou + e_iop * e_iop);
  });
  return {loss, std::move(grads)};
}

double det_loss(const GcnDetModel& model, std::span<const DetSample> batch) {
  if (batch.empty()) throw std::invalid_argument("det_loss: empty batch");
  std::vector<double> losses(batch.size());
  parallel_for(batch.size(), [&](std::size_t i) {
    const QualityScores pred = det_forward_raw(model, *batch[i].instance);
    const double e_iou = pred.iou - batch[i].target.iou;
    const double e_iop = pred.iop - batch[i].target.iop;
    losses[i] = 0.5 * (e_iou * e_iou + e_iop * e_iop);
  });
  return std::accumulate(losses.begin(), losses.end(), 0.0) / static_cast<double>(batch.size());
}

std::vector<double> seg_logits(const GcnSegModel& model, const SubGraphInstance& inst,
                               std::size_t seed_vertex) {
  return seg_logits_traced(model, inst, seed_vertex, nullptr);
}

std::vector<double> seg_forward(const GcnSegModel& model, const SubGraphInstance& inst,
                                std::size_t seed_vertex) {
  auto out = seg_logits(model, inst, seed_vertex);
  for (double& z : out) z = sigmoid(z);
  return out;
}

std::vector<SeedTarget> seg_training_samples(const VertexSet& p, const LabelSet& labels,
                                             std::size_t num_seeds, Rng& rng) {
  if (p.empty()) throw std::invalid_argument("seg_training_samples: empty proposal");
  if (num_seeds < 1) throw std::invalid_argument("seg_training_samples: num_seeds must be >= 1");
  std::vector<SeedTarget> out;
  for (std::size_t seed : rng.sample_distinct(p.size(), num_seeds)) {
    SeedTarget st{seed, std::vector<double>(p.size(), 0.0)};
    const ClassId seed_label = labels[p[seed]];
    for (std::size_t i = 0; i < p.size(); ++i)
      if (labels[p[i]] == seed_label) st.target[i] = 1.0;
    out.push_back(std::move(st));
  }
  return out;
}

SegLossAndGrads seg_loss_and_grads(const GcnSegModel& model, std::span<const SegSample> batch) {
  auto [loss, grads] = batched_grads(model, batch, [&](const SegSample& s, GcnSegModel& g) {
    SegTrace t;
    const auto logits = seg_logits_traced(model, *s.instance, s.seed, &t);
    const std::size_t n = logits.size();
    if (s.target.size() != n) throw std::invalid_argument("seg_loss: target size mismatch");
    const double inv_n = 1.0 / static_cast<double>(n);
    double loss = 0.0;
    Matrix d_z(n, 1);
    for (std::size_t i = 0; i < n; ++i) {
      loss += bce_from_logit(logits[i], s.target[i]);
      d_z(i, 0) = (sigmoid(logits[i]) - s.target[i]) * inv_n;
      g.head.bias(0, 0) += d_z(i, 0);
    }
    axpy(1.0, matmul_tn(t.h2, d_z), g.head.weight);
    Matrix d_h2 = matmul_nt(d_z, model.head.weight);
    Matrix d_h1 = layer_backward(t.prop, model.layers[1].weight, t.l2, true, std::move(d_h2),
                                 g.layers[1].weight, true);
    layer_backward(t.prop, model.layers[0].weight, t.l1, true, std::move(d_h1),
                   g.layers[0].weight, false);
    return loss * inv_n;
  });
  return {loss, std::move(grads)};
}

double seg_loss(const GcnSegModel& model, std::span<const SegSample> batch) {
  if (batch.empty()) throw std::invalid_argument("seg_loss: empty batch");
  std::vector<double> losses(batch.size());
  parallel_for(batch.size(), [&](std::size_t i) {
    const auto logits = seg_logits(model, *batch[i].instance, batch[i].seed);
    double loss = 0.0;
    for (std::size_t v = 0; v < logits.size(); ++v)
      loss += bce_from_logit(logits[v], batch[i].target[v]);
    losses[i] = loss / static_cast<double>(logits.size());
  });
  return std::accumulate(losses.begin(), losses.end(), 0.0) / static_cast<double>(batch.size());
}

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
    throw std::invalid_argument("TrainConfig: learning_rate must be finite and >= 0");
  if (!(momentum >= 0.0 && momentum < 1.0))
    throw std::invalid_argument("TrainConfig: momentum must lie in [0, 1)");
  if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
}

TrainResult<GcnDetModel> train(GcnDetModel model, std::span<const DetSample> dataset,
                               const TrainConfig& cfg) {
  return train_impl(std::move(model), dataset, cfg,
                    [](const GcnDetModel& m, std::span<const DetSample> b) {
                      auto r = det_loss_and_grads(m, b);
                      return std::pair<double, GcnDetModel>(r.loss, std::move(r.grads));
                    });
}

TrainResult<GcnSegModel> train(GcnSegModel model, std::span<const SegSample> dataset,
                               const TrainConfig& cfg) {
  return train_impl(std::move(model), dataset, cfg,
                    [](const GcnSegModel& m, std::span<const SegSample> b) {
                      auto r = seg_loss_and_grads(m, b);
                      return std::pair<double, GcnSegModel>(r.loss, std::move(r.grads));
                    });
}

}  // namespace graphclus
