#include <doctest.h>

#include <cmath>
#include <memory>
#include <stdexcept>

#include "graphclus/gcn.hpp"
#include "support/oracles.hpp"

using namespace graphclus;

namespace {

template <typename Model, typename LossFn, typename GradsFn>
double worst_grad_error(const Model& model, LossFn loss, GradsFn grads_of) {
  const Model grads = grads_of(model);
  const auto analytic = parameters(grads);
  double worst = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    auto f = [&](const Matrix& probe) {
      Model m = model;
      *parameters(m)[i] = probe;
      return loss(m);
    };
    worst = std::max(worst, grad_check(f, *analytic[i], *parameters(model)[i], 1e-6));
  }
  return worst;
}

std::shared_ptr<const SubGraphInstance> shared(SubGraphInstance inst) {
  return std::make_shared<const SubGraphInstance>(std::move(inst));
}

}  // namespace

TEST_CASE("layer forward examples") {
  const Matrix x = Matrix::from_rows({{1, 2}, {3, 0}});
  CHECK(gcn_layer_forward(x, Matrix(2, 2), {Matrix::identity(2)}, true) == x);

  auto out = gcn_layer_forward(Matrix::from_rows({{2}, {0}}), Matrix::from_rows({{0, 1}, {1, 0}}),
                               {Matrix::from_rows({{1}})}, false);
  CHECK(out == Matrix::from_rows({{1}, {1}}));

  CHECK(gcn_layer_forward(x, Matrix(2, 2), {Matrix(2, 3)}, true) == Matrix(2, 3));
}

TEST_CASE("layer forward rejects malformed adjacency") {
  const Matrix x(2, 1, 1.0);
  const GcnLayerParams w{Matrix(1, 1, 1.0)};
  CHECK_THROWS_AS(gcn_layer_forward(x, Matrix::from_rows({{0, 1}, {0.5, 0}}), w, true),
                  std::invalid_argument);
  CHECK_THROWS_AS(gcn_layer_forward(x, Matrix::from_rows({{1, 0}, {0, 0}}), w, true),
                  std::invalid_argument);
  CHECK_THROWS_AS(gcn_layer_forward(x, Matrix(3, 3), w, true), std::invalid_argument);
}

TEST_CASE("propagation matrix is row stochastic for nonnegative weights") {
  Rng rng(4);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 1 + rng.below(12);
    const Matrix p = propagation_matrix(oracle::random_adjacency(rng, n, rng.uniform()));
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        CHECK(p(i, j) >= 0.0);
        s += p(i, j);
      }
      CHECK(std::abs(s - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("make_instance clamps negative weights and optionally centers") {
  EmbeddingSet emb(Matrix::from_rows({{1, 0}, {0, 1}, {-1, 0.1}}));
  std::vector<std::tuple<VertexId, VertexId, double>> edges{{0, 1, 0.3}, {0, 2, -0.9}};
  auto g = AffinityGraph::from_edges(3, edges);
  auto inst = make_instance(g, emb, VertexSet{0, 1, 2});
  CHECK(inst.adjacency(0, 1) == 0.3);
  CHECK(inst.adjacency(0, 2) == 0.0);
  CHECK(inst.ids == std::vector<VertexId>{0, 1, 2});
  auto centered = make_instance(g, emb, VertexSet{0, 1}, true);
  CHECK(centered.features(0, 0) == doctest::Approx(0.5));
  CHECK(centered.features(1, 0) == doctest::Approx(-0.5));
}

TEST_CASE("detector degenerate cases") {
  Rng rng(1);
  GcnDims dims{3, 8, 4};
  auto model = GcnDetModel::init(dims, rng);
  CHECK(model.dims() == dims);

  SubGraphInstance one{Matrix::from_rows({{0.2, -0.1, 0.7}}), Matrix(1, 1), {0}};
  Matrix h = gcn_layer_forward(one.features, one.adjacency, model.layers[0], true);
  h = gcn_layer_forward(h, one.adjacency, model.layers[1], true);
  const auto raw = det_forward_raw(model, one);
  CHECK(raw.iou == doctest::Approx(sum(matmul(h, model.head_iou.weight)) +
                                   model.head_iou.bias(0, 0)));

  auto zero = GcnDetModel::zeros_like(model);
  SubGraphInstance blank{Matrix(4, 3), Matrix(4, 4), {0, 1, 2, 3}};
  const auto z = det_forward_raw(zero, blank);
  CHECK(z.iou == 0.0);
  CHECK(z.iop == 0.0);

  model.head_iou.bias(0, 0) = 5.0;
  model.head_iop.bias(0, 0) = -5.0;
  const auto clamped = det_forward(model, blank);
  CHECK(clamped.iou == 1.0);
  CHECK(clamped.iop == 0.0);
}

TEST_CASE("detector loss is zero at its own predictions and a batch mean") {
  Rng rng(6);
  auto model = GcnDetModel::init({4, 6, 5}, rng);
  auto inst = shared(oracle::random_instance(rng, 5, 4));
  const auto raw = det_forward_raw(model, *inst);
  std::vector<DetSample> exact{{inst, raw}};
  auto r = det_loss_and_grads(model, exact);
  CHECK(r.loss == doctest::Approx(0.0).epsilon(1e-20));
  for (const Matrix* g : parameters(r.grads)) CHECK(max_abs_diff(*g, Matrix(g->rows(), g->cols())) < 1e-12);

  std::vector<DetSample> batch{{inst, {0.3, 0.8}},
                               {shared(oracle::random_instance(rng, 3, 4)), {0.9, 0.1}}};
  std::vector<DetSample> doubled = batch;
  doubled.insert(doubled.end(), batch.begin(), batch.end());
  CHECK(det_loss(model, doubled) == doctest::Approx(det_loss(model, batch)).epsilon(1e-14));
  CHECK_THROWS_AS(det_loss_and_grads(model, std::span<const DetSample>{}), std::invalid_argument);
}

TEST_CASE("detector gradients match finite differences for every pooling") {
  for (Pooling pooling : {Pooling::max, Pooling::mean, Pooling::sum}) {
    Rng rng(100 + static_cast<int>(pooling));
    for (int t = 0; t < 5; ++t) {
      auto model = GcnDetModel::init({4, 6, 5}, rng, pooling);
      std::vector<DetSample> batch;
      for (int s = 0; s < 2; ++s)
        batch.push_back({shared(oracle::random_instance(rng, 1 + rng.below(8), 4)),
                         {rng.uniform(), rng.uniform()}});
      const double err = worst_grad_error(
          model, [&](const GcnDetModel& m) { return det_loss(m, batch); },
          [&](const GcnDetModel& m) { return det_loss_and_grads(m, batch).grads; });
      CHECK(err < 1e-5);
    }
  }
}

TEST_CASE("segmenter gradients match finite differences") {
  Rng rng(200);
  for (int t = 0; t < 5; ++t) {
    auto model = GcnSegModel::init({4, 6, 5}, rng);
    std::vector<SegSample> batch;
    for (int s = 0; s < 2; ++s) {
      const std::size_t n = 1 + rng.below(8);
      std::vector<double> target(n);
      for (double& y : target) y = rng.below(2) ? 1.0 : 0.0;
      batch.push_back({shared(oracle::random_instance(rng, n, 4)), rng.below(n), target});
    }
    const double err = worst_grad_error(
        model, [&](const GcnSegModel& m) { return seg_loss(m, batch); },
        [&](const GcnSegModel& m) { return seg_loss_and_grads(m, batch).grads; });
    CHECK(err < 1e-5);
  }
}

TEST_CASE("segmenter outputs and loss values") {
  Rng rng(9);
  auto model = GcnSegModel::init({3, 8, 4}, rng);
  CHECK(model.dims() == GcnDims{3, 8, 4});
  CHECK(model.layers[0].weight.rows() == 4);

  auto inst = oracle::random_instance(rng, 6, 3);
  for (double p : seg_forward(model, inst, 2)) {
    CHECK(p > 0.0);
    CHECK(p < 1.0);
  }
  SubGraphInstance one{Matrix::from_rows({{1, 0, 0}}), Matrix(1, 1), {0}};
  CHECK(seg_forward(model, one, 0).size() == 1);
  CHECK_THROWS_AS(seg_forward(model, one, 1), std::out_of_range);

  // vertices 1 and 2 are twins: same features, same links, neither is the seed
  SubGraphInstance twins{Matrix::from_rows({{1, 0, 0}, {0, 1, 0}, {0, 1, 0}}),
                         Matrix::from_rows({{0, 0.5, 0.5}, {0.5, 0, 0}, {0.5, 0, 0}}),
                         {0, 1, 2}};
  auto probs = seg_forward(model, twins, 0);
  CHECK(probs[1] == doctest::Approx(probs[2]).epsilon(1e-15));

  // zero model: every logit 0, so BCE is ln 2 per vertex
  auto zero = GcnSegModel::zeros_like(model);
  std::vector<SegSample> batch{{shared(inst), 0, {1, 0, 1, 0, 1, 1}}};
  CHECK(seg_loss(zero, batch) == doctest::Approx(std::log(2.0)).epsilon(1e-14));

  // a large bias pushes confident correct predictions toward zero loss
  zero.head.bias(0, 0) = 40.0;
  std::vector<SegSample> positives{{shared(inst), 0, std::vector<double>(6, 1.0)}};
  CHECK(seg_loss(zero, positives) < 1e-15);
}

TEST_CASE("seg training samples") {
  Rng rng(3);
  LabelSet pure({4, 4, 4});
  for (const auto& s : seg_training_samples(VertexSet{0, 1, 2}, pure, 2, rng))
    CHECK(s.target == std::vector<double>{1, 1, 1});

  LabelSet mixed({1, 1, 2, 2});
  auto all = seg_training_samples(VertexSet{0, 1, 2, 3}, mixed, 10, rng);
  CHECK(all.size() == 4);
  for (const auto& s : all) {
    if (s.seed >= 2) CHECK(s.target == std::vector<double>{0, 0, 1, 1});
    else CHECK(s.target == std::vector<double>{1, 1, 0, 0});
  }
}

TEST_CASE("networks are permutation equivariant") {
  Rng rng(77);
  auto det = GcnDetModel::init({5, 16, 8}, rng);
  auto seg = GcnSegModel::init({5, 16, 8}, rng);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 1 + rng.below(12);
    auto inst = oracle::random_instance(rng, n, 5);
    auto perm = oracle::random_permutation(rng, n);
    auto moved = oracle::permute_instance(inst, perm);
    const auto a = det_forward_raw(det, inst);
    const auto b = det_forward_raw(det, moved);
    CHECK(std::abs(a.iou - b.iou) <= 1e-9);
    CHECK(std::abs(a.iop - b.iop) <= 1e-9);
    const std::size_t seed = rng.below(n);
    const auto pa = seg_forward(seg, inst, seed);
    const auto pb = seg_forward(seg, moved, perm[seed]);
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(pa[i] - pb[perm[i]]) <= 1e-9);
  }
}

TEST_CASE("training: lr 0 is a no-op, same seed is bit identical, small lr descends") {
  Rng rng(12);
  auto model = GcnDetModel::init({4, 16, 8}, rng);
  std::vector<DetSample> data;
  for (int i = 0; i < 12; ++i)
    data.push_back({shared(oracle::random_instance(rng, 2 + rng.below(5), 4)),
                    {rng.uniform(), rng.uniform()}});

  TrainConfig frozen{0.0, 0.9, 5, 4, 1};
  CHECK(train(model, data, frozen).model.layers[0].weight == model.layers[0].weight);

  TrainConfig cfg{0.01, 0.9, 10, 4, 3};
  auto a = train(model, data, cfg);
  auto b = train(model, data, cfg);
  const auto pa = parameters(a.model);
  const auto pb = parameters(b.model);
  for (std::size_t i = 0; i < pa.size(); ++i) CHECK(*pa[i] == *pb[i]);
  CHECK(a.epoch_losses == b.epoch_losses);

  TrainConfig slow{1e-3, 0.9, 30, 12, 3};
  auto run = train(model, data, slow);
  REQUIRE(run.epoch_losses.size() == 30);
  for (std::size_t e = 1; e < run.epoch_losses.size(); ++e)
    CHECK(run.epoch_losses[e] <= run.epoch_losses[e - 1] * 1.05);
  CHECK(run.epoch_losses.back() < run.epoch_losses.front());
}

TEST_CASE("segmenter training descends and is deterministic") {
  Rng rng(15);
  auto model = GcnSegModel::init({4, 16, 8}, rng);
  std::vector<SegSample> data;
  for (int i = 0; i < 10; ++i) {
    const std::size_t n = 2 + rng.below(5);
    std::vector<double> target(n);
    for (double& y : target) y = rng.below(2) ? 1.0 : 0.0;
    data.push_back({shared(oracle::random_instance(rng, n, 4)), rng.below(n), target});
  }
  TrainConfig slow{1e-3, 0.9, 30, 10, 1};
  auto run = train(model, data, slow);
  for (std::size_t e = 1; e < run.epoch_losses.size(); ++e)
    CHECK(run.epoch_losses[e] <= run.epoch_losses[e - 1] * 1.05);
  CHECK(train(model, data, slow).epoch_losses == run.epoch_losses);
}

TEST_CASE("training validates its config") {
  TrainConfig bad{-1.0, 0.9, 1, 1, 0};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = {0.01, 0.9, 1, 0, 0};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}
