#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "graphclus/checkpoint.hpp"
#include "graphclus/io.hpp"
#include "graphclus/pipeline.hpp"
#include "graphclus/synth.hpp"
#include "graphclus/training.hpp"

using namespace graphclus;

namespace {

const std::map<std::string, Pooling> kPoolingNames{
    {"max", Pooling::max}, {"mean", Pooling::mean}, {"sum", Pooling::sum}};

void add_proposal_flags(CLI::App* cmd, ProposalConfig& cfg) {
  auto& sv = cfg.super_vertex;
  cmd->add_option("--k", sv.k, "KNN width")->capture_default_str();
  cmd->add_option("--s-max", sv.s_max, "super-vertex size bound (exclusive)")
      ->capture_default_str();
  cmd->add_option("--delta", sv.delta, "threshold step per escalation")->capture_default_str();
  cmd->add_option("--iterations", sv.iterations, "proposal levels")->capture_default_str();
  cmd->add_option("--max-proposal-size", sv.max_proposal_size)->capture_default_str();
  cmd->add_option("--thresholds", cfg.thresholds, "edge threshold grid")
      ->delimiter(',')
      ->capture_default_str();
}

void add_train_flags(CLI::App* cmd, TrainConfig& tc, SupervisedConfig& cfg) {
  cmd->add_option("--epochs", tc.epochs)->capture_default_str();
  cmd->add_option("--lr", tc.learning_rate)->capture_default_str();
  cmd->add_option("--momentum", tc.momentum)->capture_default_str();
  cmd->add_option("--batch", tc.batch_size)->capture_default_str();
  cmd->add_option("--hidden1", cfg.dims.hidden1)->capture_default_str();
  cmd->add_option("--hidden2", cfg.dims.hidden2)->capture_default_str();
  cmd->add_flag("--center", cfg.center_features, "subtract the proposal mean from features");
}

void add_pipeline_flags(CLI::App* cmd, PipelineConfig& cfg, double& nms_threshold,
                        bool& no_seg) {
  cmd->add_option("--iop-low", cfg.iop_low)->capture_default_str();
  cmd->add_option("--iop-high", cfg.iop_high)->capture_default_str();
  cmd->add_option("--det-iou-min", cfg.det_iou_min)->capture_default_str();
  cmd->add_option("--hypotheses", cfg.num_hypotheses)->capture_default_str();
  cmd->add_option("--nms", nms_threshold, "post-process with NMS at this IoU instead of de-overlap");
  cmd->add_flag("--no-seg", no_seg, "skip segmentation");
  cmd->add_flag("--center", cfg.center_features);
}

void apply_pipeline_flags(PipelineConfig& cfg, double nms_threshold, bool no_seg) {
  if (nms_threshold >= 0.0) {
    cfg.post_process = PostProcess::nms;
    cfg.nms_iou_threshold = nms_threshold;
  }
  cfg.use_segmentation = !no_seg;
}

void write_loss_trace(const std::string& path, const std::vector<double>& losses) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  for (std::size_t e = 0; e < losses.size(); ++e) out << e << '\t' << losses[e] << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

void print_losses(const std::vector<double>& losses) {
  for (std::size_t e = 0; e < losses.size(); ++e) std::printf("epoch %zu loss %.6f\n", e, losses[e]);
}

struct LabeledInput {
  std::string emb;
  std::string labels;

  LabeledEmbeddings load() const {
    LabeledEmbeddings d{load_embeddings(emb), load_labels(labels)};
    if (d.labels.size() != d.embeddings.size())
      throw std::runtime_error("labels (" + std::to_string(d.labels.size()) +
                               ") and embeddings (" + std::to_string(d.embeddings.size()) +
                               ") differ in length");
    return d;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Supervised graph clustering over KNN affinity graphs"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  // synth
  SynthConfig synth_cfg;
  std::size_t per_class = 0;
  std::string synth_emb, synth_labels;
  auto* synth = app.add_subcommand("synth", "generate a labeled Gaussian-mixture dataset");
  synth->add_option("--classes", synth_cfg.num_classes)->capture_default_str();
  synth->add_option("--per-class", per_class, "points per class (sets min and max)");
  synth->add_option("--min-per-class", synth_cfg.min_per_class)->capture_default_str();
  synth->add_option("--max-per-class", synth_cfg.max_per_class)->capture_default_str();
  synth->add_option("--dim", synth_cfg.dim)->capture_default_str();
  synth->add_option("--noise", synth_cfg.intra_class_noise)->capture_default_str();
  synth->add_option("--outliers", synth_cfg.outlier_fraction)->capture_default_str();
  synth->add_option("--seed", synth_cfg.seed)->capture_default_str();
  synth->add_option("--out-emb", synth_emb)->required();
  synth->add_option("--out-labels", synth_labels)->required();
  synth->callback([&] {
    if (per_class > 0) synth_cfg.min_per_class = synth_cfg.max_per_class = per_class;
    const auto data = synth_dataset(synth_cfg);
    save_embeddings(synth_emb, data.embeddings);
    save_labels(synth_labels, data.labels);
    std::printf("vertices=%zu dim=%zu classes=%zu\n", data.embeddings.size(),
                data.embeddings.dim(), synth_cfg.num_classes);
  });

  // propose
  ProposalConfig prop_cfg;
  std::string prop_emb, prop_out;
  auto* prop = app.add_subcommand("propose", "generate multi-scale cluster proposals");
  prop->add_option("--emb", prop_emb)->required();
  prop->add_option("--out", prop_out)->required();
  add_proposal_flags(prop, prop_cfg);
  prop->callback([&] {
    const auto emb = load_embeddings(prop_emb);
    const auto g = build_base_graph(emb, prop_cfg);
    const auto ps = propose(emb, g, prop_cfg);
    save_proposals(prop_out, ps);
    std::map<std::size_t, std::size_t> per_level;
    std::size_t total = 0;
    for (std::size_t i = 0; i < ps.size(); ++i) {
      ++per_level[ps.iterations()[i]];
      total += ps[i].size();
    }
    std::printf("proposals=%zu mean_size=%.2f", ps.size(),
                ps.empty() ? 0.0 : static_cast<double>(total) / ps.size());
    for (auto [level, count] : per_level) std::printf(" iter%zu=%zu", level, count);
    std::printf("\n");
  });

  // train-det
  SupervisedConfig det_cfg;
  LabeledInput det_in;
  std::string det_out, det_trace, det_pool = "max";
  std::uint64_t det_seed = 1;
  auto* tdet = app.add_subcommand("train-det", "train the proposal quality detector");
  tdet->add_option("--emb", det_in.emb)->required();
  tdet->add_option("--labels", det_in.labels)->required();
  tdet->add_option("--out", det_out, "checkpoint path")->required();
  tdet->add_option("--loss-trace", det_trace, "per-epoch loss file");
  tdet->add_option("--pooling", det_pool)->check(CLI::IsMember({"max", "mean", "sum"}))
      ->capture_default_str();
  tdet->add_option("--seed", det_seed)->capture_default_str();
  add_proposal_flags(tdet, det_cfg.proposals);
  add_train_flags(tdet, det_cfg.det_train, det_cfg);
  tdet->callback([&] {
    det_cfg.pooling = kPoolingNames.at(det_pool);
    if (det_cfg.pooling != Pooling::max)
      throw std::invalid_argument("checkpoints store max-pool detectors only; use ablate-pooling");
    det_cfg.init_seed = det_seed;
    det_cfg.det_train.seed = det_seed;
    const auto data = det_in.load();
    const auto trained = fit_detector(data.embeddings, data.labels, det_cfg);
    save_checkpoint(det_out, trained.model);
    if (!det_trace.empty()) write_loss_trace(det_trace, trained.epoch_losses);
    std::printf("samples=%zu\n", trained.num_samples);
    print_losses(trained.epoch_losses);
  });

  // train-seg
  SupervisedConfig seg_cfg;
  LabeledInput seg_in;
  std::string seg_out, seg_trace;
  std::uint64_t seg_seed = 2;
  auto* tseg = app.add_subcommand("train-seg", "train the proposal segmenter");
  tseg->add_option("--emb", seg_in.emb)->required();
  tseg->add_option("--labels", seg_in.labels)->required();
  tseg->add_option("--out", seg_out, "checkpoint path")->required();
  tseg->add_option("--loss-trace", seg_trace, "per-epoch loss file");
  tseg->add_option("--seeds-per-proposal", seg_cfg.seeds_per_proposal)->capture_default_str();
  tseg->add_option("--seed", seg_seed)->capture_default_str();
  add_proposal_flags(tseg, seg_cfg.proposals);
  add_train_flags(tseg, seg_cfg.seg_train, seg_cfg);
  tseg->callback([&] {
    seg_cfg.init_seed = seg_seed;
    seg_cfg.seg_train.seed = seg_seed;
    const auto data = seg_in.load();
    const auto trained = fit_segmenter(data.embeddings, data.labels, seg_cfg);
    save_checkpoint(seg_out, trained.model);
    if (!seg_trace.empty()) write_loss_trace(seg_trace, trained.epoch_losses);
    std::printf("samples=%zu\n", trained.num_samples);
    print_losses(trained.epoch_losses);
  });

  // infer
  ProposalConfig inf_prop;
  PipelineConfig inf_cfg;
  double inf_nms = -1.0;
  bool inf_no_seg = false;
  std::string inf_emb, inf_labels, inf_det, inf_seg, inf_out;
  std::uint64_t inf_seed = 0;
  auto* infer = app.add_subcommand("infer", "cluster an embedding set with trained models");
  infer->add_option("--emb", inf_emb)->required();
  infer->add_option("--det", inf_det, "detector checkpoint")->required();
  infer->add_option("--seg", inf_seg, "segmenter checkpoint")->required();
  infer->add_option("--out", inf_out, "cluster file")->required();
  infer->add_option("--labels", inf_labels, "ground truth for per-stage metrics");
  infer->add_option("--seed", inf_seed)->capture_default_str();
  add_proposal_flags(infer, inf_prop);
  add_pipeline_flags(infer, inf_cfg, inf_nms, inf_no_seg);
  infer->callback([&] {
    apply_pipeline_flags(inf_cfg, inf_nms, inf_no_seg);
    const auto emb = load_embeddings(inf_emb);
    const auto det = load_det_checkpoint(inf_det);
    const auto seg = load_seg_checkpoint(inf_seg);
    LabelSet labels;
    if (!inf_labels.empty()) {
      labels = load_labels(inf_labels);
      if (labels.size() != emb.size()) throw std::runtime_error("labels and embeddings differ in length");
    }
    const auto result = run_pipeline(det, seg, emb, inf_labels.empty() ? nullptr : &labels,
                                     inf_prop, inf_cfg, inf_seed);
    save_clusters(inf_out, result.clusters);
    for (const auto& stage : result.report) std::printf("%s\n", format_stage(stage).c_str());
  });

  // eval
  std::string ev_pred, ev_labels;
  auto* eval = app.add_subcommand("eval", "pairwise precision, recall and F-score");
  eval->add_option("--pred", ev_pred, "cluster file")->required();
  eval->add_option("--labels", ev_labels)->required();
  eval->callback([&] {
    const auto pred = load_clusters(ev_pred);
    const auto labels = load_labels(ev_labels);
    if (pred.size() != labels.size()) throw std::runtime_error("prediction and labels differ in length");
    std::printf("%s\n", format_metrics(pairwise_metrics(pred, labels)).c_str());
  });

  // baseline-kmeans
  std::string km_emb, km_labels, km_out;
  std::size_t km_k = 20;
  std::uint64_t km_seed = 0;
  auto* km = app.add_subcommand("baseline-kmeans", "k-means on the raw embeddings");
  km->add_option("--emb", km_emb)->required();
  km->add_option("--k", km_k)->capture_default_str();
  km->add_option("--seed", km_seed)->capture_default_str();
  km->add_option("--labels", km_labels);
  km->add_option("--out", km_out, "cluster file");
  km->callback([&] {
    const auto emb = load_embeddings(km_emb);
    const auto result = kmeans_baseline(emb, km_k, km_seed);
    if (!km_out.empty()) save_clusters(km_out, result.clusters);
    std::printf("iterations=%zu inertia=%.6f\n", result.iterations, result.inertia);
    if (!km_labels.empty()) {
      const auto labels = load_labels(km_labels);
      if (labels.size() != emb.size()) throw std::runtime_error("labels and embeddings differ in length");
      std::printf("%s\n", format_metrics(pairwise_metrics(result.clusters, labels)).c_str());
    }
  });

  // ablate-pooling
  SupervisedConfig abl_cfg;
  PipelineConfig abl_pipe;
  double abl_nms = -1.0;
  bool abl_no_seg = false;
  LabeledInput abl_train, abl_test;
  std::uint64_t abl_seed = 1;
  auto* abl = app.add_subcommand("ablate-pooling", "compare max, mean and sum pooling detectors");
  abl->add_option("--train-emb", abl_train.emb)->required();
  abl->add_option("--train-labels", abl_train.labels)->required();
  abl->add_option("--test-emb", abl_test.emb)->required();
  abl->add_option("--test-labels", abl_test.labels)->required();
  abl->add_option("--seed", abl_seed)->capture_default_str();
  add_proposal_flags(abl, abl_cfg.proposals);
  abl->add_option("--epochs", abl_cfg.det_train.epochs)->capture_default_str();
  abl->add_option("--seg-epochs", abl_cfg.seg_train.epochs)->capture_default_str();
  abl->add_option("--lr", abl_cfg.det_train.learning_rate)->capture_default_str();
  add_pipeline_flags(abl, abl_pipe, abl_nms, abl_no_seg);
  abl->callback([&] {
    apply_pipeline_flags(abl_pipe, abl_nms, abl_no_seg);
    abl_cfg.center_features = abl_pipe.center_features;
    abl_cfg.seg_train.learning_rate = abl_cfg.det_train.learning_rate;
    abl_cfg.init_seed = abl_cfg.det_train.seed = abl_seed;
    const auto train = abl_train.load();
    const auto test = abl_test.load();
    const auto g_train = build_base_graph(train.embeddings, abl_cfg.proposals);
    const auto p_train = propose(train.embeddings, g_train, abl_cfg.proposals);
    const auto g_test = build_base_graph(test.embeddings, abl_cfg.proposals);
    const auto p_test = propose(test.embeddings, g_test, abl_cfg.proposals);
    const auto seg =
        fit_segmenter(g_train, train.embeddings, train.labels, p_train, abl_cfg).model;
    std::printf("%-8s %9s %9s %9s %9s\n", "pooling", "precision", "recall", "fscore", "clusters");
    for (Pooling p : {Pooling::max, Pooling::mean, Pooling::sum}) {
      abl_cfg.pooling = p;
      const auto det = fit_detector(g_train, train.embeddings, train.labels, p_train, abl_cfg);
      const auto r = run_pipeline_on(det.model, seg, test.embeddings, g_test, p_test,
                                     &test.labels, abl_pipe, abl_seed);
      const auto& m = *r.report.back().metrics;
      std::printf("%-8s %9.4f %9.4f %9.4f %9zu\n", pooling_name(p), m.precision, m.recall,
                  m.fscore, m.num_clusters);
    }
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "graphclus: %s\n", e.what());
    return e.get_exit_code() == 0 ? 2 : e.get_exit_code();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "graphclus: error: %s\n", e.what());
    return 1;
  }
  return 0;
}
