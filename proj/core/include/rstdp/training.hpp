#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "rstdp/eval.hpp"
#include "rstdp/parser.hpp"

namespace rstdp {

struct TrainConfig {
  double lambda1 = 1.0;  // weight of the segmentation loss
  double lambda2 = 1.0;  // weight of the label loss
  double beta = 0.35;    // exponent of the length penalty
  double alpha = 0.65;   // probability of descending into the predicted split
  bool penalty_enabled = true;
  int oracle_start_epoch = 50;  // last epoch trained on static targets
  double lr = 0.001;
  int batch_size = 4;
  int grad_accum = 2;
  double dropout = 0.5;
  int max_epochs = 200;
  std::uint64_t seed = 1;
  double adam_eps = 1e-6;

  void validate() const;
};

/// Supervision for one popped segment: the gold split position and the gold
/// node's label. y() expands the split into 0/1 targets for positions m..n;
/// the last position is always 0.
struct SegmentTarget {
  Segment segment;
  int gold_split = 0;
  NucRel gold_label;

  std::vector<double> y() const;
  bool operator==(const SegmentTarget&) const = default;
};

/// Teacher forcing: the q−1 segments of the gold derivation in FIFO order.
std::vector<SegmentTarget> build_static_targets(const Document& doc);

/// Exploration oracle: targets stay gold for every popped segment, but with
/// probability alpha the queue descends into the scorer's predicted split
/// instead of the gold one. One coin per popped segment. alpha = 0
/// reproduces build_static_targets exactly.
std::vector<SegmentTarget> build_dynamic_targets(const Document& doc, SplitScorer& scorer,
                                                 double alpha, std::mt19937_64& rng);

/// 1 + (n−m)^beta, or 1 when the penalty is disabled.
double segment_weight(const Segment& seg, double beta, bool penalty_enabled);

/// Average over segments of weight · binary cross-entropy between the split
/// targets and probabilities, for one document's target set.
double segmentation_loss(const std::vector<SegmentTarget>& targets,
                         const std::vector<SplitScores>& scores, double beta,
                         bool penalty_enabled);

/// Mean cross-entropy of the gold joint class over a batch of decisions.
double label_loss(const std::vector<int>& gold_classes,
                  const std::vector<LabelDistribution>& dists);

double total_loss(double seg_loss, double lbl_loss, const TrainConfig& config);

struct EpochLog {
  int epoch = 0;
  double span = 0.0;
  double nuclearity = 0.0;
  double relation = 0.0;
  double full = 0.0;
  double loss_seg = 0.0;
  double loss_lbl = 0.0;
  bool dynamic_oracle = false;

  /// "epoch S N R F loss_seg loss_lbl oracle_mode"
  std::string format() const;
};

/// Return true to stop after the current epoch.
using EpochCallback = std::function<bool(const EpochLog&)>;

struct TrainResult {
  std::vector<EpochLog> logs;
  int best_epoch = 0;
  double best_full = 0.0;
  std::vector<Tensor> best_state;  // parameter values, aligned with params().all()
};

std::vector<Tensor> snapshot_parameters(const ParameterStore& store);
void restore_parameters(ParameterStore& store, const std::vector<Tensor>& state);

/// Parses every document with frozen parameters and scores the predictions
/// against gold with original-Parseval micro-F1.
MetricReport evaluate_model(const ParserModel& model, const std::vector<Document>& docs,
                            const ExternalFeatures* feats = nullptr);

/// Adam training with teacher forcing through oracle_start_epoch, the
/// exploration oracle afterwards (when alpha > 0), micro-batches of
/// batch_size documents, and gradients accumulated over grad_accum
/// micro-batches per update. Per-epoch metrics come from dev_docs, or from
/// train_docs when dev_docs is empty. Deterministic given config.seed.
TrainResult train(ParserModel& model, const std::vector<Document>& train_docs,
                  const std::vector<Document>& dev_docs, const TrainConfig& config,
                  const ExternalFeatures* feats = nullptr, const EpochCallback& on_epoch = {});

}  // namespace rstdp
