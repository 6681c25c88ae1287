#include "rstdp/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <numeric>

#include "rstdp/errors.hpp"
#include "rstdp/optim.hpp"
#include "rstdp/rng.hpp"

namespace rstdp {

namespace {

constexpr double kProbFloor = 1e-12;
constexpr std::uint64_t kShuffleStream = 0x73687566666c65ULL;
constexpr std::uint64_t kOracleStream = 0x6f7261636c65ULL;
constexpr std::uint64_t kDropoutStream = 0x64726f706f7574ULL;

void require_gold(const Document& doc) {
  if (!doc.has_gold()) {
    throw DataError("document '" + doc.doc_id + "' has no gold tree");
  }
}

/// Fisher-Yates through uniform_int so the permutation is identical across
/// standard libraries.
void deterministic_shuffle(std::vector<std::size_t>& items, std::mt19937_64& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    auto j = static_cast<std::size_t>(uniform_int(rng, 0, static_cast<long>(i) - 1));
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace

void TrainConfig::validate() const {
  if (alpha < 0.0 || alpha > 1.0) throw ConfigError("alpha must lie in [0, 1]");
  if (beta < 0.0) throw ConfigError("beta must be >= 0");
  if (lambda1 < 0.0 || lambda2 < 0.0) throw ConfigError("loss weights must be >= 0");
  if (lr <= 0.0) throw ConfigError("learning rate must be positive");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (grad_accum < 1) throw ConfigError("grad_accum must be >= 1");
  if (dropout < 0.0 || dropout >= 1.0) throw ConfigError("dropout must lie in [0, 1)");
  if (max_epochs < 1) throw ConfigError("max_epochs must be >= 1");
  if (oracle_start_epoch < 0) throw ConfigError("oracle_start_epoch must be >= 0");
  if (adam_eps <= 0.0) throw ConfigError("adam_eps must be positive");
}

std::vector<double> SegmentTarget::y() const {
  std::vector<double> out(static_cast<std::size_t>(segment.length()), 0.0);
  out[static_cast<std::size_t>(gold_split - segment.m)] = 1.0;
  return out;
}

std::vector<SegmentTarget> build_static_targets(const Document& doc) {
  require_gold(doc);
  std::vector<SegmentTarget> targets;
  int q = doc.edu_count();
  if (q < 2) return targets;
  CanonicalOrder order = tree_to_order(doc.gold);
  std::deque<Segment> queue{Segment{1, q}};
  while (!queue.empty()) {
    Segment seg = queue.front();
    queue.pop_front();
    GoldSplit gold = match_gold(seg, order);
    targets.push_back(SegmentTarget{seg, gold.split, gold.label});
    if (gold.split > seg.m) queue.push_back(Segment{seg.m, gold.split});
    if (seg.n > gold.split + 1) queue.push_back(Segment{gold.split + 1, seg.n});
  }
  return targets;
}

std::vector<SegmentTarget> build_dynamic_targets(const Document& doc, SplitScorer& scorer,
                                                 double alpha, std::mt19937_64& rng) {
  require_gold(doc);
  if (alpha < 0.0 || alpha > 1.0) throw ArgumentError("alpha must lie in [0, 1]");
  std::vector<SegmentTarget> targets;
  int q = doc.edu_count();
  if (q < 2) return targets;
  CanonicalOrder order = tree_to_order(doc.gold);
  scorer.begin_document(doc);
  std::deque<Segment> queue{Segment{1, q}};
  while (!queue.empty()) {
    Segment seg = queue.front();
    queue.pop_front();
    GoldSplit gold = match_gold(seg, order);
    targets.push_back(SegmentTarget{seg, gold.split, gold.label});
    int predicted = predict_split(scorer.score_segment(seg));
    bool use_predicted = uniform_unit(rng) < alpha;
    int descend = use_predicted ? predicted : gold.split;
    if (descend > seg.m) queue.push_back(Segment{seg.m, descend});
    if (seg.n > descend + 1) queue.push_back(Segment{descend + 1, seg.n});
  }
  return targets;
}

double segment_weight(const Segment& seg, double beta, bool penalty_enabled) {
  if (!penalty_enabled) return 1.0;
  return 1.0 + std::pow(static_cast<double>(seg.n - seg.m), beta);
}

double segmentation_loss(const std::vector<SegmentTarget>& targets,
                         const std::vector<SplitScores>& scores, double beta,
                         bool penalty_enabled) {
  if (targets.empty()) throw ArgumentError("segmentation loss needs at least one segment");
  if (scores.size() != targets.size()) {
    throw ArgumentError("got " + std::to_string(scores.size()) + " scored segments for " +
                        std::to_string(targets.size()) + " targets");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const SegmentTarget& t = targets[i];
    const SplitScores& s = scores[i];
    if (!(s.segment == t.segment)) {
      throw ArgumentError("scores and targets disagree on segment " + std::to_string(i));
    }
    std::vector<double> y = t.y();
    double bce = 0.0;
    for (std::size_t j = 0; j < y.size(); ++j) {
      double p = std::clamp(s.probs[j], kProbFloor, 1.0 - kProbFloor);
      bce -= y[j] * std::log(p) + (1.0 - y[j]) * std::log(1.0 - p);
    }
    total += segment_weight(t.segment, beta, penalty_enabled) * bce;
  }
  return total / static_cast<double>(targets.size());
}

double label_loss(const std::vector<int>& gold_classes,
                  const std::vector<LabelDistribution>& dists) {
  if (gold_classes.empty()) throw ArgumentError("label loss needs at least one decision");
  if (dists.size() != gold_classes.size()) {
    throw ArgumentError("got " + std::to_string(dists.size()) + " distributions for " +
                        std::to_string(gold_classes.size()) + " decisions");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < gold_classes.size(); ++i) {
    int k = gold_classes[i];
    if (k < 0 || k >= static_cast<int>(dists[i].probs.size())) {
      throw ArgumentError("gold class " + std::to_string(k) + " outside distribution of size " +
                          std::to_string(dists[i].probs.size()));
    }
    total -= std::log(std::max(dists[i].probs[static_cast<std::size_t>(k)], kProbFloor));
  }
  return total / static_cast<double>(gold_classes.size());
}

double total_loss(double seg_loss, double lbl_loss, const TrainConfig& config) {
  return config.lambda1 * seg_loss + config.lambda2 * lbl_loss;
}

std::string EpochLog::format() const {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%d %.2f %.2f %.2f %.2f %.6f %.6f %s", epoch, span, nuclearity,
                relation, full, loss_seg, loss_lbl, dynamic_oracle ? "dynamic" : "static");
  return buf;
}

std::vector<Tensor> snapshot_parameters(const ParameterStore& store) {
  std::vector<Tensor> state;
  for (const Parameter* p : store.all()) state.push_back(p->value);
  return state;
}

void restore_parameters(ParameterStore& store, const std::vector<Tensor>& state) {
  std::vector<Parameter*> params = store.all();
  if (params.size() != state.size()) {
    throw ArgumentError("snapshot holds " + std::to_string(state.size()) + " tensors, store has " +
                        std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i]->value.shape != state[i].shape) {
      throw ArgumentError("snapshot shape mismatch for '" + params[i]->name + "'");
    }
    params[i]->value = state[i];
  }
}

MetricReport evaluate_model(const ParserModel& model, const std::vector<Document>& docs,
                            const ExternalFeatures* feats) {
  std::vector<RSTTree> golds, preds;
  golds.reserve(docs.size());
  preds.reserve(docs.size());
  for (const Document& doc : docs) {
    require_gold(doc);
    golds.push_back(doc.gold);
    Graph g;
    NeuralScorer scorer(model, g, feats);
    preds.push_back(parse_document(doc, scorer).tree);
  }
  return evaluate_trees(golds, preds, ParsevalVariant::Original);
}

TrainResult train(ParserModel& model, const std::vector<Document>& train_docs,
                  const std::vector<Document>& dev_docs, const TrainConfig& config,
                  const ExternalFeatures* feats, const EpochCallback& on_epoch) {
  config.validate();
  if (train_docs.empty()) throw ArgumentError("training corpus is empty");
  for (const Document& doc : train_docs) require_gold(doc);
  for (const Document& doc : dev_docs) require_gold(doc);

  AdamConfig adam;
  adam.lr = config.lr;
  adam.eps = config.adam_eps;
  const std::vector<Document>& eval_docs = dev_docs.empty() ? train_docs : dev_docs;

  TrainResult result;
  std::vector<std::size_t> order(train_docs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    bool dynamic = epoch > config.oracle_start_epoch && config.alpha > 0.0;
    std::mt19937_64 shuffle_rng(
        derive_seed(config.seed, {kShuffleStream, static_cast<std::uint64_t>(epoch)}));
    deterministic_shuffle(order, shuffle_rng);

    double seg_loss_sum = 0.0;
    double lbl_loss_sum = 0.0;
    long seg_docs = 0;
    long lbl_decisions = 0;

    std::size_t cursor = 0;
    int micros_since_step = 0;
    while (cursor < order.size()) {
      std::size_t batch_end =
          std::min(cursor + static_cast<std::size_t>(config.batch_size), order.size());
      long batch_docs = 0;
      long batch_decisions = 0;
      for (std::size_t i = cursor; i < batch_end; ++i) {
        int q = train_docs[order[i]].edu_count();
        if (q >= 2) {
          ++batch_docs;
          batch_decisions += q - 1;
        }
      }

      for (std::size_t i = cursor; i < batch_end; ++i) {
        const Document& doc = train_docs[order[i]];
        if (doc.edu_count() < 2) continue;
        auto doc_key = static_cast<std::uint64_t>(order[i]);
        auto epoch_key = static_cast<std::uint64_t>(epoch);

        std::vector<SegmentTarget> targets;
        if (dynamic) {
          Graph probe;
          NeuralScorer probe_scorer(model, probe, feats);
          std::mt19937_64 coin_rng(derive_seed(config.seed, {kOracleStream, epoch_key, doc_key}));
          targets = build_dynamic_targets(doc, probe_scorer, config.alpha, coin_rng);
        } else {
          targets = build_static_targets(doc);
        }

        Graph g(derive_seed(config.seed, {kDropoutStream, epoch_key, doc_key}));
        g.set_training(true);
        NeuralScorer scorer(model, g, feats, config.dropout);
        scorer.begin_document(doc);

        std::vector<Value> seg_terms, lbl_terms;
        seg_terms.reserve(targets.size());
        lbl_terms.reserve(targets.size());
        for (const SegmentTarget& t : targets) {
          const SegmentScoreNodes& nodes = scorer.nodes_for(t.segment);
          Value bce = g.bce_sum(nodes.prob_nodes, t.y());
          seg_terms.push_back(
              g.scale(bce, segment_weight(t.segment, config.beta, config.penalty_enabled)));
          Value dist = scorer.label_node_for(t.segment, t.gold_split);
          lbl_terms.push_back(g.cross_entropy(dist, model.joint_class_index(t.gold_label)));
        }
        Value doc_seg_loss =
            g.scale(g.add_many(seg_terms), 1.0 / static_cast<double>(targets.size()));
        Value doc_lbl_sum = g.add_many(lbl_terms);
        Value loss =
            g.add(g.scale(doc_seg_loss, config.lambda1 / static_cast<double>(batch_docs)),
                  g.scale(doc_lbl_sum, config.lambda2 / static_cast<double>(batch_decisions)));

        double seg_value = g.scalar(doc_seg_loss);
        double lbl_value = g.scalar(doc_lbl_sum);
        if (!std::isfinite(seg_value) || !std::isfinite(lbl_value)) {
          throw NumericError("loss diverged at epoch " + std::to_string(epoch) +
                             " on document '" + doc.doc_id + "'");
        }
        seg_loss_sum += seg_value;
        ++seg_docs;
        lbl_loss_sum += lbl_value;
        lbl_decisions += static_cast<long>(targets.size());

        g.backward(loss);
      }

      cursor = batch_end;
      ++micros_since_step;
      if (micros_since_step == config.grad_accum || cursor >= order.size()) {
        adam_step(model.params(), adam);
        micros_since_step = 0;
      }
    }

    EpochLog log;
    log.epoch = epoch;
    log.dynamic_oracle = dynamic;
    log.loss_seg = seg_docs > 0 ? seg_loss_sum / static_cast<double>(seg_docs) : 0.0;
    log.loss_lbl =
        lbl_decisions > 0 ? lbl_loss_sum / static_cast<double>(lbl_decisions) : 0.0;
    MetricReport metrics = evaluate_model(model, eval_docs, feats);
    log.span = metrics.S();
    log.nuclearity = metrics.N();
    log.relation = metrics.R();
    log.full = metrics.F();
    result.logs.push_back(log);

    if (result.best_epoch == 0 || log.full > result.best_full) {
      result.best_epoch = epoch;
      result.best_full = log.full;
      result.best_state = snapshot_parameters(model.params());
    }
    if (on_epoch && on_epoch(log)) break;
  }
  return result;
}

}  // namespace rstdp
