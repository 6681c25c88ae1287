#include "rstdp/parser.hpp"

#include <deque>
#include <functional>

#include "rstdp/errors.hpp"

namespace rstdp {

double SplitScores::prob_at(int j) const {
  if (j < segment.m || j > segment.n) {
    throw ArgumentError("position " + std::to_string(j) + " outside segment (" +
                        std::to_string(segment.m) + "," + std::to_string(segment.n) + ")");
  }
  return probs[static_cast<std::size_t>(j - segment.m)];
}

int predict_split(const SplitScores& scores) {
  const Segment& seg = scores.segment;
  if (!seg.splittable()) throw ArgumentError("cannot pick a split in a single-unit segment");
  if (static_cast<int>(scores.probs.size()) != seg.length()) {
    throw ArgumentError("split scores cover " + std::to_string(scores.probs.size()) +
                        " positions, segment has " + std::to_string(seg.length()));
  }
  int best = seg.m;
  for (int j = seg.m + 1; j <= seg.n - 1; ++j) {
    if (scores.prob_at(j) > scores.prob_at(best)) best = j;
  }
  return best;
}

SplitScores SegmentScoreNodes::to_scores(const Graph& g) const {
  SplitScores s;
  s.segment = segment;
  s.probs.reserve(prob_nodes.size());
  for (Value v : prob_nodes) s.probs.push_back(g.value(v).data[0]);
  return s;
}

SegmentScoreNodes score_segment_nodes(Graph& g, const ParserModel& model,
                                      const std::vector<Value>& h, const Segment& seg,
                                      double dropout) {
  if (!seg.splittable()) throw ArgumentError("cannot score a single-unit segment");
  if (seg.m < 1 || seg.n > static_cast<int>(h.size())) {
    throw ArgumentError("segment (" + std::to_string(seg.m) + "," + std::to_string(seg.n) +
                        ") outside document of " + std::to_string(h.size()) + " units");
  }

  std::vector<Value> inputs;
  inputs.reserve(static_cast<std::size_t>(seg.length()));
  for (int j = seg.m; j <= seg.n; ++j) {
    inputs.push_back(g.dropout(h[static_cast<std::size_t>(j - 1)], dropout));
  }

  SegmentScoreNodes nodes;
  nodes.segment = seg;
  nodes.h_prime = bidirectional_encode(g, model.segment_lstm(), inputs);
  nodes.prob_nodes.reserve(nodes.h_prime.size());
  for (Value hp : nodes.h_prime) {
    Value logit = mlp_apply(g, model.split_head(), g.dropout(hp, dropout));
    nodes.prob_nodes.push_back(g.sigmoid(logit));
  }
  return nodes;
}

Value label_distribution_node(Graph& g, const ParserModel& model, const SegmentScoreNodes& nodes,
                              int split, double dropout) {
  const Segment& seg = nodes.segment;
  if (split < seg.m || split > seg.n - 1) {
    throw ArgumentError("split " + std::to_string(split) + " outside segment (" +
                        std::to_string(seg.m) + "," + std::to_string(seg.n) + ")");
  }
  auto at = [&](int j) { return nodes.h_prime[static_cast<std::size_t>(j - seg.m)]; };
  std::vector<Value> left, right;
  for (int j = seg.m; j <= split; ++j) left.push_back(at(j));
  for (int j = split + 1; j <= seg.n; ++j) right.push_back(at(j));
  Value u = g.concat({g.mean(left), g.mean(right)});
  Value logits = mlp_apply(g, model.label_head(), g.dropout(u, dropout));
  return g.softmax(logits);
}

NeuralScorer::NeuralScorer(const ParserModel& model, Graph& graph, const ExternalFeatures* feats,
                           double dropout)
    : model_(&model), graph_(&graph), feats_(feats), dropout_(dropout) {}

void NeuralScorer::begin_document(const Document& doc) {
  segment_cache_.clear();
  label_cache_.clear();
  h_ = model_->encoder().encode_document(*graph_, doc, feats_, dropout_);
}

const SegmentScoreNodes& NeuralScorer::nodes_for(const Segment& seg) {
  auto key = std::make_pair(seg.m, seg.n);
  auto it = segment_cache_.find(key);
  if (it == segment_cache_.end()) {
    it = segment_cache_.emplace(key, score_segment_nodes(*graph_, *model_, h_, seg, dropout_))
             .first;
  }
  return it->second;
}

Value NeuralScorer::label_node_for(const Segment& seg, int split) {
  auto key = std::make_tuple(seg.m, seg.n, split);
  auto it = label_cache_.find(key);
  if (it == label_cache_.end()) {
    Value node = label_distribution_node(*graph_, *model_, nodes_for(seg), split, dropout_);
    it = label_cache_.emplace(key, node).first;
  }
  return it->second;
}

SplitScores NeuralScorer::score_segment(const Segment& seg) {
  return nodes_for(seg).to_scores(*graph_);
}

SegmentLabel NeuralScorer::label_at(const Segment& seg, int split) {
  Value node = label_node_for(seg, split);
  LabelDistribution dist{graph_->value(node).data};
  int best = 0;
  for (int k = 1; k < static_cast<int>(dist.probs.size()); ++k) {
    if (dist.probs[static_cast<std::size_t>(k)] > dist.probs[static_cast<std::size_t>(best)]) {
      best = k;
    }
  }
  return SegmentLabel{model_->decode_joint_class(best), std::move(dist)};
}

void GoldOracleScorer::begin_document(const Document& doc) {
  if (!doc.has_gold()) {
    throw ArgumentError("gold oracle needs an annotated document, '" + doc.doc_id +
                        "' has no tree");
  }
  order_ = tree_to_order(doc.gold);
}

SplitScores GoldOracleScorer::score_segment(const Segment& seg) {
  GoldSplit gold = match_gold(seg, order_);
  SplitScores s;
  s.segment = seg;
  s.probs.assign(static_cast<std::size_t>(seg.length()), 0.0);
  s.probs[static_cast<std::size_t>(gold.split - seg.m)] = 1.0;
  return s;
}

SegmentLabel GoldOracleScorer::label_at(const Segment& seg, int /*split*/) {
  return SegmentLabel{match_gold(seg, order_).label, {}};
}

ParseResult parse_document(const Document& doc, SplitScorer& scorer) {
  int q = doc.edu_count();
  if (q < 1) throw ArgumentError("cannot parse a document without units");
  scorer.begin_document(doc);

  ParseResult result;
  if (q == 1) {
    result.tree = RSTTree::leaf(1);
    return result;
  }

  std::deque<Segment> queue{Segment{1, q}};
  std::map<std::pair<int, int>, std::pair<int, NucRel>> chosen;
  while (!queue.empty()) {
    Segment seg = queue.front();
    queue.pop_front();
    SplitScores scores = scorer.score_segment(seg);
    int split = predict_split(scores);
    SegmentLabel label = scorer.label_at(seg, split);
    result.decisions.push_back(Decision{seg, split, label.label, scores.prob_at(split)});
    chosen[{seg.m, seg.n}] = {split, label.label};
    if (split > seg.m) queue.push_back(Segment{seg.m, split});
    if (seg.n > split + 1) queue.push_back(Segment{split + 1, seg.n});
  }

  std::function<RSTTree(int, int)> build = [&](int m, int n) -> RSTTree {
    if (m == n) return RSTTree::leaf(m);
    const std::pair<int, NucRel>& d = chosen.at({m, n});
    return RSTTree::internal(build(m, d.first), build(d.first + 1, n), d.second.nuc,
                             d.second.relation);
  };
  result.tree = build(1, q);
  return result;
}

}  // namespace rstdp
