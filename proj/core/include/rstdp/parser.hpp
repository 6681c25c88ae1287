#pragma once

#include <map>
#include <tuple>
#include <utility>
#include <vector>

#include "rstdp/model.hpp"

namespace rstdp {

/// Split probabilities ỹ_j for every position j ∈ [m, n] of a segment.
/// Position n exists but is masked: it is never a legal split.
struct SplitScores {
  Segment segment;
  std::vector<double> probs;

  double prob_at(int j) const;
};

/// Probabilities over the joint (nuclearity × relation) classes. Empty for
/// scorers that answer with certainty instead of a distribution.
struct LabelDistribution {
  std::vector<double> probs;
  bool empty() const { return probs.empty(); }
};

struct SegmentLabel {
  NucRel label;
  LabelDistribution dist;
};

/// Argmax of the split probabilities over j ∈ [m, n−1]; exact ties go to
/// the smallest index.
int predict_split(const SplitScores& scores);

/// One decode step: the popped segment, the chosen split, its joint label,
/// and the split's probability.
struct Decision {
  Segment segment;
  int split = 0;
  NucRel label;
  double split_prob = 0.0;
};

struct ParseResult {
  RSTTree tree;
  std::vector<Decision> decisions;  // in decode order (FIFO)
};

/// Scoring interface consumed by the decoder. begin_document is called once
/// before any segment of that document is scored.
class SplitScorer {
 public:
  virtual ~SplitScorer() = default;
  virtual void begin_document(const Document& doc) = 0;
  virtual SplitScores score_segment(const Segment& seg) = 0;
  virtual SegmentLabel label_at(const Segment& seg, int split) = 0;
};

/// Graph nodes for one scored segment: contextual vectors h′ and sigmoid
/// split probabilities, one of each per position j ∈ [m, n].
struct SegmentScoreNodes {
  Segment segment;
  std::vector<Value> h_prime;
  std::vector<Value> prob_nodes;

  SplitScores to_scores(const Graph& g) const;
};

/// Runs the segment BiLSTM over h_m..h_n and the split head on each state.
/// Reads only h[m-1..n-1]; the rest of the document never enters the
/// computation. dropout applies to the BiLSTM inputs and head inputs when
/// the graph is in training mode.
SegmentScoreNodes score_segment_nodes(Graph& g, const ParserModel& model,
                                      const std::vector<Value>& h, const Segment& seg,
                                      double dropout = 0.0);

/// Softmax over the joint classes from the average-pooled left and right
/// halves of the split segment.
Value label_distribution_node(Graph& g, const ParserModel& model,
                              const SegmentScoreNodes& nodes, int split, double dropout = 0.0);

/// Neural scorer: encodes the document once, then scores segments on
/// demand, caching per-segment graph nodes so decode and loss building
/// share them.
class NeuralScorer : public SplitScorer {
 public:
  NeuralScorer(const ParserModel& model, Graph& graph, const ExternalFeatures* feats = nullptr,
               double dropout = 0.0);

  void begin_document(const Document& doc) override;
  SplitScores score_segment(const Segment& seg) override;
  SegmentLabel label_at(const Segment& seg, int split) override;

  const std::vector<Value>& document_states() const { return h_; }
  const SegmentScoreNodes& nodes_for(const Segment& seg);
  Value label_node_for(const Segment& seg, int split);

 private:
  const ParserModel* model_;
  Graph* graph_;
  const ExternalFeatures* feats_;
  double dropout_;
  std::vector<Value> h_;
  std::map<std::pair<int, int>, SegmentScoreNodes> segment_cache_;
  std::map<std::tuple<int, int, int>, Value> label_cache_;
};

/// Answers every query from the document's gold tree: probability 1 at the
/// still-reachable gold split, 0 elsewhere, and the gold node's label.
class GoldOracleScorer : public SplitScorer {
 public:
  void begin_document(const Document& doc) override;
  SplitScores score_segment(const Segment& seg) override;
  SegmentLabel label_at(const Segment& seg, int split) override;

 private:
  CanonicalOrder order_;
};

/// Top-down decode: pop segments from a FIFO queue starting at (1,q), split
/// each at the scorer's argmax, and reassemble the tree. Exactly q−1
/// decisions; q = 1 yields a bare leaf.
ParseResult parse_document(const Document& doc, SplitScorer& scorer);

}  // namespace rstdp
