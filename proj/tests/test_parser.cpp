#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "rstdp/corpus.hpp"
#include "rstdp/errors.hpp"
#include "rstdp/parser.hpp"

using namespace rstdp;

namespace {

SplitScores make_scores(int m, int n, std::vector<double> probs) {
  SplitScores s;
  s.segment = Segment{m, n};
  s.probs = std::move(probs);
  return s;
}

Vocabulary pinned_vocab(const std::vector<Document>& docs) {
  Vocabulary v = build_vocabulary(docs);
  v.relations = synthetic_relations();
  v.relation_index.clear();
  for (int i = 0; i < static_cast<int>(v.relations.size()); ++i) {
    v.relation_index[v.relations[i]] = i;
  }
  return v;
}

ModelConfig small_model_config() {
  ModelConfig c;
  c.encoder.word_dim = 5;
  c.encoder.pos_dim = 3;
  c.encoder.edu_type_dim = 2;
  c.encoder.rnn_hidden = 4;
  c.seg_hidden = 3;
  c.mlp_hidden = 5;
  c.init_seed = 23;
  return c;
}

/// ((E1,E2),(E3,E4)) with labels as in the four-unit worked example.
Document four_unit_doc() {
  Document d;
  d.doc_id = "four";
  for (int i = 1; i <= 4; ++i) {
    EDU e;
    e.index = i;
    e.tokens = {"w" + std::to_string(i)};
    e.pos_tags = {"p"};
    d.edus.push_back(e);
  }
  RSTTree left = RSTTree::internal(RSTTree::leaf(1), RSTTree::leaf(2), Nuclearity::NS,
                                   "elaboration");
  RSTTree right = RSTTree::internal(RSTTree::leaf(3), RSTTree::leaf(4), Nuclearity::NN, "list");
  d.gold = RSTTree::internal(left, right, Nuclearity::NS, "contrast");
  return d;
}

}  // namespace

TEST_CASE("argmax split selection with low-index tie break") {
  CHECK(predict_split(make_scores(1, 3, {0.1, 0.9, 0.3})) == 2);
  CHECK(predict_split(make_scores(1, 3, {0.5, 0.5, 0.9})) == 1);
  CHECK(predict_split(make_scores(4, 5, {0.01, 0.99})) == 4);
  CHECK(predict_split(make_scores(2, 6, {0.2, 0.2, 0.2, 0.2, 0.2})) == 2);
  CHECK(predict_split(make_scores(1, 4, {0.3, 0.1, 0.7, 0.99})) == 3);

  CHECK_THROWS_AS(predict_split(make_scores(3, 3, {0.5})), ArgumentError);
  CHECK_THROWS_AS(predict_split(make_scores(1, 3, {0.5, 0.5})), ArgumentError);
  CHECK_THROWS_AS(make_scores(1, 3, {0.1, 0.2, 0.3}).prob_at(4), ArgumentError);
  CHECK_THROWS_AS(make_scores(1, 3, {0.1, 0.2, 0.3}).prob_at(0), ArgumentError);
}

TEST_CASE("gold oracle decode reproduces the four-unit example in FIFO order") {
  Document doc = four_unit_doc();
  GoldOracleScorer oracle;
  ParseResult result = parse_document(doc, oracle);

  CHECK(result.tree == doc.gold);
  REQUIRE(result.decisions.size() == 3);

  CHECK(result.decisions[0].segment == Segment{1, 4});
  CHECK(result.decisions[0].split == 2);
  CHECK(result.decisions[0].label == NucRel{Nuclearity::NS, "contrast"});
  CHECK(result.decisions[0].split_prob == 1.0);

  CHECK(result.decisions[1].segment == Segment{1, 2});
  CHECK(result.decisions[1].split == 1);
  CHECK(result.decisions[1].label == NucRel{Nuclearity::NS, "elaboration"});

  CHECK(result.decisions[2].segment == Segment{3, 4});
  CHECK(result.decisions[2].split == 3);
  CHECK(result.decisions[2].label == NucRel{Nuclearity::NN, "list"});
}

TEST_CASE("decode order is breadth-first, not depth-first") {
  Document d;
  d.doc_id = "five";
  for (int i = 1; i <= 5; ++i) {
    EDU e;
    e.index = i;
    e.tokens = {"w"};
    e.pos_tags = {"p"};
    d.edus.push_back(e);
  }
  RSTTree left = RSTTree::internal(
      RSTTree::leaf(1),
      RSTTree::internal(RSTTree::leaf(2), RSTTree::leaf(3), Nuclearity::NN, "joint"),
      Nuclearity::NS, "elaboration");
  RSTTree right = RSTTree::internal(RSTTree::leaf(4), RSTTree::leaf(5), Nuclearity::SN, "cause");
  d.gold = RSTTree::internal(left, right, Nuclearity::NN, "list");

  GoldOracleScorer oracle;
  ParseResult result = parse_document(d, oracle);
  CHECK(result.tree == d.gold);
  REQUIRE(result.decisions.size() == 4);
  CHECK(result.decisions[0].segment == Segment{1, 5});
  CHECK(result.decisions[1].segment == Segment{1, 3});
  CHECK(result.decisions[2].segment == Segment{4, 5});
  CHECK(result.decisions[3].segment == Segment{2, 3});
}

TEST_CASE("gold oracle decode is exact on random documents") {
  std::vector<Document> docs = generate_synthetic(41, 200, 2, 12);
  GoldOracleScorer oracle;
  for (const Document& doc : docs) {
    ParseResult result = parse_document(doc, oracle);
    CHECK(result.tree == doc.gold);
    CHECK(static_cast<int>(result.decisions.size()) == doc.edu_count() - 1);
    for (const Decision& dec : result.decisions) {
      CHECK(dec.split_prob == 1.0);
    }
  }
}

TEST_CASE("single-unit documents decode to a bare leaf") {
  Document d;
  d.doc_id = "solo";
  EDU e;
  e.index = 1;
  e.tokens = {"w"};
  e.pos_tags = {"p"};
  d.edus = {e};
  d.gold = RSTTree::leaf(1);

  GoldOracleScorer oracle;
  ParseResult result = parse_document(d, oracle);
  CHECK(result.tree.is_leaf());
  CHECK(result.decisions.empty());
}

TEST_CASE("gold oracle rejects unannotated documents") {
  Document d;
  d.doc_id = "bare";
  EDU e;
  e.index = 1;
  e.tokens = {"w"};
  e.pos_tags = {"p"};
  d.edus = {e, e};
  d.edus[1].index = 2;

  GoldOracleScorer oracle;
  CHECK_THROWS_AS(parse_document(d, oracle), ArgumentError);
}

TEST_CASE("neural decode always yields a valid tree") {
  std::vector<Document> docs = generate_synthetic(7, 10, 2, 9);
  Vocabulary vocab = pinned_vocab(docs);
  ParserModel model(vocab, small_model_config());

  for (const Document& doc : docs) {
    Graph g;
    NeuralScorer scorer(model, g);
    ParseResult result = parse_document(doc, scorer);
    CHECK(result.tree.span() == Segment{1, doc.edu_count()});
    CHECK(result.tree.leaf_count() == doc.edu_count());
    CHECK(static_cast<int>(result.decisions.size()) == doc.edu_count() - 1);
    for (const Decision& dec : result.decisions) {
      CHECK(dec.split_prob > 0.0);
      CHECK(dec.split_prob < 1.0);
      CHECK(dec.split >= dec.segment.m);
      CHECK(dec.split < dec.segment.n);
    }
  }
}

TEST_CASE("label distributions are normalized and decodable") {
  std::vector<Document> docs = generate_synthetic(9, 2, 4, 6);
  Vocabulary vocab = pinned_vocab(docs);
  ParserModel model(vocab, small_model_config());

  Graph g;
  NeuralScorer scorer(model, g);
  scorer.begin_document(docs[0]);
  Segment whole{1, docs[0].edu_count()};
  SegmentLabel label = scorer.label_at(whole, whole.m);

  REQUIRE(static_cast<int>(label.dist.probs.size()) == model.joint_class_count());
  double total = 0.0;
  for (double p : label.dist.probs) {
    CHECK(p > 0.0);
    total += p;
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(model.joint_class_index(label.label) >= 0);
}

TEST_CASE("segment scoring reads only the segment's states") {
  std::vector<Document> docs = generate_synthetic(9, 2, 4, 6);
  Vocabulary vocab = pinned_vocab(docs);
  ParserModel model(vocab, small_model_config());
  int dim = model.config().encoder.context_dim();

  auto make_states = [&](Graph& g, double outside_fill) {
    std::vector<Value> h;
    for (int j = 1; j <= 6; ++j) {
      std::vector<double> vec(static_cast<std::size_t>(dim));
      for (int d = 0; d < dim; ++d) {
        vec[static_cast<std::size_t>(d)] = (j >= 2 && j <= 4)
                                               ? 0.1 * j + 0.01 * d
                                               : outside_fill + j + 0.001 * d;
      }
      h.push_back(g.constant(Tensor::vector(std::move(vec))));
    }
    return h;
  };

  Segment seg{2, 4};
  Graph g1;
  std::vector<Value> h1 = make_states(g1, 5.0);
  SegmentScoreNodes n1 = score_segment_nodes(g1, model, h1, seg);
  SplitScores s1 = n1.to_scores(g1);
  Tensor z1 = g1.value(label_distribution_node(g1, model, n1, 3));

  Graph g2;
  std::vector<Value> h2 = make_states(g2, -7.0);
  SegmentScoreNodes n2 = score_segment_nodes(g2, model, h2, seg);
  SplitScores s2 = n2.to_scores(g2);
  Tensor z2 = g2.value(label_distribution_node(g2, model, n2, 3));

  CHECK(s1.probs == s2.probs);
  CHECK(z1.data == z2.data);

  SUBCASE("states inside the segment do matter") {
    Graph g3;
    std::vector<Value> h3 = make_states(g3, 5.0);
    std::vector<double> bumped(static_cast<std::size_t>(dim), 2.5);
    h3[2] = g3.constant(Tensor::vector(bumped));
    SplitScores s3 = score_segment_nodes(g3, model, h3, seg).to_scores(g3);
    CHECK(s1.probs != s3.probs);
  }

  SUBCASE("ill-formed queries are rejected") {
    Graph g3;
    std::vector<Value> h3 = make_states(g3, 5.0);
    CHECK_THROWS_AS(score_segment_nodes(g3, model, h3, Segment{3, 3}), ArgumentError);
    CHECK_THROWS_AS(score_segment_nodes(g3, model, h3, Segment{5, 7}), ArgumentError);
    CHECK_THROWS_AS(score_segment_nodes(g3, model, h3, Segment{0, 3}), ArgumentError);
    SegmentScoreNodes n3 = score_segment_nodes(g3, model, h3, Segment{2, 4});
    CHECK_THROWS_AS(label_distribution_node(g3, model, n3, 4), ArgumentError);
    CHECK_THROWS_AS(label_distribution_node(g3, model, n3, 1), ArgumentError);
  }
}

TEST_CASE("split probabilities stay strictly inside the unit interval") {
  std::vector<Document> docs = generate_synthetic(13, 3, 3, 8);
  Vocabulary vocab = pinned_vocab(docs);
  ParserModel model(vocab, small_model_config());

  for (const Document& doc : docs) {
    Graph g;
    NeuralScorer scorer(model, g);
    scorer.begin_document(doc);
    Segment whole{1, doc.edu_count()};
    SplitScores scores = scorer.score_segment(whole);
    REQUIRE(static_cast<int>(scores.probs.size()) == whole.length());
    for (double p : scores.probs) {
      CHECK(p > 0.0);
      CHECK(p < 1.0);
    }
  }
}

TEST_CASE("scorer caches segment and label nodes") {
  std::vector<Document> docs = generate_synthetic(9, 2, 5, 6);
  Vocabulary vocab = pinned_vocab(docs);
  ParserModel model(vocab, small_model_config());

  Graph g;
  NeuralScorer scorer(model, g);
  scorer.begin_document(docs[0]);
  Segment whole{1, docs[0].edu_count()};

  scorer.score_segment(whole);
  std::size_t after_first = g.node_count();
  scorer.score_segment(whole);
  CHECK(g.node_count() == after_first);

  scorer.label_at(whole, whole.m);
  std::size_t after_label = g.node_count();
  CHECK(after_label > after_first);
  scorer.label_at(whole, whole.m);
  CHECK(g.node_count() == after_label);

  scorer.label_at(whole, whole.m + 1);
  CHECK(g.node_count() > after_label);
}
