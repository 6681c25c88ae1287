#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>
#include <string>
#include <vector>

#include "rstdp/corpus.hpp"
#include "rstdp/encoder.hpp"
#include "rstdp/errors.hpp"
#include "rstdp/gradcheck.hpp"

using namespace rstdp;

namespace {

EDU make_edu(int index, std::vector<std::string> tokens, std::vector<std::string> pos,
             bool paragraph_final = false) {
  EDU e;
  e.index = index;
  e.tokens = std::move(tokens);
  e.pos_tags = std::move(pos);
  e.paragraph_final = paragraph_final;
  e.sentence_final = paragraph_final;
  return e;
}

Document tiny_doc() {
  Document d;
  d.doc_id = "doc1";
  d.edus = {make_edu(1, {"the", "cat"}, {"DT", "NN"}),
            make_edu(2, {"sat"}, {"VB"}, true),
            make_edu(3, {"on", "the", "mat"}, {"IN", "DT", "NN"}, true)};
  return d;
}

EncoderConfig small_config() {
  EncoderConfig c;
  c.word_dim = 6;
  c.pos_dim = 4;
  c.edu_type_dim = 3;
  c.syntax_dim = 4;
  c.rnn_hidden = 5;
  return c;
}

Vocabulary tiny_vocab() { return build_vocabulary({tiny_doc()}); }

LstmDirection direction_from_store(ParameterStore& store, const std::string& prefix, int input_dim,
                                   int hidden_dim) {
  LstmDirection d;
  d.input_dim = input_dim;
  d.hidden_dim = hidden_dim;
  d.Wi = store.find(prefix + ".Wi");
  d.Wf = store.find(prefix + ".Wf");
  d.Wo = store.find(prefix + ".Wo");
  d.Wg = store.find(prefix + ".Wg");
  d.bi = store.find(prefix + ".bi");
  d.bf = store.find(prefix + ".bf");
  d.bo = store.find(prefix + ".bo");
  d.bg = store.find(prefix + ".bg");
  REQUIRE(d.Wi != nullptr);
  REQUIRE(d.bg != nullptr);
  return d;
}

}  // namespace

TEST_CASE("pooled vector has the configured dimension and is reproducible") {
  EncoderConfig cfg = small_config();
  ParameterStore store;
  std::mt19937_64 rng(7);
  Encoder enc(store, "enc", tiny_vocab(), cfg, nullptr, rng);
  Document doc = tiny_doc();

  Graph g;
  Value a = enc.encode_edu(g, doc.doc_id, doc.edus[0], nullptr);
  CHECK(g.value(a).shape == std::vector<long>{cfg.edu_dim()});
  CHECK(cfg.edu_dim() == 13);
  CHECK(g.value(a).all_finite());

  Value b = enc.encode_edu(g, doc.doc_id, doc.edus[0], nullptr);
  CHECK(g.value(a).data == g.value(b).data);

  ParameterStore store2;
  std::mt19937_64 rng2(7);
  Encoder enc2(store2, "enc", tiny_vocab(), cfg, nullptr, rng2);
  Graph g2;
  Value c = enc2.encode_edu(g2, doc.doc_id, doc.edus[0], nullptr);
  CHECK(g.value(a).data == g2.value(c).data);
}

TEST_CASE("paragraph flag changes only the trailing type slice") {
  EncoderConfig cfg = small_config();
  ParameterStore store;
  std::mt19937_64 rng(7);
  Encoder enc(store, "enc", tiny_vocab(), cfg, nullptr, rng);

  EDU plain = make_edu(1, {"the", "cat"}, {"DT", "NN"}, false);
  EDU final = make_edu(1, {"the", "cat"}, {"DT", "NN"}, true);

  Graph g;
  Tensor a = g.value(enc.encode_edu(g, "d", plain, nullptr));
  Tensor b = g.value(enc.encode_edu(g, "d", final, nullptr));
  int pooled = 2 * cfg.rnn_hidden;
  for (int i = 0; i < pooled; ++i) {
    CHECK(a.data[static_cast<std::size_t>(i)] == b.data[static_cast<std::size_t>(i)]);
  }
  const Parameter* type_emb = store.find("enc.type_emb");
  REQUIRE(type_emb != nullptr);
  bool tail_differs = false;
  for (int i = 0; i < cfg.edu_type_dim; ++i) {
    auto k = static_cast<std::size_t>(pooled + i);
    CHECK(a.data[k] == type_emb->value.at(0, i));
    CHECK(b.data[k] == type_emb->value.at(1, i));
    if (a.data[k] != b.data[k]) tail_differs = true;
  }
  CHECK(tail_differs);

  SUBCASE("disabling the paragraph feature makes the flag inert") {
    EncoderConfig flat = cfg;
    flat.use_paragraph_feature = false;
    ParameterStore store2;
    std::mt19937_64 rng2(7);
    Encoder enc2(store2, "enc", tiny_vocab(), flat, nullptr, rng2);
    Graph g2;
    Tensor a2 = g2.value(enc2.encode_edu(g2, "d", plain, nullptr));
    Tensor b2 = g2.value(enc2.encode_edu(g2, "d", final, nullptr));
    CHECK(a2.data == b2.data);
  }
}

TEST_CASE("single-token pooling reproduces the lone BiLSTM state") {
  EncoderConfig cfg = small_config();
  ParameterStore store;
  std::mt19937_64 rng(7);
  Vocabulary vocab = tiny_vocab();
  Encoder enc(store, "enc", vocab, cfg, nullptr, rng);

  EDU edu = make_edu(1, {"sat"}, {"VB"});
  Graph g;
  Tensor pooled = g.value(enc.encode_edu(g, "d", edu, nullptr));

  BiLstm token_lstm;
  token_lstm.fwd = direction_from_store(store, "enc.lstm_tok.fwd", cfg.word_dim + cfg.pos_dim,
                                        cfg.rnn_hidden);
  token_lstm.bwd = direction_from_store(store, "enc.lstm_tok.bwd", cfg.word_dim + cfg.pos_dim,
                                        cfg.rnn_hidden);
  Value w = g.row(g.param(*store.find("enc.word_emb")), vocab.word_id("sat"));
  Value p = g.row(g.param(*store.find("enc.pos_emb")), vocab.pos_id("VB"));
  Value x = g.concat({w, p});
  std::vector<Value> hs = bidirectional_encode(g, token_lstm, {x});
  REQUIRE(hs.size() == 1);
  const Tensor& h = g.value(hs[0]);
  for (int i = 0; i < 2 * cfg.rnn_hidden; ++i) {
    CHECK(pooled.data[static_cast<std::size_t>(i)] ==
          doctest::Approx(h.data[static_cast<std::size_t>(i)]).epsilon(1e-12));
  }
}

TEST_CASE("document encoding contextualizes every unit") {
  EncoderConfig cfg = small_config();
  ParameterStore store;
  std::mt19937_64 rng(7);
  Encoder enc(store, "enc", tiny_vocab(), cfg, nullptr, rng);
  Document doc = tiny_doc();

  Graph g;
  std::vector<Value> hs = enc.encode_document(g, doc, nullptr);
  REQUIRE(hs.size() == 3);
  for (Value h : hs) {
    CHECK(g.value(h).shape == std::vector<long>{cfg.context_dim()});
    CHECK(g.value(h).all_finite());
  }
  CHECK(g.value(hs[0]).data != g.value(hs[1]).data);
  CHECK(enc.document_encode_count() == 1);

  SUBCASE("a fresh graph reproduces the same states") {
    Graph g2;
    std::vector<Value> hs2 = enc.encode_document(g2, doc, nullptr);
    for (std::size_t i = 0; i < hs.size(); ++i) {
      CHECK(g.value(hs[i]).data == g2.value(hs2[i]).data);
    }
    CHECK(enc.document_encode_count() == 2);
  }

  SUBCASE("a single-unit document still encodes") {
    Document solo;
    solo.doc_id = "solo";
    solo.edus = {make_edu(1, {"cat"}, {"NN"})};
    Graph g2;
    std::vector<Value> one = enc.encode_document(g2, solo, nullptr);
    CHECK(one.size() == 1);
    CHECK(g2.value(one[0]).all_finite());
  }

  SUBCASE("an empty document is rejected") {
    Document none;
    none.doc_id = "none";
    Graph g2;
    CHECK_THROWS_AS(enc.encode_document(g2, none, nullptr), ArgumentError);
  }
}

TEST_CASE("document states do not leak across documents") {
  EncoderConfig cfg = small_config();
  ParameterStore store;
  std::mt19937_64 rng(7);
  Encoder enc(store, "enc", tiny_vocab(), cfg, nullptr, rng);

  Document doc = tiny_doc();
  Document other;
  other.doc_id = "other";
  other.edus = {make_edu(1, {"mat", "mat"}, {"NN", "NN"}), make_edu(2, {"on"}, {"IN"}, true)};

  Graph alone;
  std::vector<Value> solo = enc.encode_document(alone, doc, nullptr);

  Graph shared;
  enc.encode_document(shared, other, nullptr);
  std::vector<Value> after = enc.encode_document(shared, doc, nullptr);

  REQUIRE(solo.size() == after.size());
  for (std::size_t i = 0; i < solo.size(); ++i) {
    CHECK(alone.value(solo[i]).data == shared.value(after[i]).data);
  }
}

TEST_CASE("syntax features extend the pooled vector") {
  EncoderConfig cfg = small_config();
  cfg.use_syntax = true;
  ParameterStore store;
  std::mt19937_64 rng(7);
  Encoder enc(store, "enc", tiny_vocab(), cfg, nullptr, rng);
  Document doc = tiny_doc();

  ExternalFeatures feats;
  for (const EDU& edu : doc.edus) {
    for (int t = 0; t < static_cast<int>(edu.tokens.size()); ++t) {
      feats.insert(doc.doc_id, edu.index, t,
                   {0.1 * edu.index, 0.2 * t, 0.3, -0.4});
    }
  }

  Graph g;
  Value v = enc.encode_edu(g, doc.doc_id, doc.edus[0], &feats);
  CHECK(cfg.edu_dim() == 23);
  CHECK(g.value(v).shape == std::vector<long>{23});
  CHECK(g.value(v).all_finite());

  SUBCASE("missing feature table") {
    Graph g2;
    CHECK_THROWS_AS(enc.encode_edu(g2, doc.doc_id, doc.edus[0], nullptr), ConfigError);
  }
  SUBCASE("missing token vector names the location") {
    Graph g2;
    try {
      enc.encode_edu(g2, "absent", doc.edus[1], &feats);
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      std::string msg = e.what();
      CHECK(msg.find("absent") != std::string::npos);
      CHECK(msg.find("2") != std::string::npos);
      CHECK(msg.find("0") != std::string::npos);
    }
  }
  SUBCASE("wrong feature dimension") {
    ExternalFeatures bad;
    for (const EDU& edu : doc.edus) {
      for (int t = 0; t < static_cast<int>(edu.tokens.size()); ++t) {
        bad.insert(doc.doc_id, edu.index, t, {1.0, 2.0});
      }
    }
    Graph g2;
    CHECK_THROWS_AS(enc.encode_edu(g2, doc.doc_id, doc.edus[0], &bad), ConfigError);
  }
}

TEST_CASE("pretrained vectors seed known words and unknowns get the mean") {
  EncoderConfig cfg = small_config();
  Vocabulary vocab = tiny_vocab();

  EmbeddingTable table(cfg.word_dim);
  std::vector<double> cat_vec{1, 2, 3, 4, 5, 6};
  std::vector<double> sat_vec{-1, 0, 1, 0, -1, 0};
  table.insert("cat", cat_vec);
  table.insert("sat", sat_vec);
  table.finalize_unk();

  ParameterStore store;
  std::mt19937_64 rng(7);
  Encoder enc(store, "enc", vocab, cfg, &table, rng);
  const Parameter* emb = store.find("enc.word_emb");
  REQUIRE(emb != nullptr);

  for (int d = 0; d < cfg.word_dim; ++d) {
    CHECK(emb->value.at(vocab.word_id("cat"), d) == cat_vec[static_cast<std::size_t>(d)]);
    CHECK(emb->value.at(vocab.word_id("sat"), d) == sat_vec[static_cast<std::size_t>(d)]);
    double mean = (cat_vec[static_cast<std::size_t>(d)] + sat_vec[static_cast<std::size_t>(d)]) / 2.0;
    CHECK(emb->value.at(vocab.word_id("mat"), d) == doctest::Approx(mean).epsilon(1e-12));
    CHECK(emb->value.at(0, d) == doctest::Approx(mean).epsilon(1e-12));
  }

  SUBCASE("dimension mismatch is rejected") {
    EmbeddingTable narrow(cfg.word_dim - 1);
    narrow.insert("cat", std::vector<double>(static_cast<std::size_t>(cfg.word_dim - 1), 0.5));
    narrow.finalize_unk();
    ParameterStore store2;
    std::mt19937_64 rng2(7);
    CHECK_THROWS_AS(Encoder(store2, "enc", vocab, cfg, &narrow, rng2), ConfigError);
  }
}

TEST_CASE("token cap truncates long units") {
  EncoderConfig capped = small_config();
  capped.max_edu_tokens = 2;
  ParameterStore store;
  std::mt19937_64 rng(7);
  Encoder enc(store, "enc", tiny_vocab(), capped, nullptr, rng);

  EDU longer = make_edu(1, {"on", "the", "mat", "cat"}, {"IN", "DT", "NN", "NN"});
  EDU prefix = make_edu(1, {"on", "the"}, {"IN", "DT"});
  Graph g;
  Tensor full = g.value(enc.encode_edu(g, "d", longer, nullptr));
  Tensor cut = g.value(enc.encode_edu(g, "d", prefix, nullptr));
  CHECK(full.data == cut.data);
}

TEST_CASE("encoder validation") {
  ParameterStore store;
  std::mt19937_64 rng(7);

  EncoderConfig bad = small_config();
  bad.word_dim = 0;
  CHECK_THROWS_AS(Encoder(store, "a", tiny_vocab(), bad, nullptr, rng), ConfigError);

  bad = small_config();
  bad.max_edu_tokens = -1;
  CHECK_THROWS_AS(Encoder(store, "b", tiny_vocab(), bad, nullptr, rng), ConfigError);

  bad = small_config();
  bad.use_syntax = true;
  bad.syntax_dim = 0;
  CHECK_THROWS_AS(Encoder(store, "c", tiny_vocab(), bad, nullptr, rng), ConfigError);

  CHECK_THROWS_AS(Encoder(store, "d", Vocabulary{}, small_config(), nullptr, rng), ConfigError);

  Encoder enc(store, "e", tiny_vocab(), small_config(), nullptr, rng);
  EDU empty = make_edu(1, {}, {});
  Graph g;
  CHECK_THROWS_AS(enc.encode_edu(g, "d", empty, nullptr), ArgumentError);
}

TEST_CASE("gradients flow through the document encoder") {
  EncoderConfig cfg;
  cfg.word_dim = 3;
  cfg.pos_dim = 2;
  cfg.edu_type_dim = 2;
  cfg.rnn_hidden = 3;
  ParameterStore store;
  std::mt19937_64 rng(11);
  Encoder enc(store, "enc", tiny_vocab(), cfg, nullptr, rng);
  Document doc = tiny_doc();

  auto fn = [&](bool compute_grads) {
    Graph g(5);
    std::vector<Value> hs = enc.encode_document(g, doc, nullptr);
    std::vector<Value> sums;
    sums.reserve(hs.size());
    for (Value h : hs) sums.push_back(g.sum(h));
    Value loss = g.add_many(sums);
    double out = g.scalar(loss);
    if (compute_grads) g.backward(loss);
    return out;
  };

  GradCheckOptions opts;
  opts.max_coords_per_tensor = 4;
  GradCheckReport report = finite_difference_check(fn, store.all(), opts);
  INFO(report.summary());
  CHECK(report.ok());
  CHECK(report.coords_checked > 0);
}
