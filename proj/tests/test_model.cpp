#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "rstdp/corpus.hpp"
#include "rstdp/errors.hpp"
#include "rstdp/model.hpp"

using namespace rstdp;

namespace {

ModelConfig small_model_config() {
  ModelConfig c;
  c.encoder.word_dim = 5;
  c.encoder.pos_dim = 3;
  c.encoder.edu_type_dim = 2;
  c.encoder.rnn_hidden = 4;
  c.seg_hidden = 3;
  c.mlp_hidden = 6;
  c.init_seed = 17;
  return c;
}

struct Fixture {
  std::vector<Document> docs = generate_synthetic(3, 2, 4, 6);
  Vocabulary vocab = build_vocabulary(docs);

  Fixture() {
    // Two small documents rarely sample every relation; pin the full set.
    vocab.relations = synthetic_relations();
    vocab.relation_index.clear();
    for (int i = 0; i < static_cast<int>(vocab.relations.size()); ++i) {
      vocab.relation_index[vocab.relations[i]] = i;
    }
  }
};

std::string temp_path(const std::string& stem) {
  return (std::filesystem::temp_directory_path() / stem).string();
}

}  // namespace

TEST_CASE("model construction wires the heads to the vocabulary") {
  Fixture f;
  ParserModel model(f.vocab, small_model_config());

  CHECK(model.relation_count() == 18);
  CHECK(model.joint_class_count() == 54);
  CHECK(model.params().find("enc.word_emb") != nullptr);
  CHECK(model.params().find("seg.lstm.fwd.Wi") != nullptr);
  CHECK(model.params().find("split_head.W1") != nullptr);
  CHECK(model.params().find("label_head.W2") != nullptr);

  const Parameter* split_w1 = model.params().find("split_head.W1");
  CHECK(split_w1->value.shape == std::vector<long>{2 * 3, 6});
  const Parameter* label_w1 = model.params().find("label_head.W1");
  CHECK(label_w1->value.shape == std::vector<long>{4 * 3, 6});
  const Parameter* label_w2 = model.params().find("label_head.W2");
  CHECK(label_w2->value.shape == std::vector<long>{6, 54});

  const Parameter* seg_wi = model.params().find("seg.lstm.fwd.Wi");
  CHECK(seg_wi->value.shape ==
        std::vector<long>{model.config().encoder.context_dim() + 3, 3});
}

TEST_CASE("joint class indexing is nuclearity-major and round-trips") {
  Fixture f;
  ParserModel model(f.vocab, small_model_config());
  int r = model.relation_count();

  CHECK(model.joint_class_index({Nuclearity::NS, f.vocab.relations[0]}) == 0);
  CHECK(model.joint_class_index({Nuclearity::SN, f.vocab.relations[0]}) == r);
  CHECK(model.joint_class_index({Nuclearity::NN, f.vocab.relations[0]}) == 2 * r);
  CHECK(model.joint_class_index({Nuclearity::NS, f.vocab.relations[2]}) == 2);

  for (int k = 0; k < model.joint_class_count(); ++k) {
    NucRel label = model.decode_joint_class(k);
    CHECK(model.joint_class_index(label) == k);
  }

  CHECK_THROWS_AS(model.joint_class_index({Nuclearity::NS, "no-such-relation"}), DataError);
  CHECK_THROWS_AS(model.decode_joint_class(-1), ArgumentError);
  CHECK_THROWS_AS(model.decode_joint_class(model.joint_class_count()), ArgumentError);
}

TEST_CASE("checkpoints round-trip bitwise") {
  Fixture f;
  ParserModel model(f.vocab, small_model_config());

  std::stringstream buffer(std::ios::in | std::ios::out | std::ios::binary);
  model.save(buffer);
  ParserModel loaded = ParserModel::load(buffer);

  CHECK(loaded.vocab().words == f.vocab.words);
  CHECK(loaded.vocab().pos_tags == f.vocab.pos_tags);
  CHECK(loaded.vocab().relations == f.vocab.relations);
  CHECK(loaded.config().seg_hidden == model.config().seg_hidden);
  CHECK(loaded.config().encoder.rnn_hidden == model.config().encoder.rnn_hidden);
  CHECK(loaded.config().init_seed == model.config().init_seed);

  std::vector<const Parameter*> before = std::as_const(model).params().all();
  std::vector<const Parameter*> after = std::as_const(loaded).params().all();
  REQUIRE(before.size() == after.size());
  for (std::size_t i = 0; i < before.size(); ++i) {
    CHECK(before[i]->name == after[i]->name);
    CHECK(before[i]->value.shape == after[i]->value.shape);
    CHECK(before[i]->value.data == after[i]->value.data);
  }

  SUBCASE("loaded model encodes documents identically") {
    Graph g1, g2;
    std::vector<Value> h1 = model.encoder().encode_document(g1, f.docs[0], nullptr);
    std::vector<Value> h2 = loaded.encoder().encode_document(g2, f.docs[0], nullptr);
    REQUIRE(h1.size() == h2.size());
    for (std::size_t i = 0; i < h1.size(); ++i) {
      CHECK(g1.value(h1[i]).data == g2.value(h2[i]).data);
    }
  }
}

TEST_CASE("checkpoint files survive the disk") {
  Fixture f;
  ParserModel model(f.vocab, small_model_config());
  std::string path = temp_path("rstdp_test_model.ckpt");
  model.save(path);
  ParserModel loaded = ParserModel::load(path);
  std::vector<const Parameter*> before = std::as_const(model).params().all();
  std::vector<const Parameter*> after = std::as_const(loaded).params().all();
  REQUIRE(before.size() == after.size());
  for (std::size_t i = 0; i < before.size(); ++i) {
    CHECK(before[i]->value.data == after[i]->value.data);
  }
  std::remove(path.c_str());
}

TEST_CASE("corrupt checkpoints are rejected with a diagnostic") {
  Fixture f;
  ParserModel model(f.vocab, small_model_config());
  std::stringstream buffer(std::ios::in | std::ios::out | std::ios::binary);
  model.save(buffer);
  std::string bytes = buffer.str();

  SUBCASE("bad magic") {
    std::string bad = bytes;
    bad[0] = 'X';
    std::stringstream in(bad, std::ios::in | std::ios::binary);
    CHECK_THROWS_AS(ParserModel::load(in), DataError);
  }
  SUBCASE("unsupported version") {
    std::string bad = bytes;
    bad[8] = 99;
    std::stringstream in(bad, std::ios::in | std::ios::binary);
    CHECK_THROWS_AS(ParserModel::load(in), DataError);
  }
  SUBCASE("truncated data") {
    std::string bad = bytes.substr(0, bytes.size() / 2);
    std::stringstream in(bad, std::ios::in | std::ios::binary);
    CHECK_THROWS_AS(ParserModel::load(in), DataError);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(ParserModel::load(temp_path("rstdp_no_such_file.ckpt")), DataError);
  }
}

TEST_CASE("model validation") {
  Fixture f;
  ModelConfig bad = small_model_config();
  bad.seg_hidden = 0;
  CHECK_THROWS_AS(ParserModel(f.vocab, bad), ConfigError);

  bad = small_model_config();
  bad.mlp_hidden = -1;
  CHECK_THROWS_AS(ParserModel(f.vocab, bad), ConfigError);

  Vocabulary no_rel = f.vocab;
  no_rel.relations.clear();
  no_rel.relation_index.clear();
  CHECK_THROWS_AS(ParserModel(no_rel, small_model_config()), ConfigError);
}
