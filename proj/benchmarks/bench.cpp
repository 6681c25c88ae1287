#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "rstdp/corpus.hpp"
#include "rstdp/model.hpp"
#include "rstdp/parser.hpp"
#include "rstdp/training.hpp"
#include "rstdp/tree.hpp"

using namespace rstdp;

namespace {

std::vector<Document> bench_docs(int n, int q_min, int q_max) {
  return generate_synthetic(42, n, q_min, q_max);
}

ModelConfig bench_model_config() {
  ModelConfig m;
  m.encoder.word_dim = 20;
  m.encoder.pos_dim = 8;
  m.encoder.edu_type_dim = 4;
  m.encoder.rnn_hidden = 16;
  m.seg_hidden = 12;
  m.mlp_hidden = 32;
  m.init_seed = 42;
  return m;
}

void BM_OrderTreeRoundTrip(benchmark::State& state) {
  std::mt19937_64 rng(7);
  std::vector<RSTTree> trees;
  for (int i = 0; i < 64; ++i) {
    trees.push_back(random_binary_tree(rng, static_cast<int>(state.range(0)),
                                       synthetic_relations()));
  }
  std::size_t i = 0;
  for (auto _ : state) {
    const RSTTree& t = trees[i++ % trees.size()];
    benchmark::DoNotOptimize(order_to_tree(tree_to_order(t)));
  }
}
BENCHMARK(BM_OrderTreeRoundTrip)->Arg(8)->Arg(40)->Arg(160);

void BM_SyntheticCorpus(benchmark::State& state) {
  std::uint64_t seed = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(generate_synthetic(seed++, static_cast<int>(state.range(0)), 5, 12));
  }
}
BENCHMARK(BM_SyntheticCorpus)->Arg(1)->Arg(20);

void BM_GoldOracleParse(benchmark::State& state) {
  std::vector<Document> docs = bench_docs(16, static_cast<int>(state.range(0)),
                                          static_cast<int>(state.range(0)));
  std::size_t i = 0;
  for (auto _ : state) {
    const Document& doc = docs[i++ % docs.size()];
    GoldOracleScorer oracle;
    benchmark::DoNotOptimize(parse_document(doc, oracle));
  }
}
BENCHMARK(BM_GoldOracleParse)->Arg(8)->Arg(32);

void BM_EncodeDocument(benchmark::State& state) {
  std::vector<Document> docs = bench_docs(4, static_cast<int>(state.range(0)),
                                          static_cast<int>(state.range(0)));
  Vocabulary vocab = build_vocabulary(docs);
  ParserModel model(vocab, bench_model_config());
  std::size_t i = 0;
  for (auto _ : state) {
    const Document& doc = docs[i++ % docs.size()];
    Graph g;
    NeuralScorer scorer(model, g);
    scorer.begin_document(doc);
    benchmark::DoNotOptimize(scorer.document_states());
  }
}
BENCHMARK(BM_EncodeDocument)->Arg(8)->Arg(16);

void BM_NeuralParse(benchmark::State& state) {
  std::vector<Document> docs = bench_docs(4, static_cast<int>(state.range(0)),
                                          static_cast<int>(state.range(0)));
  Vocabulary vocab = build_vocabulary(docs);
  ParserModel model(vocab, bench_model_config());
  std::size_t i = 0;
  for (auto _ : state) {
    const Document& doc = docs[i++ % docs.size()];
    Graph g;
    NeuralScorer scorer(model, g);
    benchmark::DoNotOptimize(parse_document(doc, scorer));
  }
}
BENCHMARK(BM_NeuralParse)->Arg(8)->Arg(16);

void BM_TrainEpoch(benchmark::State& state) {
  std::vector<Document> docs = bench_docs(8, 5, 8);
  Vocabulary vocab = build_vocabulary(docs);
  TrainConfig cfg;
  cfg.max_epochs = 1;
  cfg.dropout = 0.1;
  cfg.seed = 3;
  for (auto _ : state) {
    ParserModel model(vocab, bench_model_config());
    benchmark::DoNotOptimize(train(model, docs, {}, cfg));
  }
}
BENCHMARK(BM_TrainEpoch);

}  // namespace

BENCHMARK_MAIN();
