#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "rstdp/corpus.hpp"
#include "rstdp/errors.hpp"
#include "rstdp/eval.hpp"
#include "rstdp/gradcheck.hpp"
#include "rstdp/model.hpp"
#include "rstdp/parser.hpp"
#include "rstdp/training.hpp"
#include "rstdp/tree.hpp"

using nlohmann::json;
using namespace rstdp;

namespace {

json effective_config_json(const TrainConfig& t, const ModelConfig& m) {
  return json{
      {"lambda1", t.lambda1},
      {"lambda2", t.lambda2},
      {"beta", t.beta},
      {"alpha", t.alpha},
      {"penalty_enabled", t.penalty_enabled},
      {"oracle_start_epoch", t.oracle_start_epoch},
      {"lr", t.lr},
      {"batch_size", t.batch_size},
      {"grad_accum", t.grad_accum},
      {"dropout", t.dropout},
      {"max_epochs", t.max_epochs},
      {"seed", t.seed},
      {"adam_eps", t.adam_eps},
      {"word_dim", m.encoder.word_dim},
      {"pos_dim", m.encoder.pos_dim},
      {"edu_type_dim", m.encoder.edu_type_dim},
      {"syntax_dim", m.encoder.syntax_dim},
      {"rnn_hidden", m.encoder.rnn_hidden},
      {"use_syntax", m.encoder.use_syntax},
      {"use_paragraph_feature", m.encoder.use_paragraph_feature},
      {"max_edu_tokens", m.encoder.max_edu_tokens},
      {"seg_hidden", m.seg_hidden},
      {"mlp_hidden", m.mlp_hidden},
      {"init_seed", m.init_seed},
  };
}

void apply_config_file(const std::string& path, TrainConfig& t, ModelConfig& m) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config file " + path + ": " + e.what());
  }
  if (!j.is_object()) throw ConfigError("config file must hold a JSON object");
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "lambda1") t.lambda1 = value.get<double>();
      else if (key == "lambda2") t.lambda2 = value.get<double>();
      else if (key == "beta") t.beta = value.get<double>();
      else if (key == "alpha") t.alpha = value.get<double>();
      else if (key == "penalty_enabled") t.penalty_enabled = value.get<bool>();
      else if (key == "oracle_start_epoch") t.oracle_start_epoch = value.get<int>();
      else if (key == "lr") t.lr = value.get<double>();
      else if (key == "batch_size") t.batch_size = value.get<int>();
      else if (key == "grad_accum") t.grad_accum = value.get<int>();
      else if (key == "dropout") t.dropout = value.get<double>();
      else if (key == "max_epochs") t.max_epochs = value.get<int>();
      else if (key == "seed") t.seed = value.get<std::uint64_t>();
      else if (key == "adam_eps") t.adam_eps = value.get<double>();
      else if (key == "word_dim") m.encoder.word_dim = value.get<int>();
      else if (key == "pos_dim") m.encoder.pos_dim = value.get<int>();
      else if (key == "edu_type_dim") m.encoder.edu_type_dim = value.get<int>();
      else if (key == "syntax_dim") m.encoder.syntax_dim = value.get<int>();
      else if (key == "rnn_hidden") m.encoder.rnn_hidden = value.get<int>();
      else if (key == "use_syntax") m.encoder.use_syntax = value.get<bool>();
      else if (key == "use_paragraph_feature") m.encoder.use_paragraph_feature = value.get<bool>();
      else if (key == "max_edu_tokens") m.encoder.max_edu_tokens = value.get<int>();
      else if (key == "seg_hidden") m.seg_hidden = value.get<int>();
      else if (key == "mlp_hidden") m.mlp_hidden = value.get<int>();
      else if (key == "init_seed") m.init_seed = value.get<std::uint64_t>();
      else throw ConfigError("unknown config key '" + key + "'");
    } catch (const json::exception& e) {
      throw ConfigError("config key '" + key + "': " + e.what());
    }
  }
}

void collect_relations(const RSTTree& t, std::set<std::string>& out) {
  if (t.empty() || t.is_leaf()) return;
  out.insert(t.relation());
  collect_relations(t.left(), out);
  collect_relations(t.right(), out);
}

std::string nuclearity_arrow(Nuclearity nuc) {
  switch (nuc) {
    case Nuclearity::NS: return "N<-S";
    case Nuclearity::SN: return "S->N";
    default: return "N==N";
  }
}

void render_tree(const RSTTree& t, const Document& doc, int depth, std::ostream& out) {
  std::string indent(static_cast<std::size_t>(depth) * 2, ' ');
  if (t.is_leaf()) {
    out << indent << "(" << t.edu_index() << ")";
    for (const std::string& tok : doc.edus[static_cast<std::size_t>(t.edu_index() - 1)].tokens) {
      out << " " << tok;
    }
    out << "\n";
    return;
  }
  out << indent << "[" << t.start() << "-" << t.end() << "] " << t.relation() << " "
      << nuclearity_arrow(t.nuclearity()) << "\n";
  render_tree(t.left(), doc, depth + 1, out);
  render_tree(t.right(), doc, depth + 1, out);
}

struct TrainCli {
  std::string corpus, dev, config, out_model, log, embeddings, syntax_file;
  bool print_config = false;
  bool no_penalty = false;
  bool use_syntax = false;
  bool no_paragraph_feature = false;
  TrainConfig t;
  ModelConfig m;
};

int run_train(const CLI::App& cmd, TrainCli& o) {
  TrainConfig t;
  ModelConfig m;
  if (!o.config.empty()) apply_config_file(o.config, t, m);

  auto flag = [&](const std::string& name) { return cmd.count(name) > 0; };
  if (flag("--lambda1")) t.lambda1 = o.t.lambda1;
  if (flag("--lambda2")) t.lambda2 = o.t.lambda2;
  if (flag("--beta")) t.beta = o.t.beta;
  if (flag("--alpha")) t.alpha = o.t.alpha;
  if (o.no_penalty) t.penalty_enabled = false;
  if (flag("--oracle-start-epoch")) t.oracle_start_epoch = o.t.oracle_start_epoch;
  if (flag("--lr")) t.lr = o.t.lr;
  if (flag("--batch-size")) t.batch_size = o.t.batch_size;
  if (flag("--grad-accum")) t.grad_accum = o.t.grad_accum;
  if (flag("--dropout")) t.dropout = o.t.dropout;
  if (flag("--max-epochs")) t.max_epochs = o.t.max_epochs;
  if (flag("--seed")) t.seed = o.t.seed;
  if (flag("--adam-eps")) t.adam_eps = o.t.adam_eps;
  if (flag("--word-dim")) m.encoder.word_dim = o.m.encoder.word_dim;
  if (flag("--pos-dim")) m.encoder.pos_dim = o.m.encoder.pos_dim;
  if (flag("--edu-type-dim")) m.encoder.edu_type_dim = o.m.encoder.edu_type_dim;
  if (flag("--syntax-dim")) m.encoder.syntax_dim = o.m.encoder.syntax_dim;
  if (flag("--rnn-hidden")) m.encoder.rnn_hidden = o.m.encoder.rnn_hidden;
  if (o.use_syntax) m.encoder.use_syntax = true;
  if (o.no_paragraph_feature) m.encoder.use_paragraph_feature = false;
  if (flag("--max-edu-tokens")) m.encoder.max_edu_tokens = o.m.encoder.max_edu_tokens;
  if (flag("--seg-hidden")) m.seg_hidden = o.m.seg_hidden;
  if (flag("--mlp-hidden")) m.mlp_hidden = o.m.mlp_hidden;
  if (flag("--init-seed")) m.init_seed = o.m.init_seed;

  if (o.print_config) {
    std::cout << effective_config_json(t, m).dump(2) << "\n";
    return 0;
  }
  if (o.corpus.empty()) throw ArgumentError("train needs --corpus (or --print-config)");
  t.validate();
  m.validate();

  std::vector<Document> train_docs = read_corpus(o.corpus);
  std::vector<Document> dev_docs;
  if (!o.dev.empty()) dev_docs = read_corpus(o.dev);

  std::unique_ptr<EmbeddingTable> table;
  if (!o.embeddings.empty()) {
    std::vector<std::string> warnings;
    table = std::make_unique<EmbeddingTable>(
        load_embeddings(o.embeddings, m.encoder.word_dim, &warnings));
    for (const std::string& w : warnings) std::cerr << "warning: " << w << "\n";
  }
  std::unique_ptr<ExternalFeatures> feats;
  if (m.encoder.use_syntax) {
    if (o.syntax_file.empty()) throw ConfigError("--use-syntax needs --syntax-file");
    feats = std::make_unique<ExternalFeatures>(load_external_features(o.syntax_file));
  }

  Vocabulary vocab = build_vocabulary(train_docs);
  ParserModel model(vocab, m, table.get());

  std::ofstream log_file;
  if (!o.log.empty()) {
    log_file.open(o.log);
    if (!log_file) throw DataError("cannot open log file for writing: " + o.log);
  }
  TrainResult result =
      train(model, train_docs, dev_docs, t, feats.get(), [&](const EpochLog& log) {
        std::cout << log.format() << "\n";
        if (log_file.is_open()) log_file << log.format() << "\n";
        return false;
      });

  if (!o.out_model.empty()) {
    model.save(o.out_model + ".last");
    restore_parameters(model.params(), result.best_state);
    model.save(o.out_model);
  }
  char best[64];
  std::snprintf(best, sizeof(best), "best epoch %d full %.2f", result.best_epoch,
                result.best_full);
  std::cerr << best << "\n";
  return 0;
}

struct ParseCli {
  std::string model, corpus, out, trace, syntax_file;
};

int run_parse(const ParseCli& o) {
  ParserModel model = ParserModel::load(o.model);
  std::vector<Document> docs = read_corpus(o.corpus);

  std::unique_ptr<ExternalFeatures> feats;
  if (model.config().encoder.use_syntax) {
    if (o.syntax_file.empty()) throw ConfigError("the model uses syntax features; pass --syntax-file");
    feats = std::make_unique<ExternalFeatures>(load_external_features(o.syntax_file));
  }
  for (const Document& doc : docs) {
    if (!doc.has_gold()) continue;
    std::set<std::string> rels;
    collect_relations(doc.gold, rels);
    for (const std::string& r : rels) {
      if (model.vocab().relation_index.find(r) == model.vocab().relation_index.end()) {
        throw DataError("document '" + doc.doc_id + "' uses relation '" + r +
                        "' absent from the model vocabulary");
      }
    }
  }

  std::ofstream trace_file;
  if (!o.trace.empty()) {
    trace_file.open(o.trace);
    if (!trace_file) throw DataError("cannot open trace file for writing: " + o.trace);
  }

  std::vector<Prediction> preds;
  for (const Document& doc : docs) {
    Graph g;
    NeuralScorer scorer(model, g, feats.get());
    ParseResult result = parse_document(doc, scorer);
    if (trace_file.is_open()) {
      trace_file << "# " << doc.doc_id << "\n";
      for (const Decision& d : result.decisions) {
        char line[160];
        std::snprintf(line, sizeof(line), "%d %d %d %s %s %.6f", d.segment.m, d.segment.n,
                      d.split, to_string(d.label.nuc).c_str(), d.label.relation.c_str(),
                      d.split_prob);
        trace_file << line << "\n";
      }
    }
    preds.push_back(Prediction{doc.doc_id, result.tree});
  }
  if (o.out.empty()) {
    write_predictions(preds, std::cout);
  } else {
    write_predictions(preds, o.out);
  }
  return 0;
}

struct EvalCli {
  std::string gold, pred, metric = "original";
  bool buckets = false;
  bool confusion = false;
  bool include_root = false;
  bool as_json = false;
};

int run_eval(const EvalCli& o) {
  std::vector<Document> gold_docs = read_corpus(o.gold);
  std::vector<Prediction> preds = read_predictions(o.pred);

  std::map<std::string, const RSTTree*> by_id;
  for (const Prediction& p : preds) {
    if (!by_id.emplace(p.doc_id, &p.tree).second) {
      throw DataError("predictions contain document '" + p.doc_id + "' twice");
    }
  }
  std::vector<RSTTree> golds, predicted;
  for (const Document& doc : gold_docs) {
    if (!doc.has_gold()) throw DataError("document '" + doc.doc_id + "' has no gold tree");
    auto it = by_id.find(doc.doc_id);
    if (it == by_id.end()) {
      throw DataError("predictions are missing document '" + doc.doc_id + "'");
    }
    golds.push_back(doc.gold);
    predicted.push_back(*it->second);
    by_id.erase(it);
  }
  if (!by_id.empty()) {
    throw DataError("predictions contain unknown document '" + by_id.begin()->first + "'");
  }

  ParsevalVariant variant =
      o.metric == "rst" ? ParsevalVariant::Rst : ParsevalVariant::Original;
  MetricReport report = evaluate_trees(golds, predicted, variant, o.include_root);

  if (o.as_json) {
    json j{{"metric", o.metric},
           {"span", report.S()},
           {"nuclearity", report.N()},
           {"relation", report.R()},
           {"full", report.F()}};
    if (o.buckets) {
      BucketReport buckets =
          bucket_report(golds, predicted, variant, o.include_root, default_buckets());
      json rows = json::array();
      for (const LengthBucket& b : buckets.buckets) {
        std::string hi = b.hi < 0 ? "inf" : std::to_string(b.hi);
        rows.push_back(json{{"range", "(" + std::to_string(b.lo) + "," + hi + "]"},
                            {"docs", b.doc_count},
                            {"span", b.metrics.S()},
                            {"nuclearity", b.metrics.N()},
                            {"relation", b.metrics.R()},
                            {"full", b.metrics.F()}});
      }
      j["buckets"] = std::move(rows);
    }
    if (o.confusion) {
      ConfusionMatrices cm = confusion_matrices(golds, predicted, o.include_root);
      j["confusion"] = json{{"matched_pairs", cm.matched_pairs},
                            {"nuclearity_labels", cm.nuclearity_labels},
                            {"nuclearity", cm.nuclearity},
                            {"relation_labels", cm.relation_labels},
                            {"relation", cm.relation}};
    }
    std::cout << j.dump(2) << "\n";
    return 0;
  }

  std::cout << format_metric_report(report);
  if (o.buckets) {
    std::cout << "\n"
              << format_bucket_report(bucket_report(golds, predicted, variant, o.include_root,
                                                    default_buckets()));
  }
  if (o.confusion) {
    std::cout << "\n" << format_confusion(confusion_matrices(golds, predicted, o.include_root));
  }
  return 0;
}

struct RenderCli {
  std::string corpus, doc_id;
};

int run_render(const RenderCli& o) {
  std::vector<Document> docs = read_corpus(o.corpus);
  for (const Document& doc : docs) {
    if (doc.doc_id != o.doc_id) continue;
    if (!doc.has_gold()) throw DataError("document '" + o.doc_id + "' has no tree to render");
    render_tree(doc.gold, doc, 0, std::cout);
    return 0;
  }
  std::cerr << "error: no document with id '" << o.doc_id << "'\n";
  return 2;
}

struct CheckGradCli {
  std::uint64_t seed = 1;
  int edus = 3;
  double tolerance = 1e-4;
  long max_coords = 0;
};

int run_check_grad(const CheckGradCli& o) {
  if (o.edus < 2) throw ArgumentError("check-grad needs at least 2 EDUs");
  std::vector<Document> docs = generate_synthetic(o.seed, 1, o.edus, o.edus);
  const Document& doc = docs[0];
  Vocabulary vocab = build_vocabulary(docs);

  ModelConfig m;
  m.encoder.word_dim = 4;
  m.encoder.pos_dim = 3;
  m.encoder.edu_type_dim = 2;
  m.encoder.rnn_hidden = 3;
  m.seg_hidden = 3;
  m.mlp_hidden = 4;
  m.init_seed = o.seed;
  ParserModel model(vocab, m);

  std::vector<SegmentTarget> targets = build_static_targets(doc);
  auto loss_fn = [&](bool backward) {
    Graph g;
    NeuralScorer scorer(model, g);
    scorer.begin_document(doc);
    std::vector<Value> seg_terms, lbl_terms;
    for (const SegmentTarget& t : targets) {
      const SegmentScoreNodes& nodes = scorer.nodes_for(t.segment);
      seg_terms.push_back(
          g.scale(g.bce_sum(nodes.prob_nodes, t.y()), segment_weight(t.segment, 0.35, true)));
      lbl_terms.push_back(g.cross_entropy(scorer.label_node_for(t.segment, t.gold_split),
                                          model.joint_class_index(t.gold_label)));
    }
    double inv = 1.0 / static_cast<double>(targets.size());
    Value loss = g.add(g.scale(g.add_many(seg_terms), inv), g.scale(g.add_many(lbl_terms), inv));
    double value = g.scalar(loss);
    if (backward) g.backward(loss);
    return value;
  };

  GradCheckOptions opts;
  opts.tolerance = o.tolerance;
  opts.max_coords_per_tensor = o.max_coords;
  GradCheckReport report = finite_difference_check(loss_fn, model.params().all(), opts);
  std::cout << report.summary() << "\n";
  return report.ok() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Top-down discourse parsing toolkit"};
  app.require_subcommand(1);
  int rc = 0;

  CLI::App* gen = app.add_subcommand("gen", "Generate a synthetic labelled corpus");
  std::uint64_t gen_seed = 7;
  int gen_docs = 20, gen_min = 2, gen_max = 12;
  std::string gen_out;
  gen->add_option("--seed", gen_seed, "Generator seed");
  gen->add_option("--docs", gen_docs, "Number of documents")->check(CLI::PositiveNumber);
  gen->add_option("--edus-min", gen_min, "Minimum EDUs per document")->check(CLI::Range(2, 1000000));
  gen->add_option("--edus-max", gen_max, "Maximum EDUs per document")->check(CLI::PositiveNumber);
  gen->add_option("--out", gen_out, "Output corpus path")->required();
  gen->callback([&]() {
    write_corpus(generate_synthetic(gen_seed, gen_docs, gen_min, gen_max), gen_out);
  });

  CLI::App* train_cmd = app.add_subcommand("train", "Fit a parser on a labelled corpus");
  TrainCli tr;
  train_cmd->add_option("--corpus", tr.corpus, "Training corpus path");
  train_cmd->add_option("--dev", tr.dev, "Development corpus path");
  train_cmd->add_option("--config", tr.config, "JSON config file");
  train_cmd->add_option("--out-model", tr.out_model, "Checkpoint path (best; .last appended for final)");
  train_cmd->add_option("--log", tr.log, "Metrics log path");
  train_cmd->add_option("--embeddings", tr.embeddings, "Pretrained word embeddings (text format)");
  train_cmd->add_option("--syntax-file", tr.syntax_file, "External per-token feature file");
  train_cmd->add_flag("--print-config", tr.print_config, "Print the effective config and exit");
  train_cmd->add_option("--lambda1", tr.t.lambda1, "Split loss weight");
  train_cmd->add_option("--lambda2", tr.t.lambda2, "Label loss weight");
  train_cmd->add_option("--beta", tr.t.beta, "Length penalty exponent");
  train_cmd->add_option("--alpha", tr.t.alpha, "Exploration probability");
  train_cmd->add_flag("--no-penalty", tr.no_penalty, "Disable the length penalty");
  train_cmd->add_option("--oracle-start-epoch", tr.t.oracle_start_epoch,
                        "Last teacher-forced epoch");
  train_cmd->add_option("--lr", tr.t.lr, "Learning rate");
  train_cmd->add_option("--batch-size", tr.t.batch_size, "Documents per step");
  train_cmd->add_option("--grad-accum", tr.t.grad_accum, "Accumulated steps per update");
  train_cmd->add_option("--dropout", tr.t.dropout, "Dropout rate");
  train_cmd->add_option("--max-epochs", tr.t.max_epochs, "Epoch budget");
  train_cmd->add_option("--seed", tr.t.seed, "Training seed");
  train_cmd->add_option("--adam-eps", tr.t.adam_eps, "Adam epsilon");
  train_cmd->add_option("--word-dim", tr.m.encoder.word_dim, "Word embedding dimension");
  train_cmd->add_option("--pos-dim", tr.m.encoder.pos_dim, "POS embedding dimension");
  train_cmd->add_option("--edu-type-dim", tr.m.encoder.edu_type_dim,
                        "Boundary feature dimension");
  train_cmd->add_option("--syntax-dim", tr.m.encoder.syntax_dim, "External feature dimension");
  train_cmd->add_option("--rnn-hidden", tr.m.encoder.rnn_hidden,
                        "Encoder hidden size per direction");
  train_cmd->add_flag("--use-syntax", tr.use_syntax, "Concatenate external token features");
  train_cmd->add_flag("--no-paragraph-feature", tr.no_paragraph_feature,
                      "Drop the boundary feature");
  train_cmd->add_option("--max-edu-tokens", tr.m.encoder.max_edu_tokens,
                        "Token cap per EDU (0 keeps all)");
  train_cmd->add_option("--seg-hidden", tr.m.seg_hidden, "Segment encoder hidden size");
  train_cmd->add_option("--mlp-hidden", tr.m.mlp_hidden, "Scorer hidden layer size");
  train_cmd->add_option("--init-seed", tr.m.init_seed, "Parameter init seed");
  train_cmd->callback([&]() { rc = run_train(*train_cmd, tr); });

  CLI::App* parse_cmd = app.add_subcommand("parse", "Parse a corpus with a trained model");
  ParseCli pa;
  parse_cmd->add_option("--model", pa.model, "Checkpoint path")->required();
  parse_cmd->add_option("--corpus", pa.corpus, "Corpus path")->required();
  parse_cmd->add_option("--out", pa.out, "Predictions path (stdout when omitted)");
  parse_cmd->add_option("--trace", pa.trace, "Per-decision trace path");
  parse_cmd->add_option("--syntax-file", pa.syntax_file, "External per-token feature file");
  parse_cmd->callback([&]() { rc = run_parse(pa); });

  CLI::App* eval_cmd = app.add_subcommand("eval", "Score predictions against gold trees");
  EvalCli ev;
  eval_cmd->add_option("--gold", ev.gold, "Gold corpus path")->required();
  eval_cmd->add_option("--pred", ev.pred, "Predictions path")->required();
  eval_cmd->add_option("--metric", ev.metric, "Constituent extraction variant")
      ->check(CLI::IsMember({"original", "rst"}));
  eval_cmd->add_flag("--buckets", ev.buckets, "Break scores down by document length");
  eval_cmd->add_flag("--confusion", ev.confusion, "Print confusion matrices over matched spans");
  eval_cmd->add_flag("--include-root", ev.include_root, "Count the root constituent too");
  eval_cmd->add_flag("--json", ev.as_json, "Emit the report as JSON");
  eval_cmd->callback([&]() { rc = run_eval(ev); });

  CLI::App* render_cmd = app.add_subcommand("render", "Pretty-print one document's tree");
  RenderCli re;
  render_cmd->add_option("--corpus", re.corpus, "Corpus path")->required();
  render_cmd->add_option("--doc-id", re.doc_id, "Document to render")->required();
  render_cmd->callback([&]() { rc = run_render(re); });

  CLI::App* grad_cmd = app.add_subcommand("check-grad", "Finite-difference audit of gradients");
  CheckGradCli cg;
  grad_cmd->add_option("--seed", cg.seed, "Fixture seed");
  grad_cmd->add_option("--edus", cg.edus, "Fixture document length");
  grad_cmd->add_option("--tolerance", cg.tolerance, "Relative error bound");
  grad_cmd->add_option("--max-coords", cg.max_coords,
                       "Coordinates sampled per tensor (0 checks all)");
  grad_cmd->callback([&]() { rc = run_check_grad(cg); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return rc;
}
