#include "rstdp/corpus.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "rstdp/errors.hpp"
#include "rstdp/rng.hpp"

namespace rstdp {

using nlohmann::json;

void validate_document(const Document& doc) {
  auto fail = [&](const std::string& what) {
    throw ValidationError("document '" + doc.doc_id + "': " + what);
  };
  if (doc.doc_id.empty()) throw ValidationError("document has empty doc_id");
  if (doc.edus.empty()) fail("no EDUs");
  for (int i = 0; i < doc.edu_count(); ++i) {
    const EDU& e = doc.edus[i];
    if (e.index != i + 1) {
      fail("EDU at position " + std::to_string(i) + " has index " + std::to_string(e.index));
    }
    if (e.tokens.empty()) fail("EDU " + std::to_string(e.index) + " has no tokens");
    if (e.pos_tags.size() != e.tokens.size()) {
      fail("EDU " + std::to_string(e.index) + " has " + std::to_string(e.tokens.size()) +
           " tokens but " + std::to_string(e.pos_tags.size()) + " POS tags");
    }
  }
  if (doc.has_gold()) {
    if (doc.gold.start() != 1 || doc.gold.end() != doc.edu_count()) {
      fail("gold tree spans (" + std::to_string(doc.gold.start()) + "," +
           std::to_string(doc.gold.end()) + ") but document has " +
           std::to_string(doc.edu_count()) + " EDUs");
    }
  }
}

namespace {

NaryTree tree_from_json(const json& j) {
  if (!j.is_array() || j.size() < 2) {
    throw ParseError("tree node must be an array of at least 2 elements");
  }
  if (!j[0].is_string()) throw ParseError("tree node must start with a string");
  std::string head = j[0].get<std::string>();
  if (head == "leaf") {
    if (j.size() != 2 || !j[1].is_number_integer()) {
      throw ParseError("leaf node must be [\"leaf\", index]");
    }
    return NaryTree::leaf(j[1].get<int>());
  }
  if (j.size() < 4 || !j[1].is_string()) {
    throw ParseError("internal node must be [statuses, relation, child, child, ...]");
  }
  std::vector<NaryTree> children;
  for (std::size_t i = 2; i < j.size(); ++i) children.push_back(tree_from_json(j[i]));
  return NaryTree::node(head, j[1].get<std::string>(), std::move(children));
}

json tree_to_json(const RSTTree& t) {
  if (t.is_leaf()) return json::array({"leaf", t.edu_index()});
  return json::array(
      {to_string(t.nuclearity()), t.relation(), tree_to_json(t.left()), tree_to_json(t.right())});
}

Document document_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("record must be an object");
  Document doc;
  if (!j.contains("doc_id") || !j.at("doc_id").is_string()) {
    throw ParseError("record needs a string doc_id");
  }
  doc.doc_id = j.at("doc_id").get<std::string>();
  if (!j.contains("edus") || !j.at("edus").is_array()) {
    throw ParseError("record needs an edus array");
  }
  int index = 0;
  for (const json& je : j.at("edus")) {
    if (!je.is_object()) throw ParseError("edu entry must be an object");
    EDU edu;
    edu.index = ++index;
    if (!je.contains("tokens") || !je.at("tokens").is_array()) {
      throw ParseError("edu needs a tokens array");
    }
    for (const json& t : je.at("tokens")) edu.tokens.push_back(t.get<std::string>());
    if (!je.contains("pos") || !je.at("pos").is_array()) {
      throw ParseError("edu needs a pos array");
    }
    for (const json& t : je.at("pos")) edu.pos_tags.push_back(t.get<std::string>());
    edu.paragraph_final = je.value("para_final", false);
    edu.sentence_final = je.value("sent_final", false);
    doc.edus.push_back(std::move(edu));
  }
  if (j.contains("gold") && !j.at("gold").is_null()) {
    doc.gold = binarize_right_heavy(tree_from_json(j.at("gold")));
  }
  return doc;
}

json document_to_json(const Document& doc) {
  json j;
  j["doc_id"] = doc.doc_id;
  json edus = json::array();
  for (const EDU& e : doc.edus) {
    json je;
    je["tokens"] = e.tokens;
    je["pos"] = e.pos_tags;
    je["para_final"] = e.paragraph_final;
    je["sent_final"] = e.sentence_final;
    edus.push_back(std::move(je));
  }
  j["edus"] = std::move(edus);
  if (doc.has_gold()) j["gold"] = tree_to_json(doc.gold);
  return j;
}

}  // namespace

std::vector<Document> read_corpus(std::istream& in) {
  std::vector<Document> docs;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw ParseError(std::string("invalid record: ") + e.what(), line_no);
    }
    Document doc;
    try {
      doc = document_from_json(j);
    } catch (const ParseError& e) {
      throw ParseError(e.bare_message(), line_no);
    } catch (const json::exception& e) {
      throw ParseError(std::string("invalid record: ") + e.what(), line_no);
    }
    validate_document(doc);
    docs.push_back(std::move(doc));
  }
  return docs;
}

std::vector<Document> read_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open corpus file: " + path);
  return read_corpus(in);
}

void write_corpus(const std::vector<Document>& docs, std::ostream& out) {
  for (const Document& doc : docs) {
    validate_document(doc);
    out << document_to_json(doc).dump() << '\n';
  }
}

void write_corpus(const std::vector<Document>& docs, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open corpus file for writing: " + path);
  write_corpus(docs, out);
}

std::vector<Prediction> read_predictions(std::istream& in) {
  std::vector<Prediction> preds;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw ParseError(std::string("invalid record: ") + e.what(), line_no);
    }
    try {
      if (!j.is_object() || !j.contains("doc_id") || !j.at("doc_id").is_string()) {
        throw ParseError("record needs a string doc_id");
      }
      Prediction p;
      p.doc_id = j.at("doc_id").get<std::string>();
      // Corpus files double as predictions through their gold field.
      const char* key = j.contains("tree") ? "tree" : "gold";
      if (!j.contains(key) || j.at(key).is_null()) {
        throw ParseError("record for '" + p.doc_id + "' has no tree");
      }
      p.tree = binarize_right_heavy(tree_from_json(j.at(key)));
      preds.push_back(std::move(p));
    } catch (const ParseError& e) {
      throw ParseError(e.bare_message(), line_no);
    }
  }
  return preds;
}

std::vector<Prediction> read_predictions(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open predictions file: " + path);
  return read_predictions(in);
}

void write_predictions(const std::vector<Prediction>& preds, std::ostream& out) {
  for (const Prediction& p : preds) {
    json j;
    j["doc_id"] = p.doc_id;
    j["tree"] = tree_to_json(p.tree);
    out << j.dump() << '\n';
  }
}

void write_predictions(const std::vector<Prediction>& preds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open predictions file for writing: " + path);
  write_predictions(preds, out);
}

EmbeddingTable::EmbeddingTable(int dimension) : dimension_(dimension) {
  if (dimension < 1) throw ArgumentError("embedding dimension must be positive");
  unk_.assign(dimension, 0.0);
}

bool EmbeddingTable::contains(const std::string& token) const {
  return index_.find(token) != index_.end();
}

const std::vector<double>& EmbeddingTable::lookup(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? unk_ : rows_[it->second];
}

void EmbeddingTable::insert(const std::string& token, std::vector<double> vec) {
  if (static_cast<int>(vec.size()) != dimension_) {
    throw ShapeError("embedding for '" + token + "' has dimension " +
                     std::to_string(vec.size()) + ", table expects " + std::to_string(dimension_));
  }
  auto it = index_.find(token);
  if (it != index_.end()) {
    rows_[it->second] = std::move(vec);
  } else {
    index_.emplace(token, static_cast<int>(rows_.size()));
    rows_.push_back(std::move(vec));
  }
}

void EmbeddingTable::finalize_unk() {
  unk_.assign(dimension_, 0.0);
  if (rows_.empty()) return;
  for (const auto& row : rows_) {
    for (int i = 0; i < dimension_; ++i) unk_[i] += row[i];
  }
  for (int i = 0; i < dimension_; ++i) unk_[i] /= static_cast<double>(rows_.size());
}

EmbeddingTable load_embeddings(const std::string& path, int dimension,
                               std::vector<std::string>* warnings) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open embedding file: " + path);
  EmbeddingTable table(dimension);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ss(line);
    std::string token;
    ss >> token;
    std::vector<double> vec;
    vec.reserve(dimension);
    double v;
    while (ss >> v) vec.push_back(v);
    if (static_cast<int>(vec.size()) != dimension) {
      throw ParseError("expected " + std::to_string(dimension) + " values for '" + token +
                           "', got " + std::to_string(vec.size()),
                       line_no);
    }
    if (table.contains(token)) {
      std::string msg = "line " + std::to_string(line_no) + ": duplicate token '" + token +
                        "', keeping the later vector";
      if (warnings) {
        warnings->push_back(msg);
      } else {
        std::cerr << "warning: " << path << ": " << msg << '\n';
      }
    }
    table.insert(token, std::move(vec));
  }
  table.finalize_unk();
  return table;
}

namespace {

std::string feature_key(const std::string& doc_id, int edu_index, int token_index) {
  return doc_id + '\x1f' + std::to_string(edu_index) + '\x1f' + std::to_string(token_index);
}

}  // namespace

void ExternalFeatures::insert(const std::string& doc_id, int edu_index, int token_index,
                              std::vector<double> vec) {
  if (dimension_ == 0) {
    dimension_ = static_cast<int>(vec.size());
    if (dimension_ == 0) throw ArgumentError("external feature vector is empty");
  } else if (static_cast<int>(vec.size()) != dimension_) {
    throw ShapeError("external feature dimension " + std::to_string(vec.size()) +
                     " does not match table dimension " + std::to_string(dimension_));
  }
  table_[feature_key(doc_id, edu_index, token_index)] = std::move(vec);
}

const std::vector<double>* ExternalFeatures::find(const std::string& doc_id, int edu_index,
                                                  int token_index) const {
  auto it = table_.find(feature_key(doc_id, edu_index, token_index));
  return it == table_.end() ? nullptr : &it->second;
}

ExternalFeatures load_external_features(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open external feature file: " + path);
  ExternalFeatures feats;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ss(line);
    std::string doc_id;
    int edu_index = 0, token_index = 0;
    if (!(ss >> doc_id >> edu_index >> token_index)) {
      throw ParseError("expected 'doc_id edu_index token_index v1 ...'", line_no);
    }
    std::vector<double> vec;
    double v;
    while (ss >> v) vec.push_back(v);
    if (vec.empty()) throw ParseError("no feature values", line_no);
    try {
      feats.insert(doc_id, edu_index, token_index, std::move(vec));
    } catch (const ShapeError& e) {
      throw ParseError(e.what(), line_no);
    }
  }
  return feats;
}

int Vocabulary::word_id(const std::string& w) const {
  auto it = word_index.find(w);
  return it == word_index.end() ? 0 : it->second;
}

int Vocabulary::pos_id(const std::string& p) const {
  auto it = pos_index.find(p);
  return it == pos_index.end() ? 0 : it->second;
}

int Vocabulary::relation_id(const std::string& r) const {
  auto it = relation_index.find(r);
  if (it == relation_index.end()) throw DataError("unknown relation '" + r + "'");
  return it->second;
}

namespace {

void collect_relations(const RSTTree& t, std::set<std::string>& out) {
  if (t.is_leaf()) return;
  out.insert(t.relation());
  collect_relations(t.left(), out);
  collect_relations(t.right(), out);
}

}  // namespace

Vocabulary build_vocabulary(const std::vector<Document>& docs) {
  std::set<std::string> words, pos, rels;
  for (const Document& doc : docs) {
    for (const EDU& e : doc.edus) {
      words.insert(e.tokens.begin(), e.tokens.end());
      pos.insert(e.pos_tags.begin(), e.pos_tags.end());
    }
    if (doc.has_gold()) collect_relations(doc.gold, rels);
  }
  words.erase("<unk>");
  pos.erase("<unk>");
  Vocabulary vocab;
  vocab.words.push_back("<unk>");
  vocab.words.insert(vocab.words.end(), words.begin(), words.end());
  vocab.pos_tags.push_back("<unk>");
  vocab.pos_tags.insert(vocab.pos_tags.end(), pos.begin(), pos.end());
  vocab.relations.assign(rels.begin(), rels.end());
  for (int i = 0; i < static_cast<int>(vocab.words.size()); ++i) {
    vocab.word_index[vocab.words[i]] = i;
  }
  for (int i = 0; i < static_cast<int>(vocab.pos_tags.size()); ++i) {
    vocab.pos_index[vocab.pos_tags[i]] = i;
  }
  for (int i = 0; i < static_cast<int>(vocab.relations.size()); ++i) {
    vocab.relation_index[vocab.relations[i]] = i;
  }
  return vocab;
}

const std::vector<std::string>& synthetic_relations() {
  static const std::vector<std::string> kRelations = {
      "attribution", "background", "cause",       "comparison",  "condition",  "contrast",
      "elaboration", "enablement", "evaluation",  "explanation", "joint",      "manner-means",
      "same-unit",   "summary",    "temporal",    "textual-org", "topic-change", "topic-comment"};
  return kRelations;
}

namespace {

// tree_counts()[n] is the number of distinct binary tree shapes over n leaves.
const std::vector<long double>& tree_counts() {
  static const std::vector<long double> kTable = [] {
    std::vector<long double> t(257, 0.0L);
    t[1] = 1.0L;
    for (int n = 2; n <= 256; ++n) {
      long double s = 0.0L;
      for (int k = 1; k < n; ++k) s += t[k] * t[n - k];
      t[n] = s;
    }
    return t;
  }();
  return kTable;
}

RSTTree random_subtree(std::mt19937_64& rng, int m, int n,
                       const std::vector<std::string>& relations) {
  if (m == n) return RSTTree::leaf(m);
  const auto& counts = tree_counts();
  int len = n - m + 1;
  // choose the split so every shape of the whole subtree is equally likely
  long double u = static_cast<long double>(uniform_unit(rng)) * counts[len];
  int split = n - 1;
  long double acc = 0.0L;
  for (int k = m; k < n; ++k) {
    acc += counts[k - m + 1] * counts[n - k];
    if (u < acc) {
      split = k;
      break;
    }
  }
  Nuclearity nuc = static_cast<Nuclearity>(uniform_int(rng, 0, 2));
  const std::string& rel = relations[uniform_int(rng, 0, static_cast<int>(relations.size()) - 1)];
  RSTTree left = random_subtree(rng, m, split, relations);
  RSTTree right = random_subtree(rng, split + 1, n, relations);
  return RSTTree::internal(std::move(left), std::move(right), nuc, rel);
}

void collect_split_depths(const RSTTree& t, int depth, std::vector<int>& depth_at) {
  if (t.is_leaf()) return;
  depth_at[t.left().end() - 1] = depth;
  collect_split_depths(t.left(), depth + 1, depth_at);
  collect_split_depths(t.right(), depth + 1, depth_at);
}

void collect_right_ends(const RSTTree& t, std::set<int>& out) {
  if (t.is_leaf()) return;
  out.insert(t.right().end());
  collect_right_ends(t.left(), out);
  collect_right_ends(t.right(), out);
}

}  // namespace

RSTTree random_binary_tree(std::mt19937_64& rng, int q, const std::vector<std::string>& relations) {
  if (q < 1) throw ArgumentError("tree needs at least one EDU");
  if (q > 256) throw ArgumentError("tree shape sampling supports at most 256 EDUs");
  if (relations.empty()) throw ArgumentError("relation inventory is empty");
  return random_subtree(rng, 1, q, relations);
}

std::vector<Document> generate_synthetic(const SyntheticConfig& cfg) {
  if (cfg.q_min < 2) throw ArgumentError("q_min must be at least 2");
  if (cfg.q_max < cfg.q_min) throw ArgumentError("q_max must be >= q_min");
  if (cfg.n_docs < 0) throw ArgumentError("n_docs must be non-negative");
  if (cfg.q_max > 256) throw ArgumentError("q_max must be at most 256");

  const auto& relations = synthetic_relations();
  std::vector<Document> docs;
  docs.reserve(cfg.n_docs);
  for (int d = 0; d < cfg.n_docs; ++d) {
    std::mt19937_64 rng(derive_seed(cfg.seed, {0x646f63ULL, static_cast<std::uint64_t>(d)}));
    int q = uniform_int(rng, cfg.q_min, cfg.q_max);

    Document doc;
    char buf[16];
    std::snprintf(buf, sizeof(buf), "syn%04d", d);
    doc.doc_id = buf;
    doc.gold = random_binary_tree(rng, q, relations);

    CanonicalOrder order = tree_to_order(doc.gold);
    std::vector<int> depth_at(q, -1);
    collect_split_depths(doc.gold, 0, depth_at);
    std::set<int> right_ends;
    collect_right_ends(doc.gold, right_ends);

    for (int i = 1; i <= q; ++i) {
      EDU edu;
      edu.index = i;
      if (i < q) {
        const NucRel& lbl = *order.label[i - 1];
        edu.tokens.push_back("cue_" + lbl.relation);
        edu.tokens.push_back("d" + std::to_string(depth_at[i - 1]));
        edu.tokens.push_back("n" + to_string(lbl.nuc));
      } else {
        edu.tokens.push_back("cue_end");
        edu.tokens.push_back("dx");
        edu.tokens.push_back("nx");
      }
      int fillers = uniform_int(rng, 0, 2);
      for (int f = 0; f < fillers; ++f) {
        edu.tokens.push_back("w" + std::to_string(uniform_int(rng, 0, 19)));
      }
      for (std::size_t t = 0; t < edu.tokens.size(); ++t) {
        edu.pos_tags.push_back("p" + std::to_string(uniform_int(rng, 0, 9)));
      }
      if (right_ends.count(i) != 0) {
        edu.paragraph_final = uniform_unit(rng) < 0.5;
      }
      edu.sentence_final = edu.paragraph_final || uniform_unit(rng) < 0.3;
      doc.edus.push_back(std::move(edu));
    }
    validate_document(doc);
    docs.push_back(std::move(doc));
  }
  return docs;
}

std::vector<Document> generate_synthetic(std::uint64_t seed, int n_docs, int q_min, int q_max) {
  SyntheticConfig cfg;
  cfg.seed = seed;
  cfg.n_docs = n_docs;
  cfg.q_min = q_min;
  cfg.q_max = q_max;
  return generate_synthetic(cfg);
}

}  // namespace rstdp
