#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "rstdp/tree.hpp"

namespace rstdp {

/// A document: EDUs 1..q plus an optional gold tree spanning all of them.
struct Document {
  std::string doc_id;
  std::vector<EDU> edus;
  RSTTree gold;  // empty when the corpus carries no annotation

  int edu_count() const { return static_cast<int>(edus.size()); }
  bool has_gold() const { return !gold.empty(); }
  bool operator==(const Document&) const = default;
};

/// Throws ValidationError unless doc_id is nonempty, EDUs are indexed 1..q
/// with aligned token/POS lists, and gold (if present) spans exactly (1,q).
void validate_document(const Document& doc);

/// Reads one structured record per line. Gold trees may be n-ary (one status
/// character per child); they are binarized on the way in. Throws ParseError
/// with the offending line number.
std::vector<Document> read_corpus(const std::string& path);
std::vector<Document> read_corpus(std::istream& in);

void write_corpus(const std::vector<Document>& docs, const std::string& path);
void write_corpus(const std::vector<Document>& docs, std::ostream& out);

/// One parsed tree per document, stored as `{"doc_id": ..., "tree": ...}`
/// lines with the same bracketed tree syntax as the corpus gold field.
struct Prediction {
  std::string doc_id;
  RSTTree tree;
};

std::vector<Prediction> read_predictions(const std::string& path);
std::vector<Prediction> read_predictions(std::istream& in);

void write_predictions(const std::vector<Prediction>& preds, const std::string& path);
void write_predictions(const std::vector<Prediction>& preds, std::ostream& out);

/// Token embedding lookup with a mean-vector fallback for unknown tokens.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  explicit EmbeddingTable(int dimension);

  int dimension() const { return dimension_; }
  int size() const { return static_cast<int>(rows_.size()); }
  bool contains(const std::string& token) const;

  /// Known token → its vector; unknown → the UNK vector.
  const std::vector<double>& lookup(const std::string& token) const;
  const std::vector<double>& unk() const { return unk_; }

  /// Re-inserting a token overwrites its vector.
  void insert(const std::string& token, std::vector<double> vec);

  /// Sets UNK to the componentwise mean of all stored vectors.
  void finalize_unk();

 private:
  int dimension_ = 0;
  std::unordered_map<std::string, int> index_;
  std::vector<std::vector<double>> rows_;
  std::vector<double> unk_;
};

/// Loads `token v1 … vD` lines. Duplicate tokens keep the last occurrence
/// and append a note to warnings (stderr when warnings is null).
EmbeddingTable load_embeddings(const std::string& path, int dimension,
                               std::vector<std::string>* warnings = nullptr);

/// Per-token external feature vectors keyed by (doc_id, edu_index,
/// token_index); EDU indices are 1-based, token indices 0-based.
class ExternalFeatures {
 public:
  int dimension() const { return dimension_; }
  std::size_t size() const { return table_.size(); }
  bool empty() const { return table_.empty(); }

  void insert(const std::string& doc_id, int edu_index, int token_index, std::vector<double> vec);
  const std::vector<double>* find(const std::string& doc_id, int edu_index, int token_index) const;

 private:
  int dimension_ = 0;
  std::unordered_map<std::string, std::vector<double>> table_;
};

/// Loads `doc_id edu_index token_index v1 … vD` lines; the dimension is
/// fixed by the first line.
ExternalFeatures load_external_features(const std::string& path);

/// Closed token/POS/relation inventories built from a corpus. Index 0 of the
/// word and POS lists is the unknown marker; relations are sorted and have
/// no unknown entry.
struct Vocabulary {
  std::vector<std::string> words;
  std::vector<std::string> pos_tags;
  std::vector<std::string> relations;
  std::unordered_map<std::string, int> word_index;
  std::unordered_map<std::string, int> pos_index;
  std::unordered_map<std::string, int> relation_index;

  int word_id(const std::string& w) const;  // 0 when unknown
  int pos_id(const std::string& p) const;   // 0 when unknown
  int relation_id(const std::string& r) const;  // throws DataError when unknown
  int relation_count() const { return static_cast<int>(relations.size()); }
};

Vocabulary build_vocabulary(const std::vector<Document>& docs);

/// The 18 relation labels used by the synthetic generator, sorted.
const std::vector<std::string>& synthetic_relations();

/// Uniformly random binary tree shape over EDUs 1..q (each shape equally
/// likely), with independent uniform relation and nuclearity draws per node.
RSTTree random_binary_tree(std::mt19937_64& rng, int q, const std::vector<std::string>& relations);

struct SyntheticConfig {
  std::uint64_t seed = 1;
  int n_docs = 20;
  int q_min = 5;
  int q_max = 12;
};

/// Deterministic synthetic corpus. Each EDU carries marker tokens that make
/// split and label decisions locally recoverable: the split EDU of a node
/// with relation r starts with cue_r, followed by a token encoding the
/// node's depth and one encoding its nuclearity, then filler tokens.
/// Paragraph-final flags are set at gold right-child boundaries with
/// probability 0.5.
std::vector<Document> generate_synthetic(const SyntheticConfig& cfg);
std::vector<Document> generate_synthetic(std::uint64_t seed, int n_docs, int q_min, int q_max);

}  // namespace rstdp
