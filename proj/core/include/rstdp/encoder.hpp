#pragma once

#include <random>
#include <string>

#include "rstdp/autodiff.hpp"
#include "rstdp/corpus.hpp"
#include "rstdp/layers.hpp"

namespace rstdp {

struct EncoderConfig {
  int word_dim = 200;
  int pos_dim = 200;
  int edu_type_dim = 100;
  int syntax_dim = 1200;
  int rnn_hidden = 256;  // hidden size per direction of the three BiLSTMs
  bool use_syntax = false;
  bool use_paragraph_feature = true;
  int max_edu_tokens = 0;  // 0 keeps every token

  /// Dimension of the pooled per-EDU vector g.
  int edu_dim() const {
    return 2 * rnn_hidden * (use_syntax ? 2 : 1) + edu_type_dim;
  }
  /// Dimension of the document-contextualized vector h.
  int context_dim() const { return 2 * rnn_hidden; }

  void validate() const;
};

/// Turns EDUs into pooled vectors g and document-contextualized vectors h.
/// Token and POS embeddings feed a token-level BiLSTM whose states are
/// average-pooled and joined with an EDU-type embedding (and, optionally,
/// pooled external syntax features run through their own BiLSTM); a
/// document-level BiLSTM then contextualizes the per-EDU vectors in one
/// pass per document.
class Encoder {
 public:
  Encoder(ParameterStore& store, const std::string& prefix, Vocabulary vocab, EncoderConfig config,
          const EmbeddingTable* pretrained_words, std::mt19937_64& rng);

  const EncoderConfig& config() const { return config_; }
  const Vocabulary& vocab() const { return vocab_; }

  /// Pooled vector g for one EDU. feats may be null unless use_syntax.
  Value encode_edu(Graph& g, const std::string& doc_id, const EDU& edu,
                   const ExternalFeatures* feats) const;

  /// Contextualized vectors h for the whole document, computed in one
  /// BiLSTM pass. dropout_p applies to the document-BiLSTM inputs when the
  /// graph is in training mode.
  std::vector<Value> encode_document(Graph& g, const Document& doc, const ExternalFeatures* feats,
                                     double dropout_p = 0.0) const;

  /// Number of encode_document calls, for tests asserting one pass per doc.
  long document_encode_count() const { return document_encode_count_; }

 private:
  Vocabulary vocab_;
  EncoderConfig config_;
  Parameter* word_emb_ = nullptr;
  Parameter* pos_emb_ = nullptr;
  Parameter* type_emb_ = nullptr;
  BiLstm token_lstm_;
  BiLstm syntax_lstm_;
  BiLstm document_lstm_;
  mutable long document_encode_count_ = 0;
};

}  // namespace rstdp
