#include "rstdp/encoder.hpp"

#include "rstdp/errors.hpp"

namespace rstdp {

void EncoderConfig::validate() const {
  if (word_dim < 1 || pos_dim < 1 || edu_type_dim < 1 || rnn_hidden < 1) {
    throw ConfigError("encoder dimensions must be positive");
  }
  if (use_syntax && syntax_dim < 1) {
    throw ConfigError("syntax_dim must be positive when use_syntax is set");
  }
  if (max_edu_tokens < 0) throw ConfigError("max_edu_tokens must be >= 0");
}

Encoder::Encoder(ParameterStore& store, const std::string& prefix, Vocabulary vocab,
                 EncoderConfig config, const EmbeddingTable* pretrained_words,
                 std::mt19937_64& rng)
    : vocab_(std::move(vocab)), config_(config) {
  config_.validate();
  if (vocab_.words.empty() || vocab_.pos_tags.empty()) {
    throw ConfigError("encoder needs non-empty word and POS vocabularies");
  }

  long n_words = static_cast<long>(vocab_.words.size());
  long n_pos = static_cast<long>(vocab_.pos_tags.size());
  word_emb_ = &store.create(prefix + ".word_emb", {n_words, config_.word_dim});
  init_glorot(*word_emb_, n_words, config_.word_dim, rng);
  pos_emb_ = &store.create(prefix + ".pos_emb", {n_pos, config_.pos_dim});
  init_glorot(*pos_emb_, n_pos, config_.pos_dim, rng);
  type_emb_ = &store.create(prefix + ".type_emb", {2, config_.edu_type_dim});
  init_glorot(*type_emb_, 2, config_.edu_type_dim, rng);

  if (pretrained_words != nullptr) {
    if (pretrained_words->dimension() != config_.word_dim) {
      throw ConfigError("pretrained embeddings have dimension " +
                        std::to_string(pretrained_words->dimension()) + ", config expects " +
                        std::to_string(config_.word_dim));
    }
    for (long w = 0; w < n_words; ++w) {
      const std::vector<double>& vec = pretrained_words->lookup(vocab_.words[static_cast<std::size_t>(w)]);
      for (int d = 0; d < config_.word_dim; ++d) {
        word_emb_->value.at(w, d) = vec[static_cast<std::size_t>(d)];
      }
    }
  }

  token_lstm_ =
      make_bilstm(store, prefix + ".lstm_tok", config_.word_dim + config_.pos_dim,
                  config_.rnn_hidden, rng);
  if (config_.use_syntax) {
    syntax_lstm_ =
        make_bilstm(store, prefix + ".lstm_syn", config_.syntax_dim, config_.rnn_hidden, rng);
  }
  document_lstm_ =
      make_bilstm(store, prefix + ".lstm_doc", config_.edu_dim(), config_.rnn_hidden, rng);
}

Value Encoder::encode_edu(Graph& g, const std::string& doc_id, const EDU& edu,
                          const ExternalFeatures* feats) const {
  if (edu.tokens.empty()) throw ArgumentError("cannot encode an EDU without tokens");
  long n_tokens = static_cast<long>(edu.tokens.size());
  if (config_.max_edu_tokens > 0 && n_tokens > config_.max_edu_tokens) {
    n_tokens = config_.max_edu_tokens;
  }

  std::vector<Value> xs;
  xs.reserve(static_cast<std::size_t>(n_tokens));
  for (long i = 0; i < n_tokens; ++i) {
    auto k = static_cast<std::size_t>(i);
    Value w = g.row(g.param(*word_emb_), vocab_.word_id(edu.tokens[k]));
    Value p = g.row(g.param(*pos_emb_), vocab_.pos_id(edu.pos_tags[k]));
    xs.push_back(g.concat({w, p}));
  }
  Value pooled_tokens = g.mean(bidirectional_encode(g, token_lstm_, xs));

  std::vector<Value> parts{pooled_tokens};
  if (config_.use_syntax) {
    if (feats == nullptr) {
      throw ConfigError("use_syntax is set but no external features were supplied");
    }
    std::vector<Value> ss;
    ss.reserve(static_cast<std::size_t>(n_tokens));
    for (long i = 0; i < n_tokens; ++i) {
      const std::vector<double>* vec = feats->find(doc_id, edu.index, static_cast<int>(i));
      if (vec == nullptr) {
        throw ConfigError("missing syntax features for document '" + doc_id + "' EDU " +
                          std::to_string(edu.index) + " token " + std::to_string(i));
      }
      if (static_cast<int>(vec->size()) != config_.syntax_dim) {
        throw ConfigError("syntax features have dimension " + std::to_string(vec->size()) +
                          ", config expects " + std::to_string(config_.syntax_dim));
      }
      ss.push_back(g.constant(Tensor::vector(*vec)));
    }
    parts.push_back(g.mean(bidirectional_encode(g, syntax_lstm_, ss)));
  }

  long type_row = 0;
  if (config_.use_paragraph_feature) type_row = edu.paragraph_final ? 1 : 0;
  parts.push_back(g.row(g.param(*type_emb_), type_row));
  return g.concat(parts);
}

std::vector<Value> Encoder::encode_document(Graph& g, const Document& doc,
                                            const ExternalFeatures* feats,
                                            double dropout_p) const {
  if (doc.edus.empty()) throw ArgumentError("cannot encode an empty document");
  std::vector<Value> gs;
  gs.reserve(doc.edus.size());
  for (const EDU& edu : doc.edus) {
    Value gv = encode_edu(g, doc.doc_id, edu, feats);
    gs.push_back(g.dropout(gv, dropout_p));
  }
  ++document_encode_count_;
  return bidirectional_encode(g, document_lstm_, gs);
}

}  // namespace rstdp
