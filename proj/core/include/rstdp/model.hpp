#pragma once

#include <iosfwd>
#include <memory>
#include <string>

#include "rstdp/encoder.hpp"

namespace rstdp {

struct ModelConfig {
  EncoderConfig encoder;
  int seg_hidden = 128;  // hidden size per direction of the segment BiLSTM
  int mlp_hidden = 128;  // hidden width of the split and label heads
  std::uint64_t init_seed = 1;

  void validate() const;
};

/// The full parser: encoder, segment-level BiLSTM, a sigmoid split head,
/// and a joint softmax head over (nuclearity × relation) classes.
class ParserModel {
 public:
  ParserModel(Vocabulary vocab, ModelConfig config,
              const EmbeddingTable* pretrained_words = nullptr);

  const ModelConfig& config() const { return config_; }
  const Vocabulary& vocab() const { return encoder_->vocab(); }
  ParameterStore& params() { return store_; }
  const ParameterStore& params() const { return store_; }
  const Encoder& encoder() const { return *encoder_; }
  Encoder& encoder() { return *encoder_; }
  const BiLstm& segment_lstm() const { return segment_lstm_; }
  const Mlp& split_head() const { return split_head_; }
  const Mlp& label_head() const { return label_head_; }

  int relation_count() const { return vocab().relation_count(); }
  /// K = 3 × |relations|, ordered nuclearity-major (NS, SN, NN).
  int joint_class_count() const { return 3 * relation_count(); }
  int joint_class_index(const NucRel& label) const;
  NucRel decode_joint_class(int index) const;

  void save(const std::string& path) const;
  void save(std::ostream& out) const;
  static ParserModel load(const std::string& path);
  static ParserModel load(std::istream& in);

 private:
  ModelConfig config_;
  ParameterStore store_;
  std::unique_ptr<Encoder> encoder_;
  BiLstm segment_lstm_;
  Mlp split_head_;
  Mlp label_head_;
};

}  // namespace rstdp
