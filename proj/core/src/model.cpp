#include "rstdp/model.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "rstdp/errors.hpp"

namespace rstdp {

namespace {

constexpr char kMagic[8] = {'R', 'S', 'T', 'D', 'P', 'C', 'K', '\0'};
constexpr std::uint32_t kVersion = 1;

nlohmann::json config_to_json(const ModelConfig& c) {
  return nlohmann::json{
      {"word_dim", c.encoder.word_dim},
      {"pos_dim", c.encoder.pos_dim},
      {"edu_type_dim", c.encoder.edu_type_dim},
      {"syntax_dim", c.encoder.syntax_dim},
      {"rnn_hidden", c.encoder.rnn_hidden},
      {"use_syntax", c.encoder.use_syntax},
      {"use_paragraph_feature", c.encoder.use_paragraph_feature},
      {"max_edu_tokens", c.encoder.max_edu_tokens},
      {"seg_hidden", c.seg_hidden},
      {"mlp_hidden", c.mlp_hidden},
      {"init_seed", c.init_seed},
  };
}

ModelConfig config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  c.encoder.word_dim = j.at("word_dim").get<int>();
  c.encoder.pos_dim = j.at("pos_dim").get<int>();
  c.encoder.edu_type_dim = j.at("edu_type_dim").get<int>();
  c.encoder.syntax_dim = j.at("syntax_dim").get<int>();
  c.encoder.rnn_hidden = j.at("rnn_hidden").get<int>();
  c.encoder.use_syntax = j.at("use_syntax").get<bool>();
  c.encoder.use_paragraph_feature = j.at("use_paragraph_feature").get<bool>();
  c.encoder.max_edu_tokens = j.at("max_edu_tokens").get<int>();
  c.seg_hidden = j.at("seg_hidden").get<int>();
  c.mlp_hidden = j.at("mlp_hidden").get<int>();
  c.init_seed = j.at("init_seed").get<std::uint64_t>();
  return c;
}

Vocabulary vocab_from_json(const nlohmann::json& j) {
  Vocabulary v;
  v.words = j.at("words").get<std::vector<std::string>>();
  v.pos_tags = j.at("pos_tags").get<std::vector<std::string>>();
  v.relations = j.at("relations").get<std::vector<std::string>>();
  for (std::size_t i = 0; i < v.words.size(); ++i) v.word_index[v.words[i]] = static_cast<int>(i);
  for (std::size_t i = 0; i < v.pos_tags.size(); ++i) {
    v.pos_index[v.pos_tags[i]] = static_cast<int>(i);
  }
  for (std::size_t i = 0; i < v.relations.size(); ++i) {
    v.relation_index[v.relations[i]] = static_cast<int>(i);
  }
  return v;
}

template <typename T>
void write_raw(std::ostream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_raw(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw DataError("checkpoint is truncated");
  return value;
}

}  // namespace

void ModelConfig::validate() const {
  encoder.validate();
  if (seg_hidden < 1) throw ConfigError("seg_hidden must be positive");
  if (mlp_hidden < 1) throw ConfigError("mlp_hidden must be positive");
}

ParserModel::ParserModel(Vocabulary vocab, ModelConfig config,
                         const EmbeddingTable* pretrained_words)
    : config_(config) {
  config_.validate();
  if (vocab.relations.empty()) throw ConfigError("model needs at least one relation label");
  std::mt19937_64 rng(config_.init_seed);
  encoder_ = std::make_unique<Encoder>(store_, "enc", std::move(vocab), config_.encoder,
                                       pretrained_words, rng);
  segment_lstm_ =
      make_bilstm(store_, "seg.lstm", config_.encoder.context_dim(), config_.seg_hidden, rng);
  split_head_ = make_mlp(store_, "split_head", 2 * config_.seg_hidden, config_.mlp_hidden, 1, rng);
  label_head_ = make_mlp(store_, "label_head", 4 * config_.seg_hidden, config_.mlp_hidden,
                         joint_class_count(), rng);
}

int ParserModel::joint_class_index(const NucRel& label) const {
  return static_cast<int>(label.nuc) * relation_count() + vocab().relation_id(label.relation);
}

NucRel ParserModel::decode_joint_class(int index) const {
  if (index < 0 || index >= joint_class_count()) {
    throw ArgumentError("joint class index " + std::to_string(index) + " out of range [0, " +
                        std::to_string(joint_class_count()) + ")");
  }
  int r = relation_count();
  return NucRel{static_cast<Nuclearity>(index / r),
                vocab().relations[static_cast<std::size_t>(index % r)]};
}

void ParserModel::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  save(out);
  if (!out) throw DataError("failed writing checkpoint to '" + path + "'");
}

void ParserModel::save(std::ostream& out) const {
  nlohmann::json header;
  header["config"] = config_to_json(config_);
  header["vocab"] = nlohmann::json{
      {"words", vocab().words},
      {"pos_tags", vocab().pos_tags},
      {"relations", vocab().relations},
  };
  nlohmann::json params = nlohmann::json::array();
  std::vector<const Parameter*> all = store_.all();
  for (const Parameter* p : all) {
    params.push_back(nlohmann::json{{"name", p->name}, {"shape", p->value.shape}});
  }
  header["params"] = std::move(params);

  std::string header_bytes = header.dump();
  out.write(kMagic, sizeof(kMagic));
  write_raw(out, kVersion);
  write_raw(out, static_cast<std::uint64_t>(header_bytes.size()));
  out.write(header_bytes.data(), static_cast<std::streamsize>(header_bytes.size()));
  for (const Parameter* p : all) {
    out.write(reinterpret_cast<const char*>(p->value.data.data()),
              static_cast<std::streamsize>(p->value.data.size() * sizeof(double)));
  }
}

ParserModel ParserModel::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint '" + path + "'");
  return load(in);
}

ParserModel ParserModel::load(std::istream& in) {
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw DataError("not a parser checkpoint (bad magic)");
  }
  auto version = read_raw<std::uint32_t>(in);
  if (version != kVersion) {
    throw DataError("unsupported checkpoint version " + std::to_string(version));
  }
  auto header_len = read_raw<std::uint64_t>(in);
  std::string header_bytes(header_len, '\0');
  in.read(header_bytes.data(), static_cast<std::streamsize>(header_len));
  if (!in) throw DataError("checkpoint is truncated");

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(header_bytes);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("corrupt checkpoint header: ") + e.what());
  }

  ParserModel model(vocab_from_json(header.at("vocab")),
                    config_from_json(header.at("config")));
  std::vector<Parameter*> all = model.store_.all();
  const nlohmann::json& params = header.at("params");
  if (params.size() != all.size()) {
    throw DataError("checkpoint stores " + std::to_string(params.size()) +
                    " tensors, model has " + std::to_string(all.size()));
  }
  for (const nlohmann::json& entry : params) {
    auto name = entry.at("name").get<std::string>();
    auto shape = entry.at("shape").get<std::vector<long>>();
    Parameter* p = model.store_.find(name);
    if (p == nullptr) throw DataError("checkpoint has unknown tensor '" + name + "'");
    if (p->value.shape != shape) {
      throw DataError("shape mismatch for tensor '" + name + "': checkpoint has " +
                      Tensor(shape).shape_string() + ", model has " + p->value.shape_string());
    }
    in.read(reinterpret_cast<char*>(p->value.data.data()),
            static_cast<std::streamsize>(p->value.data.size() * sizeof(double)));
    if (!in) throw DataError("checkpoint is truncated");
  }
  return model;
}

}  // namespace rstdp
