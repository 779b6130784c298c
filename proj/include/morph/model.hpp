#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "morph/corpus.hpp"
#include "morph/crf/decoder.hpp"
#include "morph/encoder.hpp"
#include "morph/polyglot.hpp"
#include "morph/schema.hpp"

namespace morph {

struct ModelConfig {
  EncoderConfig encoder;
  bool decode_pos = true;     // false when a separate tagger supplies POS
  bool use_sentinels = false;
  bool polyglot = false;
  bool polyglot_concat = false;
  std::size_t polyglot_width = 20;

  void validate() const;
  std::size_t decoder_width() const;
  std::map<std::string, std::string> to_map() const;
  static ModelConfig from_map(const std::map<std::string, std::string>& kv);
};

// A hierarchical encoder with one CRF per decoded dimension.
template <typename T>
class Tagger {
 public:
  struct Prediction {
    std::vector<MorphAnnotation> tokens;     // total over the schema
    std::vector<num::Tensor<T>> attention;   // one matrix per encoded token, sentinels included
  };

  static Tagger create(const ModelConfig& cfg, FeatureSchema schema, Vocabulary vocab, TypologyTable typology,
                       std::uint64_t seed);
  // Binds to parameters already present in `store` (checkpoint loading).
  static Tagger attach(const ModelConfig& cfg, FeatureSchema schema, Vocabulary vocab, TypologyTable typology,
                       num::ParameterStore<T> store);

  Tagger(Tagger&&) = default;
  Tagger& operator=(Tagger&&) = default;

  const ModelConfig& config() const { return cfg_; }
  const FeatureSchema& schema() const { return schema_; }
  const Vocabulary& vocabulary() const { return vocab_; }
  const TypologyTable& typology() const { return typology_; }
  num::ParameterStore<T>& params() { return *params_; }
  const num::ParameterStore<T>& params() const { return *params_; }
  const crf::DecoderBank<T>& decoders() const { return bank_; }
  const std::vector<std::string>& decoded_dimensions() const { return decoded_; }

  SequenceInput input(const Sentence& sentence) const;
  // gold[f][t] for every decoder.
  std::vector<std::vector<std::size_t>> gold(const Sentence& sentence) const;
  // Decoder inputs [n, decoder_width] for the real tokens.
  num::Var features(num::Graph<T>& g, const Sentence& sentence, std::vector<num::Tensor<T>>* attention = nullptr) const;
  num::Var loss(num::Graph<T>& g, const Sentence& sentence) const;

  Prediction predict(const Sentence& sentence, bool trace = false) const;
  std::vector<std::string> predict_tags(const Sentence& sentence) const;

 private:
  Tagger() = default;
  void bind();

  ModelConfig cfg_;
  FeatureSchema schema_;
  Vocabulary vocab_;
  TypologyTable typology_;
  std::unique_ptr<num::ParameterStore<T>> params_;
  Encoder<T> encoder_;
  crf::DecoderBank<T> bank_;
  std::optional<PolyglotProjection<T>> polyglot_;
  std::vector<std::string> decoded_;
};

// Analysis restricted to the dimensions a schema covers, without nulls.
MorphAnnotation restrict_to(const MorphAnnotation& a, const FeatureSchema& schema);

extern template class Tagger<float>;
extern template class Tagger<double>;

}  // namespace morph
