#include "morph/model.hpp"

#include <memory>

#include "morph/error.hpp"
#include "morph/text.hpp"

namespace morph {

void ModelConfig::validate() const {
  encoder.validate();
  if (polyglot && polyglot_width == 0) throw ConfigError("polyglot width must be positive");
  if (!decode_pos && !encoder.use_pos) throw ConfigError("a model that does not decode POS must read it as input");
}

std::size_t ModelConfig::decoder_width() const {
  const std::size_t h = encoder.output_width();
  if (!polyglot) return h;
  return polyglot_concat ? h + h * polyglot_width : h * polyglot_width;
}

std::map<std::string, std::string> ModelConfig::to_map() const {
  auto b = [](bool v) { return std::string(v ? "1" : "0"); };
  return {
      {"encoder.char_emb", std::to_string(encoder.char_emb)},
      {"encoder.char_hidden", std::to_string(encoder.char_hidden)},
      {"encoder.word_emb", std::to_string(encoder.word_emb)},
      {"encoder.word_hidden", std::to_string(encoder.word_hidden)},
      {"encoder.pos_emb", std::to_string(encoder.pos_emb)},
      {"encoder.lang_emb", std::to_string(encoder.lang_emb)},
      {"encoder.dropout", text::format_real(encoder.dropout)},
      {"encoder.self_attention", b(encoder.self_attention)},
      {"encoder.use_pos", b(encoder.use_pos)},
      {"encoder.use_lang", b(encoder.use_lang)},
      {"decode_pos", b(decode_pos)},
      {"use_sentinels", b(use_sentinels)},
      {"polyglot", b(polyglot)},
      {"polyglot_concat", b(polyglot_concat)},
      {"polyglot_width", std::to_string(polyglot_width)},
  };
}

ModelConfig ModelConfig::from_map(const std::map<std::string, std::string>& kv) {
  auto get = [&kv](const std::string& key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) throw LoadError("model config lacks " + key);
    return it->second;
  };
  auto size = [&](const std::string& key) { return static_cast<std::size_t>(text::parse_int(get(key))); };
  auto flag = [&](const std::string& key) { return get(key) == "1"; };
  ModelConfig c;
  c.encoder.char_emb = size("encoder.char_emb");
  c.encoder.char_hidden = size("encoder.char_hidden");
  c.encoder.word_emb = size("encoder.word_emb");
  c.encoder.word_hidden = size("encoder.word_hidden");
  c.encoder.pos_emb = size("encoder.pos_emb");
  c.encoder.lang_emb = size("encoder.lang_emb");
  c.encoder.dropout = text::parse_real(get("encoder.dropout"));
  c.encoder.self_attention = flag("encoder.self_attention");
  c.encoder.use_pos = flag("encoder.use_pos");
  c.encoder.use_lang = flag("encoder.use_lang");
  c.decode_pos = flag("decode_pos");
  c.use_sentinels = flag("use_sentinels");
  c.polyglot = flag("polyglot");
  c.polyglot_concat = flag("polyglot_concat");
  c.polyglot_width = size("polyglot_width");
  c.validate();
  return c;
}

MorphAnnotation restrict_to(const MorphAnnotation& a, const FeatureSchema& schema) {
  MorphAnnotation out;
  for (const auto& [dim, value] : a) {
    if (value != kNullValue && schema.dimension_index(dim)) out.emplace(dim, value);
  }
  return out;
}

template <typename T>
Tagger<T> Tagger<T>::create(const ModelConfig& cfg, FeatureSchema schema, Vocabulary vocab, TypologyTable typology,
                            std::uint64_t seed) {
  cfg.validate();
  Tagger t;
  t.cfg_ = cfg;
  t.schema_ = std::move(schema);
  t.vocab_ = std::move(vocab);
  t.typology_ = std::move(typology);
  t.params_ = std::make_unique<num::ParameterStore<T>>();
  t.bind();
  num::Rng rng(seed);
  typename Encoder<T>::Sizes sizes;
  sizes.words = t.vocab_.word_count();
  sizes.chars = t.vocab_.char_count();
  sizes.pos_labels = t.schema_.labels(kPosDimension).size() + 1;
  sizes.languages = t.vocab_.language_count();
  t.encoder_ = Encoder<T>::create(*t.params_, cfg.encoder, sizes, rng);
  if (cfg.polyglot) {
    for (const auto& lang : t.vocab_.languages()) t.typology_.row(lang);
    t.polyglot_ = PolyglotProjection<T>::create(*t.params_, t.typology_, cfg.polyglot_width, rng);
  }
  t.bank_ = crf::DecoderBank<T>::create(*t.params_, t.schema_, t.decoded_, cfg.decoder_width(), rng);
  return t;
}

template <typename T>
Tagger<T> Tagger<T>::attach(const ModelConfig& cfg, FeatureSchema schema, Vocabulary vocab, TypologyTable typology,
                            num::ParameterStore<T> store) {
  cfg.validate();
  Tagger t;
  t.cfg_ = cfg;
  t.schema_ = std::move(schema);
  t.vocab_ = std::move(vocab);
  t.typology_ = std::move(typology);
  t.params_ = std::make_unique<num::ParameterStore<T>>(std::move(store));
  t.bind();
  t.encoder_ = Encoder<T>::attach(*t.params_, cfg.encoder);
  if (cfg.polyglot) t.polyglot_ = PolyglotProjection<T>::attach(*t.params_, t.typology_);
  t.bank_ = crf::DecoderBank<T>::attach(*t.params_, t.schema_, t.decoded_);
  if (t.bank_.size() > 0 && t.bank_[0].input_width() != cfg.decoder_width()) {
    throw LoadError("decoder width does not match the model configuration");
  }
  return t;
}

template <typename T>
void Tagger<T>::bind() {
  decoded_.clear();
  for (const auto& dim : schema_.dimensions()) {
    if (dim == kPosDimension && !cfg_.decode_pos) continue;
    decoded_.push_back(dim);
  }
  if (decoded_.empty()) throw ConfigError("the schema leaves no dimension to decode");
}

template <typename T>
SequenceInput Tagger<T>::input(const Sentence& sentence) const {
  if (sentence.tokens.empty()) throw ContractError("empty sentence");
  SequenceInput in;
  if (cfg_.encoder.use_lang) {
    auto lang = vocab_.language(sentence.language);
    if (!lang) throw ContractError("language " + sentence.language + " is not in the vocabulary");
    in.language = *lang;
  }
  const std::size_t pos_sentinel = schema_.labels(kPosDimension).size();
  auto sentinel = [&] {
    TokenInput tok;
    tok.word = vocab_.sentinel(sentence.language);
    for (char32_t c : text::utf8_decode(sentinel_marker(sentence.language))) tok.chars.push_back(vocab_.character(c));
    tok.pos = pos_sentinel;
    return tok;
  };
  if (cfg_.use_sentinels) in.tokens.push_back(sentinel());
  for (const auto& t : sentence.tokens) {
    TokenInput tok;
    tok.word = vocab_.word(t.form);
    tok.chars.reserve(t.chars.size());
    for (char32_t c : t.chars) tok.chars.push_back(vocab_.character(c));
    if (cfg_.encoder.use_pos) {
      if (!t.pos) throw ContractError("token '" + t.form + "' has no POS input");
      tok.pos = schema_.label_index(kPosDimension, *t.pos).value_or(schema_.null_index(kPosDimension));
    }
    in.tokens.push_back(std::move(tok));
  }
  if (cfg_.use_sentinels) in.tokens.push_back(sentinel());
  return in;
}

template <typename T>
std::vector<std::vector<std::size_t>> Tagger<T>::gold(const Sentence& sentence) const {
  std::vector<std::vector<std::size_t>> out(decoded_.size(), std::vector<std::size_t>(sentence.tokens.size()));
  for (std::size_t t = 0; t < sentence.tokens.size(); ++t) {
    const auto& a = sentence.tokens[t].annotation;
    for (std::size_t f = 0; f < decoded_.size(); ++f) {
      auto it = a.find(decoded_[f]);
      const std::string_view value = it == a.end() ? kNullValue : std::string_view(it->second);
      auto idx = schema_.label_index(decoded_[f], value);
      if (!idx) {
        throw ContractError("gold value " + std::string(value) + " of token '" + sentence.tokens[t].form +
                            "' is outside the label space of " + decoded_[f]);
      }
      out[f][t] = *idx;
    }
  }
  return out;
}

template <typename T>
num::Var Tagger<T>::features(num::Graph<T>& g, const Sentence& sentence,
                             std::vector<num::Tensor<T>>* attention) const {
  num::Var h = encoder_.encode_sequence(g, input(sentence), attention);
  if (cfg_.use_sentinels) h = g.rows(h, 1, sentence.tokens.size());
  if (polyglot_) {
    const num::Var factored = polyglot_->apply(g, h, sentence.language);
    if (cfg_.polyglot_concat) {
      const num::Var parts[] = {h, factored};
      h = g.concat(parts);
    } else {
      h = factored;
    }
  }
  return h;
}

template <typename T>
num::Var Tagger<T>::loss(num::Graph<T>& g, const Sentence& sentence) const {
  return bank_.nll(g, features(g, sentence), gold(sentence));
}

template <typename T>
typename Tagger<T>::Prediction Tagger<T>::predict(const Sentence& sentence, bool trace) const {
  num::Graph<T> g(typename num::Graph<T>::Options{false, false, nullptr});
  Prediction out;
  const num::Var h = features(g, sentence, trace ? &out.attention : nullptr);
  const auto paths = bank_.decode(g, h);
  out.tokens.resize(sentence.tokens.size());
  for (std::size_t t = 0; t < sentence.tokens.size(); ++t) {
    MorphAnnotation a;
    for (const auto& dim : schema_.dimensions()) a.emplace(dim, std::string(kNullValue));
    for (std::size_t f = 0; f < decoded_.size(); ++f) a[decoded_[f]] = bank_[f].labels()[paths[f][t]];
    if (!cfg_.decode_pos) {
      const auto& pos = sentence.tokens[t].pos;
      if (pos && schema_.contains(kPosDimension, *pos)) a[std::string(kPosDimension)] = *pos;
    }
    out.tokens[t] = std::move(a);
  }
  return out;
}

template <typename T>
std::vector<std::string> Tagger<T>::predict_tags(const Sentence& sentence) const {
  std::vector<std::string> out;
  for (const auto& a : predict(sentence).tokens) out.push_back(schema_.compose(a));
  return out;
}

template class Tagger<float>;
template class Tagger<double>;

}  // namespace morph
