#include "morph/encoder.hpp"

#include <cmath>

#include "morph/error.hpp"

namespace morph {

void EncoderConfig::validate() const {
  if (char_emb == 0 || char_hidden == 0 || word_emb == 0 || word_hidden == 0 || pos_emb == 0 || lang_emb == 0) {
    throw ConfigError("encoder extents must be positive");
  }
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout must lie in [0, 1)");
}

template <typename T>
Lstm<T> Lstm<T>::create(num::ParameterStore<T>& store, const std::string& prefix, std::size_t input,
                        std::size_t hidden, num::Rng& rng) {
  Lstm l;
  l.w_in_ = &store.add(prefix + ".W_in", {4 * hidden, input});
  l.w_rec_ = &store.add(prefix + ".W_rec", {4 * hidden, hidden});
  l.bias_ = &store.add(prefix + ".b", {4 * hidden});
  num::init_fan_in(l.w_in_->value, rng);
  num::init_fan_in(l.w_rec_->value, rng);
  return l;
}

template <typename T>
Lstm<T> Lstm<T>::attach(num::ParameterStore<T>& store, const std::string& prefix) {
  Lstm l;
  l.w_in_ = &store.get(prefix + ".W_in");
  l.w_rec_ = &store.get(prefix + ".W_rec");
  l.bias_ = &store.get(prefix + ".b");
  return l;
}

template <typename T>
typename Lstm<T>::Output Lstm<T>::run(num::Graph<T>& g, num::Var inputs, bool reverse) const {
  const std::size_t n = g.value(inputs).rows();
  if (g.value(inputs).size() == 0 || n == 0) throw ContractError("LSTM over an empty sequence");
  const std::size_t H = hidden();
  const num::Var proj = g.linear(inputs, g.param(*w_in_), g.param(*bias_));
  const num::Var w_rec = g.param(*w_rec_);
  std::vector<num::Var> states(n);
  num::Var h, c;
  for (std::size_t step = 0; step < n; ++step) {
    const std::size_t t = reverse ? n - 1 - step : step;
    num::Var pre = g.value(proj).rank() == 1 ? proj : g.row(proj, t);
    if (h.valid()) pre = g.add(pre, g.linear(h, w_rec));
    const num::Var i = g.sigmoid(g.slice(pre, 0, H));
    const num::Var f = g.sigmoid(g.slice(pre, H, H));
    const num::Var u = g.tanh(g.slice(pre, 2 * H, H));
    const num::Var o = g.sigmoid(g.slice(pre, 3 * H, H));
    const num::Var iu = g.mul(i, u);
    c = c.valid() ? g.add(g.mul(f, c), iu) : iu;
    h = g.mul(o, g.tanh(c));
    states[t] = h;
  }
  return {g.stack(states), h};
}

template <typename T>
BiLstm<T> BiLstm<T>::create(num::ParameterStore<T>& store, const std::string& prefix, std::size_t input,
                            std::size_t hidden, num::Rng& rng) {
  BiLstm b;
  b.fwd_ = Lstm<T>::create(store, prefix + ".fwd", input, hidden, rng);
  b.bwd_ = Lstm<T>::create(store, prefix + ".bwd", input, hidden, rng);
  return b;
}

template <typename T>
BiLstm<T> BiLstm<T>::attach(num::ParameterStore<T>& store, const std::string& prefix) {
  BiLstm b;
  b.fwd_ = Lstm<T>::attach(store, prefix + ".fwd");
  b.bwd_ = Lstm<T>::attach(store, prefix + ".bwd");
  return b;
}

template <typename T>
typename BiLstm<T>::Output BiLstm<T>::run(num::Graph<T>& g, num::Var inputs) const {
  const auto f = fwd_.run(g, inputs, false);
  const auto b = bwd_.run(g, inputs, true);
  const num::Var states[] = {f.states, b.states};
  const num::Var finals[] = {f.last, b.last};
  return {g.concat(states), g.concat(finals)};
}

template <typename T>
num::Var self_attention(num::Graph<T>& g, num::Var x, num::Var* weights) {
  const auto& X = g.value(x);
  if (X.rank() != 2) throw DimensionError("self-attention needs an [n, d] input");
  const T scale = T(1) / std::sqrt(static_cast<T>(X.cols()));
  const num::Var a = g.softmax(g.scale(g.matmul(x, g.transpose(x)), scale));
  if (weights) *weights = a;
  return g.matmul(a, x);
}

template <typename T>
Encoder<T> Encoder<T>::create(num::ParameterStore<T>& store, const EncoderConfig& cfg, const Sizes& sizes,
                              num::Rng& rng) {
  cfg.validate();
  if (sizes.words == 0 || sizes.chars == 0) throw ConfigError("encoder needs non-empty word and character vocabularies");
  if (cfg.use_pos && sizes.pos_labels == 0) throw ConfigError("POS embeddings need a POS label space");
  if (cfg.use_lang && sizes.languages == 0) throw ConfigError("language embeddings need at least one language");
  Encoder e;
  e.cfg_ = cfg;
  e.char_table_ = &store.add("enc.char_emb", {sizes.chars, cfg.char_emb});
  num::init_uniform(e.char_table_->value, rng, -0.1, 0.1);
  e.char_lstm_ = BiLstm<T>::create(store, "enc.char_lstm", cfg.char_emb, cfg.char_hidden, rng);
  e.modeling_lstm_ = BiLstm<T>::create(store, "enc.modeling_lstm", 2 * cfg.char_hidden, cfg.char_hidden, rng);
  e.word_table_ = &store.add("enc.word_emb", {sizes.words, cfg.word_emb});
  num::init_uniform(e.word_table_->value, rng, -0.1, 0.1);
  if (cfg.use_pos) {
    e.pos_table_ = &store.add("enc.pos_emb", {sizes.pos_labels, cfg.pos_emb});
    num::init_uniform(e.pos_table_->value, rng, -0.1, 0.1);
  }
  if (cfg.use_lang) {
    e.lang_table_ = &store.add("enc.lang_emb", {sizes.languages, cfg.lang_emb});
    num::init_uniform(e.lang_table_->value, rng, -0.1, 0.1);
  }
  e.word_lstm_ = BiLstm<T>::create(store, "enc.word_lstm", cfg.input_width(), cfg.word_hidden, rng);
  return e;
}

template <typename T>
Encoder<T> Encoder<T>::attach(num::ParameterStore<T>& store, const EncoderConfig& cfg) {
  cfg.validate();
  Encoder e;
  e.cfg_ = cfg;
  e.char_table_ = &store.get("enc.char_emb");
  e.char_lstm_ = BiLstm<T>::attach(store, "enc.char_lstm");
  e.modeling_lstm_ = BiLstm<T>::attach(store, "enc.modeling_lstm");
  e.word_table_ = &store.get("enc.word_emb");
  if (cfg.use_pos) e.pos_table_ = &store.get("enc.pos_emb");
  if (cfg.use_lang) e.lang_table_ = &store.get("enc.lang_emb");
  e.word_lstm_ = BiLstm<T>::attach(store, "enc.word_lstm");
  return e;
}

template <typename T>
num::Var Encoder<T>::encode_token(num::Graph<T>& g, std::span<const std::size_t> chars,
                                  std::vector<num::Tensor<T>>* attention) const {
  if (chars.empty()) throw ContractError("token without characters");
  const num::Var emb = g.embedding(*char_table_, chars);
  num::Var states = char_lstm_.run(g, emb).states;
  if (cfg_.self_attention) {
    num::Var weights;
    states = self_attention(g, states, &weights);
    if (attention) attention->push_back(g.value(weights));
  }
  return modeling_lstm_.run(g, states).final;
}

template <typename T>
num::Var Encoder<T>::encode_sequence(num::Graph<T>& g, const SequenceInput& input,
                                     std::vector<num::Tensor<T>>* attention) const {
  if (input.tokens.empty()) throw ContractError("empty sentence");
  std::vector<num::Var> rows;
  rows.reserve(input.tokens.size());
  num::Var lang;
  if (cfg_.use_lang) lang = g.embedding(*lang_table_, input.language);
  for (const auto& tok : input.tokens) {
    std::vector<num::Var> parts;
    parts.push_back(g.embedding(*word_table_, tok.word));
    parts.push_back(encode_token(g, tok.chars, attention));
    if (cfg_.use_pos) parts.push_back(g.embedding(*pos_table_, tok.pos));
    if (cfg_.use_lang) parts.push_back(lang);
    rows.push_back(g.concat(parts));
  }
  const T p = static_cast<T>(cfg_.dropout);
  const num::Var x = g.dropout(g.stack(rows), p);
  return g.dropout(word_lstm_.run(g, x).states, p);
}

template class Lstm<float>;
template class Lstm<double>;
template class BiLstm<float>;
template class BiLstm<double>;
template class Encoder<float>;
template class Encoder<double>;
template num::Var self_attention<float>(num::Graph<float>&, num::Var, num::Var*);
template num::Var self_attention<double>(num::Graph<double>&, num::Var, num::Var*);

}  // namespace morph
