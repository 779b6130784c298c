#pragma once

#include <span>
#include <string>
#include <vector>

#include "morph/num/graph.hpp"
#include "morph/num/parameter.hpp"
#include "morph/num/random.hpp"

namespace morph {

struct EncoderConfig {
  std::size_t char_emb = 50;
  std::size_t char_hidden = 25;
  std::size_t word_emb = 100;
  std::size_t word_hidden = 200;
  std::size_t pos_emb = 64;
  std::size_t lang_emb = 100;
  double dropout = 0.5;
  bool self_attention = true;
  bool use_pos = false;
  bool use_lang = false;

  void validate() const;
  std::size_t token_width() const { return 2 * char_hidden; }
  std::size_t input_width() const {
    return word_emb + token_width() + (use_pos ? pos_emb : 0) + (use_lang ? lang_emb : 0);
  }
  std::size_t output_width() const { return 2 * word_hidden; }
};

// Gate order i, f, g, o. W_in is [4H, in], W_rec is [4H, H], b is [4H].
template <typename T>
class Lstm {
 public:
  struct Output {
    num::Var states;  // [n, H] in input order
    num::Var last;    // state after the final step of the scan
  };

  static Lstm create(num::ParameterStore<T>& store, const std::string& prefix, std::size_t input, std::size_t hidden,
                     num::Rng& rng);
  static Lstm attach(num::ParameterStore<T>& store, const std::string& prefix);

  std::size_t hidden() const { return w_rec_->value.dim(1); }
  // Scans right to left when `reverse`.
  Output run(num::Graph<T>& g, num::Var inputs, bool reverse) const;

 private:
  num::Parameter<T>* w_in_ = nullptr;
  num::Parameter<T>* w_rec_ = nullptr;
  num::Parameter<T>* bias_ = nullptr;
};

template <typename T>
class BiLstm {
 public:
  struct Output {
    num::Var states;  // [n, 2H], forward then backward
    num::Var final;   // [2H]: forward last, backward first
  };

  static BiLstm create(num::ParameterStore<T>& store, const std::string& prefix, std::size_t input,
                       std::size_t hidden, num::Rng& rng);
  static BiLstm attach(num::ParameterStore<T>& store, const std::string& prefix);

  Output run(num::Graph<T>& g, num::Var inputs) const;

 private:
  Lstm<T> fwd_;
  Lstm<T> bwd_;
};

// Scaled dot-product self-attention with queries = keys = values = x [n, d].
// Returns the mixed states and writes the [n, n] weights to `weights`.
template <typename T>
num::Var self_attention(num::Graph<T>& g, num::Var x, num::Var* weights = nullptr);

struct TokenInput {
  std::vector<std::size_t> chars;
  std::size_t word = 0;
  std::size_t pos = 0;
};

struct SequenceInput {
  std::vector<TokenInput> tokens;  // sentinels included when present
  std::size_t language = 0;
};

template <typename T>
class Encoder {
 public:
  struct Sizes {
    std::size_t words = 0;
    std::size_t chars = 0;
    std::size_t pos_labels = 0;
    std::size_t languages = 0;
  };

  Encoder() = default;
  static Encoder create(num::ParameterStore<T>& store, const EncoderConfig& cfg, const Sizes& sizes, num::Rng& rng);
  static Encoder attach(num::ParameterStore<T>& store, const EncoderConfig& cfg);

  const EncoderConfig& config() const { return cfg_; }

  // c_i of a single token, width 2 * char_hidden. Appends the character
  // attention matrix to `attention` when given.
  num::Var encode_token(num::Graph<T>& g, std::span<const std::size_t> chars,
                        std::vector<num::Tensor<T>>* attention = nullptr) const;

  // h_i for every position of the input, [N, 2 * word_hidden].
  num::Var encode_sequence(num::Graph<T>& g, const SequenceInput& input,
                           std::vector<num::Tensor<T>>* attention = nullptr) const;

 private:
  EncoderConfig cfg_;
  num::Parameter<T>* char_table_ = nullptr;
  num::Parameter<T>* word_table_ = nullptr;
  num::Parameter<T>* pos_table_ = nullptr;
  num::Parameter<T>* lang_table_ = nullptr;
  BiLstm<T> char_lstm_;
  BiLstm<T> modeling_lstm_;
  BiLstm<T> word_lstm_;
};

extern template class Lstm<float>;
extern template class Lstm<double>;
extern template class BiLstm<float>;
extern template class BiLstm<double>;
extern template class Encoder<float>;
extern template class Encoder<double>;

}  // namespace morph
