#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "morph/crf/inference.hpp"
#include "morph/num/graph.hpp"
#include "morph/num/parameter.hpp"
#include "morph/schema.hpp"

namespace morph::crf {

// One feature dimension's chain. The energy of the pair (prev, cur) at
// position t is W[prev,cur] . h_t + b[prev,cur], with a BOS row for t = 0.
// W is stored as [(L+1)*L, d] and b as [(L+1)*L] so the scores of a whole
// sentence are a single affine map of H.
template <typename T>
class CrfLayer {
 public:
  CrfLayer(std::string dimension, std::vector<std::string> labels, num::Parameter<T>& weight,
           num::Parameter<T>& bias);

  // Registers "crf.<dimension>.W" and "crf.<dimension>.b" in `store`.
  static CrfLayer create(num::ParameterStore<T>& store, std::string dimension, std::vector<std::string> labels,
                         std::size_t input_width, num::Rng& rng);
  static CrfLayer attach(num::ParameterStore<T>& store, std::string dimension, std::vector<std::string> labels);

  const std::string& dimension() const { return dimension_; }
  const std::vector<std::string>& labels() const { return labels_; }
  std::size_t label_count() const { return labels_.size(); }
  std::size_t pair_count() const { return (labels_.size() + 1) * labels_.size(); }
  std::size_t input_width() const { return weight_->value.dim(1); }

  // prev_row is kBosRow or label + 1.
  T pair_score(std::size_t prev_row, std::size_t cur, std::span<const T> h) const;

  // [n, (L+1)*L] score matrix for H [n, d].
  num::Var scores(num::Graph<T>& g, num::Var h) const;
  num::Var nll(num::Graph<T>& g, num::Var h, std::span<const std::size_t> gold) const;

  Decoded<T> decode(const num::Tensor<T>& scores) const;
  std::vector<T> marginals(const num::Tensor<T>& scores) const;

  // prev, cur, bias, ||W[prev,cur]||
  void export_transitions(std::ostream& out) const;

 private:
  std::string dimension_;
  std::vector<std::string> labels_;
  num::Parameter<T>* weight_;
  num::Parameter<T>* bias_;
};

// Flat offsets of the gold path's pair scores inside an [n, (L+1)*L] matrix.
std::vector<std::size_t> gold_pair_offsets(std::span<const std::size_t> gold, std::size_t labels);

// One CrfLayer per decoded dimension, in schema order.
template <typename T>
class DecoderBank {
 public:
  DecoderBank() = default;
  static DecoderBank create(num::ParameterStore<T>& store, const FeatureSchema& schema,
                            const std::vector<std::string>& dimensions, std::size_t input_width, num::Rng& rng);
  static DecoderBank attach(num::ParameterStore<T>& store, const FeatureSchema& schema,
                            const std::vector<std::string>& dimensions);

  std::size_t size() const { return layers_.size(); }
  const CrfLayer<T>& operator[](std::size_t i) const { return layers_[i]; }
  const std::vector<CrfLayer<T>>& layers() const { return layers_; }

  // gold[f][t] is the label index of decoder f at token t.
  num::Var nll(num::Graph<T>& g, num::Var h, const std::vector<std::vector<std::size_t>>& gold) const;
  std::vector<std::vector<std::size_t>> decode(num::Graph<T>& g, num::Var h) const;

 private:
  std::vector<CrfLayer<T>> layers_;
};

extern template class CrfLayer<float>;
extern template class CrfLayer<double>;
extern template class DecoderBank<float>;
extern template class DecoderBank<double>;

}  // namespace morph::crf
