#include "morph/crf/decoder.hpp"

#include <cmath>
#include <ostream>

#include "morph/text.hpp"

namespace morph::crf {

template <typename T>
CrfLayer<T>::CrfLayer(std::string dimension, std::vector<std::string> labels, num::Parameter<T>& weight,
                      num::Parameter<T>& bias)
    : dimension_(std::move(dimension)), labels_(std::move(labels)), weight_(&weight), bias_(&bias) {
  if (labels_.empty()) throw ContractError("decoder " + dimension_ + " has no labels");
  const std::size_t pairs = pair_count();
  if (weight_->value.rank() != 2 || weight_->value.dim(0) != pairs || bias_->value.size() != pairs) {
    throw DimensionError("decoder " + dimension_ + ": parameters " + num::shape_str(weight_->value.shape()) + " and " +
                         num::shape_str(bias_->value.shape()) + " do not fit " + std::to_string(labels_.size()) +
                         " labels");
  }
}

template <typename T>
CrfLayer<T> CrfLayer<T>::create(num::ParameterStore<T>& store, std::string dimension,
                                std::vector<std::string> labels, std::size_t input_width, num::Rng& rng) {
  const std::size_t pairs = (labels.size() + 1) * labels.size();
  auto& w = store.add("crf." + dimension + ".W", {pairs, input_width});
  auto& b = store.add("crf." + dimension + ".b", {pairs});
  num::init_fan_in(w.value, rng);
  return CrfLayer(std::move(dimension), std::move(labels), w, b);
}

template <typename T>
CrfLayer<T> CrfLayer<T>::attach(num::ParameterStore<T>& store, std::string dimension,
                                std::vector<std::string> labels) {
  auto& w = store.get("crf." + dimension + ".W");
  auto& b = store.get("crf." + dimension + ".b");
  return CrfLayer(std::move(dimension), std::move(labels), w, b);
}

template <typename T>
T CrfLayer<T>::pair_score(std::size_t prev_row, std::size_t cur, std::span<const T> h) const {
  const std::size_t L = labels_.size();
  if (prev_row > L || cur >= L) {
    throw ContractError("pair (" + std::to_string(prev_row) + ", " + std::to_string(cur) + ") outside decoder " +
                        dimension_);
  }
  if (h.size() != input_width()) throw DimensionError("decoder input width mismatch");
  const std::size_t pair = prev_row * L + cur;
  const T* w = weight_->value.ptr() + pair * h.size();
  T s = bias_->value[pair];
  for (std::size_t i = 0; i < h.size(); ++i) s += w[i] * h[i];
  return s;
}

template <typename T>
num::Var CrfLayer<T>::scores(num::Graph<T>& g, num::Var h) const {
  return g.linear(h, g.param(*weight_), g.param(*bias_));
}

std::vector<std::size_t> gold_pair_offsets(std::span<const std::size_t> gold, std::size_t labels) {
  const std::size_t width = (labels + 1) * labels;
  std::vector<std::size_t> out(gold.size());
  for (std::size_t t = 0; t < gold.size(); ++t) {
    if (gold[t] >= labels) throw ContractError("gold label " + std::to_string(gold[t]) + " out of range");
    const std::size_t row = t == 0 ? kBosRow : gold[t - 1] + 1;
    out[t] = t * width + row * labels + gold[t];
  }
  return out;
}

template <typename T>
num::Var CrfLayer<T>::nll(num::Graph<T>& g, num::Var h, std::span<const std::size_t> gold) const {
  const num::Var s = scores(g, h);
  if (g.value(s).rows() != gold.size()) throw ContractError("gold path length does not match the sentence");
  const auto offsets = gold_pair_offsets(gold, labels_.size());
  return g.sub(g.crf_log_partition(s, labels_.size()), g.gather_sum(s, offsets));
}

template <typename T>
Decoded<T> CrfLayer<T>::decode(const num::Tensor<T>& scores) const {
  return viterbi(ScoreView<T>(scores.data(), scores.rows(), labels_.size()));
}

template <typename T>
std::vector<T> CrfLayer<T>::marginals(const num::Tensor<T>& scores) const {
  const ScoreView<T> view(scores.data(), scores.rows(), labels_.size());
  return unary_marginals(view, forward_backward(view));
}

template <typename T>
void CrfLayer<T>::export_transitions(std::ostream& out) const {
  const std::size_t L = labels_.size();
  const std::size_t d = input_width();
  out << "prev\tcur\tbias\tweight_norm\n";
  for (std::size_t r = 0; r <= L; ++r) {
    for (std::size_t c = 0; c < L; ++c) {
      const std::size_t pair = r * L + c;
      double sq = 0.0;
      const T* w = weight_->value.ptr() + pair * d;
      for (std::size_t i = 0; i < d; ++i) sq += static_cast<double>(w[i]) * static_cast<double>(w[i]);
      out << (r == kBosRow ? std::string("<bos>") : labels_[r - 1]) << '\t' << labels_[c] << '\t'
          << text::format_real(static_cast<double>(bias_->value[pair])) << '\t' << text::format_real(std::sqrt(sq))
          << '\n';
    }
  }
}

template <typename T>
DecoderBank<T> DecoderBank<T>::create(num::ParameterStore<T>& store, const FeatureSchema& schema,
                                      const std::vector<std::string>& dimensions, std::size_t input_width,
                                      num::Rng& rng) {
  DecoderBank bank;
  for (const auto& dim : dimensions) {
    bank.layers_.push_back(CrfLayer<T>::create(store, dim, schema.labels(dim), input_width, rng));
  }
  return bank;
}

template <typename T>
DecoderBank<T> DecoderBank<T>::attach(num::ParameterStore<T>& store, const FeatureSchema& schema,
                                      const std::vector<std::string>& dimensions) {
  DecoderBank bank;
  for (const auto& dim : dimensions) bank.layers_.push_back(CrfLayer<T>::attach(store, dim, schema.labels(dim)));
  return bank;
}

template <typename T>
num::Var DecoderBank<T>::nll(num::Graph<T>& g, num::Var h,
                             const std::vector<std::vector<std::size_t>>& gold) const {
  if (gold.size() != layers_.size()) throw ContractError("gold assignment does not cover every decoder");
  num::Var total;
  for (std::size_t f = 0; f < layers_.size(); ++f) {
    const num::Var l = layers_[f].nll(g, h, gold[f]);
    total = total.valid() ? g.add(total, l) : l;
  }
  return total;
}

template <typename T>
std::vector<std::vector<std::size_t>> DecoderBank<T>::decode(num::Graph<T>& g, num::Var h) const {
  std::vector<std::vector<std::size_t>> out;
  out.reserve(layers_.size());
  for (const auto& layer : layers_) out.push_back(layer.decode(g.value(layer.scores(g, h))).path);
  return out;
}

template class CrfLayer<float>;
template class CrfLayer<double>;
template class DecoderBank<float>;
template class DecoderBank<double>;

}  // namespace morph::crf
