#pragma once

#include <cmath>
#include <optional>

#include "morph/num/parameter.hpp"

namespace morph::num {

// Plain SGD: p <- p - lr * grad(p), then grad(p) <- 0.
// Throws NumericError naming the first parameter whose gradient is not
// finite; no parameter is modified in that case.
template <typename T>
void sgd_step(ParameterStore<T>& params, T learning_rate, std::optional<T> clip_norm = std::nullopt) {
  double sq = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& p = params[i];
    if (!p.grad.all_finite()) throw NumericError("non-finite gradient in parameter " + p.name);
    if (clip_norm) {
      for (T g : p.grad.data()) sq += static_cast<double>(g) * static_cast<double>(g);
    }
  }
  T factor = T(1);
  if (clip_norm) {
    const double norm = std::sqrt(sq);
    if (norm > static_cast<double>(*clip_norm)) factor = static_cast<T>(static_cast<double>(*clip_norm) / norm);
  }
  const T step = learning_rate * factor;
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = params[i];
    auto value = p.value.data();
    auto grad = p.grad.data();
    for (std::size_t j = 0; j < value.size(); ++j) {
      value[j] -= step * grad[j];
      grad[j] = T(0);
    }
  }
}

}  // namespace morph::num
