#pragma once

#include <cmath>
#include <limits>
#include <span>

#include "morph/error.hpp"

namespace morph::num {

// log(sum(exp(x))) with max-shift stabilization.
template <typename T>
T logsumexp(std::span<const T> x) {
  if (x.empty()) throw DomainError("logsumexp over an empty axis");
  T hi = x[0];
  for (T v : x) hi = v > hi ? v : hi;
  if (hi == -std::numeric_limits<T>::infinity()) return hi;
  T s = T(0);
  for (T v : x) s += std::exp(v - hi);
  return hi + std::log(s);
}

template <typename T>
T sigmoid(T x) {
  if (x >= T(0)) return T(1) / (T(1) + std::exp(-x));
  const T e = std::exp(x);
  return e / (T(1) + e);
}

}  // namespace morph::num
