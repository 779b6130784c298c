#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "morph/error.hpp"
#include "morph/num/math.hpp"

// Exact inference for a linear chain whose factors score label pairs.
//
// Scores are laid out as [n][L+1][L]: for position t, row r and column c hold
// log psi(prev, cur) where row 0 is the begin-of-sequence pseudo-label and row
// r > 0 is label r-1. Position 0 only reads row 0, later positions only read
// rows 1..L.
namespace morph::crf {

inline constexpr std::size_t kBosRow = 0;

template <typename T>
class ScoreView {
 public:
  ScoreView(std::span<const T> data, std::size_t length, std::size_t labels)
      : data_(data), length_(length), labels_(labels) {
    if (length == 0 || labels == 0) throw ContractError("empty chain");
    if (data.size() != length * (labels + 1) * labels) {
      throw DimensionError("pair score buffer has " + std::to_string(data.size()) + " entries, expected " +
                           std::to_string(length * (labels + 1) * labels));
    }
  }

  std::size_t length() const { return length_; }
  std::size_t labels() const { return labels_; }
  std::size_t width() const { return (labels_ + 1) * labels_; }

  // prev_row is kBosRow or label + 1.
  T operator()(std::size_t t, std::size_t prev_row, std::size_t cur) const {
    return data_[(t * (labels_ + 1) + prev_row) * labels_ + cur];
  }
  T transition(std::size_t t, std::size_t prev_label, std::size_t cur) const {
    return (*this)(t, prev_label + 1, cur);
  }
  T start(std::size_t cur) const { return (*this)(0, kBosRow, cur); }

 private:
  std::span<const T> data_;
  std::size_t length_;
  std::size_t labels_;
};

template <typename T>
struct Lattice {
  std::vector<T> alpha;  // [n][L]
  std::vector<T> beta;   // [n][L]
  T log_z{};
};

template <typename T>
Lattice<T> forward_backward(const ScoreView<T>& s) {
  const std::size_t n = s.length();
  const std::size_t L = s.labels();
  Lattice<T> lat;
  lat.alpha.assign(n * L, T(0));
  lat.beta.assign(n * L, T(0));
  std::vector<T> buf(L);
  for (std::size_t y = 0; y < L; ++y) lat.alpha[y] = s.start(y);
  for (std::size_t t = 1; t < n; ++t) {
    for (std::size_t y = 0; y < L; ++y) {
      for (std::size_t p = 0; p < L; ++p) buf[p] = lat.alpha[(t - 1) * L + p] + s.transition(t, p, y);
      lat.alpha[t * L + y] = num::logsumexp<T>(buf);
    }
  }
  for (std::size_t t = n - 1; t-- > 0;) {
    for (std::size_t p = 0; p < L; ++p) {
      for (std::size_t y = 0; y < L; ++y) buf[y] = s.transition(t + 1, p, y) + lat.beta[(t + 1) * L + y];
      lat.beta[t * L + p] = num::logsumexp<T>(buf);
    }
  }
  lat.log_z = num::logsumexp<T>(std::span<const T>(lat.alpha).subspan((n - 1) * L, L));
  return lat;
}

template <typename T>
T log_partition(const ScoreView<T>& s) {
  const std::size_t n = s.length();
  const std::size_t L = s.labels();
  std::vector<T> alpha(L), next(L), buf(L);
  for (std::size_t y = 0; y < L; ++y) alpha[y] = s.start(y);
  for (std::size_t t = 1; t < n; ++t) {
    for (std::size_t y = 0; y < L; ++y) {
      for (std::size_t p = 0; p < L; ++p) buf[p] = alpha[p] + s.transition(t, p, y);
      next[y] = num::logsumexp<T>(buf);
    }
    alpha.swap(next);
  }
  return num::logsumexp<T>(alpha);
}

// d log Z / d score, in the score layout: the posterior probability of each
// (prev, cur) pair at each position.
template <typename T>
std::vector<T> pair_marginals(const ScoreView<T>& s, const Lattice<T>& lat) {
  const std::size_t n = s.length();
  const std::size_t L = s.labels();
  std::vector<T> out(n * s.width(), T(0));
  for (std::size_t y = 0; y < L; ++y) {
    out[kBosRow * L + y] = std::exp(lat.alpha[y] + lat.beta[y] - lat.log_z);
  }
  for (std::size_t t = 1; t < n; ++t) {
    T* block = out.data() + t * s.width();
    for (std::size_t p = 0; p < L; ++p) {
      const T a = lat.alpha[(t - 1) * L + p];
      for (std::size_t y = 0; y < L; ++y) {
        block[(p + 1) * L + y] = std::exp(a + s.transition(t, p, y) + lat.beta[t * L + y] - lat.log_z);
      }
    }
  }
  return out;
}

// Per-position label posteriors, [n][L].
template <typename T>
std::vector<T> unary_marginals(const ScoreView<T>& s, const Lattice<T>& lat) {
  const std::size_t n = s.length();
  const std::size_t L = s.labels();
  std::vector<T> out(n * L);
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t y = 0; y < L; ++y) {
      out[t * L + y] = std::exp(lat.alpha[t * L + y] + lat.beta[t * L + y] - lat.log_z);
    }
  }
  return out;
}

template <typename T>
T path_score(const ScoreView<T>& s, std::span<const std::size_t> path) {
  if (path.size() != s.length()) throw ContractError("path length does not match chain length");
  T total = T(0);
  for (std::size_t t = 0; t < path.size(); ++t) {
    if (path[t] >= s.labels()) throw ContractError("label index out of range: " + std::to_string(path[t]));
    total += t == 0 ? s.start(path[0]) : s.transition(t, path[t - 1], path[t]);
  }
  return total;
}

template <typename T>
struct Decoded {
  std::vector<std::size_t> path;
  T score{};
};

// Max-product decoding. Among equally scoring paths the lexicographically
// smallest one wins (lowest label index at the earliest differing position):
// best suffix scores are accumulated right to left, then labels are chosen
// left to right taking the first maximizer.
template <typename T>
Decoded<T> viterbi(const ScoreView<T>& s) {
  const std::size_t n = s.length();
  const std::size_t L = s.labels();
  std::vector<T> suffix(n * L, T(0));
  for (std::size_t t = n - 1; t-- > 0;) {
    for (std::size_t p = 0; p < L; ++p) {
      T best = -std::numeric_limits<T>::infinity();
      for (std::size_t y = 0; y < L; ++y) {
        const T v = s.transition(t + 1, p, y) + suffix[(t + 1) * L + y];
        if (v > best) best = v;
      }
      suffix[t * L + p] = best;
    }
  }
  Decoded<T> out;
  out.path.resize(n);
  T best = -std::numeric_limits<T>::infinity();
  for (std::size_t y = 0; y < L; ++y) {
    const T v = s.start(y) + suffix[y];
    if (v > best) {
      best = v;
      out.path[0] = y;
    }
  }
  for (std::size_t t = 1; t < n; ++t) {
    T step_best = -std::numeric_limits<T>::infinity();
    for (std::size_t y = 0; y < L; ++y) {
      const T v = s.transition(t, out.path[t - 1], y) + suffix[t * L + y];
      if (v > step_best) {
        step_best = v;
        out.path[t] = y;
      }
    }
  }
  out.score = path_score(s, std::span<const std::size_t>(out.path));
  return out;
}

}  // namespace morph::crf
