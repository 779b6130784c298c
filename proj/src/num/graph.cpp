#include "morph/num/graph.hpp"

#include <cmath>
#include <string>

#include "morph/crf/inference.hpp"
#include "morph/num/kernels.hpp"
#include "morph/num/math.hpp"

namespace morph::num {

std::string shape_str(const Shape& s) {
  std::string out = "[";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += "x";
    out += std::to_string(s[i]);
  }
  return out + "]";
}

std::size_t shape_size(const Shape& s) {
  std::size_t n = 1;
  for (std::size_t e : s) n *= e;
  return n;
}

namespace {

[[noreturn]] void shape_mismatch(const char* op, const Shape& a, const Shape& b) {
  throw DimensionError(std::string(op) + ": incompatible shapes " + shape_str(a) + " and " + shape_str(b));
}

}  // namespace

template <typename T>
const typename Graph<T>::Node& Graph<T>::node(Var v) const {
  if (v.id >= nodes_.size()) throw ContractError("invalid graph handle");
  return nodes_[v.id];
}

template <typename T>
typename Graph<T>::Node& Graph<T>::node(Var v) {
  if (v.id >= nodes_.size()) throw ContractError("invalid graph handle");
  return nodes_[v.id];
}

template <typename T>
const Tensor<T>& Graph<T>::value(Var v) const {
  const Node& n = node(v);
  return n.external ? *n.external : n.value;
}

template <typename T>
const Tensor<T>& Graph<T>::grad(Var v) const {
  const Node& n = node(v);
  return n.external_grad ? *n.external_grad : n.grad;
}

template <typename T>
bool Graph<T>::any_grad(std::initializer_list<Var> vs) const {
  if (!opts_.grad) return false;
  for (Var v : vs) {
    if (v.valid() && node(v).requires_grad) return true;
  }
  return false;
}

template <typename T>
Var Graph<T>::push(Tensor<T> value, bool requires_grad, BackwardFn fn) {
  if (nodes_.size() >= UINT32_MAX - 1) throw ContractError("graph too large");
  Node n;
  n.value = std::move(value);
  n.requires_grad = opts_.grad && requires_grad;
  if (n.requires_grad) n.backward = std::move(fn);
  nodes_.push_back(std::move(n));
  return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

template <typename T>
Tensor<T>* Graph<T>::grad_of(std::uint32_t id) {
  Node& n = nodes_[id];
  if (!n.requires_grad) return nullptr;
  if (n.external_grad) return n.external_grad;
  if (n.grad.empty()) n.grad = Tensor<T>(value(Var{id}).shape());
  return &n.grad;
}

template <typename T>
Var Graph<T>::constant(Tensor<T> value) {
  return push(std::move(value), false, nullptr);
}

template <typename T>
Var Graph<T>::variable(Tensor<T> value) {
  return push(std::move(value), true, nullptr);
}

template <typename T>
Var Graph<T>::param(Parameter<T>& p) {
  Node n;
  n.external = &p.value;
  n.requires_grad = opts_.grad;
  if (n.requires_grad) {
    if (p.grad.shape() != p.value.shape()) p.grad = Tensor<T>(p.value.shape());
    n.external_grad = &p.grad;
  }
  nodes_.push_back(std::move(n));
  return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

template <typename T>
Var Graph<T>::matmul(Var a, Var b) {
  const auto& A = value(a);
  const auto& B = value(b);
  if (A.rank() != 2 || B.rank() != 2 || A.dim(1) != B.dim(0)) shape_mismatch("matmul", A.shape(), B.shape());
  const std::size_t m = A.dim(0), k = A.dim(1), n = B.dim(1);
  Tensor<T> out(Shape{m, n});
  kernels::gemm_nn(m, n, k, A.ptr(), B.ptr(), out.ptr(), false);
  return push(std::move(out), any_grad({a, b}), [a, b, m, n, k](Graph& g, const Tensor<T>& go) {
    if (auto* ga = g.grad_of(a.id)) kernels::gemm_nt(m, k, n, go.ptr(), g.value(b).ptr(), ga->ptr(), true);
    if (auto* gb = g.grad_of(b.id)) kernels::gemm_tn(k, n, m, g.value(a).ptr(), go.ptr(), gb->ptr(), true);
  });
}

template <typename T>
Var Graph<T>::linear(Var x, Var w, Var b) {
  const auto& X = value(x);
  const auto& W = value(w);
  if (X.rank() == 0 || X.rank() > 2 || W.rank() != 2 || X.cols() != W.dim(1)) {
    shape_mismatch("linear", X.shape(), W.shape());
  }
  const std::size_t m = X.rows(), k = X.cols(), n = W.dim(0);
  if (b.valid()) {
    const auto& B = value(b);
    if (B.size() != n) shape_mismatch("linear bias", W.shape(), B.shape());
  }
  Tensor<T> out(X.rank() == 1 ? Shape{n} : Shape{m, n});
  kernels::gemm_nt(m, n, k, X.ptr(), W.ptr(), out.ptr(), false);
  if (b.valid()) {
    const T* bias = value(b).ptr();
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < n; ++j) out[i * n + j] += bias[j];
    }
  }
  return push(std::move(out), any_grad({x, w, b}), [x, w, b, m, n, k](Graph& g, const Tensor<T>& go) {
    if (auto* gx = g.grad_of(x.id)) kernels::gemm_nn(m, k, n, go.ptr(), g.value(w).ptr(), gx->ptr(), true);
    if (auto* gw = g.grad_of(w.id)) kernels::gemm_tn(n, k, m, go.ptr(), g.value(x).ptr(), gw->ptr(), true);
    if (b.valid()) {
      if (auto* gb = g.grad_of(b.id)) {
        for (std::size_t i = 0; i < m; ++i) {
          for (std::size_t j = 0; j < n; ++j) (*gb)[j] += go[i * n + j];
        }
      }
    }
  });
}

template <typename T>
Var Graph<T>::transpose(Var a) {
  const auto& A = value(a);
  if (A.rank() != 2) throw DimensionError("transpose needs a matrix, got " + shape_str(A.shape()));
  const std::size_t r = A.dim(0), c = A.dim(1);
  Tensor<T> out(Shape{c, r});
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j) out[j * r + i] = A[i * c + j];
  }
  return push(std::move(out), any_grad({a}), [a, r, c](Graph& g, const Tensor<T>& go) {
    if (auto* ga = g.grad_of(a.id)) {
      for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t j = 0; j < c; ++j) (*ga)[i * c + j] += go[j * r + i];
      }
    }
  });
}

template <typename T>
Var Graph<T>::add(Var a, Var b) {
  const auto& A = value(a);
  const auto& B = value(b);
  if (A.shape() != B.shape()) shape_mismatch("add", A.shape(), B.shape());
  Tensor<T> out = A;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += B[i];
  return push(std::move(out), any_grad({a, b}), [a, b](Graph& g, const Tensor<T>& go) {
    for (Var v : {a, b}) {
      if (auto* gv = g.grad_of(v.id)) {
        for (std::size_t i = 0; i < go.size(); ++i) (*gv)[i] += go[i];
      }
    }
  });
}

template <typename T>
Var Graph<T>::sub(Var a, Var b) {
  const auto& A = value(a);
  const auto& B = value(b);
  if (A.shape() != B.shape()) shape_mismatch("sub", A.shape(), B.shape());
  Tensor<T> out = A;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= B[i];
  return push(std::move(out), any_grad({a, b}), [a, b](Graph& g, const Tensor<T>& go) {
    if (auto* ga = g.grad_of(a.id)) {
      for (std::size_t i = 0; i < go.size(); ++i) (*ga)[i] += go[i];
    }
    if (auto* gb = g.grad_of(b.id)) {
      for (std::size_t i = 0; i < go.size(); ++i) (*gb)[i] -= go[i];
    }
  });
}

template <typename T>
Var Graph<T>::mul(Var a, Var b) {
  const auto& A = value(a);
  const auto& B = value(b);
  if (A.shape() != B.shape()) shape_mismatch("mul", A.shape(), B.shape());
  Tensor<T> out = A;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= B[i];
  return push(std::move(out), any_grad({a, b}), [a, b](Graph& g, const Tensor<T>& go) {
    if (auto* ga = g.grad_of(a.id)) {
      const auto& B = g.value(b);
      for (std::size_t i = 0; i < go.size(); ++i) (*ga)[i] += go[i] * B[i];
    }
    if (auto* gb = g.grad_of(b.id)) {
      const auto& A = g.value(a);
      for (std::size_t i = 0; i < go.size(); ++i) (*gb)[i] += go[i] * A[i];
    }
  });
}

template <typename T>
Var Graph<T>::scale(Var a, T factor) {
  Tensor<T> out = value(a);
  for (auto& v : out.data()) v *= factor;
  return push(std::move(out), any_grad({a}), [a, factor](Graph& g, const Tensor<T>& go) {
    if (auto* ga = g.grad_of(a.id)) {
      for (std::size_t i = 0; i < go.size(); ++i) (*ga)[i] += go[i] * factor;
    }
  });
}

template <typename T>
Var Graph<T>::tanh(Var a) {
  Tensor<T> out = value(a);
  for (auto& v : out.data()) v = std::tanh(v);
  const Var self{static_cast<std::uint32_t>(nodes_.size())};
  return push(std::move(out), any_grad({a}), [a, self](Graph& g, const Tensor<T>& go) {
    if (auto* ga = g.grad_of(a.id)) {
      const auto& y = g.value(self);
      for (std::size_t i = 0; i < go.size(); ++i) (*ga)[i] += go[i] * (T(1) - y[i] * y[i]);
    }
  });
}

template <typename T>
Var Graph<T>::sigmoid(Var a) {
  Tensor<T> out = value(a);
  for (auto& v : out.data()) v = num::sigmoid(v);
  const Var self{static_cast<std::uint32_t>(nodes_.size())};
  return push(std::move(out), any_grad({a}), [a, self](Graph& g, const Tensor<T>& go) {
    if (auto* ga = g.grad_of(a.id)) {
      const auto& y = g.value(self);
      for (std::size_t i = 0; i < go.size(); ++i) (*ga)[i] += go[i] * y[i] * (T(1) - y[i]);
    }
  });
}

template <typename T>
Var Graph<T>::softmax(Var a) {
  const auto& A = value(a);
  if (A.rank() == 0) throw DimensionError("softmax of a scalar");
  const std::size_t r = A.rows(), c = A.cols();
  Tensor<T> out = A;
  for (std::size_t i = 0; i < r; ++i) {
    T* row = out.ptr() + i * c;
    T hi = row[0];
    for (std::size_t j = 1; j < c; ++j) hi = row[j] > hi ? row[j] : hi;
    T s = T(0);
    for (std::size_t j = 0; j < c; ++j) {
      row[j] = std::exp(row[j] - hi);
      s += row[j];
    }
    for (std::size_t j = 0; j < c; ++j) row[j] /= s;
  }
  const Var self{static_cast<std::uint32_t>(nodes_.size())};
  return push(std::move(out), any_grad({a}), [a, self, r, c](Graph& g, const Tensor<T>& go) {
    if (auto* ga = g.grad_of(a.id)) {
      const auto& y = g.value(self);
      for (std::size_t i = 0; i < r; ++i) {
        T inner = T(0);
        for (std::size_t j = 0; j < c; ++j) inner += go[i * c + j] * y[i * c + j];
        for (std::size_t j = 0; j < c; ++j) (*ga)[i * c + j] += y[i * c + j] * (go[i * c + j] - inner);
      }
    }
  });
}

template <typename T>
Var Graph<T>::logsumexp(Var a, std::size_t axis) {
  const auto& A = value(a);
  if (A.rank() == 0 || axis >= A.rank() || A.rank() > 2) {
    throw DomainError("logsumexp: axis " + std::to_string(axis) + " is empty for shape " + shape_str(A.shape()));
  }
  // Normalize to reducing over `len` entries spaced `stride` apart, `outer` times.
  const std::size_t r = A.rows(), c = A.cols();
  const bool over_cols = A.rank() == 1 || axis == 1;
  const std::size_t outer = over_cols ? r : c;
  const std::size_t len = over_cols ? c : r;
  const std::size_t stride = over_cols ? 1 : c;
  const std::size_t step = over_cols ? c : 1;
  Tensor<T> out(A.rank() == 1 ? Shape{} : Shape{outer});
  std::vector<T> buf(len);
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t i = 0; i < len; ++i) buf[i] = A[o * step + i * stride];
    out[o] = num::logsumexp<T>(buf);
  }
  const Var self{static_cast<std::uint32_t>(nodes_.size())};
  return push(std::move(out), any_grad({a}),
              [a, self, outer, len, stride, step](Graph& g, const Tensor<T>& go) {
                if (auto* ga = g.grad_of(a.id)) {
                  const auto& A = g.value(a);
                  const auto& y = g.value(self);
                  for (std::size_t o = 0; o < outer; ++o) {
                    for (std::size_t i = 0; i < len; ++i) {
                      const std::size_t idx = o * step + i * stride;
                      (*ga)[idx] += go[o] * std::exp(A[idx] - y[o]);
                    }
                  }
                }
              });
}

template <typename T>
Var Graph<T>::sum(Var a) {
  T s = T(0);
  for (T v : value(a).data()) s += v;
  return push(Tensor<T>::scalar(s), any_grad({a}), [a](Graph& g, const Tensor<T>& go) {
    if (auto* ga = g.grad_of(a.id)) {
      for (auto& v : ga->data()) v += go[0];
    }
  });
}

template <typename T>
Var Graph<T>::dot(Var a, Var b) {
  const auto& A = value(a);
  const auto& B = value(b);
  if (A.shape() != B.shape()) shape_mismatch("dot", A.shape(), B.shape());
  T s = T(0);
  for (std::size_t i = 0; i < A.size(); ++i) s += A[i] * B[i];
  return push(Tensor<T>::scalar(s), any_grad({a, b}), [a, b](Graph& g, const Tensor<T>& go) {
    if (auto* ga = g.grad_of(a.id)) {
      const auto& B = g.value(b);
      for (std::size_t i = 0; i < B.size(); ++i) (*ga)[i] += go[0] * B[i];
    }
    if (auto* gb = g.grad_of(b.id)) {
      const auto& A = g.value(a);
      for (std::size_t i = 0; i < A.size(); ++i) (*gb)[i] += go[0] * A[i];
    }
  });
}

template <typename T>
Var Graph<T>::dropout(Var a, T p) {
  if (!(p >= T(0) && p < T(1))) throw DomainError("dropout rate must lie in [0, 1)");
  if (!opts_.training || p == T(0)) return a;
  if (!opts_.rng) throw ContractError("training-mode dropout needs a random generator");
  const auto& A = value(a);
  const T keep_scale = T(1) / (T(1) - p);
  std::vector<T> mask(A.size());
  for (auto& m : mask) m = opts_.rng->uniform() >= static_cast<double>(p) ? keep_scale : T(0);
  Tensor<T> out = A;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= mask[i];
  return push(std::move(out), any_grad({a}), [a, mask = std::move(mask)](Graph& g, const Tensor<T>& go) {
    if (auto* ga = g.grad_of(a.id)) {
      for (std::size_t i = 0; i < go.size(); ++i) (*ga)[i] += go[i] * mask[i];
    }
  });
}

template <typename T>
Var Graph<T>::concat(std::span<const Var> parts) {
  if (parts.empty()) throw ContractError("concat of nothing");
  const auto& first = value(parts[0]);
  const std::size_t rank = first.rank();
  if (rank == 0 || rank > 2) throw DimensionError("concat needs vectors or matrices");
  const std::size_t r = first.rows();
  std::size_t total = 0;
  std::vector<std::size_t> widths;
  bool needs_grad = false;
  for (Var p : parts) {
    const auto& P = value(p);
    if (P.rank() != rank || P.rows() != r) shape_mismatch("concat", first.shape(), P.shape());
    widths.push_back(P.cols());
    total += P.cols();
    needs_grad = needs_grad || any_grad({p});
  }
  Tensor<T> out(rank == 1 ? Shape{total} : Shape{r, total});
  std::size_t offset = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const auto& P = value(parts[k]);
    for (std::size_t i = 0; i < r; ++i) {
      std::copy_n(P.ptr() + i * widths[k], widths[k], out.ptr() + i * total + offset);
    }
    offset += widths[k];
  }
  std::vector<Var> ids(parts.begin(), parts.end());
  return push(std::move(out), needs_grad,
              [ids = std::move(ids), widths = std::move(widths), r, total](Graph& g, const Tensor<T>& go) {
                std::size_t offset = 0;
                for (std::size_t k = 0; k < ids.size(); ++k) {
                  if (auto* gp = g.grad_of(ids[k].id)) {
                    for (std::size_t i = 0; i < r; ++i) {
                      for (std::size_t j = 0; j < widths[k]; ++j) {
                        (*gp)[i * widths[k] + j] += go[i * total + offset + j];
                      }
                    }
                  }
                  offset += widths[k];
                }
              });
}

template <typename T>
Var Graph<T>::stack(std::span<const Var> rows) {
  if (rows.empty()) throw ContractError("stack of nothing");
  const std::size_t d = value(rows[0]).size();
  bool needs_grad = false;
  for (Var v : rows) {
    const auto& R = value(v);
    if (R.rank() != 1 || R.size() != d) shape_mismatch("stack", value(rows[0]).shape(), R.shape());
    needs_grad = needs_grad || any_grad({v});
  }
  Tensor<T> out(Shape{rows.size(), d});
  for (std::size_t i = 0; i < rows.size(); ++i) std::copy_n(value(rows[i]).ptr(), d, out.ptr() + i * d);
  std::vector<Var> ids(rows.begin(), rows.end());
  return push(std::move(out), needs_grad, [ids = std::move(ids), d](Graph& g, const Tensor<T>& go) {
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (auto* gr = g.grad_of(ids[i].id)) {
        for (std::size_t j = 0; j < d; ++j) (*gr)[j] += go[i * d + j];
      }
    }
  });
}

template <typename T>
Var Graph<T>::row(Var a, std::size_t r) {
  const auto& A = value(a);
  if (A.rank() != 2 || r >= A.dim(0)) {
    throw DimensionError("row " + std::to_string(r) + " out of range for " + shape_str(A.shape()));
  }
  const std::size_t c = A.dim(1);
  Tensor<T> out(Shape{c}, std::vector<T>(A.ptr() + r * c, A.ptr() + (r + 1) * c));
  return push(std::move(out), any_grad({a}), [a, r, c](Graph& g, const Tensor<T>& go) {
    if (auto* ga = g.grad_of(a.id)) {
      for (std::size_t j = 0; j < c; ++j) (*ga)[r * c + j] += go[j];
    }
  });
}

template <typename T>
Var Graph<T>::rows(Var a, std::size_t begin, std::size_t count) {
  const auto& A = value(a);
  if (A.rank() != 2 || count == 0 || begin + count > A.dim(0)) {
    throw DimensionError("rows [" + std::to_string(begin) + ", " + std::to_string(begin + count) +
                         ") out of range for " + shape_str(A.shape()));
  }
  const std::size_t c = A.dim(1);
  Tensor<T> out(Shape{count, c}, std::vector<T>(A.ptr() + begin * c, A.ptr() + (begin + count) * c));
  return push(std::move(out), any_grad({a}), [a, begin, c](Graph& g, const Tensor<T>& go) {
    if (auto* ga = g.grad_of(a.id)) {
      for (std::size_t i = 0; i < go.size(); ++i) (*ga)[begin * c + i] += go[i];
    }
  });
}

template <typename T>
Var Graph<T>::slice(Var a, std::size_t begin, std::size_t length) {
  const auto& A = value(a);
  if (A.rank() != 1 || length == 0 || begin + length > A.size()) {
    throw DimensionError("slice out of range for " + shape_str(A.shape()));
  }
  Tensor<T> out(Shape{length}, std::vector<T>(A.ptr() + begin, A.ptr() + begin + length));
  return push(std::move(out), any_grad({a}), [a, begin](Graph& g, const Tensor<T>& go) {
    if (auto* ga = g.grad_of(a.id)) {
      for (std::size_t i = 0; i < go.size(); ++i) (*ga)[begin + i] += go[i];
    }
  });
}

template <typename T>
Var Graph<T>::embedding(Parameter<T>& table, std::span<const std::size_t> ids) {
  const auto& W = table.value;
  if (W.rank() != 2) throw DimensionError("embedding table must be a matrix");
  if (ids.empty()) throw ContractError("embedding lookup of no ids");
  const std::size_t vocab = W.dim(0), d = W.dim(1);
  Tensor<T> out(Shape{ids.size(), d});
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] >= vocab) {
      throw LookupError("index " + std::to_string(ids[i]) + " outside vocabulary of size " +
                        std::to_string(vocab) + " in " + table.name);
    }
    std::copy_n(W.ptr() + ids[i] * d, d, out.ptr() + i * d);
  }
  const Var src = param(table);
  std::vector<std::size_t> rows_used(ids.begin(), ids.end());
  return push(std::move(out), any_grad({src}),
              [src, rows_used = std::move(rows_used), d](Graph& g, const Tensor<T>& go) {
                if (auto* gw = g.grad_of(src.id)) {
                  for (std::size_t i = 0; i < rows_used.size(); ++i) {
                    for (std::size_t j = 0; j < d; ++j) (*gw)[rows_used[i] * d + j] += go[i * d + j];
                  }
                }
              });
}

template <typename T>
Var Graph<T>::embedding(Parameter<T>& table, std::size_t id) {
  const std::size_t ids[] = {id};
  const Var m = embedding(table, std::span<const std::size_t>(ids));
  return row(m, 0);
}

template <typename T>
Var Graph<T>::outer_rows(Var h, Var f) {
  const auto& H = value(h);
  const auto& F = value(f);
  if (H.rank() == 0 || H.rank() > 2 || F.rank() != 1) shape_mismatch("outer_rows", H.shape(), F.shape());
  const std::size_t n = H.rows(), d = H.cols(), k = F.size();
  Tensor<T> out(H.rank() == 1 ? Shape{d * k} : Shape{n, d * k});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t a = 0; a < d; ++a) {
      const T hv = H[i * d + a];
      T* dst = out.ptr() + i * d * k + a * k;
      for (std::size_t b = 0; b < k; ++b) dst[b] = hv * F[b];
    }
  }
  return push(std::move(out), any_grad({h, f}), [h, f, n, d, k](Graph& g, const Tensor<T>& go) {
    auto* gh = g.grad_of(h.id);
    auto* gf = g.grad_of(f.id);
    const auto& H = g.value(h);
    const auto& F = g.value(f);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t a = 0; a < d; ++a) {
        const T* src = go.ptr() + i * d * k + a * k;
        if (gh) {
          T s = T(0);
          for (std::size_t b = 0; b < k; ++b) s += src[b] * F[b];
          (*gh)[i * d + a] += s;
        }
        if (gf) {
          const T hv = H[i * d + a];
          for (std::size_t b = 0; b < k; ++b) (*gf)[b] += src[b] * hv;
        }
      }
    }
  });
}

template <typename T>
Var Graph<T>::gather_sum(Var a, std::span<const std::size_t> flat_indices) {
  const auto& A = value(a);
  T s = T(0);
  for (std::size_t idx : flat_indices) {
    if (idx >= A.size()) {
      throw LookupError("gather index " + std::to_string(idx) + " outside tensor " + shape_str(A.shape()));
    }
    s += A[idx];
  }
  std::vector<std::size_t> idxs(flat_indices.begin(), flat_indices.end());
  return push(Tensor<T>::scalar(s), any_grad({a}), [a, idxs = std::move(idxs)](Graph& g, const Tensor<T>& go) {
    if (auto* ga = g.grad_of(a.id)) {
      for (std::size_t idx : idxs) (*ga)[idx] += go[0];
    }
  });
}

template <typename T>
Var Graph<T>::crf_log_partition(Var scores, std::size_t labels) {
  const auto& S = value(scores);
  if (S.rank() != 2 || S.dim(1) != (labels + 1) * labels) {
    throw DimensionError("crf scores " + shape_str(S.shape()) + " do not match " + std::to_string(labels) +
                         " labels");
  }
  const crf::ScoreView<T> view(S.data(), S.dim(0), labels);
  const bool needs_grad = any_grad({scores});
  if (!needs_grad) return push(Tensor<T>::scalar(crf::log_partition(view)), false, nullptr);
  const auto lattice = crf::forward_backward(view);
  auto marginals = crf::pair_marginals(view, lattice);
  return push(Tensor<T>::scalar(lattice.log_z), true,
              [scores, marginals = std::move(marginals)](Graph& g, const Tensor<T>& go) {
                if (auto* gs = g.grad_of(scores.id)) {
                  for (std::size_t i = 0; i < marginals.size(); ++i) (*gs)[i] += go[0] * marginals[i];
                }
              });
}

template <typename T>
void Graph<T>::backward(Var loss) {
  const auto& L = value(loss);
  if (L.size() != 1) throw ContractError("backward needs a scalar loss, got shape " + shape_str(L.shape()));
  if (!node(loss).requires_grad) return;
  for (auto& n : nodes_) {
    if (!n.external_grad) n.grad = Tensor<T>();
  }
  (*grad_of(loss.id))[0] += T(1);
  for (std::size_t i = loss.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.requires_grad || !n.backward || n.grad.empty()) continue;
    n.backward(*this, n.grad);
  }
}

template class Graph<float>;
template class Graph<double>;

}  // namespace morph::num
