#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "morph/num/parameter.hpp"
#include "morph/num/random.hpp"
#include "morph/num/tensor.hpp"

namespace morph::num {

// Handle to a node of a Graph.
struct Var {
  std::uint32_t id = UINT32_MAX;
  bool valid() const { return id != UINT32_MAX; }
};

// Tape for reverse-mode differentiation. Nodes are appended in evaluation
// order, which is a topological order, so backward() is a single reverse
// sweep that visits every node once.
//
// A graph built with grad disabled records no backward closures; that is the
// inference path. Training mode enables dropout and needs an Rng.
template <typename T>
class Graph {
 public:
  struct Options {
    bool grad = true;
    bool training = false;
    Rng* rng = nullptr;
  };

  Graph() = default;
  explicit Graph(Options opts) : opts_(opts) {}

  bool training() const { return opts_.training; }
  bool grad_enabled() const { return opts_.grad; }
  std::size_t size() const { return nodes_.size(); }

  Var constant(Tensor<T> value);
  // Leaf owned by the graph; its gradient is readable through grad().
  Var variable(Tensor<T> value);
  // Leaf referencing a parameter; gradients accumulate into p.grad.
  Var param(Parameter<T>& p);

  const Tensor<T>& value(Var v) const;
  const Tensor<T>& grad(Var v) const;
  bool requires_grad(Var v) const { return node(v).requires_grad; }

  Var matmul(Var a, Var b);
  // x[m,k] (or [k]) times w[n,k]^T plus optional bias b[n].
  Var linear(Var x, Var w, Var b = {});
  Var transpose(Var a);
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var scale(Var a, T factor);
  Var tanh(Var a);
  Var sigmoid(Var a);
  // Along the last axis.
  Var softmax(Var a);
  Var logsumexp(Var a, std::size_t axis);
  Var sum(Var a);
  Var dot(Var a, Var b);
  // Scales survivors by 1/(1-p) in training mode, identity otherwise.
  Var dropout(Var a, T p);
  // Along the last axis; rank-2 parts must agree on rows.
  Var concat(std::span<const Var> parts);
  Var stack(std::span<const Var> rows);
  Var row(Var a, std::size_t r);
  Var rows(Var a, std::size_t begin, std::size_t count);
  Var slice(Var a, std::size_t begin, std::size_t length);
  Var embedding(Parameter<T>& table, std::span<const std::size_t> ids);
  Var embedding(Parameter<T>& table, std::size_t id);
  // h[n,d] (or [d]) with f[k] -> [n, d*k], entry (i, a*k+b) = h[i,a]*f[b].
  Var outer_rows(Var h, Var f);
  Var gather_sum(Var a, std::span<const std::size_t> flat_indices);
  // Log partition function of a pair-scored chain; scores are [n, (L+1)*L]
  // in the layout of crf::ScoreView.
  Var crf_log_partition(Var scores, std::size_t labels);

  // Populates gradients of every requires-grad ancestor of a scalar loss.
  // Parameter gradients accumulate across calls.
  void backward(Var loss);

 private:
  using BackwardFn = std::function<void(Graph&, const Tensor<T>&)>;

  struct Node {
    Tensor<T> value;
    const Tensor<T>* external = nullptr;
    Tensor<T> grad;
    Tensor<T>* external_grad = nullptr;
    bool requires_grad = false;
    BackwardFn backward;
  };

  const Node& node(Var v) const;
  Node& node(Var v);
  bool any_grad(std::initializer_list<Var> vs) const;
  Var push(Tensor<T> value, bool requires_grad, BackwardFn fn);
  // Gradient accumulator of v, or nullptr when v needs none.
  Tensor<T>* grad_of(std::uint32_t id);

  Options opts_{};
  std::vector<Node> nodes_;
};

extern template class Graph<float>;
extern template class Graph<double>;

}  // namespace morph::num
