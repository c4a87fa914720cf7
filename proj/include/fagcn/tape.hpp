#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "fagcn/graph.hpp"
#include "fagcn/matrix.hpp"

namespace fagcn {

class SplitMix64;

// Trainable weight block living outside any tape. Gradients accumulate
// across backward passes until an optimizer step (or zero_grad) clears them.
struct Param {
  std::string name;
  Matrix value;
  Matrix grad;

  Param(std::string n, std::size_t rows, std::size_t cols)
      : name(std::move(n)), value(rows, cols), grad(rows, cols) {}

  void zero_grad() { std::fill(grad.data.begin(), grad.data.end(), 0.0); }
};

// Uniform fan-based init: U(-a, a) with a = scale * sqrt(6 / (fan_in + fan_out)).
void glorot_init(Param& p, SplitMix64& rng, double scale = 1.0);

struct TensorRef {
  int id = -1;
};

// Reverse-mode tape over dense 2-D tensors. Every primitive records exactly
// one node; record order is topological by construction, and backward()
// walks it in exact reverse. backward() may be called repeatedly; adjoints
// then accumulate into Tensor grads and bound Params without zeroing.
class Tape {
 public:
  TensorRef constant(Matrix m);   // no gradient tracking
  TensorRef variable(Matrix m);   // tape-owned differentiable leaf
  TensorRef leaf(Param& p);       // differentiable leaf bound to external storage

  TensorRef matmul(TensorRef a, TensorRef b);
  TensorRef add(TensorRef a, TensorRef b);
  TensorRef scale(TensorRef a, double c);
  TensorRef mul(TensorRef a, TensorRef b);            // elementwise
  TensorRef add_rowvec(TensorRef a, TensorRef bias);  // bias is 1 x cols, broadcast over rows
  TensorRef relu(TensorRef a);
  TensorRef tanh(TensorRef a);

  // Train mode keeps each element with probability 1-rate and scales kept
  // ones by 1/(1-rate); eval mode is the identity. rate must lie in [0, 1).
  TensorRef dropout(TensorRef a, double rate, std::uint64_t seed, bool train);

  TensorRef concat_cols(TensorRef a, TensorRef b);
  TensorRef gather_rows(TensorRef a, std::vector<int> rows);

  // out[targets[k]] += edge_values(k, 0) * messages.row(k). edge_values is
  // num_arcs x 1, messages num_arcs x F, result num_nodes x F.
  TensorRef edge_scatter_sum(TensorRef edge_values, TensorRef messages, std::vector<int> targets,
                             int num_nodes);

  TensorRef sum_all(TensorRef a);

  // Mean negative log-likelihood over masked rows, stabilized by per-row max
  // subtraction. Scalar output; an empty mask is an error.
  TensorRef softmax_cross_entropy(TensorRef logits, const LabelVector& labels,
                                  const std::vector<std::uint8_t>& mask);

  // loss must be 1x1. Throws on non-finite adjoints.
  void backward(TensorRef loss);

  const Matrix& value(TensorRef t) const;
  const Matrix& grad(TensorRef t) const;
  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    Matrix grad;  // accumulated over backward() calls
    bool requires_grad = false;
    Param* bound = nullptr;
    // Receives this node's adjoint and scatters into the input adjoints.
    std::function<void(const Matrix& out_adj, std::vector<Matrix>& adj)> backprop;
  };

  const Node& node(TensorRef t) const;
  TensorRef push(Matrix value, bool requires_grad,
                 std::function<void(const Matrix&, std::vector<Matrix>&)> backprop);

  std::vector<Node> nodes_;
};

}  // namespace fagcn
