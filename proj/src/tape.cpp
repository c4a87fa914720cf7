#include "fagcn/tape.hpp"

#include <cmath>
#include <stdexcept>

#include "fagcn/rng.hpp"

namespace fagcn {

void glorot_init(Param& p, SplitMix64& rng, double scale) {
  const double a = scale * std::sqrt(6.0 / static_cast<double>(p.value.rows + p.value.cols));
  for (double& w : p.value.data) w = rng.uniform(-a, a);
}

const Tape::Node& Tape::node(TensorRef t) const {
  if (t.id < 0 || t.id >= static_cast<int>(nodes_.size()))
    throw std::invalid_argument("tape: tensor handle out of range");
  return nodes_[t.id];
}

TensorRef Tape::push(Matrix value, bool requires_grad,
                     std::function<void(const Matrix&, std::vector<Matrix>&)> backprop) {
  Node n;
  n.grad = Matrix(value.rows, value.cols);
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  n.backprop = std::move(backprop);
  nodes_.push_back(std::move(n));
  return {static_cast<int>(nodes_.size()) - 1};
}

TensorRef Tape::constant(Matrix m) { return push(std::move(m), false, nullptr); }

TensorRef Tape::variable(Matrix m) { return push(std::move(m), true, nullptr); }

TensorRef Tape::leaf(Param& p) {
  TensorRef t = push(p.value, true, nullptr);
  nodes_[t.id].bound = &p;
  return t;
}

TensorRef Tape::matmul(TensorRef a, TensorRef b) {
  const Matrix& av = node(a).value;
  const Matrix& bv = node(b).value;
  if (av.cols != bv.rows) throw std::invalid_argument("matmul: inner dimension mismatch");
  Matrix out = dense_matmul(av, bv);
  const int ia = a.id, ib = b.id;
  return push(std::move(out), node(a).requires_grad || node(b).requires_grad,
              [this, ia, ib](const Matrix& g, std::vector<Matrix>& adj) {
                const Matrix& av = nodes_[ia].value;
                const Matrix& bv = nodes_[ib].value;
                if (nodes_[ia].requires_grad) {  // dA += g B^T
                  Matrix& da = adj[ia];
                  for (std::size_t i = 0; i < da.rows; ++i)
                    for (std::size_t j = 0; j < bv.rows; ++j) {
                      double s = 0.0;
                      for (std::size_t k = 0; k < g.cols; ++k) s += g(i, k) * bv(j, k);
                      da(i, j) += s;
                    }
                }
                if (nodes_[ib].requires_grad) {  // dB += A^T g
                  Matrix& db = adj[ib];
                  for (std::size_t i = 0; i < av.rows; ++i)
                    for (std::size_t j = 0; j < av.cols; ++j) {
                      const double aij = av(i, j);
                      if (aij == 0.0) continue;
                      for (std::size_t k = 0; k < g.cols; ++k) db(j, k) += aij * g(i, k);
                    }
                }
              });
}

TensorRef Tape::add(TensorRef a, TensorRef b) {
  const Matrix& av = node(a).value;
  const Matrix& bv = node(b).value;
  if (!av.same_shape(bv)) throw std::invalid_argument("add: shape mismatch");
  Matrix out(av.rows, av.cols);
  for (std::size_t i = 0; i < out.size(); ++i) out.data[i] = av.data[i] + bv.data[i];
  const int ia = a.id, ib = b.id;
  return push(std::move(out), node(a).requires_grad || node(b).requires_grad,
              [this, ia, ib](const Matrix& g, std::vector<Matrix>& adj) {
                if (nodes_[ia].requires_grad)
                  for (std::size_t i = 0; i < g.size(); ++i) adj[ia].data[i] += g.data[i];
                if (nodes_[ib].requires_grad)
                  for (std::size_t i = 0; i < g.size(); ++i) adj[ib].data[i] += g.data[i];
              });
}

TensorRef Tape::scale(TensorRef a, double c) {
  const Matrix& av = node(a).value;
  Matrix out(av.rows, av.cols);
  for (std::size_t i = 0; i < out.size(); ++i) out.data[i] = c * av.data[i];
  const int ia = a.id;
  return push(std::move(out), node(a).requires_grad,
              [this, ia, c](const Matrix& g, std::vector<Matrix>& adj) {
                if (nodes_[ia].requires_grad)
                  for (std::size_t i = 0; i < g.size(); ++i) adj[ia].data[i] += c * g.data[i];
              });
}

TensorRef Tape::mul(TensorRef a, TensorRef b) {
  const Matrix& av = node(a).value;
  const Matrix& bv = node(b).value;
  if (!av.same_shape(bv)) throw std::invalid_argument("mul: shape mismatch");
  Matrix out(av.rows, av.cols);
  for (std::size_t i = 0; i < out.size(); ++i) out.data[i] = av.data[i] * bv.data[i];
  const int ia = a.id, ib = b.id;
  return push(std::move(out), node(a).requires_grad || node(b).requires_grad,
              [this, ia, ib](const Matrix& g, std::vector<Matrix>& adj) {
                const Matrix& av = nodes_[ia].value;
                const Matrix& bv = nodes_[ib].value;
                if (nodes_[ia].requires_grad)
                  for (std::size_t i = 0; i < g.size(); ++i) adj[ia].data[i] += g.data[i] * bv.data[i];
                if (nodes_[ib].requires_grad)
                  for (std::size_t i = 0; i < g.size(); ++i) adj[ib].data[i] += g.data[i] * av.data[i];
              });
}

TensorRef Tape::add_rowvec(TensorRef a, TensorRef bias) {
  const Matrix& av = node(a).value;
  const Matrix& bv = node(bias).value;
  if (bv.rows != 1 || bv.cols != av.cols)
    throw std::invalid_argument("add_rowvec: bias must be 1 x cols of the input");
  Matrix out(av.rows, av.cols);
  for (std::size_t i = 0; i < av.rows; ++i)
    for (std::size_t j = 0; j < av.cols; ++j) out(i, j) = av(i, j) + bv(0, j);
  const int ia = a.id, ib = bias.id;
  return push(std::move(out), node(a).requires_grad || node(bias).requires_grad,
              [this, ia, ib](const Matrix& g, std::vector<Matrix>& adj) {
                if (nodes_[ia].requires_grad)
                  for (std::size_t i = 0; i < g.size(); ++i) adj[ia].data[i] += g.data[i];
                if (nodes_[ib].requires_grad)
                  for (std::size_t i = 0; i < g.rows; ++i)
                    for (std::size_t j = 0; j < g.cols; ++j) adj[ib](0, j) += g(i, j);
              });
}

TensorRef Tape::relu(TensorRef a) {
  const Matrix& av = node(a).value;
  Matrix out(av.rows, av.cols);
  for (std::size_t i = 0; i < out.size(); ++i) out.data[i] = av.data[i] > 0.0 ? av.data[i] : 0.0;
  const int ia = a.id;
  return push(std::move(out), node(a).requires_grad,
              [this, ia](const Matrix& g, std::vector<Matrix>& adj) {
                if (!nodes_[ia].requires_grad) return;
                const Matrix& av = nodes_[ia].value;
                for (std::size_t i = 0; i < g.size(); ++i)
                  if (av.data[i] > 0.0) adj[ia].data[i] += g.data[i];
              });
}

TensorRef Tape::tanh(TensorRef a) {
  const Matrix& av = node(a).value;
  Matrix out(av.rows, av.cols);
  for (std::size_t i = 0; i < out.size(); ++i) out.data[i] = std::tanh(av.data[i]);
  const int ia = a.id, iy = static_cast<int>(nodes_.size());
  return push(std::move(out), node(a).requires_grad,
              [this, ia, iy](const Matrix& g, std::vector<Matrix>& adj) {
                if (!nodes_[ia].requires_grad) return;
                const Matrix& y = nodes_[iy].value;
                for (std::size_t i = 0; i < g.size(); ++i)
                  adj[ia].data[i] += g.data[i] * (1.0 - y.data[i] * y.data[i]);
              });
}

TensorRef Tape::dropout(TensorRef a, double rate, std::uint64_t seed, bool train) {
  if (!(rate >= 0.0 && rate < 1.0)) throw std::invalid_argument("dropout: rate must lie in [0, 1)");
  const Matrix& av = node(a).value;
  const int ia = a.id;
  if (!train || rate == 0.0) {
    Matrix out = av;
    return push(std::move(out), node(a).requires_grad,
                [this, ia](const Matrix& g, std::vector<Matrix>& adj) {
                  if (nodes_[ia].requires_grad)
                    for (std::size_t i = 0; i < g.size(); ++i) adj[ia].data[i] += g.data[i];
                });
  }
  SplitMix64 rng = substream(seed, StreamTag::dropout);
  const double keep_scale = 1.0 / (1.0 - rate);
  std::vector<double> mask(av.size());
  for (double& m : mask) m = rng.uniform() < rate ? 0.0 : keep_scale;
  Matrix out(av.rows, av.cols);
  for (std::size_t i = 0; i < out.size(); ++i) out.data[i] = av.data[i] * mask[i];
  return push(std::move(out), node(a).requires_grad,
              [this, ia, mask = std::move(mask)](const Matrix& g, std::vector<Matrix>& adj) {
                if (!nodes_[ia].requires_grad) return;
                for (std::size_t i = 0; i < g.size(); ++i) adj[ia].data[i] += g.data[i] * mask[i];
              });
}

TensorRef Tape::concat_cols(TensorRef a, TensorRef b) {
  const Matrix& av = node(a).value;
  const Matrix& bv = node(b).value;
  if (av.rows != bv.rows) throw std::invalid_argument("concat_cols: row count mismatch");
  Matrix out(av.rows, av.cols + bv.cols);
  for (std::size_t i = 0; i < av.rows; ++i) {
    for (std::size_t j = 0; j < av.cols; ++j) out(i, j) = av(i, j);
    for (std::size_t j = 0; j < bv.cols; ++j) out(i, av.cols + j) = bv(i, j);
  }
  const int ia = a.id, ib = b.id;
  const std::size_t ac = av.cols;
  return push(std::move(out), node(a).requires_grad || node(b).requires_grad,
              [this, ia, ib, ac](const Matrix& g, std::vector<Matrix>& adj) {
                if (nodes_[ia].requires_grad)
                  for (std::size_t i = 0; i < g.rows; ++i)
                    for (std::size_t j = 0; j < ac; ++j) adj[ia](i, j) += g(i, j);
                if (nodes_[ib].requires_grad)
                  for (std::size_t i = 0; i < g.rows; ++i)
                    for (std::size_t j = ac; j < g.cols; ++j) adj[ib](i, j - ac) += g(i, j);
              });
}

TensorRef Tape::gather_rows(TensorRef a, std::vector<int> rows) {
  const Matrix& av = node(a).value;
  for (int r : rows)
    if (r < 0 || r >= static_cast<int>(av.rows))
      throw std::invalid_argument("gather_rows: row index out of range");
  Matrix out(rows.size(), av.cols);
  for (std::size_t k = 0; k < rows.size(); ++k)
    for (std::size_t j = 0; j < av.cols; ++j) out(k, j) = av(rows[k], j);
  const int ia = a.id;
  return push(std::move(out), node(a).requires_grad,
              [this, ia, rows = std::move(rows)](const Matrix& g, std::vector<Matrix>& adj) {
                if (!nodes_[ia].requires_grad) return;
                for (std::size_t k = 0; k < rows.size(); ++k)
                  for (std::size_t j = 0; j < g.cols; ++j) adj[ia](rows[k], j) += g(k, j);
              });
}

TensorRef Tape::edge_scatter_sum(TensorRef edge_values, TensorRef messages, std::vector<int> targets,
                                 int num_nodes) {
  const Matrix& ev = node(edge_values).value;
  const Matrix& mv = node(messages).value;
  if (ev.cols != 1) throw std::invalid_argument("edge_scatter_sum: edge_values must be column-shaped");
  if (ev.rows != mv.rows || ev.rows != targets.size())
    throw std::invalid_argument("edge_scatter_sum: arc count mismatch");
  for (int t : targets)
    if (t < 0 || t >= num_nodes)
      throw std::invalid_argument("edge_scatter_sum: target index out of range");
  Matrix out(num_nodes, mv.cols);
  for (std::size_t k = 0; k < targets.size(); ++k) {
    const double w = ev(k, 0);
    for (std::size_t j = 0; j < mv.cols; ++j) out(targets[k], j) += w * mv(k, j);
  }
  const int ie = edge_values.id, im = messages.id;
  return push(std::move(out), node(edge_values).requires_grad || node(messages).requires_grad,
              [this, ie, im, targets = std::move(targets)](const Matrix& g, std::vector<Matrix>& adj) {
                const Matrix& ev = nodes_[ie].value;
                const Matrix& mv = nodes_[im].value;
                const bool need_e = nodes_[ie].requires_grad;
                const bool need_m = nodes_[im].requires_grad;
                for (std::size_t k = 0; k < targets.size(); ++k) {
                  const int t = targets[k];
                  if (need_e) {
                    double s = 0.0;
                    for (std::size_t j = 0; j < mv.cols; ++j) s += g(t, j) * mv(k, j);
                    adj[ie](k, 0) += s;
                  }
                  if (need_m) {
                    const double w = ev(k, 0);
                    for (std::size_t j = 0; j < mv.cols; ++j) adj[im](k, j) += w * g(t, j);
                  }
                }
              });
}

TensorRef Tape::sum_all(TensorRef a) {
  const Matrix& av = node(a).value;
  Matrix out(1, 1);
  double s = 0.0;
  for (double v : av.data) s += v;
  out(0, 0) = s;
  const int ia = a.id;
  return push(std::move(out), node(a).requires_grad,
              [this, ia](const Matrix& g, std::vector<Matrix>& adj) {
                if (!nodes_[ia].requires_grad) return;
                const double gs = g(0, 0);
                for (double& v : adj[ia].data) v += gs;
              });
}

TensorRef Tape::softmax_cross_entropy(TensorRef logits, const LabelVector& labels,
                                      const std::vector<std::uint8_t>& mask) {
  const Matrix& lv = node(logits).value;
  if (lv.cols < 2) throw std::invalid_argument("softmax_cross_entropy: need at least two classes");
  if (labels.size() != lv.rows || mask.size() != lv.rows)
    throw std::invalid_argument("softmax_cross_entropy: labels/mask length mismatch");
  std::vector<int> rows;
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask[i]) rows.push_back(static_cast<int>(i));
  if (rows.empty()) throw std::invalid_argument("softmax_cross_entropy: empty mask");
  for (int i : rows)
    if (labels[i] < 0 || labels[i] >= static_cast<int>(lv.cols))
      throw std::invalid_argument("softmax_cross_entropy: label out of range");

  // probs for the masked rows; reused verbatim in the backward rule
  Matrix probs(rows.size(), lv.cols);
  double loss = 0.0;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const int i = rows[r];
    double mx = lv(i, 0);
    for (std::size_t k = 1; k < lv.cols; ++k) mx = std::max(mx, lv(i, k));
    double denom = 0.0;
    for (std::size_t k = 0; k < lv.cols; ++k) {
      probs(r, k) = std::exp(lv(i, k) - mx);
      denom += probs(r, k);
    }
    for (std::size_t k = 0; k < lv.cols; ++k) probs(r, k) /= denom;
    loss -= std::log(probs(r, labels[i]));
  }
  Matrix out(1, 1);
  out(0, 0) = loss / static_cast<double>(rows.size());

  const int il = logits.id;
  std::vector<int> labs(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) labs[r] = labels[rows[r]];
  return push(std::move(out), node(logits).requires_grad,
              [this, il, rows = std::move(rows), labs = std::move(labs),
               probs = std::move(probs)](const Matrix& g, std::vector<Matrix>& adj) {
                if (!nodes_[il].requires_grad) return;
                const double gs = g(0, 0) / static_cast<double>(rows.size());
                for (std::size_t r = 0; r < rows.size(); ++r)
                  for (std::size_t k = 0; k < probs.cols; ++k)
                    adj[il](rows[r], k) +=
                        gs * (probs(r, k) - (static_cast<int>(k) == labs[r] ? 1.0 : 0.0));
              });
}

void Tape::backward(TensorRef loss) {
  const Node& top = node(loss);
  if (top.value.rows != 1 || top.value.cols != 1)
    throw std::invalid_argument("backward: loss must be a 1x1 tensor");
  std::vector<Matrix> adj(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i)
    adj[i] = Matrix(nodes_[i].value.rows, nodes_[i].value.cols);
  adj[loss.id](0, 0) = 1.0;
  for (int i = loss.id; i >= 0; --i)
    if (nodes_[i].backprop && nodes_[i].requires_grad) nodes_[i].backprop(adj[i], adj);
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!nodes_[i].requires_grad) continue;
    for (double v : adj[i].data)
      if (!std::isfinite(v)) throw std::runtime_error("backward: non-finite adjoint");
    for (std::size_t k = 0; k < adj[i].size(); ++k) nodes_[i].grad.data[k] += adj[i].data[k];
    if (nodes_[i].bound)
      for (std::size_t k = 0; k < adj[i].size(); ++k) nodes_[i].bound->grad.data[k] += adj[i].data[k];
  }
}

const Matrix& Tape::value(TensorRef t) const { return node(t).value; }

const Matrix& Tape::grad(TensorRef t) const { return node(t).grad; }

}  // namespace fagcn
