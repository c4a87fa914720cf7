#include "fagcn/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace fagcn {

std::vector<int> Graph::arc_sources() const {
  std::vector<int> src(col_indices.size());
  for (int i = 0; i < num_nodes; ++i)
    for (int k = row_offsets[i]; k < row_offsets[i + 1]; ++k) src[k] = i;
  return src;
}

Graph build_graph(const std::vector<std::pair<int, int>>& edges, int num_nodes) {
  if (num_nodes < 0) throw std::invalid_argument("build_graph: negative node count");
  std::vector<std::pair<int, int>> arcs;
  arcs.reserve(edges.size() * 2);
  for (const auto& [i, j] : edges) {
    if (i < 0 || i >= num_nodes || j < 0 || j >= num_nodes)
      throw std::invalid_argument("build_graph: edge endpoint out of range");
    if (i == j) continue;  // self-loops are dropped
    arcs.emplace_back(i, j);
    arcs.emplace_back(j, i);
  }
  std::sort(arcs.begin(), arcs.end());
  arcs.erase(std::unique(arcs.begin(), arcs.end()), arcs.end());

  Graph g;
  g.num_nodes = num_nodes;
  g.row_offsets.assign(num_nodes + 1, 0);
  g.col_indices.reserve(arcs.size());
  for (const auto& [i, j] : arcs) {
    g.row_offsets[i + 1]++;
    g.col_indices.push_back(j);
  }
  for (int i = 0; i < num_nodes; ++i) g.row_offsets[i + 1] += g.row_offsets[i];
  g.degrees.resize(num_nodes);
  for (int i = 0; i < num_nodes; ++i) g.degrees[i] = g.row_offsets[i + 1] - g.row_offsets[i];
  return g;
}

void validate_graph(const Graph& g) {
  if (g.num_nodes < 0) throw std::runtime_error("validate_graph: negative node count");
  if (static_cast<int>(g.row_offsets.size()) != g.num_nodes + 1)
    throw std::runtime_error("validate_graph: row_offsets size mismatch");
  if (g.row_offsets.front() != 0 || g.row_offsets.back() != g.num_arcs())
    throw std::runtime_error("validate_graph: row_offsets endpoints wrong");
  if (static_cast<int>(g.degrees.size()) != g.num_nodes)
    throw std::runtime_error("validate_graph: degrees size mismatch");
  for (int i = 0; i < g.num_nodes; ++i) {
    if (g.row_offsets[i] > g.row_offsets[i + 1])
      throw std::runtime_error("validate_graph: row_offsets not monotone");
    if (g.degrees[i] != g.row_offsets[i + 1] - g.row_offsets[i])
      throw std::runtime_error("validate_graph: degree/offset mismatch");
    for (int k = g.row_offsets[i]; k < g.row_offsets[i + 1]; ++k) {
      const int j = g.col_indices[k];
      if (j < 0 || j >= g.num_nodes) throw std::runtime_error("validate_graph: column out of range");
      if (j == i) throw std::runtime_error("validate_graph: self-loop stored");
      if (k > g.row_offsets[i] && g.col_indices[k - 1] >= j)
        throw std::runtime_error("validate_graph: columns not strictly ascending");
    }
  }
  // symmetry: every arc (i, j) must have its reverse
  for (int i = 0; i < g.num_nodes; ++i)
    for (int k = g.row_offsets[i]; k < g.row_offsets[i + 1]; ++k) {
      const int j = g.col_indices[k];
      const auto b = g.col_indices.begin() + g.row_offsets[j];
      const auto e = g.col_indices.begin() + g.row_offsets[j + 1];
      if (!std::binary_search(b, e, i)) throw std::runtime_error("validate_graph: missing reverse arc");
    }
}

SparseOperator sym_norm_adjacency(const Graph& g) {
  SparseOperator op;
  op.num_nodes = g.num_nodes;
  op.row_offsets = g.row_offsets;
  op.col_indices = g.col_indices;
  op.weights.resize(g.col_indices.size());
  for (int i = 0; i < g.num_nodes; ++i)
    for (int k = g.row_offsets[i]; k < g.row_offsets[i + 1]; ++k) {
      const int j = g.col_indices[k];
      op.weights[k] = 1.0 / std::sqrt(static_cast<double>(g.degrees[i]) * g.degrees[j]);
    }
  return op;
}

SparseOperator normalized_laplacian(const Graph& g) {
  SparseOperator op;
  op.num_nodes = g.num_nodes;
  op.row_offsets.assign(g.num_nodes + 1, 0);
  op.col_indices.reserve(g.col_indices.size() + g.num_nodes);
  op.weights.reserve(g.col_indices.size() + g.num_nodes);
  for (int i = 0; i < g.num_nodes; ++i) {
    bool diag_done = false;
    for (int k = g.row_offsets[i]; k < g.row_offsets[i + 1]; ++k) {
      const int j = g.col_indices[k];
      if (!diag_done && j > i) {
        op.col_indices.push_back(i);
        op.weights.push_back(1.0);
        diag_done = true;
      }
      op.col_indices.push_back(j);
      op.weights.push_back(-1.0 / std::sqrt(static_cast<double>(g.degrees[i]) * g.degrees[j]));
    }
    if (!diag_done) {
      op.col_indices.push_back(i);
      op.weights.push_back(1.0);
    }
    op.row_offsets[i + 1] = static_cast<int>(op.col_indices.size());
  }
  return op;
}

SparseOperator identity_operator(int n) {
  SparseOperator op;
  op.num_nodes = n;
  op.row_offsets.resize(n + 1);
  op.col_indices.resize(n);
  op.weights.assign(n, 1.0);
  for (int i = 0; i < n; ++i) {
    op.row_offsets[i + 1] = i + 1;
    op.col_indices[i] = i;
  }
  return op;
}

Matrix spmm(const SparseOperator& op, const Matrix& x) {
  if (x.rows != static_cast<std::size_t>(op.num_nodes))
    throw std::invalid_argument("spmm: row count does not match operator size");
  Matrix y(x.rows, x.cols);
  for (int i = 0; i < op.num_nodes; ++i)
    for (int k = op.row_offsets[i]; k < op.row_offsets[i + 1]; ++k) {
      const int j = op.col_indices[k];
      const double w = op.weights[k];
      for (std::size_t f = 0; f < x.cols; ++f) y(i, f) += w * x(j, f);
    }
  return y;
}

Matrix to_dense(const SparseOperator& op) {
  Matrix m(op.num_nodes, op.num_nodes);
  for (int i = 0; i < op.num_nodes; ++i)
    for (int k = op.row_offsets[i]; k < op.row_offsets[i + 1]; ++k)
      m(i, op.col_indices[k]) += op.weights[k];
  return m;
}

double label_assortativity(const Graph& g, const LabelVector& labels) {
  if (static_cast<int>(labels.size()) != g.num_nodes)
    throw std::invalid_argument("label_assortativity: label count does not match graph");
  if (g.num_arcs() == 0)
    throw std::invalid_argument("label_assortativity: undefined on an edgeless graph");
  int num_classes = 0;
  for (int y : labels) {
    if (y < 0) throw std::invalid_argument("label_assortativity: negative label");
    num_classes = std::max(num_classes, y + 1);
  }
  // e[a][b]: fraction of arcs from class a to class b; symmetric here since
  // every edge contributes both directions.
  std::vector<double> e(static_cast<std::size_t>(num_classes) * num_classes, 0.0);
  const double inv = 1.0 / g.num_arcs();
  for (int i = 0; i < g.num_nodes; ++i)
    for (int k = g.row_offsets[i]; k < g.row_offsets[i + 1]; ++k)
      e[static_cast<std::size_t>(labels[i]) * num_classes + labels[g.col_indices[k]]] += inv;
  double trace = 0.0, agreement = 0.0;
  for (int a = 0; a < num_classes; ++a) {
    trace += e[static_cast<std::size_t>(a) * num_classes + a];
    double row = 0.0;
    for (int b = 0; b < num_classes; ++b) row += e[static_cast<std::size_t>(a) * num_classes + b];
    agreement += row * row;
  }
  const double denom = 1.0 - agreement;
  if (denom < 1e-15) return 1.0;  // single mixing cell: perfectly assortative
  return (trace - agreement) / denom;
}

Graph read_graph_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_graph_text: cannot open " + path);
  int n = 0, m = 0;
  if (!(in >> n >> m)) throw std::runtime_error("read_graph_text: bad header in " + path);
  std::vector<std::pair<int, int>> edges;
  edges.reserve(m);
  for (int k = 0; k < m; ++k) {
    int i = 0, j = 0;
    if (!(in >> i >> j)) throw std::runtime_error("read_graph_text: truncated edge list in " + path);
    edges.emplace_back(i, j);
  }
  return build_graph(edges, n);
}

void write_graph_text(const std::string& path, const Graph& g) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_graph_text: cannot open " + path);
  out << g.num_nodes << ' ' << g.num_edges() << '\n';
  for (int i = 0; i < g.num_nodes; ++i)
    for (int k = g.row_offsets[i]; k < g.row_offsets[i + 1]; ++k)
      if (i < g.col_indices[k]) out << i << ' ' << g.col_indices[k] << '\n';
  if (!out) throw std::runtime_error("write_graph_text: write failed for " + path);
}

}  // namespace fagcn
