#pragma once

#include <string>
#include <utility>
#include <vector>

#include "fagcn/matrix.hpp"

namespace fagcn {

// Per-node class ids in [0, K).
using LabelVector = std::vector<int>;

// Undirected graph in CSR form. Every edge is stored as two directed arcs,
// columns are sorted within each row, and there are no self-loops or
// duplicate arcs. The self-contribution of a node is handled by the models
// (the epsilon residual, or explicit self-loops in the GCN baseline), never
// by the stored structure.
struct Graph {
  int num_nodes = 0;
  std::vector<int> row_offsets;  // size num_nodes + 1
  std::vector<int> col_indices;  // size 2 * num_edges
  std::vector<int> degrees;      // degrees[i] == row_offsets[i+1] - row_offsets[i]

  int num_arcs() const { return static_cast<int>(col_indices.size()); }
  int num_edges() const { return num_arcs() / 2; }

  // Row owner of every arc, in CSR order. col_indices[a] is the arc target.
  std::vector<int> arc_sources() const;
};

// Symmetrizes, deduplicates and strips self-loops. Node ids outside
// [0, num_nodes) are an error.
Graph build_graph(const std::vector<std::pair<int, int>>& edges, int num_nodes);

// Throws if the CSR invariants (sorted rows, symmetry, no self-loops or
// duplicates, consistent degrees) do not hold.
void validate_graph(const Graph& g);

// Symmetric real N x N matrix on the graph's sparsity pattern (plus an
// explicit diagonal where the operator needs one).
struct SparseOperator {
  int num_nodes = 0;
  std::vector<int> row_offsets;
  std::vector<int> col_indices;
  std::vector<double> weights;
};

// D^{-1/2} A D^{-1/2}; arc (i, j) carries 1/sqrt(d_i d_j). Rows of isolated
// nodes are empty.
SparseOperator sym_norm_adjacency(const Graph& g);

// I - D^{-1/2} A D^{-1/2} with an explicit unit diagonal (also for isolated
// nodes).
SparseOperator normalized_laplacian(const Graph& g);

SparseOperator identity_operator(int n);

// Sparse-times-dense product. Per-row accumulation runs in ascending column
// order, so results are bitwise reproducible.
Matrix spmm(const SparseOperator& op, const Matrix& x);

Matrix to_dense(const SparseOperator& op);

// Newman's discrete assortativity of the node labels over the edge set.
// +1 when every edge is intra-class, -1 for a balanced bipartite split,
// 0 when endpoints mix as if at random. Edgeless graphs are an error.
double label_assortativity(const Graph& g, const LabelVector& labels);

// Text format: header "N M" followed by M lines "i j" (0-based endpoints).
// Reading runs the same cleanup as build_graph.
Graph read_graph_text(const std::string& path);
void write_graph_text(const std::string& path, const Graph& g);

}  // namespace fagcn
