#pragma once

#include <string>
#include <vector>

#include "fagcn/graph.hpp"

namespace fagcn {

// Eigensystem of a symmetric operator. Eigenvalues ascend; eigenvector l is
// column l of `eigenvectors`, sign-fixed so the first component above 1e-12
// in magnitude is positive.
struct SpectralDecomposition {
  std::vector<double> eigenvalues;
  Matrix eigenvectors;  // n x n, orthonormal columns

  int n() const { return static_cast<int>(eigenvalues.size()); }
};

// Spectral kernels over the normalized-Laplacian spectrum [0, 2]:
//   low          eps + 1 - lambda     (low-pass, keeps smooth signal)
//   high         eps - 1 + lambda     (high-pass, keeps differences)
//   low_squared  (eps + 1 - lambda)^2
//   high_squared (eps - 1 + lambda)^2
//   gcn          1 - lambda           (first-order baseline, ignores eps)
//   gcn_squared  (1 - lambda)^2
enum class FilterKind { low, high, low_squared, high_squared, gcn, gcn_squared };

FilterKind filter_kind_from_string(const std::string& s);
std::string to_string(FilterKind k);

struct FilterSpec {
  FilterKind kind = FilterKind::low;
  double epsilon = 0.3;  // in [0, 1]; ignored by the gcn kinds
};

// Dense cyclic Jacobi eigendecomposition. Refuses inputs larger than max_n;
// throws on asymmetric operators or if the off-diagonal mass has not fallen
// below 1e-12 after 100 sweeps.
SpectralDecomposition eigendecompose(const SparseOperator& op, int max_n = 2000);

// U^T x and U xhat.
std::vector<double> graph_fourier(const SpectralDecomposition& dec, const std::vector<double>& x);
std::vector<double> inverse_graph_fourier(const SpectralDecomposition& dec,
                                          const std::vector<double>& xhat);

// Kernel amplitude at lambda. Lambda outside [0, 2] is a domain error.
double filter_response(const FilterSpec& spec, double lambda);

// U diag(g(lambda)) U^T x.
Matrix apply_filter_spectral(const SpectralDecomposition& dec, const FilterSpec& spec,
                             const Matrix& x);

// Same operator realized with sparse products only: eps*x +/- A_norm x for
// the first-order kinds, A_norm x for gcn, squared kinds apply the
// first-order form twice. No eigendecomposition involved.
Matrix apply_filter_spatial(const Graph& g, const FilterSpec& spec, const Matrix& x);

// Distances between the two endpoints of an edge before and after one
// low/high aggregation step, computed from the aggregated pairs themselves:
//   d      = ||h_u - h_v||
//   d_low  = ||(eps h_u + h_v) - (eps h_v + h_u)||
//   d_high = ||(eps h_u - h_v) - (eps h_v - h_u)||
// Algebraically d_low = |1-eps| d and d_high = |1+eps| d; the closed forms
// are deliberately NOT used here so tests can pit one against the other.
struct SignalDistances {
  double d = 0.0;
  double d_low = 0.0;
  double d_high = 0.0;
};

SignalDistances signal_distances(const std::vector<double>& h_u, const std::vector<double>& h_v,
                                 double epsilon);

}  // namespace fagcn
