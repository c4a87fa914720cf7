#include "fagcn/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace fagcn {

FilterKind filter_kind_from_string(const std::string& s) {
  if (s == "low") return FilterKind::low;
  if (s == "high") return FilterKind::high;
  if (s == "low_squared") return FilterKind::low_squared;
  if (s == "high_squared") return FilterKind::high_squared;
  if (s == "gcn") return FilterKind::gcn;
  if (s == "gcn_squared") return FilterKind::gcn_squared;
  throw std::invalid_argument("filter_kind_from_string: unknown kind '" + s + "'");
}

std::string to_string(FilterKind k) {
  switch (k) {
    case FilterKind::low: return "low";
    case FilterKind::high: return "high";
    case FilterKind::low_squared: return "low_squared";
    case FilterKind::high_squared: return "high_squared";
    case FilterKind::gcn: return "gcn";
    case FilterKind::gcn_squared: return "gcn_squared";
  }
  throw std::invalid_argument("to_string: bad FilterKind");
}

namespace {

void check_epsilon(const FilterSpec& spec) {
  if (spec.kind == FilterKind::gcn || spec.kind == FilterKind::gcn_squared) return;
  if (!(spec.epsilon >= 0.0 && spec.epsilon <= 1.0))
    throw std::invalid_argument("filter spec: epsilon must lie in [0, 1]");
}

double off_diagonal_mass(const Matrix& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t j = 0; j < a.cols; ++j)
      if (i != j) s += a(i, j) * a(i, j);
  return std::sqrt(s);
}

}  // namespace

SpectralDecomposition eigendecompose(const SparseOperator& op, int max_n) {
  if (op.num_nodes > max_n)
    throw std::invalid_argument("eigendecompose: operator exceeds the size cap");
  Matrix a = to_dense(op);
  const std::size_t n = a.rows;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::abs(a(i, j) - a(j, i)) > 1e-12)
        throw std::invalid_argument("eigendecompose: operator is not symmetric");

  Matrix v = Matrix::identity(n);
  constexpr int kMaxSweeps = 100;
  constexpr double kOffTol = 1e-12;
  bool converged = (n < 2);
  for (int sweep = 0; sweep < kMaxSweeps && !converged; ++sweep) {
    if (off_diagonal_mass(a) < kOffTol) {
      converged = true;
      break;
    }
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        double t;
        if (std::abs(theta) > 1e150) {
          t = 1.0 / (2.0 * theta);
        } else {
          t = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
          if (theta < 0.0) t = -t;
        }
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        const double app = a(p, p), aqq = a(q, q);
        a(p, p) = app - t * apq;
        a(q, q) = aqq + t * apq;
        a(p, q) = a(q, p) = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
          if (r == p || r == q) continue;
          const double arp = a(r, p), arq = a(r, q);
          a(r, p) = a(p, r) = c * arp - s * arq;
          a(r, q) = a(q, r) = s * arp + c * arq;
        }
        for (std::size_t r = 0; r < n; ++r) {
          const double vrp = v(r, p), vrq = v(r, q);
          v(r, p) = c * vrp - s * vrq;
          v(r, q) = s * vrp + c * vrq;
        }
      }
    }
  }
  if (!converged && off_diagonal_mass(a) >= kOffTol)
    throw std::runtime_error("eigendecompose: Jacobi sweeps did not converge");

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int x, int y) { return a(x, x) < a(y, y); });

  SpectralDecomposition dec;
  dec.eigenvalues.resize(n);
  dec.eigenvectors = Matrix(n, n);
  for (std::size_t l = 0; l < n; ++l) {
    const int src = order[l];
    dec.eigenvalues[l] = a(src, src);
    double sign = 1.0;
    for (std::size_t r = 0; r < n; ++r) {
      if (std::abs(v(r, src)) > 1e-12) {
        sign = v(r, src) > 0.0 ? 1.0 : -1.0;
        break;
      }
    }
    for (std::size_t r = 0; r < n; ++r) dec.eigenvectors(r, l) = sign * v(r, src);
  }
  return dec;
}

std::vector<double> graph_fourier(const SpectralDecomposition& dec, const std::vector<double>& x) {
  const std::size_t n = dec.eigenvalues.size();
  if (x.size() != n) throw std::invalid_argument("graph_fourier: signal length mismatch");
  std::vector<double> xhat(n, 0.0);
  for (std::size_t l = 0; l < n; ++l) {
    double s = 0.0;
    for (std::size_t r = 0; r < n; ++r) s += dec.eigenvectors(r, l) * x[r];
    xhat[l] = s;
  }
  return xhat;
}

std::vector<double> inverse_graph_fourier(const SpectralDecomposition& dec,
                                          const std::vector<double>& xhat) {
  const std::size_t n = dec.eigenvalues.size();
  if (xhat.size() != n) throw std::invalid_argument("inverse_graph_fourier: signal length mismatch");
  std::vector<double> x(n, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    double s = 0.0;
    for (std::size_t l = 0; l < n; ++l) s += dec.eigenvectors(r, l) * xhat[l];
    x[r] = s;
  }
  return x;
}

double filter_response(const FilterSpec& spec, double lambda) {
  check_epsilon(spec);
  if (!(lambda >= 0.0 && lambda <= 2.0))
    throw std::invalid_argument("filter_response: lambda outside the spectrum [0, 2]");
  const double e = spec.epsilon;
  switch (spec.kind) {
    case FilterKind::low: return e + 1.0 - lambda;
    case FilterKind::high: return e - 1.0 + lambda;
    case FilterKind::low_squared: {
      const double r = e + 1.0 - lambda;
      return r * r;
    }
    case FilterKind::high_squared: {
      const double r = e - 1.0 + lambda;
      return r * r;
    }
    case FilterKind::gcn: return 1.0 - lambda;
    case FilterKind::gcn_squared: {
      const double r = 1.0 - lambda;
      return r * r;
    }
  }
  throw std::invalid_argument("filter_response: bad FilterKind");
}

Matrix apply_filter_spectral(const SpectralDecomposition& dec, const FilterSpec& spec,
                             const Matrix& x) {
  check_epsilon(spec);
  const std::size_t n = dec.eigenvalues.size();
  if (x.rows != n) throw std::invalid_argument("apply_filter_spectral: signal rows mismatch");
  // clamp tiny eigenvalue round-off into the kernel domain
  Matrix xhat(n, x.cols);
  for (std::size_t l = 0; l < n; ++l)
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t f = 0; f < x.cols; ++f) xhat(l, f) += dec.eigenvectors(r, l) * x(r, f);
  for (std::size_t l = 0; l < n; ++l) {
    const double lam = std::min(2.0, std::max(0.0, dec.eigenvalues[l]));
    const double gain = filter_response(spec, lam);
    for (std::size_t f = 0; f < x.cols; ++f) xhat(l, f) *= gain;
  }
  Matrix y(n, x.cols);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t l = 0; l < n; ++l)
      for (std::size_t f = 0; f < x.cols; ++f) y(r, f) += dec.eigenvectors(r, l) * xhat(l, f);
  return y;
}

namespace {

Matrix first_order_spatial(const SparseOperator& adj, FilterKind kind, double eps,
                           const Matrix& x) {
  Matrix ax = spmm(adj, x);
  Matrix y(x.rows, x.cols);
  switch (kind) {
    case FilterKind::low:
      for (std::size_t i = 0; i < x.size(); ++i) y.data[i] = eps * x.data[i] + ax.data[i];
      break;
    case FilterKind::high:
      for (std::size_t i = 0; i < x.size(); ++i) y.data[i] = eps * x.data[i] - ax.data[i];
      break;
    case FilterKind::gcn:
      y = std::move(ax);
      break;
    default:
      throw std::invalid_argument("first_order_spatial: not a first-order kind");
  }
  return y;
}

}  // namespace

Matrix apply_filter_spatial(const Graph& g, const FilterSpec& spec, const Matrix& x) {
  check_epsilon(spec);
  if (x.rows != static_cast<std::size_t>(g.num_nodes))
    throw std::invalid_argument("apply_filter_spatial: signal rows mismatch");
  const SparseOperator adj = sym_norm_adjacency(g);
  const double e = spec.epsilon;
  switch (spec.kind) {
    case FilterKind::low:
    case FilterKind::high:
    case FilterKind::gcn:
      return first_order_spatial(adj, spec.kind, e, x);
    case FilterKind::low_squared:
      return first_order_spatial(adj, FilterKind::low, e,
                                 first_order_spatial(adj, FilterKind::low, e, x));
    case FilterKind::high_squared:
      return first_order_spatial(adj, FilterKind::high, e,
                                 first_order_spatial(adj, FilterKind::high, e, x));
    case FilterKind::gcn_squared:
      return first_order_spatial(adj, FilterKind::gcn, e,
                                 first_order_spatial(adj, FilterKind::gcn, e, x));
  }
  throw std::invalid_argument("apply_filter_spatial: bad FilterKind");
}

SignalDistances signal_distances(const std::vector<double>& h_u, const std::vector<double>& h_v,
                                 double epsilon) {
  if (h_u.size() != h_v.size())
    throw std::invalid_argument("signal_distances: dimension mismatch");
  if (!(epsilon >= 0.0 && epsilon <= 1.0))
    throw std::invalid_argument("signal_distances: epsilon must lie in [0, 1]");
  double s = 0.0, s_low = 0.0, s_high = 0.0;
  for (std::size_t i = 0; i < h_u.size(); ++i) {
    const double d = h_u[i] - h_v[i];
    const double d_low = (epsilon * h_u[i] + h_v[i]) - (epsilon * h_v[i] + h_u[i]);
    const double d_high = (epsilon * h_u[i] - h_v[i]) - (epsilon * h_v[i] - h_u[i]);
    s += d * d;
    s_low += d_low * d_low;
    s_high += d_high * d_high;
  }
  return {std::sqrt(s), std::sqrt(s_low), std::sqrt(s_high)};
}

}  // namespace fagcn
