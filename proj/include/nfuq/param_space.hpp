#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace nfuq {

/// One scalar random parameter: its domain, density family, and the data
/// field it feeds (kernel | firing | forcing | initial).
struct Dimension {
  enum class Kind { UniformBounded, Normal };

  Kind kind = Kind::UniformBounded;
  double p1 = -1.0;  // a (uniform) or mu (normal)
  double p2 = 1.0;   // b (uniform) or sigma (normal)
  std::string label;

  static Dimension uniform(double a, double b, std::string label = {}) {
    if (!(a < b)) throw std::invalid_argument("Dimension::uniform: requires a < b");
    return {Kind::UniformBounded, a, b, std::move(label)};
  }

  static Dimension normal(double mu, double sigma, std::string label = {}) {
    if (!(sigma > 0.0))
      throw std::invalid_argument("Dimension::normal: requires sigma > 0");
    return {Kind::Normal, mu, sigma, std::move(label)};
  }

  /// Centre of the density: (a+b)/2 for uniform, mu for normal.
  double midpoint() const {
    return kind == Kind::UniformBounded ? 0.5 * (p1 + p2) : p1;
  }
};

/// Gamma = Gamma_1 x ... x Gamma_m with product density rho = prod rho_i.
struct ParameterSpace {
  std::vector<Dimension> dims;

  std::size_t size() const { return dims.size(); }
};

/// Density-weighted Gauss rule for one dimension; weights are probabilists'
/// weights and sum to 1.
struct QuadratureRule1D {
  std::vector<double> nodes;
  std::vector<double> weights;
  int dim_index = 0;
};

namespace detail {

/// Golub-Welsch: nodes are eigenvalues of the symmetric tridiagonal Jacobi
/// matrix, weights are mu0 * (first eigenvector component)^2. With the
/// density normalized, mu0 = 1.
inline QuadratureRule1D golub_welsch(const std::vector<double>& diag,
                                     const std::vector<double>& offdiag,
                                     int dim_index) {
  const int p = static_cast<int>(diag.size());
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(p, p);
  for (int i = 0; i < p; ++i) jacobi(i, i) = diag[i];
  for (int i = 0; i + 1 < p; ++i) {
    jacobi(i, i + 1) = offdiag[i];
    jacobi(i + 1, i) = offdiag[i];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
  if (eig.info() != Eigen::Success)
    throw std::runtime_error("golub_welsch: eigendecomposition failed");
  QuadratureRule1D rule;
  rule.dim_index = dim_index;
  rule.nodes.resize(p);
  rule.weights.resize(p);
  for (int j = 0; j < p; ++j) {
    rule.nodes[j] = eig.eigenvalues()(j);  // ascending
    const double v0 = eig.eigenvectors()(0, j);
    rule.weights[j] = v0 * v0;
  }
  return rule;
}

}  // namespace detail

/// Gauss-Legendre rule on [a,b], weights normalized by the uniform density
/// 1/(b-a) so they sum to 1. Exact for polynomial densities of degree
/// <= 2*points-1.
inline QuadratureRule1D gauss_legendre(int points, double a, double b,
                                       int dim_index = 0) {
  if (points < 1) throw std::invalid_argument("gauss_legendre: points < 1");
  if (!(a < b)) throw std::invalid_argument("gauss_legendre: requires a < b");
  std::vector<double> diag(points, 0.0), off(points > 1 ? points - 1 : 0);
  for (int k = 1; k < points; ++k)
    off[k - 1] = k / std::sqrt(4.0 * k * k - 1.0);
  QuadratureRule1D rule = detail::golub_welsch(diag, off, dim_index);
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  for (auto& x : rule.nodes) x = mid + half * x;
  return rule;
}

/// Probabilists' Gauss-Hermite rule for N(mu, sigma): nodes are
/// mu + sigma*sqrt(2)*z_j with z_j the physicists' Hermite roots; weights
/// sum to 1 and E[p(Y)] is exact for deg p <= 2*points-1.
inline QuadratureRule1D gauss_hermite(int points, double mu, double sigma,
                                      int dim_index = 0) {
  if (points < 1) throw std::invalid_argument("gauss_hermite: points < 1");
  if (!(sigma > 0.0)) throw std::invalid_argument("gauss_hermite: sigma <= 0");
  std::vector<double> diag(points, 0.0), off(points > 1 ? points - 1 : 0);
  for (int k = 1; k < points; ++k) off[k - 1] = std::sqrt(0.5 * k);
  QuadratureRule1D rule = detail::golub_welsch(diag, off, dim_index);
  const double scale = sigma * std::sqrt(2.0);
  for (auto& x : rule.nodes) x = mu + scale * x;
  return rule;
}

/// Rule for a dimension's own density family.
inline QuadratureRule1D make_rule(const Dimension& dim, int points,
                                  int dim_index = 0) {
  return dim.kind == Dimension::Kind::UniformBounded
             ? gauss_legendre(points, dim.p1, dim.p2, dim_index)
             : gauss_hermite(points, dim.p1, dim.p2, dim_index);
}

/// Barycentric (second form) interpolation weights for distinct nodes,
/// rescaled by the node-span to avoid overflow; the common factor cancels.
inline std::vector<double> barycentric_weights(std::span<const double> nodes) {
  const std::size_t p = nodes.size();
  if (p == 0) throw std::invalid_argument("barycentric_weights: empty nodes");
  double span = 1.0;
  if (p > 1) {
    double lo = nodes[0], hi = nodes[0];
    for (double x : nodes) {
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
    span = 0.25 * (hi - lo);
    if (span == 0.0) span = 1.0;
  }
  std::vector<double> w(p, 1.0);
  for (std::size_t j = 0; j < p; ++j) {
    for (std::size_t r = 0; r < p; ++r) {
      if (r == j) continue;
      const double d = (nodes[j] - nodes[r]) / span;
      if (d == 0.0)
        throw std::invalid_argument("barycentric_weights: duplicate nodes");
      w[j] /= d;
    }
  }
  return w;
}

/// Dense tensor-product grid: orders q = (q_1..q_m), p_i = q_i + 1 points
/// per dimension, d(q) = prod p_i total nodes.
struct TensorGrid {
  std::vector<int> orders;
  std::vector<QuadratureRule1D> rules;
  std::vector<std::vector<double>> bary;  // barycentric weights per dim
  std::size_t total = 0;

  std::size_t dim() const { return orders.size(); }
};

inline TensorGrid make_tensor_grid(const ParameterSpace& space,
                                   std::vector<int> orders) {
  if (orders.size() != space.size())
    throw std::invalid_argument("make_tensor_grid: orders/dims length mismatch");
  TensorGrid grid;
  grid.orders = std::move(orders);
  grid.total = 1;
  for (std::size_t i = 0; i < space.size(); ++i) {
    if (grid.orders[i] < 0)
      throw std::invalid_argument("make_tensor_grid: negative order");
    grid.rules.push_back(
        make_rule(space.dims[i], grid.orders[i] + 1, static_cast<int>(i)));
    grid.bary.push_back(barycentric_weights(grid.rules.back().nodes));
    grid.total *= static_cast<std::size_t>(grid.orders[i] + 1);
  }
  return grid;
}

/// Global index k = 1 + sum_i k_i * prod_{j<i}(q_j+1), a bijection from
/// multi-indices {0..q_1}x...x{0..q_m} onto {1..d(q)}.
inline std::size_t global_index(std::span<const int> multi,
                                const TensorGrid& grid) {
  if (multi.size() != grid.dim())
    throw std::invalid_argument("global_index: multi-index length mismatch");
  std::size_t k = 0, stride = 1;
  for (std::size_t i = 0; i < multi.size(); ++i) {
    if (multi[i] < 0 || multi[i] > grid.orders[i])
      throw std::out_of_range("global_index: multi-index out of range");
    k += static_cast<std::size_t>(multi[i]) * stride;
    stride *= static_cast<std::size_t>(grid.orders[i] + 1);
  }
  return k + 1;
}

inline std::vector<int> multi_index(std::size_t k, const TensorGrid& grid) {
  if (k < 1 || k > grid.total)
    throw std::out_of_range("multi_index: global index out of range");
  std::size_t rem = k - 1;
  std::vector<int> multi(grid.dim());
  for (std::size_t i = 0; i < grid.dim(); ++i) {
    const std::size_t p = static_cast<std::size_t>(grid.orders[i] + 1);
    multi[i] = static_cast<int>(rem % p);
    rem /= p;
  }
  return multi;
}

/// All collocation points y_k in global-index order.
inline std::vector<std::vector<double>> tensor_nodes(const TensorGrid& grid) {
  std::vector<std::vector<double>> pts(grid.total,
                                       std::vector<double>(grid.dim()));
  std::vector<int> multi(grid.dim(), 0);
  for (std::size_t k = 0; k < grid.total; ++k) {
    for (std::size_t i = 0; i < grid.dim(); ++i)
      pts[k][i] = grid.rules[i].nodes[static_cast<std::size_t>(multi[i])];
    // odometer increment in dimension-major order matching global_index
    for (std::size_t i = 0; i < grid.dim(); ++i) {
      if (++multi[i] <= grid.orders[i]) break;
      multi[i] = 0;
    }
  }
  return pts;
}

/// Product weight omega_k = prod_i w_{i,k_i}; these sum to 1 over the grid.
inline std::vector<double> tensor_weights(const TensorGrid& grid) {
  std::vector<double> w(grid.total, 1.0);
  std::vector<int> multi(grid.dim(), 0);
  for (std::size_t k = 0; k < grid.total; ++k) {
    for (std::size_t i = 0; i < grid.dim(); ++i)
      w[k] *= grid.rules[i].weights[static_cast<std::size_t>(multi[i])];
    for (std::size_t i = 0; i < grid.dim(); ++i) {
      if (++multi[i] <= grid.orders[i]) break;
      multi[i] = 0;
    }
  }
  return w;
}

namespace detail {

/// Per-dimension Lagrange basis values l_{i,j}(y_i) via the second
/// barycentric form; exact delta property when y_i hits a node.
inline void lagrange_basis_1d(const std::vector<double>& nodes,
                              const std::vector<double>& bary, double y,
                              std::vector<double>& out) {
  const std::size_t p = nodes.size();
  out.assign(p, 0.0);
  for (std::size_t j = 0; j < p; ++j) {
    if (y == nodes[j]) {
      out[j] = 1.0;
      return;
    }
  }
  double denom = 0.0;
  for (std::size_t j = 0; j < p; ++j) {
    out[j] = bary[j] / (y - nodes[j]);
    denom += out[j];
  }
  for (std::size_t j = 0; j < p; ++j) out[j] /= denom;
}

}  // namespace detail

/// Tensor Lagrange interpolant I_q: sum_k values_k * prod_i l_{i,k_i}(y_i).
/// values are indexed by global_index (1-based index k stored at values[k-1]).
inline double tensor_lagrange_eval(const TensorGrid& grid,
                                   std::span<const double> values,
                                   std::span<const double> y) {
  if (values.size() != grid.total)
    throw std::invalid_argument("tensor_lagrange_eval: values length mismatch");
  if (y.size() != grid.dim())
    throw std::invalid_argument("tensor_lagrange_eval: point dim mismatch");
  std::vector<std::vector<double>> basis(grid.dim());
  for (std::size_t i = 0; i < grid.dim(); ++i)
    detail::lagrange_basis_1d(grid.rules[i].nodes, grid.bary[i], y[i],
                              basis[i]);
  double acc = 0.0;
  std::vector<int> multi(grid.dim(), 0);
  for (std::size_t k = 0; k < grid.total; ++k) {
    double lk = values[k];
    for (std::size_t i = 0; i < grid.dim(); ++i)
      lk *= basis[i][static_cast<std::size_t>(multi[i])];
    acc += lk;
    for (std::size_t i = 0; i < grid.dim(); ++i) {
      if (++multi[i] <= grid.orders[i]) break;
      multi[i] = 0;
    }
  }
  return acc;
}

}  // namespace nfuq
