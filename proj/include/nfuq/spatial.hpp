#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace nfuq {

enum class GridKind { Chebyshev, FemP1, PeriodicEquispaced };

/// Spatial node set with its quadrature weights and off-grid evaluation
/// rule; realizes the interpolatory projector P_n on D.
struct SpatialDiscretization {
  GridKind kind = GridKind::Chebyshev;
  std::vector<double> nodes;      // ascending
  Eigen::VectorXd quad_weights;   // sum to the domain measure
  double a = 0.0;                 // domain [a,b]; for rings, [a, a+length)
  double b = 1.0;
  double ring_length = 0.0;       // > 0 only for PeriodicEquispaced
  std::vector<double> bary;       // Chebyshev barycentric weights

  std::size_t size() const { return nodes.size(); }
  bool periodic() const { return kind == GridKind::PeriodicEquispaced; }
  double measure() const { return periodic() ? ring_length : b - a; }
};

using DiscPtr = std::shared_ptr<const SpatialDiscretization>;

/// Nodal values of a function on a discretization (u_n in coordinates).
struct Field {
  DiscPtr disc;
  Eigen::VectorXd values;
};

/// Chebyshev-Lobatto grid on [a,b] with Clenshaw-Curtis quadrature weights.
/// n+1 nodes, stored ascending.
inline DiscPtr chebyshev_grid(int n, double a, double b) {
  if (n < 2) throw std::invalid_argument("chebyshev_grid: n < 2");
  if (!(a < b)) throw std::invalid_argument("chebyshev_grid: requires a < b");
  auto disc = std::make_shared<SpatialDiscretization>();
  disc->kind = GridKind::Chebyshev;
  disc->a = a;
  disc->b = b;
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  disc->nodes.resize(n + 1);
  for (int j = 0; j <= n; ++j) {
    // ascending: x_j = mid + half*cos((n-j)*pi/n)
    disc->nodes[j] = mid + half * std::cos((n - j) * std::numbers::pi / n);
  }
  disc->nodes[0] = a;
  disc->nodes[n] = b;
  // Clenshaw-Curtis weights by the direct cosine-sum formula:
  //   w_j = (4 c_j / n) * sum''_{k=0..n/2} cos(2k j pi / n) / (1 - 4k^2)
  // with c_j = 1/2 at the endpoints and the sum halving its first and
  // (when n is even) last terms. Exact for polynomials of degree <= n.
  disc->quad_weights.resize(n + 1);
  const int kmax = n / 2;
  for (int j = 0; j <= n; ++j) {
    double s = 0.0;
    for (int k = 0; k <= kmax; ++k) {
      double term = std::cos(2.0 * k * j * std::numbers::pi / n) /
                    (1.0 - 4.0 * static_cast<double>(k) * k);
      if (k == 0 || (2 * k == n)) term *= 0.5;
      s += term;
    }
    const double cj = (j == 0 || j == n) ? 0.5 : 1.0;
    disc->quad_weights(n - j) = 4.0 * cj / n * s * half;
  }
  // closed-form Chebyshev-Lobatto barycentric weights (ascending order)
  disc->bary.resize(n + 1);
  for (int j = 0; j <= n; ++j) {
    double w = ((n - j) % 2 == 0) ? 1.0 : -1.0;
    if (j == 0 || j == n) w *= 0.5;
    disc->bary[j] = w;
  }
  return disc;
}

/// Equispaced piecewise-linear (tent basis) grid with trapezoid weights.
inline DiscPtr fem_grid(int n, double a, double b) {
  if (n < 1) throw std::invalid_argument("fem_grid: n < 1");
  if (!(a < b)) throw std::invalid_argument("fem_grid: requires a < b");
  auto disc = std::make_shared<SpatialDiscretization>();
  disc->kind = GridKind::FemP1;
  disc->a = a;
  disc->b = b;
  const double h = (b - a) / n;
  disc->nodes.resize(n + 1);
  disc->quad_weights.resize(n + 1);
  for (int j = 0; j <= n; ++j) {
    disc->nodes[j] = a + j * h;
    disc->quad_weights(j) = (j == 0 || j == n) ? 0.5 * h : h;
  }
  disc->nodes[n] = b;
  return disc;
}

/// n equispaced nodes on the ring of the given length, starting at x0;
/// uniform trapezoid weights length/n (spectrally accurate on the ring).
inline DiscPtr periodic_grid(int n, double length, double x0 = 0.0) {
  if (n < 4) throw std::invalid_argument("periodic_grid: n < 4");
  if (!(length > 0.0)) throw std::invalid_argument("periodic_grid: length <= 0");
  auto disc = std::make_shared<SpatialDiscretization>();
  disc->kind = GridKind::PeriodicEquispaced;
  disc->ring_length = length;
  disc->a = x0;
  disc->b = x0 + length;
  const double h = length / n;
  disc->nodes.resize(n);
  disc->quad_weights = Eigen::VectorXd::Constant(n, h);
  for (int j = 0; j < n; ++j) disc->nodes[j] = x0 + j * h;
  return disc;
}

/// Nodal sampling: the coordinate representation of the interpolatory
/// projector P_n applied to f.
inline Field project(DiscPtr disc, const std::function<double(double)>& f) {
  Field field{disc, Eigen::VectorXd(disc->size())};
  for (std::size_t j = 0; j < disc->size(); ++j) {
    const double v = f(disc->nodes[j]);
    if (!std::isfinite(v))
      throw std::runtime_error("project: non-finite sample at x = " +
                               std::to_string(disc->nodes[j]));
    field.values(static_cast<Eigen::Index>(j)) = v;
  }
  return field;
}

/// Off-grid evaluation: barycentric polynomial (Chebyshev), piecewise
/// linear (FemP1), linear with wraparound (ring).
inline double evaluate_offgrid(const Field& field, double x) {
  const auto& disc = *field.disc;
  const auto& nodes = disc.nodes;
  const std::size_t s = nodes.size();
  switch (disc.kind) {
    case GridKind::Chebyshev: {
      if (x < disc.a || x > disc.b)
        throw std::invalid_argument("evaluate_offgrid: x outside domain");
      double num = 0.0, den = 0.0;
      for (std::size_t j = 0; j < s; ++j) {
        if (x == nodes[j]) return field.values(static_cast<Eigen::Index>(j));
        const double t = disc.bary[j] / (x - nodes[j]);
        num += t * field.values(static_cast<Eigen::Index>(j));
        den += t;
      }
      return num / den;
    }
    case GridKind::FemP1: {
      if (x < disc.a || x > disc.b)
        throw std::invalid_argument("evaluate_offgrid: x outside domain");
      const double h = (disc.b - disc.a) / static_cast<double>(s - 1);
      std::size_t cell = static_cast<std::size_t>((x - disc.a) / h);
      if (cell >= s - 1) cell = s - 2;
      const double theta = (x - nodes[cell]) / h;
      return (1.0 - theta) * field.values(static_cast<Eigen::Index>(cell)) +
             theta * field.values(static_cast<Eigen::Index>(cell + 1));
    }
    case GridKind::PeriodicEquispaced: {
      const double L = disc.ring_length;
      double t = std::fmod(x - disc.a, L);
      if (t < 0.0) t += L;
      const double h = L / static_cast<double>(s);
      std::size_t cell = static_cast<std::size_t>(t / h);
      if (cell >= s) cell = s - 1;
      const double theta = t / h - static_cast<double>(cell);
      const std::size_t next = (cell + 1) % s;
      return (1.0 - theta) * field.values(static_cast<Eigen::Index>(cell)) +
             theta * field.values(static_cast<Eigen::Index>(next));
    }
  }
  throw std::logic_error("evaluate_offgrid: unknown grid kind");
}

/// Discrete sup-norm: surrogate for the C(D) norm on nodal data.
inline double sup_norm(const Field& field) {
  return field.values.size() == 0 ? 0.0
                                  : field.values.cwiseAbs().maxCoeff();
}

inline double sup_distance(const Field& f1, const Field& f2) {
  if (f1.disc != f2.disc && (f1.disc->nodes != f2.disc->nodes))
    throw std::invalid_argument("sup_distance: discretization mismatch");
  return (f1.values - f2.values).cwiseAbs().maxCoeff();
}

/// Nystrom discretization of the kernel integral operator:
/// matrix(i,j) = w(x_i, x_j, y_w) * quad_weights[j].
struct KernelOperator {
  Eigen::MatrixXd matrix;
  DiscPtr disc;

  Field apply(const Field& v) const {
    if (v.disc->nodes != disc->nodes)
      throw std::invalid_argument("KernelOperator::apply: grid mismatch");
    return Field{disc, matrix * v.values};
  }
};

using KernelFn = std::function<double(double, double, std::span<const double>)>;

inline KernelOperator assemble_kernel_operator(const KernelFn& w, DiscPtr disc,
                                               std::span<const double> y_w = {}) {
  const std::size_t s = disc->size();
  KernelOperator op;
  op.disc = disc;
  op.matrix.resize(s, s);
  for (std::size_t i = 0; i < s; ++i) {
    for (std::size_t j = 0; j < s; ++j) {
      const double wij = w(disc->nodes[i], disc->nodes[j], y_w);
      if (!std::isfinite(wij))
        throw std::runtime_error(
            "assemble_kernel_operator: non-finite kernel at (x_i, x_j) = (" +
            std::to_string(disc->nodes[i]) + ", " +
            std::to_string(disc->nodes[j]) + ")");
      op.matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          wij * disc->quad_weights(static_cast<Eigen::Index>(j));
    }
  }
  return op;
}

}  // namespace nfuq
