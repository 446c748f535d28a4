#pragma once

#include "nfuq/integrator.hpp"
#include "nfuq/model.hpp"
#include "nfuq/param_space.hpp"
#include "nfuq/rng.hpp"
#include "nfuq/spatial.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace nfuq {

/// Semi-discrete trajectories at every tensor collocation node, stored in
/// global-index order: the raw material for surrogates and moments.
struct CollocationSolution {
  TensorGrid grid;
  DiscPtr disc;
  std::vector<double> output_times;
  std::vector<std::vector<Field>> node_states;  // [node][output time]

  int last_time_index() const {
    return static_cast<int>(output_times.size()) - 1;
  }
};

struct MomentField {
  Field mean;
  Field variance;
  double time = 0.0;
};

struct SolveOptions {
  int workers = 1;
};

/// Solve the projected problem at every tensor node. Kernel operators are
/// cached per distinct kernel parameter slice and assembled up front, so a
/// deterministic kernel costs one assembly for the whole grid. Results land
/// in slots fixed by global_index; output is independent of worker count.
inline CollocationSolution solve_collocation(const ProblemSpec& spec,
                                             DiscPtr disc,
                                             const TensorGrid& grid,
                                             const IntegratorConfig& cfg,
                                             const SolveOptions& opts = {}) {
  if (grid.dim() != spec.params.size())
    throw std::invalid_argument("solve_collocation: grid/params dim mismatch");
  CollocationSolution sol;
  sol.grid = grid;
  sol.disc = disc;
  sol.output_times = cfg.output_times.empty()
                         ? std::vector<double>{spec.time_horizon}
                         : cfg.output_times;
  IntegratorConfig node_cfg = cfg;
  node_cfg.output_times = sol.output_times;

  const auto nodes = tensor_nodes(grid);
  // pre-assemble one operator per distinct kernel slice
  std::map<std::vector<double>, std::shared_ptr<const KernelOperator>> cache;
  std::vector<std::shared_ptr<const KernelOperator>> ops(grid.total);
  for (std::size_t k = 0; k < grid.total; ++k) {
    const auto y_w = slice(nodes[k], spec.slices.kernel);
    std::vector<double> key(y_w.begin(), y_w.end());
    auto it = cache.find(key);
    if (it == cache.end()) {
      it = cache
               .emplace(key, std::make_shared<KernelOperator>(
                                 assemble_kernel_operator(spec.kernel, disc, y_w)))
               .first;
    }
    ops[k] = it->second;
  }

  sol.node_states.resize(grid.total);
  std::atomic<std::size_t> cursor{0};
  std::string first_error;
  std::mutex err_mutex;
  auto work = [&]() {
    for (;;) {
      const std::size_t k = cursor.fetch_add(1);
      if (k >= grid.total) return;
      try {
        SemiDiscreteSystem sys =
            make_system(spec, disc, nodes[k], ops[k].get());
        Trajectory traj = integrate(sys, node_cfg);
        sol.node_states[k] = std::move(traj.states);
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (first_error.empty()) {
          std::string ystr;
          for (double v : nodes[k]) ystr += std::to_string(v) + " ";
          first_error = "solve_collocation: node " + std::to_string(k + 1) +
                        " at y = ( " + ystr + "): " + e.what();
        }
      }
    }
  };
  const int workers = std::max(1, opts.workers);
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  if (!first_error.empty()) throw std::runtime_error(first_error);
  return sol;
}

namespace detail {

inline int resolve_time_index(const CollocationSolution& sol, int time_index) {
  const int nt = static_cast<int>(sol.output_times.size());
  if (time_index < 0) time_index += nt;
  if (time_index < 0 || time_index >= nt)
    throw std::out_of_range("CollocationSolution: time index out of range");
  return time_index;
}

}  // namespace detail

/// E_rho[u_{n,q}] as the plain weighted sum sum_k omega_k u_k: exact for the
/// surrogate because the Gauss rule integrates the degree-q Lagrange basis.
inline Field mean_field(const CollocationSolution& sol, int time_index = -1) {
  const int ti = detail::resolve_time_index(sol, time_index);
  const auto weights = tensor_weights(sol.grid);
  Eigen::VectorXd acc =
      Eigen::VectorXd::Zero(static_cast<Eigen::Index>(sol.disc->size()));
  for (std::size_t k = 0; k < sol.grid.total; ++k)
    acc += weights[k] * sol.node_states[k][static_cast<std::size_t>(ti)].values;
  return Field{sol.disc, std::move(acc)};
}

/// Var_rho[u_{n,q}] = sum_k omega_k u_k^2 - mean^2, clamped at 0 when the
/// negative excursion is within roundoff of the second moment.
inline Field variance_field(const CollocationSolution& sol,
                            int time_index = -1) {
  const int ti = detail::resolve_time_index(sol, time_index);
  const auto weights = tensor_weights(sol.grid);
  const Eigen::Index s = static_cast<Eigen::Index>(sol.disc->size());
  Eigen::VectorXd m1 = Eigen::VectorXd::Zero(s), m2 = Eigen::VectorXd::Zero(s);
  for (std::size_t k = 0; k < sol.grid.total; ++k) {
    const auto& u = sol.node_states[k][static_cast<std::size_t>(ti)].values;
    m1 += weights[k] * u;
    m2 += weights[k] * u.cwiseProduct(u);
  }
  Eigen::VectorXd var = m2 - m1.cwiseProduct(m1);
  for (Eigen::Index i = 0; i < s; ++i) {
    if (var(i) < 0.0) {
      const double clamp = 1e-12 * (m2(i) + 1.0);
      if (var(i) < -clamp)
        throw std::runtime_error(
            "variance_field: negative variance beyond roundoff at node " +
            std::to_string(i));
      var(i) = 0.0;
    }
  }
  return Field{sol.disc, std::move(var)};
}

inline MomentField moments(const CollocationSolution& sol,
                           int time_index = -1) {
  const int ti = detail::resolve_time_index(sol, time_index);
  return MomentField{mean_field(sol, ti), variance_field(sol, ti),
                     sol.output_times[static_cast<std::size_t>(ti)]};
}

/// u_{n,q}(x, t_i, y): tensor Lagrange interpolation across the grid nodes,
/// then off-grid spatial evaluation.
inline double surrogate_eval(const CollocationSolution& sol, double x,
                             std::span<const double> y, int time_index = -1) {
  const int ti = detail::resolve_time_index(sol, time_index);
  // interpolate in y first, nodally in x, then evaluate off-grid
  const std::size_t s = sol.disc->size();
  Field fx{sol.disc, Eigen::VectorXd(static_cast<Eigen::Index>(s))};
  std::vector<double> nodal(sol.grid.total);
  for (std::size_t i = 0; i < s; ++i) {
    for (std::size_t k = 0; k < sol.grid.total; ++k)
      nodal[k] = sol.node_states[k][static_cast<std::size_t>(ti)].values(
          static_cast<Eigen::Index>(i));
    fx.values(static_cast<Eigen::Index>(i)) =
        tensor_lagrange_eval(sol.grid, nodal, y);
  }
  return evaluate_offgrid(fx, x);
}

/// Evaluation mesh for sup-norm error metrics: spatial nodes plus 200
/// equispaced points across the domain.
inline std::vector<double> error_mesh(const SpatialDiscretization& disc) {
  std::vector<double> mesh = disc.nodes;
  const double a = disc.a;
  const double width = disc.periodic() ? disc.ring_length : disc.b - disc.a;
  const int extra = 200;
  for (int i = 0; i < extra; ++i)
    mesh.push_back(a + width * (i + 0.5) / static_cast<double>(extra + 1));
  return mesh;
}

/// E_{n,q}: sup over the evaluation mesh of |exact mean - computed mean| at
/// the final output time.
inline double error_vs_exact(const CollocationSolution& sol,
                             const std::function<double(double)>& exact_mean,
                             int time_index = -1) {
  Field mean = mean_field(sol, time_index);
  double err = 0.0;
  for (double x : error_mesh(*sol.disc))
    err = std::max(err, std::abs(exact_mean(x) - evaluate_offgrid(mean, x)));
  return err;
}

/// E~_q: sup-distance of mean fields on the shared spatial nodes, against a
/// dedicated high-order reference solve.
inline double error_self(const CollocationSolution& sol,
                         const CollocationSolution& reference,
                         int time_index = -1) {
  if (sol.disc->nodes != reference.disc->nodes)
    throw std::invalid_argument("error_self: discretization mismatch");
  return sup_distance(mean_field(sol, time_index),
                      mean_field(reference, time_index));
}

struct MonteCarloResult {
  Field mean;
  Field stderr_;  // nodewise sample std / sqrt(samples)
  long samples = 0;
};

/// Plain Monte Carlo at the final time: i.i.d. draws from rho via a seeded
/// xoshiro256** stream, one integration per sample. Independent cross-check
/// for the collocation mean.
inline MonteCarloResult monte_carlo_mean(const ProblemSpec& spec, DiscPtr disc,
                                         const IntegratorConfig& cfg,
                                         long samples, std::uint64_t seed) {
  if (samples < 2)
    throw std::invalid_argument("monte_carlo_mean: samples must be >= 2");
  Xoshiro256 rng(seed);
  const Eigen::Index s = static_cast<Eigen::Index>(disc->size());
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(s);
  Eigen::VectorXd sumsq = Eigen::VectorXd::Zero(s);
  IntegratorConfig run_cfg = cfg;
  run_cfg.output_times = {spec.time_horizon};
  for (long n = 0; n < samples; ++n) {
    std::vector<double> y(spec.params.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
      const Dimension& d = spec.params.dims[i];
      y[i] = d.kind == Dimension::Kind::UniformBounded
                 ? rng.uniform(d.p1, d.p2)
                 : rng.normal(d.p1, d.p2);
    }
    try {
      SemiDiscreteSystem sys = make_system(spec, disc, y);
      Trajectory traj = integrate(sys, run_cfg);
      const auto& u = traj.states.back().values;
      sum += u;
      sumsq += u.cwiseProduct(u);
    } catch (const std::exception& e) {
      throw std::runtime_error("monte_carlo_mean: sample " +
                               std::to_string(n + 1) + ": " + e.what());
    }
  }
  const double inv = 1.0 / static_cast<double>(samples);
  MonteCarloResult res;
  res.samples = samples;
  res.mean = Field{disc, sum * inv};
  Eigen::VectorXd var =
      (sumsq * inv - res.mean.values.cwiseProduct(res.mean.values)) *
      (static_cast<double>(samples) / static_cast<double>(samples - 1));
  var = var.cwiseMax(0.0);
  res.stderr_ = Field{disc, (var / static_cast<double>(samples)).cwiseSqrt()};
  return res;
}

struct SpectrumReport {
  std::vector<std::vector<double>> samples;  // the y_w (or full y) samples
  std::vector<double> max_real;              // spectral abscissa per sample
  double global_max = 0.0;

  bool contractive() const { return global_max < 0.0; }
};

/// Spectral abscissa of A_n(y) = -I + W_n(y_w) diag(f'(u_bar)) over a set of
/// parameter samples; a negative global max is numeric evidence for the
/// contractivity hypothesis on the sampled set. For linear firing f' = 1 and
/// u_bar is ignored.
inline SpectrumReport spectrum_diagnostic(
    const ProblemSpec& spec, DiscPtr disc,
    const std::vector<std::vector<double>>& y_samples,
    const Field* linearization = nullptr) {
  if (spec.firing.kind != Firing::Kind::Linear && linearization == nullptr)
    throw std::invalid_argument(
        "spectrum_diagnostic: nonlinear firing requires a linearization state");
  SpectrumReport report;
  report.samples = y_samples;
  const Eigen::Index s = static_cast<Eigen::Index>(disc->size());
  for (const auto& y : y_samples) {
    if (y.size() != spec.params.size())
      throw std::invalid_argument("spectrum_diagnostic: sample dim mismatch");
    const auto y_w = slice(y, spec.slices.kernel);
    const auto y_f = slice(y, spec.slices.firing);
    KernelOperator W = assemble_kernel_operator(spec.kernel, disc, y_w);
    Eigen::MatrixXd A = -Eigen::MatrixXd::Identity(s, s);
    if (spec.firing.kind == Firing::Kind::Linear) {
      A += W.matrix;
    } else {
      Eigen::VectorXd fp(s);
      for (Eigen::Index i = 0; i < s; ++i)
        fp(i) = spec.firing.derivative(linearization->values(i), y_f);
      A += W.matrix * fp.asDiagonal();
    }
    Eigen::EigenSolver<Eigen::MatrixXd> eig(A, /*computeEigenvectors=*/false);
    if (eig.info() != Eigen::Success)
      throw std::runtime_error("spectrum_diagnostic: eigensolver failed");
    report.max_real.push_back(eig.eigenvalues().real().maxCoeff());
  }
  report.global_max =
      *std::max_element(report.max_real.begin(), report.max_real.end());
  return report;
}

}  // namespace nfuq
