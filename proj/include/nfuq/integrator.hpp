#pragma once

#include "nfuq/model.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace nfuq {

struct IntegratorConfig {
  double rtol = 1e-12;
  double atol = 1e-13;
  long max_steps = 10'000'000;
  double initial_step = 0.0;  // <= 0: use the starting-step heuristic
  std::vector<double> output_times;  // sorted, within [0, T]; empty = {T}
};

struct IntegratorStats {
  long steps_accepted = 0;
  long steps_rejected = 0;
  long rhs_evals = 0;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<Field> states;
  IntegratorStats stats;
};

using RhsFn =
    std::function<void(double, const Eigen::VectorXd&, Eigen::VectorXd&)>;

namespace detail {

// Dormand-Prince 5(4) tableau
inline constexpr double dp_c2 = 1.0 / 5, dp_c3 = 3.0 / 10, dp_c4 = 4.0 / 5,
                        dp_c5 = 8.0 / 9;
inline constexpr double dp_a21 = 1.0 / 5;
inline constexpr double dp_a31 = 3.0 / 40, dp_a32 = 9.0 / 40;
inline constexpr double dp_a41 = 44.0 / 45, dp_a42 = -56.0 / 15,
                        dp_a43 = 32.0 / 9;
inline constexpr double dp_a51 = 19372.0 / 6561, dp_a52 = -25360.0 / 2187,
                        dp_a53 = 64448.0 / 6561, dp_a54 = -212.0 / 729;
inline constexpr double dp_a61 = 9017.0 / 3168, dp_a62 = -355.0 / 33,
                        dp_a63 = 46732.0 / 5247, dp_a64 = 49.0 / 176,
                        dp_a65 = -5103.0 / 18656;
inline constexpr double dp_b1 = 35.0 / 384, dp_b3 = 500.0 / 1113,
                        dp_b4 = 125.0 / 192, dp_b5 = -2187.0 / 6784,
                        dp_b6 = 11.0 / 84;
inline constexpr double dp_e1 = 71.0 / 57600, dp_e3 = -71.0 / 16695,
                        dp_e4 = 71.0 / 1920, dp_e5 = -17253.0 / 339200,
                        dp_e6 = 22.0 / 525, dp_e7 = -1.0 / 40;
// dense-output coefficients (Hairer-Norsett-Wanner)
inline constexpr double dp_d1 = -12715105075.0 / 11282082432.0;
inline constexpr double dp_d3 = 87487479700.0 / 32700410799.0;
inline constexpr double dp_d4 = -10690763975.0 / 1880347072.0;
inline constexpr double dp_d5 = 701980252875.0 / 199316789632.0;
inline constexpr double dp_d6 = -1453857185.0 / 822651844.0;
inline constexpr double dp_d7 = 69997945.0 / 29380423.0;

inline double scaled_rms(const Eigen::VectorXd& err, const Eigen::VectorXd& y0,
                         const Eigen::VectorXd& y1, double rtol, double atol) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < err.size(); ++i) {
    const double sc = atol + rtol * std::max(std::abs(y0(i)), std::abs(y1(i)));
    const double q = err(i) / sc;
    acc += q * q;
  }
  return std::sqrt(acc / static_cast<double>(err.size()));
}

}  // namespace detail

/// Starting-step heuristic (Hairer-Norsett-Wanner II.4): balances ||u0||
/// against ||f(0,u0)|| and takes one explicit-Euler trial step. Falls back
/// to span/100 for a vanishing right-hand side; never exceeds the span.
inline double estimate_initial_step(const RhsFn& rhs, double t0,
                                    const Eigen::VectorXd& u0, double t_end,
                                    double rtol, double atol,
                                    IntegratorStats* stats = nullptr) {
  const double span = t_end - t0;
  Eigen::VectorXd f0(u0.size()), f1(u0.size());
  rhs(t0, u0, f0);
  if (stats) stats->rhs_evals += 1;
  auto norm = [&](const Eigen::VectorXd& v, const Eigen::VectorXd& ref) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      const double sc = atol + rtol * std::abs(ref(i));
      const double q = v(i) / sc;
      acc += q * q;
    }
    return std::sqrt(acc / static_cast<double>(v.size()));
  };
  const double d0 = norm(u0, u0), d1 = norm(f0, u0);
  if (d1 <= 1e-10 || d0 <= 1e-10) return span / 100.0;
  double h0 = 0.01 * d0 / d1;
  h0 = std::min(h0, span);
  Eigen::VectorXd u1 = u0 + h0 * f0;
  rhs(t0 + h0, u1, f1);
  if (stats) stats->rhs_evals += 1;
  const double d2 = norm(f1 - f0, u0) / h0;
  double h1;
  if (std::max(d1, d2) <= 1e-15) {
    h1 = std::max(1e-6, h0 * 1e-3);
  } else {
    h1 = std::pow(0.01 / std::max(d1, d2), 0.2);  // order 5
  }
  return std::min({100.0 * h0, h1, span});
}

/// Adaptive Dormand-Prince 5(4) with PI step-size control and free 4th-order
/// dense output. Requested output times are hit by interpolation, never by
/// clipping the step. rhs_evals = 6 * (accepted + rejected) + 1, plus 2 when
/// the starting step is estimated.
inline std::vector<Eigen::VectorXd> integrate_ode(
    const RhsFn& rhs, const Eigen::VectorXd& u0, double t0, double t_end,
    const IntegratorConfig& cfg, const std::vector<double>& output_times,
    IntegratorStats& stats) {
  if (!(cfg.rtol > 0.0) || !(cfg.atol > 0.0))
    throw std::invalid_argument("integrate: tolerances must be positive");
  for (std::size_t i = 0; i < output_times.size(); ++i) {
    if (output_times[i] < t0 || output_times[i] > t_end ||
        (i > 0 && output_times[i] < output_times[i - 1]))
      throw std::invalid_argument("integrate: output_times must be sorted in [0,T]");
  }
  const Eigen::Index s = u0.size();
  std::vector<Eigen::VectorXd> out(output_times.size());
  std::size_t next_out = 0;
  // t_end == t0 or leading outputs at t0
  while (next_out < output_times.size() && output_times[next_out] <= t0) {
    out[next_out++] = u0;
  }

  Eigen::VectorXd u = u0, unew(s);
  Eigen::VectorXd k1(s), k2(s), k3(s), k4(s), k5(s), k6(s), k7(s), tmp(s),
      err(s);
  double t = t0;
  rhs(t, u, k1);
  stats.rhs_evals += 1;
  double h = cfg.initial_step > 0.0
                 ? std::min(cfg.initial_step, t_end - t0)
                 : estimate_initial_step(rhs, t0, u0, t_end, cfg.rtol, cfg.atol,
                                         &stats);
  if (!(h > 0.0)) h = (t_end - t0) / 100.0;
  double errold = 1e-4;
  const double safety = 0.9, beta = 0.04, expo1 = 0.2 - beta * 0.75;
  const double facc1 = 1.0 / 0.2, facc2 = 1.0 / 10.0;

  long steps = 0;
  while (next_out < output_times.size()) {
    if (++steps > cfg.max_steps)
      throw std::runtime_error("integrate: max_steps exceeded at t = " +
                               std::to_string(t));
    const double hmin = 16.0 * std::abs(t) * 2.220446049250313e-16;
    if (h < std::max(hmin, 1e-300))
      throw std::runtime_error("integrate: step-size underflow at t = " +
                               std::to_string(t));

    using namespace detail;
    tmp = u + h * (dp_a21 * k1);
    rhs(t + dp_c2 * h, tmp, k2);
    tmp = u + h * (dp_a31 * k1 + dp_a32 * k2);
    rhs(t + dp_c3 * h, tmp, k3);
    tmp = u + h * (dp_a41 * k1 + dp_a42 * k2 + dp_a43 * k3);
    rhs(t + dp_c4 * h, tmp, k4);
    tmp = u + h * (dp_a51 * k1 + dp_a52 * k2 + dp_a53 * k3 + dp_a54 * k4);
    rhs(t + dp_c5 * h, tmp, k5);
    tmp = u + h * (dp_a61 * k1 + dp_a62 * k2 + dp_a63 * k3 + dp_a64 * k4 +
                   dp_a65 * k5);
    rhs(t + h, tmp, k6);
    unew = u + h * (dp_b1 * k1 + dp_b3 * k3 + dp_b4 * k4 + dp_b5 * k5 +
                    dp_b6 * k6);
    rhs(t + h, unew, k7);
    stats.rhs_evals += 6;

    err = h * (dp_e1 * k1 + dp_e3 * k3 + dp_e4 * k4 + dp_e5 * k5 + dp_e6 * k6 +
               dp_e7 * k7);
    const double errnorm =
        scaled_rms(err, u, unew, cfg.rtol, cfg.atol);

    if (errnorm <= 1.0) {
      stats.steps_accepted += 1;
      if (!unew.allFinite())
        throw std::runtime_error("integrate: non-finite state at t = " +
                                 std::to_string(t + h));
      // dense output over [t, t+h] (4th-order continuous extension)
      if (next_out < output_times.size() && output_times[next_out] <= t + h) {
        const Eigen::VectorXd delta = unew - u;
        const Eigen::VectorXd rc3 = h * k1 - delta;
        const Eigen::VectorXd rc4 = delta - h * k7 - rc3;
        const Eigen::VectorXd rc5 =
            h * (dp_d1 * k1 + dp_d3 * k3 + dp_d4 * k4 + dp_d5 * k5 +
                 dp_d6 * k6 + dp_d7 * k7);
        while (next_out < output_times.size() &&
               output_times[next_out] <= t + h) {
          const double theta = (output_times[next_out] - t) / h;
          const double th1 = 1.0 - theta;
          out[next_out] =
              u + theta * (delta + th1 * (rc3 + theta * (rc4 + th1 * rc5)));
          ++next_out;
        }
      }
      t += h;
      u.swap(unew);
      k1.swap(k7);  // FSAL
      const double fac11 = std::pow(std::max(errnorm, 1e-32), expo1);
      double fac = fac11 / std::pow(errold, beta);
      fac = std::max(facc2, std::min(facc1, fac / safety));
      h = h / fac;
      errold = std::max(errnorm, 1e-4);
    } else {
      stats.steps_rejected += 1;
      const double fac11 = std::pow(errnorm, expo1);
      h = h / std::min(facc1, fac11 / safety);
    }
  }
  // outputs exactly at t_end that the loop exited before emitting
  while (next_out < output_times.size()) {
    out[next_out++] = u;
  }
  return out;
}

/// Integrate the projected neural field from t = 0 with the problem's own
/// initial condition, returning states at the requested output times.
inline Trajectory integrate(const SemiDiscreteSystem& sys,
                            const IntegratorConfig& cfg) {
  const ProblemSpec& spec = *sys.spec;
  const double T = spec.time_horizon;
  std::vector<double> times = cfg.output_times;
  if (times.empty()) times = {T};
  for (double t : times)
    if (t < 0.0 || t > T)
      throw std::invalid_argument("integrate: output time outside [0, T]");
  Field u0 = initial_field(spec, sys.disc, sys.y);
  RhsFn rhs = [&sys](double t, const Eigen::VectorXd& u, Eigen::VectorXd& out) {
    eval_rhs_into(sys, t, u, out);
  };
  Trajectory traj;
  traj.times = times;
  auto states = integrate_ode(rhs, u0.values, 0.0, T, cfg, times, traj.stats);
  traj.states.reserve(states.size());
  for (auto& v : states) traj.states.push_back(Field{sys.disc, std::move(v)});
  return traj;
}

}  // namespace nfuq
