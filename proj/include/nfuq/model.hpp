#pragma once

#include "nfuq/param_space.hpp"
#include "nfuq/spatial.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

namespace nfuq {

/// Overflow-safe logistic firing rate F0 / (1 + exp(-mu (u - h))).
inline double sigmoid(double u, double F0, double mu, double h) {
  double z = -mu * (u - h);
  if (z > 700.0) z = 700.0;
  if (z < -700.0) z = -700.0;
  return F0 / (1.0 + std::exp(z));
}

/// Pointwise firing rate f(u, y_f) — the Nemytskii nonlinearity.
struct Firing {
  enum class Kind { Linear, Sigmoid, Custom };

  Kind kind = Kind::Linear;
  double F0 = 1.0;
  double mu = 1.0;
  double h = 0.0;
  bool f0_from_param = false;  // Sigmoid only: F0 read from y_f[0]
  std::function<double(double, std::span<const double>)> custom;

  double operator()(double u, std::span<const double> y_f) const {
    switch (kind) {
      case Kind::Linear:
        return u;
      case Kind::Sigmoid:
        return sigmoid(u, f0_from_param ? y_f[0] : F0, mu, h);
      case Kind::Custom:
        return custom(u, y_f);
    }
    throw std::logic_error("Firing: unknown kind");
  }

  /// df/du, used by the contractivity spectrum diagnostic.
  double derivative(double u, std::span<const double> y_f) const {
    switch (kind) {
      case Kind::Linear:
        return 1.0;
      case Kind::Sigmoid: {
        const double f0 = f0_from_param ? y_f[0] : F0;
        const double f = sigmoid(u, f0, mu, h);
        return f0 == 0.0 ? 0.0 : mu * f * (1.0 - f / f0);
      }
      case Kind::Custom: {
        const double eps = 1e-6;
        return (custom(u + eps, y_f) - custom(u - eps, y_f)) / (2.0 * eps);
      }
    }
    throw std::logic_error("Firing: unknown kind");
  }
};

/// Contiguous index ranges of the parameter vector feeding each data field,
/// mirroring the decomposition y = (y_w, y_f, y_g, y_v).
struct SliceMap {
  struct Range {
    int begin = 0;
    int len = 0;
  };
  Range kernel, firing, forcing, initial;
};

inline std::span<const double> slice(std::span<const double> y,
                                     SliceMap::Range r) {
  return y.subspan(static_cast<std::size_t>(r.begin),
                   static_cast<std::size_t>(r.len));
}

using SpaceTimeFn = std::function<double(double, double, std::span<const double>)>;
using SpaceFn = std::function<double(double, std::span<const double>)>;

/// A neural field problem: data fields w, f, g, v, their parameter slices,
/// the spatial domain they are posed on, and the time horizon.
struct ProblemSpec {
  KernelFn kernel;        // (x, x', y_w)
  Firing firing;
  SpaceTimeFn forcing;    // (x, t, y_g)
  SpaceFn initial;        // (x, y_v)
  double time_horizon = 1.0;
  ParameterSpace params;
  SliceMap slices;

  bool ring = false;
  double domain_a = -1.0;
  double domain_b = 1.0;
  double ring_length = 0.0;  // ring only; domain is [domain_a, domain_a+length)
};

inline void validate(const ProblemSpec& spec) {
  if (!(spec.time_horizon > 0.0))
    throw std::invalid_argument("ProblemSpec: time_horizon <= 0");
  const int m = static_cast<int>(spec.params.size());
  std::vector<int> hits(static_cast<std::size_t>(m), 0);
  for (auto r : {spec.slices.kernel, spec.slices.firing, spec.slices.forcing,
                 spec.slices.initial}) {
    if (r.len < 0 || r.begin < 0 || r.begin + r.len > m)
      throw std::invalid_argument("ProblemSpec: slice out of range");
    for (int i = r.begin; i < r.begin + r.len; ++i)
      hits[static_cast<std::size_t>(i)] += 1;
  }
  for (int c : hits)
    if (c != 1)
      throw std::invalid_argument(
          "ProblemSpec: slices must disjointly cover all parameter dims");
}

/// Grid matching the problem's spatial domain.
inline DiscPtr default_grid(const ProblemSpec& spec, GridKind kind, int n) {
  if (spec.ring) {
    if (kind != GridKind::PeriodicEquispaced)
      throw std::invalid_argument("default_grid: ring problems need a periodic grid");
    return periodic_grid(n, spec.ring_length, spec.domain_a);
  }
  switch (kind) {
    case GridKind::Chebyshev:
      return chebyshev_grid(n, spec.domain_a, spec.domain_b);
    case GridKind::FemP1:
      return fem_grid(n, spec.domain_a, spec.domain_b);
    case GridKind::PeriodicEquispaced:
      throw std::invalid_argument("default_grid: periodic grid on a non-ring problem");
  }
  throw std::logic_error("default_grid: unknown kind");
}

/// The projected system at a fixed parameter point: u' = -u + W_n F(u) + g.
struct SemiDiscreteSystem {
  const ProblemSpec* spec = nullptr;
  DiscPtr disc;
  KernelOperator W;  // assembled at this y's kernel slice
  std::vector<double> y;
};

inline SemiDiscreteSystem make_system(const ProblemSpec& spec, DiscPtr disc,
                                      std::vector<double> y,
                                      const KernelOperator* cached_W = nullptr) {
  if (y.size() != spec.params.size())
    throw std::invalid_argument("make_system: parameter point dim mismatch");
  SemiDiscreteSystem sys;
  sys.spec = &spec;
  sys.disc = disc;
  sys.y = std::move(y);
  sys.W = cached_W ? *cached_W
                   : assemble_kernel_operator(spec.kernel, disc,
                                              slice(sys.y, spec.slices.kernel));
  return sys;
}

/// RHS of the semi-discrete system, written into `out`:
///   out = -u + W_n f(u, y_f) + g(x, t, y_g) nodally.
inline void eval_rhs_into(const SemiDiscreteSystem& sys, double t,
                          const Eigen::VectorXd& u, Eigen::VectorXd& out) {
  const auto& spec = *sys.spec;
  const auto y = std::span<const double>(sys.y);
  const auto y_f = slice(y, spec.slices.firing);
  const auto y_g = slice(y, spec.slices.forcing);
  const Eigen::Index s = u.size();
  Eigen::VectorXd fu(s);
  for (Eigen::Index i = 0; i < s; ++i) fu(i) = spec.firing(u(i), y_f);
  out.noalias() = sys.W.matrix * fu;
  for (Eigen::Index i = 0; i < s; ++i) {
    const double g = spec.forcing(sys.disc->nodes[static_cast<std::size_t>(i)],
                                  t, y_g);
    if (!std::isfinite(g))
      throw std::runtime_error("eval_rhs: non-finite forcing value");
    out(i) += g - u(i);
  }
  if (!out.allFinite())
    throw std::runtime_error("eval_rhs: non-finite right-hand side");
}

inline Field eval_rhs(const SemiDiscreteSystem& sys, double t, const Field& u) {
  Field out{sys.disc, Eigen::VectorXd(u.values.size())};
  eval_rhs_into(sys, t, u.values, out.values);
  return out;
}

inline Field initial_field(const ProblemSpec& spec, DiscPtr disc,
                           std::span<const double> y) {
  const auto y_v = slice(y, spec.slices.initial);
  return project(disc, [&](double x) { return spec.initial(x, y_v); });
}

// ---------------------------------------------------------------------------
// Presets
// ---------------------------------------------------------------------------

/// Linear ring-free benchmark with closed-form solution: w = x x',
/// f(u) = u, v = sin(4 pi x), g(x,t,y) = e^{ty}[(y+1)sin(4 pi x) + x/(2 pi)],
/// one uniform random forcing parameter y ~ U[alpha, beta].
inline ProblemSpec preset_problem1(double alpha = -2.0, double beta = 0.5,
                                   double T = 1.0) {
  ProblemSpec spec;
  spec.domain_a = -1.0;
  spec.domain_b = 1.0;
  spec.time_horizon = T;
  spec.kernel = [](double x, double xp, std::span<const double>) {
    return x * xp;
  };
  spec.firing.kind = Firing::Kind::Linear;
  spec.forcing = [](double x, double t, std::span<const double> y_g) {
    const double y = y_g[0];
    return std::exp(t * y) *
           ((y + 1.0) * std::sin(4.0 * std::numbers::pi * x) +
            x / (2.0 * std::numbers::pi));
  };
  spec.initial = [](double x, std::span<const double>) {
    return std::sin(4.0 * std::numbers::pi * x);
  };
  spec.params.dims = {Dimension::uniform(alpha, beta, "forcing")};
  spec.slices.forcing = {0, 1};
  validate(spec);
  return spec;
}

inline double problem1_exact_solution(double x, double t, double y) {
  return std::exp(y * t) * std::sin(4.0 * std::numbers::pi * x);
}

inline double problem1_exact_mean(double x, double t, double alpha,
                                  double beta) {
  double amp;
  if (t * (beta - alpha) == 0.0) {
    amp = std::exp(0.5 * t * (alpha + beta));
  } else {
    amp = (std::exp(beta * t) - std::exp(alpha * t)) / (t * (beta - alpha));
  }
  return amp * std::sin(4.0 * std::numbers::pi * x);
}

/// Constants of the nonlinear benchmark (Problems 2 and 3). A0, A1 and
/// omega_A have no published values; 1.0 is the adopted default and all
/// three are overridable.
struct Problem2Params {
  double sigma_w = 1.0;
  double F0 = 1.0;
  double mu = 10.0;
  double h = 0.3;
  double omega_g = 1.0;
  double sigma_g = 0.4;
  double A0 = 1.0;
  double A1 = 1.0;
  double omega_A = 1.0;
  double T = 1.0;
};

/// Distribution of the two random parameters (y_1 initial, y_2 forcing).
struct Problem2Dist {
  bool normal = false;
  // uniform: [a1,b1] x [a2,b2]; normal: N(a1,b1) x N(a2,b2)
  double a1 = 1.25, b1 = 1.75;
  double a2 = 0.5, b2 = 1.5;
};

namespace detail {

inline double problem2_kernel(double x, double xp, double sigma_w, double A0,
                              double A1, double omega_A) {
  const double d = sigma_w * std::abs(x - xp);
  return (1.0 - d) * std::exp(-d) * (A0 + A1 * std::sin(omega_A * xp));
}

}  // namespace detail

/// Nonlinear benchmark on [-10,10]: heterogeneous kernel, sigmoidal firing,
/// random pulsatile initial condition v = y_1 e^{-x^2} and forcing
/// g = y_2 sin(omega_g t) e^{-x^2/sigma_g^2}.
inline ProblemSpec preset_problem2(const Problem2Dist& dist = {},
                                   const Problem2Params& p = {}) {
  ProblemSpec spec;
  spec.domain_a = -10.0;
  spec.domain_b = 10.0;
  spec.time_horizon = p.T;
  spec.kernel = [p](double x, double xp, std::span<const double>) {
    return detail::problem2_kernel(x, xp, p.sigma_w, p.A0, p.A1, p.omega_A);
  };
  spec.firing = {Firing::Kind::Sigmoid, p.F0, p.mu, p.h};
  spec.forcing = [p](double x, double t, std::span<const double> y_g) {
    return y_g[0] * std::sin(p.omega_g * t) *
           std::exp(-x * x / (p.sigma_g * p.sigma_g));
  };
  spec.initial = [](double x, std::span<const double> y_v) {
    return y_v[0] * std::exp(-x * x);
  };
  auto make_dim = [&](double a, double b, const char* label) {
    return dist.normal ? Dimension::normal(a, b, label)
                       : Dimension::uniform(a, b, label);
  };
  spec.params.dims = {make_dim(dist.a1, dist.b1, "initial"),
                      make_dim(dist.a2, dist.b2, "forcing")};
  spec.slices.initial = {0, 1};
  spec.slices.forcing = {1, 1};
  validate(spec);
  return spec;
}

/// Uniform ranges for the four random parameters of Problem 3. The A0 and
/// F0 ranges have no published values; [0.75, 1.25] is the adopted default.
struct Problem3Ranges {
  double y1_a = 1.25, y1_b = 1.75;   // initial
  double y2_a = 0.5, y2_b = 1.5;     // forcing
  double A0_a = 0.75, A0_b = 1.25;   // kernel
  double F0_a = 0.75, F0_b = 1.25;   // firing
};

/// Problem 2 with all four data fields random: y = (y_1, y_2, A_0, F_0).
inline ProblemSpec preset_problem3(const Problem3Ranges& r = {},
                                   const Problem2Params& p = {}) {
  ProblemSpec spec = preset_problem2({}, p);
  spec.kernel = [p](double x, double xp, std::span<const double> y_w) {
    return detail::problem2_kernel(x, xp, p.sigma_w, y_w[0], p.A1, p.omega_A);
  };
  spec.firing = {Firing::Kind::Sigmoid, p.F0, p.mu, p.h, /*f0_from_param=*/true};
  spec.params.dims = {Dimension::uniform(r.y1_a, r.y1_b, "initial"),
                      Dimension::uniform(r.y2_a, r.y2_b, "forcing"),
                      Dimension::uniform(r.A0_a, r.A0_b, "kernel"),
                      Dimension::uniform(r.F0_a, r.F0_b, "firing")};
  spec.slices = {};
  spec.slices.initial = {0, 1};
  spec.slices.forcing = {1, 1};
  spec.slices.kernel = {2, 1};
  spec.slices.firing = {3, 1};
  validate(spec);
  return spec;
}

/// Minimal-image difference on a ring of length L.
inline double ring_wrap(double z, double L) {
  z = std::fmod(z, L);
  if (z > 0.5 * L) z -= L;
  if (z < -0.5 * L) z += L;
  return z;
}

/// Instantaneous pulse centre c(t,y) = sum_{k=1..3} c_k sin(2 pi t / f_k)
/// with y = (c_1, c_2, c_3, f_1, f_2, f_3).
inline double ring_pulse_center(double t, std::span<const double> y) {
  double c = 0.0;
  for (int k = 0; k < 3; ++k)
    c += y[static_cast<std::size_t>(k)] *
         std::sin(2.0 * std::numbers::pi * t / y[static_cast<std::size_t>(k + 3)]);
  return c;
}

/// Ring demo: excitatory-inhibitory kernel W(z) = (2 - z^2) e^{-z^2} on a
/// ring of width 22, steep sigmoidal firing, bump initial condition, and an
/// oscillating random pulse forcing in 6 uniform parameters.
inline ProblemSpec preset_ring(double T = 20.0) {
  ProblemSpec spec;
  spec.ring = true;
  spec.ring_length = 22.0;
  spec.domain_a = -11.0;  // centered so the initial bump sits mid-domain
  spec.domain_b = 11.0;
  spec.time_horizon = T;
  spec.kernel = [](double x, double xp, std::span<const double>) {
    const double z = ring_wrap(x - xp, 22.0);
    return (2.0 - z * z) * std::exp(-z * z);
  };
  spec.firing.custom = [](double u, std::span<const double>) {
    return sigmoid(u, 1.0, 20.0, 10.0);
  };
  spec.firing.kind = Firing::Kind::Custom;
  spec.forcing = [](double x, double t, std::span<const double> y_g) {
    const double z = ring_wrap(x - ring_pulse_center(t, y_g), 22.0);
    return 1.4 * std::exp(-z * z);
  };
  spec.initial = [](double x, std::span<const double>) {
    const double c = std::cosh(0.5 * x);
    return 2.5 + 0.5 / (c * c);
  };
  spec.params.dims = {
      Dimension::uniform(0.0, 4.0, "forcing"),
      Dimension::uniform(1.0 / 6.0, 2.0 / 3.0, "forcing"),
      Dimension::uniform(0.1, 0.8, "forcing"),
      Dimension::uniform(40.0, 60.0, "forcing"),
      Dimension::uniform(10.0, 50.0 / 3.0, "forcing"),
      Dimension::uniform(100.0, 200.0, "forcing"),
  };
  spec.slices.forcing = {0, 6};
  validate(spec);
  return spec;
}

}  // namespace nfuq
