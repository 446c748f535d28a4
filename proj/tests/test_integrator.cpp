#include "nfuq/integrator.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

using namespace nfuq;

namespace {

/// w = 0, g = 0, linear firing: every node decays as u' = -u.
ProblemSpec decay_spec(double T = 1.0) {
  ProblemSpec spec;
  spec.kernel = [](double, double, std::span<const double>) { return 0.0; };
  spec.forcing = [](double, double, std::span<const double>) { return 0.0; };
  spec.initial = [](double, std::span<const double>) { return 1.0; };
  spec.time_horizon = T;
  spec.domain_a = -1.0;
  spec.domain_b = 1.0;
  return spec;
}

}  // namespace

TEST_CASE("exponential decay to e^-1") {
  ProblemSpec spec = decay_spec();
  auto disc = fem_grid(1, -1.0, 1.0);
  auto sys = make_system(spec, disc, {});
  IntegratorConfig cfg;
  cfg.rtol = 1e-10;
  cfg.atol = 1e-12;
  Trajectory traj = integrate(sys, cfg);
  REQUIRE(traj.times == std::vector<double>{1.0});
  const double expect = std::exp(-1.0);
  for (Eigen::Index i = 0; i < traj.states[0].values.size(); ++i)
    CHECK(std::abs(traj.states[0].values(i) - expect) <= cfg.rtol * 10);
}

TEST_CASE("problem 1 realization against the closed form") {
  ProblemSpec spec = preset_problem1();
  auto disc = chebyshev_grid(40, -1.0, 1.0);
  auto sys = make_system(spec, disc, {0.5});
  IntegratorConfig cfg;  // rtol 1e-12, atol 1e-13
  Trajectory traj = integrate(sys, cfg);
  Field exact = project(disc, [](double x) {
    return problem1_exact_solution(x, 1.0, 0.5);
  });
  CHECK(sup_distance(traj.states[0], exact) <= 1e-9);
}

TEST_CASE("zero data stays at the fixed point") {
  ProblemSpec spec = decay_spec();
  spec.kernel = [](double x, double xp, std::span<const double>) {
    return std::cos(x - xp);
  };
  spec.initial = [](double, std::span<const double>) { return 0.0; };
  auto disc = chebyshev_grid(12, -1.0, 1.0);
  auto sys = make_system(spec, disc, {});
  IntegratorConfig cfg;
  cfg.output_times = {0.25, 0.5, 1.0};
  Trajectory traj = integrate(sys, cfg);
  for (const auto& state : traj.states) CHECK(sup_norm(state) == 0.0);
}

TEST_CASE("tolerance scaling on the scalar test") {
  ProblemSpec spec = decay_spec();
  auto disc = fem_grid(1, -1.0, 1.0);
  auto sys = make_system(spec, disc, {});
  auto achieved = [&](double rtol) {
    IntegratorConfig cfg;
    cfg.rtol = rtol;
    cfg.atol = 1e-15;
    Trajectory traj = integrate(sys, cfg);
    return std::abs(traj.states[0].values(0) - std::exp(-1.0));
  };
  const double coarse = achieved(1e-4);
  const double fine = achieved(1e-8);
  CHECK(fine <= coarse * 1e-3);  // 4 orders of rtol buy >= 3 orders of error
  CHECK(coarse <= 1e-4);
  CHECK(fine >= 0.0);
}

TEST_CASE("linear superposition") {
  auto disc = chebyshev_grid(16, -1.0, 1.0);
  ProblemSpec base = preset_problem1();
  const std::vector<double> y{0.25};
  IntegratorConfig cfg;
  cfg.rtol = 1e-11;
  cfg.atol = 1e-13;

  ProblemSpec spec_v1 = base;
  spec_v1.initial = [](double x, std::span<const double>) {
    return std::cos(2.0 * x);
  };
  spec_v1.forcing = [](double, double, std::span<const double>) { return 0.0; };
  ProblemSpec spec_v2 = base;  // v2 = sin(4 pi x), forcing g
  ProblemSpec spec_sum = base;
  spec_sum.initial = [](double x, std::span<const double>) {
    return std::cos(2.0 * x) + std::sin(4.0 * std::numbers::pi * x);
  };

  Trajectory t1 = integrate(make_system(spec_v1, disc, y), cfg);
  Trajectory t2 = integrate(make_system(spec_v2, disc, y), cfg);
  Trajectory ts = integrate(make_system(spec_sum, disc, y), cfg);
  Eigen::VectorXd diff =
      ts.states[0].values - t2.states[0].values - t1.states[0].values;
  CHECK(diff.cwiseAbs().maxCoeff() <= 10.0 * cfg.rtol * 100.0);
}

TEST_CASE("determinism") {
  ProblemSpec spec = preset_problem1();
  auto disc = chebyshev_grid(24, -1.0, 1.0);
  IntegratorConfig cfg;
  cfg.output_times = {0.3, 1.0};
  Trajectory a = integrate(make_system(spec, disc, {0.1}), cfg);
  Trajectory b = integrate(make_system(spec, disc, {0.1}), cfg);
  for (std::size_t i = 0; i < a.states.size(); ++i)
    for (Eigen::Index j = 0; j < a.states[i].values.size(); ++j)
      CHECK(a.states[i].values(j) == b.states[i].values(j));
  CHECK(a.stats.rhs_evals == b.stats.rhs_evals);
}

TEST_CASE("rhs evaluation bookkeeping") {
  ProblemSpec spec = preset_problem1();
  auto disc = chebyshev_grid(16, -1.0, 1.0);
  IntegratorConfig cfg;
  cfg.initial_step = 1e-3;  // no starting-step heuristic evals
  Trajectory traj = integrate(make_system(spec, disc, {0.2}), cfg);
  CHECK(traj.stats.rhs_evals ==
        6 * (traj.stats.steps_accepted + traj.stats.steps_rejected) + 1);

  IntegratorConfig cfg_auto;
  Trajectory auto_traj = integrate(make_system(spec, disc, {0.2}), cfg_auto);
  CHECK(auto_traj.stats.rhs_evals ==
        6 * (auto_traj.stats.steps_accepted + auto_traj.stats.steps_rejected) +
            1 + 2);
}

TEST_CASE("estimate_initial_step") {
  Eigen::VectorXd u0 = Eigen::VectorXd::Ones(3);
  IntegratorStats stats;
  RhsFn zero = [](double, const Eigen::VectorXd&, Eigen::VectorXd& out) {
    out.setZero();
  };
  CHECK(estimate_initial_step(zero, 0.0, u0, 2.0, 1e-10, 1e-12, &stats) ==
        Catch::Approx(0.02));

  RhsFn slow = [](double, const Eigen::VectorXd& u, Eigen::VectorXd& out) {
    out = -u;
  };
  RhsFn fast = [](double, const Eigen::VectorXd& u, Eigen::VectorXd& out) {
    out = -1000.0 * u;
  };
  const double h_slow = estimate_initial_step(slow, 0.0, u0, 1.0, 1e-8, 1e-10);
  const double h_fast = estimate_initial_step(fast, 0.0, u0, 1.0, 1e-8, 1e-10);
  CHECK(h_fast < h_slow);
  CHECK(h_slow <= 1.0);
  CHECK(h_fast <= 1.0);
  CHECK(h_fast > 0.0);
}

TEST_CASE("validation errors") {
  ProblemSpec spec = preset_problem1();
  auto disc = chebyshev_grid(8, -1.0, 1.0);
  IntegratorConfig bad;
  bad.output_times = {2.0};  // beyond T = 1
  CHECK_THROWS_AS(integrate(make_system(spec, disc, {0.0}), bad),
                  std::invalid_argument);

  IntegratorConfig few;
  few.max_steps = 3;
  CHECK_THROWS_AS(integrate(make_system(spec, disc, {0.0}), few),
                  std::runtime_error);
}
