#include "nfuq/model.hpp"
#include "nfuq/rng.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

using namespace nfuq;

TEST_CASE("sigmoid") {
  CHECK(sigmoid(0.3, 1.0, 10.0, 0.3) == Catch::Approx(0.5).margin(1e-14));
  CHECK(sigmoid(1000.3, 1.0, 10.0, 0.3) == Catch::Approx(1.0).margin(1e-12));
  CHECK(sigmoid(0.4, 1.0, 10.0, 0.3) ==
        Catch::Approx(0.7310585786300049).margin(1e-15));
  // saturates without overflow
  CHECK(std::isfinite(sigmoid(-1e9, 2.0, 10.0, 0.3)));
  CHECK(sigmoid(-1e9, 2.0, 10.0, 0.3) == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("sigmoid monotone and bounded") {
  const double F0 = 1.7, mu = 10.0, h = 0.3;
  double prev = sigmoid(-50.0, F0, mu, h);
  for (double u = -49.5; u <= 50.0; u += 0.5) {
    const double cur = sigmoid(u, F0, mu, h);
    CHECK(cur >= prev);
    CHECK(cur > 0.0);
    CHECK(cur <= F0);  // saturates to F0 exactly in double precision
    prev = cur;
  }
}

TEST_CASE("eval_rhs structure") {
  // zero kernel, zero forcing, linear firing: rhs = -u exactly
  ProblemSpec spec;
  spec.kernel = [](double, double, std::span<const double>) { return 0.0; };
  spec.forcing = [](double, double, std::span<const double>) { return 0.0; };
  spec.initial = [](double, std::span<const double>) { return 0.0; };
  spec.time_horizon = 1.0;
  auto disc = chebyshev_grid(10, -1.0, 1.0);
  auto sys = make_system(spec, disc, {});
  Field u = project(disc, [](double x) { return std::cos(3.0 * x); });
  Field rhs = eval_rhs(sys, 0.5, u);
  CHECK((rhs.values + u.values).cwiseAbs().maxCoeff() == 0.0);

  // sigmoid at threshold with zero kernel: f contributes only through W = 0
  ProblemSpec sig = spec;
  sig.firing = {Firing::Kind::Sigmoid, 1.0, 10.0, 0.3};
  auto sys2 = make_system(sig, disc, {});
  Field u3 = project(disc, [](double) { return 0.3; });
  Field rhs2 = eval_rhs(sys2, 0.0, u3);
  for (Eigen::Index i = 0; i < rhs2.values.size(); ++i)
    CHECK(rhs2.values(i) == Catch::Approx(-0.3).margin(1e-15));
}

TEST_CASE("problem 1 stationary realization at y = 0") {
  ProblemSpec spec = preset_problem1();
  auto disc = chebyshev_grid(40, -1.0, 1.0);
  auto sys = make_system(spec, disc, {0.0});
  Field u = project(disc, [](double x) {
    return std::sin(4.0 * std::numbers::pi * x);
  });
  Field rhs = eval_rhs(sys, 0.37, u);
  CHECK(sup_norm(rhs) <= 1e-10);
}

TEST_CASE("eval_rhs affine in u for linear firing") {
  ProblemSpec spec = preset_problem1();
  auto disc = chebyshev_grid(16, -1.0, 1.0);
  auto sys = make_system(spec, disc, {0.3});
  Field u = project(disc, [](double x) { return std::exp(x) - 0.4; });
  const double t = 0.6;
  for (double alpha : {0.0, 0.5, 2.0, -1.3}) {
    Field ua{disc, alpha * u.values};
    Eigen::VectorXd lhs =
        eval_rhs(sys, t, ua).values - alpha * eval_rhs(sys, t, u).values;
    // difference is (1 - alpha) * g(t) nodally
    for (Eigen::Index i = 0; i < lhs.size(); ++i) {
      const double g = spec.forcing(disc->nodes[static_cast<std::size_t>(i)], t,
                                    std::vector<double>{0.3});
      CHECK(lhs(i) == Catch::Approx((1.0 - alpha) * g).margin(1e-12));
    }
  }
}

TEST_CASE("problem 1 exact solution satisfies the continuous equation") {
  ProblemSpec spec = preset_problem1();
  Xoshiro256 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const double x = rng.uniform(-1.0, 1.0);
    const double t = rng.uniform(0.05, 0.95);
    const double y = rng.uniform(-2.0, 0.5);
    const double dt = 1e-6;
    const double dudt = (problem1_exact_solution(x, t + dt, y) -
                         problem1_exact_solution(x, t - dt, y)) /
                        (2.0 * dt);
    // analytic kernel action: int x' u(x',t,y) dx' = -e^{yt}/(2 pi)
    const double Wu =
        -x * std::exp(y * t) / (2.0 * std::numbers::pi);
    const double g = spec.forcing(x, t, std::vector<double>{y});
    const double residual =
        dudt - (-problem1_exact_solution(x, t, y) + Wu + g);
    CHECK(std::abs(residual) <= 1e-9 * (1.0 + std::abs(dudt)));
  }
}

TEST_CASE("problem 1 exact mean") {
  // peak amplitude at t=1, alpha=-2, beta=0.5
  const double amp = (std::exp(0.5) - std::exp(-2.0)) / 2.5;
  CHECK(amp == Catch::Approx(0.6053516366).margin(1e-9));
  CHECK(problem1_exact_mean(0.125, 1.0, -2.0, 0.5) ==
        Catch::Approx(amp * std::sin(0.5 * std::numbers::pi)).margin(1e-14));
  // y = 0 realization is stationary
  CHECK(problem1_exact_solution(0.3, 0.77, 0.0) ==
        Catch::Approx(std::sin(1.2 * std::numbers::pi)).margin(1e-14));
  // narrow-distribution limit around 0 recovers sin(4 pi x)
  CHECK(problem1_exact_mean(0.125, 1.0, -1e-9, 1e-9) ==
        Catch::Approx(std::sin(0.5 * std::numbers::pi)).margin(1e-8));
}

TEST_CASE("problem 2 preset data") {
  ProblemSpec spec = preset_problem2();
  CHECK(spec.params.size() == 2);
  CHECK(spec.domain_a == -10.0);
  CHECK(spec.domain_b == 10.0);
  CHECK(spec.initial(0.0, std::vector<double>{1.5}) == Catch::Approx(1.5));
  for (double x : {-3.0, 0.0, 2.5})
    CHECK(spec.forcing(x, 0.0, std::vector<double>{0.8}) == 0.0);
  CHECK(spec.kernel(0.0, 0.0, {}) == Catch::Approx(1.0));
}

TEST_CASE("problem 3 preset structure") {
  ProblemSpec spec = preset_problem3();
  CHECK(spec.params.size() == 4);
  validate(spec);  // slices cover {1..4} disjointly

  // kernel affine in A_0 at fixed (x, x'): second difference vanishes
  const double w0 = spec.kernel(1.0, 2.0, std::vector<double>{0.0});
  const double w1 = spec.kernel(1.0, 2.0, std::vector<double>{1.0});
  const double w2 = spec.kernel(1.0, 2.0, std::vector<double>{2.0});
  CHECK(w2 - 2.0 * w1 + w0 == Catch::Approx(0.0).margin(1e-14));

  // firing F0 comes from the parameter slice
  CHECK(spec.firing(0.3, std::vector<double>{0.9}) ==
        Catch::Approx(0.45).margin(1e-14));
}

TEST_CASE("ring preset data") {
  ProblemSpec spec = preset_ring();
  CHECK(spec.ring);
  CHECK(spec.ring_length == 22.0);
  CHECK(spec.params.size() == 6);

  for (double t : {0.0, 1.0, 7.3}) {
    std::vector<double> y{1.0, 0.5, 0.3, 50.0, 12.0, 150.0};
    if (t == 0.0) CHECK(ring_pulse_center(t, y) == Catch::Approx(0.0).margin(0.0));
  }
  CHECK(spec.initial(0.0, {}) == Catch::Approx(3.0).margin(1e-14));
  CHECK(spec.kernel(5.0, 5.0, {}) == Catch::Approx(2.0).margin(1e-14));
  // kernel wraps: separation 22 is separation 0
  CHECK(spec.kernel(-11.0, 11.0, {}) == Catch::Approx(2.0).margin(1e-12));
}

TEST_CASE("problem 1 kernel symmetry") {
  ProblemSpec spec = preset_problem1();
  Xoshiro256 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const double x = rng.uniform(-1, 1), xp = rng.uniform(-1, 1);
    CHECK(spec.kernel(x, xp, {}) == spec.kernel(xp, x, {}));
  }
}

TEST_CASE("slice validation") {
  ProblemSpec spec = preset_problem2();
  spec.slices.forcing = {0, 1};  // now overlaps initial
  CHECK_THROWS_AS(validate(spec), std::invalid_argument);
  spec.slices = {};
  CHECK_THROWS_AS(validate(spec), std::invalid_argument);  // uncovered dims
}
