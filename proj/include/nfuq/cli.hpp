#pragma once

#include "nfuq/csv.hpp"
#include "nfuq/svg.hpp"
#include "nfuq/toml.hpp"
#include "nfuq/uq.hpp"

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace nfuq {

/// Invalid or missing configuration; maps to exit code 1.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Exit codes shared by all subcommands.
enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 1,
  kExitSolver = 2,
  kExitValidation = 3,
};

/// Fully resolved run configuration: a preset problem plus the numeric
/// choices from the config file and --set overrides.
struct RunConfig {
  toml::Document doc;
  std::string preset;
  ProblemSpec spec;

  GridKind spatial_kind = GridKind::Chebyshev;
  int n = 40;
  std::vector<int> orders;
  std::vector<int> ref_orders;
  IntegratorConfig integrator;

  std::string out_dir = ".";
  bool write_csv = true;
  bool write_svg = false;
  int workers = 1;

  std::vector<int> sweep_n;
  std::vector<int> sweep_q;

  long mc_samples = 2000;
  std::uint64_t mc_seed = 1;

  std::vector<double> point_y;
  bool point_midpoint = false;

  bool have_ubar = false;
  double ubar = 0.0;
  bool linearize_at_initial = false;
};

namespace cli_detail {

inline std::vector<int> to_int_list(const std::vector<double>& v,
                                    const std::string& field) {
  std::vector<int> out;
  for (double x : v) {
    const int i = static_cast<int>(std::lround(x));
    if (std::abs(x - i) > 1e-9)
      throw ConfigError("field " + field + ": expected integers");
    out.push_back(i);
  }
  return out;
}

inline std::vector<int> resolve_orders(const toml::Document& doc,
                                       const std::string& key,
                                       std::vector<int> fallback,
                                       std::size_t m) {
  auto raw = toml::get_numbers(doc, "stochastic", key, {});
  if (raw.empty()) return fallback;
  auto orders = to_int_list(raw, "stochastic." + key);
  if (orders.size() == 1 && m > 1) orders.assign(m, orders[0]);
  if (orders.size() != m)
    throw ConfigError("field stochastic." + key + ": expected " +
                      std::to_string(m) + " orders, got " +
                      std::to_string(orders.size()));
  return orders;
}

inline ProblemSpec build_problem(const toml::Document& doc,
                                 const std::string& preset) {
  auto num = [&](const std::string& key, double fallback) {
    return toml::get_number(doc, "problem", key, fallback);
  };
  if (preset == "problem1") {
    return preset_problem1(num("alpha", -2.0), num("beta", 0.5), num("T", 1.0));
  }
  if (preset == "problem2" || preset == "problem3") {
    Problem2Params p;
    p.sigma_w = num("sigma_w", p.sigma_w);
    p.F0 = num("F0", p.F0);
    p.mu = num("mu", p.mu);
    p.h = num("h", p.h);
    p.omega_g = num("omega_g", p.omega_g);
    p.sigma_g = num("sigma_g", p.sigma_g);
    p.A0 = num("A0", p.A0);
    p.A1 = num("A1", p.A1);
    p.omega_A = num("omega_A", p.omega_A);
    p.T = num("T", p.T);
    if (preset == "problem2") {
      Problem2Dist dist;
      const std::string kind =
          toml::get_string(doc, "problem", "dist", "uniform");
      if (kind == "normal") {
        dist.normal = true;
        dist.a1 = num("mu1", 1.5);
        dist.b1 = num("sigma1", 0.25);
        dist.a2 = num("mu2", 0.5);
        dist.b2 = num("sigma2", 1.0);
      } else if (kind == "uniform") {
        dist.a1 = num("a1", dist.a1);
        dist.b1 = num("b1", dist.b1);
        dist.a2 = num("a2", dist.a2);
        dist.b2 = num("b2", dist.b2);
      } else {
        throw ConfigError("field problem.dist: expected 'uniform' or 'normal'");
      }
      return preset_problem2(dist, p);
    }
    Problem3Ranges r;
    r.y1_a = num("y1_a", r.y1_a);
    r.y1_b = num("y1_b", r.y1_b);
    r.y2_a = num("y2_a", r.y2_a);
    r.y2_b = num("y2_b", r.y2_b);
    r.A0_a = num("A0_a", r.A0_a);
    r.A0_b = num("A0_b", r.A0_b);
    r.F0_a = num("F0_a", r.F0_a);
    r.F0_b = num("F0_b", r.F0_b);
    return preset_problem3(r, p);
  }
  if (preset == "ring") return preset_ring(num("T", 20.0));
  throw ConfigError("field problem.preset: unknown preset '" + preset +
                    "' (expected problem1|problem2|problem3|ring)");
}

inline std::string time_label(double t) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "u_t%g", t);
  return buf;
}

}  // namespace cli_detail

inline RunConfig build_run_config(toml::Document doc) {
  RunConfig cfg;
  cfg.preset = toml::get_string(doc, "problem", "preset", "");
  if (cfg.preset.empty())
    throw ConfigError("missing required field problem.preset");
  cfg.spec = cli_detail::build_problem(doc, cfg.preset);
  const std::size_t m = cfg.spec.params.size();
  const bool ring = cfg.spec.ring;

  const std::string kind =
      toml::get_string(doc, "spatial", "kind", ring ? "periodic" : "chebyshev");
  if (kind == "chebyshev") cfg.spatial_kind = GridKind::Chebyshev;
  else if (kind == "fem") cfg.spatial_kind = GridKind::FemP1;
  else if (kind == "periodic") cfg.spatial_kind = GridKind::PeriodicEquispaced;
  else
    throw ConfigError("field spatial.kind: expected chebyshev|fem|periodic");
  if (ring != (cfg.spatial_kind == GridKind::PeriodicEquispaced))
    throw ConfigError("field spatial.kind: '" + kind +
                      "' does not match the problem's domain");
  cfg.n = static_cast<int>(toml::get_number(doc, "spatial", "n", ring ? 64 : 40));

  std::vector<int> default_orders;
  if (cfg.preset == "problem1") default_orders = {20};
  else if (cfg.preset == "problem2") default_orders = {8, 8};
  else if (cfg.preset == "problem3") default_orders = {4, 4, 4, 4};
  else default_orders = std::vector<int>(m, 2);
  cfg.orders = cli_detail::resolve_orders(doc, "orders", default_orders, m);
  std::vector<int> default_ref = cfg.orders;
  for (int& q : default_ref) q += 4;
  cfg.ref_orders = cli_detail::resolve_orders(doc, "ref_orders", default_ref, m);

  cfg.integrator.rtol =
      toml::get_number(doc, "integrator", "rtol", ring ? 1e-8 : 1e-12);
  cfg.integrator.atol =
      toml::get_number(doc, "integrator", "atol", ring ? 1e-10 : 1e-13);
  cfg.integrator.max_steps = static_cast<long>(
      toml::get_number(doc, "integrator", "max_steps", 10'000'000));
  cfg.integrator.output_times = toml::get_numbers(
      doc, "integrator", "output_times", {cfg.spec.time_horizon});
  if (!(cfg.integrator.rtol > 0.0) || !(cfg.integrator.atol > 0.0))
    throw ConfigError("field integrator.rtol/atol: must be positive");
  for (double t : cfg.integrator.output_times)
    if (t < 0.0 || t > cfg.spec.time_horizon)
      throw ConfigError("field integrator.output_times: outside [0, T]");

  cfg.out_dir = toml::get_string(doc, "output", "directory", ".");
  const toml::Value* fmts = toml::find(doc, "output", "formats");
  if (fmts) {
    if (fmts->kind != toml::Value::Kind::StringArray &&
        fmts->kind != toml::Value::Kind::String)
      throw ConfigError("field output.formats: expected a string array");
    std::vector<std::string> names = fmts->kind == toml::Value::Kind::String
                                         ? std::vector<std::string>{fmts->string}
                                         : fmts->strings;
    cfg.write_csv = false;
    cfg.write_svg = false;
    for (const auto& f : names) {
      if (f == "csv") cfg.write_csv = true;
      else if (f == "svg") cfg.write_svg = true;
      else throw ConfigError("field output.formats: unknown format '" + f + "'");
    }
  }
  cfg.workers =
      static_cast<int>(toml::get_number(doc, "execution", "workers", 1));
  if (cfg.workers < 1)
    throw ConfigError("field execution.workers: must be >= 1");

  cfg.sweep_n = cli_detail::to_int_list(
      toml::get_numbers(doc, "sweep", "n", {}), "sweep.n");
  cfg.sweep_q = cli_detail::to_int_list(
      toml::get_numbers(doc, "sweep", "q", {}), "sweep.q");

  cfg.mc_samples =
      static_cast<long>(toml::get_number(doc, "mc", "samples", 2000));
  if (cfg.mc_samples < 2)
    throw ConfigError("field mc.samples: must be >= 2");
  cfg.mc_seed =
      static_cast<std::uint64_t>(toml::get_number(doc, "mc", "seed", 1));

  cfg.point_y = toml::get_numbers(doc, "point", "y", {});
  cfg.point_midpoint = toml::get_bool(doc, "point", "midpoint", false);
  if (!cfg.point_y.empty() && cfg.point_y.size() != m)
    throw ConfigError("field point.y: expected " + std::to_string(m) +
                      " components");

  if (const toml::Value* v = toml::find(doc, "spectrum", "ubar")) {
    if (v->kind != toml::Value::Kind::Number)
      throw ConfigError("field spectrum.ubar: expected a number");
    cfg.have_ubar = true;
    cfg.ubar = v->number;
  }
  cfg.linearize_at_initial =
      toml::get_string(doc, "spectrum", "linearize_at", "") == "initial";

  cfg.doc = std::move(doc);
  return cfg;
}

namespace cli_detail {

inline DiscPtr make_grid(const RunConfig& cfg, int n) {
  return default_grid(cfg.spec, cfg.spatial_kind, n);
}

inline std::vector<double> midpoint_y(const ProblemSpec& spec) {
  std::vector<double> y;
  for (const auto& d : spec.params.dims) y.push_back(d.midpoint());
  return y;
}

inline std::string out_path(const RunConfig& cfg, const std::string& name) {
  std::filesystem::create_directories(cfg.out_dir);
  return (std::filesystem::path(cfg.out_dir) / name).string();
}

/// Write per-time nodal columns: x, value at each output time.
inline void write_field_csv(const RunConfig& cfg, const std::string& name,
                            const std::vector<double>& nodes,
                            const std::vector<Eigen::VectorXd>& columns,
                            const std::vector<double>& times,
                            const std::string& prefix) {
  CsvWriter csv(out_path(cfg, name));
  std::vector<std::string> head{"x"};
  for (double t : times) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%s_t%g", prefix.c_str(), t);
    head.push_back(buf);
  }
  csv.header(head);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    std::vector<double> row{nodes[i]};
    for (const auto& col : columns)
      row.push_back(col(static_cast<Eigen::Index>(i)));
    csv.row(row);
  }
}

inline void write_field_svg(const RunConfig& cfg, const std::string& name,
                            const std::string& title,
                            const std::vector<double>& nodes,
                            const std::vector<Eigen::VectorXd>& columns,
                            const std::vector<double>& times) {
  if (columns.size() > 1) {
    std::vector<std::vector<double>> grid(columns.size(),
                                          std::vector<double>(nodes.size()));
    for (std::size_t i = 0; i < columns.size(); ++i)
      for (std::size_t j = 0; j < nodes.size(); ++j)
        grid[i][j] = columns[i](static_cast<Eigen::Index>(j));
    svg::heatmap(out_path(cfg, name), title, nodes, times, grid);
  } else {
    svg::Series s;
    s.x = nodes;
    s.y.assign(columns[0].data(), columns[0].data() + columns[0].size());
    svg::line_plot(out_path(cfg, name), title, "x", "value", {s});
  }
}

}  // namespace cli_detail

/// `solve`: one deterministic realization at a fixed parameter point.
inline int cmd_solve(const RunConfig& cfg) {
  std::vector<double> y = cfg.point_y;
  if (y.empty()) y = cli_detail::midpoint_y(cfg.spec);
  DiscPtr disc = cli_detail::make_grid(cfg, cfg.n);
  SemiDiscreteSystem sys = make_system(cfg.spec, disc, y);
  Trajectory traj = integrate(sys, cfg.integrator);
  std::vector<Eigen::VectorXd> cols;
  for (const auto& f : traj.states) cols.push_back(f.values);
  if (cfg.write_csv)
    cli_detail::write_field_csv(cfg, "solution.csv", disc->nodes, cols,
                                traj.times, "u");
  if (cfg.write_svg)
    cli_detail::write_field_svg(cfg, "solution.svg", "solution", disc->nodes,
                                cols, traj.times);
  return kExitOk;
}

/// `uq`: stochastic collocation mean and variance fields.
inline int cmd_uq(const RunConfig& cfg) {
  DiscPtr disc = cli_detail::make_grid(cfg, cfg.n);
  TensorGrid grid = make_tensor_grid(cfg.spec.params, cfg.orders);
  CollocationSolution sol = solve_collocation(cfg.spec, disc, grid,
                                              cfg.integrator, {cfg.workers});
  std::vector<Eigen::VectorXd> mean_cols, var_cols;
  for (std::size_t ti = 0; ti < sol.output_times.size(); ++ti) {
    MomentField mom = moments(sol, static_cast<int>(ti));
    mean_cols.push_back(mom.mean.values);
    var_cols.push_back(mom.variance.values);
  }
  if (cfg.write_csv) {
    cli_detail::write_field_csv(cfg, "mean.csv", disc->nodes, mean_cols,
                                sol.output_times, "mean");
    cli_detail::write_field_csv(cfg, "variance.csv", disc->nodes, var_cols,
                                sol.output_times, "variance");
  }
  if (cfg.write_svg) {
    cli_detail::write_field_svg(cfg, "mean.svg", "mean", disc->nodes, mean_cols,
                                sol.output_times);
    cli_detail::write_field_svg(cfg, "variance.svg", "variance", disc->nodes,
                                var_cols, sol.output_times);
  }
  return kExitOk;
}

/// `converge`: error sweeps over n and/or isotropic q. Problems with a
/// closed-form mean use the exact error; the rest use a dedicated
/// high-order reference solve per n.
inline int cmd_converge(const RunConfig& cfg) {
  const std::size_t m = cfg.spec.params.size();
  std::vector<int> n_list = cfg.sweep_n.empty() ? std::vector<int>{cfg.n}
                                                : cfg.sweep_n;
  std::vector<int> q_list = cfg.sweep_q;
  if (q_list.empty()) q_list = {cfg.orders[0]};
  const bool exact = cfg.preset == "problem1";
  std::function<double(double)> exact_mean;
  if (exact) {
    const auto& d = cfg.spec.params.dims[0];
    const double T = cfg.spec.time_horizon;
    exact_mean = [=](double x) {
      return problem1_exact_mean(x, T, d.p1, d.p2);
    };
  }

  struct Row {
    int n;
    std::vector<int> q;
    double error;
    double seconds;
  };
  std::vector<Row> rows;
  for (int n : n_list) {
    DiscPtr disc = cli_detail::make_grid(cfg, n);
    CollocationSolution reference;
    if (!exact) {
      TensorGrid ref_grid = make_tensor_grid(cfg.spec.params, cfg.ref_orders);
      reference = solve_collocation(cfg.spec, disc, ref_grid, cfg.integrator,
                                    {cfg.workers});
    }
    for (int q : q_list) {
      const auto start = std::chrono::steady_clock::now();
      std::vector<int> orders(m, q);
      TensorGrid grid = make_tensor_grid(cfg.spec.params, orders);
      CollocationSolution sol = solve_collocation(cfg.spec, disc, grid,
                                                  cfg.integrator, {cfg.workers});
      const double err = exact ? error_vs_exact(sol, exact_mean)
                               : error_self(sol, reference);
      const double secs =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
              .count();
      rows.push_back({n, orders, err, secs});
    }
  }

  if (cfg.write_csv) {
    CsvWriter csv(cli_detail::out_path(cfg, "convergence.csv"));
    std::vector<std::string> head{"n"};
    for (std::size_t i = 1; i <= m; ++i) head.push_back("q_" + std::to_string(i));
    head.push_back("error");
    head.push_back("seconds");
    csv.header(head);
    for (const auto& r : rows) {
      std::vector<double> row{static_cast<double>(r.n)};
      for (int q : r.q) row.push_back(q);
      row.push_back(r.error);
      row.push_back(r.seconds);
      csv.row(row);
    }
  }
  if (cfg.write_svg) {
    std::vector<svg::Series> series;
    for (int n : n_list) {
      svg::Series s;
      s.label = "n=" + std::to_string(n);
      for (const auto& r : rows) {
        if (r.n != n) continue;
        s.x.push_back(r.q[0]);
        s.y.push_back(r.error);
      }
      series.push_back(std::move(s));
    }
    svg::line_plot(cli_detail::out_path(cfg, "convergence.svg"), "convergence",
                   "q", "error", series, /*logy=*/true);
  }
  return kExitOk;
}

/// `mc-check`: collocation mean vs a seeded Monte Carlo baseline; fails
/// (exit 3) when more than 1% of spatial nodes sit outside 4 standard
/// errors. Nodes whose sample spread is at integrator-roundoff level use an
/// absolute floor in the z denominator.
inline int cmd_mc_check(const RunConfig& cfg) {
  DiscPtr disc = cli_detail::make_grid(cfg, cfg.n);
  TensorGrid grid = make_tensor_grid(cfg.spec.params, cfg.orders);
  CollocationSolution sol = solve_collocation(cfg.spec, disc, grid,
                                              cfg.integrator, {cfg.workers});
  Field colloc = mean_field(sol);
  MonteCarloResult mc = monte_carlo_mean(cfg.spec, disc, cfg.integrator,
                                         cfg.mc_samples, cfg.mc_seed);
  const double floor = std::max(1e-12, 10.0 * cfg.integrator.rtol) *
                       (1.0 + sup_norm(colloc));
  std::size_t bad = 0;
  std::vector<double> z(disc->size());
  for (std::size_t i = 0; i < disc->size(); ++i) {
    const Eigen::Index j = static_cast<Eigen::Index>(i);
    const double denom = std::max(mc.stderr_.values(j), floor);
    z[i] = (mc.mean.values(j) - colloc.values(j)) / denom;
    if (std::abs(z[i]) > 4.0) ++bad;
  }
  if (cfg.write_csv) {
    CsvWriter csv(cli_detail::out_path(cfg, "mc_check.csv"));
    csv.header({"x", "collocation_mean", "mc_mean", "stderr", "z"});
    for (std::size_t i = 0; i < disc->size(); ++i) {
      const Eigen::Index j = static_cast<Eigen::Index>(i);
      csv.row({disc->nodes[i], colloc.values(j), mc.mean.values(j),
               mc.stderr_.values(j), z[i]});
    }
  }
  const double frac = static_cast<double>(bad) / static_cast<double>(disc->size());
  std::cout << "mc-check: " << bad << "/" << disc->size()
            << " nodes with |z| > 4\n";
  return frac > 0.01 ? kExitValidation : kExitOk;
}

/// `spectrum`: spectral abscissa of -I + W_n diag(f'(ubar)) over the tensor
/// nodes' parameter samples; prints a contractivity verdict.
inline int cmd_spectrum(const RunConfig& cfg) {
  DiscPtr disc = cli_detail::make_grid(cfg, cfg.n);
  TensorGrid grid = make_tensor_grid(cfg.spec.params, cfg.orders);
  auto nodes = tensor_nodes(grid);
  // one sample per distinct kernel slice, in global-index order
  std::vector<std::vector<double>> samples;
  std::vector<std::vector<double>> seen;
  for (const auto& y : nodes) {
    const auto y_w = slice(y, cfg.spec.slices.kernel);
    std::vector<double> key(y_w.begin(), y_w.end());
    if (std::find(seen.begin(), seen.end(), key) != seen.end()) continue;
    seen.push_back(key);
    samples.push_back(y);
  }
  Field ubar_field{disc, Eigen::VectorXd::Zero(0)};
  const Field* lin = nullptr;
  if (cfg.spec.firing.kind != Firing::Kind::Linear) {
    if (cfg.have_ubar) {
      ubar_field.values = Eigen::VectorXd::Constant(
          static_cast<Eigen::Index>(disc->size()), cfg.ubar);
    } else if (cfg.linearize_at_initial) {
      ubar_field =
          initial_field(cfg.spec, disc, cli_detail::midpoint_y(cfg.spec));
    } else {
      throw ConfigError(
          "spectrum: nonlinear firing requires spectrum.ubar or "
          "spectrum.linearize_at = \"initial\"");
    }
    lin = &ubar_field;
  }
  SpectrumReport report = spectrum_diagnostic(cfg.spec, disc, samples, lin);
  if (cfg.write_csv) {
    CsvWriter csv(cli_detail::out_path(cfg, "spectrum.csv"));
    std::vector<std::string> head{"sample"};
    const int mw = cfg.spec.slices.kernel.len;
    for (int i = 1; i <= mw; ++i) head.push_back("y_w" + std::to_string(i));
    head.push_back("max_real_eig");
    csv.header(head);
    for (std::size_t k = 0; k < samples.size(); ++k) {
      std::vector<double> row{static_cast<double>(k + 1)};
      const auto y_w = slice(samples[k], cfg.spec.slices.kernel);
      for (double v : y_w) row.push_back(v);
      row.push_back(report.max_real[k]);
      csv.row(row);
    }
  }
  std::cout << "contractive: " << (report.contractive() ? "yes" : "no")
            << " (max Re lambda = " << csv_number(report.global_max) << ")\n";
  return kExitOk;
}

/// Dispatch with the documented exit-code contract.
inline int run_command(const std::string& command, const RunConfig& cfg) {
  try {
    if (command == "solve") return cmd_solve(cfg);
    if (command == "uq") return cmd_uq(cfg);
    if (command == "converge") return cmd_converge(cfg);
    if (command == "mc-check") return cmd_mc_check(cfg);
    if (command == "spectrum") return cmd_spectrum(cfg);
    std::cerr << "unknown command '" << command << "'\n";
    return kExitConfig;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const toml::ParseError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return kExitSolver;
  }
}

}  // namespace nfuq
