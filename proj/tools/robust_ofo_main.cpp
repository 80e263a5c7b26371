// Command-line front end: robust feasibility solves, portfolio instance
// generation, and the strategy-comparison bench harness.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rofo/bench.hpp"
#include "rofo/eigen_sym.hpp"
#include "rofo/framework.hpp"
#include "rofo/instance_io.hpp"
#include "rofo/portfolio.hpp"
#include "rofo/robust_qp.hpp"

namespace {

constexpr int kExitFeasible = 0;
constexpr int kExitInfeasible = 1;
constexpr int kExitUndecided = 2;
constexpr int kExitUsage = 64;
constexpr int kExitInternal = 70;

struct SolveArgs {
  std::string instance_path;
  std::string strategy = "ofo";
  double epsilon = 0.002;
  long max_iter = 1000000;
  std::uint64_t seed = 0;
  std::string trace_path;
  double tau = -1.0;  // <0 keeps the per-strategy default
  std::string weights = "uniform_anytime";
  long horizon = 0;
  std::string step_mode = "theoretical";
  long nominal_budget = 4000000;
  long scenario_cap = 256;
};

rofo::RunConfig make_config(const SolveArgs& args) {
  rofo::RunConfig config;
  config.epsilon = args.epsilon;
  config.max_iterations = args.max_iter;
  config.strategy = rofo::strategy_from_name(args.strategy);
  config.seed = args.seed;
  config.record_trace = !args.trace_path.empty();
  config.nominal_budget = args.nominal_budget;
  config.scenario_cap = args.scenario_cap;
  if (args.tau >= 0.0) config.tau_policy = rofo::TauPolicy::fixed(args.tau);
  if (args.weights == "uniform_anytime") {
    config.weights = rofo::WeightScheme::uniform_anytime();
  } else if (args.weights == "fixed_horizon") {
    config.weights = rofo::WeightScheme::fixed_horizon(
        args.horizon > 0 ? args.horizon : args.max_iter);
  } else {
    throw CLI::ValidationError("--weights must be uniform_anytime or fixed_horizon");
  }
  if (args.step_mode == "theoretical") {
    config.step_mode = rofo::StepMode::Theoretical;
  } else if (args.step_mode == "line_search") {
    config.step_mode = rofo::StepMode::LineSearch;
  } else {
    throw CLI::ValidationError("--step-mode must be theoretical or line_search");
  }
  return config;
}

int cmd_solve(const SolveArgs& args) {
  const rofo::InstanceFile file = rofo::read_instance(args.instance_path);
  const rofo::RobustInstance instance = rofo::to_robust_instance(file);
  const rofo::RunConfig config = make_config(args);
  const rofo::SolveOutcome outcome = rofo::solve(instance, config);

  std::printf("verdict:          %s\n", rofo::verdict_name(outcome.verdict).c_str());
  if (outcome.verdict == rofo::Verdict::Feasible) {
    std::printf("certified bound:  %.6g (epsilon %.6g)\n", outcome.certified_bound,
                config.epsilon);
  } else if (outcome.verdict == rofo::Verdict::Infeasible) {
    std::printf("evidence:         vartheta %.6g > threshold %.6g at iteration %ld\n",
                outcome.infeasible_vartheta, outcome.infeasible_threshold,
                outcome.infeasible_at);
  }
  std::printf("iterations:       %ld\n", outcome.iterations);
  std::printf("total time:       %.3f s\n", outcome.total_seconds);
  for (const auto& w : outcome.warnings) std::printf("warning:          %s\n", w.c_str());

  if (!args.trace_path.empty()) {
    rofo::write_trace_csv(args.trace_path, outcome, config, instance.constraints.size());
    std::printf("trace:            %s\n", args.trace_path.c_str());
  }
  switch (outcome.verdict) {
    case rofo::Verdict::Feasible: return kExitFeasible;
    case rofo::Verdict::Infeasible: return kExitInfeasible;
    case rofo::Verdict::Undecided: return kExitUndecided;
  }
  return kExitInternal;
}

struct GenArgs {
  long n = 100;
  long m = 5;
  long p = 90;
  double alpha = 0.95;
  double lambda = 1.0;
  std::uint64_t seed = 0;
  std::string out_path;
  double margin = 0.1;
};

int cmd_gen_portfolio(const GenArgs& args) {
  rofo::PortfolioParams params;
  params.n = args.n;
  params.m = args.m;
  params.p = args.p;
  params.alpha = args.alpha;
  params.lambda = args.lambda;
  params.seed = args.seed;
  const rofo::PortfolioInstance pi = rofo::generate_instance(params);
  const rofo::BenchmarkInstance bi = rofo::make_benchmark_instance(params, args.margin);

  rofo::InstanceFile file;
  file.domain_x = rofo::ProximalSetup::simplex(bi.n);
  file.constraints.push_back(bi.constraint);
  file.lambda = bi.lambda;
  rofo::write_instance(file, args.out_path);

  const rofo::QpInstanceBounds bounds = rofo::qp_bounds(file.constraints);
  std::printf("wrote %s\n", args.out_path.c_str());
  std::printf("n=%ld m=%ld p=%ld K=%lld seed=%llu\n", args.n, args.m, args.p,
              static_cast<long long>(bi.K),
              static_cast<unsigned long long>(args.seed));
  std::printf("gradient scale:    %.6g (divided out)\n", bi.scale);
  std::printf("uniform portfolio: robust value %.6g at level %.6g (margin %.3g)\n",
              bi.value_at_uniform, bi.level, args.margin);
  std::printf("scaled bounds:     sigma=%.4g chi=%.4g rho=%.4g beta=%.4g\n", bounds.sigma(),
              bounds.chi, bounds.rho, bounds.beta);
  std::printf("column caps:       max sqrt(m c_m s_i^2) = %.6g\n",
              pi.column_deviation_cap().maxCoeff());
  if (pi.regenerations > 0) {
    std::printf("note: regression redrawn %d time(s) due to singular systems\n",
                pi.regenerations);
  }
  return 0;
}

struct BenchArgs {
  std::vector<std::string> patterns;
  std::string strategies = "ofo,fo_pessimization,nominal_oracle,full_pessimization";
  double epsilon = 0.002;
  int repeats = 1;
  std::string out_dir = "bench_out";
  long max_iter = 1000000;
  std::uint64_t seed = 0;
  long nominal_budget = 4000000;
  bool no_traces = false;
};

std::vector<std::string> expand_patterns(const std::vector<std::string>& patterns) {
  namespace fs = std::filesystem;
  std::vector<std::string> out;
  for (const auto& pattern : patterns) {
    if (pattern.find('*') == std::string::npos) {
      out.push_back(pattern);
      continue;
    }
    const fs::path p(pattern);
    const fs::path dir = p.parent_path().empty() ? fs::path(".") : p.parent_path();
    const std::string stem = p.filename().string();
    const auto star = stem.find('*');
    const std::string prefix = stem.substr(0, star);
    const std::string suffix = stem.substr(star + 1);
    std::vector<std::string> matched;
    if (fs::exists(dir)) {
      for (const auto& entry : fs::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        if (name.size() >= prefix.size() + suffix.size() &&
            name.compare(0, prefix.size(), prefix) == 0 &&
            name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0) {
          matched.push_back(entry.path().string());
        }
      }
    }
    std::sort(matched.begin(), matched.end());
    out.insert(out.end(), matched.begin(), matched.end());
  }
  return out;
}

int cmd_bench(const BenchArgs& args) {
  rofo::BenchOptions options;
  options.instance_paths = expand_patterns(args.patterns);
  if (options.instance_paths.empty()) {
    std::cerr << "bench: no instances matched\n";
    return kExitUsage;
  }
  {
    std::string token;
    std::stringstream ss(args.strategies);
    while (std::getline(ss, token, ',')) {
      if (!token.empty()) options.strategies.push_back(rofo::strategy_from_name(token));
    }
  }
  if (options.strategies.empty()) {
    std::cerr << "bench: no strategies selected\n";
    return kExitUsage;
  }
  options.repeats = args.repeats;
  options.out_dir = args.out_dir;
  options.config.epsilon = args.epsilon;
  options.config.max_iterations = args.max_iter;
  options.config.seed = args.seed;
  options.config.nominal_budget = args.nominal_budget;
  std::filesystem::create_directories(args.out_dir);
  if (args.no_traces) options.out_dir.clear();

  const std::vector<rofo::BenchRow> rows = rofo::run_bench(options);
  options.out_dir = args.out_dir;  // summary always lands in the output dir
  const std::string summary = (std::filesystem::path(args.out_dir) / "summary.csv").string();
  const std::string plot = (std::filesystem::path(args.out_dir) / "plot_data.csv").string();
  rofo::write_bench_summary(rows, summary, options);
  rofo::write_plot_data(rows, plot, options);

  std::size_t failures = 0;
  for (const auto& r : rows) {
    std::printf("%-20s %-28s %-10s iters=%-9ld %.3fs  (%.6g s/iter)\n", r.strategy.c_str(),
                r.instance.c_str(), r.verdict.c_str(), r.iterations, r.seconds,
                r.seconds_per_iteration);
    if (r.verdict == "error") {
      ++failures;
      std::printf("  error: %s\n", r.error.c_str());
    }
  }
  std::printf("summary: %s\nplot data: %s\n", summary.c_str(), plot.c_str());
  return failures == rows.size() ? kExitInternal : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust convex feasibility and optimization via online first-order updates"};
  app.require_subcommand(1);

  SolveArgs solve_args;
  CLI::App* solve = app.add_subcommand("solve", "Solve a robust feasibility instance");
  solve->add_option("instance", solve_args.instance_path, "Instance JSON path")->required();
  solve->add_option("--strategy", solve_args.strategy,
                    "ofo | fo_pessimization | nominal_oracle | full_pessimization");
  solve->add_option("--epsilon", solve_args.epsilon, "Tolerance (default 0.002)");
  solve->add_option("--max-iter", solve_args.max_iter, "Iteration budget");
  solve->add_option("--seed", solve_args.seed, "RNG seed recorded in outputs");
  solve->add_option("--trace", solve_args.trace_path, "Write the per-iteration trace CSV here");
  solve->add_option("--tau", solve_args.tau, "Fixed tau in (0,1); default per strategy");
  solve->add_option("--weights", solve_args.weights, "uniform_anytime | fixed_horizon");
  solve->add_option("--horizon", solve_args.horizon, "Horizon for fixed_horizon weights");
  solve->add_option("--step-mode", solve_args.step_mode, "theoretical | line_search");
  solve->add_option("--nominal-budget", solve_args.nominal_budget,
                    "Inner iteration budget for nominal solves");
  solve->add_option("--scenario-cap", solve_args.scenario_cap,
                    "Scenario cap for full pessimization");

  GenArgs gen_args;
  CLI::App* gen = app.add_subcommand("gen-portfolio", "Generate a portfolio instance");
  gen->add_option("--n", gen_args.n, "Assets")->required();
  gen->add_option("--m", gen_args.m, "Factors")->required();
  gen->add_option("--p", gen_args.p, "Return samples (default 90)");
  gen->add_option("--alpha", gen_args.alpha, "Confidence level (default 0.95)");
  gen->add_option("--lambda", gen_args.lambda, "Risk-return trade-off");
  gen->add_option("--seed", gen_args.seed, "Generator seed");
  gen->add_option("--margin", gen_args.margin,
                  "Feasibility margin of the uniform portfolio at the baked level");
  gen->add_option("out", gen_args.out_path, "Output instance path")->required();

  BenchArgs bench_args;
  CLI::App* bench = app.add_subcommand("bench", "Run strategies over instances");
  bench->add_option("instances", bench_args.patterns, "Instance paths or globs")->required();
  bench->add_option("--strategies", bench_args.strategies, "Comma-separated strategy list");
  bench->add_option("--epsilon", bench_args.epsilon, "Tolerance (default 0.002)");
  bench->add_option("--repeats", bench_args.repeats, "Repeats per cell");
  bench->add_option("--out", bench_args.out_dir, "Output directory");
  bench->add_option("--max-iter", bench_args.max_iter, "Iteration budget per run");
  bench->add_option("--seed", bench_args.seed, "Base seed");
  bench->add_option("--nominal-budget", bench_args.nominal_budget,
                    "Inner iteration budget for nominal solves");
  bench->add_flag("--no-traces", bench_args.no_traces, "Skip per-run trace files");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? 0 : kExitUsage;
  }

  try {
    if (solve->parsed()) return cmd_solve(solve_args);
    if (gen->parsed()) return cmd_gen_portfolio(gen_args);
    if (bench->parsed()) return cmd_bench(bench_args);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitUsage;
}
