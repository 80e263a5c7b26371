#pragma once

#include <string>
#include <vector>

#include "rofo/framework.hpp"
#include "rofo/instance_io.hpp"

namespace rofo {

// One (strategy x instance x repeat) bench cell result.
struct BenchRow {
  std::string strategy;
  std::string instance;
  std::string verdict;   // or "error"
  long iterations = 0;
  double seconds = 0.0;
  double seconds_per_iteration = 0.0;
  Eigen::Index n = 0;    // decision dimension, for the plot data
  std::string error;
};

struct BenchOptions {
  std::vector<std::string> instance_paths;
  std::vector<Strategy> strategies;
  RunConfig config;        // epsilon, weights, budgets; strategy is overridden per cell
  int repeats = 1;
  std::string out_dir;     // per-run trace files land here; empty disables traces
  // Worker cap; 0 reads ROBUST_OFO_THREADS, then hardware_concurrency.
  int threads = 0;
};

// Runs every cell (independent, thread-pooled) and returns the rows in
// deterministic (instance, strategy, repeat) order.  Failures are recorded
// on the row rather than aborting the sweep.
std::vector<BenchRow> run_bench(const BenchOptions& options);

// strategy,instance,verdict,iterations,seconds,seconds_per_iteration
void write_bench_summary(const std::vector<BenchRow>& rows, const std::string& path,
                         const BenchOptions& options);

// n,strategy,mean_seconds -- the Figure-style plot data.
void write_plot_data(const std::vector<BenchRow>& rows, const std::string& path,
                     const BenchOptions& options);

}  // namespace rofo
