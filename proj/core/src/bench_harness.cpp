#include "rofo/bench.hpp"

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <thread>

namespace rofo {
namespace {

int resolve_threads(int requested, std::size_t cells) {
  int n = requested;
  if (n <= 0) {
    if (const char* env = std::getenv("ROBUST_OFO_THREADS")) {
      n = std::atoi(env);
    }
  }
  if (n <= 0) n = static_cast<int>(std::thread::hardware_concurrency());
  if (n <= 0) n = 1;
  return static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(n), cells));
}

std::string instance_stem(const std::string& path) {
  return std::filesystem::path(path).stem().string();
}

}  // namespace

std::vector<BenchRow> run_bench(const BenchOptions& options) {
  struct Cell {
    std::size_t instance_idx;
    Strategy strategy;
    int repeat;
  };
  std::vector<Cell> cells;
  for (std::size_t ii = 0; ii < options.instance_paths.size(); ++ii) {
    for (const Strategy s : options.strategies) {
      for (int r = 0; r < options.repeats; ++r) cells.push_back(Cell{ii, s, r});
    }
  }
  std::vector<BenchRow> rows(cells.size());

  // Instances parse once up front; a bad file fails all of its cells.
  std::vector<RobustInstance> instances(options.instance_paths.size());
  std::vector<std::string> load_errors(options.instance_paths.size());
  for (std::size_t ii = 0; ii < options.instance_paths.size(); ++ii) {
    try {
      instances[ii] = to_robust_instance(read_instance(options.instance_paths[ii]));
    } catch (const std::exception& e) {
      load_errors[ii] = e.what();
    }
  }

  const bool traces = !options.out_dir.empty();
  if (traces) std::filesystem::create_directories(options.out_dir);

  std::atomic<std::size_t> next{0};
  const auto worker = [&]() {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= cells.size()) return;
      const Cell& cell = cells[k];
      BenchRow& row = rows[k];
      row.strategy = strategy_name(cell.strategy);
      row.instance = instance_stem(options.instance_paths[cell.instance_idx]);
      if (!load_errors[cell.instance_idx].empty()) {
        row.verdict = "error";
        row.error = load_errors[cell.instance_idx];
        continue;
      }
      const RobustInstance& instance = instances[cell.instance_idx];
      row.n = instance.x_setup.dimension();
      RunConfig config = options.config;
      config.strategy = cell.strategy;
      config.record_trace = traces;
      config.seed = options.config.seed + static_cast<std::uint64_t>(cell.repeat);
      try {
        const SolveOutcome outcome = solve(instance, config);
        row.verdict = verdict_name(outcome.verdict);
        row.iterations = outcome.iterations;
        row.seconds = outcome.total_seconds;
        row.seconds_per_iteration =
            outcome.iterations > 0 ? outcome.total_seconds / outcome.iterations : 0.0;
        if (traces) {
          const std::string name = row.instance + "__" + row.strategy + "__rep" +
                                   std::to_string(cell.repeat) + ".trace.csv";
          write_trace_csv((std::filesystem::path(options.out_dir) / name).string(), outcome,
                          config, instance.constraints.size());
        }
      } catch (const std::exception& e) {
        row.verdict = "error";
        row.error = e.what();
      }
    }
  };

  const int nthreads = resolve_threads(options.threads, cells.size());
  if (nthreads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(nthreads));
    for (int i = 0; i < nthreads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return rows;
}

void write_bench_summary(const std::vector<BenchRow>& rows, const std::string& path,
                         const BenchOptions& options) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("bench: cannot write '" + path + "'");
  out << "# robust-ofo bench seed=" << options.config.seed
      << " epsilon=" << options.config.epsilon << " repeats=" << options.repeats << "\n";
  out << "strategy,instance,verdict,iterations,seconds,seconds_per_iteration\n";
  out.precision(17);
  for (const auto& r : rows) {
    out << r.strategy << ',' << r.instance << ',' << r.verdict << ',' << r.iterations << ','
        << r.seconds << ',' << r.seconds_per_iteration << '\n';
  }
}

void write_plot_data(const std::vector<BenchRow>& rows, const std::string& path,
                     const BenchOptions& options) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("bench: cannot write '" + path + "'");
  out << "# robust-ofo plot-data seed=" << options.config.seed
      << " epsilon=" << options.config.epsilon << "\n";
  out << "n,strategy,mean_seconds\n";
  out.precision(17);
  std::map<std::pair<Eigen::Index, std::string>, std::pair<double, long>> agg;
  for (const auto& r : rows) {
    if (r.verdict == "error") continue;
    auto& slot = agg[{r.n, r.strategy}];
    slot.first += r.seconds;
    slot.second += 1;
  }
  for (const auto& [key, sum_count] : agg) {
    out << key.first << ',' << key.second << ',' << sum_count.first / sum_count.second << '\n';
  }
}

}  // namespace rofo
