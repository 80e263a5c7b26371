#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "rofo/geometry.hpp"
#include "rofo/oco.hpp"

namespace rofo {

struct PessimizeResult {
  VectorXd u;
  double value = 0.0;  // >= sup_u f(x,u) - tol, attained at u
};

// Evaluator contract for one robust constraint f^i(x, u^i): convex in x,
// concave in u over its uncertainty setup.
struct RobustConstraint {
  std::function<double(const VectorXd& x, const VectorXd& u)> eval;
  std::function<VectorXd(const VectorXd& x, const VectorXd& u)> grad_x;
  std::function<VectorXd(const VectorXd& x, const VectorXd& u)> grad_u;
  ProximalSetup u_setup;
  double grad_x_bound = 0.0;
  double grad_u_bound = 0.0;
  // Optional exact pessimizer: (x, tol) -> (u*, value) with
  // value >= sup_u f(x,u) - tol.
  std::function<PessimizeResult(const VectorXd& x, double tol)> pessimize;

  bool has_pessimizer() const { return static_cast<bool>(pessimize); }
};

struct ConvexObjective {
  std::function<double(const VectorXd& x)> value;
  std::function<VectorXd(const VectorXd& x)> subgrad;
  double grad_bound = 0.0;
};

struct RobustInstance {
  ProximalSetup x_setup;
  std::vector<RobustConstraint> constraints;
  std::optional<ConvexObjective> objective;
  // When >= 0, the objective is the robust value of this constraint at
  // level 0; binary search shifts that constraint's level instead of
  // appending a separate level constraint.
  int epigraph_constraint = -1;
};

enum class Strategy { Ofo, FoPessimization, NominalOracle, FullPessimization };

struct TauPolicy {
  enum class Kind { OneMinusKappaBullet, Fixed };
  Kind kind = Kind::OneMinusKappaBullet;
  double fixed_value = 0.5;

  static TauPolicy one_minus_kappa_bullet() { return {Kind::OneMinusKappaBullet, 0.5}; }
  static TauPolicy fixed(double tau) { return {Kind::Fixed, tau}; }
};

struct RunConfig {
  double epsilon = 0.002;
  long max_iterations = 1000000;
  Strategy strategy = Strategy::Ofo;
  TauPolicy tau_policy;  // oracle strategies always use a fixed tau (default 1/2)
  WeightScheme weights = WeightScheme::uniform_anytime();
  StepMode step_mode = StepMode::Theoretical;
  std::uint64_t seed = 0;
  bool record_trace = false;
  // Inner budget for one nominal / extended-nominal subproblem solve.
  long nominal_budget = 4000000;
  // Total sampled-scenario cap for the full pessimization strategy.
  long scenario_cap = 256;
};

struct TraceRecord {
  long iteration = 0;
  VectorXd per_constraint_avg;  // Sum_s theta_s f^i(x_s, u_s^i), one per constraint
  double vartheta = 0.0;        // max_i of the above
  double kappa_circ = 0.0;
  double kappa_bullet = 0.0;
  double tau = std::numeric_limits<double>::quiet_NaN();  // NaN when no check ran
  double wall_ms = 0.0;
};

enum class Verdict { Feasible, Infeasible, Undecided };

struct SolveOutcome {
  Verdict verdict = Verdict::Undecided;
  VectorXd x_bar;               // certificate point (feasible) / last average
  double certified_bound = std::numeric_limits<double>::quiet_NaN();
  long iterations = 0;
  double total_seconds = 0.0;
  double objective_value = std::numeric_limits<double>::quiet_NaN();

  // Infeasibility evidence.
  long infeasible_at = -1;
  double infeasible_vartheta = std::numeric_limits<double>::quiet_NaN();
  double infeasible_threshold = std::numeric_limits<double>::quiet_NaN();

  std::vector<TraceRecord> trace;
  std::vector<std::string> warnings;

  bool feasible() const { return verdict == Verdict::Feasible; }
};

// Algorithm-1 style OFO solver: one online mirror descent state per
// uncertainty set ascending on f^i(x_t, .), one over X descending on
// phi_t(x) = max_i f^i(x, u_t^i); certificates from the regret bounds.
SolveOutcome run_ofo(const RobustInstance& instance, const RunConfig& config);

// x_t by the same online updates; u_t^i from the per-constraint
// pessimization oracles with tolerance tau*epsilon.
SolveOutcome run_fo_pessimization(const RobustInstance& instance, const RunConfig& config);

enum class NominalMode { Feasibility, Optimization };

// u_t^i by per-constraint online updates; x_t from the nominal solver at
// the sampled noises.  Optimization mode additionally minimizes the
// instance objective and certifies epsilon-optimality of the average.
SolveOutcome run_nominal_oracle(const RobustInstance& instance, const RunConfig& config,
                                NominalMode mode = NominalMode::Feasibility);

// Cutting-plane baseline: growing scenario sets, extended nominal solves,
// pessimizers to either certify or produce violated scenarios.
SolveOutcome run_full_pessimization(const RobustInstance& instance, const RunConfig& config);

// Dispatch on config.strategy.
SolveOutcome solve(const RobustInstance& instance, const RunConfig& config);

struct BinarySearchResult {
  enum class Status { Optimal, Undecided, NoFeasibleLevel };
  Status status = Status::Undecided;
  VectorXd x;
  double value_lo = 0.0;  // Opt > value_lo certified by infeasible probes
  double value_hi = 0.0;  // objective of x is <= value_hi
  double objective = std::numeric_limits<double>::quiet_NaN();
  long feasibility_solves = 0;
};

// Bisection over the objective level: each probe adds the constraint
// f^0(x) <= level (as one more robust-insensitive constraint, or by
// shifting the epigraph constraint's level) and runs the configured
// feasibility strategy.  At most floor(log2((v_hi - v_lo)/delta))
// bisection probes.
BinarySearchResult binary_search_optimize(const RobustInstance& instance,
                                          const RunConfig& config, double v_lo,
                                          double v_hi, double delta);

// Test oracle for the saddle point gap
//   max_i sup_u f^i(xbar, u) - inf_x max_i f^i(x, ubar^i),
// pessimizers for the sup part, a dense grid (x-dimension <= 3) or a
// high-accuracy projected subgradient run for the inf part.  Refuses
// x-dimensions above 10.
double evaluate_sp_gap(const RobustInstance& instance, const VectorXd& x_bar,
                       const std::vector<VectorXd>& u_bar, double tol);

// The probe instance binary_search_optimize solves at a given level;
// exposed for tests.
RobustInstance make_level_instance(const RobustInstance& instance, double level);

}  // namespace rofo
