#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "rofo/geometry.hpp"

namespace rofo {

// Convex-combination weights used by the certificate bookkeeping.
//   UniformAnytime : every prefix {1..t} is weighted uniformly (1/t); steps
//                    use the decreasing schedule gamma_t = sqrt(2*Omega)/(G*sqrt(t)).
//   FixedHorizon   : theta_t = 1/T with the constant step of the
//                    sqrt(2*Omega*G^2*Sum theta^2) guarantee; bounds are
//                    meaningful at t = T.
struct WeightScheme {
  enum class Kind { UniformAnytime, FixedHorizon };
  Kind kind = Kind::UniformAnytime;
  long horizon = 0;  // required for FixedHorizon

  static WeightScheme uniform_anytime() { return {Kind::UniformAnytime, 0}; }
  static WeightScheme fixed_horizon(long t) { return {Kind::FixedHorizon, t}; }
};

enum class StepMode { Theoretical, LineSearch };

// Anytime prefix bounds pay a constant over the fixed-horizon guarantee.
// The factor below was calibrated against adversarial first-order
// sequences (adaptive sign and leader-chasing plays reach ratios ~1.74
// over the fixed-horizon form); 2.0 bounds all of them with margin.
inline constexpr double kAnytimeRegretFactor = 2.0;

// sqrt(2*Omega*G^2*Sum_{s<=t} theta_s^2) of the online mirror descent
// guarantee, specialized per weight scheme.
struct RegretBoundFn {
  double omega = 0.0;
  double gradient_bound = 0.0;
  WeightScheme scheme;

  double operator()(long t) const;
};

double regret_bound(const RegretBoundFn& fn, long t);

// Online mirror descent state over one proximal setup.  The state is a
// value; omd_step returns the advanced copy.
struct OmdState {
  ProximalSetup setup;
  VectorXd current_point;
  double gradient_bound = 0.0;  // G, dual-norm bound on the loss subgradients
  WeightScheme weights;
  StepMode step_mode = StepMode::Theoretical;
  long steps_taken = 0;
  double accumulated_squared_weights = 0.0;
  bool gradient_bound_violated = false;

  static OmdState init(ProximalSetup setup, double gradient_bound,
                       WeightScheme weights = WeightScheme::uniform_anytime(),
                       StepMode mode = StepMode::Theoretical);

  // Effective prox multiplier gamma_t * theta_t for the next step.
  double next_step_size() const;
  RegretBoundFn regret_fn() const { return {setup.set_width(), gradient_bound, weights}; }
};

// Advances the state with the loss subgradient observed at current_point.
// Under LineSearch the multiplier is chosen by minimizing
// realized_loss(prox(current, s * g)) over s in [0, 10 * gamma_theoretical]
// (the theoretical step is always a candidate, so the realized loss never
// exceeds the theoretical step's).  A dual-norm violation ||g||_* > G sets
// the gradient_bound_violated flag instead of aborting.
OmdState omd_step(const OmdState& state, const VectorXd& subgradient,
                  const std::function<double(const VectorXd&)>* realized_loss = nullptr);

// Brent scalar minimization on [lo, hi]: golden-section bracketing with
// parabolic interpolation, at most 100 function evaluations.  A non-finite
// evaluation aborts the Brent phase and falls back to golden-section on
// the last finite bracket.
struct BrentResult {
  double argmin = 0.0;
  double min_value = 0.0;
  int evaluations = 0;
};
BrentResult brent_minimize(const std::function<double(double)>& f, double lo,
                           double hi, double tol);

// One convex piece of a nominal subproblem: value and subgradient at x,
// plus a Euclidean bound on the subgradient norm.
struct ScalarFn {
  std::function<double(const VectorXd&)> value;
  std::function<VectorXd(const VectorXd&)> subgrad;
  double grad_bound = 0.0;
};

struct NominalResult {
  enum class Status { Point, Infeasible, Undecided };
  Status status = Status::Undecided;
  VectorXd x;
  double value = 0.0;           // max_i f^i at x (feasibility) / f^0 at x (optimization)
  double constraint_value = 0.0;  // max_i f^i at x
  double certified_gap = 0.0;   // provable optimality gap of `value`
  long iterations = 0;
};

// Euclidean projected-subgradient solver for  min_x max_i f^i(x)  over the
// setup's domain, with averaged iterates.  Returns
//   Point      : x with max_i f^i(x) <= F* + accuracy,
//   Infeasible : certified F* > 0 (value - certified_gap > 0),
//   Undecided  : budget exhausted before the gap closed.
NominalResult solve_nominal_minimax(const ProximalSetup& setup_x,
                                    const std::vector<ScalarFn>& constraints,
                                    double accuracy, long budget);

// Constrained variant (the nominal optimization oracle): minimizes
// `objective` subject to max_i f^i(x) <= 0 with the switching subgradient
// rule.  Productive iterates satisfy max_i f^i <= feas_accuracy; the best
// productive iterate is within obj_accuracy of the constrained optimum.
// Zero productive iterates after the required step count certifies that no
// point of the domain satisfies the constraints.
NominalResult solve_nominal_optimize(const ProximalSetup& setup_x,
                                     const std::vector<ScalarFn>& constraints,
                                     const ScalarFn& objective, double feas_accuracy,
                                     double obj_accuracy, long budget);

}  // namespace rofo
