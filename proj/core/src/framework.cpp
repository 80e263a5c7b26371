#include "rofo/framework.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace rofo {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void check_instance(const RobustInstance& instance) {
  if (instance.constraints.empty()) {
    throw std::invalid_argument("robust instance needs at least one constraint");
  }
}

double require_finite(double v, const char* what) {
  if (!std::isfinite(v)) {
    throw std::runtime_error(std::string(what) + ": evaluation produced a non-finite value");
  }
  return v;
}

double fixed_tau(const RunConfig& config) {
  // Oracle strategies treat tau as a fixed constant in (0,1); the adaptive
  // Remark-style policy only applies to the OFO certificate.
  const double tau = config.tau_policy.kind == TauPolicy::Kind::Fixed
                         ? config.tau_policy.fixed_value
                         : 0.5;
  if (!(tau > 0.0 && tau < 1.0)) {
    throw std::invalid_argument("tau must lie in (0,1)");
  }
  return tau;
}

// Running weighted-average bookkeeping (uniform weights over the prefix).
struct Averages {
  std::vector<double> sums;
  long t = 0;

  explicit Averages(std::size_t m) : sums(m, 0.0) {}

  void add(const std::vector<double>& values) {
    ++t;
    for (std::size_t i = 0; i < sums.size(); ++i) sums[i] += values[i];
  }
  double avg(std::size_t i) const {
    return t == 0 ? 0.0 : sums[i] / static_cast<double>(t);
  }
  double vartheta() const {
    double v = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < sums.size(); ++i) v = std::max(v, avg(i));
    return v;
  }
  VectorXd avg_vector() const {
    VectorXd v(static_cast<Eigen::Index>(sums.size()));
    for (std::size_t i = 0; i < sums.size(); ++i)
      v[static_cast<Eigen::Index>(i)] = avg(i);
    return v;
  }
};

struct RunningMean {
  VectorXd mean;
  long n = 0;

  void add(const VectorXd& x) {
    if (n == 0) {
      mean = x;
    } else {
      mean += (x - mean) / static_cast<double>(n + 1);
    }
    ++n;
  }
};

void push_trace(const RunConfig& config, SolveOutcome& out, long t, const Averages& acc,
                double kappa_circ, double kappa_bullet, double tau,
                Clock::time_point it0) {
  if (!config.record_trace) return;
  TraceRecord rec;
  rec.iteration = t;
  rec.per_constraint_avg = acc.avg_vector();
  rec.vartheta = acc.vartheta();
  rec.kappa_circ = kappa_circ;
  rec.kappa_bullet = kappa_bullet;
  rec.tau = tau;
  rec.wall_ms = 1e3 * seconds_since(it0);
  out.trace.push_back(std::move(rec));
}

void note_grad_warning(SolveOutcome& out, bool& already, long t, const char* player) {
  if (already) return;
  already = true;
  out.warnings.push_back(std::string("gradient bound exceeded by ") + player +
                         " at iteration " + std::to_string(t) + "; regret guarantee void");
}

double max_grad_x_bound(const RobustInstance& instance) {
  double g = 0.0;
  for (const auto& c : instance.constraints) g = std::max(g, c.grad_x_bound);
  return g;
}

std::vector<ScalarFn> nominal_fns(const RobustInstance& instance,
                                  const std::vector<VectorXd>& u) {
  std::vector<ScalarFn> fns;
  fns.reserve(instance.constraints.size());
  for (std::size_t i = 0; i < instance.constraints.size(); ++i) {
    const RobustConstraint* c = &instance.constraints[i];
    const VectorXd ui = u[i];
    fns.push_back(ScalarFn{
        [c, ui](const VectorXd& x) { return c->eval(x, ui); },
        [c, ui](const VectorXd& x) { return c->grad_x(x, ui); },
        c->grad_x_bound,
    });
  }
  return fns;
}

void require_pessimizers(const RobustInstance& instance, const char* who) {
  for (const auto& c : instance.constraints) {
    if (!c.has_pessimizer()) {
      throw std::invalid_argument(std::string(who) +
                                  ": every constraint needs a pessimization oracle");
    }
  }
}

PessimizeResult call_pessimizer(const RobustConstraint& c, const VectorXd& x, double tol) {
  PessimizeResult res = c.pessimize(x, tol);
  const double attained = require_finite(c.eval(x, res.u), "pessimizer");
  const double scale = std::max({1.0, std::abs(res.value), std::abs(attained)});
  // The reported value must be attained by the returned noise.
  if (res.value > attained + 1e-7 * scale) {
    throw std::runtime_error("pessimization oracle reported a value above f(x, u*)");
  }
  res.value = attained;
  return res;
}

std::vector<double> eval_all(const RobustInstance& instance, const VectorXd& x,
                             const std::vector<VectorXd>& u) {
  std::vector<double> values(instance.constraints.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    values[i] = require_finite(instance.constraints[i].eval(x, u[i]), "f^i");
  }
  return values;
}

std::size_t argmax_lowest(const std::vector<double>& values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

}  // namespace

SolveOutcome run_ofo(const RobustInstance& instance, const RunConfig& config) {
  check_instance(instance);
  if (!(config.epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  const auto t0 = Clock::now();
  const std::size_t m = instance.constraints.size();
  const double eps = config.epsilon;

  std::vector<OmdState> u_state;
  u_state.reserve(m);
  for (const auto& c : instance.constraints) {
    u_state.push_back(
        OmdState::init(c.u_setup, c.grad_u_bound, config.weights, config.step_mode));
  }
  OmdState x_state = OmdState::init(instance.x_setup, max_grad_x_bound(instance),
                                    config.weights, config.step_mode);

  std::vector<RegretBoundFn> r_u;
  r_u.reserve(m);
  for (const auto& s : u_state) r_u.push_back(s.regret_fn());
  const RegretBoundFn r_x = x_state.regret_fn();

  const bool anytime = config.weights.kind == WeightScheme::Kind::UniformAnytime;
  const long horizon = anytime ? config.max_iterations
                               : std::min(config.weights.horizon, config.max_iterations);

  SolveOutcome out;
  Averages acc(m);
  RunningMean xbar;
  std::vector<VectorXd> u(m);
  std::vector<double> values(m, 0.0);
  std::size_t prev_argmax = 0;
  bool warn_u = false, warn_x = false;

  for (long t = 1; t <= horizon; ++t) {
    const auto it0 = Clock::now();

    if (t == 1) {
      for (std::size_t i = 0; i < m; ++i) u[i] = u_state[i].current_point;
    } else {
      // Non-anticipatory simultaneous updates: both players observe only
      // (x_{t-1}, u_{t-1}).  `values`/`prev_argmax` still describe that pair.
      const VectorXd x_prev = x_state.current_point;
      const std::vector<VectorXd> u_prev = u;

      const RobustConstraint& ca = instance.constraints[prev_argmax];
      const VectorXd gx = ca.grad_x(x_prev, u_prev[prev_argmax]);
      if (!gx.allFinite()) throw std::runtime_error("run_ofo: non-finite solution gradient");
      if (config.step_mode == StepMode::LineSearch) {
        const std::function<double(const VectorXd&)> phi_loss =
            [&instance, &u_prev](const VectorXd& w) {
              double v = -std::numeric_limits<double>::infinity();
              for (std::size_t i = 0; i < instance.constraints.size(); ++i) {
                v = std::max(v, instance.constraints[i].eval(w, u_prev[i]));
              }
              return v;
            };
        x_state = omd_step(x_state, gx, &phi_loss);
      } else {
        x_state = omd_step(x_state, gx);
      }
      if (x_state.gradient_bound_violated) note_grad_warning(out, warn_x, t, "the solution player");

      for (std::size_t i = 0; i < m; ++i) {
        const RobustConstraint& c = instance.constraints[i];
        const VectorXd gu = -c.grad_u(x_prev, u_prev[i]);
        if (!gu.allFinite()) throw std::runtime_error("run_ofo: non-finite noise gradient");
        if (config.step_mode == StepMode::LineSearch) {
          const std::function<double(const VectorXd&)> noise_loss =
              [&c, &x_prev](const VectorXd& w) { return -c.eval(x_prev, w); };
          u_state[i] = omd_step(u_state[i], gu, &noise_loss);
        } else {
          u_state[i] = omd_step(u_state[i], gu);
        }
        if (u_state[i].gradient_bound_violated) note_grad_warning(out, warn_u, t, "a noise player");
        u[i] = u_state[i].current_point;
      }
    }

    const VectorXd& x = x_state.current_point;
    values = eval_all(instance, x, u);
    prev_argmax = argmax_lowest(values);
    acc.add(values);
    xbar.add(x);

    double r_u_t = 0.0;
    for (std::size_t i = 0; i < m; ++i) r_u_t = std::max(r_u_t, r_u[i](t));
    const double r_x_t = r_x(t);
    const double kappa_circ = r_u_t / eps;
    const double kappa_bullet = r_x_t / eps;

    double tau = config.tau_policy.kind == TauPolicy::Kind::Fixed
                     ? config.tau_policy.fixed_value
                     : std::max(0.0, 1.0 - kappa_bullet);
    const bool check_now = anytime || t == horizon;
    if (check_now && kappa_circ + kappa_bullet <= 1.0) {
      bool tau_valid = true;
      if (config.tau_policy.kind == TauPolicy::Kind::Fixed) {
        tau_valid = kappa_circ <= tau && tau <= 1.0 - kappa_bullet;
      }
      if (tau_valid) {
        const double vartheta = acc.vartheta();
        const double threshold = (1.0 - tau) * eps;
        out.iterations = t;
        push_trace(config, out, t, acc, kappa_circ, kappa_bullet, tau, it0);
        out.total_seconds = seconds_since(t0);
        out.x_bar = xbar.mean;
        if (vartheta > threshold) {
          out.verdict = Verdict::Infeasible;
          out.infeasible_at = t;
          out.infeasible_vartheta = vartheta;
          out.infeasible_threshold = threshold;
        } else {
          out.verdict = Verdict::Feasible;
          out.certified_bound = vartheta + r_u_t;
        }
        return out;
      }
    }
    push_trace(config, out, t, acc, kappa_circ, kappa_bullet, tau, it0);
  }

  out.verdict = Verdict::Undecided;
  out.iterations = horizon;
  out.x_bar = xbar.n > 0 ? xbar.mean : initial_point(instance.x_setup);
  out.certified_bound =
      acc.t > 0 ? acc.vartheta() : std::numeric_limits<double>::quiet_NaN();
  out.total_seconds = seconds_since(t0);
  return out;
}

SolveOutcome run_fo_pessimization(const RobustInstance& instance, const RunConfig& config) {
  check_instance(instance);
  if (!(config.epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  require_pessimizers(instance, "run_fo_pessimization");
  const auto t0 = Clock::now();
  const std::size_t m = instance.constraints.size();
  const double eps = config.epsilon;
  const double tau = fixed_tau(config);
  const double threshold = (1.0 - tau) * eps;

  OmdState x_state = OmdState::init(instance.x_setup, max_grad_x_bound(instance),
                                    config.weights, config.step_mode);
  const RegretBoundFn r_x = x_state.regret_fn();

  const bool anytime = config.weights.kind == WeightScheme::Kind::UniformAnytime;
  const long horizon = anytime ? config.max_iterations
                               : std::min(config.weights.horizon, config.max_iterations);

  SolveOutcome out;
  Averages acc(m);
  RunningMean xbar;
  std::vector<VectorXd> u(m);
  std::vector<double> values(m, 0.0);
  std::size_t prev_argmax = 0;
  bool warn_x = false;

  for (long t = 1; t <= horizon; ++t) {
    const auto it0 = Clock::now();

    if (t > 1) {
      const VectorXd x_prev = x_state.current_point;
      const std::vector<VectorXd> u_prev = u;
      const RobustConstraint& ca = instance.constraints[prev_argmax];
      const VectorXd gx = ca.grad_x(x_prev, u_prev[prev_argmax]);
      if (!gx.allFinite()) {
        throw std::runtime_error("run_fo_pessimization: non-finite solution gradient");
      }
      if (config.step_mode == StepMode::LineSearch) {
        const std::function<double(const VectorXd&)> phi_loss =
            [&instance, &u_prev](const VectorXd& w) {
              double v = -std::numeric_limits<double>::infinity();
              for (std::size_t i = 0; i < instance.constraints.size(); ++i) {
                v = std::max(v, instance.constraints[i].eval(w, u_prev[i]));
              }
              return v;
            };
        x_state = omd_step(x_state, gx, &phi_loss);
      } else {
        x_state = omd_step(x_state, gx);
      }
      if (x_state.gradient_bound_violated) note_grad_warning(out, warn_x, t, "the solution player");
    }
    const VectorXd& x = x_state.current_point;

    // Noises from the pessimization oracles, computed with knowledge of x_t.
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i) {
      const PessimizeResult res = call_pessimizer(instance.constraints[i], x, tau * eps);
      u[i] = res.u;
      values[i] = res.value;
      worst = std::max(worst, res.value);
    }
    prev_argmax = argmax_lowest(values);
    acc.add(values);
    xbar.add(x);

    const double r_x_t = r_x(t);
    const double kappa_bullet = r_x_t / eps;
    const bool bullet_ok = (anytime || t == horizon) && r_x_t <= threshold;

    // Pointwise exit: the oracle makes these values tau*eps-close to the
    // robust sup, so x_t itself certifies.
    if (worst <= threshold) {
      out.verdict = Verdict::Feasible;
      out.x_bar = x;
      out.certified_bound = worst + tau * eps;
      out.iterations = t;
      push_trace(config, out, t, acc, tau, kappa_bullet, tau, it0);
      out.total_seconds = seconds_since(t0);
      return out;
    }

    const double vartheta = acc.vartheta();
    if (vartheta <= threshold) {
      // Averaged certificate: eps-circ <= tau*eps holds for any t.
      out.verdict = Verdict::Feasible;
      out.x_bar = xbar.mean;
      out.certified_bound = vartheta + tau * eps;
      out.iterations = t;
      push_trace(config, out, t, acc, tau, kappa_bullet, tau, it0);
      out.total_seconds = seconds_since(t0);
      return out;
    }
    if (bullet_ok) {
      out.verdict = Verdict::Infeasible;
      out.infeasible_at = t;
      out.infeasible_vartheta = vartheta;
      out.infeasible_threshold = threshold;
      out.x_bar = xbar.mean;
      out.iterations = t;
      push_trace(config, out, t, acc, tau, kappa_bullet, tau, it0);
      out.total_seconds = seconds_since(t0);
      return out;
    }
    push_trace(config, out, t, acc, tau, kappa_bullet, tau, it0);
  }

  out.verdict = Verdict::Undecided;
  out.iterations = horizon;
  out.x_bar = xbar.n > 0 ? xbar.mean : initial_point(instance.x_setup);
  out.certified_bound = acc.t > 0 ? acc.vartheta() : std::numeric_limits<double>::quiet_NaN();
  out.total_seconds = seconds_since(t0);
  return out;
}

SolveOutcome run_nominal_oracle(const RobustInstance& instance, const RunConfig& config,
                                NominalMode mode) {
  check_instance(instance);
  if (!(config.epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  if (mode == NominalMode::Optimization && !instance.objective.has_value()) {
    throw std::invalid_argument("run_nominal_oracle: optimization mode needs an objective");
  }
  const auto t0 = Clock::now();
  const std::size_t m = instance.constraints.size();
  const double eps = config.epsilon;
  const double tau = fixed_tau(config);
  const double nominal_accuracy = (1.0 - tau) * eps;

  std::vector<OmdState> u_state;
  u_state.reserve(m);
  for (const auto& c : instance.constraints) {
    u_state.push_back(
        OmdState::init(c.u_setup, c.grad_u_bound, config.weights, config.step_mode));
  }
  std::vector<RegretBoundFn> r_u;
  r_u.reserve(m);
  for (const auto& s : u_state) r_u.push_back(s.regret_fn());

  bool all_pessimizers = true;
  for (const auto& c : instance.constraints) all_pessimizers &= c.has_pessimizer();

  const bool anytime = config.weights.kind == WeightScheme::Kind::UniformAnytime;
  const long horizon = anytime ? config.max_iterations
                               : std::min(config.weights.horizon, config.max_iterations);

  SolveOutcome out;
  Averages acc(m);
  RunningMean xbar;
  double obj_sum = 0.0;
  std::vector<VectorXd> u(m);
  VectorXd x_prev;
  bool warn_u = false;

  for (long t = 1; t <= horizon; ++t) {
    const auto it0 = Clock::now();

    if (t == 1) {
      for (std::size_t i = 0; i < m; ++i) u[i] = u_state[i].current_point;
    } else {
      // Noise updates are non-anticipatory (driven by x_{t-1} only).
      for (std::size_t i = 0; i < m; ++i) {
        const RobustConstraint& c = instance.constraints[i];
        const VectorXd gu = -c.grad_u(x_prev, u[i]);
        if (!gu.allFinite()) {
          throw std::runtime_error("run_nominal_oracle: non-finite noise gradient");
        }
        if (config.step_mode == StepMode::LineSearch) {
          const VectorXd xp = x_prev;
          const std::function<double(const VectorXd&)> noise_loss =
              [&c, xp](const VectorXd& w) { return -c.eval(xp, w); };
          u_state[i] = omd_step(u_state[i], gu, &noise_loss);
        } else {
          u_state[i] = omd_step(u_state[i], gu);
        }
        if (u_state[i].gradient_bound_violated) note_grad_warning(out, warn_u, t, "a noise player");
        u[i] = u_state[i].current_point;
      }
    }

    double r_u_t = 0.0;
    for (std::size_t i = 0; i < m; ++i) r_u_t = std::max(r_u_t, r_u[i](t));
    const double kappa_circ = r_u_t / eps;
    // The oracle holds the solution player's term at (1-tau)*eps by
    // construction, so that is the meaningful kappa-bullet to report.
    const double kappa_bullet = 1.0 - tau;

    // The nominal oracle is computed with knowledge of u_t.
    const std::vector<ScalarFn> fns = nominal_fns(instance, u);
    NominalResult nom;
    if (mode == NominalMode::Optimization) {
      const ConvexObjective& obj = *instance.objective;
      nom = solve_nominal_optimize(instance.x_setup, fns,
                                   ScalarFn{obj.value, obj.subgrad, obj.grad_bound},
                                   nominal_accuracy, eps, config.nominal_budget);
    } else {
      nom = solve_nominal_minimax(instance.x_setup, fns, nominal_accuracy,
                                  config.nominal_budget);
    }
    if (nom.status == NominalResult::Status::Infeasible) {
      out.verdict = Verdict::Infeasible;
      out.infeasible_at = t;
      out.infeasible_vartheta = nom.constraint_value;
      out.infeasible_threshold = 0.0;
      out.iterations = t;
      out.x_bar = nom.x;
      push_trace(config, out, t, acc, kappa_circ, kappa_bullet, tau, it0);
      out.total_seconds = seconds_since(t0);
      return out;
    }
    if (nom.status == NominalResult::Status::Undecided) {
      out.verdict = Verdict::Undecided;
      out.iterations = t;
      out.x_bar = nom.x;
      out.warnings.push_back("nominal subproblem undecided at its budget");
      push_trace(config, out, t, acc, kappa_circ, kappa_bullet, tau, it0);
      out.total_seconds = seconds_since(t0);
      return out;
    }
    const VectorXd x = nom.x;
    x_prev = x;

    const std::vector<double> values = eval_all(instance, x, u);
    acc.add(values);
    xbar.add(x);
    if (instance.objective) obj_sum += instance.objective->value(x);

    // Robust check of the oracle's point: with exact pessimizers this can
    // certify long before the noise players' regret bound closes.
    if (all_pessimizers) {
      double worst = -std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < m; ++i) {
        worst = std::max(worst, call_pessimizer(instance.constraints[i], x, tau * eps).value);
      }
      if (worst <= (1.0 - tau) * eps) {
        out.verdict = Verdict::Feasible;
        out.x_bar = x;
        out.certified_bound = worst + tau * eps;
        out.iterations = t;
        if (instance.objective) {
          // x is robust feasible, so Opt_t <= Opt and the oracle's
          // optimality certificate transfers to x itself.
          out.objective_value = instance.objective->value(x);
        }
        push_trace(config, out, t, acc, kappa_circ, kappa_bullet, tau, it0);
        out.total_seconds = seconds_since(t0);
        return out;
      }
    }

    // Theorem-style exit once the noise regret is below tau*eps.
    if ((anytime || t == horizon) && r_u_t <= tau * eps) {
      out.verdict = Verdict::Feasible;
      out.x_bar = xbar.mean;
      out.certified_bound = acc.vartheta() + r_u_t;
      out.iterations = t;
      if (instance.objective) {
        out.objective_value = obj_sum / static_cast<double>(t);
      }
      push_trace(config, out, t, acc, kappa_circ, kappa_bullet, tau, it0);
      out.total_seconds = seconds_since(t0);
      return out;
    }
    push_trace(config, out, t, acc, kappa_circ, kappa_bullet, tau, it0);
  }

  out.verdict = Verdict::Undecided;
  out.iterations = horizon;
  out.x_bar = xbar.n > 0 ? xbar.mean : initial_point(instance.x_setup);
  out.certified_bound = acc.t > 0 ? acc.vartheta() : std::numeric_limits<double>::quiet_NaN();
  out.total_seconds = seconds_since(t0);
  return out;
}

SolveOutcome run_full_pessimization(const RobustInstance& instance, const RunConfig& config) {
  check_instance(instance);
  if (!(config.epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  require_pessimizers(instance, "run_full_pessimization");
  const auto t0 = Clock::now();
  const std::size_t m = instance.constraints.size();
  const double eps = config.epsilon;
  const double tau = fixed_tau(config);
  const double threshold = (1.0 - tau) * eps;

  SolveOutcome out;
  Averages acc(m);
  std::vector<std::vector<VectorXd>> scenarios(m);
  long total_scenarios = 0;
  for (std::size_t i = 0; i < m; ++i) {
    scenarios[i].push_back(initial_point(instance.constraints[i].u_setup));
    ++total_scenarios;
  }

  for (long t = 1; t <= config.max_iterations; ++t) {
    const auto it0 = Clock::now();

    // Extended nominal feasibility over the union of sampled scenarios.
    std::vector<ScalarFn> fns;
    fns.reserve(static_cast<std::size_t>(total_scenarios));
    for (std::size_t i = 0; i < m; ++i) {
      const RobustConstraint* c = &instance.constraints[i];
      for (const VectorXd& s : scenarios[i]) {
        const VectorXd snap = s;
        fns.push_back(ScalarFn{
            [c, snap](const VectorXd& x) { return c->eval(x, snap); },
            [c, snap](const VectorXd& x) { return c->grad_x(x, snap); },
            c->grad_x_bound,
        });
      }
    }
    const NominalResult nom =
        solve_nominal_minimax(instance.x_setup, fns, threshold, config.nominal_budget);
    if (nom.status == NominalResult::Status::Infeasible) {
      out.verdict = Verdict::Infeasible;
      out.infeasible_at = t;
      out.infeasible_vartheta = nom.constraint_value;
      out.infeasible_threshold = 0.0;
      out.iterations = t;
      out.x_bar = nom.x;
      push_trace(config, out, t, acc, tau, 1.0 - tau, tau, it0);
      out.total_seconds = seconds_since(t0);
      return out;
    }
    if (nom.status == NominalResult::Status::Undecided) {
      out.verdict = Verdict::Undecided;
      out.iterations = t;
      out.x_bar = nom.x;
      out.warnings.push_back("extended nominal subproblem undecided at its budget");
      push_trace(config, out, t, acc, tau, 1.0 - tau, tau, it0);
      out.total_seconds = seconds_since(t0);
      return out;
    }
    const VectorXd& x = nom.x;

    std::vector<double> values(m, 0.0);
    std::vector<VectorXd> worst_u(m);
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i) {
      const PessimizeResult res = call_pessimizer(instance.constraints[i], x, tau * eps);
      values[i] = res.value;
      worst_u[i] = res.u;
      worst = std::max(worst, res.value);
    }
    acc.add(values);
    push_trace(config, out, t, acc, tau, 1.0 - tau, tau, it0);

    if (worst <= threshold) {
      out.verdict = Verdict::Feasible;
      out.x_bar = x;
      out.certified_bound = worst + tau * eps;
      out.iterations = t;
      out.total_seconds = seconds_since(t0);
      return out;
    }
    for (std::size_t i = 0; i < m; ++i) {
      if (values[i] > threshold) {
        scenarios[i].push_back(worst_u[i]);
        ++total_scenarios;
      }
    }
    if (total_scenarios > config.scenario_cap) {
      out.verdict = Verdict::Undecided;
      out.iterations = t;
      out.x_bar = x;
      out.warnings.push_back("scenario cap reached");
      out.total_seconds = seconds_since(t0);
      return out;
    }
  }

  out.verdict = Verdict::Undecided;
  out.iterations = config.max_iterations;
  out.x_bar = initial_point(instance.x_setup);
  out.total_seconds = seconds_since(t0);
  return out;
}

SolveOutcome solve(const RobustInstance& instance, const RunConfig& config) {
  switch (config.strategy) {
    case Strategy::Ofo:
      return run_ofo(instance, config);
    case Strategy::FoPessimization:
      return run_fo_pessimization(instance, config);
    case Strategy::NominalOracle:
      return run_nominal_oracle(instance, config);
    case Strategy::FullPessimization:
      return run_full_pessimization(instance, config);
  }
  throw std::logic_error("solve: unknown strategy");
}

RobustInstance make_level_instance(const RobustInstance& instance, double level) {
  RobustInstance probe = instance;
  if (instance.epigraph_constraint >= 0) {
    const auto j = static_cast<std::size_t>(instance.epigraph_constraint);
    if (j >= probe.constraints.size()) {
      throw std::invalid_argument("epigraph constraint index out of range");
    }
    RobustConstraint& c = probe.constraints[j];
    const RobustConstraint base = instance.constraints[j];
    c.eval = [base, level](const VectorXd& x, const VectorXd& u) {
      return base.eval(x, u) - level;
    };
    if (base.pessimize) {
      c.pessimize = [base, level](const VectorXd& x, double tol) {
        PessimizeResult r = base.pessimize(x, tol);
        r.value -= level;
        return r;
      };
    }
    return probe;
  }
  if (!instance.objective.has_value()) {
    throw std::invalid_argument("make_level_instance: instance has no objective");
  }
  // Level constraint f^0(x) <= level with a singleton uncertainty set, so
  // prox maps on the original domains stay untouched.
  const ConvexObjective obj = *instance.objective;
  RobustConstraint level_c;
  level_c.u_setup = ProximalSetup::box(VectorXd::Zero(1), VectorXd::Zero(1));
  level_c.eval = [obj, level](const VectorXd& x, const VectorXd&) {
    return obj.value(x) - level;
  };
  level_c.grad_x = [obj](const VectorXd& x, const VectorXd&) { return obj.subgrad(x); };
  level_c.grad_u = [](const VectorXd&, const VectorXd&) { return VectorXd::Zero(1); };
  level_c.grad_x_bound = obj.grad_bound;
  level_c.grad_u_bound = 0.0;
  level_c.pessimize = [obj, level](const VectorXd& x, double) {
    return PessimizeResult{VectorXd::Zero(1), obj.value(x) - level};
  };
  probe.constraints.push_back(std::move(level_c));
  return probe;
}

BinarySearchResult binary_search_optimize(const RobustInstance& instance,
                                          const RunConfig& config, double v_lo,
                                          double v_hi, double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("binary search: delta must be positive");
  if (!(v_lo <= v_hi)) throw std::invalid_argument("binary search: invalid bracket");
  if (instance.epigraph_constraint < 0 && !instance.objective.has_value()) {
    throw std::invalid_argument("binary search: instance has no objective");
  }

  const auto objective_at = [&](const VectorXd& x) {
    if (instance.objective.has_value()) return instance.objective->value(x);
    // Epigraph form without an explicit objective: robust value of the
    // epigraph constraint at level 0.
    const auto j = static_cast<std::size_t>(instance.epigraph_constraint);
    return call_pessimizer(instance.constraints[j], x, 1e-9).value;
  };

  BinarySearchResult res;
  double lo = v_lo, hi = v_hi;
  long max_probes = 0;
  if (v_hi - v_lo > delta) {
    max_probes = static_cast<long>(std::floor(std::log2((v_hi - v_lo) / delta)));
  }

  std::optional<VectorXd> best;
  for (long k = 0; k < max_probes; ++k) {
    const double level = 0.5 * (lo + hi);
    const RobustInstance probe = make_level_instance(instance, level);
    const SolveOutcome outcome = solve(probe, config);
    ++res.feasibility_solves;
    if (outcome.verdict == Verdict::Undecided) {
      res.status = BinarySearchResult::Status::Undecided;
      res.value_lo = lo;
      res.value_hi = hi;
      if (best) {
        res.x = *best;
        res.objective = objective_at(*best);
      }
      return res;
    }
    if (outcome.verdict == Verdict::Feasible) {
      hi = level;
      best = outcome.x_bar;
    } else {
      lo = level;
    }
  }

  if (!best) {
    // Every probe was infeasible; fall back to the top of the bracket,
    // which contains Opt by assumption.
    const RobustInstance probe = make_level_instance(instance, v_hi);
    const SolveOutcome outcome = solve(probe, config);
    ++res.feasibility_solves;
    if (outcome.verdict != Verdict::Feasible) {
      res.status = BinarySearchResult::Status::NoFeasibleLevel;
      res.value_lo = lo;
      res.value_hi = hi;
      return res;
    }
    best = outcome.x_bar;
    hi = v_hi;
  }

  res.status = BinarySearchResult::Status::Optimal;
  res.x = *best;
  res.value_lo = lo;
  res.value_hi = hi;
  res.objective = objective_at(*best);
  return res;
}

double evaluate_sp_gap(const RobustInstance& instance, const VectorXd& x_bar,
                       const std::vector<VectorXd>& u_bar, double tol) {
  check_instance(instance);
  require_pessimizers(instance, "evaluate_sp_gap");
  if (u_bar.size() != instance.constraints.size()) {
    throw std::invalid_argument("evaluate_sp_gap: one noise per constraint required");
  }
  const Eigen::Index n = instance.x_setup.dimension();
  if (n > 10) {
    throw std::invalid_argument("evaluate_sp_gap: refused for x-dimension > 10");
  }

  double sup_part = -std::numeric_limits<double>::infinity();
  for (const auto& c : instance.constraints) {
    sup_part = std::max(sup_part, call_pessimizer(c, x_bar, tol).value + tol);
  }

  const auto phi = [&](const VectorXd& x) {
    double v = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < instance.constraints.size(); ++i) {
      v = std::max(v, instance.constraints[i].eval(x, u_bar[i]));
    }
    return v;
  };

  double inf_part = std::numeric_limits<double>::infinity();
  if (n <= 3) {
    // Dense grid over a covering of the domain, projected back in.
    const int steps = 60;
    VectorXd lo(n), hi(n);
    switch (instance.x_setup.kind()) {
      case ProximalSetup::Kind::EuclideanBall:
        lo = instance.x_setup.center().array() - instance.x_setup.radius();
        hi = instance.x_setup.center().array() + instance.x_setup.radius();
        break;
      case ProximalSetup::Kind::Box:
        lo = instance.x_setup.lower();
        hi = instance.x_setup.upper();
        break;
      case ProximalSetup::Kind::Simplex:
        lo = VectorXd::Zero(n);
        hi = VectorXd::Ones(n);
        break;
    }
    VectorXd x(n);
    std::vector<int> idx(static_cast<std::size_t>(n), 0);
    const long total = static_cast<long>(std::pow(steps + 1.0, static_cast<double>(n)));
    for (long flat = 0; flat < total; ++flat) {
      long rem = flat;
      for (Eigen::Index d = 0; d < n; ++d) {
        const int id = static_cast<int>(rem % (steps + 1));
        rem /= (steps + 1);
        x[d] = lo[d] + (hi[d] - lo[d]) * static_cast<double>(id) / steps;
      }
      const VectorXd p = project(instance.x_setup, x);
      inf_part = std::min(inf_part, phi(p));
    }
  }
  // Polish (and handle 3 < n <= 10) with the projected subgradient solver.
  std::vector<ScalarFn> fns = nominal_fns(instance, u_bar);
  const NominalResult nom = solve_nominal_minimax(instance.x_setup, fns, tol, 40000000);
  inf_part = std::min(inf_part, nom.value);

  return std::max(0.0, sup_part - inf_part);
}

}  // namespace rofo
