#include "rofo/oco.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace rofo {
namespace {

double dual_norm(const ProximalSetup& setup, const VectorXd& g) {
  // Entropy setup lives in l1 geometry, so the dual norm is l-infinity;
  // the Euclidean setups are self-dual.
  if (setup.kind() == ProximalSetup::Kind::Simplex) {
    return g.size() == 0 ? 0.0 : g.cwiseAbs().maxCoeff();
  }
  return g.norm();
}

double finite_or_inf(double v) {
  return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
}

}  // namespace

double RegretBoundFn::operator()(long t) const {
  if (t < 1) throw std::invalid_argument("regret_bound: t must be >= 1");
  if (gradient_bound <= 0.0) return 0.0;
  switch (scheme.kind) {
    case WeightScheme::Kind::FixedHorizon: {
      const double T = static_cast<double>(scheme.horizon);
      const double sum_sq = static_cast<double>(t) / (T * T);
      return std::sqrt(2.0 * omega * gradient_bound * gradient_bound * sum_sq);
    }
    case WeightScheme::Kind::UniformAnytime:
      return kAnytimeRegretFactor * gradient_bound *
             std::sqrt(2.0 * omega / static_cast<double>(t));
  }
  throw std::logic_error("regret_bound: unknown scheme");
}

double regret_bound(const RegretBoundFn& fn, long t) { return fn(t); }

OmdState OmdState::init(ProximalSetup setup, double gradient_bound, WeightScheme weights,
                        StepMode mode) {
  if (gradient_bound < 0.0 || !std::isfinite(gradient_bound)) {
    throw std::invalid_argument("OmdState: gradient bound must be finite and >= 0");
  }
  if (weights.kind == WeightScheme::Kind::FixedHorizon && weights.horizon < 1) {
    throw std::invalid_argument("OmdState: fixed horizon requires T >= 1");
  }
  OmdState s;
  s.current_point = initial_point(setup);
  s.setup = std::move(setup);
  s.gradient_bound = gradient_bound;
  s.weights = weights;
  s.step_mode = mode;
  return s;
}

double OmdState::next_step_size() const {
  if (gradient_bound <= 0.0) return 0.0;
  const double omega = setup.set_width();
  switch (weights.kind) {
    case WeightScheme::Kind::UniformAnytime: {
      const double t = static_cast<double>(steps_taken + 1);
      return std::sqrt(2.0 * omega) / (gradient_bound * std::sqrt(t));
    }
    case WeightScheme::Kind::FixedHorizon: {
      // gamma * theta_t with theta_t = 1/T and gamma = sqrt(2*Omega/(G^2*Sum theta^2)).
      const double T = static_cast<double>(weights.horizon);
      return std::sqrt(2.0 * omega / T) / gradient_bound;
    }
  }
  throw std::logic_error("OmdState: unknown weight scheme");
}

OmdState omd_step(const OmdState& state, const VectorXd& subgradient,
                  const std::function<double(const VectorXd&)>* realized_loss) {
  if (!subgradient.allFinite()) {
    throw std::invalid_argument("omd_step: non-finite subgradient");
  }
  OmdState next = state;
  if (state.gradient_bound > 0.0 &&
      dual_norm(state.setup, subgradient) > state.gradient_bound * (1.0 + 1e-12)) {
    // Guarantee void; recorded on the state rather than aborting.
    next.gradient_bound_violated = true;
  }

  double step = state.next_step_size();
  if (state.step_mode == StepMode::LineSearch && realized_loss != nullptr && step > 0.0) {
    const auto path_loss = [&](double s) {
      return (*realized_loss)(prox_step(state.setup, state.current_point, s * subgradient));
    };
    const BrentResult br = brent_minimize(path_loss, 0.0, 10.0 * step, 1e-6);
    // The theoretical step is inside the bracket; never do worse than it.
    if (finite_or_inf(br.min_value) <= finite_or_inf(path_loss(step))) {
      step = br.argmin;
    }
  }

  next.current_point = prox_step(state.setup, state.current_point, step * subgradient);
  next.steps_taken = state.steps_taken + 1;
  const double theta = state.weights.kind == WeightScheme::Kind::FixedHorizon
                           ? 1.0 / static_cast<double>(state.weights.horizon)
                           : 1.0;
  next.accumulated_squared_weights = state.accumulated_squared_weights + theta * theta;
  return next;
}

BrentResult brent_minimize(const std::function<double(double)>& f, double lo, double hi,
                           double tol) {
  if (!(lo < hi)) throw std::invalid_argument("brent_minimize: requires lo < hi");
  if (!(tol > 0.0)) throw std::invalid_argument("brent_minimize: tol must be positive");
  constexpr int kMaxEvals = 100;
  constexpr double kCGold = 0.3819660112501051;  // 2 - golden ratio

  int evals = 0;
  bool saw_nonfinite = false;
  const auto eval = [&](double s) {
    ++evals;
    const double v = f(s);
    if (!std::isfinite(v)) {
      saw_nonfinite = true;
      return std::numeric_limits<double>::infinity();
    }
    return v;
  };

  double a = lo, b = hi;
  double x = a + kCGold * (b - a);
  double w = x, v = x;
  double fx = eval(x), fw = fx, fv = fx;
  double d = 0.0, e = 0.0;

  while (evals < kMaxEvals) {
    const double xm = 0.5 * (a + b);
    const double tol1 = tol;
    const double tol2 = 2.0 * tol1;
    if (std::abs(x - xm) <= tol2 - 0.5 * (b - a)) break;

    bool use_golden = true;
    if (!saw_nonfinite && std::abs(e) > tol1) {
      // Parabola through (v,fv),(w,fw),(x,fx).
      const double r = (x - w) * (fx - fv);
      double q = (x - v) * (fx - fw);
      double p = (x - v) * q - (x - w) * r;
      q = 2.0 * (q - r);
      if (q > 0.0) p = -p;
      q = std::abs(q);
      const double etemp = e;
      e = d;
      if (std::abs(p) < std::abs(0.5 * q * etemp) && p > q * (a - x) && p < q * (b - x)) {
        d = p / q;
        const double u = x + d;
        if (u - a < tol2 || b - u < tol2) d = (xm >= x ? tol1 : -tol1);
        use_golden = false;
      }
    }
    if (use_golden) {
      e = (x >= xm) ? a - x : b - x;
      d = kCGold * e;
    }
    const double u = (std::abs(d) >= tol1) ? x + d : x + (d >= 0.0 ? tol1 : -tol1);
    const double fu = eval(u);
    if (fu <= fx) {
      if (u >= x) a = x; else b = x;
      v = w; fv = fw;
      w = x; fw = fx;
      x = u; fx = fu;
    } else {
      if (u < x) a = u; else b = u;
      if (fu <= fw || w == x) {
        v = w; fv = fw;
        w = u; fw = fu;
      } else if (fu <= fv || v == x || v == w) {
        v = u; fv = fu;
      }
    }
  }

  BrentResult out;
  out.argmin = x;
  out.min_value = fx;
  out.evaluations = evals;
  return out;
}

namespace {

struct MaxEval {
  double value;
  Eigen::Index argmax;
};

MaxEval eval_max(const std::vector<ScalarFn>& fns, const VectorXd& x) {
  MaxEval out{-std::numeric_limits<double>::infinity(), 0};
  for (std::size_t i = 0; i < fns.size(); ++i) {
    const double v = fns[i].value(x);
    if (!std::isfinite(v)) {
      throw std::runtime_error("nominal solver: constraint evaluated to non-finite value");
    }
    if (v > out.value) {
      out.value = v;
      out.argmax = static_cast<Eigen::Index>(i);
    }
  }
  return out;
}

double max_grad_bound(const std::vector<ScalarFn>& fns) {
  double g = 0.0;
  for (const auto& f : fns) g = std::max(g, f.grad_bound);
  return g;
}

}  // namespace

NominalResult solve_nominal_minimax(const ProximalSetup& setup_x,
                                    const std::vector<ScalarFn>& constraints,
                                    double accuracy, long budget) {
  if (constraints.empty()) {
    throw std::invalid_argument("solve_nominal_minimax: needs at least one function");
  }
  if (!(accuracy > 0.0)) {
    throw std::invalid_argument("solve_nominal_minimax: accuracy must be positive");
  }
  const double r = setup_x.euclidean_radius();
  const double g_bound = max_grad_bound(constraints);

  NominalResult out;
  VectorXd x = initial_point(setup_x);

  if (r * g_bound <= 0.0) {
    // Constant pointwise max over the domain: the initial point is optimal.
    const MaxEval m0 = eval_max(constraints, x);
    out.x = x;
    out.value = out.constraint_value = m0.value;
    out.certified_gap = 0.0;
    out.status = m0.value > 0.0 ? NominalResult::Status::Infeasible
                                : NominalResult::Status::Point;
    return out;
  }

  const double needed = r * g_bound / accuracy;
  const long ideal = static_cast<long>(std::ceil(needed * needed));
  const long n = std::max<long>(1, std::min(ideal, budget));
  const double gamma = r / (g_bound * std::sqrt(static_cast<double>(n)));

  VectorXd xbar = VectorXd::Zero(x.size());
  VectorXd xbest = x;
  double fbest = std::numeric_limits<double>::infinity();

  for (long j = 0; j < n; ++j) {
    const MaxEval m = eval_max(constraints, x);
    if (m.value < fbest) {
      fbest = m.value;
      xbest = x;
    }
    xbar += (x - xbar) / static_cast<double>(j + 1);
    const VectorXd grad = constraints[static_cast<std::size_t>(m.argmax)].subgrad(x);
    x = project(setup_x, x - gamma * grad);
  }

  const double gap = r * g_bound / std::sqrt(static_cast<double>(n));
  const double favg = eval_max(constraints, xbar).value;

  out.iterations = n;
  out.certified_gap = gap;
  if (favg - gap > 0.0) {
    out.status = NominalResult::Status::Infeasible;
    out.x = xbar;
    out.value = out.constraint_value = favg;
    return out;
  }
  // Return the better of the averaged and best-seen iterate; the averaged
  // one carries the F* + gap guarantee, so the minimum does too.
  if (favg <= fbest) {
    out.x = xbar;
    out.value = out.constraint_value = favg;
  } else {
    out.x = xbest;
    out.value = out.constraint_value = fbest;
  }
  if (n == ideal || out.value <= accuracy) {
    out.status = NominalResult::Status::Point;
  } else {
    out.status = NominalResult::Status::Undecided;
  }
  return out;
}

NominalResult solve_nominal_optimize(const ProximalSetup& setup_x,
                                     const std::vector<ScalarFn>& constraints,
                                     const ScalarFn& objective, double feas_accuracy,
                                     double obj_accuracy, long budget) {
  if (!(feas_accuracy > 0.0) || !(obj_accuracy > 0.0)) {
    throw std::invalid_argument("solve_nominal_optimize: accuracies must be positive");
  }
  const double r = setup_x.euclidean_radius();
  const double g_bound = std::max(objective.grad_bound,
                                  constraints.empty() ? 0.0 : max_grad_bound(constraints));
  VectorXd x = initial_point(setup_x);

  NominalResult out;
  if (r * g_bound <= 0.0) {
    const double c = constraints.empty() ? 0.0 : eval_max(constraints, x).value;
    out.x = x;
    out.value = objective.value(x);
    out.constraint_value = c;
    out.status = c > 0.0 ? NominalResult::Status::Infeasible : NominalResult::Status::Point;
    return out;
  }

  const double a = std::min(feas_accuracy, obj_accuracy);
  const double needed = r * g_bound / a;
  const long ideal = static_cast<long>(std::ceil(needed * needed)) + 1;
  const long n = std::max<long>(1, std::min(ideal, budget));
  const double gamma = a / (g_bound * g_bound);

  bool have_productive = false;
  VectorXd xbest;
  double obj_best = std::numeric_limits<double>::infinity();
  double cons_best = 0.0;

  for (long j = 0; j < n; ++j) {
    const MaxEval m = constraints.empty()
                          ? MaxEval{-std::numeric_limits<double>::infinity(), 0}
                          : eval_max(constraints, x);
    VectorXd grad;
    if (m.value <= feas_accuracy) {
      const double obj = objective.value(x);
      if (!have_productive || obj < obj_best) {
        have_productive = true;
        obj_best = obj;
        cons_best = m.value;
        xbest = x;
      }
      grad = objective.subgrad(x);
    } else {
      grad = constraints[static_cast<std::size_t>(m.argmax)].subgrad(x);
    }
    x = project(setup_x, x - gamma * grad);
  }

  out.iterations = n;
  out.certified_gap = obj_accuracy;
  if (!have_productive) {
    // Every step was a constraint step; with n past the counting bound this
    // is only possible when no feasible comparator exists.
    out.status = n >= ideal ? NominalResult::Status::Infeasible
                            : NominalResult::Status::Undecided;
    out.x = x;
    out.constraint_value = constraints.empty() ? 0.0 : eval_max(constraints, x).value;
    out.value = out.constraint_value;
    return out;
  }
  out.x = xbest;
  out.value = obj_best;
  out.constraint_value = cons_best;
  out.status = n >= ideal ? NominalResult::Status::Point : NominalResult::Status::Undecided;
  return out;
}

}  // namespace rofo
