#pragma once

#include <cstdint>
#include <vector>

#include "rofo/framework.hpp"
#include "rofo/robust_qp.hpp"

namespace rofo {

// Factor-model instance generation for the robust portfolio problem
//   min_{x in simplex}  max_{V in V-set} ||Vx||^2 + x^T D x - lambda min_{mu in M} mu^T x
// with box uncertainty for mu and a ball-parameterized set for V.

struct PortfolioParams {
  Eigen::Index n = 100;   // assets
  Eigen::Index m = 5;     // factors
  Eigen::Index p = 90;    // return samples
  double alpha = 0.95;    // confidence level of the uncertainty sets
  double lambda = 1.0;    // risk-return trade-off
  std::uint64_t seed = 0;
  // Second degree-of-freedom of the F critical values; 0 means p - m.
  Eigen::Index second_df = 0;

  Eigen::Index K() const { return std::min<Eigen::Index>(2 * m, 15); }
};

struct PortfolioInstance {
  VectorXd mu0;                 // regression estimate of the mean returns
  VectorXd gamma;               // box half-widths for mu
  MatrixXd V0;                  // m x n nominal factor loading (F^{1/2} V-bar)
  std::vector<MatrixXd> P;      // K scaled perturbation directions, m x n
  VectorXd D_diag;              // idiosyncratic variances (diagonal of D)
  double lambda = 0.0;

  // Generation diagnostics.
  VectorXd s2;                  // per-asset scaled sum of squared errors
  double nu = 0.0;              // top-left entry of the regression Gram inverse
  double c1 = 0.0, cm = 0.0;    // F critical values used for the scalings
  int regenerations = 0;        // factor redraws due to singular regressions

  Eigen::Index n() const { return mu0.size(); }
  Eigen::Index m() const { return V0.rows(); }
  Eigen::Index K() const { return static_cast<Eigen::Index>(P.size()); }
  // Per-asset cap sqrt(m c_m(alpha) s_i^2) on the column deviation of V.
  VectorXd column_deviation_cap() const;
};

// Runs the sampling + regression recipe; deterministic given params.seed.
PortfolioInstance generate_instance(const PortfolioParams& params);

// alpha-critical value of the F(J1, J2) distribution (upper tail:
// CDF(result) = alpha), by inverting the regularized incomplete beta
// function.
double f_critical_value(Eigen::Index j1, Eigen::Index j2, double alpha);

// Assembles the robust optimization problem:
//   X = simplex(n); the mu-box minimum folds to the linear term
//   (mu0 - gamma)^T x exactly (x >= 0 on the simplex); the robust part is
//   a single quadratic constraint with A = [V0; sqrt(D)] so that
//   ||A x||^2 = ||V0 x||^2 + x^T D x, wrapped as the epigraph of the
//   objective (level enters the constraint offset).
RobustInstance build_robust_instance(const PortfolioInstance& pi);

// The assembled epigraph constraint alone (level 0), for serialization.
RobustQpConstraint build_epigraph_constraint(const PortfolioInstance& pi);

// Exact robust objective value at x, via the trust-region pessimizer.
double robust_objective(const PortfolioInstance& pi, const VectorXd& x);

// The epigraph feasibility instance in benchmark form: the constraint is
// divided by its analytic gradient bound (first-order runs then see O(1)
// constants) and the level is placed so the uniform portfolio sits at
// exactly -margin.  Both transforms preserve the set
// {x : robust objective(x) <= level}.  Deterministic given params.seed.
struct BenchmarkInstance {
  RobustQpConstraint constraint;
  Eigen::Index n = 0;
  Eigen::Index K = 0;
  double scale = 1.0;              // divided-out gradient bound
  double level = 0.0;              // baked constraint offset
  double value_at_uniform = 0.0;   // scaled robust value before the level shift
  double lambda = 0.0;
};
BenchmarkInstance make_benchmark_instance(const PortfolioParams& params, double margin);

}  // namespace rofo
