#include "rofo/portfolio.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <boost/math/distributions/fisher_f.hpp>

#include "rofo/eigen_sym.hpp"
#include "rofo/rng.hpp"

namespace rofo {
namespace {

void validate(const PortfolioParams& params) {
  if (params.m < 1) throw std::invalid_argument("portfolio: m must be >= 1");
  if (params.n < 1) throw std::invalid_argument("portfolio: n must be >= 1");
  if (params.p < params.m + 2) {
    throw std::invalid_argument("portfolio: needs p >= m + 2 samples");
  }
  if (!(params.alpha > 0.0 && params.alpha < 1.0)) {
    throw std::invalid_argument("portfolio: alpha must lie in (0,1)");
  }
  if (params.lambda < 0.0) throw std::invalid_argument("portfolio: lambda must be >= 0");
}

MatrixXd matrix_sqrt_psd(const MatrixXd& m) {
  const SymmetricEigen e = jacobi_eigen(m);
  const Eigen::VectorXd roots = e.values.cwiseMax(0.0).cwiseSqrt();
  return e.vectors * roots.asDiagonal() * e.vectors.transpose();
}

}  // namespace

double f_critical_value(Eigen::Index j1, Eigen::Index j2, double alpha) {
  if (j1 < 1 || j2 < 1) throw std::invalid_argument("f_critical_value: df must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("f_critical_value: alpha must lie in (0,1)");
  }
  const boost::math::fisher_f dist(static_cast<double>(j1), static_cast<double>(j2));
  return boost::math::quantile(dist, alpha);
}

VectorXd PortfolioInstance::column_deviation_cap() const {
  const double mm = static_cast<double>(m());
  return (mm * cm * s2.array()).sqrt().matrix();
}

PortfolioInstance generate_instance(const PortfolioParams& params) {
  validate(params);
  const Eigen::Index n = params.n, m = params.m, p = params.p;
  const Eigen::Index K = params.K();
  Rng root(params.seed);

  const MatrixXd V = root.stream("portfolio/V").normal_matrix(m, n);
  MatrixXd F;
  {
    const MatrixXd G = root.stream("portfolio/F").normal_matrix(m, m);
    F = G * G.transpose() / static_cast<double>(m);
  }
  const MatrixXd F_half = matrix_sqrt_psd(F);
  const VectorXd D_diag = 0.1 * (V.transpose() * F * V).diagonal();
  const VectorXd mu = root.stream("portfolio/mu").uniform_vector(n, 1.0, 5.0);

  PortfolioInstance out;
  out.lambda = params.lambda;

  // Factor samples, returns, and the per-asset regressions.  A numerically
  // singular Gram matrix triggers a redraw from the next substream.
  MatrixXd factors(m, p);
  MatrixXd returns(n, p);
  MatrixXd gram_inv;
  MatrixXd design(p, m + 1);
  int attempt = 0;
  for (;; ++attempt) {
    if (attempt >= 16) {
      throw std::runtime_error("portfolio: regression stayed singular after 16 redraws");
    }
    Rng f_rng = root.stream("portfolio/factors").stream(static_cast<std::uint64_t>(attempt));
    Rng e_rng = root.stream("portfolio/noise").stream(static_cast<std::uint64_t>(attempt));
    for (Eigen::Index l = 0; l < p; ++l) {
      factors.col(l) = F_half * f_rng.normal_vector(m);
    }
    for (Eigen::Index l = 0; l < p; ++l) {
      VectorXd eps(n);
      for (Eigen::Index i = 0; i < n; ++i) eps[i] = std::sqrt(D_diag[i]) * e_rng.normal();
      returns.col(l) = mu + V.transpose() * factors.col(l) + eps;
    }
    design.col(0).setOnes();
    design.rightCols(m) = factors.transpose();
    const MatrixXd gram = design.transpose() * design;
    Eigen::FullPivLU<MatrixXd> lu(gram);
    lu.setThreshold(1e-10);
    if (lu.isInvertible()) {
      gram_inv = lu.inverse();
      break;
    }
  }
  out.regenerations = attempt;
  out.nu = gram_inv(0, 0);

  // Least squares per asset: returns_i ~ intercept + factor loadings.
  const MatrixXd coef = gram_inv * design.transpose() * returns.transpose();  // (m+1) x n
  out.mu0 = coef.row(0).transpose();
  const MatrixXd V_bar = coef.bottomRows(m);
  out.V0 = F_half * V_bar;
  out.D_diag = D_diag;

  // Scaled sum of squared regression errors, divisor p - m - 1.
  const MatrixXd resid = returns.transpose() - design * coef;  // p x n
  out.s2 = resid.colwise().squaredNorm().transpose() / static_cast<double>(p - m - 1);

  const Eigen::Index df2 = params.second_df > 0 ? params.second_df : p - m;
  out.c1 = f_critical_value(1, df2, params.alpha);
  out.cm = f_critical_value(m, df2, params.alpha);
  out.gamma = (out.nu * out.c1 * out.s2.array()).sqrt().matrix();

  // Perturbation directions, column-scaled so that over the unit ball the
  // column-i deviation of V never exceeds sqrt(m c_m(alpha) s_i^2).
  out.P.reserve(static_cast<std::size_t>(K));
  Rng p_rng = root.stream("portfolio/P");
  for (Eigen::Index k = 0; k < K; ++k) out.P.push_back(p_rng.normal_matrix(m, n));
  const VectorXd cap = out.column_deviation_cap();
  MatrixXd col_stack(m, K);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < K; ++k) {
      col_stack.col(k) = out.P[static_cast<std::size_t>(k)].col(i);
    }
    const double dev = spectral_norm(col_stack);
    const double scale = dev > 0.0 ? cap[i] / dev : 0.0;
    for (Eigen::Index k = 0; k < K; ++k) out.P[static_cast<std::size_t>(k)].col(i) *= scale;
  }
  return out;
}

RobustQpConstraint build_epigraph_constraint(const PortfolioInstance& pi) {
  const Eigen::Index n = pi.n(), m = pi.m(), K = pi.K();
  // Stack sqrt(D) under V0 so the quadratic picks up x^T D x exactly.
  MatrixXd a(m + n, n);
  a.topRows(m) = pi.V0;
  a.bottomRows(n) = MatrixXd(pi.D_diag.cwiseMax(0.0).cwiseSqrt().asDiagonal());
  std::vector<MatrixXd> p;
  p.reserve(static_cast<std::size_t>(K));
  for (const auto& pk : pi.P) {
    MatrixXd padded = MatrixXd::Zero(m + n, n);
    padded.topRows(m) = pk;
    p.push_back(std::move(padded));
  }
  // For x >= 0 the mu-box minimum is (mu0 - gamma)^T x, a plain linear term.
  VectorXd b = pi.lambda * (pi.mu0 - pi.gamma);
  return RobustQpConstraint(std::move(a), std::move(b), 0.0, std::move(p));
}

double robust_objective(const PortfolioInstance& pi, const VectorXd& x) {
  const RobustQpConstraint c = build_epigraph_constraint(pi);
  const auto qf = c.quad_form(x);
  return trs_max(qf.Q, qf.r, qf.s).value;
}

BenchmarkInstance make_benchmark_instance(const PortfolioParams& params, double margin) {
  const PortfolioInstance pi = generate_instance(params);
  const RobustQpConstraint raw = build_epigraph_constraint(pi);

  BenchmarkInstance out;
  out.n = pi.n();
  out.K = pi.K();
  out.lambda = pi.lambda;
  out.scale = std::max(1.0, raw.grad_x_bound());
  const double root = std::sqrt(out.scale);
  MatrixXd a = raw.A() / root;
  std::vector<MatrixXd> p;
  p.reserve(raw.P().size());
  for (const auto& pk : raw.P()) p.push_back(pk / root);
  VectorXd b = raw.b() / out.scale;

  const RobustQpConstraint scaled(a, b, 0.0, p);
  const VectorXd x_uniform = VectorXd::Constant(pi.n(), 1.0 / static_cast<double>(pi.n()));
  const auto qf = scaled.quad_form(x_uniform);
  out.value_at_uniform = trs_max(qf.Q, qf.r, qf.s).value;
  out.level = out.value_at_uniform + margin;
  out.constraint = RobustQpConstraint(std::move(a), std::move(b), out.level, std::move(p));
  return out;
}

RobustInstance build_robust_instance(const PortfolioInstance& pi) {
  RobustInstance out;
  out.x_setup = ProximalSetup::simplex(pi.n());
  RobustConstraint c = make_robust_constraint(build_epigraph_constraint(pi));
  const auto pess = c.pessimize;
  const auto grad_x = c.grad_x;
  const double grad_bound = c.grad_x_bound;
  out.constraints.push_back(std::move(c));
  out.epigraph_constraint = 0;
  // The robust objective itself, evaluated exactly through the pessimizer
  // (Danskin subgradient at the maximizing noise).
  ConvexObjective obj;
  obj.value = [pess](const VectorXd& x) { return pess(x, 1e-10).value; };
  obj.subgrad = [pess, grad_x](const VectorXd& x) {
    const PessimizeResult r = pess(x, 1e-10);
    return grad_x(x, r.u);
  };
  obj.grad_bound = grad_bound;
  out.objective = obj;
  return out;
}

}  // namespace rofo
