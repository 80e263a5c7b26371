#pragma once

#include <vector>

#include <Eigen/Core>

#include "rofo/eigen_sym.hpp"
#include "rofo/framework.hpp"

namespace rofo {

using Eigen::MatrixXd;

// One robust quadratic constraint
//   || (A + sum_k u_k P_k) x ||^2 - b^T x - c <= 0   for all ||u||_2 <= 1,
// evaluated through its concave-in-u reformulation
//   f(x,u) = u^T Q_x u + 2 r_x^T u + s_x + lambda_max(Q_x) (1 - ||u||^2),
// where P_x has columns P_k x, Q_x = P_x^T P_x, r_x = P_x^T A x and
// s_x = ||A x||^2 - b^T x - c.  A and the P_k may be rectangular (q x n).
class RobustQpConstraint {
 public:
  RobustQpConstraint() = default;  // empty placeholder
  RobustQpConstraint(MatrixXd a, VectorXd b, double c, std::vector<MatrixXd> p);

  const MatrixXd& A() const { return a_; }
  const VectorXd& b() const { return b_; }
  double c() const { return c_; }
  const std::vector<MatrixXd>& P() const { return p_; }
  Eigen::Index n() const { return a_.cols(); }
  Eigen::Index K() const { return static_cast<Eigen::Index>(p_.size()); }

  // Cached norm contributions for the instance-level bounds.
  double sigma2() const { return sigma2_; }  // sum_k ||P_k||_Fro^2
  double chi() const { return chi_; }        // max_k ||P_k||_Spec
  double rho() const { return rho_; }        // ||A||_Spec
  double beta() const { return beta_; }      // ||b||_2

  double grad_u_bound() const;  // 2 (sigma^2 + sigma rho)
  double grad_x_bound() const;  // 4 (rho + sqrt(K) sigma)^2 + beta

  // Q_x, r_x, s_x of the quadratic form in u at this x.
  struct QuadForm {
    MatrixXd Q;
    VectorXd r;
    double s = 0.0;
  };
  QuadForm quad_form(const VectorXd& x) const;

 private:
  MatrixXd a_;
  VectorXd b_;
  double c_ = 0.0;
  std::vector<MatrixXd> p_;
  double sigma2_ = 0.0, chi_ = 0.0, rho_ = 0.0, beta_ = 0.0;
};

// Eq.-22 value; requires ||u|| <= 1 + 1e-9.
double qp_eval(const RobustQpConstraint& c, const VectorXd& x, const VectorXd& u);

// 2 (Q_x - lambda_max(Q_x) I) u + 2 r_x.
VectorXd qp_grad_u(const RobustQpConstraint& c, const VectorXd& x, const VectorXd& u);

// 2 M(u)^T M(u) x + 2 (1 - ||u||^2) W(v)^T W(v) x - b with M(u) = A + sum u_k P_k,
// W(v) = sum v_k P_k and v a unit top eigenvector of Q_x.
VectorXd qp_grad_x(const RobustQpConstraint& c, const VectorXd& x, const VectorXd& u);

// Exact trust-region-subproblem pessimizer:
//   max { u^T Q u + 2 r^T u + s : ||u||_2 <= 1 },  Q symmetric PSD.
// Diagonalizes Q and solves the secular equation for the boundary
// multiplier; the hard case (r orthogonal to the top eigenspace) gets a
// top-eigenvector component to reach the boundary.
struct TrsResult {
  VectorXd u;
  double value = 0.0;
};
TrsResult trs_max(const MatrixXd& q, const VectorXd& r, double s, double tol = 1e-10);

struct QpInstanceBounds {
  double sigma2 = 0.0;
  double chi = 0.0;
  double rho = 0.0;
  double beta = 0.0;

  double sigma() const;
  // 2 (sigma^2 + sigma rho)
  double grad_u_bound() const;
  // 4 (rho + sqrt(K) sigma)^2 + beta
  double grad_x_bound(Eigen::Index k) const;
};

QpInstanceBounds qp_bounds(const std::vector<RobustQpConstraint>& constraints);

// Wraps the constraint into the framework's evaluator contract, with the
// unit-ball uncertainty setup and the analytic gradient bounds; the exact
// pessimizer is attached via trs_max.
RobustConstraint make_robust_constraint(RobustQpConstraint constraint);

}  // namespace rofo
