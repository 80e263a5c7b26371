#include <cmath>

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "rofo/robust_qp.hpp"
#include "rofo/rng.hpp"

using Eigen::MatrixXd;
using Eigen::VectorXd;
using rofo::RobustQpConstraint;

namespace {

RobustQpConstraint random_constraint(Eigen::Index n, Eigen::Index k, rofo::Rng& rng,
                                     double a_scale = 0.8, double p_scale = 0.3) {
  const MatrixXd a = a_scale * rng.normal_matrix(n, n);
  const VectorXd b = rng.normal_vector(n);
  const double c = rng.uniform(-1.0, 1.0);
  std::vector<MatrixXd> p;
  for (Eigen::Index j = 0; j < k; ++j) p.push_back(p_scale * rng.normal_matrix(n, n));
  return RobustQpConstraint(a, b, c, std::move(p));
}

// Evaluates the raw (un-reformulated) robust quadratic.
double raw_value(const RobustQpConstraint& c, const VectorXd& x, const VectorXd& u) {
  MatrixXd m = c.A();
  for (Eigen::Index j = 0; j < c.K(); ++j) m += u[j] * c.P()[static_cast<std::size_t>(j)];
  return (m * x).squaredNorm() - c.b().dot(x) - c.c();
}

// Deterministic quasi-uniform unit sphere covering (Fibonacci spiral), K=3.
std::vector<VectorXd> sphere_grid3(int count) {
  std::vector<VectorXd> pts;
  pts.reserve(static_cast<std::size_t>(count));
  const double golden = M_PI * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < count; ++i) {
    const double y = 1.0 - 2.0 * (i + 0.5) / count;
    const double r = std::sqrt(std::max(0.0, 1.0 - y * y));
    const double a = golden * i;
    VectorXd v(3);
    v << r * std::cos(a), y, r * std::sin(a);
    pts.push_back(std::move(v));
  }
  return pts;
}

}  // namespace

TEST_CASE("qp_eval equals the raw quadratic on the boundary") {
  rofo::Rng rng(11);
  for (int trial = 0; trial < 25; ++trial) {
    const auto c = random_constraint(3, 2, rng);
    const VectorXd x = rng.unit_vector(3) * rng.next_double();
    const VectorXd u = rng.unit_vector(2);  // ||u|| = 1: correction term vanishes
    CHECK(rofo::qp_eval(c, x, u) == doctest::Approx(raw_value(c, x, u)).epsilon(1e-10));
  }
}

TEST_CASE("no uncertainty means a plain quadratic") {
  rofo::Rng rng(12);
  const Eigen::Index n = 4;
  const MatrixXd a = rng.normal_matrix(n, n);
  const VectorXd b = rng.normal_vector(n);
  std::vector<MatrixXd> p(3, MatrixXd::Zero(n, n));
  const RobustQpConstraint c(a, b, 0.7, std::move(p));
  for (int trial = 0; trial < 10; ++trial) {
    const VectorXd x = rng.normal_vector(n);
    const VectorXd u = rng.unit_vector(3) * rng.next_double();
    const double expected = (a * x).squaredNorm() - b.dot(x) - 0.7;
    CHECK(rofo::qp_eval(c, x, u) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("qp_eval at u = 0 is s_x + lambda_max, dense eigen oracle") {
  rofo::Rng rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    const auto c = random_constraint(3, 2, rng);
    const VectorXd x = rng.unit_vector(3);
    const auto qf = c.quad_form(x);
    Eigen::SelfAdjointEigenSolver<MatrixXd> ref(qf.Q);
    const double expected = qf.s + ref.eigenvalues().maxCoeff();
    CHECK(rofo::qp_eval(c, x, VectorXd::Zero(2)) ==
          doctest::Approx(expected).epsilon(1e-10));
  }
}

TEST_CASE("qp_grad_u closed forms") {
  rofo::Rng rng(14);
  const auto c = random_constraint(3, 2, rng);
  const VectorXd x = rng.unit_vector(3);
  const auto qf = c.quad_form(x);
  // u = 0: gradient is 2 r_x
  const VectorXd g0 = rofo::qp_grad_u(c, x, VectorXd::Zero(2));
  CHECK((g0 - 2.0 * qf.r).norm() <= 1e-12 * std::max(1.0, qf.r.norm()));
}

TEST_CASE("gradients match central finite differences") {
  rofo::Rng rng(15);
  const double h = 1e-6;
  int checked = 0;
  for (int trial = 0; trial < 60 && checked < 30; ++trial) {
    const auto c = random_constraint(4, 3, rng);
    const VectorXd x = 0.8 * rng.unit_vector(4);
    const VectorXd u = 0.7 * rng.unit_vector(3);
    // Skip near-degenerate top eigenvalues where lambda_max is not smooth.
    const auto qf = c.quad_form(x);
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(qf.Q);
    const VectorXd ev = es.eigenvalues();
    if (ev.size() >= 2 && ev[ev.size() - 1] - ev[ev.size() - 2] < 1e-3) continue;
    ++checked;

    const VectorXd gu = rofo::qp_grad_u(c, x, u);
    for (Eigen::Index j = 0; j < 3; ++j) {
      VectorXd up = u, dn = u;
      up[j] += h;
      dn[j] -= h;
      const double fd = (rofo::qp_eval(c, x, up) - rofo::qp_eval(c, x, dn)) / (2.0 * h);
      CHECK(gu[j] == doctest::Approx(fd).epsilon(1e-5));
    }
    const VectorXd gx = rofo::qp_grad_x(c, x, u);
    for (Eigen::Index j = 0; j < 4; ++j) {
      VectorXd up = x, dn = x;
      up[j] += h;
      dn[j] -= h;
      const double fd = (rofo::qp_eval(c, up, u) - rofo::qp_eval(c, dn, u)) / (2.0 * h);
      CHECK(gx[j] == doctest::Approx(fd).epsilon(1e-5));
    }
  }
  CHECK(checked >= 20);
}

TEST_CASE("boundary u kills the eigenvector term of qp_grad_x") {
  rofo::Rng rng(16);
  const auto c = random_constraint(3, 2, rng);
  const VectorXd x = rng.unit_vector(3);
  const VectorXd u = rng.unit_vector(2);
  MatrixXd m = c.A();
  for (Eigen::Index j = 0; j < 2; ++j) m += u[j] * c.P()[static_cast<std::size_t>(j)];
  const VectorXd expected = 2.0 * m.transpose() * (m * x) - c.b();
  CHECK((rofo::qp_grad_x(c, x, u) - expected).norm() <= 1e-9);
}

TEST_CASE("P = 0 gradient reduces to the deterministic quadratic's") {
  rofo::Rng rng(17);
  const Eigen::Index n = 3;
  const MatrixXd a = rng.normal_matrix(n, n);
  const VectorXd b = rng.normal_vector(n);
  std::vector<MatrixXd> p(2, MatrixXd::Zero(n, n));
  const RobustQpConstraint c(a, b, 0.0, std::move(p));
  const VectorXd x = rng.unit_vector(n);
  const VectorXd expected = 2.0 * a.transpose() * (a * x) - b;
  CHECK((rofo::qp_grad_x(c, x, 0.5 * rofo::VectorXd::Unit(2, 0)) - expected).norm() <= 1e-10);
}

TEST_CASE("concavity in u and convexity in x (midpoint checks)") {
  rofo::Rng rng(18);
  for (int trial = 0; trial < 20; ++trial) {
    const auto c = random_constraint(3, 2, rng);
    const VectorXd x = rng.unit_vector(3) * rng.next_double();
    const VectorXd u1 = rng.unit_vector(2) * rng.next_double();
    const VectorXd u2 = rng.unit_vector(2) * rng.next_double();
    const VectorXd um = 0.5 * (u1 + u2);
    CHECK(rofo::qp_eval(c, x, um) >=
          0.5 * (rofo::qp_eval(c, x, u1) + rofo::qp_eval(c, x, u2)) - 1e-10);

    const VectorXd x1 = rng.unit_vector(3) * rng.next_double();
    const VectorXd x2 = rng.unit_vector(3) * rng.next_double();
    const VectorXd xm = 0.5 * (x1 + x2);
    const VectorXd u = rng.unit_vector(2) * rng.next_double();
    CHECK(rofo::qp_eval(c, xm, u) <=
          0.5 * (rofo::qp_eval(c, x1, u) + rofo::qp_eval(c, x2, u)) + 1e-10);
  }
}

TEST_CASE("trs_max examples") {
  // Q = 0, r = e1: linear over the ball, maximizer e1, value 2 + s.
  {
    const auto r = rofo::trs_max(MatrixXd::Zero(3, 3), VectorXd::Unit(3, 0), 0.0);
    CHECK(r.value == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(r.u[0] == doctest::Approx(1.0).epsilon(1e-10));
  }
  // Q = I2, r = 0: hard case, value 1, deterministic pick e1.
  {
    const auto r = rofo::trs_max(MatrixXd::Identity(2, 2), VectorXd::Zero(2), 0.0);
    CHECK(r.value == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.u[0] == doctest::Approx(1.0).epsilon(1e-12));
  }
  // indefinite input rejected
  {
    MatrixXd q(2, 2);
    q << -1.0, 0.0, 0.0, 1.0;
    CHECK_THROWS_AS(rofo::trs_max(q, VectorXd::Zero(2), 0.0), std::invalid_argument);
  }
}

TEST_CASE("trs_max against a sphere grid") {
  rofo::Rng rng(19);
  const auto grid = sphere_grid3(20000);
  for (int trial = 0; trial < 12; ++trial) {
    const MatrixXd g = rng.normal_matrix(3, 3);
    const MatrixXd q = g * g.transpose();
    const VectorXd r = rng.normal_vector(3);
    const double s = rng.uniform(-1.0, 1.0);
    const auto res = rofo::trs_max(q, r, s);
    double best = -1e300;
    for (const auto& u : grid) best = std::max(best, u.dot(q * u) + 2.0 * r.dot(u) + s);
    CHECK(res.value >= best - 1e-9);       // grid cannot beat the exact solver
    CHECK(res.value <= best + 0.05);       // and the solver is near the grid max
    CHECK(res.u.norm() == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("trs_max hard case with a dominant eigenspace") {
  // r lies in the bottom eigenspace; top eigenvector must be blended in.
  MatrixXd q = MatrixXd::Zero(3, 3);
  q.diagonal() << 5.0, 1.0, 1.0;
  VectorXd r(3);
  r << 0.0, 0.3, 0.0;
  const auto res = rofo::trs_max(q, r, 0.0);
  // maximizer: u = (a, b, 0), 5a^2 + b^2 + 0.6b max on a^2 + b^2 = 1
  // stationarity: mu = 5 hard-case root, b = r2/(5-1) = 0.075
  CHECK(res.u[1] == doctest::Approx(0.075).epsilon(1e-9));
  CHECK(std::abs(res.u[0]) == doctest::Approx(std::sqrt(1.0 - 0.075 * 0.075)).epsilon(1e-9));
  const double expected = 5.0 * (1.0 - 0.075 * 0.075) + 0.075 * 0.075 + 0.6 * 0.075;
  CHECK(res.value == doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("qp_bounds") {
  rofo::Rng rng(20);
  // single constraint, P = 0
  {
    const MatrixXd a = rng.normal_matrix(3, 3);
    const VectorXd b = rng.normal_vector(3);
    std::vector<RobustQpConstraint> cs;
    cs.emplace_back(a, b, 0.0, std::vector<MatrixXd>(2, MatrixXd::Zero(3, 3)));
    const auto bounds = rofo::qp_bounds(cs);
    CHECK(bounds.sigma2 == 0.0);
    CHECK(bounds.chi == 0.0);
    CHECK(bounds.rho == doctest::Approx(rofo::spectral_norm(a)));
    CHECK(bounds.beta == doctest::Approx(b.norm()));
  }
  // A = I2, b = (3,4): rho = 1, beta = 5
  {
    VectorXd b(2);
    b << 3.0, 4.0;
    std::vector<RobustQpConstraint> cs;
    cs.emplace_back(MatrixXd::Identity(2, 2), b, 0.0, std::vector<MatrixXd>{});
    const auto bounds = rofo::qp_bounds(cs);
    CHECK(bounds.rho == doctest::Approx(1.0));
    CHECK(bounds.beta == doctest::Approx(5.0));
  }
  // sigma^2 equals the direct Frobenius sums, chi <= sigma
  {
    std::vector<MatrixXd> p;
    double direct = 0.0;
    for (int j = 0; j < 3; ++j) {
      p.push_back(rng.normal_matrix(4, 4));
      direct += p.back().squaredNorm();
    }
    std::vector<RobustQpConstraint> cs;
    cs.emplace_back(rng.normal_matrix(4, 4), rng.normal_vector(4), 0.0, std::move(p));
    const auto bounds = rofo::qp_bounds(cs);
    CHECK(bounds.sigma2 == doctest::Approx(direct).epsilon(1e-12));
    CHECK(bounds.chi <= bounds.sigma() + 1e-12);
  }
}

TEST_CASE("gradient norm bounds hold on random samples") {
  rofo::Rng rng(21);
  for (int trial = 0; trial < 5; ++trial) {
    const auto c = random_constraint(4, 3, rng);
    const double gu_bound = c.grad_u_bound();
    const double gx_bound = c.grad_x_bound();
    for (int s = 0; s < 400; ++s) {
      const VectorXd x = rng.unit_vector(4) * rng.next_double();
      const VectorXd u = rng.unit_vector(3) * rng.next_double();
      CHECK(rofo::qp_grad_u(c, x, u).norm() <= gu_bound * (1.0 + 1e-12));
      CHECK(rofo::qp_grad_x(c, x, u).norm() <= gx_bound * (1.0 + 1e-12));
    }
  }
}

TEST_CASE("lemma-1 equivalence: sup of the reformulated function equals the raw TRS") {
  rofo::Rng rng(22);
  for (int trial = 0; trial < 15; ++trial) {
    const auto c = random_constraint(3, 3, rng);
    const VectorXd x = rng.unit_vector(3) * rng.next_double();
    const auto qf = c.quad_form(x);
    const double raw_sup = rofo::trs_max(qf.Q, qf.r, qf.s).value;

    // Independent route: projected gradient ascent on the concave
    // reformulated objective.
    const rofo::ProximalSetup ball =
        rofo::ProximalSetup::euclidean_ball(VectorXd::Zero(3), 1.0);
    VectorXd u = VectorXd::Zero(3);
    for (int it = 1; it <= 20000; ++it) {
      const VectorXd g = rofo::qp_grad_u(c, x, u);
      u = rofo::project(ball, u + (0.5 / std::sqrt(static_cast<double>(it))) * g);
    }
    const double ascent_value = rofo::qp_eval(c, x, u);
    CHECK(std::abs(ascent_value - raw_sup) <= 1e-4 * std::max(1.0, std::abs(raw_sup)));
  }
}
