#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "rofo/eigen_sym.hpp"
#include "rofo/rng.hpp"

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

MatrixXd random_psd(Eigen::Index n, rofo::Rng& rng) {
  const MatrixXd g = rng.normal_matrix(n, n);
  return g * g.transpose();
}

}  // namespace

TEST_CASE("max_eigenvalue on simple matrices") {
  CHECK(rofo::max_eigenvalue(MatrixXd::Identity(3, 3)).value == doctest::Approx(1.0));

  MatrixXd d = MatrixXd::Zero(3, 3);
  d.diagonal() << 1.0, 2.0, 5.0;
  const auto r = rofo::max_eigenvalue(d);
  CHECK(r.value == doctest::Approx(5.0));
  CHECK(std::abs(r.vector[2]) == doctest::Approx(1.0));
  CHECK(r.vector.norm() == doctest::Approx(1.0));
}

TEST_CASE("jacobi matches an independent dense solver") {
  rofo::Rng rng(101);
  for (int trial = 0; trial < 30; ++trial) {
    const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng.next_u64() % 9);
    const MatrixXd m = random_psd(n, rng);
    const auto mine = rofo::max_eigenvalue(m, 1e-12);
    Eigen::SelfAdjointEigenSolver<MatrixXd> ref(m);
    const double lam_ref = ref.eigenvalues().maxCoeff();
    CHECK(mine.value == doctest::Approx(lam_ref).epsilon(1e-10));
    // eigenvector residual
    CHECK((m * mine.vector - mine.value * mine.vector).norm() <=
          1e-8 * std::max(1.0, m.norm()));
  }
}

TEST_CASE("power iteration path (above the dense threshold)") {
  rofo::Rng rng(7);
  const Eigen::Index n = 80;
  const MatrixXd m = random_psd(n, rng);
  const auto mine = rofo::max_eigenvalue(m, 1e-12);
  Eigen::SelfAdjointEigenSolver<MatrixXd> ref(m);
  CHECK(mine.value == doctest::Approx(ref.eigenvalues().maxCoeff()).epsilon(1e-8));
}

TEST_CASE("asymmetric input is rejected") {
  MatrixXd m(2, 2);
  m << 1.0, 0.5, -0.5, 1.0;
  CHECK_THROWS_AS(rofo::max_eigenvalue(m), std::invalid_argument);
}

TEST_CASE("spectral norm") {
  rofo::Rng rng(5);
  const MatrixXd m = rng.normal_matrix(4, 7);
  Eigen::JacobiSVD<MatrixXd> svd(m);
  CHECK(rofo::spectral_norm(m) == doctest::Approx(svd.singularValues()[0]).epsilon(1e-10));
}
