#pragma once

#include <Eigen/Core>

namespace rofo {

struct SymmetricEigen {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // columns match values
};

// Cyclic Jacobi eigendecomposition of a symmetric matrix.  Off-diagonal
// mass is annihilated sweep by sweep until it drops below
// tol * max(1, ||M||_Fro).  Rejects input that is asymmetric beyond 1e-10.
SymmetricEigen jacobi_eigen(const Eigen::MatrixXd& m, double tol = 1e-14);

// Largest eigenvalue and a unit eigenvector of a symmetric PSD matrix.
// Dense Jacobi up to 64x64, shifted power iteration above that (shift by
// a Gershgorin lower bound makes the dominant eigenvalue the target).
// The eigenvector sign is normalized so its largest-magnitude entry is
// positive, which keeps ties deterministic.
struct MaxEigen {
  double value = 0.0;
  Eigen::VectorXd vector;
};
MaxEigen max_eigenvalue(const Eigen::MatrixXd& m, double tol = 1e-12);

// Spectral norm via max_eigenvalue(M^T M).
double spectral_norm(const Eigen::MatrixXd& m);

}  // namespace rofo
