#include "rofo/eigen_sym.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace rofo {
namespace {

constexpr int kMaxJacobiSweeps = 100;
constexpr long kMaxPowerIterations = 100000;
constexpr Eigen::Index kDenseThreshold = 64;

void require_symmetric(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) {
    throw std::invalid_argument("symmetric eigen: matrix not square");
  }
  const double scale = std::max(1.0, m.norm());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw std::invalid_argument("symmetric eigen: matrix not symmetric");
  }
}

void normalize_sign(Eigen::VectorXd& v) {
  Eigen::Index imax = 0;
  v.cwiseAbs().maxCoeff(&imax);
  if (v[imax] < 0.0) v = -v;
}

}  // namespace

SymmetricEigen jacobi_eigen(const Eigen::MatrixXd& m, double tol) {
  require_symmetric(m);
  const Eigen::Index n = m.rows();
  Eigen::MatrixXd a = 0.5 * (m + m.transpose());
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
  const double target = tol * std::max(1.0, a.norm());

  for (int sweep = 0; sweep < kMaxJacobiSweeps; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p + 1 < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (std::sqrt(2.0 * off) <= target) break;

    for (Eigen::Index p = 0; p + 1 < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::abs(apq) <= 1e-300) continue;
        // Classic 2x2 rotation that zeroes a(p,q).
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  SymmetricEigen out;
  out.values = a.diagonal();
  out.vectors = v;
  // Stable ascending sort of (value, vector) pairs.
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index i, Eigen::Index j) {
    return out.values[i] < out.values[j];
  });
  Eigen::VectorXd vals(n);
  Eigen::MatrixXd vecs(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    vals[i] = out.values[order[static_cast<std::size_t>(i)]];
    vecs.col(i) = out.vectors.col(order[static_cast<std::size_t>(i)]);
  }
  out.values = std::move(vals);
  out.vectors = std::move(vecs);
  return out;
}

MaxEigen max_eigenvalue(const Eigen::MatrixXd& m, double tol) {
  require_symmetric(m);
  const Eigen::Index n = m.rows();
  MaxEigen out;
  if (n == 0) {
    out.vector = Eigen::VectorXd();
    return out;
  }
  if (n <= kDenseThreshold) {
    SymmetricEigen e = jacobi_eigen(m, std::min(tol, 1e-14));
    out.value = e.values[n - 1];
    out.vector = e.vectors.col(n - 1);
    normalize_sign(out.vector);
    return out;
  }

  // Shifted power iteration: M + sigma I is PSD with the same top
  // eigenvector once sigma exceeds -min eigenvalue (Gershgorin bound).
  double sigma = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double radius = 0.0;
    for (Eigen::Index j = 0; j < n; ++j)
      if (j != i) radius += std::abs(m(i, j));
    sigma = std::max(sigma, radius - m(i, i));
  }
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  // Deterministic start with energy on every coordinate.
  for (Eigen::Index i = 0; i < n; ++i) x[i] = 1.0 + 1.0 / static_cast<double>(i + 2);
  x /= x.norm();

  const double scale = std::max(1.0, m.norm());
  double lambda = 0.0;
  long it = 0;
  for (; it < kMaxPowerIterations; ++it) {
    Eigen::VectorXd y = m * x + sigma * x;
    const double ynorm = y.norm();
    if (ynorm <= 1e-300) {
      // M = -sigma I on the current iterate; any unit vector works.
      lambda = -sigma;
      break;
    }
    y /= ynorm;
    const double next = x.dot(m * x);
    if (it > 0 && (y - x).norm() <= tol && std::abs(next - lambda) <= tol * scale) {
      x = y;
      lambda = x.dot(m * x);
      break;
    }
    x = y;
    lambda = next;
  }
  if (it == kMaxPowerIterations) {
    throw std::runtime_error("max_eigenvalue: power iteration did not converge");
  }
  out.value = x.dot(m * x);
  out.vector = x;
  normalize_sign(out.vector);
  return out;
}

double spectral_norm(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  const Eigen::MatrixXd g =
      m.rows() <= m.cols() ? Eigen::MatrixXd(m * m.transpose()) : Eigen::MatrixXd(m.transpose() * m);
  const double lam = max_eigenvalue(g).value;
  return std::sqrt(std::max(0.0, lam));
}

}  // namespace rofo
