#include "rofo/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace rofo {
namespace {

// Multiplicative-weights updates never recover from an exact zero, so
// components are floored here before renormalizing.
constexpr double kSimplexFloor = 1e-300;

void require_finite(const VectorXd& v, const char* what) {
  if (!v.allFinite()) {
    throw std::invalid_argument(std::string(what) + ": non-finite input");
  }
}

}  // namespace

ProximalSetup ProximalSetup::euclidean_ball(VectorXd center, double radius) {
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw std::invalid_argument("euclidean_ball: radius must be positive");
  }
  require_finite(center, "euclidean_ball");
  ProximalSetup s;
  s.kind_ = Kind::EuclideanBall;
  s.dim_ = center.size();
  s.center_ = std::move(center);
  s.radius_ = radius;
  s.set_width_ = 0.5 * radius * radius;
  return s;
}

ProximalSetup ProximalSetup::simplex(Eigen::Index dimension) {
  if (dimension < 1) {
    throw std::invalid_argument("simplex: dimension must be >= 1");
  }
  ProximalSetup s;
  s.kind_ = Kind::Simplex;
  s.dim_ = dimension;
  s.set_width_ = std::log(static_cast<double>(dimension));
  return s;
}

ProximalSetup ProximalSetup::box(VectorXd lower, VectorXd upper) {
  if (lower.size() != upper.size()) {
    throw std::invalid_argument("box: lower/upper dimension mismatch");
  }
  require_finite(lower, "box");
  require_finite(upper, "box");
  if ((lower.array() > upper.array()).any()) {
    throw std::invalid_argument("box: requires lower <= upper componentwise");
  }
  ProximalSetup s;
  s.kind_ = Kind::Box;
  s.dim_ = lower.size();
  s.lower_ = std::move(lower);
  s.upper_ = std::move(upper);
  // max_z 1/2 ||z - midpoint||^2 over the box.
  s.set_width_ = 0.125 * (s.upper_ - s.lower_).squaredNorm();
  return s;
}

double ProximalSetup::euclidean_radius() const {
  switch (kind_) {
    case Kind::EuclideanBall:
      return radius_;
    case Kind::Simplex: {
      // Distance from the uniform point to a vertex.
      const double n = static_cast<double>(dim_);
      return std::sqrt(1.0 - 1.0 / n);
    }
    case Kind::Box:
      return 0.5 * (upper_ - lower_).norm();
  }
  return 0.0;
}

bool ProximalSetup::contains(const VectorXd& point, double tol) const {
  if (point.size() != dim_ || !point.allFinite()) return false;
  switch (kind_) {
    case Kind::EuclideanBall:
      return (point - center_).norm() <= radius_ + tol;
    case Kind::Simplex:
      return point.minCoeff() >= -tol && std::abs(point.sum() - 1.0) <= tol;
    case Kind::Box:
      return (point.array() >= lower_.array() - tol).all() &&
             (point.array() <= upper_.array() + tol).all();
  }
  return false;
}

VectorXd project(const ProximalSetup& setup, const VectorXd& point) {
  require_finite(point, "project");
  if (point.size() != setup.dimension()) {
    throw std::invalid_argument("project: dimension mismatch");
  }
  switch (setup.kind()) {
    case ProximalSetup::Kind::EuclideanBall: {
      VectorXd d = point - setup.center();
      const double nrm = d.norm();
      if (nrm <= setup.radius()) return point;
      return setup.center() + d * (setup.radius() / nrm);
    }
    case ProximalSetup::Kind::Box:
      return point.cwiseMax(setup.lower()).cwiseMin(setup.upper());
    case ProximalSetup::Kind::Simplex: {
      // Sort-and-threshold: w_i = max(v_i - theta, 0) with theta chosen so
      // the positive part sums to one.
      const Eigen::Index n = point.size();
      std::vector<double> u(point.data(), point.data() + n);
      std::sort(u.begin(), u.end(), std::greater<double>());
      double cumsum = 0.0;
      double theta = 0.0;
      Eigen::Index rho = 0;
      for (Eigen::Index j = 0; j < n; ++j) {
        cumsum += u[static_cast<std::size_t>(j)];
        const double t = (cumsum - 1.0) / static_cast<double>(j + 1);
        if (u[static_cast<std::size_t>(j)] - t > 0.0) {
          rho = j + 1;
          theta = t;
        }
      }
      (void)rho;
      return (point.array() - theta).max(0.0).matrix();
    }
  }
  throw std::logic_error("project: unknown setup kind");
}

VectorXd prox_step(const ProximalSetup& setup, const VectorXd& current,
                   const VectorXd& scaled_gradient) {
  require_finite(scaled_gradient, "prox_step");
  require_finite(current, "prox_step");
  if (!setup.contains(current, kDomainTol)) {
    throw std::invalid_argument("prox_step: current point outside domain");
  }
  switch (setup.kind()) {
    case ProximalSetup::Kind::EuclideanBall:
    case ProximalSetup::Kind::Box:
      return project(setup, current - scaled_gradient);
    case ProximalSetup::Kind::Simplex: {
      // w_k ∝ current_k * exp(-xi_k), computed in log space and shifted by
      // the max exponent so large gradients cannot overflow.
      const Eigen::Index n = current.size();
      VectorXd logw(n);
      for (Eigen::Index i = 0; i < n; ++i) {
        logw[i] = std::log(std::max(current[i], kSimplexFloor)) - scaled_gradient[i];
      }
      const double shift = logw.maxCoeff();
      VectorXd w = (logw.array() - shift).exp().matrix();
      w = w.cwiseMax(kSimplexFloor);
      return w / w.sum();
    }
  }
  throw std::logic_error("prox_step: unknown setup kind");
}

VectorXd initial_point(const ProximalSetup& setup) {
  switch (setup.kind()) {
    case ProximalSetup::Kind::EuclideanBall:
      return setup.center();
    case ProximalSetup::Kind::Simplex:
      return VectorXd::Constant(setup.dimension(),
                                1.0 / static_cast<double>(setup.dimension()));
    case ProximalSetup::Kind::Box:
      return 0.5 * (setup.lower() + setup.upper());
  }
  throw std::logic_error("initial_point: unknown setup kind");
}

}  // namespace rofo
