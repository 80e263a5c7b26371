#pragma once

#include <Eigen/Core>

namespace rofo {

using Eigen::VectorXd;

// A domain together with its proximal machinery: distance-generating
// function, prox map, omega-minimizer and set width Omega.  Three setups
// are provided:
//   * euclidean_ball : 1/2 ||z - center||_2^2,  Omega = radius^2 / 2
//   * simplex        : negative entropy,        Omega = ln(dimension)
//   * box            : 1/2 ||z - midpoint||^2,  Omega = ||upper-lower||^2 / 8
// Setups are immutable after construction and safe to share across threads.
class ProximalSetup {
 public:
  enum class Kind { EuclideanBall, Simplex, Box };

  // Zero-dimensional placeholder; real setups come from the factories.
  ProximalSetup() = default;

  static ProximalSetup euclidean_ball(VectorXd center, double radius);
  static ProximalSetup simplex(Eigen::Index dimension);
  static ProximalSetup box(VectorXd lower, VectorXd upper);

  Kind kind() const { return kind_; }
  Eigen::Index dimension() const { return dim_; }
  double set_width() const { return set_width_; }

  const VectorXd& center() const { return center_; }
  double radius() const { return radius_; }
  const VectorXd& lower() const { return lower_; }
  const VectorXd& upper() const { return upper_; }

  // Largest Euclidean distance from the omega-minimizer to any domain
  // point; the R constant of Euclidean subgradient baselines.
  double euclidean_radius() const;

  bool contains(const VectorXd& point, double tol = 1e-9) const;

 private:
  Kind kind_ = Kind::EuclideanBall;
  Eigen::Index dim_ = 0;
  double set_width_ = 0.0;
  VectorXd center_;
  double radius_ = 0.0;
  VectorXd lower_, upper_;
};

// Default tolerance for the "current point is in the domain" precondition;
// accounts for drift accumulated over many prox steps.
inline constexpr double kDomainTol = 1e-9;

// One proximal step: for the Euclidean setups the projection of
// (current - scaled_gradient), for the simplex the multiplicative-weights
// update  w_k ∝ current_k * exp(-scaled_gradient_k)  renormalized.
// Throws std::invalid_argument on non-finite input or when `current` lies
// outside the domain beyond kDomainTol.
VectorXd prox_step(const ProximalSetup& setup, const VectorXd& current,
                   const VectorXd& scaled_gradient);

// Euclidean-nearest point of the domain.  The simplex case uses the
// sort-and-threshold procedure (Duchi et al. 2008 style).
VectorXd project(const ProximalSetup& setup, const VectorXd& point);

// argmin of the distance-generating function: ball center, uniform
// distribution, box midpoint.
VectorXd initial_point(const ProximalSetup& setup);

}  // namespace rofo
