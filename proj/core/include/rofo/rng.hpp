#pragma once

#include <cstdint>
#include <string_view>

#include <Eigen/Core>

namespace rofo {

// Counter-based generator: every draw is a pure function of
// (seed, stream id, counter), so independently named substreams can be
// carved off a single seed and replayed bit-identically on any platform.
// The mixer is SplitMix64 applied to the (key ^ counter) pair.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  // Derives an independent substream named by `label` (e.g. "portfolio/V").
  Rng stream(std::string_view label) const;
  // Numbered substream, for per-index draws.
  Rng stream(std::uint64_t index) const;

  std::uint64_t next_u64();
  // Uniform on [0,1).
  double next_double();
  double uniform(double lo, double hi);
  // Standard normal via Box-Muller on the counter stream (no state beyond
  // the counter, so substreams stay reproducible).
  double normal();

  Eigen::VectorXd normal_vector(Eigen::Index n);
  Eigen::MatrixXd normal_matrix(Eigen::Index rows, Eigen::Index cols);
  Eigen::VectorXd uniform_vector(Eigen::Index n, double lo, double hi);
  // Uniform on the Euclidean unit sphere in R^n.
  Eigen::VectorXd unit_vector(Eigen::Index n);

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool have_cached_normal_ = false;
  double cached_normal_ = 0.0;
};

}  // namespace rofo
