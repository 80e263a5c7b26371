#include <cmath>

#include <doctest.h>

#include "rofo/geometry.hpp"
#include "rofo/rng.hpp"

using rofo::ProximalSetup;
using rofo::VectorXd;

namespace {

VectorXd vec2(double a, double b) {
  VectorXd v(2);
  v << a, b;
  return v;
}

ProximalSetup unit_ball(Eigen::Index n) {
  return ProximalSetup::euclidean_ball(VectorXd::Zero(n), 1.0);
}

VectorXd random_point_in(const ProximalSetup& s, rofo::Rng& rng) {
  return rofo::project(s, rng.normal_vector(s.dimension()));
}

}  // namespace

TEST_CASE("set widths of the standard setups") {
  CHECK(unit_ball(3).set_width() == 0.5);  // exact, per the unit-ball setup
  CHECK(ProximalSetup::euclidean_ball(VectorXd::Zero(2), 3.0).set_width() ==
        doctest::Approx(4.5));
  CHECK(ProximalSetup::simplex(4).set_width() == doctest::Approx(std::log(4.0)));
  // box [0,2] x [0,4]: half-diagonal sqrt(5), width 5/2.
  CHECK(ProximalSetup::box(vec2(0, 0), vec2(2, 4)).set_width() == doctest::Approx(2.5));
}

TEST_CASE("initial points") {
  CHECK(rofo::initial_point(unit_ball(2)).norm() == 0.0);
  const VectorXd u = rofo::initial_point(ProximalSetup::simplex(4));
  for (int i = 0; i < 4; ++i) CHECK(u[i] == doctest::Approx(0.25));
  const VectorXd mid = rofo::initial_point(ProximalSetup::box(vec2(0, 0), vec2(2, 4)));
  CHECK(mid[0] == doctest::Approx(1.0));
  CHECK(mid[1] == doctest::Approx(2.0));
}

TEST_CASE("prox_step on the ball") {
  const ProximalSetup ball = unit_ball(2);
  // zero step is the identity
  CHECK((rofo::prox_step(ball, vec2(0.5, 0), vec2(0, 0)) - vec2(0.5, 0)).norm() == 0.0);
  // step to (2,0) projects radially back to (1,0)
  const VectorXd z = rofo::prox_step(ball, vec2(1, 0), vec2(-1, 0));
  CHECK(z[0] == doctest::Approx(1.0));
  CHECK(z[1] == doctest::Approx(0.0));
}

TEST_CASE("prox_step on the simplex is multiplicative weights") {
  const ProximalSetup s = ProximalSetup::simplex(2);
  const VectorXd z = rofo::prox_step(s, vec2(0.5, 0.5), vec2(std::log(2.0), 0.0));
  CHECK(z[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(z[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("prox_step rejects bad input") {
  const ProximalSetup ball = unit_ball(2);
  CHECK_THROWS_AS(rofo::prox_step(ball, vec2(0.5, 0), vec2(std::nan(""), 0)),
                  std::invalid_argument);
  CHECK_THROWS_AS(rofo::prox_step(ball, vec2(5, 0), vec2(0, 0)), std::invalid_argument);
}

TEST_CASE("projection examples") {
  const VectorXd p = rofo::project(unit_ball(2), vec2(3, 4));
  CHECK(p[0] == doctest::Approx(0.6));
  CHECK(p[1] == doctest::Approx(0.8));

  const ProximalSetup s3 = ProximalSetup::simplex(3);
  VectorXd uniform = VectorXd::Constant(3, 1.0 / 3.0);
  CHECK((rofo::project(s3, uniform) - uniform).norm() < 1e-15);

  const VectorXd q = rofo::project(ProximalSetup::simplex(2), vec2(1.5, -0.5));
  CHECK(q[0] == doctest::Approx(1.0));
  CHECK(q[1] == doctest::Approx(0.0));

  CHECK_THROWS_AS(rofo::project(s3, VectorXd::Constant(3, std::nan(""))),
                  std::invalid_argument);
}

TEST_CASE("Euclidean projection is non-expansive") {
  rofo::Rng rng(17);
  const ProximalSetup setups[] = {unit_ball(5),
                                  ProximalSetup::box(-VectorXd::Ones(5), VectorXd::Ones(5)),
                                  ProximalSetup::simplex(5)};
  for (const auto& s : setups) {
    for (int trial = 0; trial < 200; ++trial) {
      const VectorXd a = 3.0 * rng.normal_vector(5);
      const VectorXd b = 3.0 * rng.normal_vector(5);
      const double lhs = (rofo::project(s, a) - rofo::project(s, b)).norm();
      CHECK(lhs <= (a - b).norm() + 1e-10);
    }
  }
}

TEST_CASE("prox membership and simplex normalization") {
  rofo::Rng rng(99);
  const ProximalSetup s = ProximalSetup::simplex(7);
  VectorXd z = rofo::initial_point(s);
  for (int t = 0; t < 500; ++t) {
    z = rofo::prox_step(s, z, rng.normal_vector(7));
    CHECK(s.contains(z, 1e-12));
    CHECK(z.minCoeff() > 0.0);
    CHECK(std::abs(z.sum() - 1.0) <= 1e-12);
  }
  const ProximalSetup ball = unit_ball(4);
  VectorXd w = rofo::initial_point(ball);
  for (int t = 0; t < 500; ++t) {
    w = rofo::prox_step(ball, w, 0.3 * rng.normal_vector(4));
    CHECK(ball.contains(w, 1e-12));
  }
}

TEST_CASE("prox_step with zero gradient is the identity on interior points") {
  rofo::Rng rng(3);
  const ProximalSetup ball = unit_ball(3);
  for (int t = 0; t < 50; ++t) {
    const VectorXd z = 0.9 * random_point_in(ball, rng);
    CHECK((rofo::prox_step(ball, z, VectorXd::Zero(3)) - z).norm() == 0.0);
  }
  const ProximalSetup s = ProximalSetup::simplex(4);
  for (int t = 0; t < 50; ++t) {
    const VectorXd z = random_point_in(s, rng);
    if (z.minCoeff() <= 0.0) continue;
    CHECK((rofo::prox_step(s, z, VectorXd::Zero(4)) - z).norm() < 1e-12);
  }
}

TEST_CASE("constructor validation") {
  CHECK_THROWS_AS(ProximalSetup::euclidean_ball(VectorXd::Zero(2), 0.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(ProximalSetup::simplex(0), std::invalid_argument);
  CHECK_THROWS_AS(ProximalSetup::box(vec2(1, 0), vec2(0, 1)), std::invalid_argument);
  // degenerate but legal: a singleton box
  const ProximalSetup point = ProximalSetup::box(vec2(1, 1), vec2(1, 1));
  CHECK(point.set_width() == 0.0);
  CHECK(rofo::initial_point(point) == vec2(1, 1));
}
