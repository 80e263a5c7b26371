#include <sstream>

#include <doctest.h>

#include "rofo/bench.hpp"
#include "rofo/instance_io.hpp"
#include "rofo/rng.hpp"

using rofo::InstanceFile;
using rofo::VectorXd;

namespace {

std::string toy_json() {
  return R"({
    "domain_x": {"kind": "ball", "center": [0.0, 0.0], "radius": 1.0},
    "constraints": [
      {"A": [[0.5, 0.0], [0.0, 0.5]], "b": [0.1, 0.2], "c": 0.3,
       "P": [[[0.05, 0.0], [0.0, 0.05]]]}
    ],
    "objective": {"linear": [1.0, 0.0], "quadratic_diag": [0.0, 0.5]},
    "lambda": 0.25
  })";
}

}  // namespace

TEST_CASE("parse and round trip") {
  const InstanceFile file = rofo::parse_instance(toy_json());
  CHECK(file.domain_x.kind() == rofo::ProximalSetup::Kind::EuclideanBall);
  REQUIRE(file.constraints.size() == 1);
  CHECK(file.constraints[0].K() == 1);
  CHECK(file.lambda == 0.25);
  REQUIRE(file.has_objective());

  const std::string text = rofo::serialize_instance(file);
  const InstanceFile again = rofo::parse_instance(text);
  CHECK(again.constraints[0].A() == file.constraints[0].A());
  CHECK(again.constraints[0].b() == file.constraints[0].b());
  CHECK(again.constraints[0].c() == file.constraints[0].c());
  CHECK(again.constraints[0].P()[0] == file.constraints[0].P()[0]);
  CHECK(*again.objective_linear == *file.objective_linear);
  CHECK(*again.objective_quadratic_diag == *file.objective_quadratic_diag);
  CHECK(again.lambda == file.lambda);
  // serialization is stable byte for byte
  CHECK(rofo::serialize_instance(again) == text);
}

TEST_CASE("strict parsing rejects unknown keys and shape errors") {
  CHECK_THROWS_AS(rofo::parse_instance(R"({"domain_x": {"kind": "simplex", "dimension": 2},
      "constraints": [], "typo": 1})"),
                  std::invalid_argument);
  // unknown key inside a constraint
  CHECK_THROWS_AS(rofo::parse_instance(R"({
      "domain_x": {"kind": "simplex", "dimension": 2},
      "constraints": [{"A": [[1,0],[0,1]], "b": [0,0], "c": 0, "P": [], "extra": 1}]})"),
                  std::invalid_argument);
  // b has the wrong length
  CHECK_THROWS_AS(rofo::parse_instance(R"({
      "domain_x": {"kind": "simplex", "dimension": 2},
      "constraints": [{"A": [[1,0],[0,1]], "b": [0], "c": 0, "P": []}]})"),
                  std::invalid_argument);
  // P shape mismatch
  CHECK_THROWS_AS(rofo::parse_instance(R"({
      "domain_x": {"kind": "simplex", "dimension": 2},
      "constraints": [{"A": [[1,0],[0,1]], "b": [0,0], "c": 0, "P": [[[1,0]]]}]})"),
                  std::invalid_argument);
  // non-finite number
  CHECK_THROWS_AS(rofo::parse_instance(R"({
      "domain_x": {"kind": "ball", "center": [0], "radius": 1},
      "constraints": [{"A": [[1]], "b": [1e999], "c": 0, "P": []}]})"),
                  std::invalid_argument);
  CHECK_THROWS_AS(rofo::parse_instance("not json"), std::invalid_argument);
}

TEST_CASE("to_robust_instance wires the evaluators") {
  const InstanceFile file = rofo::parse_instance(toy_json());
  const rofo::RobustInstance instance = rofo::to_robust_instance(file);
  REQUIRE(instance.constraints.size() == 1);
  CHECK(instance.constraints[0].has_pessimizer());
  REQUIRE(instance.objective.has_value());
  VectorXd x(2);
  x << 0.5, 0.5;
  CHECK(instance.objective->value(x) == doctest::Approx(0.5 + 0.5 * 0.25));
  const VectorXd g = instance.objective->subgrad(x);
  CHECK(g[0] == doctest::Approx(1.0));
  CHECK(g[1] == doctest::Approx(0.5));
}

TEST_CASE("names") {
  CHECK(rofo::strategy_name(rofo::strategy_from_name("ofo")) == "ofo");
  CHECK(rofo::strategy_name(rofo::strategy_from_name("full_pessimization")) ==
        "full_pessimization");
  CHECK_THROWS_AS(rofo::strategy_from_name("bogus"), std::invalid_argument);
  CHECK(rofo::verdict_name(rofo::Verdict::Undecided) == "undecided");
}

TEST_CASE("trace csv reproduces vartheta from the per-constraint columns") {
  const InstanceFile file = rofo::parse_instance(toy_json());
  rofo::RobustInstance instance = rofo::to_robust_instance(file);
  instance.objective.reset();
  rofo::RunConfig config;
  config.epsilon = 0.05;
  config.max_iterations = 40;  // force an undecided run with a full trace
  config.record_trace = true;
  const rofo::SolveOutcome out = rofo::run_ofo(instance, config);
  REQUIRE(out.trace.size() == static_cast<std::size_t>(out.iterations));

  std::ostringstream ss;
  rofo::write_trace_csv(ss, out, config, instance.constraints.size());
  std::istringstream in(ss.str());
  std::string line;
  std::getline(in, line);
  CHECK(line.rfind("# robust-ofo trace seed=", 0) == 0);
  std::getline(in, line);
  CHECK(line ==
        "iteration,theta_t_scheme,vartheta,kappa_circ,kappa_bullet,tau,"
        "per_constraint_avg_0,wall_ms");
  long rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ++rows;
    // vartheta (col 2) equals the single per-constraint average (col 6)
    std::vector<std::string> cells;
    std::stringstream cs(line);
    std::string cell;
    while (std::getline(cs, cell, ',')) cells.push_back(cell);
    REQUIRE(cells.size() == 8);
    CHECK(cells[1] == "uniform_anytime");
    CHECK(std::stod(cells[2]) == std::stod(cells[6]));
  }
  CHECK(rows == out.iterations);
}
