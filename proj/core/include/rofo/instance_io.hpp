#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rofo/framework.hpp"
#include "rofo/robust_qp.hpp"

namespace rofo {

// On-disk robust QP instance:
// {
//   "domain_x":  {"kind": "ball", "center": [...], "radius": r}
//              | {"kind": "simplex", "dimension": n}
//              | {"kind": "box", "lower": [...], "upper": [...]},
//   "constraints": [{"A": [[...], ...], "b": [...], "c": r, "P": [[[...]], ...]}, ...],
//   "objective": {"linear": [...], "quadratic_diag": [...]},   // optional
//   "lambda": r                                                 // optional
// }
// Parsing is strict: unknown keys, shape mismatches, or non-finite numbers
// are rejected with the offending location.
struct InstanceFile {
  ProximalSetup domain_x;
  std::vector<RobustQpConstraint> constraints;
  std::optional<VectorXd> objective_linear;
  std::optional<VectorXd> objective_quadratic_diag;
  double lambda = 0.0;

  bool has_objective() const {
    return objective_linear.has_value() || objective_quadratic_diag.has_value();
  }
};

InstanceFile read_instance(const std::string& path);
InstanceFile parse_instance(const std::string& json_text);
std::string serialize_instance(const InstanceFile& instance);
void write_instance(const InstanceFile& instance, const std::string& path);

// Evaluator form: QP constraints wrapped with their analytic bounds and
// the TRS pessimizer; the optional objective becomes
// l^T x + sum_i d_i x_i^2 with a domain-aware gradient bound.
RobustInstance to_robust_instance(const InstanceFile& file);

// Trace CSV: one `# key=value ...` provenance line, then the header
//   iteration,theta_t_scheme,vartheta,kappa_circ,kappa_bullet,tau,
//   per_constraint_avg_0..m-1,wall_ms
// and one row per iteration.
void write_trace_csv(std::ostream& os, const SolveOutcome& outcome,
                     const RunConfig& config, std::size_t num_constraints);
void write_trace_csv(const std::string& path, const SolveOutcome& outcome,
                     const RunConfig& config, std::size_t num_constraints);

std::string strategy_name(Strategy s);
Strategy strategy_from_name(const std::string& name);
std::string verdict_name(Verdict v);

}  // namespace rofo
