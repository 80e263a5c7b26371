#include "rofo/instance_io.hpp"

#include <cmath>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace rofo {
namespace {

using nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw std::invalid_argument("instance: " + where + ": " + what);
}

void check_keys(const ordered_json& obj, const std::string& where,
                const std::set<std::string>& allowed) {
  if (!obj.is_object()) fail(where, "expected an object");
  for (const auto& item : obj.items()) {
    if (!allowed.count(item.key())) fail(where, "unknown key '" + item.key() + "'");
  }
}

double get_number(const ordered_json& j, const std::string& where) {
  if (!j.is_number()) fail(where, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(where, "non-finite number");
  return v;
}

VectorXd get_vector(const ordered_json& j, const std::string& where) {
  if (!j.is_array()) fail(where, "expected an array of numbers");
  VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    v[static_cast<Eigen::Index>(i)] = get_number(j[i], where + "[" + std::to_string(i) + "]");
  }
  return v;
}

MatrixXd get_matrix(const ordered_json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) fail(where, "expected a non-empty array of rows");
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  if (cols == 0) fail(where, "expected non-empty rows");
  MatrixXd m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < j.size(); ++r) {
    const std::string rw = where + "[" + std::to_string(r) + "]";
    if (!j[r].is_array() || j[r].size() != cols) fail(rw, "ragged matrix rows");
    for (std::size_t c = 0; c < cols; ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          get_number(j[r][c], rw + "[" + std::to_string(c) + "]");
    }
  }
  return m;
}

ordered_json vector_json(const VectorXd& v) {
  ordered_json out = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

ordered_json matrix_json(const MatrixXd& m) {
  ordered_json out = ordered_json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(std::move(row));
  }
  return out;
}

ProximalSetup parse_domain(const ordered_json& j) {
  if (!j.is_object() || !j.contains("kind")) fail("domain_x", "missing 'kind'");
  if (!j["kind"].is_string()) fail("domain_x.kind", "expected a string");
  const std::string kind = j["kind"].get<std::string>();
  if (kind == "ball") {
    check_keys(j, "domain_x", {"kind", "center", "radius"});
    if (!j.contains("center") || !j.contains("radius")) {
      fail("domain_x", "ball needs center and radius");
    }
    return ProximalSetup::euclidean_ball(get_vector(j["center"], "domain_x.center"),
                                         get_number(j["radius"], "domain_x.radius"));
  }
  if (kind == "simplex") {
    check_keys(j, "domain_x", {"kind", "dimension"});
    if (!j.contains("dimension")) fail("domain_x", "simplex needs dimension");
    if (!j["dimension"].is_number_integer()) fail("domain_x.dimension", "expected an integer");
    return ProximalSetup::simplex(j["dimension"].get<Eigen::Index>());
  }
  if (kind == "box") {
    check_keys(j, "domain_x", {"kind", "lower", "upper"});
    if (!j.contains("lower") || !j.contains("upper")) fail("domain_x", "box needs lower and upper");
    return ProximalSetup::box(get_vector(j["lower"], "domain_x.lower"),
                              get_vector(j["upper"], "domain_x.upper"));
  }
  fail("domain_x.kind", "unknown kind '" + kind + "'");
}

ordered_json domain_json(const ProximalSetup& s) {
  ordered_json j;
  switch (s.kind()) {
    case ProximalSetup::Kind::EuclideanBall:
      j["kind"] = "ball";
      j["center"] = vector_json(s.center());
      j["radius"] = s.radius();
      break;
    case ProximalSetup::Kind::Simplex:
      j["kind"] = "simplex";
      j["dimension"] = s.dimension();
      break;
    case ProximalSetup::Kind::Box:
      j["kind"] = "box";
      j["lower"] = vector_json(s.lower());
      j["upper"] = vector_json(s.upper());
      break;
  }
  return j;
}

// Largest Euclidean norm over the domain, for objective gradient bounds.
double domain_sup_norm(const ProximalSetup& s) {
  switch (s.kind()) {
    case ProximalSetup::Kind::EuclideanBall:
      return s.center().norm() + s.radius();
    case ProximalSetup::Kind::Simplex:
      return 1.0;
    case ProximalSetup::Kind::Box:
      return s.lower().cwiseAbs().cwiseMax(s.upper().cwiseAbs()).norm();
  }
  return 0.0;
}

std::string scheme_name(const WeightScheme& w) {
  return w.kind == WeightScheme::Kind::UniformAnytime ? "uniform_anytime" : "fixed_horizon";
}

}  // namespace

InstanceFile parse_instance(const std::string& json_text) {
  ordered_json j;
  try {
    j = ordered_json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("instance: JSON parse error: ") + e.what());
  }
  check_keys(j, "$", {"domain_x", "constraints", "objective", "lambda"});
  if (!j.contains("domain_x")) fail("$", "missing 'domain_x'");
  if (!j.contains("constraints")) fail("$", "missing 'constraints'");

  InstanceFile out;
  out.domain_x = parse_domain(j["domain_x"]);
  const Eigen::Index n = out.domain_x.dimension();

  if (!j["constraints"].is_array() || j["constraints"].empty()) {
    fail("constraints", "expected a non-empty array");
  }
  for (std::size_t i = 0; i < j["constraints"].size(); ++i) {
    const std::string where = "constraints[" + std::to_string(i) + "]";
    const ordered_json& cj = j["constraints"][i];
    check_keys(cj, where, {"A", "b", "c", "P"});
    if (!cj.contains("A") || !cj.contains("b") || !cj.contains("c") || !cj.contains("P")) {
      fail(where, "needs A, b, c and P");
    }
    MatrixXd a = get_matrix(cj["A"], where + ".A");
    VectorXd b = get_vector(cj["b"], where + ".b");
    const double c = get_number(cj["c"], where + ".c");
    if (a.cols() != n) fail(where + ".A", "column count must match the domain dimension");
    if (b.size() != n) fail(where + ".b", "length must match the domain dimension");
    std::vector<MatrixXd> p;
    if (!cj["P"].is_array()) fail(where + ".P", "expected an array of matrices");
    for (std::size_t k = 0; k < cj["P"].size(); ++k) {
      MatrixXd pk = get_matrix(cj["P"][k], where + ".P[" + std::to_string(k) + "]");
      if (pk.rows() != a.rows() || pk.cols() != a.cols()) {
        fail(where + ".P[" + std::to_string(k) + "]", "shape must match A");
      }
      p.push_back(std::move(pk));
    }
    out.constraints.emplace_back(std::move(a), std::move(b), c, std::move(p));
  }

  if (j.contains("objective")) {
    const ordered_json& oj = j["objective"];
    check_keys(oj, "objective", {"linear", "quadratic_diag"});
    if (oj.contains("linear")) {
      VectorXd l = get_vector(oj["linear"], "objective.linear");
      if (l.size() != n) fail("objective.linear", "length must match the domain dimension");
      out.objective_linear = std::move(l);
    }
    if (oj.contains("quadratic_diag")) {
      VectorXd d = get_vector(oj["quadratic_diag"], "objective.quadratic_diag");
      if (d.size() != n) {
        fail("objective.quadratic_diag", "length must match the domain dimension");
      }
      if (d.size() > 0 && d.minCoeff() < 0.0) {
        fail("objective.quadratic_diag", "must be componentwise >= 0");
      }
      out.objective_quadratic_diag = std::move(d);
    }
  }
  if (j.contains("lambda")) out.lambda = get_number(j["lambda"], "lambda");
  return out;
}

InstanceFile read_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("instance: cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_instance(ss.str());
}

std::string serialize_instance(const InstanceFile& instance) {
  ordered_json j;
  j["domain_x"] = domain_json(instance.domain_x);
  j["constraints"] = ordered_json::array();
  for (const auto& c : instance.constraints) {
    ordered_json cj;
    cj["A"] = matrix_json(c.A());
    cj["b"] = vector_json(c.b());
    cj["c"] = c.c();
    ordered_json pj = ordered_json::array();
    for (const auto& pk : c.P()) pj.push_back(matrix_json(pk));
    cj["P"] = std::move(pj);
    j["constraints"].push_back(std::move(cj));
  }
  if (instance.has_objective()) {
    ordered_json oj;
    if (instance.objective_linear) oj["linear"] = vector_json(*instance.objective_linear);
    if (instance.objective_quadratic_diag) {
      oj["quadratic_diag"] = vector_json(*instance.objective_quadratic_diag);
    }
    j["objective"] = std::move(oj);
  }
  j["lambda"] = instance.lambda;
  return j.dump(2) + "\n";
}

void write_instance(const InstanceFile& instance, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("instance: cannot write '" + path + "'");
  out << serialize_instance(instance);
}

RobustInstance to_robust_instance(const InstanceFile& file) {
  RobustInstance out;
  out.x_setup = file.domain_x;
  for (const auto& c : file.constraints) out.constraints.push_back(make_robust_constraint(c));
  if (file.has_objective()) {
    const Eigen::Index n = file.domain_x.dimension();
    const VectorXd l = file.objective_linear.value_or(VectorXd::Zero(n));
    const VectorXd d = file.objective_quadratic_diag.value_or(VectorXd::Zero(n));
    ConvexObjective obj;
    obj.value = [l, d](const VectorXd& x) { return l.dot(x) + d.dot(x.cwiseProduct(x)); };
    obj.subgrad = [l, d](const VectorXd& x) { return VectorXd(l + 2.0 * d.cwiseProduct(x)); };
    obj.grad_bound = l.norm() + 2.0 * d.norm() * domain_sup_norm(file.domain_x);
    out.objective = std::move(obj);
  }
  return out;
}

std::string strategy_name(Strategy s) {
  switch (s) {
    case Strategy::Ofo: return "ofo";
    case Strategy::FoPessimization: return "fo_pessimization";
    case Strategy::NominalOracle: return "nominal_oracle";
    case Strategy::FullPessimization: return "full_pessimization";
  }
  return "unknown";
}

Strategy strategy_from_name(const std::string& name) {
  if (name == "ofo") return Strategy::Ofo;
  if (name == "fo_pessimization") return Strategy::FoPessimization;
  if (name == "nominal_oracle") return Strategy::NominalOracle;
  if (name == "full_pessimization") return Strategy::FullPessimization;
  throw std::invalid_argument("unknown strategy '" + name + "'");
}

std::string verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Feasible: return "feasible";
    case Verdict::Infeasible: return "infeasible";
    case Verdict::Undecided: return "undecided";
  }
  return "unknown";
}

void write_trace_csv(std::ostream& os, const SolveOutcome& outcome, const RunConfig& config,
                     std::size_t num_constraints) {
  os << "# robust-ofo trace seed=" << config.seed
     << " strategy=" << strategy_name(config.strategy) << " epsilon=" << config.epsilon
     << " verdict=" << verdict_name(outcome.verdict) << "\n";
  os << "iteration,theta_t_scheme,vartheta,kappa_circ,kappa_bullet,tau";
  for (std::size_t i = 0; i < num_constraints; ++i) os << ",per_constraint_avg_" << i;
  os << ",wall_ms\n";
  os.precision(17);
  const std::string scheme = scheme_name(config.weights);
  for (const auto& rec : outcome.trace) {
    os << rec.iteration << ',' << scheme << ',' << rec.vartheta << ',' << rec.kappa_circ
       << ',' << rec.kappa_bullet << ',' << rec.tau;
    for (Eigen::Index i = 0; i < rec.per_constraint_avg.size(); ++i) {
      os << ',' << rec.per_constraint_avg[i];
    }
    os << ',' << rec.wall_ms << '\n';
  }
}

void write_trace_csv(const std::string& path, const SolveOutcome& outcome,
                     const RunConfig& config, std::size_t num_constraints) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("trace: cannot write '" + path + "'");
  write_trace_csv(out, outcome, config, num_constraints);
}

}  // namespace rofo
