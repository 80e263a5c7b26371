#include "rofo/robust_qp.hpp"

#include <cmath>
#include <memory>
#include <mutex>
#include <stdexcept>

namespace rofo {
namespace {

constexpr double kPsdFloor = -1e-9;
constexpr double kHardCaseRel = 1e-12;

double eval_with(const RobustQpConstraint::QuadForm& qf, double lam, const VectorXd& u) {
  return u.dot(qf.Q * u) + 2.0 * qf.r.dot(u) + qf.s + lam * (1.0 - u.squaredNorm());
}

VectorXd grad_u_with(const RobustQpConstraint::QuadForm& qf, double lam, const VectorXd& u) {
  return 2.0 * (qf.Q * u - lam * u) + 2.0 * qf.r;
}

VectorXd grad_x_with(const RobustQpConstraint& c, const VectorXd& x, const VectorXd& u,
                     const MaxEigen& top) {
  const Eigen::Index k = c.K();
  MatrixXd m = c.A();
  for (Eigen::Index j = 0; j < k; ++j) m += u[j] * c.P()[static_cast<std::size_t>(j)];
  VectorXd g = 2.0 * (m.transpose() * (m * x));
  const double res = 1.0 - u.squaredNorm();
  if (k > 0 && res > 0.0) {
    MatrixXd w = MatrixXd::Zero(c.A().rows(), c.A().cols());
    for (Eigen::Index j = 0; j < k; ++j) {
      w += top.vector[j] * c.P()[static_cast<std::size_t>(j)];
    }
    g += 2.0 * res * (w.transpose() * (w * x));
  }
  g -= c.b();
  return g;
}

// The solver loops hit eval/grad_u/grad_x at the same x back to back; one
// memoized (Q_x, top-eigen) slot per constraint removes the repeat
// decompositions.  Guarded so constraints stay shareable across threads.
struct QuadFormCache {
  std::mutex mu;
  bool valid = false;
  VectorXd x;
  RobustQpConstraint::QuadForm qf;
  MaxEigen top;
};

template <typename Fn>
auto with_cached_form(const std::shared_ptr<const RobustQpConstraint>& qp,
                      const std::shared_ptr<QuadFormCache>& cache, const VectorXd& x,
                      Fn&& fn) {
  std::lock_guard<std::mutex> lock(cache->mu);
  if (!cache->valid || cache->x.size() != x.size() || cache->x != x) {
    cache->qf = qp->quad_form(x);
    cache->top = max_eigenvalue(cache->qf.Q);
    cache->x = x;
    cache->valid = true;
  }
  return fn(cache->qf, cache->top);
}

}  // namespace

RobustQpConstraint::RobustQpConstraint(MatrixXd a, VectorXd b, double c,
                                       std::vector<MatrixXd> p)
    : a_(std::move(a)), b_(std::move(b)), c_(c), p_(std::move(p)) {
  if (a_.cols() != b_.size()) {
    throw std::invalid_argument("RobustQpConstraint: A/b dimension mismatch");
  }
  for (const auto& pk : p_) {
    if (pk.rows() != a_.rows() || pk.cols() != a_.cols()) {
      throw std::invalid_argument("RobustQpConstraint: P_k shape must match A");
    }
  }
  for (const auto& pk : p_) {
    sigma2_ += pk.squaredNorm();
    chi_ = std::max(chi_, spectral_norm(pk));
  }
  rho_ = spectral_norm(a_);
  beta_ = b_.norm();
}

double RobustQpConstraint::grad_u_bound() const {
  const double sigma = std::sqrt(sigma2_);
  return 2.0 * (sigma2_ + sigma * rho_);
}

double RobustQpConstraint::grad_x_bound() const {
  const double sigma = std::sqrt(sigma2_);
  const double root_k = std::sqrt(static_cast<double>(K()));
  const double base = rho_ + root_k * sigma;
  return 4.0 * base * base + beta_;
}

RobustQpConstraint::QuadForm RobustQpConstraint::quad_form(const VectorXd& x) const {
  if (x.size() != n()) throw std::invalid_argument("quad_form: x dimension mismatch");
  const Eigen::Index k = K();
  MatrixXd px(a_.rows(), k);
  for (Eigen::Index j = 0; j < k; ++j) px.col(j) = p_[static_cast<std::size_t>(j)] * x;
  const VectorXd ax = a_ * x;
  QuadForm out;
  out.Q = px.transpose() * px;
  out.r = px.transpose() * ax;
  out.s = ax.squaredNorm() - b_.dot(x) - c_;
  return out;
}

double qp_eval(const RobustQpConstraint& c, const VectorXd& x, const VectorXd& u) {
  if (u.size() != c.K()) throw std::invalid_argument("qp_eval: u dimension mismatch");
  const double unorm2 = u.squaredNorm();
  if (unorm2 > (1.0 + 1e-9) * (1.0 + 1e-9)) {
    throw std::invalid_argument("qp_eval: u outside the unit ball");
  }
  const auto qf = c.quad_form(x);
  const double lam = c.K() == 0 ? 0.0 : max_eigenvalue(qf.Q).value;
  return u.dot(qf.Q * u) + 2.0 * qf.r.dot(u) + qf.s + lam * (1.0 - unorm2);
}

VectorXd qp_grad_u(const RobustQpConstraint& c, const VectorXd& x, const VectorXd& u) {
  const auto qf = c.quad_form(x);
  const double lam = c.K() == 0 ? 0.0 : max_eigenvalue(qf.Q).value;
  return 2.0 * (qf.Q * u - lam * u) + 2.0 * qf.r;
}

VectorXd qp_grad_x(const RobustQpConstraint& c, const VectorXd& x, const VectorXd& u) {
  const Eigen::Index k = c.K();
  MatrixXd m = c.A();
  for (Eigen::Index j = 0; j < k; ++j) m += u[j] * c.P()[static_cast<std::size_t>(j)];
  VectorXd g = 2.0 * (m.transpose() * (m * x));
  const double res = 1.0 - u.squaredNorm();
  if (k > 0 && res > 0.0) {
    const auto qf = c.quad_form(x);
    const MaxEigen top = max_eigenvalue(qf.Q);
    MatrixXd w = MatrixXd::Zero(c.A().rows(), c.A().cols());
    for (Eigen::Index j = 0; j < k; ++j) {
      w += top.vector[j] * c.P()[static_cast<std::size_t>(j)];
    }
    g += 2.0 * res * (w.transpose() * (w * x));
  }
  g -= c.b();
  return g;
}

TrsResult trs_max(const MatrixXd& q, const VectorXd& r, double s, double tol) {
  if (q.rows() != q.cols() || q.rows() != r.size()) {
    throw std::invalid_argument("trs_max: dimension mismatch");
  }
  const Eigen::Index k = q.rows();
  if (k == 0) return TrsResult{VectorXd(), s};

  const SymmetricEigen eig = jacobi_eigen(q);
  const double scale = std::max(1.0, q.norm());
  if (eig.values[0] < kPsdFloor * scale) {
    throw std::invalid_argument("trs_max: Q is indefinite beyond the PSD floor");
  }
  const double lam_max = eig.values[k - 1];
  const VectorXd rt = eig.vectors.transpose() * r;

  // First index of the top eigenvalue block (ties keep the lowest original
  // index, so the pick is deterministic).
  const double tie_tol = 1e-12 * std::max(1.0, std::abs(lam_max));
  Eigen::Index top_start = k - 1;
  while (top_start > 0 && eig.values[top_start - 1] >= lam_max - tie_tol) --top_start;

  double r_top_norm2 = 0.0;
  for (Eigen::Index j = top_start; j < k; ++j) r_top_norm2 += rt[j] * rt[j];
  const double r_norm = r.norm();

  const auto coeff_norm2 = [&](double mu) {
    double h = 0.0;
    for (Eigen::Index j = 0; j < k; ++j) {
      const double d = mu - eig.values[j];
      h += (rt[j] * rt[j]) / (d * d);
    }
    return h;
  };

  VectorXd p = VectorXd::Zero(k);
  const bool hard_candidate = std::sqrt(r_top_norm2) <= kHardCaseRel * std::max(r_norm, 1e-300);
  bool hard = false;
  if (hard_candidate) {
    double h_limit = 0.0;
    for (Eigen::Index j = 0; j < top_start; ++j) {
      const double d = lam_max - eig.values[j];
      h_limit += (rt[j] * rt[j]) / (d * d);
    }
    hard = h_limit <= 1.0;
    if (hard) {
      for (Eigen::Index j = 0; j < top_start; ++j) {
        p[j] = rt[j] / (lam_max - eig.values[j]);
      }
      // Reach the boundary along the first top eigenvector.
      p[top_start] = std::sqrt(std::max(0.0, 1.0 - h_limit));
    }
  }

  if (!hard) {
    // Secular equation  sum_j rt_j^2 / (mu - lam_j)^2 = 1  on (lam_max, inf).
    // Newton on 1/sqrt(h) - 1 (nearly linear in mu), safeguarded by
    // bisection on a sign-changing bracket.
    double lo = lam_max;                // h(lo+) >= 1
    double hi = lam_max + rt.norm();    // h(hi) <= 1
    if (hi <= lo) hi = lo + 1.0;        // r == 0 handled by the hard case
    double mu = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
      const double h = coeff_norm2(mu);
      const double norm_p = std::sqrt(h);
      if (std::abs(norm_p - 1.0) <= std::min(tol, 1e-12) || hi - lo <= 1e-16 * std::max(1.0, std::abs(hi))) {
        break;
      }
      if (norm_p > 1.0) lo = mu; else hi = mu;
      double dh = 0.0;
      for (Eigen::Index j = 0; j < k; ++j) {
        const double d = mu - eig.values[j];
        dh += (rt[j] * rt[j]) / (d * d * d);
      }
      dh *= -2.0;
      // psi(mu) = 1/sqrt(h) - 1, psi'(mu) = -dh / (2 h^(3/2)).
      const double psi = 1.0 / norm_p - 1.0;
      const double dpsi = -dh / (2.0 * h * norm_p);
      double next = mu - psi / dpsi;
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      mu = next;
    }
    for (Eigen::Index j = 0; j < k; ++j) p[j] = rt[j] / (mu - eig.values[j]);
  }

  VectorXd u = eig.vectors * p;
  const double un = u.norm();
  if (un > 1e-300) u /= un;  // exactly on the boundary
  TrsResult out;
  out.u = u;
  out.value = u.dot(q * u) + 2.0 * r.dot(u) + s;
  return out;
}

double QpInstanceBounds::sigma() const { return std::sqrt(sigma2); }

double QpInstanceBounds::grad_u_bound() const { return 2.0 * (sigma2 + sigma() * rho); }

double QpInstanceBounds::grad_x_bound(Eigen::Index k) const {
  const double base = rho + std::sqrt(static_cast<double>(k)) * sigma();
  return 4.0 * base * base + beta;
}

QpInstanceBounds qp_bounds(const std::vector<RobustQpConstraint>& constraints) {
  QpInstanceBounds out;
  for (const auto& c : constraints) {
    out.sigma2 = std::max(out.sigma2, c.sigma2());
    out.chi = std::max(out.chi, c.chi());
    out.rho = std::max(out.rho, c.rho());
    out.beta = std::max(out.beta, c.beta());
  }
  return out;
}

RobustConstraint make_robust_constraint(RobustQpConstraint constraint) {
  auto qp = std::make_shared<const RobustQpConstraint>(std::move(constraint));
  RobustConstraint out;
  const Eigen::Index k = qp->K();
  // K = 0 still needs a one-dimensional noise slot for the online players.
  const Eigen::Index u_dim = std::max<Eigen::Index>(k, 1);
  out.u_setup = ProximalSetup::euclidean_ball(VectorXd::Zero(u_dim), 1.0);
  out.grad_u_bound = k == 0 ? 0.0 : qp->grad_u_bound();
  out.grad_x_bound = qp->grad_x_bound();
  if (k == 0) {
    out.eval = [qp](const VectorXd& x, const VectorXd&) {
      return qp_eval(*qp, x, VectorXd());
    };
    out.grad_x = [qp](const VectorXd& x, const VectorXd&) {
      return qp_grad_x(*qp, x, VectorXd());
    };
    out.grad_u = [](const VectorXd&, const VectorXd&) { return VectorXd::Zero(1); };
    out.pessimize = [qp](const VectorXd& x, double) {
      return PessimizeResult{VectorXd::Zero(1), qp_eval(*qp, x, VectorXd())};
    };
    return out;
  }
  auto cache = std::make_shared<QuadFormCache>();
  out.eval = [qp, cache](const VectorXd& x, const VectorXd& u) {
    if (u.squaredNorm() > (1.0 + 1e-9) * (1.0 + 1e-9)) {
      throw std::invalid_argument("qp_eval: u outside the unit ball");
    }
    return with_cached_form(qp, cache, x, [&](const auto& qf, const MaxEigen& top) {
      return eval_with(qf, top.value, u);
    });
  };
  out.grad_x = [qp, cache](const VectorXd& x, const VectorXd& u) {
    return with_cached_form(qp, cache, x, [&](const auto&, const MaxEigen& top) {
      return grad_x_with(*qp, x, u, top);
    });
  };
  out.grad_u = [qp, cache](const VectorXd& x, const VectorXd& u) {
    return with_cached_form(qp, cache, x, [&](const auto& qf, const MaxEigen& top) {
      return grad_u_with(qf, top.value, u);
    });
  };
  out.pessimize = [qp, cache](const VectorXd& x, double tol) {
    return with_cached_form(qp, cache, x, [&](const auto& qf, const MaxEigen&) {
      const TrsResult trs = trs_max(qf.Q, qf.r, qf.s, std::min(tol, 1e-10));
      return PessimizeResult{trs.u, trs.value};
    });
  };
  return out;
}

}  // namespace rofo
