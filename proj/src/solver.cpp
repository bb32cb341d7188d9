#include "enet/solver.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace enet {

void PenaltyConfig::validate() const {
  if (lambda1 < 0 || lambda2 < 0)
    throw std::invalid_argument("PenaltyConfig: negative penalty level");
  if (ell1_radius && *ell1_radius <= 0)
    throw std::invalid_argument("PenaltyConfig: ell1_radius must be > 0");
  if (ell1_radius && unpenalized_intercept)
    throw std::invalid_argument(
        "PenaltyConfig: l1 ball with unpenalized intercept is not supported");
}

void SolverOptions::validate() const {
  if (tol <= 0) throw std::invalid_argument("SolverOptions: tol must be > 0");
  if (max_iter <= 0) throw std::invalid_argument("SolverOptions: max_iter must be > 0");
  if (backtrack_factor <= 0 || backtrack_factor >= 1)
    throw std::invalid_argument("SolverOptions: backtrack_factor must be in (0,1)");
}

double soft_threshold(double z, double t) {
  if (t < 0) throw std::invalid_argument("soft_threshold: t must be >= 0");
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

Eigen::VectorXd project_l1_ball(const Eigen::VectorXd& v, double radius) {
  if (radius <= 0) throw std::invalid_argument("project_l1_ball: radius must be > 0");
  if (v.lpNorm<1>() <= radius) return v;
  std::vector<double> u(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) u[i] = std::abs(v[i]);
  std::sort(u.begin(), u.end(), std::greater<double>());
  double cum = 0.0, theta = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    cum += u[j];
    const double t = (cum - radius) / static_cast<double>(j + 1);
    if (u[j] - t > 0)
      theta = t;
    else
      break;
  }
  Eigen::VectorXd out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i)
    out[i] = soft_threshold(v[i], theta);
  return out;
}

namespace {

double sigmoid(double t) {
  if (t >= 0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

double softplus(double t) {
  return t > 0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
}

}  // namespace

ErmProblem::ErmProblem(Eigen::MatrixXd design, Eigen::VectorXd y, LossKind kind)
    : design_(std::move(design)), y_(std::move(y)), kind_(kind) {
  if (design_.rows() != y_.size())
    throw std::invalid_argument("ErmProblem: design/response row mismatch");
  if (design_.rows() == 0) throw std::invalid_argument("ErmProblem: empty sample");
  if (!design_.allFinite() || !y_.allFinite())
    throw std::invalid_argument("ErmProblem: non-finite input");
  if (kind_ == LossKind::Logistic)
    for (Eigen::Index i = 0; i < y_.size(); ++i)
      if (y_[i] != 0.0 && y_[i] != 1.0)
        throw std::invalid_argument("ErmProblem: logistic loss needs y in {0,1}");

  const double n = static_cast<double>(design_.rows());
  gram_ = design_.transpose() * design_ / n;
  xty_ = design_.transpose() * y_ / n;
  y2_ = y_.squaredNorm() / n;

  double lam_max;
  if (gram_.rows() <= 1024) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram_,
                                                      Eigen::EigenvaluesOnly);
    lam_max = es.eigenvalues().maxCoeff();
  } else {
    // power iteration fallback
    Eigen::VectorXd v = Eigen::VectorXd::Ones(gram_.rows()).normalized();
    lam_max = 0.0;
    for (int it = 0; it < 100; ++it) {
      Eigen::VectorXd w = gram_ * v;
      lam_max = w.norm();
      if (lam_max == 0.0) break;
      v = w / lam_max;
    }
    lam_max *= 1.01;
  }
  lip_ = kind_ == LossKind::Quadratic ? 2.0 * lam_max : 0.25 * lam_max;
}

double ErmProblem::risk(const Eigen::VectorXd& beta) const {
  if (beta.size() != p()) throw std::invalid_argument("risk: dimension mismatch");
  if (kind_ == LossKind::Quadratic)
    return beta.dot(gram_ * beta) - 2.0 * xty_.dot(beta) + y2_;
  const Eigen::VectorXd f = design_ * beta;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < f.size(); ++i)
    acc += softplus(f[i]) - y_[i] * f[i];
  return acc / f.size();
}

Eigen::VectorXd ErmProblem::risk_gradient(const Eigen::VectorXd& beta) const {
  if (beta.size() != p())
    throw std::invalid_argument("risk_gradient: dimension mismatch");
  if (kind_ == LossKind::Quadratic) return 2.0 * (gram_ * beta - xty_);
  Eigen::VectorXd f = design_ * beta;
  for (Eigen::Index i = 0; i < f.size(); ++i) f[i] = sigmoid(f[i]) - y_[i];
  return design_.transpose() * f / f.size();
}

namespace {

double penalty_l1(const PenaltyConfig& penalty, const Eigen::VectorXd& beta) {
  double s = beta.lpNorm<1>();
  if (penalty.unpenalized_intercept) s -= std::abs(beta[0]);
  return s;
}

double penalty_l2sq(const PenaltyConfig& penalty, const Eigen::VectorXd& beta) {
  double s = beta.squaredNorm();
  if (penalty.unpenalized_intercept) s -= beta[0] * beta[0];
  return s;
}

// Smooth part: empirical risk + lambda2 ||beta_pen||^2.
double smooth_value(const ErmProblem& problem, const PenaltyConfig& penalty,
                    const Eigen::VectorXd& beta) {
  return problem.risk(beta) + penalty.lambda2 * penalty_l2sq(penalty, beta);
}

Eigen::VectorXd smooth_gradient(const ErmProblem& problem,
                                const PenaltyConfig& penalty,
                                const Eigen::VectorXd& beta) {
  Eigen::VectorXd g = problem.risk_gradient(beta) + 2.0 * penalty.lambda2 * beta;
  if (penalty.unpenalized_intercept)
    g[0] -= 2.0 * penalty.lambda2 * beta[0];
  return g;
}

// prox of step * (lambda1 ||.||_1 + indicator of the l1 ball): soft
// threshold, then project. The composition is exact because both maps
// shrink magnitudes coordinate-wise with a common threshold.
Eigen::VectorXd prox(const PenaltyConfig& penalty, const Eigen::VectorXd& v,
                     double step) {
  Eigen::VectorXd out(v.size());
  const double t = step * penalty.lambda1;
  for (Eigen::Index j = 0; j < v.size(); ++j) {
    const bool skip = penalty.unpenalized_intercept && j == 0;
    out[j] = skip ? v[j] : soft_threshold(v[j], t);
  }
  if (penalty.ell1_radius) out = project_l1_ball(out, *penalty.ell1_radius);
  return out;
}

double residual_at_level(const PenaltyConfig& penalty, const Eigen::VectorXd& g,
                         const Eigen::VectorXd& beta, double lambda1) {
  double r = 0.0;
  for (Eigen::Index j = 0; j < beta.size(); ++j) {
    const bool skip = penalty.unpenalized_intercept && j == 0;
    double rj;
    if (skip) {
      rj = std::abs(g[j]);
    } else if (beta[j] != 0.0) {
      rj = std::abs(g[j] + lambda1 * (beta[j] > 0 ? 1.0 : -1.0));
    } else {
      rj = std::max(std::abs(g[j]) - lambda1, 0.0);
    }
    r = std::max(r, rj);
  }
  return r;
}

}  // namespace

double objective_value(const ErmProblem& problem, const PenaltyConfig& penalty,
                       const Eigen::VectorXd& beta) {
  penalty.validate();
  return problem.risk(beta) + penalty.lambda1 * penalty_l1(penalty, beta) +
         penalty.lambda2 * penalty_l2sq(penalty, beta);
}

double kkt_residual(const ErmProblem& problem, const PenaltyConfig& penalty,
                    const Eigen::VectorXd& beta) {
  penalty.validate();
  const Eigen::VectorXd g = smooth_gradient(problem, penalty, beta);
  const bool active = penalty.ell1_radius &&
                      penalty_l1(penalty, beta) >= *penalty.ell1_radius * (1.0 - 1e-10);
  if (!active) return residual_at_level(penalty, g, beta, penalty.lambda1);
  // Active constraint: stationarity holds with lambda1 + mu for some
  // multiplier mu >= 0. residual_at_level is convex in the level, so a
  // ternary search recovers the certified minimum.
  double lo = penalty.lambda1;
  double hi = penalty.lambda1 + g.cwiseAbs().maxCoeff() + 1.0;
  for (int it = 0; it < 200; ++it) {
    const double m1 = lo + (hi - lo) / 3.0;
    const double m2 = hi - (hi - lo) / 3.0;
    if (residual_at_level(penalty, g, beta, m1) <=
        residual_at_level(penalty, g, beta, m2))
      hi = m2;
    else
      lo = m1;
  }
  return residual_at_level(penalty, g, beta, 0.5 * (lo + hi));
}

FitResult fit(const ErmProblem& problem, const PenaltyConfig& penalty,
              const SolverOptions& options, const Eigen::VectorXd* warm_start) {
  penalty.validate();
  options.validate();

  const Eigen::Index p = problem.p();
  Eigen::VectorXd x = warm_start ? *warm_start : Eigen::VectorXd::Zero(p);
  if (x.size() != p) throw std::invalid_argument("fit: warm start dimension mismatch");
  if (penalty.ell1_radius) x = project_l1_ball(x, *penalty.ell1_radius);

  const double lip = problem.risk_lipschitz() + 2.0 * penalty.lambda2;
  double step = options.step_init > 0 ? options.step_init
                                      : (lip > 0 ? 1.0 / lip : 1.0);

  double obj_x = objective_value(problem, penalty, x);
  Eigen::VectorXd yv = x;
  double t = 1.0;

  FitResult result;
  if (options.record_objective_trace) result.objective_trace.push_back(obj_x);

  // one backtracked proximal step from `base`
  auto prox_step = [&](const Eigen::VectorXd& base, Eigen::VectorXd& z_out) {
    const Eigen::VectorXd g = smooth_gradient(problem, penalty, base);
    const double h_base = smooth_value(problem, penalty, base);
    for (;;) {
      Eigen::VectorXd z = prox(penalty, base - step * g, step);
      const Eigen::VectorXd d = z - base;
      const double h_z = smooth_value(problem, penalty, z);
      const double quad = h_base + g.dot(d) + d.squaredNorm() / (2.0 * step);
      if (h_z <= quad + 1e-12 * (1.0 + std::abs(h_base)) || step < 1e-18) {
        z_out = std::move(z);
        return h_z;
      }
      step *= options.backtrack_factor;
    }
  };

  int k = 0;
  bool converged = false;
  double resid = std::numeric_limits<double>::infinity();
  for (; k < options.max_iter; ++k) {
    Eigen::VectorXd z;
    double h_z = prox_step(yv, z);
    double obj_z = h_z + penalty.lambda1 * penalty_l1(penalty, z);

    if (options.acceleration && obj_z > obj_x + 1e-12 * (1.0 + std::abs(obj_x))) {
      // momentum overshoot: restart from the last accepted iterate
      yv = x;
      t = 1.0;
      h_z = prox_step(yv, z);
      obj_z = h_z + penalty.lambda1 * penalty_l1(penalty, z);
    }

    if (options.acceleration) {
      const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      yv = z + ((t - 1.0) / t_next) * (z - x);
      t = t_next;
    } else {
      yv = z;
    }
    x = std::move(z);
    obj_x = obj_z;
    if (options.record_objective_trace) result.objective_trace.push_back(obj_z);

    if ((k + 1) % options.kkt_check_every == 0 || k + 1 == options.max_iter) {
      resid = kkt_residual(problem, penalty, x);
      if (resid <= options.tol) {
        converged = true;
        ++k;
        break;
      }
    }
  }

  if (!std::isfinite(resid)) resid = kkt_residual(problem, penalty, x);
  result.beta = std::move(x);
  result.objective = objective_value(problem, penalty, result.beta);
  result.kkt_residual = resid;
  result.iterations = k;
  result.converged = converged;
  for (Eigen::Index j = 0; j < result.beta.size(); ++j)
    if (result.beta[j] != 0.0) result.support.push_back(j);
  return result;
}

}  // namespace enet
