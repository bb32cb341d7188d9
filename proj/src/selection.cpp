#include "enet/selection.hpp"

#include <cmath>
#include <stdexcept>

namespace enet {

void PathSpec::validate() const {
  if (n_lambdas < 1) throw std::invalid_argument("PathSpec: n_lambdas must be >= 1");
  if (ratio <= 0 || ratio > 1)
    throw std::invalid_argument("PathSpec: ratio must be in (0, 1]");
  if (lambda2_fixed < 0)
    throw std::invalid_argument("PathSpec: lambda2_fixed must be >= 0");
}

LambdaPath lambda_path(const ErmProblem& problem, const PathSpec& spec,
                       bool unpenalized_intercept) {
  spec.validate();
  const Eigen::VectorXd g0 =
      problem.risk_gradient(Eigen::VectorXd::Zero(problem.p()));
  double lambda_max = 0.0;
  for (Eigen::Index j = unpenalized_intercept ? 1 : 0; j < g0.size(); ++j)
    lambda_max = std::max(lambda_max, std::abs(g0[j]));

  LambdaPath path;
  const double l2 =
      spec.coupling == Lambda2Coupling::Fixed ? spec.lambda2_fixed : 0.0;
  if (lambda_max <= 0.0) {
    path.degenerate = true;
    path.points.push_back({0.0, l2});
    return path;
  }
  if (spec.n_lambdas == 1) {
    path.points.push_back({lambda_max, l2});
    return path;
  }
  const double log_max = std::log(lambda_max);
  const double log_min = std::log(spec.ratio * lambda_max);
  for (int k = 0; k < spec.n_lambdas; ++k) {
    const double t = static_cast<double>(k) / (spec.n_lambdas - 1);
    path.points.push_back({std::exp(log_max + t * (log_min - log_max)), l2});
  }
  return path;
}

double gic(const ErmProblem& problem, const FitResult& fit) {
  const Eigen::Index n = problem.n();
  if (n < 3) throw std::invalid_argument("gic: needs n >= 3");
  const double fit_term = 2.0 * problem.risk(fit.beta);  // saturated loss = 0
  const double penalty = std::log(std::log(static_cast<double>(n))) *
                         std::log(static_cast<double>(problem.p())) *
                         static_cast<double>(fit.support.size()) / n;
  return fit_term + penalty;
}

SelectionReport select_by_gic(const ErmProblem& problem, const PathSpec& spec,
                              const SolverOptions& options,
                              bool unpenalized_intercept) {
  return select_by_gic(problem, lambda_path(problem, spec, unpenalized_intercept),
                       spec, options, unpenalized_intercept);
}

SelectionReport select_by_gic(const ErmProblem& problem, const LambdaPath& path,
                              const PathSpec& spec, const SolverOptions& options,
                              bool unpenalized_intercept) {
  if (path.points.empty())
    throw std::invalid_argument("select_by_gic: empty path");
  SelectionReport report;

  Eigen::VectorXd warm = Eigen::VectorXd::Zero(problem.p());
  Eigen::Index prev_s = 0;
  double prev_norm2 = 0.0;
  Eigen::VectorXd best_beta;

  for (std::size_t k = 0; k < path.points.size(); ++k) {
    PenaltyConfig penalty;
    penalty.lambda1 = path.points[k].lambda1;
    penalty.lambda2 = path.points[k].lambda2;
    penalty.unpenalized_intercept = unpenalized_intercept;
    if (spec.coupling == Lambda2Coupling::Plugin && prev_s > 0 && prev_norm2 > 0)
      penalty.lambda2 = penalty.lambda1 *
                        std::sqrt(static_cast<double>(prev_s)) /
                        (2.0 * prev_norm2);

    const FitResult fit_k = fit(problem, penalty, options, &warm);
    PathRecord rec;
    rec.lambda1 = penalty.lambda1;
    rec.lambda2 = penalty.lambda2;
    rec.s = static_cast<Eigen::Index>(fit_k.support.size());
    rec.converged = fit_k.converged;
    rec.gic = fit_k.converged ? gic(problem, fit_k)
                              : std::numeric_limits<double>::quiet_NaN();
    report.path.push_back(rec);

    if (fit_k.converged) {
      warm = fit_k.beta;
      prev_s = rec.s;
      prev_norm2 = fit_k.beta.norm();
      if (report.chosen < 0 || rec.gic < report.chosen_gic - 1e-12) {
        report.chosen = static_cast<int>(k);
        report.chosen_gic = rec.gic;
        best_beta = fit_k.beta;
      }
    }
  }
  if (report.chosen < 0)
    throw std::runtime_error("select_by_gic: no path point converged");
  report.beta = std::move(best_beta);
  return report;
}

ThresholdResult threshold(const Eigen::VectorXd& beta_hat, double tau) {
  if (tau < 0) throw std::invalid_argument("threshold: tau must be >= 0");
  ThresholdResult out;
  out.beta = Eigen::VectorXd::Zero(beta_hat.size());
  for (Eigen::Index j = 0; j < beta_hat.size(); ++j) {
    if (std::abs(beta_hat[j]) > tau) {
      out.beta[j] = beta_hat[j];
      out.support.push_back(j);
    }
  }
  return out;
}

double default_threshold(double lambda1, double s0_est, double phi2_est,
                         double c, double multiplier) {
  if (lambda1 <= 0 || s0_est <= 0 || phi2_est <= 0 || c <= 0)
    throw std::invalid_argument("default_threshold: inputs must be positive");
  if (multiplier < 0)
    throw std::invalid_argument("default_threshold: multiplier must be >= 0");
  return multiplier * (36.0 * 8.0 / c) * lambda1 * s0_est / phi2_est;
}

}  // namespace enet
