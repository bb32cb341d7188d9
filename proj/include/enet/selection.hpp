#pragma once

#include <Eigen/Core>
#include <vector>

#include "enet/solver.hpp"

namespace enet {

enum class Lambda2Coupling { None, Plugin, Fixed };

struct PathSpec {
  int n_lambdas = 40;
  double ratio = 0.01;  // lambda_min / lambda_max
  Lambda2Coupling coupling = Lambda2Coupling::None;
  double lambda2_fixed = 0.0;
  void validate() const;
};

struct PathPoint {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
};

struct LambdaPath {
  std::vector<PathPoint> points;
  bool degenerate = false;  // all-zero gradient at 0: single-point path
};

// lambda_max = max_j |g_j(0)| over penalized coordinates, log-spaced down
// to ratio * lambda_max. Plugin lambda2 values are resolved during the
// path fit (they need the previous point's estimate) and start at 0.
LambdaPath lambda_path(const ErmProblem& problem, const PathSpec& spec,
                       bool unpenalized_intercept = false);

// GIC(lambda) = 2 [ P_n rho_{beta} - P_n rho_saturated ]
//             + log(log n) log(p) s_lambda / n,
// with zero saturated loss for both built-in losses. Needs n >= 3.
double gic(const ErmProblem& problem, const FitResult& fit);

struct PathRecord {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double gic = 0.0;
  Eigen::Index s = 0;
  bool converged = false;
};

struct SelectionReport {
  std::vector<PathRecord> path;
  int chosen = -1;
  Eigen::VectorXd beta;  // estimate at the chosen point
  double chosen_gic = 0.0;
  // thresholding
  double threshold = 0.0;
  Eigen::VectorXd beta_thresholded;
  std::vector<Eigen::Index> support_thresholded;
  // recovery vs a known truth
  int true_positives = 0;
  int false_positives = 0;
  bool screening = false;  // support(beta) contains the true support
  bool exact = false;      // thresholded support equals the true support
};

// Fits every path point (warm-started), scores GIC, picks the minimizer;
// ties break toward larger lambda1. Non-converged points are flagged and
// excluded; if all fail, throws.
SelectionReport select_by_gic(const ErmProblem& problem, const LambdaPath& path,
                              const PathSpec& spec,
                              const SolverOptions& options = {},
                              bool unpenalized_intercept = false);

// convenience: builds the path from the spec first
SelectionReport select_by_gic(const ErmProblem& problem, const PathSpec& spec,
                              const SolverOptions& options = {},
                              bool unpenalized_intercept = false);

struct ThresholdResult {
  Eigen::VectorXd beta;
  std::vector<Eigen::Index> support;
};

// beta_j 1{|beta_j| > tau}.
ThresholdResult threshold(const Eigen::VectorXd& beta_hat, double tau);

// l1-rate threshold (36 * 8 / c) * lambda1 * s0 / phi2, scaled by the
// multiplier. Deliberately conservative: it applies the l1 rate to a
// per-coordinate decision.
double default_threshold(double lambda1, double s0_est, double phi2_est,
                         double c, double multiplier = 1.0);

}  // namespace enet
