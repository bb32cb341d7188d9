#pragma once

#include <Eigen/Core>
#include <optional>
#include <vector>

#include "enet/loss.hpp"

namespace enet {

// Elastic net penalty lambda1 ||beta||_1 + lambda2 ||beta||_2^2 plus an
// optional l1-ball feasible set Phi = {||beta||_1 <= G}. The ball is
// opt-in; by default Phi = R^p.
struct PenaltyConfig {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  std::optional<double> ell1_radius;
  bool unpenalized_intercept = false;  // column 0 escapes both penalties
  void validate() const;
};

struct SolverOptions {
  double tol = 1e-8;  // KKT residual target
  int max_iter = 100000;
  bool acceleration = true;
  double step_init = 0.0;  // 0 = 1 / spectral bound
  double backtrack_factor = 0.5;
  int kkt_check_every = 10;
  bool record_objective_trace = false;
  void validate() const;
};

struct FitResult {
  Eigen::VectorXd beta;
  double objective = 0.0;
  double kkt_residual = 0.0;
  int iterations = 0;
  std::vector<Eigen::Index> support;
  bool converged = false;
  std::vector<double> objective_trace;  // accepted iterates, when recorded
};

double soft_threshold(double z, double t);

Eigen::VectorXd project_l1_ball(const Eigen::VectorXd& v, double radius);

// Smooth empirical-risk oracle for a fixed design and response. The
// quadratic loss keeps gram-form caches so per-iteration cost is O(p^2)
// regardless of n.
class ErmProblem {
 public:
  ErmProblem(Eigen::MatrixXd design, Eigen::VectorXd y, LossKind kind);

  Eigen::Index n() const { return y_.size(); }
  Eigen::Index p() const { return design_.cols(); }
  LossKind loss() const { return kind_; }
  const Eigen::MatrixXd& design() const { return design_; }
  const Eigen::VectorXd& y() const { return y_; }

  double risk(const Eigen::VectorXd& beta) const;  // (1/n) sum rho
  Eigen::VectorXd risk_gradient(const Eigen::VectorXd& beta) const;
  // Lipschitz bound of the risk gradient (excluding the 2*lambda2 term).
  double risk_lipschitz() const { return lip_; }

 private:
  Eigen::MatrixXd design_;
  Eigen::VectorXd y_;
  LossKind kind_;
  Eigen::MatrixXd gram_;  // design' design / n
  Eigen::VectorXd xty_;   // design' y / n
  double y2_ = 0.0;
  double lip_ = 0.0;
};

double objective_value(const ErmProblem& problem, const PenaltyConfig& penalty,
                       const Eigen::VectorXd& beta);

// max_j violation of the first-order conditions; 0 exactly at a
// minimizer. With the l1 ball active, the multiplier is folded into the
// effective l1 level by a one-dimensional convex search.
double kkt_residual(const ErmProblem& problem, const PenaltyConfig& penalty,
                    const Eigen::VectorXd& beta);

FitResult fit(const ErmProblem& problem, const PenaltyConfig& penalty,
              const SolverOptions& options = {},
              const Eigen::VectorXd* warm_start = nullptr);

}  // namespace enet
