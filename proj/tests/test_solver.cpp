#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "enet/rng.hpp"
#include "enet/solver.hpp"

using namespace enet;

namespace {

struct Instance {
  Eigen::MatrixXd design;
  Eigen::VectorXd y;
};

Instance random_instance(Eigen::Index n, Eigen::Index p, double sigma,
                         std::uint64_t seed) {
  Rng rng(seed);
  Instance inst;
  inst.design.resize(n, p);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < p; ++j) inst.design(i, j) = rng.uniform(-1, 1);
  Eigen::VectorXd beta(p);
  for (Eigen::Index j = 0; j < p; ++j) beta[j] = rng.uniform(-0.5, 0.5);
  inst.y = inst.design * beta;
  for (Eigen::Index i = 0; i < n; ++i) inst.y[i] += sigma * rng.normal();
  return inst;
}

// independent objective evaluation on the gram form, for grid oracles
struct GramObjective {
  Eigen::MatrixXd gram;
  Eigen::VectorXd xty;
  double y2;
  double lambda1, lambda2;
  double operator()(const Eigen::VectorXd& b) const {
    return b.dot(gram * b) - 2.0 * xty.dot(b) + y2 + lambda1 * b.lpNorm<1>() +
           lambda2 * b.squaredNorm();
  }
};

GramObjective gram_objective(const Instance& inst, double l1, double l2) {
  const double n = static_cast<double>(inst.design.rows());
  return GramObjective{inst.design.transpose() * inst.design / n,
                       inst.design.transpose() * inst.y / n,
                       inst.y.squaredNorm() / n, l1, l2};
}

}  // namespace

TEST_CASE("soft threshold") {
  CHECK(soft_threshold(0.0, 5.0) == 0.0);
  CHECK(soft_threshold(3.0, 1.0) == 2.0);
  CHECK(soft_threshold(-3.0, 1.0) == -2.0);
  CHECK(soft_threshold(0.5, 1.0) == 0.0);
  CHECK_THROWS_AS(soft_threshold(1.0, -0.1), std::invalid_argument);
}

TEST_CASE("l1 ball projection") {
  Eigen::VectorXd v(3);
  v << 3, -1, 0.5;
  const Eigen::VectorXd inside = project_l1_ball(v, 10.0);
  CHECK(inside == v);
  const Eigen::VectorXd proj = project_l1_ball(v, 2.0);
  CHECK(proj.lpNorm<1>() == doctest::Approx(2.0));
  // projection is the closest point: check against a dense grid refinement
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::VectorXd w(3);
    for (int j = 0; j < 3; ++j) w[j] = proj[j] + 0.05 * rng.normal();
    if (w.lpNorm<1>() <= 2.0) CHECK((w - v).norm() >= (proj - v).norm() - 1e-9);
  }
}

TEST_CASE("objective matches an independently coded sum") {
  const Instance inst = random_instance(30, 4, 0.5, 99);
  const ErmProblem problem(inst.design, inst.y, LossKind::Quadratic);
  PenaltyConfig penalty;
  penalty.lambda1 = 0.13;
  penalty.lambda2 = 0.07;
  Rng rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd b(4);
    for (int j = 0; j < 4; ++j) b[j] = rng.uniform(-2, 2);
    double risk = 0.0;
    for (Eigen::Index i = 0; i < inst.y.size(); ++i) {
      const double r = inst.y[i] - inst.design.row(i).dot(b);
      risk += r * r;
    }
    const double expected = risk / inst.y.size() + 0.13 * b.lpNorm<1>() +
                            0.07 * b.squaredNorm();
    CHECK(objective_value(problem, penalty, b) ==
          doctest::Approx(expected).epsilon(1e-12));
  }
  PenaltyConfig bare;
  Eigen::VectorXd zero = Eigen::VectorXd::Zero(4);
  CHECK(objective_value(problem, bare, zero) ==
        doctest::Approx(inst.y.squaredNorm() / inst.y.size()));
}

TEST_CASE("lambda1 above lambda_max yields the zero solution") {
  const Instance inst = random_instance(40, 6, 0.4, 123);
  const ErmProblem problem(inst.design, inst.y, LossKind::Quadratic);
  const Eigen::VectorXd g0 =
      problem.risk_gradient(Eigen::VectorXd::Zero(6));
  PenaltyConfig penalty;
  penalty.lambda1 = g0.cwiseAbs().maxCoeff() * 1.0001;
  const FitResult result = fit(problem, penalty);
  CHECK(result.converged);
  CHECK(result.beta.isZero());
  CHECK(kkt_residual(problem, penalty, result.beta) == 0.0);
}

TEST_CASE("unpenalized fit matches the normal equations") {
  const Instance inst = random_instance(100, 5, 0.5, 2024);
  const ErmProblem problem(inst.design, inst.y, LossKind::Quadratic);
  PenaltyConfig penalty;  // lambda1 = lambda2 = 0
  SolverOptions options;
  options.tol = 1e-12;
  const FitResult result = fit(problem, penalty, options);
  const Eigen::VectorXd ls =
      (inst.design.transpose() * inst.design)
          .ldlt()
          .solve(inst.design.transpose() * inst.y);
  CHECK(result.converged);
  CHECK((result.beta - ls).norm() / ls.norm() <= 1e-8);
}

TEST_CASE("p=2 fit reaches the brute-force grid minimum") {
  const Instance inst = random_instance(20, 2, 0.3, 7);
  const GramObjective obj = gram_objective(inst, 0.1, 0.05);
  const ErmProblem problem(inst.design, inst.y, LossKind::Quadratic);
  PenaltyConfig penalty;
  penalty.lambda1 = 0.1;
  penalty.lambda2 = 0.05;
  const FitResult result = fit(problem, penalty);

  double grid_min = std::numeric_limits<double>::infinity();
  Eigen::VectorXd b(2);
  for (double b1 = -2.0; b1 <= 2.0; b1 += 1e-3) {
    for (double b2 = -2.0; b2 <= 2.0; b2 += 1e-3) {
      b << b1, b2;
      grid_min = std::min(grid_min, obj(b));
    }
  }
  CHECK(result.objective <= grid_min + 1e-4);
  // the grid value at the solver's solution agrees with the solver objective
  CHECK(obj(result.beta) == doctest::Approx(result.objective).epsilon(1e-12));
}

TEST_CASE("KKT residual contract") {
  const Instance inst = random_instance(50, 8, 0.6, 31);
  const ErmProblem problem(inst.design, inst.y, LossKind::Quadratic);
  PenaltyConfig penalty;
  penalty.lambda1 = 0.05;
  penalty.lambda2 = 0.02;
  SolverOptions options;
  options.tol = 1e-8;
  const FitResult result = fit(problem, penalty, options);
  CHECK(result.converged);
  CHECK(result.kkt_residual <= 1e-8);

  // independent recomputation of the certificate
  const Eigen::VectorXd g =
      problem.risk_gradient(result.beta) + 2.0 * penalty.lambda2 * result.beta;
  double resid = 0.0;
  for (Eigen::Index j = 0; j < result.beta.size(); ++j) {
    if (result.beta[j] != 0.0)
      resid = std::max(resid, std::abs(g[j] + penalty.lambda1 *
                                                  (result.beta[j] > 0 ? 1 : -1)));
    else
      resid = std::max(resid, std::max(std::abs(g[j]) - penalty.lambda1, 0.0));
  }
  CHECK(std::abs(resid - result.kkt_residual) <= 1e-10);
  CHECK(std::abs(resid - kkt_residual(problem, penalty, result.beta)) <= 1e-14);
}

TEST_CASE("KKT residual at a grid minimizer is bounded by the grid step") {
  const Instance inst = random_instance(25, 2, 0.4, 262);
  const double l1 = 0.08, l2 = 0.03;
  const GramObjective obj = gram_objective(inst, l1, l2);
  const double step = 1e-3;
  Eigen::VectorXd best(2);
  double best_v = std::numeric_limits<double>::infinity();
  Eigen::VectorXd b(2);
  for (double b1 = -2.0; b1 <= 2.0; b1 += step) {
    for (double b2 = -2.0; b2 <= 2.0; b2 += step) {
      b << b1, b2;
      const double v = obj(b);
      if (v < best_v) {
        best_v = v;
        best = b;
      }
    }
  }
  const ErmProblem problem(inst.design, inst.y, LossKind::Quadratic);
  PenaltyConfig penalty;
  penalty.lambda1 = l1;
  penalty.lambda2 = l2;
  const double lip = problem.risk_lipschitz() + 2.0 * l2;
  // the grid point sits within one step of the true minimizer per
  // coordinate, so the stationarity violation is at most ~L * step
  CHECK(kkt_residual(problem, penalty, best) <= 2.0 * lip * step);
}

TEST_CASE("augmented-design equivalence for the quadratic elastic net") {
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    const Instance inst = random_instance(40, 6, 0.5, seed);
    const double lambda1 = 0.08, lambda2 = 0.04;
    const Eigen::Index n = inst.y.size(), p = 6;

    const ErmProblem problem(inst.design, inst.y, LossKind::Quadratic);
    PenaltyConfig penalty;
    penalty.lambda1 = lambda1;
    penalty.lambda2 = lambda2;
    SolverOptions options;
    options.tol = 1e-11;
    const FitResult direct = fit(problem, penalty, options);

    Eigen::MatrixXd aug(n + p, p);
    aug.topRows(n) = inst.design;
    aug.bottomRows(p) =
        std::sqrt(static_cast<double>(n) * lambda2) *
        Eigen::MatrixXd::Identity(p, p);
    Eigen::VectorXd y_aug = Eigen::VectorXd::Zero(n + p);
    y_aug.head(n) = inst.y;
    const ErmProblem aug_problem(aug, y_aug, LossKind::Quadratic);
    PenaltyConfig aug_penalty;  // pure l1 at the rescaled level
    aug_penalty.lambda1 = lambda1 * n / static_cast<double>(n + p);
    const FitResult augmented = fit(aug_problem, aug_penalty, options);

    CHECK((direct.beta - augmented.beta).lpNorm<Eigen::Infinity>() <= 1e-6);
  }
}

TEST_CASE("permutation equivariance") {
  const Instance inst = random_instance(60, 5, 0.4, 404);
  const ErmProblem problem(inst.design, inst.y, LossKind::Quadratic);
  PenaltyConfig penalty;
  penalty.lambda1 = 0.06;
  penalty.lambda2 = 0.03;
  const FitResult base = fit(problem, penalty);

  std::vector<Eigen::Index> perm = {3, 0, 4, 1, 2};
  Eigen::MatrixXd permuted(inst.design.rows(), 5);
  for (Eigen::Index j = 0; j < 5; ++j)
    permuted.col(j) = inst.design.col(perm[j]);
  const ErmProblem permuted_problem(permuted, inst.y, LossKind::Quadratic);
  const FitResult shuffled = fit(permuted_problem, penalty);
  for (Eigen::Index j = 0; j < 5; ++j)
    CHECK(shuffled.beta[j] == doctest::Approx(base.beta[perm[j]]).epsilon(1e-7));
}

TEST_CASE("objective is non-increasing along accepted iterates") {
  const Instance inst = random_instance(80, 12, 0.8, 55);
  const ErmProblem problem(inst.design, inst.y, LossKind::Quadratic);
  PenaltyConfig penalty;
  penalty.lambda1 = 0.02;
  penalty.lambda2 = 0.01;
  SolverOptions options;
  options.record_objective_trace = true;
  const FitResult result = fit(problem, penalty, options);
  REQUIRE(result.objective_trace.size() > 2);
  for (std::size_t k = 1; k < result.objective_trace.size(); ++k)
    CHECK(result.objective_trace[k] <=
          result.objective_trace[k - 1] +
              1e-10 * (1.0 + std::abs(result.objective_trace[k - 1])));
}

TEST_CASE("objective is convex along random secants") {
  const Instance inst = random_instance(30, 4, 0.5, 606);
  const ErmProblem problem(inst.design, inst.y, LossKind::Quadratic);
  PenaltyConfig penalty;
  penalty.lambda1 = 0.1;
  penalty.lambda2 = 0.05;
  Rng rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    Eigen::VectorXd a(4), b(4);
    for (int j = 0; j < 4; ++j) {
      a[j] = rng.uniform(-2, 2);
      b[j] = rng.uniform(-2, 2);
    }
    const double t = rng.uniform();
    CHECK(objective_value(problem, penalty, t * a + (1 - t) * b) <=
          t * objective_value(problem, penalty, a) +
              (1 - t) * objective_value(problem, penalty, b) + 1e-12);
  }
}

TEST_CASE("logistic fit converges and rejects bad input") {
  Rng rng(21);
  const Eigen::Index n = 200, p = 4;
  Eigen::MatrixXd design(n, p);
  Eigen::VectorXd y(n);
  Eigen::VectorXd beta_true(p);
  beta_true << 1.0, -1.0, 0.0, 0.5;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) design(i, j) = rng.uniform(-1, 1);
    const double f = design.row(i).dot(beta_true);
    y[i] = rng.bernoulli(1.0 / (1.0 + std::exp(-f))) ? 1.0 : 0.0;
  }
  const ErmProblem problem(design, y, LossKind::Logistic);
  PenaltyConfig penalty;
  penalty.lambda1 = 0.01;
  penalty.lambda2 = 0.005;
  const FitResult result = fit(problem, penalty);
  CHECK(result.converged);
  CHECK(result.kkt_residual <= 1e-8);
  CHECK(result.beta[0] > 0.0);  // recovers the sign pattern
  CHECK(result.beta[1] < 0.0);

  Eigen::VectorXd bad_y = y;
  bad_y[0] = 0.5;
  CHECK_THROWS_AS(ErmProblem(design, bad_y, LossKind::Logistic),
                  std::invalid_argument);
  Eigen::MatrixXd bad_design = design;
  bad_design(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(ErmProblem(bad_design, y, LossKind::Quadratic),
                  std::invalid_argument);
}

TEST_CASE("l1-ball constrained fit is feasible with a certified optimum") {
  const Instance inst = random_instance(30, 2, 0.2, 909);
  const ErmProblem problem(inst.design, inst.y, LossKind::Quadratic);
  PenaltyConfig penalty;
  penalty.lambda1 = 0.01;
  penalty.lambda2 = 0.0;
  const double G = 0.2;  // small enough to bind
  penalty.ell1_radius = G;
  const FitResult result = fit(problem, penalty);
  CHECK(result.converged);
  CHECK(result.beta.lpNorm<1>() <= G + 1e-12);
  CHECK(result.kkt_residual <= 1e-8);

  // grid oracle over the feasible set
  const GramObjective obj = gram_objective(inst, 0.01, 0.0);
  double grid_min = std::numeric_limits<double>::infinity();
  Eigen::VectorXd b(2);
  for (double b1 = -G; b1 <= G; b1 += 1e-3) {
    for (double b2 = -G; b2 <= G; b2 += 1e-3) {
      if (std::abs(b1) + std::abs(b2) > G) continue;
      b << b1, b2;
      grid_min = std::min(grid_min, obj(b));
    }
  }
  CHECK(result.objective <= grid_min + 1e-4);
}

TEST_CASE("unpenalized intercept escapes shrinkage") {
  Rng rng(3);
  const Eigen::Index n = 100;
  Eigen::MatrixXd design(n, 3);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    design(i, 0) = 1.0;
    design(i, 1) = rng.uniform(-1, 1);
    design(i, 2) = rng.uniform(-1, 1);
    y[i] = 5.0 + 0.1 * rng.normal();  // response dominated by the intercept
  }
  const ErmProblem problem(design, y, LossKind::Quadratic);
  PenaltyConfig penalty;
  penalty.lambda1 = 10.0;  // kills penalized coordinates
  penalty.unpenalized_intercept = true;
  const FitResult result = fit(problem, penalty);
  CHECK(result.converged);
  CHECK(result.beta[0] == doctest::Approx(y.mean()).epsilon(1e-6));
  CHECK(result.beta[1] == 0.0);
  CHECK(result.beta[2] == 0.0);
}
