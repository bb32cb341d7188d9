#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "enet/oracle.hpp"
#include "enet/rng.hpp"

using namespace enet;

namespace {

ConjugateSpec closed_form(double c) {
  return ConjugateSpec{MarginSpec{c, 1.0}, ConjugateSpec::Eval::ClosedForm, 0, 0,
                       nullptr};
}

ConjugateSpec numeric_grid(double c, double u_max, double u_step) {
  return ConjugateSpec{MarginSpec{c, 1.0}, ConjugateSpec::Eval::NumericGrid,
                       u_max, u_step, nullptr};
}

Eigen::MatrixXd random_psd(Eigen::Index p, std::uint64_t seed, double ridge) {
  Rng rng(seed);
  Eigen::MatrixXd a(p, p);
  for (Eigen::Index i = 0; i < p; ++i)
    for (Eigen::Index j = 0; j < p; ++j) a(i, j) = rng.normal();
  return a.transpose() * a / p + ridge * Eigen::MatrixXd::Identity(p, p);
}

}  // namespace

TEST_CASE("convex conjugate closed form") {
  CHECK(conjugate_value(closed_form(1.0), 2.0) == doctest::Approx(1.0));
  CHECK(conjugate_value(closed_form(1.0), 0.0) == 0.0);
  CHECK(conjugate_value(closed_form(1.0 / 36.0), 1.0) == doctest::Approx(9.0));
  CHECK_THROWS_AS(conjugate_value(closed_form(1.0), -0.1), std::invalid_argument);
}

TEST_CASE("numeric conjugate matches the closed form within 1e-6") {
  for (double c : {1.0, 1.0 / 36.0}) {
    // maximizer u* = v/(2c); keep it inside the grid
    const ConjugateSpec numeric = numeric_grid(c, 2.5 / (2.0 * c) + 1.0, 1e-3);
    for (int k = 0; k <= 100; ++k) {
      const double v = 2.0 * k / 100.0;
      CHECK(std::abs(conjugate_value(numeric, v) - v * v / (4.0 * c)) <= 1e-6);
    }
  }
}

TEST_CASE("Fenchel inequality holds on random pairs") {
  Rng rng(2718);
  const double c = 0.37;
  const ConjugateSpec spec = closed_form(c);
  for (int trial = 0; trial < 10000; ++trial) {
    const double u = rng.uniform(0.0, 10.0);
    const double v = rng.uniform(0.0, 10.0);
    CHECK(u * v <= c * u * u + conjugate_value(spec, v) + 1e-12);
  }
}

TEST_CASE("conjugate properties: non-negative, non-decreasing, convex") {
  const ConjugateSpec numeric = numeric_grid(0.5, 30.0, 1e-3);
  double prev = -1.0;
  std::vector<double> values;
  for (int k = 0; k <= 60; ++k) {
    const double v = 0.1 * k;
    const double h = conjugate_value(numeric, v);
    CHECK(h >= -1e-12);
    CHECK(h >= prev - 1e-9);
    prev = h;
    values.push_back(h);
  }
  for (std::size_t k = 1; k + 1 < values.size(); ++k)
    CHECK(values[k] <= 0.5 * (values[k - 1] + values[k + 1]) + 1e-9);
}

TEST_CASE("L_n formula") {
  // coupled choice lambda2 = lambda1 sqrt(s) / (2 ||beta_S||): L_n = 6 sqrt(s)
  const double norm2 = 1.7;
  const double lambda1 = 0.3;
  const Eigen::Index s = 9;
  const double lambda2 = lambda1 * 3.0 / (2.0 * norm2);
  CHECK(compute_L_n(s, lambda1, lambda2, norm2) == doctest::Approx(18.0));
  CHECK(compute_L_n(16, 0.7, 0.0, 5.0) == doctest::Approx(12.0));
  CHECK(compute_L_n(4, 1.0, 0.5, 1.0) == doctest::Approx(3.0 * (2.0 + 1.0)));
  CHECK_THROWS_AS(compute_L_n(4, 0.0, 0.1, 1.0), std::invalid_argument);
}

TEST_CASE("ARE on the identity is exactly 1") {
  Rng rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::Index p = 4 + static_cast<Eigen::Index>(rng.next_u64() % 8);
    const Eigen::MatrixXd sigma = Eigen::MatrixXd::Identity(p, p);
    std::vector<Eigen::Index> S;
    for (Eigen::Index j = 0; j < p; ++j)
      if (rng.bernoulli(0.4)) S.push_back(j);
    if (S.empty()) S.push_back(0);
    const double L_n = rng.uniform(0.5, 20.0);
    const AreResult are = adaptive_restricted_eigenvalue(sigma, S, L_n);
    CHECK(std::abs(are.estimate - 1.0) <= 1e-6);
    CHECK(are.lower_bound == doctest::Approx(1.0));
    CHECK_FALSE(are.degenerate);
  }
}

TEST_CASE("ARE ordering: lambda_min lower bound never exceeds the estimate") {
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::MatrixXd sigma = random_psd(6, 100 + trial, 0.05);
    std::vector<Eigen::Index> S = {0, 3};
    const AreResult are = adaptive_restricted_eigenvalue(sigma, S, 4.0);
    CHECK(are.lower_bound <= are.estimate + 1e-9);
    CHECK(are.phi2 == doctest::Approx(std::max(are.lower_bound, are.estimate)));
  }
  Eigen::MatrixXd diag = Eigen::Vector3d(0.3, 1.0, 2.0).asDiagonal();
  const AreResult are = adaptive_restricted_eigenvalue(diag, {1}, 2.0);
  CHECK(are.lower_bound == doctest::Approx(0.3));
  CHECK(are.estimate >= 0.3 - 1e-9);
}

TEST_CASE("ARE matches a dense cone grid at p=3, |S|=1") {
  const Eigen::MatrixXd sigma = random_psd(3, 42, 0.1);
  const double L_n = 1.5;
  const AreResult are = adaptive_restricted_eigenvalue(sigma, {0}, L_n);

  // beta = (1, u, v) with |u| + |v| <= L_n (global sign symmetry)
  double grid_min = std::numeric_limits<double>::infinity();
  const int steps = 601;
  for (int a = 0; a < steps; ++a) {
    const double u = -L_n + 2.0 * L_n * a / (steps - 1);
    for (int b = 0; b < steps; ++b) {
      const double v = -L_n + 2.0 * L_n * b / (steps - 1);
      if (std::abs(u) + std::abs(v) > L_n) continue;
      Eigen::Vector3d beta(1.0, u, v);
      grid_min = std::min(grid_min, beta.dot(sigma * beta));
    }
  }
  CHECK(std::abs(are.estimate - grid_min) <= 1e-3);
}

TEST_CASE("ARE input validation") {
  Eigen::MatrixXd not_psd = -Eigen::MatrixXd::Identity(3, 3);
  CHECK_THROWS_AS(adaptive_restricted_eigenvalue(not_psd, {0}, 1.0),
                  std::invalid_argument);
  Eigen::MatrixXd asym = Eigen::MatrixXd::Identity(3, 3);
  asym(0, 1) = 0.5;
  CHECK_THROWS_AS(adaptive_restricted_eigenvalue(asym, {0}, 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      adaptive_restricted_eigenvalue(Eigen::MatrixXd::Identity(3, 3), {}, 1.0),
      std::invalid_argument);
}

TEST_CASE("concentration level zeta") {
  // independent re-implementation of the same display
  auto reimpl = [](double D, double K, double n, double p, double t) {
    const double lam = std::sqrt(2.0 * std::log(2.0 * p) / n) +
                       K * std::log(2.0 * p) / (3.0 * n);
    return D * (4.0 * lam + t * K / (3.0 * n) +
                std::sqrt(2.0 * t / n) * std::sqrt(1.0 + 8.0 * lam));
  };
  const ConcentrationLevel level =
      lambda0_concentration(2.0, 1.0, 1000, 100, std::log(100.0));
  CHECK(level.zeta ==
        doctest::Approx(reimpl(2.0, 1.0, 1000, 100, std::log(100.0)))
            .epsilon(1e-14));
  CHECK(level.Lambda == doctest::Approx(std::sqrt(2.0 * std::log(200.0) / 1000) +
                                        std::log(200.0) / 3000.0));

  // monotone decreasing along a doubling-n sequence
  double prev = std::numeric_limits<double>::infinity();
  for (Eigen::Index n = 100; n <= 102400; n *= 2) {
    const double z = lambda0_concentration(2.0, 1.0, n, 50, std::log(50.0)).zeta;
    CHECK(z < prev);
    prev = z;
  }

  CHECK(lambda0_concentration(0.0, 1.0, 100, 10, 1.0).zeta == 0.0);
  CHECK_THROWS_AS(lambda0_concentration(1.0, 1.0, 100, 1, 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(lambda0_concentration(1.0, 1.0, 100, 10, 0.0),
                  std::invalid_argument);
  // log(p) > n rejected
  CHECK_THROWS_AS(lambda0_concentration(1.0, 1.0, 2, 100, 1.0),
                  std::invalid_argument);
}

TEST_CASE("empirical process value") {
  DgpConfig dgp;
  dgp.kind = DgpKind::LinearSparse;
  dgp.beta0 = Eigen::VectorXd(2);
  dgp.beta0 << 1.0, -0.5;
  dgp.n = 50;
  dgp.sigma = 0.0;
  dgp.seed = 8;
  BasisSpec basis{BasisKind::Identity, 2, 1.0};
  const LossModel quad{LossKind::Quadratic, {}};
  const Sample s = generate(dgp);
  // zero noise at the truth: every loss is 0 and E rho = 0
  CHECK(empirical_process_value(s, dgp, quad, basis, dgp.beta0) == 0.0);

  dgp.sigma = 0.4;
  dgp.seed = 9;
  const Sample noisy = generate(dgp);
  Eigen::VectorXd beta(2);
  beta << 0.6, 0.1;
  const double v1 = empirical_process_value(noisy, dgp, quad, basis, beta);
  const double v2 = empirical_process_value(noisy, dgp, quad, basis, beta);
  CHECK(v1 == v2);  // deterministic

  // closed-form population term vs a fresh Monte Carlo estimate
  const double closed = population_risk(quad, beta, basis, dgp);
  DgpConfig big = dgp;
  big.n = 1000000;
  big.seed = 77;
  const Sample mc = generate(big);
  double mean = 0.0, mean2 = 0.0;
  for (Eigen::Index i = 0; i < mc.n(); ++i) {
    const double f = mc.x.row(i).dot(beta);
    const double l = (mc.y[i] - f) * (mc.y[i] - f);
    mean += l;
    mean2 += l * l;
  }
  mean /= mc.n();
  mean2 /= mc.n();
  const double se = std::sqrt((mean2 - mean * mean) / mc.n());
  CHECK(std::abs(closed - mean) <= 3.0 * se);
}

namespace {

struct ZmFixture {
  DgpConfig dgp;
  BasisSpec basis{BasisKind::Identity, 2, 1.0};
  LossModel loss{LossKind::Quadratic, {}};
  Sample sample;
  Eigen::VectorXd beta_star;

  ZmFixture() {
    dgp.kind = DgpKind::LinearSparse;
    dgp.beta0 = Eigen::VectorXd(2);
    dgp.beta0 << 0.8, -0.3;
    dgp.n = 40;
    dgp.sigma = 0.5;
    dgp.seed = 19;
    sample = generate(dgp);
    beta_star = dgp.beta0;
  }
};

}  // namespace

TEST_CASE("Z_M estimate basics") {
  const ZmFixture fx;
  CHECK(estimate_Z_M(fx.sample, fx.dgp, fx.loss, fx.basis, fx.beta_star, 0.0) ==
        0.0);
  CHECK_THROWS_AS(
      estimate_Z_M(fx.sample, fx.dgp, fx.loss, fx.basis, fx.beta_star, -1.0),
      std::invalid_argument);
}

TEST_CASE("Z_M is non-decreasing on nested probe sets with shared seeds") {
  const ZmFixture fx;
  const double m_max = 2.0;
  ZmOptions opts;
  opts.seed = 321;
  opts.hill_iters = 0;  // probe sets are nested only without refinement
  for (int k = 1; k <= 16; ++k) opts.radius_grid.push_back(m_max * k / 16.0);
  double prev = 0.0;
  for (double m : {0.5, 1.0, 1.5, 2.0}) {
    const double z =
        estimate_Z_M(fx.sample, fx.dgp, fx.loss, fx.basis, fx.beta_star, m, opts);
    CHECK(z >= prev - 1e-15);
    prev = z;
  }
}

TEST_CASE("Z_M matches a dense grid supremum on a tiny instance") {
  const ZmFixture fx;
  const double M = 0.5;
  ZmOptions opts;
  opts.seed = 99;
  opts.hill_iters = 2000;
  opts.directions = 128;
  const double est =
      estimate_Z_M(fx.sample, fx.dgp, fx.loss, fx.basis, fx.beta_star, M, opts);

  // dense grid over the l1 ball around beta*
  const PopulationRisk pr(fx.loss, fx.basis, fx.dgp);
  const double pop_star = pr.risk(fx.beta_star);
  double emp_star = 0.0;
  for (Eigen::Index i = 0; i < fx.sample.n(); ++i) {
    const double r = fx.sample.y[i] - fx.sample.x.row(i).dot(fx.beta_star);
    emp_star += r * r;
  }
  emp_star /= fx.sample.n();

  double grid_sup = 0.0;
  const int steps = 401;
  for (int a = 0; a < steps; ++a) {
    const double d1 = -M + 2.0 * M * a / (steps - 1);
    for (int b = 0; b < steps; ++b) {
      const double d2 = -M + 2.0 * M * b / (steps - 1);
      if (std::abs(d1) + std::abs(d2) > M) continue;
      Eigen::VectorXd beta = fx.beta_star;
      beta[0] += d1;
      beta[1] += d2;
      double emp = 0.0;
      for (Eigen::Index i = 0; i < fx.sample.n(); ++i) {
        const double r = fx.sample.y[i] - fx.sample.x.row(i).dot(beta);
        emp += r * r;
      }
      emp /= fx.sample.n();
      grid_sup = std::max(
          grid_sup, std::abs((emp - emp_star) - (pr.risk(beta) - pop_star)));
    }
  }
  CHECK(est >= grid_sup - 1e-3);
  CHECK(est <= grid_sup + 1e-3);
}

namespace {

struct OracleFixture {
  DgpConfig dgp;
  BasisSpec basis{BasisKind::Identity, 5, 1.0};
  LossModel loss{LossKind::Quadratic, {}};
  MarginSpec margin{1.0, 0.5};
  Eigen::MatrixXd sigma;

  OracleFixture() {
    dgp.kind = DgpKind::LinearSparse;
    dgp.beta0 = Eigen::VectorXd::Zero(5);
    dgp.beta0 << 1.0, -1.0, 0.5, 0.0, 0.0;
    dgp.n = 100;
    dgp.sigma = 0.5;
    sigma = population_gram(basis, dgp);
  }
};

}  // namespace

TEST_CASE("oracle search: linear shortcut returns the target") {
  const OracleFixture fx;
  const double lambda1 = 0.5, lambda0 = 0.05;
  const std::vector<std::vector<Eigen::Index>> gamma = {{0, 1, 2}};
  const OracleReport report = oracle_search(gamma, fx.dgp, fx.loss, fx.basis,
                                            lambda1, lambda0, fx.margin, fx.sigma);
  CHECK(report.beta_star.isApprox(fx.dgp.beta0));
  CHECK(report.excess_star == 0.0);
  CHECK(report.s_star == 3);
  CHECK(report.L_n == doctest::Approx(6.0 * std::sqrt(3.0)));
  // coupled rule turns the H argument into 6 lambda1 sqrt(s) / phi
  const double expected_arg =
      6.0 * lambda1 * std::sqrt(3.0) / std::sqrt(report.phi2_star);
  CHECK(report.h_arg == doctest::Approx(expected_arg));
  const double h = expected_arg * expected_arg / 4.0;
  CHECK(report.delta_star == doctest::Approx(h));
  CHECK(report.bound_rhs == doctest::Approx(4.0 * h));
  CHECK(report.m_star * report.lambda0 == doctest::Approx(report.delta_star));
  // identity-law gram: phi^2 = 1/3
  CHECK(report.phi2_star == doctest::Approx(1.0 / 3.0).epsilon(1e-6));
}

TEST_CASE("oracle search: singleton support matches a brute-force grid") {
  DgpConfig dgp;
  dgp.kind = DgpKind::HoelderSmooth;
  dgp.target_id = "kink";
  dgp.smoothness_r = 2.0;
  dgp.n = 100;
  dgp.sigma = 0.3;
  BasisSpec basis{BasisKind::Polynomial, 4, 1.0};
  const LossModel quad{LossKind::Quadratic, {}};
  const MarginSpec margin{1.0, 0.5};
  const Eigen::MatrixXd sigma = population_gram(basis, dgp);
  const double lambda1 = 0.3, lambda0 = 0.03, lambda2 = 0.05;

  OracleSearchOptions opts;
  opts.coupled_lambda2 = false;
  opts.lambda2_fixed = lambda2;
  const std::vector<std::vector<Eigen::Index>> gamma = {{0, 1}};
  const OracleReport report = oracle_search(gamma, dgp, quad, basis, lambda1,
                                            lambda0, margin, sigma, opts);

  // brute force over beta supported on {0, 1}
  const PopulationRisk pr(quad, basis, dgp);
  const double phi = report.phi_star;
  double best = std::numeric_limits<double>::infinity();
  for (double b1 = -1.0; b1 <= 1.0; b1 += 0.005) {
    for (double b2 = -1.0; b2 <= 1.0; b2 += 0.005) {
      Eigen::VectorXd beta = Eigen::VectorXd::Zero(4);
      beta[0] = b1;
      beta[1] = b2;
      const double v =
          (4.0 * lambda1 * std::sqrt(2.0) + 4.0 * lambda2 * beta.norm()) / phi;
      best = std::min(best, 3.0 * pr.excess(beta) + 2.0 * (v * v / 4.0));
    }
  }
  // 2 Delta* is the minimized objective
  CHECK(2.0 * report.delta_star <= best + 1e-4);
  CHECK(2.0 * report.delta_star >= best - 1e-4);
}

TEST_CASE("oracle search: bad-approximation supports are dominated by excess") {
  DgpConfig dgp;
  dgp.kind = DgpKind::HoelderSmooth;
  dgp.target_id = "poly-sin";
  dgp.smoothness_r = 2.0;
  dgp.n = 100;
  dgp.sigma = 0.3;
  BasisSpec basis{BasisKind::Polynomial, 4, 1.0};
  const LossModel quad{LossKind::Quadratic, {}};
  const MarginSpec margin{1.0, 0.5};
  const Eigen::MatrixXd sigma = population_gram(basis, dgp);
  // tiny lambda keeps the estimation term negligible
  const std::vector<std::vector<Eigen::Index>> gamma = {{3}};
  const OracleReport report = oracle_search(gamma, dgp, quad, basis, 1e-4, 1e-5,
                                            margin, sigma);
  CHECK(3.0 * report.excess_star > 100.0 * 2.0 * report.h_value);
  CHECK(2.0 * report.delta_star ==
        doctest::Approx(3.0 * report.excess_star + 2.0 * report.h_value));
  // direct evaluation of the excess at beta*
  CHECK(report.excess_star ==
        doctest::Approx(excess_risk(quad, report.beta_star, basis, dgp))
            .epsilon(1e-9));
}

TEST_CASE("oracle search input validation") {
  const OracleFixture fx;
  CHECK_THROWS_AS(oracle_search({}, fx.dgp, fx.loss, fx.basis, 0.5, 0.05,
                                fx.margin, fx.sigma),
                  std::invalid_argument);
  CHECK_THROWS_AS(oracle_search({{0}}, fx.dgp, fx.loss, fx.basis, 0.0, 0.05,
                                fx.margin, fx.sigma),
                  std::invalid_argument);
}

TEST_CASE("negative control: small lambda puts the sample outside tau") {
  // with lambda1 far below the concentration level the tau threshold
  // Delta* shrinks under the real empirical-process fluctuations, the
  // probe estimate exceeds it, and the inequality itself can fail --
  // off tau, which is exactly what the theorem permits
  DgpConfig dgp;
  dgp.kind = DgpKind::LinearSparse;
  dgp.beta0 = Eigen::VectorXd(3);
  dgp.beta0 << 1.0, -1.0, 0.0;
  dgp.n = 30;
  dgp.sigma = 1.0;
  dgp.seed = 4040;
  BasisSpec basis{BasisKind::Identity, 3, 1.0};
  const LossModel quad{LossKind::Quadratic, {}};
  const MarginSpec margin{1.0, 0.5};
  const Eigen::MatrixXd sigma = population_gram(basis, dgp);
  const double lambda1 = 0.01, lambda0 = lambda1 / 8.0;
  const OracleReport oracle = oracle_search({{0, 1}}, dgp, quad, basis, lambda1,
                                            lambda0, margin, sigma);

  const Sample sample = generate(dgp);
  const double z = estimate_Z_M(sample, dgp, quad, basis, oracle.beta_star,
                                oracle.m_star, {});

  const Eigen::MatrixXd design = design_matrix(basis, sample);
  const ErmProblem problem(design, sample.y, LossKind::Quadratic);
  PenaltyConfig penalty;
  penalty.lambda1 = lambda1;
  penalty.lambda2 = oracle.lambda2;
  const FitResult fitted = fit(problem, penalty);
  const double xi_hat = excess_risk(quad, fitted.beta, basis, dgp);
  const Theorem1Check check =
      check_theorem1(fitted, oracle, lambda1, oracle.lambda2, xi_hat, z);
  CHECK_FALSE(check.tau_member);  // z exceeds lambda0 M* = Delta*
  CHECK(z > check.tau_level);
  CHECK_FALSE(check.holds);  // and the bound indeed breaks off tau
}

TEST_CASE("check_theorem1") {
  const OracleFixture fx;
  const double lambda0 = 0.05;
  const double lambda1 = 8.0 * lambda0;
  const std::vector<std::vector<Eigen::Index>> gamma = {{0, 1, 2}};
  const OracleReport oracle = oracle_search(gamma, fx.dgp, fx.loss, fx.basis,
                                            lambda1, lambda0, fx.margin, fx.sigma);

  // corollary specialization: rhs = 36 lambda1^2 s / (c phi^2)
  const double expected_rhs =
      36.0 * lambda1 * lambda1 * 3.0 / (1.0 * oracle.phi2_star);
  CHECK(oracle.bound_rhs == doctest::Approx(expected_rhs).epsilon(1e-12));

  FitResult fitted;
  fitted.beta = oracle.beta_star;  // beta_hat = beta*
  const Theorem1Check trivial =
      check_theorem1(fitted, oracle, lambda1, oracle.lambda2, 0.0, 0.0);
  CHECK(trivial.holds);
  CHECK(trivial.tau_member);
  CHECK(trivial.lhs == 0.0);

  // z above the tau level excludes tau membership
  const Theorem1Check outside = check_theorem1(
      fitted, oracle, lambda1, oracle.lambda2, 0.0, oracle.delta_star * 1.01);
  CHECK_FALSE(outside.tau_member);

  CHECK_THROWS_AS(
      check_theorem1(fitted, oracle, 7.9 * lambda0, oracle.lambda2, 0.0, 0.0),
      std::invalid_argument);
}
