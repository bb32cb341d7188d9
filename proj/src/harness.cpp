#include "enet/harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <set>
#include <stdexcept>
#include <thread>

#include "enet/oracle.hpp"
#include "enet/rng.hpp"
#include "enet/selection.hpp"

namespace enet {

namespace {

using nlohmann::json;

long long now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

void parallel_for(int tasks, int workers, const std::function<void(int)>& fn) {
  if (workers <= 1 || tasks <= 1) {
    for (int i = 0; i < tasks; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  const int k = std::min(workers, tasks);
  pool.reserve(k);
  for (int w = 0; w < k; ++w)
    pool.emplace_back([&] {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= tasks) return;
        fn(i);
      }
    });
  for (auto& t : pool) t.join();
}

json fraction(int count, int total) {
  if (total == 0) return json{{"value", nullptr}, {"se", nullptr}};
  const double v = static_cast<double>(count) / total;
  return json{{"value", v}, {"se", std::sqrt(v * (1.0 - v) / total)}};
}

json mean_se(const std::vector<double>& xs) {
  if (xs.empty()) return json{{"value", nullptr}, {"se", nullptr}};
  double m = 0.0;
  for (double x : xs) m += x;
  m /= xs.size();
  double v = 0.0;
  for (double x : xs) v += (x - m) * (x - m);
  v = xs.size() > 1 ? v / (xs.size() - 1) : 0.0;
  return json{{"value", m}, {"se", std::sqrt(v / xs.size())}};
}

std::vector<Eigen::Index> true_support_columns(const ExperimentConfig& config) {
  if (!config.dgp.linear_target())
    throw std::invalid_argument("study: gamma=true-support needs a linear target");
  std::vector<Eigen::Index> s0;
  const Eigen::Index off = config.basis.intercept ? 1 : 0;
  for (Eigen::Index j = 0; j < config.dgp.beta0.size(); ++j)
    if (config.dgp.beta0[j] != 0.0) s0.push_back(j + off);
  if (s0.empty()) throw std::invalid_argument("study: beta0 has empty support");
  return s0;
}

// Concentration-based lambda0 for the configured loss. Quadratic fills
// the local Lipschitz context (C_n from the sub-gaussian constants, G
// from the configured l1 radius).
double concentration_lambda0(const ExperimentConfig& config, Eigen::Index n,
                             Eigen::Index p_cols, LossModel& loss, json& detail) {
  const double K = config.basis.sup_bound;
  const double t = std::log(static_cast<double>(p_cols));
  double D;
  if (loss.kind == LossKind::Logistic) {
    D = lipschitz_constant(loss);
  } else {
    const double G = config.penalty.ell1_radius;
    if (G <= 0)
      throw std::invalid_argument(
          "study: quadratic concentration level needs penalty.ell1_radius > 0");
    const SubGaussian sub = subgaussian_constants(config.dgp);
    const double c_n = std::sqrt(2.0 / sub.delta * std::log(static_cast<double>(n)));
    const double f_cn = target_sup_bound(config.dgp, c_n);
    loss.context = LipschitzContext{c_n, f_cn, G, K};
    D = lipschitz_constant(loss);
    detail["C_n"] = c_n;
    detail["F_Cn"] = f_cn;
    detail["D_n_proof_variant"] = lipschitz_constant_proof_variant(loss);
    detail["subgaussian_alpha"] = sub.alpha;
    detail["subgaussian_delta"] = sub.delta;
  }
  const ConcentrationLevel level = lambda0_concentration(D, K, n, p_cols, t);
  detail["D"] = D;
  detail["K"] = K;
  detail["t"] = t;
  detail["Lambda"] = level.Lambda;
  return level.zeta;
}

struct InequalitySetup {
  LossModel loss;
  MarginSpec margin;
  double lambda0 = 0.0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  std::optional<double> phi_radius;
  OracleReport oracle;
  std::shared_ptr<PopulationRisk> excess_eval;
  double curvature_min = 0.0;
  json detail;
};

InequalitySetup build_inequality_setup(const ExperimentConfig& config) {
  InequalitySetup setup;
  const bool logistic = config.dgp.kind == DgpKind::Logistic;
  setup.loss.kind = logistic ? LossKind::Logistic : LossKind::Quadratic;
  setup.margin = margin_constant(setup.loss, config.dgp, config.eta, config.eps0);

  const Eigen::Index p_cols = config.basis.columns();
  setup.lambda0 = concentration_lambda0(config, config.dgp.n, p_cols, setup.loss,
                                        setup.detail);
  switch (config.penalty.rule) {
    case PenaltyRuleKind::Explicit:
      setup.lambda1 = config.penalty.lambda1;
      break;
    case PenaltyRuleKind::LemmaQuad:
      setup.lambda1 = config.penalty.L * setup.lambda0;
      break;
    case PenaltyRuleKind::Scaled:
      setup.lambda1 = config.penalty.scale *
                      std::sqrt(std::log(static_cast<double>(p_cols)) /
                                static_cast<double>(config.dgp.n));
      break;
  }
  if (setup.lambda1 <= 0)
    throw std::invalid_argument("study: resolved lambda1 must be > 0");

  if (!logistic && config.penalty.ell1_radius > 0)
    setup.phi_radius = config.penalty.ell1_radius;

  std::vector<std::vector<Eigen::Index>> gamma;
  if (config.gamma_rule == "true-support") {
    gamma.push_back(true_support_columns(config));
  } else {
    if (config.s_star < 1)
      throw std::invalid_argument("study: gamma=first-sstar needs oracle.s_star >= 1");
    std::vector<Eigen::Index> s;
    const Eigen::Index off = config.basis.intercept ? 1 : 0;
    for (Eigen::Index j = 0; j < config.s_star; ++j) s.push_back(off + j);
    gamma.push_back(std::move(s));
  }

  const Eigen::MatrixXd sigma = population_gram(config.basis, config.dgp);
  OracleSearchOptions oopts;
  oopts.coupled_lambda2 = config.penalty.coupling == CouplingRule::Remark4;
  oopts.lambda2_fixed =
      config.penalty.coupling == CouplingRule::Fixed ? config.penalty.lambda2 : 0.0;
  oopts.risk.mc_size = config.excess_mc;
  oopts.risk.seed = derive_seed(config.master_seed, 0xE5CE55);
  setup.oracle = oracle_search(gamma, config.dgp, setup.loss, config.basis,
                               setup.lambda1, setup.lambda0, setup.margin, sigma,
                               oopts);
  setup.lambda2 = setup.oracle.lambda2;

  if (setup.phi_radius &&
      setup.oracle.beta_star.lpNorm<1>() > *setup.phi_radius * (1.0 + 1e-9))
    throw std::invalid_argument(
        "study: oracle beta* violates the configured ell1_radius");

  if (logistic) {
    const double eps0 =
        config.eps0 > 0 ? config.eps0 : logistic_band_eps0(config.dgp);
    setup.curvature_min = logistic_curvature_min(eps0, config.eta, 801);
    setup.detail["eps0"] = eps0;
    setup.detail["curvature_min"] = setup.curvature_min;
    setup.detail["curvature_floor_ok"] =
        setup.curvature_min >= 2.0 * setup.margin.c - 1e-12;
  }

  RiskEvalOptions ropts;
  ropts.mc_size = config.excess_mc;
  ropts.seed = derive_seed(config.master_seed, 0x51C4);
  setup.excess_eval = std::make_shared<PopulationRisk>(setup.loss, config.basis,
                                                       config.dgp, ropts);
  return setup;
}

json oracle_json(const OracleReport& oracle) {
  json o;
  o["s_star"] = oracle.s_star;
  o["phi2"] = oracle.phi2_star;
  o["phi2_lower"] = oracle.phi2_lower;
  o["phi_star"] = oracle.phi_star;
  o["L_n"] = oracle.L_n;
  o["xi_star"] = oracle.excess_star;
  o["h_arg"] = oracle.h_arg;
  o["h_value"] = oracle.h_value;
  o["delta_star"] = oracle.delta_star;
  o["m_star"] = oracle.m_star;
  o["bound_rhs"] = oracle.bound_rhs;
  o["gamma"] = oracle.gamma_spec;
  o["beta_l1"] = oracle.beta_star.lpNorm<1>();
  o["beta_l2"] = oracle.beta_star.norm();
  return o;
}

json run_inequality_rep(const ExperimentConfig& config,
                        const InequalitySetup& setup, std::uint64_t seed) {
  DgpConfig dgp = config.dgp;
  dgp.seed = seed;
  const Sample sample = generate(dgp);
  const Eigen::MatrixXd design = design_matrix(config.basis, sample);
  const ErmProblem problem(design, sample.y, setup.loss.kind);

  PenaltyConfig penalty;
  penalty.lambda1 = setup.lambda1;
  penalty.lambda2 = setup.lambda2;
  penalty.ell1_radius = setup.phi_radius;
  penalty.unpenalized_intercept = config.basis.intercept;

  const FitResult fitted = fit(problem, penalty, config.solver);
  const double xi_hat = setup.excess_eval->excess(fitted.beta);

  ZmOptions zopts;
  zopts.directions = config.zm_directions;
  zopts.radii = config.zm_radii;
  zopts.hill_iters = config.zm_hill;
  zopts.seed = derive_seed(seed, 0x2A11);
  zopts.ell1_radius = setup.phi_radius;
  zopts.risk.mc_size = config.zm_mc;
  zopts.risk.seed = derive_seed(config.master_seed, 0x90B);
  const double z = estimate_Z_M(sample, dgp, setup.loss, config.basis,
                                setup.oracle.beta_star, setup.oracle.m_star,
                                zopts);

  const Theorem1Check check = check_theorem1(fitted, setup.oracle, setup.lambda1,
                                             setup.lambda2, xi_hat, z);

  json rec;
  rec["lambda0"] = setup.lambda0;
  rec["lambda1"] = setup.lambda1;
  rec["lambda2"] = setup.lambda2;
  rec["oracle"] = oracle_json(setup.oracle);
  {
    const Eigen::VectorXd d = fitted.beta - setup.oracle.beta_star;
    double l2s = 0.0;
    for (Eigen::Index j : setup.oracle.S_star) l2s += d[j] * d[j];
    rec["l1_dist"] = d.lpNorm<1>();
    rec["l2s_dist"] = l2s;
  }
  rec["fit_objective"] = fitted.objective;
  rec["fit_kkt"] = fitted.kkt_residual;
  rec["fit_iterations"] = fitted.iterations;
  rec["fit_support_size"] = fitted.support.size();
  rec["fit_converged"] = fitted.converged;
  rec["xi_hat"] = xi_hat;
  rec["z_est"] = z;
  rec["tau_level"] = check.tau_level;
  rec["tau_member"] = check.tau_member;
  rec["thm1_lhs"] = check.lhs;
  rec["thm1_rhs"] = check.rhs;
  rec["holds"] = check.holds;

  if (config.dgp.linear_target() && config.gamma_rule == "true-support") {
    const double l1_err = (fitted.beta - setup.oracle.beta_star).lpNorm<1>();
    const double lin1_rhs = 4.0 * setup.oracle.h_value / setup.lambda1;
    const double loss1_rhs = 4.0 * setup.oracle.h_value;
    rec["l1_err"] = l1_err;
    rec["corlin_l1_rhs"] = lin1_rhs;
    rec["corlin_l1_holds"] = l1_err <= lin1_rhs + 1e-9;
    rec["corlin_loss_rhs"] = loss1_rhs;
    rec["corlin_loss_holds"] = xi_hat <= loss1_rhs + 1e-9;
    bool screening = true;
    for (Eigen::Index j : setup.oracle.S_star)
      if (fitted.beta[j] == 0.0) screening = false;
    rec["screening"] = screening;
    rec["min_signal"] = [&] {
      double m = std::numeric_limits<double>::infinity();
      for (Eigen::Index j : setup.oracle.S_star)
        m = std::min(m, std::abs(setup.oracle.beta_star[j]));
      return m;
    }();
  }
  return rec;
}

StudyResult run_inequality_study(const ExperimentConfig& config) {
  const InequalitySetup setup = build_inequality_setup(config);

  StudyResult result;
  result.records.resize(config.replications);
  parallel_for(config.replications, config.parallel, [&](int i) {
    ReplicationRecord& rec = result.records[i];
    rec.rep = i;
    rec.seed = derive_seed(config.master_seed, static_cast<std::uint64_t>(i));
    const long long t0 = now_ms();
    try {
      rec.payload = run_inequality_rep(config, setup, rec.seed);
      rec.ok = true;
    } catch (const std::exception& e) {
      rec.ok = false;
      rec.error = e.what();
    }
    rec.wall_ms = now_ms() - t0;
  });

  int tau = 0, holds_given_tau = 0, violations = 0, corlin_l1 = 0, corlin_loss = 0,
      corlin_total = 0, holds_all = 0;
  std::vector<double> xi_hats, l1_errs;
  for (const auto& rec : result.records) {
    if (!rec.ok) {
      ++result.aborted;
      continue;
    }
    const bool is_tau = rec.payload.at("tau_member").get<bool>();
    const bool is_holds = rec.payload.at("holds").get<bool>();
    if (is_tau) {
      ++tau;
      if (is_holds) ++holds_given_tau;
      if (!is_holds) ++violations;
      if (rec.payload.contains("corlin_l1_holds")) {
        ++corlin_total;
        if (rec.payload.at("corlin_l1_holds").get<bool>()) ++corlin_l1;
        if (rec.payload.at("corlin_loss_holds").get<bool>()) ++corlin_loss;
      }
    }
    if (is_holds) ++holds_all;
    xi_hats.push_back(rec.payload.at("xi_hat").get<double>());
    if (rec.payload.contains("l1_err"))
      l1_errs.push_back(rec.payload.at("l1_err").get<double>());
  }
  const int ok_count = static_cast<int>(result.records.size()) - result.aborted;

  json& s = result.summary;
  s["study"] = study_name(config.study);
  s["replications"] = config.replications;
  s["aborted"] = result.aborted;
  s["lambda0"] = setup.lambda0;
  s["lambda1"] = setup.lambda1;
  s["lambda2"] = setup.lambda2;
  s["margin_c"] = setup.margin.c;
  s["eta"] = setup.margin.eta;
  s["concentration"] = setup.detail;
  s["oracle"] = oracle_json(setup.oracle);
  s["fraction_tau"] = fraction(tau, ok_count);
  s["fraction_holds"] = fraction(holds_all, ok_count);
  s["fraction_holds_given_tau"] = fraction(holds_given_tau, tau);
  s["violations_tau_and_not_holds"] = violations;
  if (corlin_total > 0) {
    s["fraction_corlin_l1_holds_given_tau"] = fraction(corlin_l1, corlin_total);
    s["fraction_corlin_loss_holds_given_tau"] = fraction(corlin_loss, corlin_total);
  }
  s["mean_xi_hat"] = mean_se(xi_hats);
  if (!l1_errs.empty()) s["mean_l1_err"] = mean_se(l1_errs);
  s["config"] = config.raw;
  return result;
}

StudyResult run_gic_study(const ExperimentConfig& config) {
  const std::vector<Eigen::Index> s0 = true_support_columns(config);
  const std::set<Eigen::Index> s0_set(s0.begin(), s0.end());
  const bool logistic = config.dgp.kind == DgpKind::Logistic;
  LossModel loss{logistic ? LossKind::Logistic : LossKind::Quadratic, {}};
  const double margin_c =
      logistic ? margin_constant(loss, config.dgp, config.eta, config.eps0).c : 1.0;

  StudyResult result;
  result.records.resize(config.replications);
  parallel_for(config.replications, config.parallel, [&](int i) {
    ReplicationRecord& rec = result.records[i];
    rec.rep = i;
    rec.seed = derive_seed(config.master_seed, static_cast<std::uint64_t>(i));
    const long long t0 = now_ms();
    try {
      DgpConfig dgp = config.dgp;
      dgp.seed = rec.seed;
      const Sample sample = generate(dgp);
      const Eigen::MatrixXd design = design_matrix(config.basis, sample);
      const ErmProblem problem(design, sample.y, loss.kind);
      SelectionReport report = select_by_gic(problem, config.path, config.solver,
                                             config.basis.intercept);

      const PathRecord& chosen = report.path[report.chosen];
      std::set<Eigen::Index> selected;
      for (Eigen::Index j = 0; j < report.beta.size(); ++j)
        if (report.beta[j] != 0.0) selected.insert(j);
      bool screening = true;
      for (Eigen::Index j : s0)
        if (!selected.count(j)) screening = false;

      double tau_thresh = 0.0;
      double phi2_hat = 0.0;
      if (!selected.empty() && chosen.lambda1 > 0) {
        // plug-in phi^2 from the empirical gram on the selected support
        const Eigen::MatrixXd gram =
            design.transpose() * design / static_cast<double>(design.rows());
        std::vector<Eigen::Index> sel(selected.begin(), selected.end());
        AreOptions aopts;
        aopts.seed = derive_seed(rec.seed, 0xA3E);
        const AreResult are = adaptive_restricted_eigenvalue(
            gram, sel, 6.0 * std::sqrt(static_cast<double>(sel.size())), aopts);
        phi2_hat = are.phi2;
        if (!are.degenerate)
          tau_thresh = default_threshold(chosen.lambda1,
                                         static_cast<double>(sel.size()), phi2_hat,
                                         margin_c, config.threshold_multiplier);
      }
      const ThresholdResult thr = threshold(report.beta, tau_thresh);
      int tp = 0, fp = 0;
      for (Eigen::Index j : thr.support)
        s0_set.count(j) ? ++tp : ++fp;
      const bool exact =
          tp == static_cast<int>(s0.size()) && fp == 0;

      json payload;
      payload["chosen_index"] = report.chosen;
      payload["chosen_lambda1"] = chosen.lambda1;
      payload["chosen_lambda2"] = chosen.lambda2;
      payload["chosen_gic"] = report.chosen_gic;
      payload["s_selected"] = selected.size();
      payload["screening"] = screening;
      payload["phi2_hat"] = phi2_hat;
      payload["threshold"] = tau_thresh;
      payload["s_thresholded"] = thr.support.size();
      payload["true_positives"] = tp;
      payload["false_positives"] = fp;
      payload["exact"] = exact;
      json path = json::array();
      int s_monotonicity_violations = 0;
      for (std::size_t k = 0; k < report.path.size(); ++k) {
        const auto& pt = report.path[k];
        path.push_back({{"lambda1", pt.lambda1},
                        {"lambda2", pt.lambda2},
                        {"s", pt.s},
                        {"gic", pt.converged ? json(pt.gic) : json(nullptr)},
                        {"converged", pt.converged}});
        if (k > 0 && pt.s < report.path[k - 1].s) ++s_monotonicity_violations;
      }
      payload["path"] = std::move(path);
      // diagnostic only: the path support is usually but not provably
      // monotone in lambda1
      payload["s_monotonicity_violations"] = s_monotonicity_violations;
      rec.payload = std::move(payload);
      rec.ok = true;
    } catch (const std::exception& e) {
      rec.ok = false;
      rec.error = e.what();
    }
    rec.wall_ms = now_ms() - t0;
  });

  int screening = 0, exact = 0;
  std::vector<double> s_sel, thresholds, lambda1s;
  for (const auto& rec : result.records) {
    if (!rec.ok) {
      ++result.aborted;
      continue;
    }
    if (rec.payload.at("screening").get<bool>()) ++screening;
    if (rec.payload.at("exact").get<bool>()) ++exact;
    s_sel.push_back(rec.payload.at("s_selected").get<double>());
    thresholds.push_back(rec.payload.at("threshold").get<double>());
    lambda1s.push_back(rec.payload.at("chosen_lambda1").get<double>());
  }
  const int ok_count = static_cast<int>(result.records.size()) - result.aborted;

  json& s = result.summary;
  s["study"] = study_name(config.study);
  s["replications"] = config.replications;
  s["aborted"] = result.aborted;
  s["s0"] = s0.size();
  s["margin_c"] = margin_c;
  s["threshold_multiplier"] = config.threshold_multiplier;
  s["fraction_screening"] = fraction(screening, ok_count);
  s["fraction_exact"] = fraction(exact, ok_count);
  s["mean_s_selected"] = mean_se(s_sel);
  s["mean_threshold"] = mean_se(thresholds);
  s["mean_chosen_lambda1"] = mean_se(lambda1s);
  s["config"] = config.raw;
  return result;
}

}  // namespace

StudyResult run_study(const ExperimentConfig& config) {
  config.validate();
  switch (config.study) {
    case StudyKind::Theorem1:
    case StudyKind::CorollaryLinear:
    case StudyKind::TauFrequency:
    case StudyKind::LogitMargin:
      return run_inequality_study(config);
    case StudyKind::GicSelection:
      return run_gic_study(config);
    case StudyKind::SeriesRate:
      return run_rate_study(config);
  }
  throw std::logic_error("unreachable");
}

StudyResult run_rate_study(const ExperimentConfig& config) {
  config.validate();
  if (config.study != StudyKind::SeriesRate)
    throw std::invalid_argument("run_rate_study: study must be series-rate");
  if (config.dgp.kind == DgpKind::Logistic)
    throw std::invalid_argument("run_rate_study: quadratic-loss studies only");
  const double r = config.dgp.kind == DgpKind::HoelderSmooth
                       ? config.dgp.smoothness_r
                       : 1.0;  // linear truths: the rate rule still applies

  LossModel loss{LossKind::Quadratic, {}};
  const MarginSpec margin{1.0, config.eta};
  const Eigen::MatrixXd sigma = population_gram(config.basis, config.dgp);
  const Eigen::Index p_cols = config.basis.columns();
  const double logp = std::log(static_cast<double>(p_cols));

  RiskEvalOptions ropts;
  ropts.mc_size = config.excess_mc;
  ropts.seed = derive_seed(config.master_seed, 0x51C4);
  const PopulationRisk mse_eval(loss, config.basis, config.dgp, ropts);

  StudyResult result;
  const int reps = config.replications;
  const int n_points = static_cast<int>(config.n_grid.size());
  result.records.resize(static_cast<std::size_t>(n_points) * reps);

  json rows = json::array();
  std::vector<double> log_n, log_mse;

  for (int ni = 0; ni < n_points; ++ni) {
    const Eigen::Index n = config.n_grid[ni];
    DgpConfig dgp_n = config.dgp;
    dgp_n.n = n;
    const double lambda0_ref = std::sqrt(logp / static_cast<double>(n));
    Eigen::Index s_star = static_cast<Eigen::Index>(std::ceil(
        config.s_scale * std::pow(lambda0_ref, -2.0 / (2.0 * r + 1.0))));
    s_star = std::max<Eigen::Index>(1, std::min(s_star, config.basis.p));

    double lambda1;
    json level_detail;
    LossModel loss_n = loss;
    switch (config.penalty.rule) {
      case PenaltyRuleKind::Explicit:
        lambda1 = config.penalty.lambda1;
        break;
      case PenaltyRuleKind::LemmaQuad:
        lambda1 = config.penalty.L *
                  concentration_lambda0(config, n, p_cols, loss_n, level_detail);
        break;
      case PenaltyRuleKind::Scaled:
        lambda1 = config.penalty.scale * lambda0_ref;
        break;
    }

    std::vector<std::vector<Eigen::Index>> gamma;
    {
      std::vector<Eigen::Index> s;
      const Eigen::Index off = config.basis.intercept ? 1 : 0;
      for (Eigen::Index j = 0; j < s_star; ++j) s.push_back(off + j);
      gamma.push_back(std::move(s));
    }
    OracleSearchOptions oopts;
    oopts.coupled_lambda2 = config.penalty.coupling == CouplingRule::Remark4;
    oopts.lambda2_fixed =
        config.penalty.coupling == CouplingRule::Fixed ? config.penalty.lambda2 : 0.0;
    oopts.risk.mc_size = config.excess_mc;
    oopts.risk.seed = derive_seed(config.master_seed, 0xE5CE55);
    const OracleReport oracle =
        oracle_search(gamma, dgp_n, loss, config.basis, lambda1, lambda0_ref,
                      margin, sigma, oopts);
    const double lambda2 = oracle.lambda2;

    const std::uint64_t n_seed =
        derive_seed(config.master_seed, static_cast<std::uint64_t>(ni));
    std::vector<double> mses(reps);
    parallel_for(reps, config.parallel, [&](int k) {
      ReplicationRecord& rec =
          result.records[static_cast<std::size_t>(ni) * reps + k];
      rec.rep = ni * reps + k;
      rec.seed = derive_seed(n_seed, static_cast<std::uint64_t>(k));
      const long long t0 = now_ms();
      try {
        DgpConfig dgp = dgp_n;
        dgp.seed = rec.seed;
        const Sample sample = generate(dgp);
        const Eigen::MatrixXd design = design_matrix(config.basis, sample);
        const ErmProblem problem(design, sample.y, LossKind::Quadratic);
        PenaltyConfig penalty;
        penalty.lambda1 = lambda1;
        penalty.lambda2 = lambda2;
        penalty.unpenalized_intercept = config.basis.intercept;
        const FitResult fitted = fit(problem, penalty, config.solver);
        const double mse = mse_eval.excess(fitted.beta);
        mses[k] = mse;
        rec.payload = json{{"n", n},
                           {"s_star", s_star},
                           {"lambda1", lambda1},
                           {"lambda2", lambda2},
                           {"mse", mse},
                           {"fit_kkt", fitted.kkt_residual},
                           {"fit_iterations", fitted.iterations},
                           {"fit_support_size", fitted.support.size()},
                           {"fit_converged", fitted.converged}};
        rec.ok = true;
      } catch (const std::exception& e) {
        rec.ok = false;
        rec.error = e.what();
      }
      rec.wall_ms = now_ms() - t0;
    });

    std::vector<double> ok_mses;
    for (int k = 0; k < reps; ++k)
      if (result.records[static_cast<std::size_t>(ni) * reps + k].ok)
        ok_mses.push_back(mses[k]);
    const json m = mean_se(ok_mses);
    rows.push_back({{"n", n},
                    {"s_star", s_star},
                    {"mse", m.at("value")},
                    {"mse_se", m.at("se")},
                    {"lambda1", lambda1},
                    {"lambda2", lambda2},
                    {"xi_star", oracle.excess_star},
                    {"bound_rhs", oracle.bound_rhs},
                    {"phi2", oracle.phi2_star}});
    if (!ok_mses.empty() && m.at("value").get<double>() > 0) {
      log_n.push_back(std::log(static_cast<double>(n)));
      log_mse.push_back(std::log(m.at("value").get<double>()));
    }
  }

  for (const auto& rec : result.records)
    if (!rec.ok) ++result.aborted;

  // least-squares slope of log mse on log n
  json slope_json;
  if (log_n.size() >= 3) {
    const int k = static_cast<int>(log_n.size());
    double mx = 0, my = 0;
    for (int i = 0; i < k; ++i) {
      mx += log_n[i];
      my += log_mse[i];
    }
    mx /= k;
    my /= k;
    double sxx = 0, sxy = 0;
    for (int i = 0; i < k; ++i) {
      sxx += (log_n[i] - mx) * (log_n[i] - mx);
      sxy += (log_n[i] - mx) * (log_mse[i] - my);
    }
    const double slope = sxy / sxx;
    const double intercept = my - slope * mx;
    double rss = 0;
    for (int i = 0; i < k; ++i) {
      const double e = log_mse[i] - intercept - slope * log_n[i];
      rss += e * e;
    }
    const double se = k > 2 ? std::sqrt(rss / (k - 2) / sxx) : 0.0;
    slope_json = json{{"value", slope}, {"se", se}};
  } else {
    slope_json = json{{"value", nullptr}, {"se", nullptr}};
  }

  // Spearman correlation of mean mse vs n (n ascending)
  json spearman = nullptr;
  {
    std::vector<double> means;
    for (const auto& row : rows)
      if (!row.at("mse").is_null()) means.push_back(row.at("mse").get<double>());
    const int k = static_cast<int>(means.size());
    if (k >= 3) {
      std::vector<double> ranks(k);
      for (int i = 0; i < k; ++i) {
        int rank = 0;
        for (int j = 0; j < k; ++j)
          if (means[j] < means[i]) ++rank;
        ranks[i] = rank;
      }
      double num = 0;
      for (int i = 0; i < k; ++i) {
        const double d = ranks[i] - (k - 1 - i);  // perfect decrease: rank k-1-i
        num += d * d;
      }
      // rank correlation against the decreasing pattern, then negate to
      // report corr(mse, n)
      const double rho_dec = 1.0 - 6.0 * num / (k * (static_cast<double>(k) * k - 1));
      spearman = -rho_dec;
    }
  }

  json& s = result.summary;
  s["study"] = study_name(config.study);
  s["replications_per_n"] = reps;
  s["aborted"] = result.aborted;
  s["smoothness_r"] = r;
  s["theory_slope"] = -2.0 * r / (2.0 * r + 1.0);
  s["rows"] = rows;
  s["slope"] = slope_json;
  s["spearman_mse_vs_n"] = spearman;
  s["config"] = config.raw;
  return result;
}

nlohmann::json ReplicationRecord::to_json(bool include_timing) const {
  json j;
  j["rep"] = rep;
  j["seed"] = seed;
  j["ok"] = ok;
  if (!ok) j["error"] = error;
  for (const auto& item : payload.items()) j[item.key()] = item.value();
  if (include_timing) j["wall_ms"] = wall_ms;
  return j;
}

nlohmann::json summarize_records(const std::vector<nlohmann::json>& records) {
  if (records.empty())
    throw std::invalid_argument("summarize_records: empty record set");
  json out;
  int aborted = 0;
  std::map<std::string, std::vector<double>> numeric;
  std::map<std::string, std::pair<int, int>> boolean;  // (true count, total)
  int violations = 0, tau_count = 0, holds_given_tau = 0;
  bool has_tau = false;
  for (const auto& rec : records) {
    if (!rec.value("ok", false)) {
      ++aborted;
      continue;
    }
    for (const auto& item : rec.items()) {
      const auto& key = item.key();
      if (key == "rep" || key == "seed" || key == "ok" || key == "wall_ms")
        continue;
      if (item.value().is_boolean()) {
        auto& entry = boolean[key];
        ++entry.second;
        if (item.value().get<bool>()) ++entry.first;
      } else if (item.value().is_number()) {
        numeric[key].push_back(item.value().get<double>());
      }
    }
    if (rec.contains("tau_member") && rec.contains("holds")) {
      has_tau = true;
      if (rec.at("tau_member").get<bool>()) {
        ++tau_count;
        if (rec.at("holds").get<bool>())
          ++holds_given_tau;
        else
          ++violations;
      }
    }
  }
  out["records"] = records.size();
  out["aborted"] = aborted;
  json fractions, means;
  for (const auto& [key, counts] : boolean)
    fractions[key] = fraction(counts.first, counts.second);
  for (const auto& [key, values] : numeric) means[key] = mean_se(values);
  out["fractions"] = fractions;
  out["means"] = means;
  out["violations_tau_and_not_holds"] = violations;
  // conditional fraction over the tau members only
  if (has_tau) out["fraction_holds_given_tau"] = fraction(holds_given_tau, tau_count);
  return out;
}

namespace {

void flatten_json(const json& j, const std::string& prefix,
                  std::map<std::string, std::string>& out) {
  if (j.is_object()) {
    for (const auto& item : j.items())
      flatten_json(item.value(),
                   prefix.empty() ? item.key() : prefix + "." + item.key(), out);
  } else if (j.is_array()) {
    out[prefix] = j.dump();
  } else if (j.is_string()) {
    out[prefix] = j.get<std::string>();
  } else {
    out[prefix] = j.dump();
  }
}

}  // namespace

void write_records(const std::string& path,
                   const std::vector<ReplicationRecord>& records,
                   const std::string& format) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_records: cannot open " + path);
  if (format == "json") {
    for (const auto& rec : records) out << rec.to_json().dump() << "\n";
    return;
  }
  if (format != "csv")
    throw std::invalid_argument("write_records: format must be json or csv");
  // header = union of flattened keys, sorted
  std::set<std::string> keys;
  std::vector<std::map<std::string, std::string>> rows;
  for (const auto& rec : records) {
    std::map<std::string, std::string> row;
    flatten_json(rec.to_json(), "", row);
    for (const auto& [k, v] : row) keys.insert(k);
    rows.push_back(std::move(row));
  }
  bool first = true;
  for (const auto& k : keys) {
    if (!first) out << ",";
    out << k;
    first = false;
  }
  out << "\n";
  for (const auto& row : rows) {
    first = true;
    for (const auto& k : keys) {
      if (!first) out << ",";
      auto it = row.find(k);
      if (it != row.end()) {
        std::string v = it->second;
        if (v.find(',') != std::string::npos || v.find('"') != std::string::npos) {
          std::string q = "\"";
          for (char c : v) {
            if (c == '"') q += '"';
            q += c;
          }
          q += "\"";
          v = q;
        }
        out << v;
      }
      first = false;
    }
    out << "\n";
  }
}

void write_json_file(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_json_file: cannot open " + path);
  out << j.dump(2) << "\n";
}

std::vector<nlohmann::json> read_records_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_records_jsonl: cannot open " + path);
  std::vector<json> records;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      records.push_back(json::parse(line));
    } catch (const json::exception& e) {
      throw std::runtime_error("read_records_jsonl: line " +
                               std::to_string(lineno) + ": " + e.what());
    }
  }
  return records;
}

void write_rate_csv(const std::string& path, const nlohmann::json& summary) {
  if (!summary.contains("rows"))
    throw std::invalid_argument("write_rate_csv: summary has no rate rows");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_rate_csv: cannot open " + path);
  out << "n,s_star,mse,mse_se\n";
  for (const auto& row : summary.at("rows")) {
    out << row.at("n").get<Eigen::Index>() << ","
        << row.at("s_star").get<Eigen::Index>() << ","
        << (row.at("mse").is_null() ? "" : row.at("mse").dump()) << ","
        << (row.at("mse_se").is_null() ? "" : row.at("mse_se").dump()) << "\n";
  }
}

}  // namespace enet
