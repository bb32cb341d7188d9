#include "enet/config.hpp"

#include <fstream>
#include <set>
#include <stdexcept>

namespace enet {

namespace {

using nlohmann::json;

void check_keys(const json& obj, const std::string& section,
                const std::set<std::string>& allowed) {
  if (!obj.is_object())
    throw std::invalid_argument("config: section '" + section +
                                "' must be an object");
  for (const auto& item : obj.items())
    if (!allowed.count(item.key()))
      throw std::invalid_argument("config: unknown key '" + item.key() +
                                  "' in section '" + section + "'");
}

template <typename T>
T get_or(const json& obj, const std::string& key, T fallback) {
  if (!obj.contains(key)) return fallback;
  return obj.at(key).get<T>();
}

StudyKind parse_study(const std::string& s) {
  if (s == "theorem1") return StudyKind::Theorem1;
  if (s == "corollary-linear") return StudyKind::CorollaryLinear;
  if (s == "tau-frequency") return StudyKind::TauFrequency;
  if (s == "logit-margin") return StudyKind::LogitMargin;
  if (s == "gic-selection") return StudyKind::GicSelection;
  if (s == "series-rate") return StudyKind::SeriesRate;
  throw std::invalid_argument("config: unknown study '" + s + "'");
}

DgpConfig parse_dgp(const json& j, const BasisSpec& basis) {
  check_keys(j, "dgp",
             {"kind", "n", "beta0", "s0", "amplitude", "target", "r", "sigma",
              "noise", "covariate_law", "trunc_sd"});
  DgpConfig dgp;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "linear-sparse")
    dgp.kind = DgpKind::LinearSparse;
  else if (kind == "hoelder-smooth")
    dgp.kind = DgpKind::HoelderSmooth;
  else if (kind == "logistic")
    dgp.kind = DgpKind::Logistic;
  else
    throw std::invalid_argument("config: unknown dgp kind '" + kind + "'");

  dgp.n = j.at("n").get<Eigen::Index>();
  if (j.contains("beta0")) {
    const auto v = j.at("beta0").get<std::vector<double>>();
    const Eigen::Index given = static_cast<Eigen::Index>(v.size());
    if (basis.kind == BasisKind::Identity && given > basis.p)
      throw std::invalid_argument("config: beta0 longer than the basis dimension");
    const Eigen::Index len = basis.kind == BasisKind::Identity ? basis.p : given;
    dgp.beta0 = Eigen::VectorXd::Zero(len);
    for (std::size_t k = 0; k < v.size(); ++k) dgp.beta0[k] = v[k];
  } else if (j.contains("s0")) {
    const Eigen::Index s0 = j.at("s0").get<Eigen::Index>();
    const double amp = get_or(j, "amplitude", 1.0);
    const Eigen::Index len = basis.kind == BasisKind::Identity ? basis.p : s0;
    if (s0 > len) throw std::invalid_argument("config: s0 exceeds dimension");
    dgp.beta0 = Eigen::VectorXd::Zero(len);
    dgp.beta0.head(s0).setConstant(amp);
  }
  dgp.target_id = get_or<std::string>(j, "target", "");
  dgp.smoothness_r = get_or(j, "r", 0.0);
  dgp.sigma = get_or(j, "sigma", 0.0);
  const std::string noise = get_or<std::string>(j, "noise", "homoscedastic");
  if (noise == "homoscedastic")
    dgp.noise = NoiseKind::Homoscedastic;
  else if (noise == "heteroscedastic")
    dgp.noise = NoiseKind::Heteroscedastic;
  else
    throw std::invalid_argument("config: unknown noise '" + noise + "'");
  const std::string law = get_or<std::string>(j, "covariate_law", "uniform");
  if (law == "uniform")
    dgp.covariate_law = CovariateLaw::Uniform;
  else if (law == "truncated-gaussian")
    dgp.covariate_law = CovariateLaw::TruncatedGaussian;
  else
    throw std::invalid_argument("config: unknown covariate_law '" + law + "'");
  dgp.trunc_sd = get_or(j, "trunc_sd", 0.5);
  return dgp;
}

BasisSpec parse_basis(const json& j) {
  check_keys(j, "basis", {"kind", "p", "intercept"});
  BasisSpec basis;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "identity")
    basis.kind = BasisKind::Identity;
  else if (kind == "polynomial")
    basis.kind = BasisKind::Polynomial;
  else
    throw std::invalid_argument("config: unknown basis kind '" + kind + "'");
  basis.p = j.at("p").get<Eigen::Index>();
  basis.sup_bound = 1.0;
  basis.intercept = get_or(j, "intercept", false);
  return basis;
}

PenaltyRuleConfig parse_penalty(const json& j) {
  check_keys(j, "penalty",
             {"rule", "lambda1", "lambda2", "L", "scale", "coupling",
              "ell1_radius"});
  PenaltyRuleConfig penalty;
  const std::string rule = get_or<std::string>(j, "rule", "lemma-quad");
  if (rule == "explicit")
    penalty.rule = PenaltyRuleKind::Explicit;
  else if (rule == "lemma-quad")
    penalty.rule = PenaltyRuleKind::LemmaQuad;
  else if (rule == "scaled")
    penalty.rule = PenaltyRuleKind::Scaled;
  else
    throw std::invalid_argument("config: unknown penalty rule '" + rule + "'");
  penalty.lambda1 = get_or(j, "lambda1", 0.0);
  penalty.lambda2 = get_or(j, "lambda2", 0.0);
  penalty.L = get_or(j, "L", 8.0);
  penalty.scale = get_or(j, "scale", 0.5);
  const std::string coupling = get_or<std::string>(j, "coupling", "remark4");
  if (coupling == "remark4")
    penalty.coupling = CouplingRule::Remark4;
  else if (coupling == "fixed")
    penalty.coupling = CouplingRule::Fixed;
  else if (coupling == "none")
    penalty.coupling = CouplingRule::None;
  else
    throw std::invalid_argument("config: unknown coupling '" + coupling + "'");
  penalty.ell1_radius = get_or(j, "ell1_radius", 0.0);
  return penalty;
}

}  // namespace

std::string study_name(StudyKind kind) {
  switch (kind) {
    case StudyKind::Theorem1: return "theorem1";
    case StudyKind::CorollaryLinear: return "corollary-linear";
    case StudyKind::TauFrequency: return "tau-frequency";
    case StudyKind::LogitMargin: return "logit-margin";
    case StudyKind::GicSelection: return "gic-selection";
    case StudyKind::SeriesRate: return "series-rate";
  }
  throw std::logic_error("unreachable");
}

void ExperimentConfig::validate() const {
  if (replications < 1)
    throw std::invalid_argument("config: replications must be >= 1");
  if (parallel < 1) throw std::invalid_argument("config: parallel must be >= 1");
  if (format != "json" && format != "csv")
    throw std::invalid_argument("config: format must be json or csv");
  if (eta <= 0) throw std::invalid_argument("config: eta must be > 0");
  if (penalty.rule == PenaltyRuleKind::LemmaQuad && penalty.L < 8.0)
    throw std::invalid_argument("config: lemma-quad rule needs L >= 8");
  if (gamma_rule != "true-support" && gamma_rule != "first-sstar")
    throw std::invalid_argument("config: gamma must be true-support or first-sstar");
  if (study == StudyKind::LogitMargin && dgp.kind != DgpKind::Logistic)
    throw std::invalid_argument("config: logit-margin needs a logistic dgp");
  if (study == StudyKind::SeriesRate && dgp.kind == DgpKind::Logistic)
    throw std::invalid_argument("config: series-rate is a quadratic-loss study");
  basis.validate();
  if (study == StudyKind::SeriesRate) {
    if (n_grid.size() < 4)
      throw std::invalid_argument("config: series-rate needs n_grid with >= 4 points");
    for (std::size_t i = 0; i + 1 < n_grid.size(); ++i)
      if (n_grid[i + 1] <= n_grid[i])
        throw std::invalid_argument("config: n_grid must be strictly increasing");
  } else {
    DgpConfig probe = dgp;
    probe.seed = 1;
    probe.validate();
  }
}

ExperimentConfig parse_config(const nlohmann::json& j) {
  check_keys(j, "<top>",
             {"study", "replications", "master_seed", "parallel", "out", "format",
              "dgp", "basis", "penalty", "margin", "oracle", "zm", "gic", "rate",
              "solver"});
  ExperimentConfig config;
  config.raw = j;
  config.study = parse_study(j.at("study").get<std::string>());
  config.basis = parse_basis(j.at("basis"));
  config.dgp = parse_dgp(j.at("dgp"), config.basis);
  if (j.contains("penalty")) config.penalty = parse_penalty(j.at("penalty"));
  config.replications = get_or(j, "replications", 1);
  config.master_seed = get_or<std::uint64_t>(j, "master_seed", 1);
  config.parallel = get_or(j, "parallel", 1);
  config.out = get_or<std::string>(j, "out", "");
  config.format = get_or<std::string>(j, "format", "json");

  if (j.contains("margin")) {
    const json& m = j.at("margin");
    check_keys(m, "margin", {"eta", "eps0"});
    config.eta = get_or(m, "eta", 0.5);
    config.eps0 = get_or(m, "eps0", 0.0);
  }
  if (j.contains("oracle")) {
    const json& o = j.at("oracle");
    check_keys(o, "oracle", {"gamma", "s_star", "mc_size"});
    config.gamma_rule = get_or<std::string>(o, "gamma", "true-support");
    config.s_star = get_or<Eigen::Index>(o, "s_star", 0);
    config.excess_mc = get_or(o, "mc_size", 20000);
  }
  if (j.contains("zm")) {
    const json& z = j.at("zm");
    check_keys(z, "zm", {"directions", "radii", "hill_iters", "mc_size"});
    config.zm_directions = get_or(z, "directions", 64);
    config.zm_radii = get_or(z, "radii", 4);
    config.zm_hill = get_or(z, "hill_iters", 200);
    config.zm_mc = get_or(z, "mc_size", 10000);
  }
  if (j.contains("gic")) {
    const json& g = j.at("gic");
    check_keys(g, "gic",
               {"n_lambdas", "ratio", "coupling", "lambda2_fixed",
                "threshold_multiplier"});
    config.path.n_lambdas = get_or(g, "n_lambdas", 40);
    config.path.ratio = get_or(g, "ratio", 0.01);
    const std::string coupling = get_or<std::string>(g, "coupling", "none");
    if (coupling == "plugin")
      config.path.coupling = Lambda2Coupling::Plugin;
    else if (coupling == "fixed")
      config.path.coupling = Lambda2Coupling::Fixed;
    else if (coupling == "none")
      config.path.coupling = Lambda2Coupling::None;
    else
      throw std::invalid_argument("config: unknown gic coupling '" + coupling + "'");
    config.path.lambda2_fixed = get_or(g, "lambda2_fixed", 0.0);
    config.threshold_multiplier = get_or(g, "threshold_multiplier", 1.0);
  }
  if (j.contains("rate")) {
    const json& r = j.at("rate");
    check_keys(r, "rate", {"n_grid", "s_scale"});
    if (r.contains("n_grid"))
      config.n_grid = r.at("n_grid").get<std::vector<Eigen::Index>>();
    config.s_scale = get_or(r, "s_scale", 1.0);
  }
  if (j.contains("solver")) {
    const json& s = j.at("solver");
    check_keys(s, "solver", {"tol", "max_iter", "acceleration"});
    config.solver.tol = get_or(s, "tol", 1e-8);
    config.solver.max_iter = get_or(s, "max_iter", 100000);
    config.solver.acceleration = get_or(s, "acceleration", true);
  }
  config.validate();
  return config;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("config: parse failure in " + path + ": " + e.what());
  }
  return parse_config(j);
}

}  // namespace enet
