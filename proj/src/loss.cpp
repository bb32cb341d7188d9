#include "enet/loss.hpp"

#include <cmath>
#include <stdexcept>

#include "enet/quadrature.hpp"
#include "enet/rng.hpp"

namespace enet {

namespace {

double sigmoid(double t) {
  if (t >= 0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

double softplus(double t) {
  // log(1 + e^t) without overflow
  return t > 0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
}

void check_binary(double y) {
  if (y != 0.0 && y != 1.0)
    throw std::invalid_argument("logistic loss: y must be 0 or 1");
}

// Conditional logistic loss l(a, x) = -pi a + log(1 + e^a).
double logistic_conditional(double a, double pi) {
  return -pi * a + softplus(a);
}

}  // namespace

double loss_value(const LossModel& model, double fx, double y) {
  switch (model.kind) {
    case LossKind::Quadratic: {
      const double r = y - fx;
      return r * r;
    }
    case LossKind::Logistic:
      check_binary(y);
      return -y * fx + softplus(fx);
  }
  throw std::logic_error("unreachable");
}

double loss_derivative(const LossModel& model, double fx, double y) {
  switch (model.kind) {
    case LossKind::Quadratic:
      return -2.0 * (y - fx);
    case LossKind::Logistic:
      check_binary(y);
      return -y + sigmoid(fx);
  }
  throw std::logic_error("unreachable");
}

namespace {

double quad_lipschitz(const LossModel& model, double f_coeff) {
  if (!model.context)
    throw std::invalid_argument(
        "lipschitz_constant: quadratic loss needs LipschitzContext");
  const LipschitzContext& c = *model.context;
  if (c.c_n < 0 || c.f_bound < 0 || c.ell1_radius < 0 || c.basis_bound < 0)
    throw std::invalid_argument("lipschitz_constant: negative context entry");
  const double d = 2.0 * (c.c_n + f_coeff * c.f_bound + c.ell1_radius * c.basis_bound);
  if (d <= 0.0)
    throw std::invalid_argument("lipschitz_constant: degenerate all-zero context");
  return d;
}

}  // namespace

double lipschitz_constant(const LossModel& model) {
  if (model.kind == LossKind::Logistic) return 2.0;
  return quad_lipschitz(model, 2.0);
}

double lipschitz_constant_proof_variant(const LossModel& model) {
  if (model.kind == LossKind::Logistic) return 2.0;
  return quad_lipschitz(model, 1.0);
}

double logistic_margin_c(double eps0, double eta) {
  if (eps0 <= 0 || eps0 > 0.5)
    throw std::invalid_argument("logistic_margin_c: eps0 must be in (0, 1/2]");
  if (eta <= 0) throw std::invalid_argument("logistic_margin_c: eta must be > 0");
  const double q = 1.0 + std::exp(eta) / eps0;
  return eps0 * std::exp(-eta) / (2.0 * q * q);
}

double logistic_band_eps0(const DgpConfig& config) {
  const double b = target_sup_bound(config, 1.0);
  return sigmoid(-b);
}

double logistic_curvature_min(double eps0, double eta, int grid) {
  const double f0_hi = std::log((1.0 - eps0) / eps0);
  double lo = 1.0;
  for (int i = 0; i < grid; ++i) {
    const double f0 = -f0_hi + 2.0 * f0_hi * i / (grid - 1);
    for (int k = 0; k < grid; ++k) {
      const double f = f0 - eta + 2.0 * eta * k / (grid - 1);
      const double s = sigmoid(f);
      lo = std::min(lo, s * (1.0 - s));
    }
  }
  return lo;
}

MarginSpec margin_constant(const LossModel& model, const DgpConfig& config,
                           double eta, double eps0) {
  if (eta <= 0) throw std::invalid_argument("margin_constant: eta must be > 0");
  if (model.kind == LossKind::Quadratic) return MarginSpec{1.0, eta};
  const double cap = logistic_band_eps0(config);
  if (eps0 == 0.0) eps0 = cap;
  if (eps0 > cap + 1e-12)
    throw std::invalid_argument(
        "margin_constant: pi(x) exits [eps0, 1-eps0]; largest valid eps0 is " +
        std::to_string(cap));
  return MarginSpec{logistic_margin_c(eps0, eta), eta};
}

PopulationRisk::PopulationRisk(const LossModel& model, const BasisSpec& basis,
                               const DgpConfig& config,
                               const RiskEvalOptions& opts)
    : model_(model), basis_(basis), config_(config) {
  config_.validate();
  basis_.validate();
  noise2_ = noise_second_moment(config_);

  const bool scalar = config_.covariate_dim() == 1;
  const bool closed = model_.kind == LossKind::Quadratic &&
                      basis_.kind == BasisKind::Identity &&
                      config_.linear_target();
  using Method = RiskEvalOptions::Method;
  if (opts.method == Method::ClosedForm && !closed)
    throw std::invalid_argument("PopulationRisk: no closed form for this setup");
  if (opts.method == Method::Quadrature && !scalar)
    throw std::invalid_argument("PopulationRisk: quadrature needs scalar covariates");

  if ((opts.method == Method::Auto && closed) || opts.method == Method::ClosedForm) {
    mode_ = Mode::ClosedQuadLinear;
    second_moment_ = covariate_second_moment(config_);
    beta0_cols_ = Eigen::VectorXd::Zero(basis_.columns());
    beta0_cols_.tail(basis_.p) = config_.beta0;
    return;
  }
  if ((opts.method == Method::Auto && scalar) || opts.method == Method::Quadrature) {
    mode_ = Mode::QuadratureScalar;
    return;
  }

  mode_ = Mode::MonteCarlo;
  Rng rng(opts.seed);
  const Eigen::Index d = config_.covariate_dim();
  mc_design_.resize(opts.mc_size, basis_.columns());
  mc_f0_.resize(opts.mc_size);
  Eigen::VectorXd x(d);
  for (int i = 0; i < opts.mc_size; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      if (config_.covariate_law == CovariateLaw::Uniform) {
        x[j] = rng.uniform(-1.0, 1.0);
      } else {
        do {
          x[j] = config_.trunc_sd * rng.normal();
        } while (std::abs(x[j]) > 1.0);
      }
    }
    mc_design_.row(i) = expand(basis_, x);
    mc_f0_[i] = true_target_value(config_, x);
  }
  if (model_.kind == LossKind::Logistic) {
    double acc = 0.0;
    for (int i = 0; i < opts.mc_size; ++i)
      acc += logistic_conditional(mc_f0_[i], sigmoid(mc_f0_[i]));
    risk_f0_ = acc / opts.mc_size;
  }
}

double PopulationRisk::excess_quadrature(const Eigen::VectorXd& beta) const {
  auto f_beta = [&](double x) {
    Eigen::VectorXd xv(1);
    xv[0] = x;
    return expand(basis_, xv).dot(beta);
  };
  if (model_.kind == LossKind::Quadratic) {
    auto g = [&](double x) {
      const double d = f_beta(x) - true_target_value(config_, x);
      return d * d * covariate_density(config_, x);
    };
    return integrate_split(g, {-1.0, 0.0, 1.0}, 128);
  }
  auto g = [&](double x) {
    const double f0 = true_target_value(config_, x);
    const double pi = sigmoid(f0);
    return (logistic_conditional(f_beta(x), pi) - logistic_conditional(f0, pi)) *
           covariate_density(config_, x);
  };
  return integrate_split(g, {-1.0, 0.0, 1.0}, 128);
}

double PopulationRisk::risk_quadrature(const Eigen::VectorXd& beta) const {
  if (model_.kind == LossKind::Quadratic)
    return noise2_ + excess_quadrature(beta);
  auto f_beta = [&](double x) {
    Eigen::VectorXd xv(1);
    xv[0] = x;
    return expand(basis_, xv).dot(beta);
  };
  auto g = [&](double x) {
    const double pi = sigmoid(true_target_value(config_, x));
    return logistic_conditional(f_beta(x), pi) * covariate_density(config_, x);
  };
  return integrate_split(g, {-1.0, 0.0, 1.0}, 128);
}

double PopulationRisk::excess(const Eigen::VectorXd& beta) const {
  if (beta.size() != basis_.columns())
    throw std::invalid_argument("PopulationRisk: beta dimension mismatch");
  double xi = 0.0;
  switch (mode_) {
    case Mode::ClosedQuadLinear: {
      Eigen::VectorXd d = beta - beta0_cols_;
      double v = second_moment_ * d.tail(basis_.p).squaredNorm();
      if (basis_.intercept) v += d[0] * d[0];
      xi = v;
      break;
    }
    case Mode::QuadratureScalar:
      xi = excess_quadrature(beta);
      break;
    case Mode::MonteCarlo: {
      Eigen::VectorXd f = mc_design_ * beta;
      if (model_.kind == LossKind::Quadratic) {
        xi = (f - mc_f0_).squaredNorm() / f.size();
      } else {
        double acc = 0.0;
        for (Eigen::Index i = 0; i < f.size(); ++i)
          acc += logistic_conditional(f[i], sigmoid(mc_f0_[i]));
        xi = acc / f.size() - risk_f0_;
      }
      break;
    }
  }
  return std::max(0.0, xi);
}

double PopulationRisk::risk(const Eigen::VectorXd& beta) const {
  if (beta.size() != basis_.columns())
    throw std::invalid_argument("PopulationRisk: beta dimension mismatch");
  switch (mode_) {
    case Mode::ClosedQuadLinear:
      return noise2_ + excess(beta);
    case Mode::QuadratureScalar:
      return risk_quadrature(beta);
    case Mode::MonteCarlo: {
      if (model_.kind == LossKind::Quadratic) return noise2_ + excess(beta);
      Eigen::VectorXd f = mc_design_ * beta;
      double acc = 0.0;
      for (Eigen::Index i = 0; i < f.size(); ++i)
        acc += logistic_conditional(f[i], sigmoid(mc_f0_[i]));
      return acc / f.size();
    }
  }
  throw std::logic_error("unreachable");
}

double PopulationRisk::risk_given_mc_f(const Eigen::VectorXd& f_mc) const {
  if (mode_ != Mode::MonteCarlo)
    throw std::logic_error("risk_given_mc_f: evaluator is not in Monte Carlo mode");
  if (f_mc.size() != mc_f0_.size())
    throw std::invalid_argument("risk_given_mc_f: f dimension mismatch");
  if (model_.kind == LossKind::Quadratic)
    return noise2_ + (f_mc - mc_f0_).squaredNorm() / f_mc.size();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < f_mc.size(); ++i)
    acc += logistic_conditional(f_mc[i], sigmoid(mc_f0_[i]));
  return acc / f_mc.size();
}

double excess_risk(const LossModel& model, const Eigen::VectorXd& beta,
                   const BasisSpec& basis, const DgpConfig& config,
                   const RiskEvalOptions& opts) {
  return PopulationRisk(model, basis, config, opts).excess(beta);
}

double population_risk(const LossModel& model, const Eigen::VectorXd& beta,
                       const BasisSpec& basis, const DgpConfig& config,
                       const RiskEvalOptions& opts) {
  return PopulationRisk(model, basis, config, opts).risk(beta);
}

}  // namespace enet
