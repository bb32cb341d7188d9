#include "enet/datagen.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "enet/quadrature.hpp"
#include "enet/rng.hpp"

namespace enet {

namespace {

double std_normal_cdf(double z) { return 0.5 * (1.0 + std::erf(z / std::numbers::sqrt2)); }

double std_normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

double sigmoid(double t) {
  if (t >= 0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

double draw_covariate(const DgpConfig& config, Rng& rng) {
  switch (config.covariate_law) {
    case CovariateLaw::Uniform:
      return rng.uniform(-1.0, 1.0);
    case CovariateLaw::TruncatedGaussian: {
      for (;;) {
        const double v = config.trunc_sd * rng.normal();
        if (std::abs(v) <= 1.0) return v;
      }
    }
  }
  throw std::logic_error("unreachable");
}

// Density of |X_j| on [0, 1] and its cdf, per law.
double abs_density(const DgpConfig& config, double m) {
  switch (config.covariate_law) {
    case CovariateLaw::Uniform:
      return 1.0;
    case CovariateLaw::TruncatedGaussian: {
      const double tau = config.trunc_sd;
      const double z = 2.0 * std_normal_cdf(1.0 / tau) - 1.0;
      return 2.0 * std_normal_pdf(m / tau) / (tau * z);
    }
  }
  throw std::logic_error("unreachable");
}

double abs_cdf(const DgpConfig& config, double m) {
  switch (config.covariate_law) {
    case CovariateLaw::Uniform:
      return m;
    case CovariateLaw::TruncatedGaussian: {
      const double tau = config.trunc_sd;
      const double z = 2.0 * std_normal_cdf(1.0 / tau) - 1.0;
      return (2.0 * std_normal_cdf(m / tau) - 1.0) / z;
    }
  }
  throw std::logic_error("unreachable");
}

// E M^k for M = max of d iid |X_j|.
double max_abs_moment(const DgpConfig& config, Eigen::Index d, int k) {
  auto f = [&](double m) {
    return std::pow(m, k) * static_cast<double>(d) *
           std::pow(abs_cdf(config, m), static_cast<double>(d - 1)) *
           abs_density(config, m);
  };
  return integrate(f, 0.0, 1.0, 128);
}

}  // namespace

double smooth_target_value(const std::string& id, double r, double x) {
  if (id == "zero") return 0.0;
  if (id == "sine") return std::sin(std::numbers::pi * x);
  if (id == "poly-sin")
    return 0.8 * std::sin(std::numbers::pi * x) + 0.4 * x * x;
  if (id == "kink") {
    const double s = x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0);
    return s * std::pow(std::abs(x), r);
  }
  throw std::invalid_argument("smooth_target_value: unknown target '" + id + "'");
}

void DgpConfig::validate() const {
  if (n <= 0) throw std::invalid_argument("DgpConfig: n must be positive");
  if (sigma < 0) throw std::invalid_argument("DgpConfig: sigma must be >= 0");
  if (trunc_sd <= 0) throw std::invalid_argument("DgpConfig: trunc_sd must be > 0");
  switch (kind) {
    case DgpKind::LinearSparse:
      if (beta0.size() == 0)
        throw std::invalid_argument("DgpConfig: linear-sparse needs beta0");
      break;
    case DgpKind::HoelderSmooth:
      if (smoothness_r <= 0.5)
        throw std::invalid_argument("DgpConfig: hoelder-smooth needs r > 1/2");
      smooth_target_value(target_id, smoothness_r, 0.0);  // registry check
      break;
    case DgpKind::Logistic:
      if (beta0.size() == 0)
        smooth_target_value(target_id, smoothness_r, 0.0);
      break;
  }
}

double true_target_value(const DgpConfig& config, const Eigen::VectorXd& x) {
  if (config.linear_target()) {
    if (x.size() != config.beta0.size())
      throw std::invalid_argument("true_target_value: covariate dimension mismatch");
    return config.beta0.dot(x);
  }
  if (x.size() != 1)
    throw std::invalid_argument("true_target_value: expected scalar covariate");
  return smooth_target_value(config.target_id, config.smoothness_r, x[0]);
}

double true_target_value(const DgpConfig& config, double x) {
  Eigen::VectorXd v(1);
  v[0] = x;
  if (config.linear_target() && config.beta0.size() != 1)
    throw std::invalid_argument("true_target_value: expected vector covariate");
  return config.linear_target() ? config.beta0[0] * x
                                : smooth_target_value(config.target_id,
                                                      config.smoothness_r, x);
}

double noise_scale(const DgpConfig& config, const Eigen::VectorXd& x) {
  if (config.noise == NoiseKind::Homoscedastic) return config.sigma;
  const double m = x.size() == 1 ? std::abs(x[0]) : x.cwiseAbs().maxCoeff();
  return config.sigma * (1.0 + m);
}

Sample generate(const DgpConfig& config) {
  config.validate();
  Rng rng(config.seed);
  const Eigen::Index d = config.covariate_dim();

  Sample s;
  s.x.resize(config.n, d);
  s.y.resize(config.n);
  for (Eigen::Index i = 0; i < config.n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) s.x(i, j) = draw_covariate(config, rng);
    const double f0 = true_target_value(config, Eigen::VectorXd(s.x.row(i)));
    if (config.kind == DgpKind::Logistic) {
      s.y[i] = rng.bernoulli(sigmoid(f0)) ? 1.0 : 0.0;
    } else {
      double eps = 0.0;
      if (config.sigma > 0)
        eps = noise_scale(config, Eigen::VectorXd(s.x.row(i))) * rng.normal();
      s.y[i] = f0 + eps;
    }
  }
  return s;
}

double noise_second_moment(const DgpConfig& config) {
  if (config.kind == DgpKind::Logistic) return 0.0;
  const double s2 = config.sigma * config.sigma;
  if (config.noise == NoiseKind::Homoscedastic) return s2;
  const Eigen::Index d = config.covariate_dim();
  // E (1+M)^2 = 1 + 2 E M + E M^2 with M = max_j |X_j|.
  double em, em2;
  if (d == 1) {
    em = covariate_abs_moment(config);
    em2 = covariate_second_moment(config);
  } else {
    em = max_abs_moment(config, d, 1);
    em2 = max_abs_moment(config, d, 2);
  }
  return s2 * (1.0 + 2.0 * em + em2);
}

SubGaussian subgaussian_constants(const DgpConfig& config) {
  // Covariates are supported in [-1,1]: P(|X| >= x) <= e * exp(-x^2).
  SubGaussian out{std::numbers::e, 1.0};
  if (config.kind == DgpKind::Logistic || config.sigma == 0.0) return out;
  const double scale =
      config.noise == NoiseKind::Homoscedastic ? config.sigma : 2.0 * config.sigma;
  const double delta_eps = 1.0 / (2.0 * scale * scale);
  out.alpha = std::max(out.alpha, 2.0);
  out.delta = std::min(out.delta, delta_eps);
  return out;
}

double target_sup_bound(const DgpConfig& config, double c_n) {
  const double b = std::min(1.0, c_n);
  if (config.linear_target()) return config.beta0.lpNorm<1>() * b;
  double sup = 0.0;
  const int grid = 20001;
  for (int i = 0; i < grid; ++i) {
    const double x = -b + 2.0 * b * i / (grid - 1);
    sup = std::max(sup, std::abs(smooth_target_value(config.target_id,
                                                     config.smoothness_r, x)));
  }
  return sup;
}

double covariate_density(const DgpConfig& config, double x) {
  if (std::abs(x) > 1.0) return 0.0;
  switch (config.covariate_law) {
    case CovariateLaw::Uniform:
      return 0.5;
    case CovariateLaw::TruncatedGaussian: {
      const double tau = config.trunc_sd;
      const double z = 2.0 * std_normal_cdf(1.0 / tau) - 1.0;
      return std_normal_pdf(x / tau) / (tau * z);
    }
  }
  throw std::logic_error("unreachable");
}

double covariate_second_moment(const DgpConfig& config) {
  switch (config.covariate_law) {
    case CovariateLaw::Uniform:
      return 1.0 / 3.0;
    case CovariateLaw::TruncatedGaussian: {
      const double tau = config.trunc_sd;
      const double a = 1.0 / tau;
      const double z = 2.0 * std_normal_cdf(a) - 1.0;
      return tau * tau * (1.0 - 2.0 * a * std_normal_pdf(a) / z);
    }
  }
  throw std::logic_error("unreachable");
}

double covariate_abs_moment(const DgpConfig& config) {
  switch (config.covariate_law) {
    case CovariateLaw::Uniform:
      return 0.5;
    case CovariateLaw::TruncatedGaussian: {
      const double tau = config.trunc_sd;
      const double a = 1.0 / tau;
      const double z = 2.0 * std_normal_cdf(a) - 1.0;
      return 2.0 * tau * (std_normal_pdf(0.0) - std_normal_pdf(a)) / z;
    }
  }
  throw std::logic_error("unreachable");
}

}  // namespace enet
