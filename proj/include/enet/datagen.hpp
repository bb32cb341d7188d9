#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>

#include "enet/sample.hpp"

namespace enet {

enum class DgpKind { LinearSparse, HoelderSmooth, Logistic };
enum class CovariateLaw { Uniform, TruncatedGaussian };
enum class NoiseKind { Homoscedastic, Heteroscedastic };

// Simulation truth. Linear targets carry beta0; smooth targets are
// looked up in a small registry of closed forms with known Hoelder
// order. Logistic uses beta0 when set, otherwise the smooth target,
// as the log-odds.
struct DgpConfig {
  DgpKind kind = DgpKind::LinearSparse;
  Eigen::Index n = 0;
  Eigen::VectorXd beta0;
  std::string target_id;
  double smoothness_r = 0.0;
  NoiseKind noise = NoiseKind::Homoscedastic;
  double sigma = 0.0;
  CovariateLaw covariate_law = CovariateLaw::Uniform;
  double trunc_sd = 0.5;  // base sd of the truncated-gaussian law
  std::uint64_t seed = 0;

  bool linear_target() const {
    return kind == DgpKind::LinearSparse ||
           (kind == DgpKind::Logistic && beta0.size() > 0);
  }
  Eigen::Index covariate_dim() const {
    return linear_target() ? beta0.size() : 1;
  }
  void validate() const;
};

// Registry of smooth targets: "zero", "sine", "poly-sin", and the
// "kink" family sign(x)|x|^r whose Hoelder order is exactly r.
double smooth_target_value(const std::string& id, double r, double x);

Sample generate(const DgpConfig& config);

double true_target_value(const DgpConfig& config, const Eigen::VectorXd& x);
double true_target_value(const DgpConfig& config, double x);

// sigma * profile(x); the heteroscedastic profile is 1 + |x| (scalar)
// or 1 + max_j |x_j| (vector), bounded by 2 on the [-1,1] support.
double noise_scale(const DgpConfig& config, const Eigen::VectorXd& x);

// E eps^2, closed form (quadrature for the vector-max profile).
double noise_second_moment(const DgpConfig& config);

// Tail constants P(|V| >= x) <= alpha exp(-delta x^2) valid jointly for
// the covariates and the noise of this DGP.
struct SubGaussian {
  double alpha = 0.0;
  double delta = 0.0;
};
SubGaussian subgaussian_constants(const DgpConfig& config);

// F_{C_n} = sup over the covariate support intersected with [-C_n, C_n]
// of |f0|.
double target_sup_bound(const DgpConfig& config, double c_n);

// Scalar covariate-law helpers on the [-1, 1] support.
double covariate_density(const DgpConfig& config, double x);
double covariate_second_moment(const DgpConfig& config);
double covariate_abs_moment(const DgpConfig& config);

}  // namespace enet
