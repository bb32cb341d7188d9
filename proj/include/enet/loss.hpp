#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>

#include "enet/basis.hpp"
#include "enet/datagen.hpp"

namespace enet {

enum class LossKind { Quadratic, Logistic };

// Local Lipschitz data for the quadratic loss: on the event
// {max_i |X_i| v |eps_i| <= C_n} the loss derivative is bounded by
// D_n = 2(C_n + 2 F_{C_n} + G K).
struct LipschitzContext {
  double c_n = 0.0;         // C_n
  double f_bound = 0.0;     // F_{C_n} = sup_{|x|<=C_n} |f0(x)|
  double ell1_radius = 0.0; // G, the l1 radius of the feasible set
  double basis_bound = 0.0; // K
};

struct LossModel {
  LossKind kind = LossKind::Quadratic;
  std::optional<LipschitzContext> context;
};

// rho(f(x), y). Quadratic: (y - fx)^2. Logistic: -y fx + log(1 + e^fx),
// evaluated overflow-safely; y must be in {0,1}.
double loss_value(const LossModel& model, double fx, double y);

// d rho / d fx.
double loss_derivative(const LossModel& model, double fx, double y);

// Lipschitz constant of the loss in f(x): 2 for logistic; the local
// D_n above for quadratic (context required). The statement form uses
// the 2 F_{C_n} coefficient; the underlying derivation gives F_{C_n},
// exposed separately.
double lipschitz_constant(const LossModel& model);
double lipschitz_constant_proof_variant(const LossModel& model);

// Quadratic margin G(u) = c u^2 valid on the sup-norm eta-ball around f0.
struct MarginSpec {
  double c = 0.0;
  double eta = 0.0;
};

double logistic_margin_c(double eps0, double eta);

// Largest eps0 with eps0 <= pi(x) <= 1 - eps0 over the covariate support.
double logistic_band_eps0(const DgpConfig& config);

// min over f0-range x offset of the logistic curvature e^f/(1+e^f)^2;
// the margin constant satisfies 2c <= this minimum.
double logistic_curvature_min(double eps0, double eta, int grid = 2001);

// Quadratic: c = 1 for any eta. Logistic: c from the band constant; pass
// eps0 = 0 to derive it from the config, otherwise the given value is
// validated against the config band.
MarginSpec margin_constant(const LossModel& model, const DgpConfig& config,
                           double eta, double eps0 = 0.0);

struct RiskEvalOptions {
  enum class Method { Auto, ClosedForm, Quadrature, MonteCarlo };
  Method method = Method::Auto;
  int mc_size = 100000;
  std::uint64_t seed = 12345;
};

// Deterministic evaluator of the population risk E rho_{f_beta} and the
// excess risk Xi(f_beta) under a known simulation truth. Uses closed
// forms where the loss/basis/target combination admits them, scalar
// quadrature otherwise, and fixed common Monte Carlo draws for
// vector-covariate logistic problems.
class PopulationRisk {
 public:
  PopulationRisk(const LossModel& model, const BasisSpec& basis,
                 const DgpConfig& config, const RiskEvalOptions& opts = {});

  double risk(const Eigen::VectorXd& beta) const;
  double excess(const Eigen::VectorXd& beta) const;  // >= 0, clamped

  // Incremental-evaluation hooks: when the evaluator runs on common
  // Monte Carlo draws, callers probing many nearby betas can maintain
  // f = mc_design * beta themselves and reuse column updates.
  bool monte_carlo() const { return mode_ == Mode::MonteCarlo; }
  const Eigen::MatrixXd& mc_design_matrix() const { return mc_design_; }
  double risk_given_mc_f(const Eigen::VectorXd& f_mc) const;

 private:
  enum class Mode { ClosedQuadLinear, QuadratureScalar, MonteCarlo };
  Mode mode_;
  LossModel model_;
  BasisSpec basis_;
  DgpConfig config_;
  double noise2_ = 0.0;
  // closed-form pieces
  Eigen::VectorXd beta0_cols_;  // beta0 aligned to design columns
  double second_moment_ = 0.0;
  // Monte Carlo pieces
  Eigen::MatrixXd mc_design_;
  Eigen::VectorXd mc_f0_;
  double risk_f0_ = 0.0;

  double excess_quadrature(const Eigen::VectorXd& beta) const;
  double risk_quadrature(const Eigen::VectorXd& beta) const;
};

double excess_risk(const LossModel& model, const Eigen::VectorXd& beta,
                   const BasisSpec& basis, const DgpConfig& config,
                   const RiskEvalOptions& opts = {});

double population_risk(const LossModel& model, const Eigen::VectorXd& beta,
                       const BasisSpec& basis, const DgpConfig& config,
                       const RiskEvalOptions& opts = {});

}  // namespace enet
