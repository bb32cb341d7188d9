#pragma once

#include <Eigen/Core>

#include "enet/datagen.hpp"
#include "enet/sample.hpp"

namespace enet {

enum class BasisKind { Identity, Polynomial };

// Feature map psi_1..psi_p with sup-norm bound K. The polynomial basis
// is psi_j(x) = x^j, j = 1..p, no intercept, so K = 1 on [-1,1]. An
// optional unpenalized intercept column can be prepended; it is off by
// default.
struct BasisSpec {
  BasisKind kind = BasisKind::Polynomial;
  Eigen::Index p = 0;
  double sup_bound = 1.0;  // K
  bool intercept = false;

  Eigen::Index columns() const { return p + (intercept ? 1 : 0); }
  void validate() const;
};

Eigen::VectorXd expand(const BasisSpec& basis, const Eigen::VectorXd& x);

// Row i = expand(basis, x_i); expand errors are rethrown with the row index.
Eigen::MatrixXd design_matrix(const BasisSpec& basis, const Sample& sample);

struct BoundReport {
  bool sup_ok = false;            // max |Psi_ij| <= K
  bool second_moment_ok = false;  // (1/n) sum_i max_j Psi_ij^2 <= 1 (empirical proxy)
  double observed_max = 0.0;
};
BoundReport verify_bound_conditions(const Eigen::MatrixXd& design, double K);

// Sigma = E psi(X) psi(X)' under the DGP covariate law. Identity basis:
// diagonal from the law's second moment (iid coordinates). Polynomial
// basis: the scalar moment matrix, closed form for the uniform law and
// quadrature otherwise.
Eigen::MatrixXd population_gram(const BasisSpec& basis, const DgpConfig& config);

// E psi_j(X) f0(X); j indexes design columns (intercept included if on).
double basis_target_crossmoment(const BasisSpec& basis, const DgpConfig& config,
                                Eigen::Index j);

}  // namespace enet
