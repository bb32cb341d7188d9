#include "enet/basis.hpp"

#include <cmath>
#include <stdexcept>

#include "enet/quadrature.hpp"

namespace enet {

void BasisSpec::validate() const {
  if (p < 1) throw std::invalid_argument("BasisSpec: p must be >= 1");
  if (sup_bound <= 0) throw std::invalid_argument("BasisSpec: K must be > 0");
}

Eigen::VectorXd expand(const BasisSpec& basis, const Eigen::VectorXd& x) {
  basis.validate();
  Eigen::VectorXd out(basis.columns());
  Eigen::Index k = 0;
  if (basis.intercept) out[k++] = 1.0;
  switch (basis.kind) {
    case BasisKind::Polynomial: {
      if (x.size() != 1)
        throw std::invalid_argument("expand: polynomial basis expects scalar x");
      double acc = 1.0;
      for (Eigen::Index j = 0; j < basis.p; ++j) {
        acc *= x[0];
        out[k++] = acc;
      }
      break;
    }
    case BasisKind::Identity: {
      if (x.size() != basis.p)
        throw std::invalid_argument("expand: identity basis dimension mismatch");
      out.tail(basis.p) = x;
      break;
    }
  }
  return out;
}

Eigen::MatrixXd design_matrix(const BasisSpec& basis, const Sample& sample) {
  sample.validate();
  Eigen::MatrixXd out(sample.n(), basis.columns());
  for (Eigen::Index i = 0; i < sample.n(); ++i) {
    try {
      out.row(i) = expand(basis, Eigen::VectorXd(sample.x.row(i)));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("design_matrix: row " + std::to_string(i) +
                                  ": " + e.what());
    }
  }
  return out;
}

BoundReport verify_bound_conditions(const Eigen::MatrixXd& design, double K) {
  BoundReport report;
  report.observed_max = design.size() == 0 ? 0.0 : design.cwiseAbs().maxCoeff();
  report.sup_ok = report.observed_max <= K + 1e-12;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < design.rows(); ++i)
    acc += design.row(i).cwiseAbs2().maxCoeff();
  report.second_moment_ok = design.rows() == 0 || acc / design.rows() <= 1.0 + 1e-12;
  return report;
}

namespace {

// E X^m for the scalar covariate law.
double scalar_moment(const DgpConfig& config, int m) {
  if (m % 2 == 1) return 0.0;  // symmetric laws
  if (m == 0) return 1.0;
  if (config.covariate_law == CovariateLaw::Uniform) return 1.0 / (m + 1);
  return integrate(
      [&](double x) { return std::pow(x, m) * covariate_density(config, x); },
      -1.0, 1.0, 192);
}

}  // namespace

Eigen::MatrixXd population_gram(const BasisSpec& basis, const DgpConfig& config) {
  basis.validate();
  const Eigen::Index cols = basis.columns();
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(cols, cols);
  const Eigen::Index off = basis.intercept ? 1 : 0;
  if (basis.kind == BasisKind::Identity) {
    const double v = covariate_second_moment(config);
    if (basis.intercept) sigma(0, 0) = 1.0;
    for (Eigen::Index j = 0; j < basis.p; ++j) sigma(off + j, off + j) = v;
    return sigma;
  }
  // Polynomial: entry (j,k) = E x^{j+k} with degrees j,k in 1..p
  // (0 for the intercept column).
  auto degree = [&](Eigen::Index col) -> int {
    return basis.intercept ? static_cast<int>(col) : static_cast<int>(col) + 1;
  };
  for (Eigen::Index a = 0; a < cols; ++a)
    for (Eigen::Index b = a; b < cols; ++b) {
      const double m = scalar_moment(config, degree(a) + degree(b));
      sigma(a, b) = m;
      sigma(b, a) = m;
    }
  return sigma;
}

double basis_target_crossmoment(const BasisSpec& basis, const DgpConfig& config,
                                Eigen::Index j) {
  basis.validate();
  if (j < 0 || j >= basis.columns())
    throw std::invalid_argument("basis_target_crossmoment: column out of range");
  if (basis.kind == BasisKind::Identity) {
    if (!config.linear_target())
      throw std::invalid_argument(
          "basis_target_crossmoment: identity basis needs a linear target");
    if (basis.intercept && j == 0) return 0.0;  // E f0 = 0, symmetric law
    const Eigen::Index coord = j - (basis.intercept ? 1 : 0);
    return covariate_second_moment(config) * config.beta0[coord];
  }
  const int deg = basis.intercept ? static_cast<int>(j) : static_cast<int>(j) + 1;
  auto f = [&](double x) {
    return std::pow(x, deg) * true_target_value(config, x) *
           covariate_density(config, x);
  };
  // split at 0 for the kink family
  return integrate_split(f, {-1.0, 0.0, 1.0}, 128);
}

}  // namespace enet
