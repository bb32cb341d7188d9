#pragma once

#include <Eigen/Core>
#include <functional>
#include <initializer_list>
#include <vector>

namespace enet {

struct QuadRule {
  Eigen::VectorXd nodes;    // on [-1, 1]
  Eigen::VectorXd weights;  // sum to 2
};

// Gauss-Legendre rule with n points, cached per n. Thread-safe.
const QuadRule& gauss_legendre(int n);

double integrate(const std::function<double(double)>& f, double a, double b,
                 int n = 96);

// Integrate over [breaks_0, breaks_last] splitting at the interior
// breakpoints; lets non-smooth integrands (e.g. kinks at 0) keep
// Gauss-Legendre accuracy per panel.
double integrate_split(const std::function<double(double)>& f,
                       const std::vector<double>& breaks, int n = 96);

}  // namespace enet
