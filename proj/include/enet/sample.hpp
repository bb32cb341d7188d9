#pragma once

#include <Eigen/Core>
#include <string>

namespace enet {

// Observations (x_i, y_i), i = 1..n. Covariates are rows of x (d = 1 for
// the scalar case), responses are real for regression and {0,1} for
// classification.
struct Sample {
  Eigen::MatrixXd x;  // n x d
  Eigen::VectorXd y;  // n

  Eigen::Index n() const { return y.size(); }
  Eigen::Index dim() const { return x.cols(); }

  bool binary_y() const {
    for (Eigen::Index i = 0; i < y.size(); ++i)
      if (y[i] != 0.0 && y[i] != 1.0) return false;
    return true;
  }

  // Throws std::invalid_argument on shape or n == 0 violations.
  void validate() const;
};

struct LoadOptions {
  bool has_header = false;
  char delimiter = 0;  // 0 = auto-detect comma/tab
};

// Delimited text, one observation per row, d covariate columns followed
// by the response. Parse errors carry the 1-based line number.
Sample load_sample(const std::string& path, const LoadOptions& opts = {});

}  // namespace enet
