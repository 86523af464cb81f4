#pragma once

#include <Eigen/Dense>
#include <optional>

namespace cureph {

/// Right-censored survival sample: observed times xi = min(tau, zeta),
/// event indicators delta = 1{tau <= zeta}, and an optional covariate matrix
/// whose first column is the intercept (constant 1).
struct SurvivalDataset {
  Eigen::VectorXd time;                      // xi_i, all > 0
  Eigen::VectorXi event;                     // delta_i, 0/1
  std::optional<Eigen::MatrixXd> covariates; // n x h, first column == 1

  int n() const { return static_cast<int>(time.size()); }
  bool has_covariates() const { return covariates.has_value(); }
  int n_features() const {
    return covariates ? static_cast<int>(covariates->cols()) : 0;
  }

  /// Throws ValidationError if any invariant is violated.
  void validate() const;
};

}  // namespace cureph
