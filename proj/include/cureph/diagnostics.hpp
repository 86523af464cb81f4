#pragma once

#include <Eigen/Dense>

#include "cureph/dataset.hpp"
#include "cureph/estimation.hpp"
#include "cureph/nonparametric.hpp"
#include "cureph/phase_type.hpp"
#include "cureph/transform.hpp"

namespace cureph {

/// Residuals c_i with their censoring status and posterior-susceptibility
/// weights w_i (all 1 for plain Cox-Snell residuals).
struct ResidualSet {
  Eigen::VectorXd residuals;
  Eigen::VectorXi event;
  Eigen::VectorXd weights;

  int n() const { return static_cast<int>(residuals.size()); }
};

/// Cox-Snell residuals c_i = -log S(xi_i); a censored standard-exponential
/// sample under a correctly specified model.
ResidualSet cs_residuals(const PhaseTypeCureModel& model,
                         const TransformFamily& tf, const SurvivalDataset& data);
/// Covariate version via the fitted conditional survival S(t | x_i).
ResidualSet cs_residuals(const MoeCureModel& model, const SurvivalDataset& data);

/// Modified residuals c_i^u = -log S_u(xi_i) targeting the latency fit, with
/// posterior susceptibility weights
///   w_i = delta_i + (1 - delta_i) p S_u(xi_i) / (1 - p + p S_u(xi_i)).
ResidualSet modified_cs_residuals(const PhaseTypeCureModel& model,
                                  const TransformFamily& tf,
                                  const SurvivalDataset& data);
ResidualSet modified_cs_residuals(const MoeCureModel& model,
                                  const SurvivalDataset& data);

/// Weighted Nelson-Aalen cumulative hazard of the residuals, for comparison
/// against the 45-degree identity line.
StepFunctionCurve cumulative_hazard_plot_data(const ResidualSet& residuals);

/// Cramer-von Mises distance of a residual distribution estimate from the
/// unit exponential: D = int (Fhat - F0)^2 dF0 with F0(t) = 1 - exp(-t),
/// discretized on a fixed 10^4-point grid in u = F0(t).
/// `fhat` is a distribution-scale step curve (baseline 0).
double cvm_of_distribution(const StepFunctionCurve& fhat);

/// Raw CvM distance of the residual set, with Fhat the weighted product-limit
/// distribution of the residuals (1 - KM survival, censoring per delta).
double cvm_criterion(const ResidualSet& residuals);
/// n-scaled variant n * D (the conventional test-statistic scale).
double cvm_criterion_scaled(const ResidualSet& residuals);

}  // namespace cureph
