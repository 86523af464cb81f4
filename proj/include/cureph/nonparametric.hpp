#pragma once

#include <Eigen/Dense>
#include <optional>

#include "cureph/dataset.hpp"

namespace cureph {

/// Right-continuous step function: value(t) = values[j] for the largest
/// times[j] <= t, and `baseline` before the first jump. Survival curves use
/// baseline 1, cumulative hazards baseline 0. `lower`/`upper` hold pointwise
/// confidence bands when present (aligned with `times`).
struct StepFunctionCurve {
  Eigen::VectorXd times;
  Eigen::VectorXd values;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  double baseline = 1.0;

  bool has_bands() const { return lower.size() == times.size() && times.size() > 0; }
  double value_at(double t) const;
  /// Terminal level of the curve (baseline when there is no jump).
  double plateau() const {
    return times.size() == 0 ? baseline : values[values.size() - 1];
  }
};

/// Product-limit estimator over distinct event times, with Greenwood variance
/// and pointwise log-log confidence bands at the given level.
StepFunctionCurve kaplan_meier(const SurvivalDataset& data,
                               double level = 0.95);

/// (Weighted) Nelson-Aalen cumulative hazard
///   H(t) = sum_{event times s <= t} dW(s) / YW(s)
/// with dW the weight of events at s and YW the weight of the at-risk set.
/// A zero weighted risk set at an event time skips the increment and sets
/// *zero_risk_skipped when provided.
StepFunctionCurve nelson_aalen(
    const Eigen::VectorXd& times, const Eigen::VectorXi& events,
    const std::optional<Eigen::VectorXd>& weights = std::nullopt,
    bool* zero_risk_skipped = nullptr);

/// Weighted product-limit survival estimate (no bands); unit weights give the
/// Kaplan-Meier point estimate.
StepFunctionCurve weighted_product_limit(const Eigen::VectorXd& times,
                                         const Eigen::VectorXi& events,
                                         const Eigen::VectorXd& weights);

}  // namespace cureph
