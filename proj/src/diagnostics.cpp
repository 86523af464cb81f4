#include "cureph/diagnostics.hpp"

#include <cmath>
#include <string>

#include "cureph/errors.hpp"
#include "cureph/matrix_core.hpp"

namespace cureph {

namespace {

constexpr int kCvmGrid = 10000;

// Cancellation-free p * S_u(t) and the cure rate for one homogeneous model;
// shared by the per-subject regression loop.
struct LatencyEvaluator {
  Eigen::MatrixXd t_sub;
  Eigen::VectorXd exit_sub;
  Eigen::VectorXd to_immune;

  explicit LatencyEvaluator(const PhaseTypeCureModel& model)
      : t_sub(model.sub_intensity().topLeftCorner(model.dim() - 1,
                                                  model.dim() - 1)),
        exit_sub(model.exit_rates().head(model.dim() - 1)),
        to_immune(model.sub_intensity().topRightCorner(model.dim() - 1, 1)) {}

  double cure_rate(const Eigen::VectorXd& pi) const {
    const int m = static_cast<int>(t_sub.rows());
    const Eigen::VectorXd w = green_solve(t_sub.transpose(), pi.head(m));
    return std::clamp(w.dot(to_immune) + pi[m], 0.0, 1.0);
  }
  double p_times_latency_survival(const Eigen::VectorXd& pi, double y) const {
    const int m = static_cast<int>(t_sub.rows());
    const Eigen::VectorXd w = green_solve(t_sub.transpose(), pi.head(m));
    return std::max(0.0, w.dot(expm(t_sub * y) * exit_sub));
  }
};

ResidualSet cs_core(const Eigen::MatrixXd& t,
                    const Eigen::MatrixXd& pi_rows, const TransformFamily& tf,
                    const SurvivalDataset& data) {
  const int n = data.n();
  ResidualSet out;
  out.residuals.resize(n);
  out.event = data.event;
  out.weights = Eigen::VectorXd::Ones(n);
  for (int i = 0; i < n; ++i) {
    const double y = tf.g_inverse(data.time[i]);
    const Eigen::VectorXd pi =
        pi_rows.row(pi_rows.rows() == 1 ? 0 : i).transpose();
    const double s = (pi.transpose() * expm(t * y)).sum();
    if (!(s > 0.0) || !std::isfinite(s)) {
      throw InfiniteResidualError(
          "survival vanished at observation " + std::to_string(i) +
          "; its Cox-Snell residual is infinite");
    }
    out.residuals[i] = -std::log(std::min(s, 1.0));
  }
  return out;
}

ResidualSet modified_cs_core(const PhaseTypeCureModel& base,
                             const Eigen::MatrixXd& pi_rows,
                             const TransformFamily& tf,
                             const SurvivalDataset& data) {
  const int n = data.n();
  const LatencyEvaluator latency(base);
  ResidualSet out;
  out.residuals.resize(n);
  out.event = data.event;
  out.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd pi =
        pi_rows.row(pi_rows.rows() == 1 ? 0 : i).transpose();
    const double cure = latency.cure_rate(pi);
    const double p = 1.0 - cure;
    if (p <= 1e-12) {
      throw DegenerateLatencyError(
          "modified residuals undefined: subject " + std::to_string(i) +
          " has susceptible fraction 0");
    }
    const double y = tf.g_inverse(data.time[i]);
    const double su =
        std::min(latency.p_times_latency_survival(pi, y) / p, 1.0);
    if (!(su > 0.0) || !std::isfinite(su)) {
      throw InfiniteResidualError(
          "latency survival vanished at observation " + std::to_string(i) +
          "; its modified residual is infinite");
    }
    out.residuals[i] = -std::log(su);
    out.weights[i] = data.event[i] != 0
                         ? 1.0
                         : p * su / (cure + p * su);
  }
  return out;
}

}  // namespace

ResidualSet cs_residuals(const PhaseTypeCureModel& model,
                         const TransformFamily& tf,
                         const SurvivalDataset& data) {
  data.validate();
  return cs_core(model.sub_intensity(), model.pi().transpose(), tf, data);
}

ResidualSet cs_residuals(const MoeCureModel& model,
                         const SurvivalDataset& data) {
  data.validate();
  if (!data.has_covariates()) {
    throw InvalidInputError("cs_residuals: dataset has no covariates");
  }
  const int n = data.n();
  Eigen::MatrixXd pi_rows(n, model.dim());
  for (int i = 0; i < n; ++i) {
    pi_rows.row(i) =
        model.pi_for(data.covariates->row(i).transpose()).transpose();
  }
  return cs_core(model.sub_intensity, pi_rows, model.transform, data);
}

ResidualSet modified_cs_residuals(const PhaseTypeCureModel& model,
                                  const TransformFamily& tf,
                                  const SurvivalDataset& data) {
  data.validate();
  return modified_cs_core(model, model.pi().transpose(), tf, data);
}

ResidualSet modified_cs_residuals(const MoeCureModel& model,
                                  const SurvivalDataset& data) {
  data.validate();
  if (!data.has_covariates()) {
    throw InvalidInputError("modified_cs_residuals: dataset has no covariates");
  }
  const int n = data.n();
  Eigen::MatrixXd pi_rows(n, model.dim());
  for (int i = 0; i < n; ++i) {
    pi_rows.row(i) =
        model.pi_for(data.covariates->row(i).transpose()).transpose();
  }
  // Any subject's conditional model shares the transient block; use a
  // uniform-start snapshot to seed the evaluator.
  const PhaseTypeCureModel snapshot(
      Eigen::VectorXd::Constant(model.dim(), 1.0 / model.dim()),
      model.sub_intensity, model.mask);
  return modified_cs_core(snapshot, pi_rows, model.transform, data);
}

StepFunctionCurve cumulative_hazard_plot_data(const ResidualSet& residuals) {
  if (residuals.n() == 0) {
    throw InvalidInputError("cumulative_hazard_plot_data: empty residual set");
  }
  return nelson_aalen(residuals.residuals, residuals.event, residuals.weights);
}

double cvm_of_distribution(const StepFunctionCurve& fhat) {
  double acc = 0.0;
  for (int j = 0; j < kCvmGrid; ++j) {
    const double u = (j + 0.5) / kCvmGrid;
    const double t = -std::log1p(-u);  // F0 inverse
    const double diff = fhat.value_at(t) - u;
    acc += diff * diff;
  }
  return acc / kCvmGrid;
}

double cvm_criterion(const ResidualSet& residuals) {
  if (residuals.n() == 0) {
    throw InvalidInputError("cvm_criterion: empty residual set");
  }
  StepFunctionCurve fhat = weighted_product_limit(
      residuals.residuals, residuals.event, residuals.weights);
  // Distribution scale: 1 - KM survival of the residuals.
  fhat.values = 1.0 - fhat.values.array();
  fhat.baseline = 0.0;
  return cvm_of_distribution(fhat);
}

double cvm_criterion_scaled(const ResidualSet& residuals) {
  return residuals.n() * cvm_criterion(residuals);
}

}  // namespace cureph
