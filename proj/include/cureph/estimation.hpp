#pragma once

#include <Eigen/Dense>
#include <optional>
#include <utility>
#include <vector>

#include "cureph/dataset.hpp"
#include "cureph/phase_type.hpp"
#include "cureph/transform.hpp"

namespace cureph {

/// Conditional-expectation sufficient statistics of the latent path:
/// A (start-state), B (occupancy time), C (jump counts, scaled by rates),
/// D (death-exit counts). `a_obs` carries the per-observation start-state
/// weights A_k^i when requested (regression M-step input).
struct SufficientStats {
  Eigen::VectorXd a;
  Eigen::MatrixXd a_obs;  // n x r, empty unless per-observation weights kept
  Eigen::VectorXd b;
  Eigen::MatrixXd c;
  Eigen::VectorXd d;
};

/// Mixture-of-experts regression model: covariates pick the initial state
/// through a softmax with coefficient rows beta_k (row 1 pinned to zero),
/// while the sub-intensity and time transform are shared.
struct MoeCureModel {
  Eigen::MatrixXd beta;  // r x h
  Eigen::MatrixXd sub_intensity;
  PhaseTypeCureModel::Mask mask;
  TransformFamily transform;

  int dim() const { return static_cast<int>(beta.rows()); }
  int n_features() const { return static_cast<int>(beta.cols()); }
  Eigen::VectorXd pi_for(const Eigen::VectorXd& x) const;
  /// Homogeneous model seen by a subject with covariate vector x.
  PhaseTypeCureModel model_for(const Eigen::VectorXd& x) const;
};

struct FitConfig {
  int max_steps = 1000;
  double tol = 1e-8;          // relative loglikelihood stopping tolerance
  bool update_transform = true;
};

struct FitReport {
  PhaseTypeCureModel model;   // MoE fits store an x-independent snapshot
  TransformFamily transform;
  std::optional<Eigen::MatrixXd> beta;
  std::vector<double> loglik_trace;
  int iterations = 0;
  bool converged = false;
  double cure_rate = 0.0;     // via the transient-block formula
  Eigen::VectorXd susceptible_fraction_per_subject;  // MoE: p(x_i)
  bool beta_capped = false;
  bool theta_stalled = false;

  double loglikelihood() const {
    return loglik_trace.empty() ? 0.0 : loglik_trace.back();
  }
};

/// Censored loglikelihood sum_i delta_i log f(xi_i) + (1-delta_i) log S(xi_i)
/// under the (possibly time-transformed) model.
double loglikelihood(const PhaseTypeCureModel& model, const TransformFamily& tf,
                     const SurvivalDataset& data);
/// Covariate version: pi(x_i) from the softmax.
double loglikelihood(const MoeCureModel& model, const SurvivalDataset& data);

/// E-step on the transformed clock y_i = g^{-1}(xi_i). One augmented-matrix
/// exponential per observation supplies both exp(T y_i) and the Van Loan
/// convolution block.
SufficientStats e_step(const PhaseTypeCureModel& model,
                       const TransformFamily& tf, const SurvivalDataset& data);
/// Covariate variant: per-observation pi(x_i); fills `a_obs`.
SufficientStats e_step(const MoeCureModel& model, const SurvivalDataset& data);

/// M-step: pi_k = A_k/n, t_kl = C_kl/B_k, t_k = D_k/B_k, diagonal filled so
/// rows of [T | t] sum to zero. Masked entries stay exactly zero; rows with
/// B_k = 0 and A_k = 0 are carried over from prev_T unchanged.
std::pair<Eigen::VectorXd, Eigen::MatrixXd> m_step(
    const SufficientStats& stats, int n, const PhaseTypeCureModel::Mask& mask,
    const Eigen::MatrixXd& prev_T);

/// EM fit of (pi, T) with the transform parameters updated in-loop (when the
/// family has any and config.update_transform is set).
FitReport em_fit(const PhaseTypeCureModel& init, const TransformFamily& tf,
                 const SurvivalDataset& data, const FitConfig& config = {});

/// Softmax pi_k(x) = exp(beta_k x) / sum_j exp(beta_j x), max-subtracted.
Eigen::VectorXd softmax_pi(const Eigen::MatrixXd& beta,
                           const Eigen::VectorXd& x);

/// Weighted multinomial-logit M-step: maximizes
/// sum_i sum_k W_ik log pi_k(x_i) over beta with row 1 pinned to zero.
/// Newton iterations with step halving; coefficients are capped at +-30 under
/// separation (sets *capped).
Eigen::MatrixXd fit_weighted_multinomial(const Eigen::MatrixXd& weights,
                                         const Eigen::MatrixXd& covariates,
                                         bool* capped = nullptr);

/// Transform-parameter update: bounded derivative-free ascent of the
/// incomplete-data loglikelihood in theta, holding (pi, T) fixed. `pi_rows`
/// has either one row (shared pi) or n rows (per-observation pi).
/// Returns a theta whose objective is >= the input's; sets *stalled when the
/// search could not evaluate any admissible candidate.
TransformFamily update_theta(const TransformFamily& tf,
                             const Eigen::MatrixXd& sub_intensity,
                             const Eigen::MatrixXd& pi_rows,
                             const SurvivalDataset& data,
                             bool* stalled = nullptr);

/// Mixture-of-experts EM (covariates required): transform data, E-step with
/// per-observation pi(x_i), M-step for T, weighted-multinomial update of
/// beta, then the theta update.
FitReport moe_em_fit(const MoeCureModel& init, const SurvivalDataset& data,
                     const FitConfig& config = {});

}  // namespace cureph
