#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>

#include "cureph/dataset.hpp"
#include "cureph/transform.hpp"

namespace cureph {

enum class AbsorptionState { Death, Immune };

/// Terminal outcome of one latent Markov path: absorption into death at a
/// finite time, or into the immune state (time = +infinity).
struct AbsorptionOutcome {
  AbsorptionState state;
  double time;  // +inf iff state == Immune
};

/// Susceptible/cured split of a cure-rate phase-type law: the susceptible
/// fraction p, the cure rate 1-p, and the latency representation
/// (latency_alpha, latency_T) over the transient states.
struct CureDecomposition {
  double susceptible_fraction = 0.0;  // p
  double cure_rate = 0.0;             // 1 - p
  Eigen::VectorXd latency_alpha;      // length r-1, sums to 1
  Eigen::MatrixXd latency_T;          // (r-1) x (r-1) sub-intensity
};

/// Phase-type distribution with two absorbing states: death (implicit, via
/// the exit vector t = -T e) and immunity (state r, whose row of T is zero).
///
/// The structural-zero mask records entries of T constrained to stay exactly
/// zero through estimation (true/1 = constrained).
class PhaseTypeCureModel {
 public:
  using Mask = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic>;

  PhaseTypeCureModel(Eigen::VectorXd pi, Eigen::MatrixXd sub_intensity,
                     Mask mask);
  /// Mask defaults to "immune row only".
  PhaseTypeCureModel(Eigen::VectorXd pi, Eigen::MatrixXd sub_intensity);

  int dim() const { return r_; }
  const Eigen::VectorXd& pi() const { return pi_; }
  const Eigen::MatrixXd& sub_intensity() const { return t_; }
  const Mask& mask() const { return mask_; }
  /// Exit-rate vector t = -T e (componentwise >= 0, zero in the immune row).
  const Eigen::VectorXd& exit_rates() const { return exit_; }

  /// f(t) = pi exp(T t) t.
  double density(double t) const;
  /// S(t) = pi exp(T t) e.
  double survival(double t) const;
  /// 1 - p = pi_{1:(r-1)} [-T_sub]^{-1} T_{1:(r-1),r} + pi_r.
  double cure_rate() const;
  double susceptible_fraction() const { return 1.0 - cure_rate(); }

  CureDecomposition latency_decomposition() const;
  /// S_u(t) = (S(t) - (1-p)) / p, evaluated through the cancellation-free
  /// equivalent form pi_s [-T_sub]^{-1} exp(T_sub t) t_s / p.
  double latency_survival(double t) const;

  /// Simulates one latent path to absorption.
  AbsorptionOutcome simulate_path(std::mt19937_64& rng) const;

 private:
  int r_;
  Eigen::VectorXd pi_;
  Eigen::MatrixXd t_;
  Mask mask_;
  Eigen::VectorXd exit_;
};

/// Survival of the time-transformed law: S(t) = pi exp(g^{-1}(t) T) e.
double iph_survival(const PhaseTypeCureModel& model, const TransformFamily& tf,
                    double t);
/// Density of the time-transformed law: f(t) = lambda(t) pi exp(g^{-1}(t) T) t.
double iph_density(const PhaseTypeCureModel& model, const TransformFamily& tf,
                   double t);

/// Simulates n right-censored observations: tau = g(path time), censoring
/// zeta ~ Unif(0, censor_upper), xi = min(tau, zeta), delta = 1{tau <= zeta}.
/// Immune paths always come out censored.
SurvivalDataset simulate_censored(const PhaseTypeCureModel& model,
                                  const TransformFamily& tf,
                                  double censor_upper, int n,
                                  std::mt19937_64& rng);

}  // namespace cureph
