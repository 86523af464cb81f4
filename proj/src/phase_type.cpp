#include "cureph/phase_type.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cureph/errors.hpp"
#include "cureph/matrix_core.hpp"

namespace cureph {

namespace {

constexpr double kProbTol = 1e-12;
constexpr std::int64_t kMaxJumps = 1000000000;

}  // namespace

void SurvivalDataset::validate() const {
  const int m = n();
  if (event.size() != m) {
    throw ValidationError("dataset: time/event length mismatch");
  }
  for (int i = 0; i < m; ++i) {
    if (!(time[i] > 0.0) || !std::isfinite(time[i])) {
      throw ValidationError("dataset: observation " + std::to_string(i) +
                            " has nonpositive or non-finite time");
    }
    if (event[i] != 0 && event[i] != 1) {
      throw ValidationError("dataset: observation " + std::to_string(i) +
                            " has event indicator outside {0,1}");
    }
  }
  if (covariates) {
    if (covariates->rows() != m) {
      throw ValidationError("dataset: covariate row count mismatch");
    }
    if (!covariates->allFinite()) {
      throw ValidationError("dataset: non-finite covariate entries");
    }
    if (covariates->cols() < 1 ||
        (covariates->col(0).array() != 1.0).any()) {
      throw ValidationError(
          "dataset: first covariate column must be the intercept (all ones)");
    }
  }
}

namespace {

PhaseTypeCureModel::Mask immune_row_mask(int r) {
  PhaseTypeCureModel::Mask m = PhaseTypeCureModel::Mask::Zero(r, r);
  if (r >= 1) m.row(r - 1).setOnes();
  return m;
}

}  // namespace

PhaseTypeCureModel::PhaseTypeCureModel(Eigen::VectorXd pi,
                                       Eigen::MatrixXd sub_intensity)
    : PhaseTypeCureModel(pi, std::move(sub_intensity),
                         immune_row_mask(static_cast<int>(pi.size()))) {}

PhaseTypeCureModel::PhaseTypeCureModel(Eigen::VectorXd pi,
                                       Eigen::MatrixXd sub_intensity, Mask mask)
    : r_(static_cast<int>(pi.size())),
      pi_(std::move(pi)),
      t_(std::move(sub_intensity)),
      mask_(std::move(mask)) {
  if (r_ < 2) {
    throw InvalidInputError(
        "phase-type cure model needs dimension r >= 2 (state r is immunity)");
  }
  if (t_.rows() != r_ || t_.cols() != r_) {
    throw ValidationError("sub-intensity dimension does not match pi");
  }
  if (mask_.rows() != r_ || mask_.cols() != r_) {
    throw ValidationError("mask dimension does not match model");
  }
  if (!pi_.allFinite() || !t_.allFinite()) {
    throw ValidationError("model parameters must be finite");
  }

  // Initial distribution: clamp -1e-12-level noise, then renormalize.
  for (int k = 0; k < r_; ++k) {
    if (pi_[k] < -kProbTol) {
      throw ValidationError("pi has a negative component");
    }
    if (pi_[k] < 0.0) pi_[k] = 0.0;
  }
  const double total = pi_.sum();
  if (std::abs(total - 1.0) > kProbTol) {
    throw ValidationError("pi must sum to 1 (got " + std::to_string(total) +
                          ")");
  }
  pi_ /= total;

  for (int k = 0; k < r_; ++k) {
    for (int l = 0; l < r_; ++l) {
      if (mask_(k, l) != 0) {
        if (std::abs(t_(k, l)) > kProbTol) {
          throw ValidationError("masked entry of T is not zero");
        }
        t_(k, l) = 0.0;
      }
    }
  }
  // Immune state r is absorbing: its whole row must vanish.
  for (int l = 0; l < r_; ++l) {
    if (std::abs(t_(r_ - 1, l)) > kProbTol) {
      throw ValidationError("immune row of T must be zero");
    }
    t_(r_ - 1, l) = 0.0;
  }
  for (int k = 0; k < r_; ++k) {
    if (t_(k, k) > 0.0) {
      throw ValidationError("diagonal of T must be nonpositive");
    }
    double row_sum = 0.0;
    for (int l = 0; l < r_; ++l) {
      if (l != k) {
        if (t_(k, l) < -kProbTol) {
          throw ValidationError("off-diagonal of T must be nonnegative");
        }
        if (t_(k, l) < 0.0) t_(k, l) = 0.0;
        row_sum += t_(k, l);
      }
    }
    if (row_sum + t_(k, k) > kProbTol) {
      throw ValidationError("row sums of T must be <= 0");
    }
  }
  exit_ = (-(t_.rowwise().sum())).cwiseMax(0.0);
  exit_[r_ - 1] = 0.0;
}

double PhaseTypeCureModel::density(double t) const {
  if (!(t >= 0.0) || !std::isfinite(t)) {
    throw InvalidInputError("density: time must be finite and >= 0");
  }
  const double f = pi_.dot(expm(t_ * t) * exit_);
  return std::max(f, 0.0);
}

double PhaseTypeCureModel::survival(double t) const {
  if (!(t >= 0.0) || !std::isfinite(t)) {
    throw InvalidInputError("survival: time must be finite and >= 0");
  }
  const double s = (pi_.transpose() * expm(t_ * t)).sum();
  return std::clamp(s, 0.0, 1.0);
}

double PhaseTypeCureModel::cure_rate() const {
  const int m = r_ - 1;
  const Eigen::MatrixXd t_sub = t_.topLeftCorner(m, m);
  const Eigen::VectorXd to_immune = t_.topRightCorner(m, 1);
  // pi_s [-T_sub]^{-1} c  ==  (solve of the transposed system) . c
  const Eigen::VectorXd w = green_solve(t_sub.transpose(), pi_.head(m));
  return std::clamp(w.dot(to_immune) + pi_[r_ - 1], 0.0, 1.0);
}

CureDecomposition PhaseTypeCureModel::latency_decomposition() const {
  const int m = r_ - 1;
  const Eigen::MatrixXd t_sub = t_.topLeftCorner(m, m);
  const Eigen::VectorXd to_immune = t_.topRightCorner(m, 1);
  const Eigen::VectorXd w = green_solve(t_sub.transpose(), pi_.head(m));

  const double cure = std::clamp(w.dot(to_immune) + pi_[r_ - 1], 0.0, 1.0);
  const double p = 1.0 - cure;
  if (p <= kProbTol) {
    throw DegenerateLatencyError(
        "latency is undefined: all probability mass is cured");
  }

  // alpha = pi_s [-T_sub]^{-1} [-T_sub - Delta(c)] / (pi_s [-T_sub]^{-1} t_s)
  Eigen::VectorXd alpha = -(t_sub.transpose() * w) - to_immune.cwiseProduct(w);
  const Eigen::VectorXd exit_s = exit_.head(m);
  const double denom = w.dot(exit_s);
  if (!(denom > 0.0)) {
    throw DegenerateLatencyError("latency normalizer vanished");
  }
  alpha /= denom;
  if (std::abs(alpha.sum() - 1.0) > 1e-10) {
    throw InternalError("latency alpha failed to normalize");
  }

  CureDecomposition out;
  out.susceptible_fraction = p;
  out.cure_rate = cure;
  out.latency_alpha = std::move(alpha);
  out.latency_T = t_sub;
  return out;
}

double PhaseTypeCureModel::latency_survival(double t) const {
  if (!(t >= 0.0) || !std::isfinite(t)) {
    throw InvalidInputError("latency_survival: time must be finite and >= 0");
  }
  const int m = r_ - 1;
  const Eigen::MatrixXd t_sub = t_.topLeftCorner(m, m);
  const Eigen::VectorXd w = green_solve(t_sub.transpose(), pi_.head(m));
  const double p = 1.0 - cure_rate();
  if (p <= kProbTol) {
    throw DegenerateLatencyError(
        "latency is undefined: all probability mass is cured");
  }
  // p S_u(t) = pi_s [-T_sub]^{-1} exp(T_sub t) t_s; every factor nonnegative,
  // so no cancellation in the far tail.
  const double num = w.dot(expm(t_sub * t) * exit_.head(m));
  return std::clamp(num / p, 0.0, 1.0);
}

AbsorptionOutcome PhaseTypeCureModel::simulate_path(
    std::mt19937_64& rng) const {
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  // Draw the initial state from pi.
  int state = r_ - 1;
  {
    double u = unif(rng) * pi_.sum();
    double acc = 0.0;
    for (int k = 0; k < r_; ++k) {
      acc += pi_[k];
      if (u <= acc) {
        state = k;
        break;
      }
    }
  }

  double elapsed = 0.0;
  for (std::int64_t jumps = 0; jumps < kMaxJumps; ++jumps) {
    if (state == r_ - 1) {
      return {AbsorptionState::Immune,
              std::numeric_limits<double>::infinity()};
    }
    const double rate = -t_(state, state);
    if (!(rate > 0.0)) {
      throw InternalError(
          "simulate_path: transient state with zero exit rate never absorbs");
    }
    std::exponential_distribution<double> hold(rate);
    elapsed += hold(rng);

    // Jump to state l with prob T_{kl}/rate, or to death with t_k/rate.
    double u = unif(rng) * rate;
    double acc = 0.0;
    int next = -1;
    for (int l = 0; l < r_; ++l) {
      if (l == state) continue;
      acc += t_(state, l);
      if (u <= acc) {
        next = l;
        break;
      }
    }
    if (next < 0) {
      return {AbsorptionState::Death, elapsed};
    }
    state = next;
  }
  throw InternalError("simulate_path: jump cap exceeded");
}

double iph_survival(const PhaseTypeCureModel& model, const TransformFamily& tf,
                    double t) {
  return model.survival(tf.g_inverse(t));
}

double iph_density(const PhaseTypeCureModel& model, const TransformFamily& tf,
                   double t) {
  return tf.intensity(t) * model.density(tf.g_inverse(t));
}

SurvivalDataset simulate_censored(const PhaseTypeCureModel& model,
                                  const TransformFamily& tf,
                                  double censor_upper, int n,
                                  std::mt19937_64& rng) {
  if (!(censor_upper > 0.0) || !std::isfinite(censor_upper)) {
    throw InvalidInputError("simulate_censored: censor_upper must be > 0");
  }
  if (n < 0) {
    throw InvalidInputError("simulate_censored: n must be >= 0");
  }
  SurvivalDataset data;
  data.time.resize(n);
  data.event.resize(n);
  std::uniform_real_distribution<double> censor(0.0, censor_upper);
  for (int i = 0; i < n; ++i) {
    const AbsorptionOutcome path = model.simulate_path(rng);
    const double tau = (path.state == AbsorptionState::Immune)
                           ? std::numeric_limits<double>::infinity()
                           : tf.g_forward(path.time);
    double zeta = censor(rng);
    while (zeta <= 0.0) zeta = censor(rng);
    data.time[i] = std::min(tau, zeta);
    data.event[i] = tau <= zeta ? 1 : 0;
  }
  data.validate();
  return data;
}

}  // namespace cureph
