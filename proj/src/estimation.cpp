#include "cureph/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <string>

#include "cureph/errors.hpp"
#include "cureph/matrix_core.hpp"
#include "parallel.hpp"

namespace cureph {

namespace {

constexpr int kChunk = 128;
constexpr double kMonotoneSlack = 1e-8;
constexpr double kBetaCap = 30.0;

Eigen::VectorXd exit_rates_of(const Eigen::MatrixXd& t) {
  Eigen::VectorXd exit = (-(t.rowwise().sum())).cwiseMax(0.0);
  exit[exit.size() - 1] = 0.0;
  return exit;
}

Eigen::VectorXd transformed_times(const TransformFamily& tf,
                                  const SurvivalDataset& data) {
  Eigen::VectorXd y(data.n());
  for (int i = 0; i < data.n(); ++i) y[i] = tf.g_inverse(data.time[i]);
  return y;
}

// pi_rows has one shared row or one row per observation.
const auto pi_row = [](const Eigen::MatrixXd& pi_rows, int i) {
  return pi_rows.row(pi_rows.rows() == 1 ? 0 : i);
};

// Incomplete-data loglikelihood for fixed transformed clocks. log_lambda holds
// per-observation log intensity terms (zeros for the identity family).
double loglik_core(const Eigen::MatrixXd& t, const Eigen::VectorXd& exit,
                   const Eigen::MatrixXd& pi_rows, const Eigen::VectorXd& y,
                   const Eigen::VectorXi& delta,
                   const Eigen::VectorXd& log_lambda, bool throw_on_bad) {
  const int n = static_cast<int>(y.size());
  const int n_chunks = (n + kChunk - 1) / kChunk;
  std::vector<double> partial(n_chunks, 0.0);
  std::vector<std::exception_ptr> errors(n_chunks);

  detail::for_each_chunk(n, kChunk, [&](int c, int begin, int end) {
    try {
      double acc = 0.0;
      for (int i = begin; i < end; ++i) {
        const Eigen::MatrixXd prop = expm(t * y[i]);
        double value;
        if (delta[i] != 0) {
          value = pi_row(pi_rows, i).dot(prop * exit);
        } else {
          value = (pi_row(pi_rows, i) * prop).sum();
        }
        if (!(value > 0.0) || !std::isfinite(value)) {
          throw NonfiniteLikelihoodError(
              "loglikelihood is not finite at observation " +
              std::to_string(i));
        }
        acc += std::log(value) + (delta[i] != 0 ? log_lambda[i] : 0.0);
      }
      partial[c] = acc;
    } catch (...) {
      errors[c] = std::current_exception();
    }
  });
  for (int c = 0; c < n_chunks; ++c) {
    if (errors[c]) {
      if (throw_on_bad) std::rethrow_exception(errors[c]);
      return -std::numeric_limits<double>::infinity();
    }
  }
  double total = 0.0;
  for (int c = 0; c < n_chunks; ++c) total += partial[c];
  return total;
}

Eigen::VectorXd log_intensity_terms(const TransformFamily& tf,
                                    const SurvivalDataset& data) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(data.n());
  if (tf.kind() == TransformKind::Identity) return out;
  for (int i = 0; i < data.n(); ++i) {
    if (data.event[i] != 0) out[i] = std::log(tf.intensity(data.time[i]));
  }
  return out;
}

SufficientStats e_step_core(const Eigen::MatrixXd& t,
                            const Eigen::MatrixXd& pi_rows,
                            const Eigen::VectorXd& y,
                            const Eigen::VectorXi& delta, bool keep_a_obs) {
  const int n = static_cast<int>(y.size());
  const int r = static_cast<int>(t.rows());
  const Eigen::VectorXd exit = exit_rates_of(t);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(r);

  const int n_chunks = (n + kChunk - 1) / kChunk;
  struct Partial {
    Eigen::VectorXd a, b, d;
    Eigen::MatrixXd jsum;
  };
  std::vector<Partial> partials(n_chunks);
  std::vector<std::exception_ptr> errors(n_chunks);
  Eigen::MatrixXd a_obs;
  if (keep_a_obs) a_obs.setZero(n, r);

  detail::for_each_chunk(n, kChunk, [&](int c, int begin, int end) {
    try {
      Partial p{Eigen::VectorXd::Zero(r), Eigen::VectorXd::Zero(r),
                Eigen::VectorXd::Zero(r), Eigen::MatrixXd::Zero(r, r)};
      Eigen::MatrixXd aug(2 * r, 2 * r);
      for (int i = begin; i < end; ++i) {
        const Eigen::VectorXd pi_i = pi_row(pi_rows, i).transpose();
        const Eigen::VectorXd& eta = delta[i] != 0 ? exit : ones;

        aug.setZero();
        aug.topLeftCorner(r, r) = t * y[i];
        aug.bottomRightCorner(r, r) = t * y[i];
        aug.topRightCorner(r, r) = (eta * pi_i.transpose()) * y[i];
        const Eigen::MatrixXd big = expm(aug);
        const auto prop = big.topLeftCorner(r, r);      // exp(T y_i)
        const auto conv = big.topRightCorner(r, r);     // Van Loan block

        const Eigen::VectorXd v = prop * eta;
        const double denom = pi_i.dot(v);
        if (!(denom > 0.0) || !std::isfinite(denom)) {
          throw NonfiniteLikelihoodError(
              "E-step denominator vanished at observation " +
              std::to_string(i));
        }
        const Eigen::VectorXd start = pi_i.cwiseProduct(v) / denom;
        p.a += start;
        if (keep_a_obs) a_obs.row(i) = start.transpose();
        p.b += conv.diagonal() / denom;
        p.jsum += conv.transpose() / denom;
        if (delta[i] != 0) {
          p.d += exit.cwiseProduct(prop.transpose() * pi_i) / denom;
        }
      }
      partials[c] = std::move(p);
    } catch (...) {
      errors[c] = std::current_exception();
    }
  });
  for (int c = 0; c < n_chunks; ++c) {
    if (errors[c]) std::rethrow_exception(errors[c]);
  }

  SufficientStats stats;
  stats.a = Eigen::VectorXd::Zero(r);
  stats.b = Eigen::VectorXd::Zero(r);
  stats.d = Eigen::VectorXd::Zero(r);
  Eigen::MatrixXd jsum = Eigen::MatrixXd::Zero(r, r);
  for (int c = 0; c < n_chunks; ++c) {
    stats.a += partials[c].a;
    stats.b += partials[c].b;
    stats.d += partials[c].d;
    jsum += partials[c].jsum;
  }
  stats.c = t.cwiseProduct(jsum).cwiseMax(0.0);
  stats.c.diagonal().setZero();
  stats.a = stats.a.cwiseMax(0.0);
  stats.b = stats.b.cwiseMax(0.0);
  stats.d = stats.d.cwiseMax(0.0);
  if (keep_a_obs) stats.a_obs = std::move(a_obs);
  return stats;
}

}  // namespace

Eigen::VectorXd MoeCureModel::pi_for(const Eigen::VectorXd& x) const {
  return softmax_pi(beta, x);
}

PhaseTypeCureModel MoeCureModel::model_for(const Eigen::VectorXd& x) const {
  return PhaseTypeCureModel(pi_for(x), sub_intensity, mask);
}

double loglikelihood(const PhaseTypeCureModel& model, const TransformFamily& tf,
                     const SurvivalDataset& data) {
  data.validate();
  return loglik_core(model.sub_intensity(), model.exit_rates(),
                     model.pi().transpose(), transformed_times(tf, data),
                     data.event, log_intensity_terms(tf, data), true);
}

double loglikelihood(const MoeCureModel& model, const SurvivalDataset& data) {
  data.validate();
  if (!data.has_covariates()) {
    throw InvalidInputError("regression loglikelihood requires covariates");
  }
  const int n = data.n();
  Eigen::MatrixXd pi_rows(n, model.dim());
  for (int i = 0; i < n; ++i) {
    pi_rows.row(i) =
        softmax_pi(model.beta, data.covariates->row(i).transpose()).transpose();
  }
  return loglik_core(model.sub_intensity, exit_rates_of(model.sub_intensity),
                     pi_rows, transformed_times(model.transform, data),
                     data.event, log_intensity_terms(model.transform, data),
                     true);
}

SufficientStats e_step(const PhaseTypeCureModel& model,
                       const TransformFamily& tf, const SurvivalDataset& data) {
  data.validate();
  return e_step_core(model.sub_intensity(), model.pi().transpose(),
                     transformed_times(tf, data), data.event, false);
}

SufficientStats e_step(const MoeCureModel& model, const SurvivalDataset& data) {
  data.validate();
  if (!data.has_covariates()) {
    throw InvalidInputError("regression E-step requires covariates");
  }
  const int n = data.n();
  Eigen::MatrixXd pi_rows(n, model.dim());
  for (int i = 0; i < n; ++i) {
    pi_rows.row(i) =
        softmax_pi(model.beta, data.covariates->row(i).transpose()).transpose();
  }
  return e_step_core(model.sub_intensity, pi_rows,
                     transformed_times(model.transform, data), data.event,
                     true);
}

std::pair<Eigen::VectorXd, Eigen::MatrixXd> m_step(
    const SufficientStats& stats, int n, const PhaseTypeCureModel::Mask& mask,
    const Eigen::MatrixXd& prev_T) {
  const int r = static_cast<int>(stats.a.size());
  if (n <= 0) throw InvalidInputError("m_step: n must be positive");

  Eigen::VectorXd pi = (stats.a / n).cwiseMax(0.0);
  const double total = pi.sum();
  if (!(total > 0.0)) throw DegenerateStateError("m_step: empty start weights");
  pi /= total;

  Eigen::MatrixXd t_new = Eigen::MatrixXd::Zero(r, r);
  for (int k = 0; k < r; ++k) {
    if (stats.b[k] > 0.0) {
      double off_sum = 0.0;
      for (int l = 0; l < r; ++l) {
        if (l == k || mask(k, l) != 0) continue;
        t_new(k, l) = stats.c(k, l) / stats.b[k];
        off_sum += t_new(k, l);
      }
      const double exit_k = stats.d[k] / stats.b[k];
      t_new(k, k) = mask(k, k) != 0 ? 0.0 : -(off_sum + exit_k);
    } else {
      if (stats.a[k] > 1e-12) {
        throw DegenerateStateError(
            "m_step: state " + std::to_string(k + 1) +
            " carries start mass but was never occupied");
      }
      t_new.row(k) = prev_T.row(k);
    }
  }
  return {std::move(pi), std::move(t_new)};
}

FitReport em_fit(const PhaseTypeCureModel& init, const TransformFamily& tf0,
                 const SurvivalDataset& data, const FitConfig& config) {
  data.validate();
  if (data.n() < 1) throw InvalidInputError("em_fit: empty dataset");

  PhaseTypeCureModel model = init;
  TransformFamily tf = tf0;
  FitReport report{.model = model, .transform = tf};
  report.loglik_trace.push_back(loglikelihood(model, tf, data));

  for (int step = 1; step <= config.max_steps; ++step) {
    const SufficientStats stats = e_step(model, tf, data);
    auto [pi, t_new] = m_step(stats, data.n(), model.mask(),
                              model.sub_intensity());
    model = PhaseTypeCureModel(std::move(pi), std::move(t_new), model.mask());
    if (config.update_transform && tf.n_params() > 0) {
      bool stalled = false;
      tf = update_theta(tf, model.sub_intensity(), model.pi().transpose(),
                        data, &stalled);
      report.theta_stalled = report.theta_stalled || stalled;
    }
    const double ll = loglikelihood(model, tf, data);
    const double prev = report.loglik_trace.back();
    if (ll < prev - kMonotoneSlack) {
      throw InternalError("em_fit: loglikelihood decreased from " +
                          std::to_string(prev) + " to " + std::to_string(ll));
    }
    report.loglik_trace.push_back(ll);
    report.iterations = step;
    if (std::abs(ll - prev) < config.tol * (1.0 + std::abs(ll))) {
      report.converged = true;
      break;
    }
  }

  report.model = model;
  report.transform = tf;
  report.cure_rate = model.cure_rate();
  return report;
}

Eigen::VectorXd softmax_pi(const Eigen::MatrixXd& beta,
                           const Eigen::VectorXd& x) {
  if (beta.cols() != x.size()) {
    throw InvalidInputError("softmax_pi: covariate length mismatch");
  }
  if (!x.allFinite()) {
    throw InvalidInputError("softmax_pi: non-finite covariates");
  }
  Eigen::VectorXd z = beta * x;
  z.array() -= z.maxCoeff();
  Eigen::VectorXd e = z.array().exp();
  return e / e.sum();
}

Eigen::MatrixXd fit_weighted_multinomial(const Eigen::MatrixXd& weights,
                                         const Eigen::MatrixXd& covariates,
                                         bool* capped) {
  const int n = static_cast<int>(weights.rows());
  const int r = static_cast<int>(weights.cols());
  const int h = static_cast<int>(covariates.cols());
  if (covariates.rows() != n || n == 0 || r < 2) {
    throw InvalidInputError("fit_weighted_multinomial: bad dimensions");
  }
  if ((weights.array() < -1e-12).any()) {
    throw InvalidInputError("fit_weighted_multinomial: negative weights");
  }
  if (capped) *capped = false;

  const Eigen::VectorXd row_sum = weights.rowwise().sum();
  const int m = (r - 1) * h;  // free parameters; row 1 is the reference

  Eigen::MatrixXd beta = Eigen::MatrixXd::Zero(r, h);

  const auto objective = [&](const Eigen::MatrixXd& b) {
    const Eigen::MatrixXd z = covariates * b.transpose();  // n x r
    double f = (weights.array() * z.array()).sum();
    for (int i = 0; i < n; ++i) {
      const double zmax = z.row(i).maxCoeff();
      const double lse =
          zmax + std::log((z.row(i).array() - zmax).exp().sum());
      f -= row_sum[i] * lse;
    }
    return f;
  };
  const auto softmax_rows = [&](const Eigen::MatrixXd& b) {
    Eigen::MatrixXd s = covariates * b.transpose();
    for (int i = 0; i < n; ++i) {
      const double zmax = s.row(i).maxCoeff();
      s.row(i) = (s.row(i).array() - zmax).exp();
      s.row(i) /= s.row(i).sum();
    }
    return s;
  };

  double f = objective(beta);
  bool clamped_any = false;
  for (int iter = 0; iter < 200; ++iter) {
    const Eigen::MatrixXd s = softmax_rows(beta);
    // Gradient over the free rows.
    Eigen::VectorXd grad(m);
    for (int k = 1; k < r; ++k) {
      grad.segment((k - 1) * h, h) =
          covariates.transpose() *
          (weights.col(k) - row_sum.cwiseProduct(s.col(k)));
    }
    if (grad.norm() <= 1e-8 * n) break;

    // Negated Hessian blocks: sum_i R_i s_ik (delta_kk' - s_ik') x_i x_i^T.
    Eigen::MatrixXd neg_hess = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < n; ++i) {
      const Eigen::VectorXd xi = covariates.row(i).transpose();
      const Eigen::MatrixXd xxt = xi * xi.transpose();
      for (int k = 1; k < r; ++k) {
        for (int l = 1; l < r; ++l) {
          const double w = row_sum[i] * s(i, k) *
                           ((k == l ? 1.0 : 0.0) - s(i, l));
          if (w != 0.0) {
            neg_hess.block((k - 1) * h, (l - 1) * h, h, h) += w * xxt;
          }
        }
      }
    }
    neg_hess.diagonal().array() += 1e-9 * std::max(1.0, neg_hess.norm());

    const Eigen::VectorXd direction = neg_hess.ldlt().solve(grad);
    if (!direction.allFinite()) break;

    // Step halving on the ascent direction.
    double step = 1.0;
    bool improved = false;
    Eigen::MatrixXd candidate = beta;
    for (int halving = 0; halving < 40; ++halving) {
      candidate = beta;
      for (int k = 1; k < r; ++k) {
        candidate.row(k) += step * direction.segment((k - 1) * h, h).transpose();
      }
      const double fc = objective(candidate);
      if (fc >= f - 1e-12) {
        f = fc;
        improved = true;
        break;
      }
      step /= 2.0;
    }
    if (!improved) break;

    // Separation guard: cap runaway coefficients.
    const double biggest = candidate.cwiseAbs().maxCoeff();
    if (biggest > kBetaCap) {
      candidate = candidate.cwiseMax(-kBetaCap).cwiseMin(kBetaCap);
      candidate.row(0).setZero();
      clamped_any = true;
      f = objective(candidate);
    }
    beta = candidate;
  }

  if (clamped_any && capped) *capped = true;
  beta.row(0).setZero();
  return beta;
}

namespace {

// Objective of the theta update (incomplete-data loglikelihood as a function
// of the transform parameters, with pi and T held fixed). Returns -inf for
// inadmissible parameter vectors.
double theta_objective(const TransformFamily& base,
                       const std::vector<double>& params,
                       const Eigen::MatrixXd& t, const Eigen::VectorXd& exit,
                       const Eigen::MatrixXd& pi_rows,
                       const SurvivalDataset& data) {
  TransformFamily tf = base;
  try {
    tf = base.with_params(params);
  } catch (const Error&) {
    return -std::numeric_limits<double>::infinity();
  }
  Eigen::VectorXd y(data.n());
  Eigen::VectorXd log_lambda = Eigen::VectorXd::Zero(data.n());
  try {
    for (int i = 0; i < data.n(); ++i) {
      y[i] = tf.g_inverse(data.time[i]);
      if (data.event[i] != 0) {
        const double lam = tf.intensity(data.time[i]);
        if (!(lam > 0.0) || !std::isfinite(lam)) {
          return -std::numeric_limits<double>::infinity();
        }
        log_lambda[i] = std::log(lam);
      }
      if (!std::isfinite(y[i])) {
        return -std::numeric_limits<double>::infinity();
      }
    }
  } catch (const Error&) {
    return -std::numeric_limits<double>::infinity();
  }
  return loglik_core(t, exit, pi_rows, y, data.event, log_lambda, false);
}

// Golden-section maximization on [lo, hi].
template <typename F>
double golden_max(const F& f, double lo, double hi, int iters) {
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - phi * (hi - lo);
  double x2 = lo + phi * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < iters; ++it) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + phi * (hi - lo);
      f2 = f(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - phi * (hi - lo);
      f1 = f(x1);
    }
  }
  return f1 >= f2 ? x1 : x2;
}

}  // namespace

TransformFamily update_theta(const TransformFamily& tf,
                             const Eigen::MatrixXd& sub_intensity,
                             const Eigen::MatrixXd& pi_rows,
                             const SurvivalDataset& data, bool* stalled) {
  if (stalled) *stalled = false;
  if (tf.n_params() == 0) return tf;
  data.validate();

  const Eigen::VectorXd exit = exit_rates_of(sub_intensity);
  const auto q = [&](const std::vector<double>& params) {
    return theta_objective(tf, params, sub_intensity, exit, pi_rows, data);
  };
  const double q0 = q(tf.params());

  // Log-scale parameterization keeps every family inside its domain; the
  // lognormal gamma > 1 constraint maps through log(gamma - 1).
  const bool shift_one = tf.kind() == TransformKind::Lognormal;
  const auto to_param = [&](double z) {
    return shift_one ? 1.0 + std::exp(z) : std::exp(z);
  };
  const auto from_param = [&](double p) {
    return shift_one ? std::log(std::max(p - 1.0, 1e-12)) : std::log(p);
  };

  std::vector<double> best = tf.params();
  double best_q = q0;

  if (tf.n_params() == 1) {
    const double z0 = from_param(tf.params()[0]);
    const auto q1 = [&](double z) { return q({to_param(z)}); };
    static const double offsets[] = {-2.0, -1.5, -1.0, -0.6, -0.3, -0.1, 0.0,
                                     0.1,  0.3,  0.6,  1.0,  1.5,  2.0};
    double zbest = z0;
    double fbest = q0;
    for (const double off : offsets) {
      const double fz = q1(z0 + off);
      if (fz > fbest) {
        fbest = fz;
        zbest = z0 + off;
      }
    }
    if (std::isfinite(fbest)) {
      const double zref = golden_max(q1, zbest - 0.35, zbest + 0.35, 20);
      const double fref = q1(zref);
      if (fref > fbest) {
        fbest = fref;
        zbest = zref;
      }
      if (fbest > best_q) {
        best_q = fbest;
        best = {to_param(zbest)};
      }
    }
  } else {
    // Two parameters (loglogistic): Nelder-Mead in log coordinates.
    using Point = Eigen::Vector2d;
    const auto q2 = [&](const Point& z) {
      return q({std::exp(z[0]), std::exp(z[1])});
    };
    Point z0(std::log(tf.params()[0]), std::log(tf.params()[1]));
    std::vector<Point> simplex = {z0, z0 + Point(0.5, 0.0),
                                  z0 + Point(0.0, 0.5)};
    std::vector<double> fv = {q2(simplex[0]), q2(simplex[1]), q2(simplex[2])};
    for (int it = 0; it < 120; ++it) {
      // Order ascending by objective (worst first).
      std::vector<int> idx = {0, 1, 2};
      std::sort(idx.begin(), idx.end(),
                [&](int a, int b) { return fv[a] < fv[b]; });
      const int iw = idx[0], im = idx[1], ib = idx[2];
      if (std::isfinite(fv[ib]) && std::isfinite(fv[iw]) &&
          std::abs(fv[ib] - fv[iw]) <
              1e-10 * (1.0 + std::abs(fv[ib]))) {
        break;
      }
      const Point centroid = 0.5 * (simplex[im] + simplex[ib]);
      const Point reflect = centroid + (centroid - simplex[iw]);
      const double fr = q2(reflect);
      if (fr > fv[ib]) {
        const Point expand = centroid + 2.0 * (centroid - simplex[iw]);
        const double fe = q2(expand);
        if (fe > fr) {
          simplex[iw] = expand;
          fv[iw] = fe;
        } else {
          simplex[iw] = reflect;
          fv[iw] = fr;
        }
      } else if (fr > fv[iw]) {
        simplex[iw] = reflect;
        fv[iw] = fr;
      } else {
        const Point contract = centroid + 0.5 * (simplex[iw] - centroid);
        const double fc = q2(contract);
        if (fc > fv[iw]) {
          simplex[iw] = contract;
          fv[iw] = fc;
        } else {
          simplex[iw] = simplex[ib] + 0.5 * (simplex[iw] - simplex[ib]);
          simplex[im] = simplex[ib] + 0.5 * (simplex[im] - simplex[ib]);
          fv[iw] = q2(simplex[iw]);
          fv[im] = q2(simplex[im]);
        }
      }
    }
    for (int v = 0; v < 3; ++v) {
      if (fv[v] > best_q) {
        best_q = fv[v];
        best = {std::exp(simplex[v][0]), std::exp(simplex[v][1])};
      }
    }
  }

  if (!std::isfinite(best_q)) {
    if (stalled) *stalled = true;
    return tf;
  }
  if (best_q <= q0) return tf;  // ascent contract
  return tf.with_params(best);
}

FitReport moe_em_fit(const MoeCureModel& init, const SurvivalDataset& data,
                     const FitConfig& config) {
  data.validate();
  if (!data.has_covariates()) {
    throw InvalidInputError("moe_em_fit: dataset has no covariates");
  }
  const int n = data.n();
  const int r = init.dim();
  const Eigen::MatrixXd& x = *data.covariates;
  if (x.cols() != init.n_features()) {
    throw InvalidInputError("moe_em_fit: covariate width does not match beta");
  }

  // Pin the reference row by shift invariance.
  Eigen::MatrixXd beta = init.beta;
  beta.rowwise() -= init.beta.row(0);
  Eigen::MatrixXd t = init.sub_intensity;
  const PhaseTypeCureModel::Mask mask = init.mask;
  TransformFamily tf = init.transform;

  const auto pi_matrix = [&](const Eigen::MatrixXd& b) {
    Eigen::MatrixXd p(n, r);
    for (int i = 0; i < n; ++i) {
      p.row(i) = softmax_pi(b, x.row(i).transpose()).transpose();
    }
    return p;
  };
  const auto average_model = [&](const Eigen::MatrixXd& p,
                                 const Eigen::MatrixXd& tm) {
    return PhaseTypeCureModel(p.colwise().mean().transpose(), tm, mask);
  };

  Eigen::MatrixXd pi_rows = pi_matrix(beta);
  // Validates the initial sub-intensity as a side effect.
  PhaseTypeCureModel snapshot = average_model(pi_rows, t);

  MoeCureModel current{beta, t, mask, tf};
  FitReport report{.model = snapshot, .transform = tf};
  report.beta = beta;
  report.loglik_trace.push_back(loglikelihood(current, data));

  for (int step = 1; step <= config.max_steps; ++step) {
    const SufficientStats stats = e_step(current, data);
    auto [pi_unused, t_new] = m_step(stats, n, mask, current.sub_intensity);
    (void)pi_unused;
    t = std::move(t_new);

    bool capped = false;
    beta = fit_weighted_multinomial(stats.a_obs, x, &capped);
    report.beta_capped = report.beta_capped || capped;
    pi_rows = pi_matrix(beta);

    if (config.update_transform && tf.n_params() > 0) {
      bool stalled = false;
      tf = update_theta(tf, t, pi_rows, data, &stalled);
      report.theta_stalled = report.theta_stalled || stalled;
    }

    current = MoeCureModel{beta, t, mask, tf};
    const double ll = loglikelihood(current, data);
    const double prev = report.loglik_trace.back();
    if (ll < prev - kMonotoneSlack) {
      throw InternalError("moe_em_fit: loglikelihood decreased from " +
                          std::to_string(prev) + " to " + std::to_string(ll));
    }
    report.loglik_trace.push_back(ll);
    report.iterations = step;
    if (std::abs(ll - prev) < config.tol * (1.0 + std::abs(ll))) {
      report.converged = true;
      break;
    }
  }

  snapshot = average_model(pi_rows, t);
  report.model = snapshot;
  report.transform = tf;
  report.beta = beta;
  report.cure_rate = snapshot.cure_rate();

  // Covariate-dependent susceptible fractions p(x_i).
  const int m = r - 1;
  const Eigen::VectorXd to_immune_weight =
      green_solve(t.topLeftCorner(m, m), t.topRightCorner(m, 1));
  report.susceptible_fraction_per_subject.resize(n);
  for (int i = 0; i < n; ++i) {
    const double cured =
        pi_rows.row(i).head(m).dot(to_immune_weight) + pi_rows(i, r - 1);
    report.susceptible_fraction_per_subject[i] =
        std::clamp(1.0 - cured, 0.0, 1.0);
  }
  return report;
}

}  // namespace cureph
