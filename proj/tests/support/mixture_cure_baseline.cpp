#include "support/mixture_cure_baseline.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

namespace cureph::testing {

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double loglik(const SurvivalDataset& data, double p, double shape,
              double scale) {
  double ll = 0.0;
  for (int i = 0; i < data.n(); ++i) {
    const double z = std::pow(data.time[i] / scale, shape);
    const double s_u = std::exp(-z);
    if (data.event[i] != 0) {
      const double f_u =
          shape / scale * std::pow(data.time[i] / scale, shape - 1.0) * s_u;
      const double value = p * f_u;
      if (!(value > 0.0)) return -std::numeric_limits<double>::infinity();
      ll += std::log(value);
    } else {
      const double value = (1.0 - p) + p * s_u;
      if (!(value > 0.0)) return -std::numeric_limits<double>::infinity();
      ll += std::log(value);
    }
  }
  return ll;
}

// Minimal Nelder-Mead maximizer, enough for a 2-3 parameter baseline.
std::vector<double> nelder_mead(
    const std::function<double(const std::vector<double>&)>& f,
    std::vector<double> start, double step, int iters) {
  const size_t d = start.size();
  std::vector<std::vector<double>> simplex(d + 1, start);
  std::vector<double> value(d + 1);
  for (size_t v = 1; v <= d; ++v) simplex[v][v - 1] += step;
  for (size_t v = 0; v <= d; ++v) value[v] = f(simplex[v]);

  for (int it = 0; it < iters; ++it) {
    size_t best = 0, worst = 0, second = 0;
    for (size_t v = 1; v <= d; ++v) {
      if (value[v] > value[best]) best = v;
      if (value[v] < value[worst]) worst = v;
    }
    second = best;
    for (size_t v = 0; v <= d; ++v) {
      if (v != worst && value[v] < value[second]) second = v;
    }
    std::vector<double> centroid(d, 0.0);
    for (size_t v = 0; v <= d; ++v) {
      if (v == worst) continue;
      for (size_t j = 0; j < d; ++j) centroid[j] += simplex[v][j] / d;
    }
    std::vector<double> reflect(d), expand(d), contract(d);
    for (size_t j = 0; j < d; ++j) {
      reflect[j] = centroid[j] + (centroid[j] - simplex[worst][j]);
      expand[j] = centroid[j] + 2.0 * (centroid[j] - simplex[worst][j]);
      contract[j] = centroid[j] + 0.5 * (simplex[worst][j] - centroid[j]);
    }
    const double fr = f(reflect);
    if (fr > value[best]) {
      const double fe = f(expand);
      if (fe > fr) {
        simplex[worst] = expand;
        value[worst] = fe;
      } else {
        simplex[worst] = reflect;
        value[worst] = fr;
      }
    } else if (fr > value[second]) {
      simplex[worst] = reflect;
      value[worst] = fr;
    } else {
      const double fc = f(contract);
      if (fc > value[worst]) {
        simplex[worst] = contract;
        value[worst] = fc;
      } else {
        for (size_t v = 0; v <= d; ++v) {
          if (v == best) continue;
          for (size_t j = 0; j < d; ++j) {
            simplex[v][j] = simplex[best][j] +
                            0.5 * (simplex[v][j] - simplex[best][j]);
          }
          value[v] = f(simplex[v]);
        }
      }
    }
  }
  size_t best = 0;
  for (size_t v = 1; v <= d; ++v) {
    if (value[v] > value[best]) best = v;
  }
  return simplex[best];
}

MixtureCureFit fit_cure(const SurvivalDataset& data, bool weibull) {
  // Moment-style starts: event fraction for p, mean event time for scale.
  double event_mean = 0.0;
  int events = 0;
  for (int i = 0; i < data.n(); ++i) {
    if (data.event[i] != 0) {
      event_mean += data.time[i];
      ++events;
    }
  }
  event_mean = events > 0 ? event_mean / events : data.time.mean();
  const double p0 =
      std::clamp(static_cast<double>(events) / data.n(), 0.05, 0.95);

  MixtureCureFit best;
  best.loglik = -std::numeric_limits<double>::infinity();
  for (const double p_start : {p0, 0.5, 0.9}) {
    std::vector<double> start = {std::log(p_start / (1.0 - p_start)),
                                 std::log(event_mean)};
    if (weibull) start.push_back(0.0);  // log shape
    const auto objective = [&](const std::vector<double>& z) {
      const double p = sigmoid(z[0]);
      const double scale = std::exp(z[1]);
      const double shape = weibull ? std::exp(z[2]) : 1.0;
      if (shape > 50.0 || scale > 1e8 || scale < 1e-8) {
        return -std::numeric_limits<double>::infinity();
      }
      return loglik(data, p, shape, scale);
    };
    const std::vector<double> z = nelder_mead(objective, start, 0.5, 400);
    const double ll = objective(z);
    if (ll > best.loglik) {
      best.p = sigmoid(z[0]);
      best.scale = std::exp(z[1]);
      best.shape = weibull ? std::exp(z[2]) : 1.0;
      best.loglik = ll;
    }
  }
  return best;
}

}  // namespace

MixtureCureFit fit_exponential_cure(const SurvivalDataset& data) {
  return fit_cure(data, false);
}

MixtureCureFit fit_weibull_cure(const SurvivalDataset& data) {
  return fit_cure(data, true);
}

}  // namespace cureph::testing
