#include "cureph/nonparametric.hpp"

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <numeric>
#include <vector>

#include "cureph/errors.hpp"

namespace cureph {

namespace {

// Indices sorted by time; at tied times events come before censorings.
std::vector<int> survival_order(const Eigen::VectorXd& times,
                                const Eigen::VectorXi& events) {
  std::vector<int> idx(times.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](int a, int b) {
    if (times[a] != times[b]) return times[a] < times[b];
    return events[a] > events[b];
  });
  return idx;
}

}  // namespace

double StepFunctionCurve::value_at(double t) const {
  const Eigen::Index m = times.size();
  if (m == 0 || t < times[0]) return baseline;
  // Largest index with times[j] <= t.
  Eigen::Index lo = 0, hi = m - 1;
  while (lo < hi) {
    const Eigen::Index mid = (lo + hi + 1) / 2;
    if (times[mid] <= t) {
      lo = mid;
    } else {
      hi = mid - 1;
    }
  }
  return values[lo];
}

StepFunctionCurve kaplan_meier(const SurvivalDataset& data, double level) {
  data.validate();
  if (data.n() < 1) {
    throw InvalidInputError("kaplan_meier: empty dataset");
  }
  if (!(level > 0.0 && level < 1.0)) {
    throw InvalidInputError("kaplan_meier: level must lie in (0,1)");
  }
  const double z =
      boost::math::quantile(boost::math::normal(), 0.5 + level / 2.0);

  const std::vector<int> order = survival_order(data.time, data.event);
  const int n = data.n();

  std::vector<double> times, values, lower, upper;
  double surv = 1.0;
  double green = 0.0;  // Greenwood sum: d / (n (n - d))
  int at_risk = n;
  int pos = 0;
  while (pos < n) {
    const double t = data.time[order[pos]];
    int d = 0, c = 0;
    while (pos < n && data.time[order[pos]] == t) {
      if (data.event[order[pos]] != 0) {
        ++d;
      } else {
        ++c;
      }
      ++pos;
    }
    if (d > 0) {
      surv *= 1.0 - static_cast<double>(d) / at_risk;
      if (at_risk > d) {
        green += static_cast<double>(d) /
                 (static_cast<double>(at_risk) * (at_risk - d));
      }
      times.push_back(t);
      values.push_back(surv);
      if (surv <= 0.0 || surv >= 1.0) {
        lower.push_back(std::max(surv, 0.0));
        upper.push_back(std::clamp(surv, 0.0, 1.0));
      } else {
        // log-log bands: exp(-exp(log(-log S) -+ z se)),
        // se of log(-log S) via the delta method.
        const double log_s = std::log(surv);
        const double se = std::sqrt(green) / std::abs(log_s);
        lower.push_back(std::pow(surv, std::exp(z * se)));
        upper.push_back(std::pow(surv, std::exp(-z * se)));
      }
    }
    at_risk -= d + c;
  }

  StepFunctionCurve curve;
  curve.baseline = 1.0;
  const int m = static_cast<int>(times.size());
  curve.times = Eigen::Map<Eigen::VectorXd>(times.data(), m);
  curve.values = Eigen::Map<Eigen::VectorXd>(values.data(), m);
  curve.lower = Eigen::Map<Eigen::VectorXd>(lower.data(), m);
  curve.upper = Eigen::Map<Eigen::VectorXd>(upper.data(), m);
  return curve;
}

StepFunctionCurve nelson_aalen(const Eigen::VectorXd& times,
                               const Eigen::VectorXi& events,
                               const std::optional<Eigen::VectorXd>& weights,
                               bool* zero_risk_skipped) {
  const int n = static_cast<int>(times.size());
  if (events.size() != n) {
    throw InvalidInputError("nelson_aalen: time/event length mismatch");
  }
  Eigen::VectorXd w = weights ? *weights : Eigen::VectorXd::Ones(n);
  if (w.size() != n) {
    throw InvalidInputError("nelson_aalen: weight length mismatch");
  }
  if ((w.array() < 0.0).any() || (w.array() > 1.0 + 1e-12).any()) {
    throw InvalidInputError("nelson_aalen: weights must lie in [0,1]");
  }
  if (zero_risk_skipped) *zero_risk_skipped = false;

  const std::vector<int> order = survival_order(times, events);
  double risk_weight = w.sum();

  std::vector<double> jump_times, hazards;
  double hazard = 0.0;
  int pos = 0;
  while (pos < n) {
    const double t = times[order[pos]];
    double event_weight = 0.0;
    double leaving_weight = 0.0;
    bool any_event = false;
    while (pos < n && times[order[pos]] == t) {
      const int i = order[pos];
      if (events[i] != 0) {
        event_weight += w[i];
        any_event = true;
      }
      leaving_weight += w[i];
      ++pos;
    }
    if (any_event) {
      if (risk_weight > 0.0) {
        hazard += event_weight / risk_weight;
        jump_times.push_back(t);
        hazards.push_back(hazard);
      } else if (zero_risk_skipped) {
        *zero_risk_skipped = true;
      }
    }
    risk_weight -= leaving_weight;
  }

  StepFunctionCurve curve;
  curve.baseline = 0.0;
  const int m = static_cast<int>(jump_times.size());
  curve.times = Eigen::Map<Eigen::VectorXd>(jump_times.data(), m);
  curve.values = Eigen::Map<Eigen::VectorXd>(hazards.data(), m);
  return curve;
}

StepFunctionCurve weighted_product_limit(const Eigen::VectorXd& times,
                                         const Eigen::VectorXi& events,
                                         const Eigen::VectorXd& weights) {
  const int n = static_cast<int>(times.size());
  if (events.size() != n || weights.size() != n) {
    throw InvalidInputError("weighted_product_limit: length mismatch");
  }
  const std::vector<int> order = survival_order(times, events);
  double risk_weight = weights.sum();

  std::vector<double> jump_times, values;
  double surv = 1.0;
  int pos = 0;
  while (pos < n) {
    const double t = times[order[pos]];
    double event_weight = 0.0;
    double leaving_weight = 0.0;
    bool any_event = false;
    while (pos < n && times[order[pos]] == t) {
      const int i = order[pos];
      if (events[i] != 0) {
        event_weight += weights[i];
        any_event = true;
      }
      leaving_weight += weights[i];
      ++pos;
    }
    if (any_event && risk_weight > 0.0) {
      surv *= std::max(0.0, 1.0 - event_weight / risk_weight);
      jump_times.push_back(t);
      values.push_back(surv);
    }
    risk_weight -= leaving_weight;
  }

  StepFunctionCurve curve;
  curve.baseline = 1.0;
  const int m = static_cast<int>(jump_times.size());
  curve.times = Eigen::Map<Eigen::VectorXd>(jump_times.data(), m);
  curve.values = Eigen::Map<Eigen::VectorXd>(values.data(), m);
  return curve;
}

}  // namespace cureph
