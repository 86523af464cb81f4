#include <doctest.h>

#include <cmath>
#include <random>

#include "cureph/errors.hpp"
#include "cureph/nonparametric.hpp"

using namespace cureph;

namespace {

SurvivalDataset dataset(std::initializer_list<double> times,
                        std::initializer_list<int> events) {
  SurvivalDataset data;
  data.time.resize(static_cast<int>(times.size()));
  data.event.resize(static_cast<int>(events.size()));
  int i = 0;
  for (const double t : times) data.time[i++] = t;
  i = 0;
  for (const int e : events) data.event[i++] = e;
  return data;
}

// Censored sample from Exp(1) with Uniform(0, 3) censoring.
SurvivalDataset random_censored(int n, std::mt19937_64& rng) {
  std::exponential_distribution<double> life(1.0);
  std::uniform_real_distribution<double> censor(1e-9, 3.0);
  SurvivalDataset data;
  data.time.resize(n);
  data.event.resize(n);
  for (int i = 0; i < n; ++i) {
    const double tau = life(rng) + 1e-12;
    const double zeta = censor(rng);
    data.time[i] = std::min(tau, zeta);
    data.event[i] = tau <= zeta ? 1 : 0;
  }
  return data;
}

}  // namespace

TEST_CASE("Kaplan-Meier hand computations") {
  {
    const StepFunctionCurve km = kaplan_meier(dataset({1, 2, 3}, {1, 1, 1}));
    REQUIRE(km.times.size() == 3);
    CHECK(km.values[0] == doctest::Approx(2.0 / 3.0));
    CHECK(km.values[1] == doctest::Approx(1.0 / 3.0));
    CHECK(km.values[2] == doctest::Approx(0.0));
    CHECK(km.plateau() == doctest::Approx(0.0));
  }
  {
    // Censoring at t=2 shrinks the risk set: S(3) = (1 - 1/3)(1 - 1/1) = 0.
    const StepFunctionCurve km = kaplan_meier(dataset({1, 2, 3}, {1, 0, 1}));
    REQUIRE(km.times.size() == 2);
    CHECK(km.value_at(1.0) == doctest::Approx(2.0 / 3.0));
    CHECK(km.value_at(2.0) == doctest::Approx(2.0 / 3.0));
    CHECK(km.value_at(3.0) == doctest::Approx(0.0));
    CHECK(km.value_at(0.5) == doctest::Approx(1.0));
  }
  {
    // No events at all: the curve is identically one.
    const StepFunctionCurve km = kaplan_meier(dataset({1, 2, 3}, {0, 0, 0}));
    CHECK(km.times.size() == 0);
    CHECK(km.value_at(2.5) == doctest::Approx(1.0));
    CHECK(km.plateau() == doctest::Approx(1.0));
  }
  CHECK_THROWS_AS(kaplan_meier(dataset({1.0}, {1}), 1.5), InvalidInputError);
}

TEST_CASE("Kaplan-Meier equals one minus the empirical CDF when uncensored") {
  std::mt19937_64 rng(109);
  std::exponential_distribution<double> life(0.7);
  const int n = 200;
  SurvivalDataset data;
  data.time.resize(n);
  data.event = Eigen::VectorXi::Ones(n);
  for (int i = 0; i < n; ++i) data.time[i] = life(rng) + 1e-12;

  const StepFunctionCurve km = kaplan_meier(data);
  for (Eigen::Index j = 0; j < km.times.size(); ++j) {
    int above = 0;
    for (int i = 0; i < n; ++i) {
      if (data.time[i] > km.times[j]) ++above;
    }
    CHECK(km.values[j] == doctest::Approx(static_cast<double>(above) / n)
                              .epsilon(1e-12));
  }
}

TEST_CASE("Kaplan-Meier band geometry") {
  std::mt19937_64 rng(113);
  const SurvivalDataset small = random_censored(100, rng);
  const SurvivalDataset big = random_censored(10000, rng);
  const StepFunctionCurve km_small = kaplan_meier(small);
  const StepFunctionCurve km_big = kaplan_meier(big);

  for (Eigen::Index j = 0; j < km_small.times.size(); ++j) {
    CHECK(km_small.lower[j] <= km_small.values[j] + 1e-12);
    CHECK(km_small.values[j] <= km_small.upper[j] + 1e-12);
  }

  // Average band width shrinks with n (same generating law).
  const auto mean_width = [](const StepFunctionCurve& km) {
    double acc = 0.0;
    for (Eigen::Index j = 0; j < km.times.size(); ++j) {
      acc += km.upper[j] - km.lower[j];
    }
    return acc / static_cast<double>(km.times.size());
  };
  CHECK(mean_width(km_big) < 0.5 * mean_width(km_small));
}

TEST_CASE("Nelson-Aalen hand computations") {
  {
    Eigen::VectorXd times(3);
    times << 1, 2, 3;
    Eigen::VectorXi events(3);
    events << 1, 0, 1;
    const StepFunctionCurve na = nelson_aalen(times, events);
    REQUIRE(na.times.size() == 2);
    CHECK(na.value_at(1.0) == doctest::Approx(1.0 / 3.0));
    CHECK(na.value_at(3.0) == doctest::Approx(1.0 / 3.0 + 1.0));
    CHECK(na.value_at(0.2) == doctest::Approx(0.0));
  }
  {
    Eigen::VectorXd times(1);
    times << 1.0;
    Eigen::VectorXi events(1);
    events << 1;
    const StepFunctionCurve na = nelson_aalen(times, events);
    CHECK(na.value_at(1.0) == doctest::Approx(1.0));
  }
}

TEST_CASE("weighted Nelson-Aalen drops zero-weight subjects from risk sets") {
  std::mt19937_64 rng(127);
  const SurvivalDataset data = random_censored(300, rng);

  // Weights: 1 on events, 0 on censored.
  Eigen::VectorXd weights(data.n());
  for (int i = 0; i < data.n(); ++i) {
    weights[i] = data.event[i] != 0 ? 1.0 : 0.0;
  }
  const StepFunctionCurve weighted =
      nelson_aalen(data.time, data.event, weights);

  // Equivalent unweighted estimator on the event-only subset.
  const int n_events = data.event.sum();
  Eigen::VectorXd sub_times(n_events);
  Eigen::VectorXi sub_events(n_events);
  int k = 0;
  for (int i = 0; i < data.n(); ++i) {
    if (data.event[i] != 0) {
      sub_times[k] = data.time[i];
      sub_events[k] = 1;
      ++k;
    }
  }
  const StepFunctionCurve subset = nelson_aalen(sub_times, sub_events);
  REQUIRE(weighted.times.size() == subset.times.size());
  for (Eigen::Index j = 0; j < weighted.times.size(); ++j) {
    CHECK(weighted.values[j] == doctest::Approx(subset.values[j]));
  }
}

TEST_CASE("Nelson-Aalen skips events with an empty weighted risk set") {
  Eigen::VectorXd times(2);
  times << 1.0, 2.0;
  Eigen::VectorXi events(2);
  events << 0, 1;
  Eigen::VectorXd weights(2);
  weights << 1.0, 0.0;  // at t=2 nothing carries weight
  bool skipped = false;
  const StepFunctionCurve na = nelson_aalen(times, events, weights, &skipped);
  CHECK(skipped);
  CHECK(na.times.size() == 0);

  CHECK_THROWS_AS(
      nelson_aalen(times, events, Eigen::VectorXd::Constant(2, 2.0)),
      InvalidInputError);
}

TEST_CASE("exp(-H) dominates the Kaplan-Meier curve") {
  std::mt19937_64 rng(131);
  for (int rep = 0; rep < 5; ++rep) {
    const SurvivalDataset data = random_censored(500, rng);
    const StepFunctionCurve km = kaplan_meier(data);
    const StepFunctionCurve na = nelson_aalen(data.time, data.event);
    for (Eigen::Index j = 0; j < km.times.size(); ++j) {
      CHECK(std::exp(-na.value_at(km.times[j])) >= km.values[j] - 1e-12);
    }
  }
}

TEST_CASE("weighted product limit reduces to Kaplan-Meier at unit weights") {
  std::mt19937_64 rng(137);
  const SurvivalDataset data = random_censored(400, rng);
  const StepFunctionCurve km = kaplan_meier(data);
  const StepFunctionCurve wpl = weighted_product_limit(
      data.time, data.event, Eigen::VectorXd::Ones(data.n()));
  REQUIRE(km.times.size() == wpl.times.size());
  for (Eigen::Index j = 0; j < km.times.size(); ++j) {
    CHECK(wpl.values[j] == doctest::Approx(km.values[j]).epsilon(1e-12));
  }
}
