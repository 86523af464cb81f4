#include "support/sim_design.hpp"

#include <limits>

namespace cureph::testing {

double gamma_mixture_draw(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double u = unif(rng);
  if (u < 0.1) {
    std::gamma_distribution<double> g(1.0, 4.0);
    return g(rng);
  }
  if (u < 0.6) {
    std::gamma_distribution<double> g(4.0, 2.0);
    return g(rng);
  }
  std::gamma_distribution<double> g(8.0, 1.0);
  return g(rng);
}

cureph::SurvivalDataset gamma_mixture_cure_sample(int n, double censor_upper,
                                                  std::mt19937_64& rng,
                                                  double susceptible) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::uniform_real_distribution<double> censor(0.0, censor_upper);
  cureph::SurvivalDataset data;
  data.time.resize(n);
  data.event.resize(n);
  for (int i = 0; i < n; ++i) {
    const double tau = unif(rng) < susceptible
                           ? gamma_mixture_draw(rng)
                           : std::numeric_limits<double>::infinity();
    double zeta = censor(rng);
    while (zeta <= 0.0) zeta = censor(rng);
    data.time[i] = std::min(tau, zeta);
    data.event[i] = tau <= zeta ? 1 : 0;
  }
  data.validate();
  return data;
}

}  // namespace cureph::testing
