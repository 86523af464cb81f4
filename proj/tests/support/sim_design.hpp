#pragma once

#include <random>

#include "cureph/dataset.hpp"

namespace cureph::testing {

// Benchmark generator: susceptible fraction 0.8, latency a three-component
// gamma mixture (shape/scale pairs (1,4), (4,2), (8,1) with weights
// 0.1/0.5/0.4), censoring Uniform(0, censor_upper). The generating law is
// deliberately outside the phase-type class.
cureph::SurvivalDataset gamma_mixture_cure_sample(int n, double censor_upper,
                                                  std::mt19937_64& rng,
                                                  double susceptible = 0.8);

// Draw from the latency mixture alone (a susceptible subject's event time).
double gamma_mixture_draw(std::mt19937_64& rng);

}  // namespace cureph::testing
