#pragma once

#include "cureph/dataset.hpp"

namespace cureph::testing {

// Classical two-component mixture cure baseline
//   S(t) = (1 - p) + p * S_u(t)
// with exponential or Weibull latency, fitted by direct maximum likelihood.
// Used as the comparison model the phase-type fits must dominate.
struct MixtureCureFit {
  double p = 0.0;            // susceptible fraction
  double shape = 1.0;        // Weibull shape (1 for exponential latency)
  double scale = 1.0;
  double loglik = 0.0;
};

MixtureCureFit fit_exponential_cure(const SurvivalDataset& data);
MixtureCureFit fit_weibull_cure(const SurvivalDataset& data);

}  // namespace cureph::testing
