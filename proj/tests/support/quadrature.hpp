#pragma once

#include <functional>

namespace cureph::testing {

// Adaptive Simpson quadrature of f over [a, b]; independent oracle for the
// augmented-exponential integrals and tail probabilities.
double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double tol = 1e-10, int max_depth = 40);

}  // namespace cureph::testing
