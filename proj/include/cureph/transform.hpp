#pragma once

#include <string>
#include <vector>

namespace cureph {

enum class TransformKind { Identity, Weibull, Lognormal, LogLogistic, Gompertz };

/// Parametric time transform g(.;theta) together with its inverse and the
/// intensity lambda = (g^{-1})'. The inverse clock y = g^{-1}(t) maps an
/// inhomogeneous absorption time back to the homogeneous scale.
///
/// Families and parameter ordering:
///   identity    []          g^{-1}(t) = t
///   weibull     [beta]      g^{-1}(t) = t^beta,                beta > 0
///   lognormal   [gamma]     g^{-1}(t) = (log(t+1))^gamma,      gamma > 1
///   loglogistic [gamma,theta] g^{-1}(t) = log((t/gamma)^theta + 1), both > 0
///   gompertz    [beta]      g^{-1}(t) = (exp(beta t) - 1)/beta, beta > 0
class TransformFamily {
 public:
  static TransformFamily identity();
  static TransformFamily weibull(double beta);
  static TransformFamily lognormal(double gamma);
  static TransformFamily loglogistic(double gamma, double theta);
  static TransformFamily gompertz(double beta);

  /// Builds from the persistence-format name ("identity", "weibull", ...).
  static TransformFamily from_name(const std::string& name,
                                   const std::vector<double>& params);
  static TransformFamily make(TransformKind kind,
                              const std::vector<double>& params);

  TransformKind kind() const { return kind_; }
  const std::vector<double>& params() const { return params_; }
  std::string name() const;
  int n_params() const { return static_cast<int>(params_.size()); }

  /// Same family with replacement parameters (validated).
  TransformFamily with_params(const std::vector<double>& params) const;

  double g_inverse(double t) const;
  double g_forward(double y) const;
  /// lambda(t) = d/dt g^{-1}(t). Throws BoundarySingularityError where the
  /// closed form diverges (e.g. weibull with beta < 1 at t = 0).
  double intensity(double t) const;

 private:
  TransformFamily(TransformKind kind, std::vector<double> params);

  TransformKind kind_;
  std::vector<double> params_;
};

}  // namespace cureph
