#include "cureph/transform.hpp"

#include <cmath>

#include "cureph/errors.hpp"

namespace cureph {

namespace {

void check_time(double t, const char* who) {
  if (!(t >= 0.0) || !std::isfinite(t)) {
    throw InvalidInputError(std::string(who) + ": argument must be >= 0");
  }
}

}  // namespace

TransformFamily::TransformFamily(TransformKind kind, std::vector<double> params)
    : kind_(kind), params_(std::move(params)) {
  const auto require = [&](bool ok, const char* msg) {
    if (!ok) throw InvalidParameterError(msg);
  };
  switch (kind_) {
    case TransformKind::Identity:
      require(params_.empty(), "identity transform takes no parameters");
      break;
    case TransformKind::Weibull:
      require(params_.size() == 1, "weibull transform takes one parameter");
      require(std::isfinite(params_[0]) && params_[0] > 0.0,
              "weibull transform requires beta > 0");
      break;
    case TransformKind::Lognormal:
      require(params_.size() == 1, "lognormal transform takes one parameter");
      require(std::isfinite(params_[0]) && params_[0] > 1.0,
              "lognormal transform requires gamma > 1");
      break;
    case TransformKind::LogLogistic:
      require(params_.size() == 2,
              "loglogistic transform takes two parameters");
      require(std::isfinite(params_[0]) && params_[0] > 0.0 &&
                  std::isfinite(params_[1]) && params_[1] > 0.0,
              "loglogistic transform requires gamma > 0 and theta > 0");
      break;
    case TransformKind::Gompertz:
      require(params_.size() == 1, "gompertz transform takes one parameter");
      require(std::isfinite(params_[0]) && params_[0] > 0.0,
              "gompertz transform requires beta > 0");
      break;
  }
}

TransformFamily TransformFamily::identity() {
  return TransformFamily(TransformKind::Identity, {});
}
TransformFamily TransformFamily::weibull(double beta) {
  return TransformFamily(TransformKind::Weibull, {beta});
}
TransformFamily TransformFamily::lognormal(double gamma) {
  return TransformFamily(TransformKind::Lognormal, {gamma});
}
TransformFamily TransformFamily::loglogistic(double gamma, double theta) {
  return TransformFamily(TransformKind::LogLogistic, {gamma, theta});
}
TransformFamily TransformFamily::gompertz(double beta) {
  return TransformFamily(TransformKind::Gompertz, {beta});
}

TransformFamily TransformFamily::make(TransformKind kind,
                                      const std::vector<double>& params) {
  return TransformFamily(kind, params);
}

TransformFamily TransformFamily::from_name(const std::string& name,
                                           const std::vector<double>& params) {
  if (name == "identity") return make(TransformKind::Identity, params);
  if (name == "weibull") return make(TransformKind::Weibull, params);
  if (name == "lognormal") return make(TransformKind::Lognormal, params);
  if (name == "loglogistic") return make(TransformKind::LogLogistic, params);
  if (name == "gompertz") return make(TransformKind::Gompertz, params);
  throw InvalidParameterError("unknown transform family: " + name);
}

std::string TransformFamily::name() const {
  switch (kind_) {
    case TransformKind::Identity: return "identity";
    case TransformKind::Weibull: return "weibull";
    case TransformKind::Lognormal: return "lognormal";
    case TransformKind::LogLogistic: return "loglogistic";
    case TransformKind::Gompertz: return "gompertz";
  }
  return "identity";
}

TransformFamily TransformFamily::with_params(
    const std::vector<double>& params) const {
  return TransformFamily(kind_, params);
}

double TransformFamily::g_inverse(double t) const {
  check_time(t, "g_inverse");
  switch (kind_) {
    case TransformKind::Identity:
      return t;
    case TransformKind::Weibull:
      return std::pow(t, params_[0]);
    case TransformKind::Lognormal:
      return std::pow(std::log1p(t), params_[0]);
    case TransformKind::LogLogistic:
      return std::log1p(std::pow(t / params_[0], params_[1]));
    case TransformKind::Gompertz:
      return std::expm1(params_[0] * t) / params_[0];
  }
  return t;
}

double TransformFamily::g_forward(double y) const {
  check_time(y, "g_forward");
  switch (kind_) {
    case TransformKind::Identity:
      return y;
    case TransformKind::Weibull:
      return std::pow(y, 1.0 / params_[0]);
    case TransformKind::Lognormal:
      return std::expm1(std::pow(y, 1.0 / params_[0]));
    case TransformKind::LogLogistic:
      return params_[0] * std::pow(std::expm1(y), 1.0 / params_[1]);
    case TransformKind::Gompertz:
      return std::log1p(params_[0] * y) / params_[0];
  }
  return y;
}

double TransformFamily::intensity(double t) const {
  check_time(t, "intensity");
  switch (kind_) {
    case TransformKind::Identity:
      return 1.0;
    case TransformKind::Weibull: {
      const double beta = params_[0];
      if (t == 0.0 && beta < 1.0) {
        throw BoundarySingularityError(
            "weibull intensity diverges at t = 0 for beta < 1");
      }
      return beta * std::pow(t, beta - 1.0);
    }
    case TransformKind::Lognormal: {
      const double gamma = params_[0];
      return gamma * std::pow(std::log1p(t), gamma - 1.0) / (1.0 + t);
    }
    case TransformKind::LogLogistic: {
      const double gamma = params_[0];
      const double theta = params_[1];
      if (t == 0.0 && theta < 1.0) {
        throw BoundarySingularityError(
            "loglogistic intensity diverges at t = 0 for theta < 1");
      }
      const double z = std::pow(t / gamma, theta);
      return (theta / gamma) * std::pow(t / gamma, theta - 1.0) / (1.0 + z);
    }
    case TransformKind::Gompertz:
      return std::exp(params_[0] * t);
  }
  return 1.0;
}

}  // namespace cureph
