#include "cureph/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "cureph/errors.hpp"
#include "cureph/nonparametric.hpp"

namespace cureph {

StructureKind structure_kind_from_name(const std::string& name) {
  if (name == "general") return StructureKind::General;
  if (name == "gcoxian") return StructureKind::GeneralizedCoxian;
  if (name == "coxian") return StructureKind::Coxian;
  if (name == "gerlang") return StructureKind::GeneralizedErlang;
  throw InvalidInputError("unknown structure kind: " + name);
}

std::string structure_kind_name(StructureKind kind) {
  switch (kind) {
    case StructureKind::General: return "general";
    case StructureKind::GeneralizedCoxian: return "gcoxian";
    case StructureKind::Coxian: return "coxian";
    case StructureKind::GeneralizedErlang: return "gerlang";
  }
  return "general";
}

PhaseTypeCureModel make_structure(const StructureSpec& spec,
                                  std::mt19937_64& rng) {
  const int r = spec.r;
  if (r < 2) {
    throw InvalidInputError("make_structure: dimension must be at least 2");
  }
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const int m = r - 1;  // transient states

  using Mask = PhaseTypeCureModel::Mask;
  Mask mask = Mask::Zero(r, r);
  mask.row(r - 1).setOnes();
  const bool chain = spec.kind != StructureKind::General;
  if (chain) {
    for (int k = 0; k < m; ++k) {
      for (int l = 0; l < r; ++l) {
        const bool allowed = l == k || l == k + 1 || l == r - 1;
        if (!allowed) mask(k, l) = 1;
      }
    }
  }

  // Initial distribution.
  Eigen::VectorXd pi(r);
  if (spec.kind == StructureKind::Coxian) {
    pi.setZero();
    pi[0] = 1.0;
  } else {
    for (int k = 0; k < r; ++k) pi[k] = 0.2 + unif(rng);
    pi[r - 1] *= 0.5;  // keep most mass transient before pre-calibration
    pi /= pi.sum();
  }

  // Rates sized so the chain traversal time is of order one.
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(r, r);
  const double base_rate = static_cast<double>(std::max(1, m));
  for (int k = 0; k < m; ++k) {
    const double rate = base_rate * (0.6 + 0.8 * unif(rng));
    const bool last = k == m - 1;
    const double immune_frac = 0.25 * unif(rng);
    double forward_frac = 0.0;
    if (!last) {
      forward_frac = spec.kind == StructureKind::GeneralizedErlang
                         ? 1.0 - immune_frac
                         : (0.5 + 0.4 * unif(rng)) * (1.0 - immune_frac);
    }
    t(k, k) = -rate;
    t(k, r - 1) = rate * immune_frac;
    if (!last) t(k, k + 1) = rate * forward_frac;
    if (!chain) {
      // Spread a share of the remaining rate over the other transient states.
      double remaining = rate * (1.0 - immune_frac - forward_frac);
      for (int l = 0; l < m; ++l) {
        if (l == k || l == k + 1) continue;
        const double share = remaining * 0.3 * unif(rng);
        t(k, l) = share;
        remaining -= share;
      }
      if (!last) {
        t(k, k + 1) += remaining * 0.5 * unif(rng);
      }
    }
  }
  return PhaseTypeCureModel(std::move(pi), std::move(t), std::move(mask));
}

PhaseTypeCureModel precalibrate(const PhaseTypeCureModel& model, double s_inf,
                                double mean_xi) {
  if (!(s_inf >= 0.0 && s_inf < 1.0)) {
    if (s_inf >= 1.0) {
      throw DegenerateInitializationError(
          "precalibrate: KM plateau 1 means an all-cured initialization");
    }
    throw InvalidInputError("precalibrate: S_inf must lie in [0,1)");
  }
  if (!(mean_xi > 0.0) || !std::isfinite(mean_xi)) {
    throw InvalidInputError("precalibrate: mean observed time must be > 0");
  }
  const int r = model.dim();
  Eigen::VectorXd pi = model.pi();
  const double transient_mass = pi.head(r - 1).sum();
  if (transient_mass > 0.0) {
    pi.head(r - 1) *= (1.0 - s_inf) / transient_mass;
  } else {
    pi.head(r - 1).setConstant((1.0 - s_inf) / (r - 1));
  }
  pi[r - 1] = s_inf;
  Eigen::MatrixXd t = model.sub_intensity() / mean_xi;
  return PhaseTypeCureModel(std::move(pi), std::move(t), model.mask());
}

SelectionReport auto_select(const SurvivalDataset& data, int r_min, int r_max,
                            StructureKind kind, const SelectionConfig& config,
                            std::mt19937_64& rng) {
  if (!(2 <= r_min && r_min <= r_max)) {
    throw InvalidInputError("auto_select: need 2 <= r_min <= r_max");
  }
  data.validate();

  const StepFunctionCurve km = kaplan_meier(data, config.level);
  // Grid: the KM jump (event) times with S < 1; survival only jumps down, so
  // every jump time qualifies.
  if (km.times.size() == 0) {
    throw InvalidInputError(
        "auto_select: no event times, the comparison grid is empty");
  }
  const double s_inf = km.plateau();
  if (s_inf >= 1.0) {
    throw DegenerateInitializationError(
        "auto_select: KM plateau is 1, nothing to fit");
  }
  const double mean_xi = data.time.mean();

  std::vector<SelectionRow> trace;
  std::optional<FitReport> best_fit;
  int chosen_r = 0;
  bool early_stopped = false;
  double er_prev = std::numeric_limits<double>::infinity();
  std::string failures;

  for (int r = r_min; r <= r_max; ++r) {
    std::optional<FitReport> fit;
    for (int attempt = 0; attempt < std::max(1, config.restarts); ++attempt) {
      try {
        const PhaseTypeCureModel init = precalibrate(
            make_structure({kind, r}, rng), s_inf, mean_xi);
        FitReport candidate =
            em_fit(init, TransformFamily::identity(), data, config.fit);
        if (!fit || candidate.loglikelihood() > fit->loglikelihood()) {
          fit = std::move(candidate);
        }
      } catch (const Error& e) {
        failures += "r=" + std::to_string(r) + ": " + e.what() + "; ";
      }
    }
    if (!fit) continue;

    int exceptions = 0;
    double err1 = 0.0, err2 = 0.0;
    for (Eigen::Index j = 0; j < km.times.size(); ++j) {
      const double s_hat = fit->model.survival(km.times[j]);
      if (s_hat < km.lower[j] || s_hat > km.upper[j]) ++exceptions;
      const double d_km = s_hat - km.values[j];
      err2 += d_km * d_km;
      const double d_low = s_hat - km.lower[j];
      const double d_upp = s_hat - km.upper[j];
      err1 += std::min(d_low * d_low, d_upp * d_upp);
    }
    const double er =
        static_cast<double>(exceptions) / static_cast<double>(km.times.size());

    trace.push_back({r, fit->loglikelihood(), er, err1, err2, false});

    if (er == 0.0 && err2 < err1) {
      best_fit = std::move(fit);
      chosen_r = r;
      early_stopped = true;
      break;
    }
    if (er < er_prev) {
      best_fit = std::move(fit);
      chosen_r = r;
      er_prev = er;
    }
  }

  if (!best_fit) {
    throw FitFailureError("auto_select: every candidate fit failed (" +
                          failures + ")");
  }
  for (auto& row : trace) row.chosen = row.r == chosen_r;
  return SelectionReport{chosen_r, std::move(*best_fit), std::move(trace),
                         early_stopped};
}

}  // namespace cureph
