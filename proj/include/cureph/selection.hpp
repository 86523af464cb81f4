#pragma once

#include <random>
#include <string>
#include <vector>

#include "cureph/estimation.hpp"
#include "cureph/phase_type.hpp"

namespace cureph {

/// Sparse sub-intensity layouts. All of them keep the immune column free (a
/// transient state may always jump to immunity) and the immune row zero.
///  - General: every transient off-diagonal entry free.
///  - GeneralizedCoxian: transient block upper-bidiagonal.
///  - Coxian: generalized Coxian with pi pinned to (1, 0, ..., 0).
///  - GeneralizedErlang: Coxian chain with unit branch probabilities, so
///    death exits vanish on every non-terminal transient state.
enum class StructureKind { General, GeneralizedCoxian, Coxian, GeneralizedErlang };

StructureKind structure_kind_from_name(const std::string& name);
std::string structure_kind_name(StructureKind kind);

struct StructureSpec {
  StructureKind kind = StructureKind::GeneralizedCoxian;
  int r = 3;
};

/// Random valid model honoring the structural mask; rates are drawn so the
/// unscaled absorption-time mean is of order one.
PhaseTypeCureModel make_structure(const StructureSpec& spec,
                                  std::mt19937_64& rng);

/// Empirical pre-calibration: pi_r = S_inf, the transient mass rescaled to
/// total 1 - S_inf, and T divided by the mean observed time.
PhaseTypeCureModel precalibrate(const PhaseTypeCureModel& model, double s_inf,
                                double mean_xi);

struct SelectionRow {
  int r = 0;
  double loglik = 0.0;
  double exception_rate = 1.0;  // er_r
  double err1 = 0.0;            // squared distance to the nearer band edge
  double err2 = 0.0;            // squared distance to the KM curve
  bool chosen = false;
};

struct SelectionConfig {
  int restarts = 3;      // random initializations per candidate r
  double level = 0.95;   // KM band level
  FitConfig fit;
};

struct SelectionReport {
  int chosen_r = 0;
  FitReport fit;
  std::vector<SelectionRow> trace;
  bool early_stopped = false;
};

/// Scans r = r_min..r_max with pre-calibrated random initializations, scoring
/// each fit against the KM curve and its confidence band on the event-time
/// grid. Stops early when the fitted curve has no band exceptions and is
/// closer to the KM curve than to the band edges; otherwise keeps the first
/// minimizer of the exception rate.
SelectionReport auto_select(const SurvivalDataset& data, int r_min, int r_max,
                            StructureKind kind, const SelectionConfig& config,
                            std::mt19937_64& rng);

}  // namespace cureph
