#include "cureph/cli_runner.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <random>

#include "cureph/diagnostics.hpp"
#include "cureph/errors.hpp"
#include "cureph/matrix_core.hpp"
#include "cureph/model_io.hpp"
#include "cureph/nonparametric.hpp"

namespace cureph {

namespace {

// Uniform 200-point evaluation grid from 0 to the 99th percentile of the
// observed times.
Eigen::VectorXd survival_grid(const SurvivalDataset& data) {
  std::vector<double> sorted(data.time.data(), data.time.data() + data.n());
  std::sort(sorted.begin(), sorted.end());
  const double q99 =
      sorted[static_cast<size_t>(0.99 * (sorted.size() - 1))];
  return Eigen::VectorXd::LinSpaced(200, 0.0, q99);
}

TransformFamily initial_transform(const RunConfig& config) {
  if (!config.theta.empty()) {
    return TransformFamily::from_name(config.transform_name, config.theta);
  }
  // Family defaults when no --theta is given.
  if (config.transform_name == "identity") return TransformFamily::identity();
  if (config.transform_name == "weibull") return TransformFamily::weibull(1.0);
  if (config.transform_name == "lognormal") {
    return TransformFamily::lognormal(2.0);
  }
  if (config.transform_name == "loglogistic") {
    return TransformFamily::loglogistic(1.0, 1.0);
  }
  if (config.transform_name == "gompertz") {
    return TransformFamily::gompertz(1.0);
  }
  throw InvalidParameterError("unknown transform family: " +
                              config.transform_name);
}

void write_fit_trace(const FitReport& report, const std::string& path) {
  std::vector<std::vector<double>> rows;
  for (size_t i = 0; i < report.loglik_trace.size(); ++i) {
    rows.push_back({static_cast<double>(i), report.loglik_trace[i]});
  }
  write_table(path, {"iteration", "loglikelihood"}, rows);
}

void write_survival_curve(const PhaseTypeCureModel& model,
                          const TransformFamily& tf,
                          const Eigen::VectorXd& grid,
                          const std::string& path) {
  std::vector<std::vector<double>> rows;
  for (Eigen::Index j = 0; j < grid.size(); ++j) {
    rows.push_back({grid[j], iph_survival(model, tf, grid[j])});
  }
  write_table(path, {"time", "survival"}, rows);
}

void write_residual_tables(const ResidualSet& res, const std::string& prefix,
                           const std::string& tag) {
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < res.n(); ++i) {
    rows.push_back({res.residuals[i], static_cast<double>(res.event[i]),
                    res.weights[i]});
  }
  write_table(prefix + "." + tag + "_residuals.csv",
              {"residual", "event", "weight"}, rows);

  const StepFunctionCurve hazard = cumulative_hazard_plot_data(res);
  std::vector<std::vector<double>> hrows;
  for (Eigen::Index j = 0; j < hazard.times.size(); ++j) {
    hrows.push_back({hazard.times[j], hazard.values[j]});
  }
  write_table(prefix + "." + tag + "_hazard.csv", {"time", "hazard"}, hrows);
}

PhaseTypeCureModel initial_model(const RunConfig& config, int r,
                                 const SurvivalDataset& data,
                                 std::mt19937_64& rng) {
  const StepFunctionCurve km = kaplan_meier(data, config.level);
  const double s_inf = std::min(km.plateau(), 1.0 - 1e-6);
  return precalibrate(make_structure({config.structure, r}, rng), s_inf,
                      data.time.mean());
}

FitReport best_of_restarts(const RunConfig& config,
                           const SurvivalDataset& data,
                           std::mt19937_64& rng) {
  const FitConfig fit_config{config.max_steps, config.tol, true};
  std::optional<FitReport> best;
  std::string failures;
  for (int attempt = 0; attempt < std::max(1, config.restarts); ++attempt) {
    try {
      const PhaseTypeCureModel init =
          initial_model(config, config.r, data, rng);
      FitReport candidate =
          em_fit(init, initial_transform(config), data, fit_config);
      if (!best || candidate.loglikelihood() > best->loglikelihood()) {
        best = std::move(candidate);
      }
    } catch (const Error& e) {
      failures += std::string(e.what()) + "; ";
    }
  }
  if (!best) throw FitFailureError("all restarts failed (" + failures + ")");
  return std::move(*best);
}

FitReport best_of_moe_restarts(const RunConfig& config,
                               const SurvivalDataset& data,
                               std::mt19937_64& rng) {
  if (!data.has_covariates()) {
    throw InvalidInputError("fit-moe requires --covariates");
  }
  const FitConfig fit_config{config.max_steps, config.tol, true};
  const int h = data.n_features();
  std::optional<FitReport> best;
  std::string failures;
  for (int attempt = 0; attempt < std::max(1, config.restarts); ++attempt) {
    try {
      const PhaseTypeCureModel init =
          initial_model(config, config.r, data, rng);
      // Intercepts reproduce the pre-calibrated pi; covariate slopes start 0.
      Eigen::MatrixXd beta = Eigen::MatrixXd::Zero(config.r, h);
      for (int k = 0; k < config.r; ++k) {
        beta(k, 0) = std::log(std::max(init.pi()[k], 1e-6)) -
                     std::log(std::max(init.pi()[0], 1e-6));
      }
      const MoeCureModel moe_init{beta, init.sub_intensity(), init.mask(),
                                  initial_transform(config)};
      FitReport candidate = moe_em_fit(moe_init, data, fit_config);
      if (!best || candidate.loglikelihood() > best->loglikelihood()) {
        best = std::move(candidate);
      }
    } catch (const Error& e) {
      failures += std::string(e.what()) + "; ";
    }
  }
  if (!best) throw FitFailureError("all restarts failed (" + failures + ")");
  return std::move(*best);
}

void run_simulate(const RunConfig& config) {
  const ModelDocument doc = load_model(config.input);
  std::mt19937_64 rng(config.seed);
  const SurvivalDataset data = simulate_censored(
      doc.model, doc.transform, config.censor_upper, config.n_sim, rng);
  write_dataset(data, config.output);
  std::cout << "simulated n=" << data.n()
            << " events=" << data.event.sum() << " -> " << config.output
            << "\n";
}

void run_fit(const RunConfig& config) {
  const SurvivalDataset data = read_dataset(config.input, config.time_col,
                                            config.status_col, {});
  std::mt19937_64 rng(config.seed);
  const FitReport report = best_of_restarts(config, data, rng);

  save_model(ModelDocument{report.model, report.transform, std::nullopt},
             config.output + ".model.json");
  write_fit_trace(report, config.output + ".fit.csv");
  write_survival_curve(report.model, report.transform, survival_grid(data),
                       config.output + ".survival.csv");
  std::cout << "loglikelihood=" << report.loglikelihood()
            << " cure_rate=" << report.cure_rate
            << " iterations=" << report.iterations
            << " converged=" << (report.converged ? "yes" : "no") << "\n";
}

void run_fit_moe(const RunConfig& config) {
  const SurvivalDataset data =
      read_dataset(config.input, config.time_col, config.status_col,
                   config.covariate_cols);
  std::mt19937_64 rng(config.seed);
  const FitReport report = best_of_moe_restarts(config, data, rng);

  save_model(ModelDocument{report.model, report.transform, report.beta},
             config.output + ".model.json");
  write_fit_trace(report, config.output + ".fit.csv");
  // Population-average curve: the snapshot model carries the mean pi(x_i).
  write_survival_curve(report.model, report.transform, survival_grid(data),
                       config.output + ".survival.csv");
  std::cout << "loglikelihood=" << report.loglikelihood()
            << " mean_cure_rate=" << report.cure_rate
            << " iterations=" << report.iterations
            << " converged=" << (report.converged ? "yes" : "no") << "\n";
}

void run_select(const RunConfig& config) {
  const SurvivalDataset data = read_dataset(config.input, config.time_col,
                                            config.status_col, {});
  std::mt19937_64 rng(config.seed);
  SelectionConfig sel;
  sel.restarts = config.restarts;
  sel.level = config.level;
  sel.fit = FitConfig{config.max_steps, config.tol, true};
  const SelectionReport report =
      auto_select(data, config.r_min, config.r_max, config.structure, sel, rng);

  std::vector<std::vector<double>> rows;
  for (const auto& row : report.trace) {
    rows.push_back({static_cast<double>(row.r), row.loglik,
                    row.exception_rate, row.err1, row.err2,
                    row.chosen ? 1.0 : 0.0});
  }
  write_table(config.output + ".selection.csv",
              {"r", "loglik", "exception_rate", "err1", "err2", "chosen"},
              rows);
  save_model(
      ModelDocument{report.fit.model, report.fit.transform, std::nullopt},
      config.output + ".model.json");
  write_survival_curve(report.fit.model, report.fit.transform,
                       survival_grid(data), config.output + ".survival.csv");
  std::cout << "chosen_r=" << report.chosen_r
            << " early_stopped=" << (report.early_stopped ? "yes" : "no")
            << " loglikelihood=" << report.fit.loglikelihood() << "\n";
}

void run_diagnose(const RunConfig& config) {
  const ModelDocument doc = load_model(config.model_path);
  const SurvivalDataset data =
      read_dataset(config.input, config.time_col, config.status_col,
                   config.covariate_cols);

  ResidualSet cs =
      doc.beta && data.has_covariates()
          ? cs_residuals(
                MoeCureModel{*doc.beta, doc.model.sub_intensity(),
                             doc.model.mask(), doc.transform},
                data)
          : cs_residuals(doc.model, doc.transform, data);
  ResidualSet mcs =
      doc.beta && data.has_covariates()
          ? modified_cs_residuals(
                MoeCureModel{*doc.beta, doc.model.sub_intensity(),
                             doc.model.mask(), doc.transform},
                data)
          : modified_cs_residuals(doc.model, doc.transform, data);

  write_residual_tables(cs, config.output, "cs");
  write_residual_tables(mcs, config.output, "mcs");
  write_table(config.output + ".cvm.csv",
              {"residual_type", "cvm", "cvm_scaled"},
              {{0.0, cvm_criterion(cs), cvm_criterion_scaled(cs)},
               {1.0, cvm_criterion(mcs), cvm_criterion_scaled(mcs)}});
  std::cout << "cvm_cs=" << cvm_criterion_scaled(cs)
            << " cvm_mcs=" << cvm_criterion_scaled(mcs) << "\n";
}

void run_predict(const RunConfig& config) {
  const ModelDocument doc = load_model(config.model_path);
  const SurvivalDataset data =
      read_dataset(config.input, config.time_col, config.status_col,
                   config.covariate_cols);
  const Eigen::VectorXd grid = survival_grid(data);
  const int n = data.n();
  const int r = doc.model.dim();
  const Eigen::MatrixXd& t = doc.model.sub_intensity();

  // Per-subject initial vectors; the intercept-only regression case works
  // without a covariate file.
  Eigen::MatrixXd pi_rows(n, r);
  for (int i = 0; i < n; ++i) {
    if (doc.beta && data.has_covariates()) {
      pi_rows.row(i) =
          softmax_pi(*doc.beta, data.covariates->row(i).transpose())
              .transpose();
    } else if (doc.beta && doc.beta->cols() == 1) {
      pi_rows.row(i) =
          softmax_pi(*doc.beta, Eigen::VectorXd::Ones(1)).transpose();
    } else {
      pi_rows.row(i) = doc.model.pi().transpose();
    }
  }

  // exp(T g^{-1}(t_j)) e is shared across subjects.
  Eigen::MatrixXd prop_e(grid.size(), r);
  for (Eigen::Index j = 0; j < grid.size(); ++j) {
    prop_e.row(j) =
        (expm(t * doc.transform.g_inverse(grid[j])) * Eigen::VectorXd::Ones(r))
            .transpose();
  }
  const int m = r - 1;
  const Eigen::VectorXd immune_weight =
      green_solve(t.topLeftCorner(m, m), t.topRightCorner(m, 1));

  std::vector<std::vector<double>> subject_rows;
  std::vector<std::vector<double>> curve_rows;
  curve_rows.reserve(static_cast<size_t>(n) * grid.size());
  for (int i = 0; i < n; ++i) {
    const double cure = std::clamp(
        pi_rows.row(i).head(m).dot(immune_weight) + pi_rows(i, r - 1), 0.0,
        1.0);
    subject_rows.push_back({static_cast<double>(i), 1.0 - cure, cure});
    for (Eigen::Index j = 0; j < grid.size(); ++j) {
      curve_rows.push_back(
          {static_cast<double>(i), grid[j],
           std::clamp(pi_rows.row(i).dot(prop_e.row(j)), 0.0, 1.0)});
    }
  }
  write_table(config.output + ".predict.csv",
              {"subject", "p_susceptible", "cure_rate"}, subject_rows);
  write_table(config.output + ".predict_curves.csv",
              {"subject", "time", "survival"}, curve_rows);
  std::cout << "predicted " << subject_rows.size() << " subject profiles\n";
}

}  // namespace

int run(const RunConfig& config) {
  try {
    switch (config.command) {
      case RunConfig::Command::Simulate: run_simulate(config); break;
      case RunConfig::Command::Fit: run_fit(config); break;
      case RunConfig::Command::FitMoe: run_fit_moe(config); break;
      case RunConfig::Command::Select: run_select(config); break;
      case RunConfig::Command::Diagnose: run_diagnose(config); break;
      case RunConfig::Command::Predict: run_predict(config); break;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.code() << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: internal-error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace cureph
