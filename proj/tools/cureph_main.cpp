#include <CLI11.hpp>
#include <string>

#include "cureph/cli_runner.hpp"

namespace {

// Flags shared by every subcommand.
void add_common(CLI::App* cmd, cureph::RunConfig& config) {
  cmd->add_option("--input", config.input, "Input file")->required();
  cmd->add_option("--output", config.output,
                  "Output file (simulate) or output prefix")
      ->required();
  cmd->add_option("--seed", config.seed, "RNG seed (default 12345)");
}

void add_dataset_columns(CLI::App* cmd, cureph::RunConfig& config) {
  cmd->add_option("--time-col", config.time_col,
                  "Name of the time column (default 'time')");
  cmd->add_option("--status-col", config.status_col,
                  "Name of the 0/1 status column (default 'status')");
}

void add_fit_options(CLI::App* cmd, cureph::RunConfig& config,
                     std::string& structure) {
  cmd->add_option("--structure", structure,
                  "Sub-intensity structure: general|gcoxian|coxian|gerlang")
      ->check(CLI::IsMember({"general", "gcoxian", "coxian", "gerlang"}));
  cmd->add_option("--transform", config.transform_name,
                  "Time transform: identity|weibull|lognormal|loglogistic|"
                  "gompertz")
      ->check(CLI::IsMember(
          {"identity", "weibull", "lognormal", "loglogistic", "gompertz"}));
  cmd->add_option("--theta", config.theta,
                  "Initial transform parameters (comma separated)")
      ->delimiter(',');
  cmd->add_option("--max-steps", config.max_steps, "EM iteration cap");
  cmd->add_option("--tol", config.tol, "Relative loglikelihood tolerance");
  cmd->add_option("--restarts", config.restarts,
                  "Random initializations, best kept");
  cmd->add_option("--level", config.level, "Confidence level for KM bands");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "cureph: cure-rate phase-type survival models "
      "(simulate / fit / fit-moe / select / diagnose / predict)"};
  app.require_subcommand(1);

  cureph::RunConfig config;
  std::string structure = "gcoxian";

  auto* simulate = app.add_subcommand(
      "simulate", "Draw a censored sample from a stored model document");
  add_common(simulate, config);
  simulate->add_option("--n", config.n_sim, "Sample size")->required();
  simulate
      ->add_option("--censor-upper", config.censor_upper,
                   "Censoring is Uniform(0, this bound)")
      ->required();

  auto* fit = app.add_subcommand("fit", "Fit a cure-rate phase-type model");
  add_common(fit, config);
  add_dataset_columns(fit, config);
  add_fit_options(fit, config, structure);
  fit->add_option("--r", config.r, "Model dimension (state r is immunity)");

  auto* fit_moe = app.add_subcommand(
      "fit-moe", "Fit the covariate (mixture-of-experts) regression model");
  add_common(fit_moe, config);
  add_dataset_columns(fit_moe, config);
  add_fit_options(fit_moe, config, structure);
  fit_moe->add_option("--r", config.r, "Model dimension");
  fit_moe
      ->add_option("--covariates", config.covariate_cols,
                   "Covariate column names (comma separated)")
      ->delimiter(',')
      ->required();

  auto* select = app.add_subcommand(
      "select", "Automatic dimension selection against the KM curve");
  add_common(select, config);
  add_dataset_columns(select, config);
  add_fit_options(select, config, structure);
  select->add_option("--r-min", config.r_min, "Smallest candidate dimension");
  select->add_option("--r-max", config.r_max, "Largest candidate dimension");

  auto* diagnose = app.add_subcommand(
      "diagnose", "Residual diagnostics of a fitted model on a dataset");
  add_common(diagnose, config);
  add_dataset_columns(diagnose, config);
  diagnose->add_option("--model", config.model_path, "Fitted model document")
      ->required();
  diagnose
      ->add_option("--covariates", config.covariate_cols,
                   "Covariate column names (comma separated)")
      ->delimiter(',');

  auto* predict = app.add_subcommand(
      "predict", "Per-subject susceptible fractions and survival curves");
  add_common(predict, config);
  add_dataset_columns(predict, config);
  predict->add_option("--model", config.model_path, "Fitted model document")
      ->required();
  predict
      ->add_option("--covariates", config.covariate_cols,
                   "Covariate column names (comma separated)")
      ->delimiter(',');

  CLI11_PARSE(app, argc, argv);

  config.structure = cureph::structure_kind_from_name(structure);
  if (simulate->parsed()) {
    config.command = cureph::RunConfig::Command::Simulate;
  } else if (fit->parsed()) {
    config.command = cureph::RunConfig::Command::Fit;
  } else if (fit_moe->parsed()) {
    config.command = cureph::RunConfig::Command::FitMoe;
  } else if (select->parsed()) {
    config.command = cureph::RunConfig::Command::Select;
  } else if (diagnose->parsed()) {
    config.command = cureph::RunConfig::Command::Diagnose;
  } else if (predict->parsed()) {
    config.command = cureph::RunConfig::Command::Predict;
  }
  return cureph::run(config);
}
