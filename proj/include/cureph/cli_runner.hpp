#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cureph/selection.hpp"

namespace cureph {

/// Parsed command-line request. The executable front end maps flags onto this
/// struct; run() executes it and writes the artifacts.
struct RunConfig {
  enum class Command { Simulate, Fit, FitMoe, Select, Diagnose, Predict };

  Command command = Command::Fit;
  std::string input;        // dataset (fit/select/diagnose/predict),
                            // model document (simulate)
  std::string output;       // output file (simulate) or prefix (others)
  std::string model_path;   // fitted model document (diagnose/predict)
  std::uint64_t seed = 12345;
  int r = 3;
  int r_min = 2;
  int r_max = 10;
  StructureKind structure = StructureKind::GeneralizedCoxian;
  std::string transform_name = "identity";
  std::vector<double> theta;  // initial transform parameters
  int max_steps = 1000;
  double tol = 1e-8;
  double level = 0.95;
  int restarts = 3;
  std::string time_col = "time";
  std::string status_col = "status";
  std::vector<std::string> covariate_cols;
  int n_sim = 1000;
  double censor_upper = 1.0;
};

/// Executes the request. Returns 0 on success; on any module error prints a
/// one-line machine-readable "error: <code>: <message>" to stderr and returns
/// a nonzero status.
int run(const RunConfig& config);

}  // namespace cureph
