#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "cureph/dataset.hpp"
#include "cureph/phase_type.hpp"
#include "cureph/transform.hpp"

namespace cureph {

/// Persisted model: parameters, structural mask, time transform, and the
/// regression coefficients when present. Serialized as JSON with full
/// round-trip precision and a format-version field.
struct ModelDocument {
  PhaseTypeCureModel model;
  TransformFamily transform;
  std::optional<Eigen::MatrixXd> beta;
  int format_version = 1;
};

void save_model(const ModelDocument& doc, const std::string& path);
ModelDocument load_model(const std::string& path);

/// Reads a comma-delimited dataset with a mandatory header row. Status values
/// must be 0/1 and times strictly positive; violations report the offending
/// line number. When covariate columns are requested an intercept column is
/// prepended automatically.
SurvivalDataset read_dataset(const std::string& path,
                             const std::string& time_col,
                             const std::string& status_col,
                             const std::vector<std::string>& covariate_cols = {});

/// Writes time/status plus any non-intercept covariate columns.
void write_dataset(const SurvivalDataset& data, const std::string& path,
                   const std::vector<std::string>& covariate_names = {});

/// Generic comma-delimited table writer (17 significant digits).
void write_table(const std::string& path,
                 const std::vector<std::string>& header,
                 const std::vector<std::vector<double>>& rows);

}  // namespace cureph
