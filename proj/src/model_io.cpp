#include "cureph/model_io.hpp"

#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "cureph/errors.hpp"

namespace cureph {

namespace {

using nlohmann::json;

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& rows, const char* field) {
  if (!rows.is_array() || rows.empty()) {
    throw ParseError(std::string("model document: ") + field +
                     " must be a non-empty array of arrays");
  }
  const int nr = static_cast<int>(rows.size());
  const int nc = static_cast<int>(rows[0].size());
  Eigen::MatrixXd m(nr, nc);
  for (int i = 0; i < nr; ++i) {
    if (static_cast<int>(rows[i].size()) != nc) {
      throw ParseError(std::string("model document: ragged rows in ") + field);
    }
    for (int j = 0; j < nc; ++j) m(i, j) = rows[i][j].get<double>();
  }
  return m;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) {
    // Trim whitespace and stray carriage returns.
    const auto b = field.find_first_not_of(" \t\r");
    const auto e = field.find_last_not_of(" \t\r");
    fields.push_back(b == std::string::npos
                         ? std::string()
                         : field.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double parse_double(const std::string& s, int line_no, const std::string& col) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) {
    throw ParseError("line " + std::to_string(line_no) + ": cannot parse '" +
                     s + "' in column " + col);
  }
  return v;
}

}  // namespace

void save_model(const ModelDocument& doc, const std::string& path) {
  json j;
  j["format_version"] = doc.format_version;
  j["r"] = doc.model.dim();
  json pi = json::array();
  for (int k = 0; k < doc.model.dim(); ++k) pi.push_back(doc.model.pi()[k]);
  j["pi"] = std::move(pi);
  j["T"] = matrix_to_json(doc.model.sub_intensity());
  json mask = json::array();
  for (int i = 0; i < doc.model.dim(); ++i) {
    json row = json::array();
    for (int k = 0; k < doc.model.dim(); ++k) {
      row.push_back(doc.model.mask()(i, k) != 0 ? 1 : 0);
    }
    mask.push_back(std::move(row));
  }
  j["mask"] = std::move(mask);
  j["transform"] = {{"family", doc.transform.name()},
                    {"params", doc.transform.params()}};
  if (doc.beta) j["beta"] = matrix_to_json(*doc.beta);

  std::ofstream out(path);
  if (!out) throw InvalidInputError("cannot open for writing: " + path);
  out << j.dump(2) << "\n";
}

ModelDocument load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInputError("cannot open model document: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError("model document " + path + ": " + e.what());
  }
  try {
    const int r = j.at("r").get<int>();
    const auto pi_arr = j.at("pi");
    if (static_cast<int>(pi_arr.size()) != r) {
      throw ParseError("model document: pi length does not match r");
    }
    Eigen::VectorXd pi(r);
    for (int k = 0; k < r; ++k) pi[k] = pi_arr[k].get<double>();
    const Eigen::MatrixXd t = matrix_from_json(j.at("T"), "T");
    PhaseTypeCureModel::Mask mask(r, r);
    const Eigen::MatrixXd mask_d = matrix_from_json(j.at("mask"), "mask");
    for (int i = 0; i < r; ++i) {
      for (int k = 0; k < r; ++k) {
        mask(i, k) = mask_d(i, k) != 0.0 ? 1 : 0;
      }
    }
    TransformFamily tf = TransformFamily::from_name(
        j.at("transform").at("family").get<std::string>(),
        j.at("transform").at("params").get<std::vector<double>>());
    std::optional<Eigen::MatrixXd> beta;
    if (j.contains("beta")) beta = matrix_from_json(j["beta"], "beta");
    return ModelDocument{PhaseTypeCureModel(std::move(pi), t, std::move(mask)),
                         std::move(tf), std::move(beta),
                         j.value("format_version", 1)};
  } catch (const json::exception& e) {
    throw ParseError("model document " + path + ": " + e.what());
  }
}

SurvivalDataset read_dataset(const std::string& path,
                             const std::string& time_col,
                             const std::string& status_col,
                             const std::vector<std::string>& covariate_cols) {
  std::ifstream in(path);
  if (!in) throw InvalidInputError("cannot open dataset: " + path);

  std::string line;
  if (!std::getline(in, line)) {
    throw ParseError(path + ": empty file, header row is mandatory");
  }
  const std::vector<std::string> header = split_csv_line(line);
  const auto column_index = [&](const std::string& name) {
    for (size_t c = 0; c < header.size(); ++c) {
      if (header[c] == name) return static_cast<int>(c);
    }
    throw ParseError(path + ": column '" + name + "' not found in header");
  };
  const int time_idx = column_index(time_col);
  const int status_idx = column_index(status_col);
  std::vector<int> cov_idx;
  for (const auto& name : covariate_cols) cov_idx.push_back(column_index(name));

  std::vector<double> times;
  std::vector<int> events;
  std::vector<std::vector<double>> covs;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const std::vector<std::string> fields = split_csv_line(line);
    if (static_cast<int>(fields.size()) < static_cast<int>(header.size())) {
      throw ParseError("line " + std::to_string(line_no) +
                       ": expected " + std::to_string(header.size()) +
                       " fields, got " + std::to_string(fields.size()));
    }
    const double t = parse_double(fields[time_idx], line_no, time_col);
    if (!(t > 0.0)) {
      throw ValidationError("line " + std::to_string(line_no) +
                            ": time must be > 0");
    }
    const double s = parse_double(fields[status_idx], line_no, status_col);
    if (s != 0.0 && s != 1.0) {
      throw ValidationError("line " + std::to_string(line_no) +
                            ": status must be 0 or 1");
    }
    times.push_back(t);
    events.push_back(static_cast<int>(s));
    if (!cov_idx.empty()) {
      std::vector<double> row;
      row.reserve(cov_idx.size());
      for (size_t c = 0; c < cov_idx.size(); ++c) {
        row.push_back(parse_double(fields[cov_idx[c]], line_no,
                                   covariate_cols[c]));
      }
      covs.push_back(std::move(row));
    }
  }

  SurvivalDataset data;
  const int n = static_cast<int>(times.size());
  data.time = Eigen::Map<Eigen::VectorXd>(times.data(), n);
  data.event = Eigen::Map<Eigen::VectorXi>(events.data(), n);
  if (!cov_idx.empty()) {
    Eigen::MatrixXd x(n, cov_idx.size() + 1);
    x.col(0).setOnes();
    for (int i = 0; i < n; ++i) {
      for (size_t c = 0; c < cov_idx.size(); ++c) {
        x(i, c + 1) = covs[i][c];
      }
    }
    data.covariates = std::move(x);
  }
  data.validate();
  return data;
}

void write_dataset(const SurvivalDataset& data, const std::string& path,
                   const std::vector<std::string>& covariate_names) {
  std::ofstream out(path);
  if (!out) throw InvalidInputError("cannot open for writing: " + path);
  const int extra = data.has_covariates()
                        ? static_cast<int>(data.covariates->cols()) - 1
                        : 0;
  out << "time,status";
  for (int c = 0; c < extra; ++c) {
    if (c < static_cast<int>(covariate_names.size())) {
      out << "," << covariate_names[c];
    } else {
      out << ",x" << c + 1;
    }
  }
  out << "\n";
  for (int i = 0; i < data.n(); ++i) {
    out << format_double(data.time[i]) << "," << data.event[i];
    for (int c = 0; c < extra; ++c) {
      out << "," << format_double((*data.covariates)(i, c + 1));
    }
    out << "\n";
  }
}

void write_table(const std::string& path,
                 const std::vector<std::string>& header,
                 const std::vector<std::vector<double>>& rows) {
  std::ofstream out(path);
  if (!out) throw InvalidInputError("cannot open for writing: " + path);
  for (size_t c = 0; c < header.size(); ++c) {
    out << (c ? "," : "") << header[c];
  }
  out << "\n";
  for (const auto& row : rows) {
    for (size_t c = 0; c < row.size(); ++c) {
      out << (c ? "," : "") << format_double(row[c]);
    }
    out << "\n";
  }
}

}  // namespace cureph
