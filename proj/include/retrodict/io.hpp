// Copyright (c) 2026 The retrodict developers.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <charconv>
#include <cstddef>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "retrodict/device_model.hpp"
#include "retrodict/experiment_sim.hpp"
#include "retrodict/probability_engine.hpp"

namespace retrodict {

using Json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Device files
// ---------------------------------------------------------------------------

/// Evolution block of a device file, validated later into an
/// EvolutionContext.
struct EvolutionInput {
  Matrix unitary;
  double t_prepare = 0.0;
  double t_measure = 0.0;
};

/// Scenario block of a device file: weights state and the two bases.
struct ScenarioInput {
  Matrix rho_g;
  std::vector<Vector> a_basis;
  std::vector<Vector> b_basis;
};

/// Parsed but not yet validated contents of a device file.
struct DeviceFile {
  int format_version = 1;
  Eigen::Index dimension = 0;
  std::optional<std::vector<LabeledMatrix>> preparation;
  std::optional<std::vector<LabeledMatrix>> measurement;
  std::optional<EvolutionInput> evolution;
  std::optional<ScenarioInput> scenario;
};

struct ParseOptions {
  /// In lenient mode unknown fields produce warnings instead of errors.
  bool lenient = false;
};

struct ParsedDeviceFile {
  DeviceFile file;
  std::vector<std::string> warnings;
};

namespace detail {

inline std::pair<std::size_t, std::size_t> line_column(const std::string& text,
                                                       std::size_t byte) {
  std::size_t line = 1, col = 1;
  const std::size_t stop = std::min(byte, text.size());
  for (std::size_t i = 0; i < stop; ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

inline double parse_number(const Json& j, const std::string& field) {
  if (!j.is_number())
    throw SchemaError(field, "expected a number, got " + std::string(j.type_name()));
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw SchemaError(field, "number is not finite");
  return v;
}

/// A matrix entry is either a real number or a [real, imaginary] pair.
inline Complex parse_complex(const Json& j, const std::string& field) {
  if (j.is_number()) return Complex(parse_number(j, field), 0.0);
  if (j.is_array() && j.size() == 2)
    return Complex(parse_number(j[0], field + "[0]"),
                   parse_number(j[1], field + "[1]"));
  throw SchemaError(field,
                    "expected a real number or a [real, imaginary] pair");
}

inline Matrix parse_matrix(const Json& j, Eigen::Index dim,
                           const std::string& field) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != dim)
    throw SchemaError(field, "expected an array of " + std::to_string(dim) +
                                 " rows");
  Matrix m(dim, dim);
  for (Eigen::Index r = 0; r < dim; ++r) {
    const Json& row = j[static_cast<std::size_t>(r)];
    const std::string row_field = field + "[" + std::to_string(r) + "]";
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != dim)
      throw SchemaError(row_field, "expected an array of " +
                                       std::to_string(dim) + " entries");
    for (Eigen::Index c = 0; c < dim; ++c)
      m(r, c) = parse_complex(row[static_cast<std::size_t>(c)],
                              row_field + "[" + std::to_string(c) + "]");
  }
  return m;
}

inline Vector parse_vector(const Json& j, Eigen::Index dim,
                           const std::string& field) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != dim)
    throw SchemaError(field, "expected an array of " + std::to_string(dim) +
                                 " entries");
  Vector v(dim);
  for (Eigen::Index r = 0; r < dim; ++r)
    v(r) = parse_complex(j[static_cast<std::size_t>(r)],
                         field + "[" + std::to_string(r) + "]");
  return v;
}

inline std::vector<LabeledMatrix> parse_operator_map(const Json& j,
                                                     Eigen::Index dim,
                                                     const std::string& field) {
  if (!j.is_object())
    throw SchemaError(field, "expected an object mapping labels to matrices");
  if (j.empty()) throw SchemaError(field, "device has no operators");
  std::vector<LabeledMatrix> out;
  out.reserve(j.size());
  for (const auto& [label, value] : j.items())
    out.push_back({label, parse_matrix(value, dim, field + "." + label)});
  return out;
}

inline void check_keys(const Json& j, const std::string& prefix,
                       const std::vector<std::string>& known,
                       const ParseOptions& options,
                       std::vector<std::string>& warnings) {
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (std::find(known.begin(), known.end(), key) != known.end()) continue;
    const std::string field = prefix.empty() ? key : prefix + "." + key;
    if (options.lenient)
      warnings.push_back("ignoring unknown field \"" + field + "\"");
    else
      throw SchemaError(field, "unknown field (pass --lenient to ignore)");
  }
}

}  // namespace detail

/// Parses device-file JSON text. Syntax problems raise SyntaxError with the
/// line and column; structural problems raise SchemaError naming the field.
inline ParsedDeviceFile parse_device_text(const std::string& text,
                                          const ParseOptions& options = {}) {
  Json root;
  try {
    root = Json::parse(text);
  } catch (const Json::parse_error& e) {
    const auto [line, col] = detail::line_column(text, e.byte > 0 ? e.byte - 1
                                                                  : 0);
    throw SyntaxError("line " + std::to_string(line) + ", column " +
                      std::to_string(col) + ": " + e.what());
  }
  if (!root.is_object())
    throw SchemaError("(root)", "expected a JSON object");

  ParsedDeviceFile parsed;
  detail::check_keys(root, "",
                     {"format_version", "dimension", "preparation",
                      "measurement", "evolution", "scenario"},
                     options, parsed.warnings);

  if (!root.contains("format_version"))
    throw SchemaError("format_version", "missing");
  if (!root["format_version"].is_number_integer())
    throw SchemaError("format_version", "expected an integer");
  parsed.file.format_version = root["format_version"].get<int>();
  if (parsed.file.format_version != 1)
    throw SchemaError("format_version",
                      "unsupported version " +
                          std::to_string(parsed.file.format_version) +
                          "; this reader understands version 1");

  if (!root.contains("dimension")) throw SchemaError("dimension", "missing");
  if (!root["dimension"].is_number_integer())
    throw SchemaError("dimension", "expected an integer");
  const std::int64_t dim = root["dimension"].get<std::int64_t>();
  if (dim < 1 || dim > kMaxDimension)
    throw SchemaError("dimension", "must lie in [1, " +
                                       std::to_string(kMaxDimension) +
                                       "], got " + std::to_string(dim));
  parsed.file.dimension = static_cast<Eigen::Index>(dim);

  if (root.contains("preparation"))
    parsed.file.preparation = detail::parse_operator_map(
        root["preparation"], parsed.file.dimension, "preparation");
  if (root.contains("measurement"))
    parsed.file.measurement = detail::parse_operator_map(
        root["measurement"], parsed.file.dimension, "measurement");

  if (root.contains("evolution")) {
    const Json& ev = root["evolution"];
    if (!ev.is_object()) throw SchemaError("evolution", "expected an object");
    detail::check_keys(ev, "evolution", {"unitary", "t_prepare", "t_measure"},
                       options, parsed.warnings);
    if (!ev.contains("unitary"))
      throw SchemaError("evolution.unitary", "missing");
    EvolutionInput input;
    input.unitary = detail::parse_matrix(ev["unitary"], parsed.file.dimension,
                                         "evolution.unitary");
    input.t_prepare =
        ev.contains("t_prepare")
            ? detail::parse_number(ev["t_prepare"], "evolution.t_prepare")
            : 0.0;
    input.t_measure =
        ev.contains("t_measure")
            ? detail::parse_number(ev["t_measure"], "evolution.t_measure")
            : 1.0;
    parsed.file.evolution = std::move(input);
  }

  if (root.contains("scenario")) {
    const Json& sc = root["scenario"];
    if (!sc.is_object()) throw SchemaError("scenario", "expected an object");
    detail::check_keys(sc, "scenario", {"rho_g", "a_basis", "b_basis"},
                       options, parsed.warnings);
    for (const char* key : {"rho_g", "a_basis", "b_basis"})
      if (!sc.contains(key))
        throw SchemaError(std::string("scenario.") + key, "missing");
    ScenarioInput input;
    input.rho_g = detail::parse_matrix(sc["rho_g"], parsed.file.dimension,
                                       "scenario.rho_g");
    for (const char* key : {"a_basis", "b_basis"}) {
      const Json& basis = sc[key];
      const std::string field = std::string("scenario.") + key;
      if (!basis.is_array() ||
          static_cast<Eigen::Index>(basis.size()) != parsed.file.dimension)
        throw SchemaError(field, "expected an array of " +
                                     std::to_string(parsed.file.dimension) +
                                     " vectors");
      std::vector<Vector>& target =
          std::string(key) == "a_basis" ? input.a_basis : input.b_basis;
      for (std::size_t i = 0; i < basis.size(); ++i)
        target.push_back(detail::parse_vector(
            basis[i], parsed.file.dimension,
            field + "[" + std::to_string(i) + "]"));
    }
    parsed.file.scenario = std::move(input);
  }

  if (!parsed.file.preparation && !parsed.file.measurement &&
      !parsed.file.scenario)
    throw SchemaError("(root)",
                      "file declares neither devices nor a scenario");
  return parsed;
}

/// Reads and parses a device file from disk.
inline ParsedDeviceFile load_device_file(const std::string& path,
                                         const ParseOptions& options = {}) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileError("cannot open \"" + path + "\" for reading");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw FileError("failed while reading \"" + path + "\"");
  return parse_device_text(buffer.str(), options);
}

// ---------------------------------------------------------------------------
// Output formatting
// ---------------------------------------------------------------------------

/// Shortest decimal string that round-trips to the same double.
inline std::string format_double(double v) {
  char buf[40];
  const std::to_chars_result res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace detail {

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

inline const char* axis_name(GivenAxis axis) {
  return axis == GivenAxis::Preparation ? "prepared" : "observed";
}

}  // namespace detail

inline void write_csv_joint(std::ostream& os, const JointDistribution& jd) {
  os << "prepared";
  for (const std::string& l : jd.meas_labels)
    os << ',' << detail::csv_escape(l);
  os << '\n';
  for (Eigen::Index i = 0; i < jd.p.rows(); ++i) {
    os << detail::csv_escape(jd.prep_labels[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j < jd.p.cols(); ++j)
      os << ',' << format_double(jd.p(i, j));
    os << '\n';
  }
}

inline void write_csv_conditional(std::ostream& os,
                                  const ConditionalTable& t) {
  os << detail::axis_name(t.given);
  for (const std::string& l : t.outcome_labels)
    os << ',' << detail::csv_escape(l);
  os << '\n';
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    os << detail::csv_escape(t.given_labels[r]);
    if (t.rows[r].has_value()) {
      for (Eigen::Index c = 0; c < t.rows[r]->size(); ++c)
        os << ',' << format_double((*t.rows[r])(c));
    } else {
      for (std::size_t c = 0; c < t.outcome_labels.size(); ++c)
        os << ",undefined";
    }
    os << '\n';
  }
}

inline void write_csv_frequency(std::ostream& os, const FrequencyTable& ft) {
  os << "prepared,outcome,count,empirical,expected,z\n";
  for (Eigen::Index i = 0; i < ft.counts.rows(); ++i)
    for (Eigen::Index j = 0; j < ft.counts.cols(); ++j)
      os << detail::csv_escape(ft.prep_labels[static_cast<std::size_t>(i)])
         << ',' << detail::csv_escape(ft.meas_labels[static_cast<std::size_t>(j)])
         << ',' << ft.counts(i, j) << ',' << format_double(ft.empirical(i, j))
         << ',' << format_double(ft.expected(i, j)) << ','
         << format_double(ft.z(i, j)) << '\n';
  os << '\n';
  os << "kept,discarded,max_abs_z,max_abs_error\n";
  os << ft.kept_total << ',' << ft.discarded << ','
     << format_double(ft.max_abs_z()) << ','
     << format_double(ft.max_abs_error()) << '\n';
}

inline void write_csv_log(std::ostream& os, const ExperimentLog& log) {
  os << "trial,prepared,outcome\n";
  for (const EventRecord& r : log.records)
    os << r.trial << ',' << detail::csv_escape(r.prepared) << ','
       << detail::csv_escape(r.outcome) << '\n';
}

// ---------------------------------------------------------------------------
// JSON views of results
// ---------------------------------------------------------------------------

inline Json json_matrix(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Json json_bias(const BiasReport& report) {
  Json j;
  j["unbiased"] = report.is_unbiased;
  if (report.gamma.has_value())
    j["gamma"] = *report.gamma;
  else
    j["gamma"] = nullptr;
  j["deviation"] = report.deviation;
  return j;
}

inline Json json_joint(const JointDistribution& jd) {
  Json j;
  j["prepared"] = jd.prep_labels;
  j["observed"] = jd.meas_labels;
  j["p"] = json_matrix(jd.p);
  j["denominator"] = jd.denominator;
  return j;
}

inline Json json_conditional(const ConditionalTable& t) {
  Json j;
  j["given"] = detail::axis_name(t.given);
  j["given_labels"] = t.given_labels;
  j["outcome_labels"] = t.outcome_labels;
  Json rows = Json::array();
  for (const std::optional<Eigen::VectorXd>& row : t.rows) {
    if (!row.has_value()) {
      rows.push_back(nullptr);
      continue;
    }
    Json r = Json::array();
    for (Eigen::Index c = 0; c < row->size(); ++c) r.push_back((*row)(c));
    rows.push_back(std::move(r));
  }
  j["rows"] = std::move(rows);
  return j;
}

inline Json json_frequency(const FrequencyTable& ft) {
  Json j;
  j["prepared"] = ft.prep_labels;
  j["observed"] = ft.meas_labels;
  Json counts = Json::array();
  for (Eigen::Index i = 0; i < ft.counts.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < ft.counts.cols(); ++c)
      row.push_back(ft.counts(i, c));
    counts.push_back(std::move(row));
  }
  j["counts"] = std::move(counts);
  j["kept"] = ft.kept_total;
  j["discarded"] = ft.discarded;
  j["empirical"] = json_matrix(ft.empirical);
  j["expected"] = json_matrix(ft.expected);
  j["z"] = json_matrix(ft.z);
  j["max_abs_z"] = ft.max_abs_z();
  j["max_abs_error"] = ft.max_abs_error();
  return j;
}

}  // namespace retrodict
