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
#include <optional>
#include <string>
#include <vector>

#include "retrodict/device_model.hpp"
#include "retrodict/operator_core.hpp"

namespace retrodict {

namespace detail {

/// Clamps a value that is nonnegative in exact arithmetic: small negative
/// rounding residues (within `slack`) become zero, anything more negative is
/// internal corruption.
inline double clamp_nonnegative(double value, double slack, const char* what) {
  if (value >= 0.0) return value;
  if (value >= -slack) return 0.0;
  throw InternalNumericalError(std::string(what) + " came out negative (" +
                               fmt_real(value) + ") beyond rounding slack");
}

}  // namespace detail

/// Joint outcome distribution of a preparation/measurement device pair:
/// p(i, j) is the trace of the i-th preparation operator against the j-th
/// measurement operator, normalized by the trace of the two operator sums
/// against each other.
struct JointDistribution {
  std::vector<std::string> prep_labels;
  std::vector<std::string> meas_labels;
  /// Rows follow prep_labels, columns meas_labels; entries sum to 1.
  Eigen::MatrixXd p;
  /// The normalizer: trace of the preparation sum against the measurement
  /// sum.
  double denominator = 0.0;
};

inline JointDistribution joint(const DeviceOperatorSet& prep,
                               const DeviceOperatorSet& meas,
                               const Tolerances& tol = {}) {
  detail::require_role(prep, DeviceRole::Preparation, "joint");
  detail::require_role(meas, DeviceRole::Measurement, "joint");
  if (prep.dim() != meas.dim())
    throw DimensionMismatch("devices have dimensions " +
                            std::to_string(prep.dim()) + " and " +
                            std::to_string(meas.dim()));

  const double scale = trace(prep.total()) * trace(meas.total());
  const double slack = tol.denominator * std::max(1.0, scale);

  const double den = detail::clamp_nonnegative(
      trace_pair(prep.total(), meas.total(), tol), slack, "joint normalizer");
  if (den <= tol.denominator * std::max(1.0, scale))
    throw DegeneratePair(
        "the preparation and measurement operator sums are orthogonal; "
        "no outcome pair can occur");

  JointDistribution jd;
  jd.prep_labels = prep.labels();
  jd.meas_labels = meas.labels();
  jd.denominator = den;
  jd.p.resize(static_cast<Eigen::Index>(prep.size()),
              static_cast<Eigen::Index>(meas.size()));
  for (std::size_t i = 0; i < prep.size(); ++i)
    for (std::size_t j = 0; j < meas.size(); ++j) {
      const double raw = detail::clamp_nonnegative(
          trace_pair(prep.op(i), meas.op(j), tol), slack, "joint entry");
      jd.p(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          raw / den;
    }
  return jd;
}

/// Marginal over measurement outcomes: one probability per preparation
/// label.
inline std::vector<double> marginal_preparation(const JointDistribution& jd) {
  std::vector<double> m(static_cast<std::size_t>(jd.p.rows()));
  for (Eigen::Index i = 0; i < jd.p.rows(); ++i) m[i] = jd.p.row(i).sum();
  return m;
}

/// Marginal over preparation outcomes: one probability per measurement
/// label.
inline std::vector<double> marginal_measurement(const JointDistribution& jd) {
  std::vector<double> m(static_cast<std::size_t>(jd.p.cols()));
  for (Eigen::Index j = 0; j < jd.p.cols(); ++j) m[j] = jd.p.col(j).sum();
  return m;
}

/// Which side of the joint distribution a conditional table conditions on.
enum class GivenAxis { Preparation, Measurement };

/// Conditional probabilities, one row per conditioning label. A row is
/// absent (nullopt) when its conditioning event has zero probability; such
/// conditionals are undefined, not zero.
struct ConditionalTable {
  GivenAxis given = GivenAxis::Preparation;
  std::vector<std::string> given_labels;
  std::vector<std::string> outcome_labels;
  std::vector<std::optional<Eigen::VectorXd>> rows;

  bool defined(std::size_t row) const { return rows.at(row).has_value(); }
  std::vector<std::string> undefined_labels() const {
    std::vector<std::string> out;
    for (std::size_t r = 0; r < rows.size(); ++r)
      if (!rows[r].has_value()) out.push_back(given_labels[r]);
    return out;
  }
};

/// Probability of each measurement outcome given the preparation outcome:
/// each joint row divided by its sum.
inline ConditionalTable predictive(const JointDistribution& jd,
                                   const Tolerances& tol = {}) {
  ConditionalTable t;
  t.given = GivenAxis::Preparation;
  t.given_labels = jd.prep_labels;
  t.outcome_labels = jd.meas_labels;
  t.rows.resize(jd.prep_labels.size());
  for (Eigen::Index i = 0; i < jd.p.rows(); ++i) {
    const double mass = jd.p.row(i).sum();
    if (mass <= tol.denominator) continue;
    t.rows[static_cast<std::size_t>(i)] =
        Eigen::VectorXd(jd.p.row(i).transpose() / mass);
  }
  return t;
}

/// Probability of each preparation outcome given the measurement outcome:
/// each joint column divided by its sum.
inline ConditionalTable retrodictive(const JointDistribution& jd,
                                     const Tolerances& tol = {}) {
  ConditionalTable t;
  t.given = GivenAxis::Measurement;
  t.given_labels = jd.meas_labels;
  t.outcome_labels = jd.prep_labels;
  t.rows.resize(jd.meas_labels.size());
  for (Eigen::Index j = 0; j < jd.p.cols(); ++j) {
    const double mass = jd.p.col(j).sum();
    if (mass <= tol.denominator) continue;
    t.rows[static_cast<std::size_t>(j)] = Eigen::VectorXd(jd.p.col(j) / mass);
  }
  return t;
}

/// The factorizations p(i) * p(j|i) and p(j) * p(i|j) must both rebuild the
/// joint distribution to this accuracy.
inline constexpr double kBayesTolerance = 1e-12;

/// Largest violation of the two Bayes factorizations of a joint
/// distribution. Undefined conditional rows are skipped; their conditioning
/// events carry no probability.
inline double bayes_deviation(const JointDistribution& jd,
                              const ConditionalTable& pred,
                              const ConditionalTable& retr) {
  const std::vector<double> pi = marginal_preparation(jd);
  const std::vector<double> pj = marginal_measurement(jd);
  double dev = 0.0;
  for (Eigen::Index i = 0; i < jd.p.rows(); ++i)
    for (Eigen::Index j = 0; j < jd.p.cols(); ++j) {
      const std::size_t si = static_cast<std::size_t>(i);
      const std::size_t sj = static_cast<std::size_t>(j);
      if (pred.rows[si].has_value())
        dev = std::max(dev,
                       std::abs(pi[si] * (*pred.rows[si])(j) - jd.p(i, j)));
      if (retr.rows[sj].has_value())
        dev = std::max(dev,
                       std::abs(pj[sj] * (*retr.rows[sj])(i) - jd.p(i, j)));
    }
  return dev;
}

/// Largest |row sum - 1| over the defined rows of a conditional table.
inline double row_sum_deviation(const ConditionalTable& t) {
  double dev = 0.0;
  for (const std::optional<Eigen::VectorXd>& row : t.rows)
    if (row.has_value()) dev = std::max(dev, std::abs(row->sum() - 1.0));
  return dev;
}

/// Born-rule shortcut for unbiased measurement devices: trace of the state
/// against a probability operator measure element, clamped to [0, 1].
inline double detection_probability(const DensityOperator& rho, const Pom& pom,
                                    const std::string& label,
                                    const Tolerances& tol = {}) {
  if (rho.dim() != pom.dim())
    throw DimensionMismatch("state has dimension " + std::to_string(rho.dim()) +
                            ", elements have " + std::to_string(pom.dim()));
  const double raw = trace_pair(rho.op(), pom.element(label), tol);
  const double v = detail::clamp_nonnegative(raw, tol.denominator,
                                             "detection probability");
  if (v > 1.0 + tol.denominator)
    throw InternalNumericalError("detection probability came out " +
                                 detail::fmt_real(v) + ", above 1");
  return std::min(v, 1.0);
}

/// Retrodictive mirror of the Born rule for unbiased preparation devices:
/// trace of a preparation element against the retrodicted state.
inline double preparation_probability(const Pom& prep_pom,
                                      const DensityOperator& retrodicted,
                                      const std::string& label,
                                      const Tolerances& tol = {}) {
  if (retrodicted.dim() != prep_pom.dim())
    throw DimensionMismatch("state has dimension " +
                            std::to_string(retrodicted.dim()) +
                            ", elements have " +
                            std::to_string(prep_pom.dim()));
  const double raw = trace_pair(prep_pom.element(label), retrodicted.op(), tol);
  const double v = detail::clamp_nonnegative(raw, tol.denominator,
                                             "preparation probability");
  if (v > 1.0 + tol.denominator)
    throw InternalNumericalError("preparation probability came out " +
                                 detail::fmt_real(v) + ", above 1");
  return std::min(v, 1.0);
}

}  // namespace retrodict
