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

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "retrodict/device_model.hpp"
#include "retrodict/evolution.hpp"
#include "retrodict/operator_core.hpp"
#include "retrodict/probability_engine.hpp"

namespace retrodict {

/// Closed-form results are accepted only when they agree with the generic
/// probability rule to this tolerance.
inline constexpr double kScenarioCrossTolerance = 1e-12;

/// The two-step story (prepare, then measure the extended probability
/// operator measure, then discard null outcomes) must reproduce the direct
/// joint distribution to this accuracy.
inline constexpr double kTwoStepTolerance = 1e-10;

// ---------------------------------------------------------------------------
// Spin-half preparation
// ---------------------------------------------------------------------------

/// A spin-half source that emits "up" or "down" along z with equal weight:
/// two operators (1/2)|up><up| and (1/2)|down><down|. The device is unbiased
/// with operator sum (1/2) * identity.
inline DeviceOperatorSet spin_half_preparation(const Tolerances& tol = {}) {
  Matrix up = Matrix::Zero(2, 2);
  up(0, 0) = 0.5;
  Matrix down = Matrix::Zero(2, 2);
  down(1, 1) = 0.5;
  return DeviceOperatorSet::build(DeviceRole::Preparation,
                                  {{"up", up}, {"down", down}}, tol);
}

/// Probability that the spin-half source fired "up" given that a measurement
/// described by the single outcome operator `gamma` clicked. Closed form:
/// the up-up entry of gamma over its trace; cross-checked against the
/// generic joint-distribution rule.
inline double spin_half_up_probability(const HermitianOperator& gamma,
                                       const Tolerances& tol = {}) {
  if (gamma.dim() != 2)
    throw DimensionMismatch("spin-half outcome operator must be 2x2, got " +
                            std::to_string(gamma.dim()) + "x" +
                            std::to_string(gamma.dim()));
  require_psd(gamma, "gamma", tol);
  const double tr = trace(gamma);
  if (tr <= tol.psd) throw ZeroTraceOperator("gamma");
  const double closed = gamma.matrix()(0, 0).real() / tr;

  const DeviceOperatorSet prep = spin_half_preparation(tol);
  const DeviceOperatorSet meas = DeviceOperatorSet::build(
      DeviceRole::Measurement, {{"click", gamma.matrix()}}, tol);
  const ConditionalTable table = retrodictive(joint(prep, meas, tol), tol);
  if (!table.defined(0))
    throw CrossCheckFailure(
        "generic retrodiction is undefined for a click the closed form "
        "accepts");
  const double generic = (*table.rows[0])(0);
  if (std::abs(generic - closed) > kScenarioCrossTolerance)
    throw CrossCheckFailure(
        "spin-half closed form and generic rule disagree by " +
        detail::fmt_real(std::abs(generic - closed)));
  return generic;
}

// ---------------------------------------------------------------------------
// Belinfante-style source against a projective measurement
// ---------------------------------------------------------------------------

/// A source that draws basis states |a_i> with weights taken from a fixed
/// state rho_g, watched through a projective measurement onto another
/// orthonormal basis |b_j>.
class BelinfanteScenario {
 public:
  /// Orthonormality: the Gram matrix of each basis may deviate from the
  /// identity by at most this much per entry. Bases are rejected, never
  /// silently re-orthogonalized.
  static constexpr double kBasisTolerance = 1e-8;

  static BelinfanteScenario validate(const Matrix& rho_g,
                                     std::vector<Vector> a_basis,
                                     std::vector<Vector> b_basis,
                                     const Tolerances& tol = {}) {
    const DensityOperator rho = DensityOperator::validate(
        HermitianOperator::validate(rho_g, tol), "rho_g", tol);
    const Eigen::Index d = rho.dim();
    check_basis(a_basis, d, "a");
    check_basis(b_basis, d, "b");
    return BelinfanteScenario(std::move(rho), std::move(a_basis),
                              std::move(b_basis));
  }

  const DensityOperator& rho_g() const noexcept { return rho_; }
  Eigen::Index dim() const noexcept { return rho_.dim(); }
  const std::vector<Vector>& a_basis() const noexcept { return a_; }
  const std::vector<Vector>& b_basis() const noexcept { return b_; }
  /// Labels "1".."d", shared by both sides.
  const std::vector<std::string>& labels() const noexcept { return labels_; }

  /// Weight of the i-th source state: <a_i| rho_g |a_i>, clamped at zero.
  double weight(std::size_t i) const {
    const Complex v = a_[i].adjoint() * rho_.matrix() * a_[i];
    return std::max(0.0, v.real());
  }

  /// Squared overlap |<a_i|b_j>|^2.
  double overlap(std::size_t i, std::size_t j) const {
    const Complex v = a_[i].adjoint() * b_[j];
    return std::norm(v);
  }

 private:
  BelinfanteScenario(DensityOperator rho, std::vector<Vector> a,
                     std::vector<Vector> b)
      : rho_(std::move(rho)), a_(std::move(a)), b_(std::move(b)) {
    labels_.reserve(a_.size());
    for (std::size_t i = 1; i <= a_.size(); ++i)
      labels_.push_back(std::to_string(i));
  }

  static void check_basis(const std::vector<Vector>& basis, Eigen::Index d,
                          const char* name) {
    if (static_cast<Eigen::Index>(basis.size()) != d)
      throw ValidationError("basis \"" + std::string(name) + "\" has " +
                            std::to_string(basis.size()) +
                            " vectors, expected " + std::to_string(d));
    Matrix v(d, d);
    for (Eigen::Index c = 0; c < d; ++c) {
      if (basis[static_cast<std::size_t>(c)].size() != d)
        throw DimensionMismatch("basis \"" + std::string(name) + "\" vector " +
                                std::to_string(c + 1) + " has length " +
                                std::to_string(
                                    basis[static_cast<std::size_t>(c)].size()) +
                                ", expected " + std::to_string(d));
      for (Eigen::Index r = 0; r < d; ++r) {
        const Complex z = basis[static_cast<std::size_t>(c)](r);
        if (!detail::entry_finite(z))
          throw InvalidMatrix("basis \"" + std::string(name) + "\" vector " +
                              std::to_string(c + 1) +
                              " has a non-finite entry");
        v(r, c) = z;
      }
    }
    const double defect =
        (v.adjoint() * v - Matrix::Identity(d, d)).cwiseAbs().maxCoeff();
    if (defect > kBasisTolerance)
      throw ValidationError("basis \"" + std::string(name) +
                            "\" is not orthonormal: Gram defect " +
                            detail::fmt_real(defect));
  }

  DensityOperator rho_;
  std::vector<Vector> a_;
  std::vector<Vector> b_;
  std::vector<std::string> labels_;
};

/// The device pair the scenario describes: preparation operators
/// weight_i |a_i><a_i| and measurement operators |b_j><b_j|.
struct BelinfanteDevices {
  DeviceOperatorSet preparation;
  DeviceOperatorSet measurement;
};

inline BelinfanteDevices belinfante_devices(const BelinfanteScenario& s,
                                            const Tolerances& tol = {}) {
  const std::size_t d = static_cast<std::size_t>(s.dim());
  std::vector<LabeledMatrix> prep;
  std::vector<LabeledMatrix> meas;
  prep.reserve(d);
  meas.reserve(d);
  double total_weight = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const double w = s.weight(i);
    total_weight += w;
    prep.push_back({s.labels()[i],
                    w * (s.a_basis()[i] * s.a_basis()[i].adjoint())});
    meas.push_back({s.labels()[i],
                    Matrix(s.b_basis()[i] * s.b_basis()[i].adjoint())});
  }
  if (total_weight <= 0.0)
    throw DegenerateScenario("every source weight is zero");
  return {DeviceOperatorSet::build(DeviceRole::Preparation, prep, tol),
          DeviceOperatorSet::build(DeviceRole::Measurement, meas, tol)};
}

/// Retrodictive conditionals of the scenario, by the closed form
///   p(i | j) = w_i |<a_i|b_j>|^2 / sum_i' w_i' |<a_i'|b_j>|^2,
/// cross-checked against the generic rule applied to the device pair.
inline ConditionalTable belinfante_retrodictive(const BelinfanteScenario& s,
                                                const Tolerances& tol = {}) {
  const std::size_t d = static_cast<std::size_t>(s.dim());
  std::vector<double> w(d);
  double total_weight = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    w[i] = s.weight(i);
    total_weight += w[i];
  }
  if (total_weight <= 0.0)
    throw DegenerateScenario("every source weight is zero");

  ConditionalTable closed;
  closed.given = GivenAxis::Measurement;
  closed.given_labels = s.labels();
  closed.outcome_labels = s.labels();
  closed.rows.resize(d);
  for (std::size_t j = 0; j < d; ++j) {
    Eigen::VectorXd row(static_cast<Eigen::Index>(d));
    double den = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      row(static_cast<Eigen::Index>(i)) = w[i] * s.overlap(i, j);
      den += row(static_cast<Eigen::Index>(i));
    }
    if (den <= tol.denominator * total_weight) continue;
    closed.rows[j] = Eigen::VectorXd(row / den);
  }

  const BelinfanteDevices dev = belinfante_devices(s, tol);
  const ConditionalTable generic =
      retrodictive(joint(dev.preparation, dev.measurement, tol), tol);
  const double dev_max = table_deviation(closed, generic);
  if (dev_max > kScenarioCrossTolerance)
    throw CrossCheckFailure(
        "closed-form retrodiction and the generic rule disagree by " +
        detail::fmt_real(dev_max));
  return closed;
}

/// Comparison of the scenario's retrodictive conditionals with the bare
/// squared overlaps |<a_i|b_j>|^2.
struct BelinfanteOverlapReport {
  /// Largest |p(i|j) - |<a_i|b_j>|^2| over defined rows.
  double max_deviation = 0.0;
  /// Whether rho_g is proportional to the identity.
  bool uniform = false;
  /// Deviation below which the two tables count as matching.
  static constexpr double kMatchTolerance = 1e-9;
  /// A uniform rho_g must make the tables match; a non-uniform one usually
  /// does not, but coincidences (for instance identical bases) are allowed.
  bool consistent = false;
};

/// Checks the folklore that "the probability the source sent |a_i> is the
/// squared overlap with the observed |b_j>". That reading is guaranteed only
/// when rho_g is uniform; this report measures how far it drifts otherwise.
inline BelinfanteOverlapReport belinfante_overlap_check(
    const BelinfanteScenario& s, const Tolerances& tol = {}) {
  const ConditionalTable table = belinfante_retrodictive(s, tol);
  const std::size_t d = static_cast<std::size_t>(s.dim());
  BelinfanteOverlapReport report;
  for (std::size_t j = 0; j < d; ++j) {
    if (!table.rows[j].has_value()) continue;
    for (std::size_t i = 0; i < d; ++i)
      report.max_deviation = std::max(
          report.max_deviation,
          std::abs((*table.rows[j])(static_cast<Eigen::Index>(i)) -
                   s.overlap(i, j)));
  }
  report.uniform =
      proportionality_to_identity(s.rho_g().op(), tol).has_value();
  report.consistent =
      !report.uniform ||
      report.max_deviation <= BelinfanteOverlapReport::kMatchTolerance;
  return report;
}

// ---------------------------------------------------------------------------
// Extending a measurement device with an explicit null outcome
// ---------------------------------------------------------------------------

/// A measurement device recast as a probability operator measure by adding
/// the element identity - (operator sum) under the reserved null label.
struct ExtendedMeasurement {
  Pom pom;
  /// Position of the null element within the measure (always last).
  std::size_t null_index = 0;
};

inline ExtendedMeasurement extend_measurement(const DeviceOperatorSet& meas,
                                              const Tolerances& tol = {}) {
  detail::require_role(meas, DeviceRole::Measurement, "extend_measurement");
  const Eigen::Index d = meas.dim();
  std::vector<std::string> labels = meas.labels();
  std::vector<HermitianOperator> elements;
  elements.reserve(meas.size() + 1);
  for (std::size_t j = 0; j < meas.size(); ++j) elements.push_back(meas.op(j));
  labels.push_back(kNullOutcomeLabel);
  elements.push_back(HermitianOperator::validate(
      Matrix::Identity(d, d) - meas.total().matrix(), tol));
  const std::size_t null_index = elements.size() - 1;
  return {Pom::validate(std::move(labels), std::move(elements), tol),
          null_index};
}

/// The direct joint distribution of a device pair set against the two-step
/// story: prepare a state with the a priori weights, measure the extended
/// probability operator measure, discard null outcomes, renormalize.
struct EquivalenceReport {
  std::vector<std::string> prep_labels;
  std::vector<std::string> meas_labels;
  /// Joint distribution from the two-step story, null outcome removed.
  Eigen::MatrixXd restricted;
  /// Joint distribution from the symmetric rule.
  Eigen::MatrixXd direct;
  double max_deviation = 0.0;
  /// Probability that a trial ends in the null outcome.
  double null_mass = 0.0;
};

inline EquivalenceReport appendix_equivalence(const DeviceOperatorSet& prep,
                                              const DeviceOperatorSet& meas,
                                              const Tolerances& tol = {}) {
  detail::require_role(prep, DeviceRole::Preparation, "appendix_equivalence");
  detail::require_role(meas, DeviceRole::Measurement, "appendix_equivalence");
  if (prep.dim() != meas.dim())
    throw DimensionMismatch("devices have dimensions " +
                            std::to_string(prep.dim()) + " and " +
                            std::to_string(meas.dim()));

  const ExtendedMeasurement ext = extend_measurement(meas, tol);
  const std::vector<double> weights = a_priori_distribution(prep);

  const Eigen::Index ni = static_cast<Eigen::Index>(prep.size());
  const Eigen::Index nj = static_cast<Eigen::Index>(meas.size());
  Eigen::MatrixXd two_step = Eigen::MatrixXd::Zero(ni, nj);
  double null_mass = 0.0;
  for (Eigen::Index i = 0; i < ni; ++i) {
    const std::size_t si = static_cast<std::size_t>(i);
    if (trace(prep.op(si)) <= tol.psd) continue;  // carries no weight
    const DensityOperator rho = outcome_state(prep, prep.labels()[si], tol);
    for (Eigen::Index j = 0; j < nj; ++j)
      two_step(i, j) =
          weights[si] * detection_probability(
                            rho, ext.pom,
                            meas.labels()[static_cast<std::size_t>(j)], tol);
    null_mass += weights[si] *
                 detection_probability(rho, ext.pom, kNullOutcomeLabel, tol);
  }
  const double kept = two_step.sum();
  if (kept <= tol.denominator)
    throw DegeneratePair(
        "the extended measurement sends every trial to the null outcome");

  EquivalenceReport report;
  report.prep_labels = prep.labels();
  report.meas_labels = meas.labels();
  report.restricted = two_step / kept;
  report.direct = joint(prep, meas, tol).p;
  report.max_deviation =
      (report.restricted - report.direct).cwiseAbs().maxCoeff();
  report.null_mass = null_mass;
  return report;
}

}  // namespace retrodict
