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

#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "retrodict/operator_core.hpp"

namespace retrodict {

enum class DeviceRole { Preparation, Measurement };

inline const char* to_string(DeviceRole role) {
  return role == DeviceRole::Preparation ? "preparation" : "measurement";
}

/// Outcome label reserved for "the measurement fired on nothing"; it may not
/// appear among the operators of a measurement device.
inline const std::string kNullOutcomeLabel = "0";

/// Hermitian matrix tagged with its outcome label, as read from input.
struct LabeledMatrix {
  std::string label;
  Matrix matrix;
};

/// An immutable set of labeled device operators: one operator per outcome of
/// a preparation or measurement device, each Hermitian and positive
/// semidefinite, with a sum of positive trace. Measurement devices whose sum
/// has an eigenvalue above one are rescaled by a common factor on admission
/// so that occurrence probabilities stay meaningful; the factor is recorded.
class DeviceOperatorSet {
 public:
  static DeviceOperatorSet build(DeviceRole role,
                                 const std::vector<LabeledMatrix>& members,
                                 const Tolerances& tol = {}) {
    if (members.empty()) throw EmptyDevice();
    const Eigen::Index dim = members.front().matrix.rows();

    std::vector<std::string> labels;
    std::vector<HermitianOperator> ops;
    std::unordered_map<std::string, std::size_t> index;
    labels.reserve(members.size());
    ops.reserve(members.size());
    for (const LabeledMatrix& m : members) {
      if (index.count(m.label)) throw DuplicateLabel(m.label);
      if (m.label == kNullOutcomeLabel) throw ReservedLabel(m.label);
      HermitianOperator op = HermitianOperator::validate(m.matrix, tol);
      if (op.dim() != dim)
        throw DimensionMismatch("operator \"" + m.label + "\" is " +
                                std::to_string(op.dim()) + "-dimensional, "
                                "expected " + std::to_string(dim));
      require_psd(op, m.label, tol);
      index.emplace(m.label, labels.size());
      labels.push_back(m.label);
      ops.push_back(std::move(op));
    }

    Matrix sum = Matrix::Zero(dim, dim);
    for (const HermitianOperator& op : ops) sum += op.matrix();
    HermitianOperator total = HermitianOperator::validate(sum, tol);
    if (trace(total) <= tol.psd) throw ZeroTotal();

    double scale = 1.0;
    if (role == DeviceRole::Measurement) {
      const Eigen::VectorXd ev = eigenvalues_of(total);
      const double top = ev(ev.size() - 1);
      if (top > 1.0) {
        scale = 1.0 / top;
        Matrix scaled_sum = Matrix::Zero(dim, dim);
        for (HermitianOperator& op : ops) {
          op = HermitianOperator::validate(op.matrix() * scale, tol);
          scaled_sum += op.matrix();
        }
        total = HermitianOperator::validate(scaled_sum, tol);
      }
    }

    return DeviceOperatorSet(role, std::move(labels), std::move(ops),
                             std::move(index), std::move(total), scale);
  }

  DeviceRole role() const noexcept { return role_; }
  Eigen::Index dim() const noexcept { return total_.dim(); }
  std::size_t size() const noexcept { return ops_.size(); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }

  const HermitianOperator& op(std::size_t i) const { return ops_.at(i); }
  const HermitianOperator& op(const std::string& label) const {
    return ops_[index_of(label)];
  }
  std::size_t index_of(const std::string& label) const {
    auto it = index_.find(label);
    if (it == index_.end()) throw UnknownLabel(label);
    return it->second;
  }

  /// Sum of all operators, after any admission rescaling.
  const HermitianOperator& total() const noexcept { return total_; }
  /// Factor the supplied matrices were multiplied by on admission (1 when
  /// none was needed).
  double admission_scale() const noexcept { return scale_; }

 private:
  DeviceOperatorSet(DeviceRole role, std::vector<std::string> labels,
                    std::vector<HermitianOperator> ops,
                    std::unordered_map<std::string, std::size_t> index,
                    HermitianOperator total, double scale)
      : role_(role),
        labels_(std::move(labels)),
        ops_(std::move(ops)),
        index_(std::move(index)),
        total_(std::move(total)),
        scale_(scale) {}

  DeviceRole role_;
  std::vector<std::string> labels_;
  std::vector<HermitianOperator> ops_;
  std::unordered_map<std::string, std::size_t> index_;
  HermitianOperator total_;
  double scale_;
};

/// Verdict on whether a device's operator sum is a multiple of the identity.
struct BiasReport {
  bool is_unbiased = false;
  /// The multiple, when unbiased.
  std::optional<double> gamma;
  /// Max-entry distance of the sum from (trace/dim) * identity.
  double deviation = 0.0;
};

/// A device is unbiased exactly when its operator sum is proportional to the
/// identity; only then do its outcome operators define a probability rule
/// independent of what the other device did.
inline BiasReport classify_bias(const DeviceOperatorSet& dev,
                                const Tolerances& tol = {}) {
  BiasReport report;
  report.deviation = identity_deviation(dev.total());
  const std::optional<double> g =
      proportionality_to_identity(dev.total(), tol);
  report.is_unbiased = g.has_value();
  report.gamma = g;
  return report;
}

/// A validated density operator: Hermitian, positive semidefinite, unit
/// trace.
class DensityOperator {
 public:
  static constexpr double kTraceTolerance = 1e-10;

  static DensityOperator validate(const HermitianOperator& op,
                                  const std::string& label = "rho",
                                  const Tolerances& tol = {}) {
    require_psd(op, label, tol);
    const double tr = trace(op);
    if (std::abs(tr - 1.0) > kTraceTolerance)
      throw ValidationError("operator \"" + label + "\" has trace " +
                            detail::fmt_real(tr) + ", expected 1");
    return DensityOperator(op);
  }

  const HermitianOperator& op() const noexcept { return op_; }
  const Matrix& matrix() const noexcept { return op_.matrix(); }
  Eigen::Index dim() const noexcept { return op_.dim(); }

 private:
  explicit DensityOperator(HermitianOperator op) : op_(std::move(op)) {}
  HermitianOperator op_;
};

/// A probability operator measure: labeled positive-semidefinite elements
/// summing to the identity.
class Pom {
 public:
  static constexpr double kSumTolerance = 1e-9;

  static Pom validate(std::vector<std::string> labels,
                      std::vector<HermitianOperator> elements,
                      const Tolerances& tol = {}) {
    if (elements.empty()) throw EmptyDevice();
    if (labels.size() != elements.size())
      throw ValidationError("label count " + std::to_string(labels.size()) +
                            " does not match element count " +
                            std::to_string(elements.size()));
    const Eigen::Index dim = elements.front().dim();
    std::unordered_map<std::string, std::size_t> index;
    Matrix sum = Matrix::Zero(dim, dim);
    for (std::size_t i = 0; i < elements.size(); ++i) {
      if (index.count(labels[i])) throw DuplicateLabel(labels[i]);
      index.emplace(labels[i], i);
      if (elements[i].dim() != dim)
        throw DimensionMismatch("element \"" + labels[i] + "\" is " +
                                std::to_string(elements[i].dim()) +
                                "-dimensional, expected " +
                                std::to_string(dim));
      require_psd(elements[i], labels[i], tol);
      sum += elements[i].matrix();
    }
    const double defect =
        (sum - Matrix::Identity(dim, dim)).cwiseAbs().maxCoeff();
    if (defect > kSumTolerance)
      throw ValidationError(
          "elements do not sum to the identity: max entry defect " +
          detail::fmt_real(defect));
    return Pom(std::move(labels), std::move(elements), std::move(index));
  }

  Eigen::Index dim() const noexcept { return elements_.front().dim(); }
  std::size_t size() const noexcept { return elements_.size(); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  const HermitianOperator& element(std::size_t i) const {
    return elements_.at(i);
  }
  const HermitianOperator& element(const std::string& label) const {
    auto it = index_.find(label);
    if (it == index_.end()) throw UnknownLabel(label);
    return elements_[it->second];
  }

 private:
  Pom(std::vector<std::string> labels, std::vector<HermitianOperator> elements,
      std::unordered_map<std::string, std::size_t> index)
      : labels_(std::move(labels)),
        elements_(std::move(elements)),
        index_(std::move(index)) {}

  std::vector<std::string> labels_;
  std::vector<HermitianOperator> elements_;
  std::unordered_map<std::string, std::size_t> index_;
};

namespace detail {

inline void require_role(const DeviceOperatorSet& dev, DeviceRole role,
                         const char* what) {
  if (dev.role() != role)
    throw WrongRole(std::string(what) + " needs a " + to_string(role) +
                    " device, got a " + to_string(dev.role()) + " device");
}

}  // namespace detail

/// The state a preparation outcome announces: its operator divided by its
/// trace.
inline DensityOperator outcome_state(const DeviceOperatorSet& prep,
                                     const std::string& label,
                                     const Tolerances& tol = {}) {
  detail::require_role(prep, DeviceRole::Preparation, "outcome_state");
  const HermitianOperator& op = prep.op(label);
  const double tr = trace(op);
  if (tr <= tol.psd) throw ZeroTraceOperator(label);
  return DensityOperator::validate(
      HermitianOperator::validate(op.matrix() / tr, tol), label, tol);
}

/// The state assigned by someone who knows the device fired but not which
/// outcome: the operator sum divided by its trace.
inline DensityOperator mixture_state(const DeviceOperatorSet& prep,
                                     const Tolerances& tol = {}) {
  detail::require_role(prep, DeviceRole::Preparation, "mixture_state");
  const double tr = trace(prep.total());
  return DensityOperator::validate(
      HermitianOperator::validate(prep.total().matrix() / tr, tol), "mixture",
      tol);
}

/// Probability of each preparation outcome with no measurement information:
/// trace of each operator over the trace of the sum, in label order.
inline std::vector<double> a_priori_distribution(
    const DeviceOperatorSet& prep) {
  detail::require_role(prep, DeviceRole::Preparation,
                       "a_priori_distribution");
  const double tr = trace(prep.total());
  std::vector<double> p(prep.size());
  for (std::size_t i = 0; i < prep.size(); ++i)
    p[i] = std::max(0.0, trace(prep.op(i)) / tr);
  return p;
}

/// The state a measurement outcome implies backwards in time: its operator
/// divided by its trace.
inline DensityOperator retrodicted_state(const DeviceOperatorSet& meas,
                                         const std::string& label,
                                         const Tolerances& tol = {}) {
  detail::require_role(meas, DeviceRole::Measurement, "retrodicted_state");
  const HermitianOperator& op = meas.op(label);
  const double tr = trace(op);
  if (tr <= tol.psd) throw ZeroTraceOperator(label);
  return DensityOperator::validate(
      HermitianOperator::validate(op.matrix() / tr, tol), label, tol);
}

/// For an unbiased measurement device with sum gamma * identity, the
/// elements divided by gamma form a probability operator measure; throws
/// BiasedDevice otherwise.
inline Pom measurement_pom(const DeviceOperatorSet& meas,
                           const Tolerances& tol = {}) {
  detail::require_role(meas, DeviceRole::Measurement, "measurement_pom");
  const BiasReport report = classify_bias(meas, tol);
  if (!report.is_unbiased)
    throw BiasedDevice(
        "measurement device is biased (deviation from a multiple of the "
        "identity: " + detail::fmt_real(report.deviation) +
        "); its outcome operators do not form a probability operator "
        "measure");
  const double gamma = *report.gamma;
  std::vector<HermitianOperator> elements;
  elements.reserve(meas.size());
  for (std::size_t i = 0; i < meas.size(); ++i)
    elements.push_back(
        HermitianOperator::validate(meas.op(i).matrix() / gamma, tol));
  return Pom::validate(meas.labels(), std::move(elements), tol);
}

/// The mirror construction for an unbiased preparation device: elements that
/// weight retrodicted states into preparation probabilities.
inline Pom preparation_pom(const DeviceOperatorSet& prep,
                           const Tolerances& tol = {}) {
  detail::require_role(prep, DeviceRole::Preparation, "preparation_pom");
  const BiasReport report = classify_bias(prep, tol);
  if (!report.is_unbiased)
    throw BiasedDevice(
        "preparation device is biased (deviation from a multiple of the "
        "identity: " + detail::fmt_real(report.deviation) +
        "); retrodiction does not reduce to a probability operator measure");
  const double gamma = *report.gamma;
  std::vector<HermitianOperator> elements;
  elements.reserve(prep.size());
  for (std::size_t i = 0; i < prep.size(); ++i)
    elements.push_back(
        HermitianOperator::validate(prep.op(i).matrix() / gamma, tol));
  return Pom::validate(prep.labels(), std::move(elements), tol);
}

}  // namespace retrodict
