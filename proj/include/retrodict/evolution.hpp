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

#include <string>
#include <utility>
#include <vector>

#include "retrodict/device_model.hpp"
#include "retrodict/operator_core.hpp"
#include "retrodict/probability_engine.hpp"

namespace retrodict {

/// The forward and backward retrodiction paths must agree to this accuracy.
inline constexpr double kEvolutionAgreementTolerance = 1e-10;

/// Unitary evolution between the preparation time and the measurement time.
class EvolutionContext {
 public:
  EvolutionContext(UnitaryMap u, double t_prepare, double t_measure)
      : u_(std::move(u)), t_prepare_(t_prepare), t_measure_(t_measure) {
    if (!(t_prepare <= t_measure))
      throw ValidationError("preparation time " + detail::fmt_real(t_prepare) +
                            " is after measurement time " +
                            detail::fmt_real(t_measure));
  }

  const UnitaryMap& u() const noexcept { return u_; }
  double t_prepare() const noexcept { return t_prepare_; }
  double t_measure() const noexcept { return t_measure_; }

 private:
  UnitaryMap u_;
  double t_prepare_;
  double t_measure_;
};

/// Carries every preparation operator forward to the measurement time:
/// each operator becomes U Lambda U^dagger.
inline DeviceOperatorSet evolve_preparation(const EvolutionContext& ctx,
                                            const DeviceOperatorSet& prep,
                                            const Tolerances& tol = {}) {
  detail::require_role(prep, DeviceRole::Preparation, "evolve_preparation");
  std::vector<LabeledMatrix> members;
  members.reserve(prep.size());
  for (std::size_t i = 0; i < prep.size(); ++i)
    members.push_back({prep.labels()[i],
                       conjugate_by(ctx.u(), prep.op(i), tol).matrix()});
  return DeviceOperatorSet::build(DeviceRole::Preparation, members, tol);
}

/// Expresses a probability operator measure in the frame of the preparation
/// time: each element becomes U^dagger Pi U.
inline Pom evolve_pom_backward(const EvolutionContext& ctx, const Pom& pom,
                               const Tolerances& tol = {}) {
  const UnitaryMap udag = ctx.u().adjoint(tol);
  std::vector<HermitianOperator> elements;
  elements.reserve(pom.size());
  for (std::size_t k = 0; k < pom.size(); ++k)
    elements.push_back(conjugate_by(udag, pom.element(k), tol));
  return Pom::validate(pom.labels(), std::move(elements), tol);
}

namespace detail {

/// Retrodictive conditionals where the comparison of preparation operators
/// with retrodicted states happens at time `carry_to_measurement ? t_measure
/// : t_prepare`. Rows condition on measurement labels; a row is undefined
/// when its outcome operator has zero trace or is orthogonal to the evolved
/// preparation sum.
inline ConditionalTable retrodict_at(const DeviceOperatorSet& prep,
                                     const DeviceOperatorSet& meas,
                                     const EvolutionContext& ctx,
                                     bool carry_to_measurement,
                                     const Tolerances& tol) {
  require_role(prep, DeviceRole::Preparation, "retrodiction");
  require_role(meas, DeviceRole::Measurement, "retrodiction");
  if (prep.dim() != meas.dim() || prep.dim() != ctx.u().dim())
    throw DimensionMismatch(
        "devices and evolution map must share one dimension, got " +
        std::to_string(prep.dim()) + ", " + std::to_string(meas.dim()) +
        ", " + std::to_string(ctx.u().dim()));

  ConditionalTable t;
  t.given = GivenAxis::Measurement;
  t.given_labels = meas.labels();
  t.outcome_labels = prep.labels();
  t.rows.resize(meas.size());

  // Preparation operators expressed at the comparison time.
  std::vector<HermitianOperator> lam;
  lam.reserve(prep.size());
  HermitianOperator lam_total = prep.total();
  if (carry_to_measurement) {
    for (std::size_t i = 0; i < prep.size(); ++i)
      lam.push_back(conjugate_by(ctx.u(), prep.op(i), tol));
    lam_total = conjugate_by(ctx.u(), prep.total(), tol);
  } else {
    for (std::size_t i = 0; i < prep.size(); ++i) lam.push_back(prep.op(i));
  }
  const UnitaryMap udag = ctx.u().adjoint(tol);

  const double slack = tol.denominator * std::max(1.0, trace(lam_total));
  for (std::size_t j = 0; j < meas.size(); ++j) {
    const double tr_meas = trace(meas.op(j));
    if (tr_meas <= tol.psd) continue;  // no retrodicted state to condition on
    // Retrodicted state at the comparison time.
    HermitianOperator rho = HermitianOperator::validate(
        meas.op(j).matrix() / tr_meas, tol);
    if (!carry_to_measurement) rho = conjugate_by(udag, rho, tol);

    const double den = clamp_nonnegative(trace_pair(lam_total, rho, tol),
                                         slack, "retrodiction normalizer");
    if (den <= slack) continue;
    Eigen::VectorXd row(static_cast<Eigen::Index>(prep.size()));
    for (std::size_t i = 0; i < prep.size(); ++i)
      row(static_cast<Eigen::Index>(i)) =
          clamp_nonnegative(trace_pair(lam[i], rho, tol), slack,
                            "retrodiction entry") /
          den;
    t.rows[j] = std::move(row);
  }
  return t;
}

}  // namespace detail

/// Retrodiction with the preparation operators carried forward to the
/// measurement time.
inline ConditionalTable retrodict_forward(const EvolutionContext& ctx,
                                          const DeviceOperatorSet& prep,
                                          const DeviceOperatorSet& meas,
                                          const Tolerances& tol = {}) {
  return detail::retrodict_at(prep, meas, ctx, true, tol);
}

/// Retrodiction with the retrodicted states carried backward to the
/// preparation time. Agrees with retrodict_forward because the two frames
/// differ only by where the unitary is applied inside the same traces.
inline ConditionalTable retrodict_backward(const EvolutionContext& ctx,
                                           const DeviceOperatorSet& prep,
                                           const DeviceOperatorSet& meas,
                                           const Tolerances& tol = {}) {
  return detail::retrodict_at(prep, meas, ctx, false, tol);
}

/// Largest entry-wise disagreement between two conditional tables with the
/// same shape and the same set of defined rows; throws CrossCheckFailure
/// when the defined sets differ.
inline double table_deviation(const ConditionalTable& a,
                              const ConditionalTable& b) {
  if (a.given_labels != b.given_labels ||
      a.outcome_labels != b.outcome_labels)
    throw CrossCheckFailure("conditional tables have different labels");
  double dev = 0.0;
  for (std::size_t r = 0; r < a.rows.size(); ++r) {
    if (a.rows[r].has_value() != b.rows[r].has_value())
      throw CrossCheckFailure("conditional tables disagree on whether row \"" +
                              a.given_labels[r] + "\" is defined");
    if (!a.rows[r].has_value()) continue;
    dev = std::max(dev, (*a.rows[r] - *b.rows[r]).cwiseAbs().maxCoeff());
  }
  return dev;
}

}  // namespace retrodict
