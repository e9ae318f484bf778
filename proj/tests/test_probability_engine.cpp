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

#include <catch_amalgamated.hpp>

#include "retrodict/probability_engine.hpp"
#include "test_helpers.hpp"

using namespace retrodict;

TEST_CASE("joint distribution of the running two-level pair",
          "[probability-engine]") {
  const auto prep = rdtest::example_preparation_d2();
  const auto meas = rdtest::example_measurement_d2();
  const auto jd = joint(prep, meas);

  CHECK(jd.denominator == Catch::Approx(1.0).margin(1e-14));
  REQUIRE(jd.p.rows() == 2);
  REQUIRE(jd.p.cols() == 2);
  CHECK(jd.p(0, 0) == Catch::Approx(0.3).margin(1e-14));
  CHECK(jd.p(0, 1) == Catch::Approx(0.3).margin(1e-14));
  CHECK(jd.p(1, 0) == Catch::Approx(0.2).margin(1e-14));
  CHECK(jd.p(1, 1) == Catch::Approx(0.2).margin(1e-14));
  CHECK(jd.p.sum() == Catch::Approx(1.0).margin(1e-14));

  const auto mp = marginal_preparation(jd);
  CHECK(mp[0] == Catch::Approx(0.6).margin(1e-14));
  CHECK(mp[1] == Catch::Approx(0.4).margin(1e-14));
  const auto mm = marginal_measurement(jd);
  CHECK(mm[0] == Catch::Approx(0.5).margin(1e-14));
  CHECK(mm[1] == Catch::Approx(0.5).margin(1e-14));
}

TEST_CASE("conditional tables of the running pair", "[probability-engine]") {
  const auto jd =
      joint(rdtest::example_preparation_d2(), rdtest::example_measurement_d2());
  SECTION("prediction is flat: each input hits both interference ports") {
    const auto pred = predictive(jd);
    REQUIRE(pred.rows.size() == 2);
    for (std::size_t i = 0; i < 2; ++i) {
      REQUIRE(pred.defined(i));
      CHECK((*pred.rows[i])(0) == Catch::Approx(0.5).margin(1e-14));
      CHECK((*pred.rows[i])(1) == Catch::Approx(0.5).margin(1e-14));
    }
    CHECK(pred.undefined_labels().empty());
  }
  SECTION("retrodiction recovers the lopsided source weights") {
    const auto retr = retrodictive(jd);
    REQUIRE(retr.rows.size() == 2);
    for (std::size_t j = 0; j < 2; ++j) {
      REQUIRE(retr.defined(j));
      CHECK((*retr.rows[j])(0) == Catch::Approx(0.6).margin(1e-14));
      CHECK((*retr.rows[j])(1) == Catch::Approx(0.4).margin(1e-14));
    }
  }
  SECTION("both factorizations rebuild the joint distribution") {
    const auto pred = predictive(jd);
    const auto retr = retrodictive(jd);
    CHECK(bayes_deviation(jd, pred, retr) <= kBayesTolerance);
    CHECK(row_sum_deviation(pred) <= kBayesTolerance);
    CHECK(row_sum_deviation(retr) <= kBayesTolerance);
  }
}

TEST_CASE("zero-probability conditioning events give undefined rows",
          "[probability-engine]") {
  const auto prep = DeviceOperatorSet::build(
      DeviceRole::Preparation,
      {{"a", rdtest::ket0_proj()}, {"b", Matrix::Zero(2, 2)}});
  const auto meas = rdtest::example_measurement_d2();
  const auto jd = joint(prep, meas);
  const auto pred = predictive(jd);
  REQUIRE(pred.rows.size() == 2);
  CHECK(pred.defined(0));
  CHECK_FALSE(pred.defined(1));
  CHECK(pred.undefined_labels() == std::vector<std::string>{"b"});
  // The retrodictive direction is untroubled: both ports still fire.
  const auto retr = retrodictive(jd);
  CHECK(retr.defined(0));
  CHECK(retr.defined(1));
  // Undefined rows are skipped, not counted, by the consistency checks.
  CHECK(bayes_deviation(jd, pred, retr) <= kBayesTolerance);
}

TEST_CASE("orthogonal device pairs cannot produce outcomes",
          "[probability-engine]") {
  const auto prep = DeviceOperatorSet::build(DeviceRole::Preparation,
                                             {{"a", rdtest::ket0_proj()}});
  const auto meas = DeviceOperatorSet::build(DeviceRole::Measurement,
                                             {{"b", rdtest::ket1_proj()}});
  CHECK_THROWS_AS(joint(prep, meas), DegeneratePair);
}

TEST_CASE("joint rejects mismatched inputs", "[probability-engine]") {
  const auto prep = rdtest::example_preparation_d2();
  const auto meas = rdtest::example_measurement_d2();
  CHECK_THROWS_AS(joint(meas, meas), WrongRole);
  CHECK_THROWS_AS(joint(prep, prep), WrongRole);
  const auto prep3 = DeviceOperatorSet::build(
      DeviceRole::Preparation, {{"a", Matrix::Identity(3, 3)}});
  CHECK_THROWS_AS(joint(prep3, meas), DimensionMismatch);
}

TEST_CASE("device normalization is a gauge freedom", "[probability-engine]") {
  SplitMix64 rng(2026);
  for (int k = 0; k < 20; ++k) {
    const auto prep = rdtest::random_preparation(3, 3, rng.next_u64());
    const auto meas = rdtest::random_measurement(3, 4, rng.next_u64());
    const auto base = joint(prep, meas);

    const double cp = std::pow(10.0, 6.0 * rng.next_double() - 3.0);
    const double cm = std::pow(10.0, 6.0 * rng.next_double() - 3.0);
    std::vector<LabeledMatrix> pm, mm;
    for (std::size_t i = 0; i < prep.size(); ++i)
      pm.push_back({prep.labels()[i], cp * prep.op(i).matrix()});
    for (std::size_t j = 0; j < meas.size(); ++j)
      mm.push_back({meas.labels()[j], cm * meas.op(j).matrix()});
    const auto scaled =
        joint(DeviceOperatorSet::build(DeviceRole::Preparation, pm),
              DeviceOperatorSet::build(DeviceRole::Measurement, mm));

    CHECK((scaled.p - base.p).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("swapping the device roles transposes the joint table exactly",
          "[probability-engine]") {
  SplitMix64 rng(404);
  for (int k = 0; k < 20; ++k) {
    // Keep every operator sum below eigenvalue one so that measurement
    // admission never rescales: the comparison below is then bitwise.
    std::vector<LabeledMatrix> a, b;
    const int na = 2 + static_cast<int>(rng.next_u64() % 3);
    const int nb = 2 + static_cast<int>(rng.next_u64() % 3);
    for (int i = 0; i < na; ++i)
      a.push_back({"a" + std::to_string(i),
                   0.2 * rng.next_double() *
                       random_psd(3, rng.next_u64()).matrix()});
    for (int j = 0; j < nb; ++j)
      b.push_back({"b" + std::to_string(j),
                   0.2 * rng.next_double() *
                       random_psd(3, rng.next_u64()).matrix()});

    const auto forward =
        joint(DeviceOperatorSet::build(DeviceRole::Preparation, a),
              DeviceOperatorSet::build(DeviceRole::Measurement, b));
    const auto swapped =
        joint(DeviceOperatorSet::build(DeviceRole::Preparation, b),
              DeviceOperatorSet::build(DeviceRole::Measurement, a));
    REQUIRE(forward.p.rows() == swapped.p.cols());
    REQUIRE(forward.p.cols() == swapped.p.rows());
    for (Eigen::Index i = 0; i < forward.p.rows(); ++i)
      for (Eigen::Index j = 0; j < forward.p.cols(); ++j)
        CHECK(forward.p(i, j) == swapped.p(j, i));
  }
}

TEST_CASE("Bayes symmetry holds for random device pairs",
          "[probability-engine]") {
  SplitMix64 rng(515);
  for (int k = 0; k < 50; ++k) {
    const int d = 2 + static_cast<int>(rng.next_u64() % 4);
    const auto prep = rdtest::random_preparation(d, 2 + k % 4, rng.next_u64());
    const auto meas = rdtest::random_measurement(d, 2 + k % 3, rng.next_u64());
    const auto jd = joint(prep, meas);
    const auto pred = predictive(jd);
    const auto retr = retrodictive(jd);
    CHECK(bayes_deviation(jd, pred, retr) <= kBayesTolerance);
    CHECK(row_sum_deviation(pred) <= kBayesTolerance);
    CHECK(row_sum_deviation(retr) <= kBayesTolerance);
  }
}

TEST_CASE("unbiased measurements reduce prediction to the standard rule",
          "[probability-engine]") {
  SplitMix64 rng(616);
  for (int k = 0; k < 15; ++k) {
    const int d = 2 + static_cast<int>(rng.next_u64() % 3);
    const auto prep = rdtest::random_preparation(d, 3, rng.next_u64());
    const auto meas =
        rdtest::random_unbiased_measurement(d, d + 1, 0.7, rng.next_u64());
    const auto pom = measurement_pom(meas);
    const auto jd = joint(prep, meas);
    const auto pred = predictive(jd);
    for (std::size_t i = 0; i < prep.size(); ++i) {
      if (!pred.defined(i)) continue;
      const auto rho = outcome_state(prep, prep.labels()[i]);
      for (std::size_t j = 0; j < meas.size(); ++j) {
        const double born =
            detection_probability(rho, pom, meas.labels()[j]);
        CHECK((*pred.rows[i])(static_cast<Eigen::Index>(j)) ==
              Catch::Approx(born).margin(1e-10));
      }
    }
  }
}

TEST_CASE("unbiased preparations reduce retrodiction to the mirror rule",
          "[probability-engine]") {
  SplitMix64 rng(717);
  for (int k = 0; k < 15; ++k) {
    const int d = 2 + static_cast<int>(rng.next_u64() % 3);
    const auto prep =
        rdtest::random_unbiased_preparation(d, d + 1, 0.5, rng.next_u64());
    const auto meas = rdtest::random_measurement(d, 3, rng.next_u64());
    const auto pom = preparation_pom(prep);
    const auto jd = joint(prep, meas);
    const auto retr = retrodictive(jd);
    for (std::size_t j = 0; j < meas.size(); ++j) {
      if (!retr.defined(j)) continue;
      const auto rho = retrodicted_state(meas, meas.labels()[j]);
      for (std::size_t i = 0; i < prep.size(); ++i) {
        const double mirror =
            preparation_probability(pom, rho, prep.labels()[i]);
        CHECK((*retr.rows[j])(static_cast<Eigen::Index>(i)) ==
              Catch::Approx(mirror).margin(1e-10));
      }
    }
  }
}

TEST_CASE("pointwise probability rules stay inside the unit interval",
          "[probability-engine]") {
  const auto pom = measurement_pom(rdtest::example_measurement_d2());
  const auto plus = DensityOperator::validate(
      HermitianOperator::validate(rdtest::plus_proj()));
  CHECK(detection_probability(plus, pom, "plus") ==
        Catch::Approx(1.0).margin(1e-14));
  CHECK(detection_probability(plus, pom, "minus") ==
        Catch::Approx(0.0).margin(1e-14));
  CHECK_THROWS_AS(detection_probability(plus, pom, "nope"), UnknownLabel);
  const auto plus3 = DensityOperator::validate(
      HermitianOperator::validate(Matrix::Identity(3, 3) / 3.0));
  CHECK_THROWS_AS(detection_probability(plus3, pom, "plus"),
                  DimensionMismatch);
}

TEST_CASE("negative rounding residue is forgiven, corruption is not",
          "[probability-engine]") {
  CHECK(detail::clamp_nonnegative(-1e-15, 1e-12, "test") == 0.0);
  CHECK(detail::clamp_nonnegative(0.25, 1e-12, "test") == 0.25);
  CHECK_THROWS_AS(detail::clamp_nonnegative(-1e-3, 1e-12, "test"),
                  InternalNumericalError);
}
