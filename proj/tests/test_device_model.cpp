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

#include "retrodict/device_model.hpp"
#include "test_helpers.hpp"

using namespace retrodict;

TEST_CASE("device admission", "[device-model]") {
  SECTION("a well-formed preparation device is accepted verbatim") {
    const auto prep = rdtest::example_preparation_d2();
    CHECK(prep.role() == DeviceRole::Preparation);
    CHECK(prep.dim() == 2);
    CHECK(prep.size() == 2);
    CHECK(prep.labels() == std::vector<std::string>{"1", "2"});
    CHECK(prep.admission_scale() == 1.0);
    CHECK(trace(prep.total()) == Catch::Approx(1.0).margin(1e-15));
    CHECK(prep.index_of("2") == 1);
    CHECK_THROWS_AS(prep.op("nope"), UnknownLabel);
  }
  SECTION("an empty member list is rejected") {
    CHECK_THROWS_AS(
        DeviceOperatorSet::build(DeviceRole::Preparation, {}),
        EmptyDevice);
  }
  SECTION("duplicate labels are rejected") {
    CHECK_THROWS_AS(
        DeviceOperatorSet::build(
            DeviceRole::Measurement,
            {{"a", rdtest::plus_proj()}, {"a", rdtest::minus_proj()}}),
        DuplicateLabel);
  }
  SECTION("the reserved no-click label is rejected for either role") {
    CHECK_THROWS_AS(
        DeviceOperatorSet::build(DeviceRole::Measurement,
                                 {{"0", rdtest::plus_proj()}}),
        ReservedLabel);
    CHECK_THROWS_AS(
        DeviceOperatorSet::build(DeviceRole::Preparation,
                                 {{"0", rdtest::ket0_proj()}}),
        ReservedLabel);
  }
  SECTION("negative operators are rejected with the offending label") {
    Matrix neg = Matrix::Identity(2, 2);
    neg(1, 1) = -0.5;
    try {
      DeviceOperatorSet::build(DeviceRole::Preparation,
                               {{"good", rdtest::ket0_proj()}, {"bad", neg}});
      FAIL("expected NotPsd");
    } catch (const NotPsd& e) {
      CHECK(e.min_eigenvalue() == Catch::Approx(-0.5).margin(1e-12));
      CHECK(std::string(e.what()).find("bad") != std::string::npos);
    }
  }
  SECTION("mixed dimensions are rejected") {
    CHECK_THROWS_AS(
        DeviceOperatorSet::build(
            DeviceRole::Preparation,
            {{"a", rdtest::ket0_proj()}, {"b", Matrix::Identity(3, 3)}}),
        DimensionMismatch);
  }
  SECTION("an all-zero device is rejected") {
    CHECK_THROWS_AS(
        DeviceOperatorSet::build(DeviceRole::Preparation,
                                 {{"a", Matrix::Zero(2, 2)}}),
        ZeroTotal);
  }
}

TEST_CASE("measurement devices are rescaled when their sum exceeds one",
          "[device-model]") {
  const auto meas = DeviceOperatorSet::build(
      DeviceRole::Measurement,
      {{"plus", 4.0 * rdtest::plus_proj()}, {"minus", 4.0 * rdtest::minus_proj()}});
  CHECK(meas.admission_scale() == Catch::Approx(0.25).margin(1e-12));
  CHECK((meas.total().matrix() - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff()
        < 1e-12);
  // Rescaling is idempotent: an already-admissible device is untouched.
  const auto ok = rdtest::example_measurement_d2();
  CHECK(ok.admission_scale() == 1.0);
  // Preparation devices are never rescaled.
  const auto prep = DeviceOperatorSet::build(
      DeviceRole::Preparation, {{"a", 4.0 * rdtest::ket0_proj()}});
  CHECK(prep.admission_scale() == 1.0);
  CHECK(trace(prep.total()) == Catch::Approx(4.0).margin(1e-12));
}

TEST_CASE("bias classification", "[device-model]") {
  SECTION("the unequal-weight preparation pair is biased") {
    const auto report = classify_bias(rdtest::example_preparation_d2());
    CHECK_FALSE(report.is_unbiased);
    CHECK_FALSE(report.gamma.has_value());
    CHECK(report.deviation == Catch::Approx(0.1).margin(1e-12));
  }
  SECTION("the two-projector interference measurement is unbiased") {
    const auto report = classify_bias(rdtest::example_measurement_d2());
    CHECK(report.is_unbiased);
    REQUIRE(report.gamma.has_value());
    CHECK(*report.gamma == Catch::Approx(1.0).margin(1e-12));
    CHECK(report.deviation < 1e-12);
  }
  SECTION("equal-weight spin projectors give gamma one half") {
    const auto prep = DeviceOperatorSet::build(
        DeviceRole::Preparation,
        {{"up", 0.5 * rdtest::ket0_proj()}, {"down", 0.5 * rdtest::ket1_proj()}});
    const auto report = classify_bias(prep);
    CHECK(report.is_unbiased);
    REQUIRE(report.gamma.has_value());
    CHECK(*report.gamma == Catch::Approx(0.5).margin(1e-12));
  }
  SECTION("random unbiased constructions classify as unbiased") {
    SplitMix64 rng(31);
    for (int k = 0; k < 20; ++k) {
      const auto meas = rdtest::random_unbiased_measurement(
          3, 4, 0.8, rng.next_u64());
      const auto report = classify_bias(meas);
      CHECK(report.is_unbiased);
      REQUIRE(report.gamma.has_value());
      CHECK(*report.gamma == Catch::Approx(0.8).margin(1e-9));
    }
  }
}

TEST_CASE("states announced by device outcomes", "[device-model]") {
  const auto prep = rdtest::example_preparation_d2();
  SECTION("outcome states are unit-trace rescalings") {
    const auto rho1 = outcome_state(prep, "1");
    CHECK((rho1.matrix() - rdtest::ket0_proj()).cwiseAbs().maxCoeff() < 1e-12);
    const auto rho2 = outcome_state(prep, "2");
    CHECK((rho2.matrix() - rdtest::ket1_proj()).cwiseAbs().maxCoeff() < 1e-12);
  }
  SECTION("the mixture state averages with a priori weights") {
    const auto rho = mixture_state(prep);
    Matrix expect(2, 2);
    expect << 0.6, 0.0, 0.0, 0.4;
    CHECK((rho.matrix() - expect).cwiseAbs().maxCoeff() < 1e-12);
  }
  SECTION("a priori outcome probabilities follow the traces") {
    const auto p = a_priori_distribution(prep);
    REQUIRE(p.size() == 2);
    CHECK(p[0] == Catch::Approx(0.6).margin(1e-12));
    CHECK(p[1] == Catch::Approx(0.4).margin(1e-12));
  }
  SECTION("retrodicted states come from measurement operators") {
    const auto meas = rdtest::example_measurement_d2();
    const auto rho = retrodicted_state(meas, "plus");
    CHECK((rho.matrix() - rdtest::plus_proj()).cwiseAbs().maxCoeff() < 1e-12);
  }
  SECTION("role mixups are caught") {
    const auto meas = rdtest::example_measurement_d2();
    CHECK_THROWS_AS(outcome_state(meas, "plus"), WrongRole);
    CHECK_THROWS_AS(mixture_state(meas), WrongRole);
    CHECK_THROWS_AS(a_priori_distribution(meas), WrongRole);
    CHECK_THROWS_AS(retrodicted_state(prep, "1"), WrongRole);
    CHECK_THROWS_AS(measurement_pom(prep), WrongRole);
    CHECK_THROWS_AS(preparation_pom(meas), WrongRole);
  }
  SECTION("zero-trace outcomes cannot announce a state") {
    const auto padded = DeviceOperatorSet::build(
        DeviceRole::Preparation,
        {{"a", rdtest::ket0_proj()}, {"b", Matrix::Zero(2, 2)}});
    CHECK_THROWS_AS(outcome_state(padded, "b"), ZeroTraceOperator);
  }
}

TEST_CASE("unbiased devices reduce to probability operator measures",
          "[device-model]") {
  SECTION("the interference measurement divides into projectors") {
    const auto pom = measurement_pom(rdtest::example_measurement_d2());
    CHECK(pom.size() == 2);
    CHECK((pom.element("plus").matrix() - rdtest::plus_proj())
              .cwiseAbs()
              .maxCoeff() < 1e-12);
    Matrix sum = pom.element(0).matrix() + pom.element(1).matrix();
    CHECK((sum - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);
  }
  SECTION("biased devices are refused") {
    const auto meas = DeviceOperatorSet::build(
        DeviceRole::Measurement,
        {{"a", 0.75 * rdtest::ket0_proj()}, {"b", 0.25 * rdtest::ket1_proj()}});
    CHECK_THROWS_AS(measurement_pom(meas), BiasedDevice);
    CHECK_THROWS_AS(preparation_pom(rdtest::example_preparation_d2()),
                    BiasedDevice);
  }
  SECTION("unbiased preparation devices divide out their gamma") {
    const auto prep = DeviceOperatorSet::build(
        DeviceRole::Preparation,
        {{"up", 0.5 * rdtest::ket0_proj()}, {"down", 0.5 * rdtest::ket1_proj()}});
    const auto pom = preparation_pom(prep);
    CHECK((pom.element("up").matrix() - rdtest::ket0_proj())
              .cwiseAbs()
              .maxCoeff() < 1e-12);
  }
  SECTION("random unbiased measurements divide into valid measures") {
    SplitMix64 rng(77);
    for (int k = 0; k < 10; ++k) {
      const auto meas =
          rdtest::random_unbiased_measurement(4, 5, 0.6, rng.next_u64());
      const auto pom = measurement_pom(meas);
      Matrix sum = Matrix::Zero(4, 4);
      for (std::size_t i = 0; i < pom.size(); ++i)
        sum += pom.element(i).matrix();
      CHECK((sum - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-9);
    }
  }
}

TEST_CASE("density operator validation", "[device-model]") {
  CHECK_THROWS_AS(
      DensityOperator::validate(
          HermitianOperator::validate(0.5 * rdtest::ket0_proj())),
      ValidationError);
  Matrix neg = Matrix::Identity(2, 2);
  neg(1, 1) = -1.0;
  neg(0, 0) = 2.0;
  CHECK_THROWS_AS(
      DensityOperator::validate(HermitianOperator::validate(neg)), NotPsd);
  const auto ok =
      DensityOperator::validate(HermitianOperator::validate(rdtest::plus_proj()));
  CHECK(ok.dim() == 2);
}

TEST_CASE("probability operator measure validation", "[device-model]") {
  const auto p = HermitianOperator::validate(rdtest::plus_proj());
  const auto m = HermitianOperator::validate(rdtest::minus_proj());
  CHECK_NOTHROW(Pom::validate({"p", "m"}, {p, m}));
  // Elements must sum to the identity.
  CHECK_THROWS_AS(Pom::validate({"p"}, {p}), ValidationError);
  // Labels must be unique and match the element count.
  CHECK_THROWS_AS(Pom::validate({"p", "p"}, {p, m}), DuplicateLabel);
  CHECK_THROWS_AS(Pom::validate({"p"}, {p, m}), ValidationError);
  CHECK_THROWS_AS(Pom::validate({}, {}), EmptyDevice);
}
