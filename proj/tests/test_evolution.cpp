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

#include "retrodict/evolution.hpp"
#include "test_helpers.hpp"

using namespace retrodict;

TEST_CASE("evolution context sanity", "[evolution]") {
  const auto u = UnitaryMap::validate(rdtest::hadamard());
  CHECK_NOTHROW(EvolutionContext(u, 0.0, 1.0));
  CHECK_NOTHROW(EvolutionContext(u, 2.0, 2.0));
  CHECK_THROWS_AS(EvolutionContext(u, 1.0, 0.0), ValidationError);
}

TEST_CASE("carrying a preparation device forward", "[evolution]") {
  const auto ctx =
      EvolutionContext(UnitaryMap::validate(rdtest::hadamard()), 0.0, 1.0);
  const auto prep = rdtest::example_preparation_d2();
  const auto evolved = evolve_preparation(ctx, prep);
  CHECK(evolved.labels() == prep.labels());
  CHECK((evolved.op("1").matrix() - 0.6 * rdtest::plus_proj())
            .cwiseAbs()
            .maxCoeff() < 1e-15);
  CHECK((evolved.op("2").matrix() - 0.4 * rdtest::minus_proj())
            .cwiseAbs()
            .maxCoeff() < 1e-15);
  CHECK(trace(evolved.total()) ==
        Catch::Approx(trace(prep.total())).margin(1e-12));
}

TEST_CASE("a rotated source becomes distinguishable at the output ports",
          "[evolution]") {
  const auto ctx =
      EvolutionContext(UnitaryMap::validate(rdtest::hadamard()), 0.0, 1.0);
  const auto prep = rdtest::example_preparation_d2();
  const auto meas = rdtest::example_measurement_d2();

  const auto fwd = retrodict_forward(ctx, prep, meas);
  const auto bwd = retrodict_backward(ctx, prep, meas);

  REQUIRE(fwd.rows.size() == 2);
  REQUIRE(fwd.defined(0));
  REQUIRE(fwd.defined(1));
  // The rotation maps each input onto exactly one port, so observing a port
  // identifies the input with certainty.
  CHECK((*fwd.rows[0])(0) == Catch::Approx(1.0).margin(1e-12));
  CHECK((*fwd.rows[0])(1) == Catch::Approx(0.0).margin(1e-12));
  CHECK((*fwd.rows[1])(0) == Catch::Approx(0.0).margin(1e-12));
  CHECK((*fwd.rows[1])(1) == Catch::Approx(1.0).margin(1e-12));

  CHECK(table_deviation(fwd, bwd) <= kEvolutionAgreementTolerance);
}

TEST_CASE("trivial evolution reproduces the static conditionals",
          "[evolution]") {
  const auto prep = rdtest::example_preparation_d2();
  const auto meas = rdtest::example_measurement_d2();
  const auto ctx = EvolutionContext(
      UnitaryMap::validate(Matrix::Identity(2, 2)), 0.0, 1.0);
  const auto fwd = retrodict_forward(ctx, prep, meas);
  const auto statics = retrodictive(joint(prep, meas));
  CHECK(table_deviation(fwd, statics) < 1e-12);
}

TEST_CASE("the comparison time is arbitrary", "[evolution]") {
  SplitMix64 rng(808);
  for (int k = 0; k < 50; ++k) {
    const int d = 2 + static_cast<int>(rng.next_u64() % 4);
    const auto prep = rdtest::random_preparation(d, 2 + k % 4, rng.next_u64());
    const auto meas = rdtest::random_measurement(d, 2 + k % 3, rng.next_u64());
    const auto ctx =
        EvolutionContext(random_unitary(d, rng.next_u64()), 0.0, 1.0);
    const auto fwd = retrodict_forward(ctx, prep, meas);
    const auto bwd = retrodict_backward(ctx, prep, meas);
    CHECK(table_deviation(fwd, bwd) <= kEvolutionAgreementTolerance);
    for (const auto& row : fwd.rows) {
      if (!row.has_value()) continue;
      CHECK(row->sum() == Catch::Approx(1.0).margin(1e-10));
      CHECK(row->minCoeff() >= 0.0);
    }
  }
}

TEST_CASE("zero-trace outcomes stay undefined through evolution",
          "[evolution]") {
  const auto prep = rdtest::example_preparation_d2();
  const auto meas = DeviceOperatorSet::build(
      DeviceRole::Measurement,
      {{"live", rdtest::plus_proj()}, {"dead", Matrix::Zero(2, 2)}});
  const auto ctx =
      EvolutionContext(UnitaryMap::validate(rdtest::hadamard()), 0.0, 1.0);
  const auto fwd = retrodict_forward(ctx, prep, meas);
  const auto bwd = retrodict_backward(ctx, prep, meas);
  CHECK(fwd.defined(0));
  CHECK_FALSE(fwd.defined(1));
  CHECK(fwd.undefined_labels() == std::vector<std::string>{"dead"});
  CHECK(table_deviation(fwd, bwd) <= kEvolutionAgreementTolerance);
}

TEST_CASE("dimension mismatches are rejected", "[evolution]") {
  const auto prep = rdtest::example_preparation_d2();
  const auto meas = rdtest::example_measurement_d2();
  const auto ctx3 = EvolutionContext(random_unitary(3, 5), 0.0, 1.0);
  CHECK_THROWS_AS(retrodict_forward(ctx3, prep, meas), DimensionMismatch);
}

TEST_CASE("a measure expressed in the earlier frame predicts identically",
          "[evolution]") {
  SplitMix64 rng(909);
  for (int k = 0; k < 15; ++k) {
    const int d = 2 + static_cast<int>(rng.next_u64() % 3);
    const auto meas =
        rdtest::random_unbiased_measurement(d, d + 1, 0.9, rng.next_u64());
    const auto pom = measurement_pom(meas);
    const auto ctx =
        EvolutionContext(random_unitary(d, rng.next_u64()), 0.0, 1.0);
    const auto back = evolve_pom_backward(ctx, pom);

    const auto rho0 = DensityOperator::validate(random_psd(d, rng.next_u64()));
    const auto rho1 = DensityOperator::validate(
        conjugate_by(ctx.u(), rho0.op()), "evolved");
    for (const std::string& label : pom.labels())
      CHECK(detection_probability(rho0, back, label) ==
            Catch::Approx(detection_probability(rho1, pom, label))
                .margin(1e-10));
  }
}

TEST_CASE("table comparison refuses apples and oranges", "[evolution]") {
  ConditionalTable a, b;
  a.given = b.given = GivenAxis::Measurement;
  a.given_labels = {"x"};
  b.given_labels = {"y"};
  a.outcome_labels = b.outcome_labels = {"1"};
  a.rows.resize(1);
  b.rows.resize(1);
  CHECK_THROWS_AS(table_deviation(a, b), CrossCheckFailure);
  b.given_labels = {"x"};
  a.rows[0] = Eigen::VectorXd::Ones(1);
  CHECK_THROWS_AS(table_deviation(a, b), CrossCheckFailure);
  b.rows[0] = Eigen::VectorXd::Ones(1);
  CHECK(table_deviation(a, b) == 0.0);
}
