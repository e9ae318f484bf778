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
#include <cstdint>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "retrodict/device_model.hpp"
#include "retrodict/probability_engine.hpp"
#include "retrodict/scenarios.hpp"

namespace retrodict {

struct RngSeed {
  std::uint64_t value = 0;
};

/// One simulated trial: which preparation outcome occurred and which
/// measurement outcome was observed (the reserved null label when the
/// measurement did not fire).
struct EventRecord {
  std::int64_t trial = 0;
  std::string prepared;
  std::string outcome;
};

struct ExperimentLog {
  RngSeed seed;
  std::int64_t n_trials = 0;
  std::vector<EventRecord> records;
  /// Trials whose outcome was the null label.
  std::int64_t n_discarded = 0;
};

namespace detail {

/// Cumulative sums in extended precision, so the sampling boundaries do not
/// depend on how the probabilities were grouped.
inline std::vector<long double> cumulative(const std::vector<double>& p) {
  std::vector<long double> cum(p.size());
  long double run = 0.0L;
  for (std::size_t i = 0; i < p.size(); ++i) {
    run += static_cast<long double>(p[i]);
    cum[i] = run;
  }
  return cum;
}

/// Index of the interval containing u. Ties at a boundary resolve to the
/// lower index; zero-width intervals (zero-probability labels) are never
/// selected.
inline std::size_t sample_index(const std::vector<long double>& cum,
                                double u) {
  const long double target = static_cast<long double>(u);
  std::size_t last_positive = cum.size() - 1;
  for (std::size_t i = 0; i < cum.size(); ++i) {
    const long double lo = i == 0 ? 0.0L : cum[i - 1];
    if (cum[i] <= lo) continue;  // zero-width interval
    last_positive = i;
    if (target <= cum[i]) return i;
  }
  return last_positive;
}

}  // namespace detail

/// Samples `n_trials` prepare-and-measure trials. Each trial draws the
/// preparation outcome from the a priori distribution and the measurement
/// outcome from the extended probability operator measure of the outcome
/// state, so trials where the measurement stays silent land on the null
/// label.
///
/// Trial t consumes only the generator sub-stream derived from (seed, t);
/// the log is therefore a pure function of the seed, independent of how the
/// work is split into chunks or threads.
inline ExperimentLog run_experiment(const DeviceOperatorSet& prep,
                                    const DeviceOperatorSet& meas,
                                    std::int64_t n_trials, RngSeed seed,
                                    int chunks = 1, int threads = 1,
                                    const Tolerances& tol = {}) {
  detail::require_role(prep, DeviceRole::Preparation, "run_experiment");
  detail::require_role(meas, DeviceRole::Measurement, "run_experiment");
  if (prep.dim() != meas.dim())
    throw DimensionMismatch("devices have dimensions " +
                            std::to_string(prep.dim()) + " and " +
                            std::to_string(meas.dim()));
  if (n_trials < 1)
    throw ValidationError("trial count must be positive, got " +
                          std::to_string(n_trials));

  const ExtendedMeasurement ext = extend_measurement(meas, tol);
  const std::vector<long double> prep_cum =
      detail::cumulative(a_priori_distribution(prep));

  // Conditional outcome distributions, one per preparation label with
  // weight. Labels without weight keep an empty row; they are never drawn.
  std::vector<std::vector<long double>> outcome_cum(prep.size());
  for (std::size_t i = 0; i < prep.size(); ++i) {
    if (trace(prep.op(i)) <= tol.psd) continue;
    const DensityOperator rho = outcome_state(prep, prep.labels()[i], tol);
    std::vector<double> row(ext.pom.size());
    for (std::size_t k = 0; k < ext.pom.size(); ++k)
      row[k] = detection_probability(rho, ext.pom, ext.pom.labels()[k], tol);
    outcome_cum[i] = detail::cumulative(row);
  }

  ExperimentLog log;
  log.seed = seed;
  log.n_trials = n_trials;
  log.records.resize(static_cast<std::size_t>(n_trials));

  const int n_chunks =
      std::clamp<int>(chunks, 1, static_cast<int>(
                                     std::min<std::int64_t>(n_trials, 1 << 20)));
  auto run_range = [&](std::int64_t first, std::int64_t last) {
    for (std::int64_t t = first; t < last; ++t) {
      SplitMix64 rng(SplitMix64::derive(seed.value,
                                        static_cast<std::uint64_t>(t)));
      const std::size_t i = detail::sample_index(prep_cum, rng.next_double());
      const std::size_t k =
          detail::sample_index(outcome_cum[i], rng.next_double());
      log.records[static_cast<std::size_t>(t)] =
          EventRecord{t, prep.labels()[i], ext.pom.labels()[k]};
    }
  };
  auto chunk_bounds = [&](int c) {
    return std::pair<std::int64_t, std::int64_t>(
        n_trials * c / n_chunks, n_trials * (c + 1) / n_chunks);
  };

  const int n_threads = std::clamp(threads, 1, n_chunks);
  if (n_threads == 1) {
    for (int c = 0; c < n_chunks; ++c) {
      const auto [first, last] = chunk_bounds(c);
      run_range(first, last);
    }
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_threads));
    for (int w = 0; w < n_threads; ++w)
      pool.emplace_back([&, w] {
        for (int c = w; c < n_chunks; c += n_threads) {
          const auto [first, last] = chunk_bounds(c);
          run_range(first, last);
        }
      });
    for (std::thread& th : pool) th.join();
  }

  for (const EventRecord& r : log.records)
    if (r.outcome == kNullOutcomeLabel) ++log.n_discarded;
  return log;
}

/// Empirical joint frequencies of the non-null events in a log, against the
/// distribution the devices predict.
struct FrequencyTable {
  std::vector<std::string> prep_labels;
  std::vector<std::string> meas_labels;
  Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> counts;
  std::int64_t kept_total = 0;
  std::int64_t discarded = 0;
  Eigen::MatrixXd empirical;
  Eigen::MatrixXd expected;
  /// Standardized residuals (p_hat - p) / sqrt(var), with the per-cell
  /// binomial variance floored at 1/kept_total so empty cells stay finite.
  Eigen::MatrixXd z;

  double max_abs_z() const { return z.cwiseAbs().maxCoeff(); }
  double max_abs_error() const {
    return (empirical - expected).cwiseAbs().maxCoeff();
  }
};

inline FrequencyTable tabulate(const ExperimentLog& log,
                               const DeviceOperatorSet& prep,
                               const DeviceOperatorSet& meas,
                               const Tolerances& tol = {}) {
  const Eigen::Index ni = static_cast<Eigen::Index>(prep.size());
  const Eigen::Index nj = static_cast<Eigen::Index>(meas.size());

  FrequencyTable ft;
  ft.prep_labels = prep.labels();
  ft.meas_labels = meas.labels();
  ft.counts =
      Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>::Zero(ni,
                                                                        nj);
  for (const EventRecord& r : log.records) {
    if (r.outcome == kNullOutcomeLabel) {
      ++ft.discarded;
      continue;
    }
    const std::size_t i = prep.index_of(r.prepared);
    const std::size_t j = meas.index_of(r.outcome);
    ++ft.counts(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    ++ft.kept_total;
  }
  if (ft.kept_total == 0) throw EmptyKeptSet();

  const double n = static_cast<double>(ft.kept_total);
  ft.empirical = ft.counts.cast<double>() / n;
  ft.expected = joint(prep, meas, tol).p;
  ft.z.resize(ni, nj);
  for (Eigen::Index i = 0; i < ni; ++i)
    for (Eigen::Index j = 0; j < nj; ++j) {
      const double p = ft.expected(i, j);
      const double var = std::max(p * (1.0 - p), 1.0 / n);
      ft.z(i, j) = (ft.empirical(i, j) - p) / std::sqrt(var / n);
    }
  return ft;
}

}  // namespace retrodict
