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

#include <cmath>
#include <cstdint>
#include <numbers>

namespace retrodict {

/// Counter-style 64-bit generator (splitmix64, Steele/Lea/Flood mixing
/// constants). Seeding is free, so every consumer owns a private stream
/// derived from a root seed and a stream index; streams never share state.
class SplitMix64 {
 public:
  static constexpr std::uint64_t kIncrement = 0x9E3779B97F4A7C15ull;

  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  /// Seed of the sub-stream at `index` under the stream rooted at `seed`.
  static constexpr std::uint64_t derive(std::uint64_t seed,
                                        std::uint64_t index) noexcept {
    return seed ^ (index * kIncrement);
  }

  std::uint64_t next_u64() noexcept {
    state_ += kIncrement;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  /// Uniform on [0, 1), using the top 53 bits of one draw.
  double next_double() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller; the second variate of each generated
  /// pair is handed out on the following call.
  double next_normal() noexcept {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    // First uniform shifted into (0, 1] so the logarithm stays finite.
    const double u1 =
        static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    const double u2 = next_double();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    cached_ = radius * std::sin(angle);
    have_cached_ = true;
    return radius * std::cos(angle);
  }

 private:
  std::uint64_t state_;
  double cached_ = 0.0;
  bool have_cached_ = false;
};

}  // namespace retrodict
