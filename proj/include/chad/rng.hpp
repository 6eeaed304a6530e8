// Copyright 2026 The CHAD Authors.
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
#include <random>
#include <string_view>

#include "chad/common.hpp"

namespace chad {

// All randomness flows from one root seed through named sub-streams, so a
// change in one component (say the sampler) cannot perturb another (say the
// weight init). Distributions are hand-rolled on top of mt19937_64; both are
// bit-stable across platforms.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : base_(seed), eng_(splitmix(seed)) {}

  RngStream(std::uint64_t seed, std::string_view name)
      : RngStream(splitmix(seed ^ fnv1a(name))) {}

  /// Derived stream for a run/record/epoch index.
  RngStream fork(std::uint64_t index) const {
    return RngStream(splitmix(base_ ^ splitmix(index + 0x9e3779b97f4a7c15ull)));
  }

  std::uint64_t next_u64() { return eng_(); }

  /// Uniform in [0,1), 53-bit resolution.
  double u01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * u01(); }

  /// Uniform integer in [0,n). Rejection sampling, no modulo bias.
  std::size_t index(std::size_t n) {
    const std::uint64_t un = n;
    const std::uint64_t lim = UINT64_MAX - UINT64_MAX % un;
    std::uint64_t x;
    do {
      x = eng_();
    } while (x >= lim);
    return static_cast<std::size_t>(x % un);
  }

  bool bernoulli(double p) { return u01() < p; }

  /// Standard normal via Box-Muller (pairs cached).
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - u01();  // (0,1], keeps the log finite
    const double u2 = u01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(t);
    has_spare_ = true;
    return r * std::cos(t);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  /// Gamma(shape, scale) via Marsaglia-Tsang; shape < 1 handled by boosting.
  double gamma(double shape, double scale) {
    if (shape < 1.0) {
      const double u = u01();
      return gamma(shape + 1.0, scale) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = u01();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v * scale;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v)))
        return d * v * scale;
    }
  }

  /// Fisher-Yates shuffle of an index-addressable container.
  template <class Vec>
  void shuffle(Vec& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = index(i);
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  static std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
  }

  std::uint64_t base_;
  std::mt19937_64 eng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace chad
