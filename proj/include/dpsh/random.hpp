//
// Copyright 2026 The dpsh Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef DPSH_RANDOM_HPP_
#define DPSH_RANDOM_HPP_

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "dpsh/errors.hpp"

namespace dpsh {

// Seedable generator used by every sampler. The engine is mt19937_64 and all
// derived draws are built from its raw 64-bit output with fixed arithmetic, so
// a seed pins the exact stream on every standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed) { Reseed(seed, 0); }

  // Independent substream `index` of `seed`. Used to shard Monte Carlo work
  // without making results depend on the shard count.
  static Rng Substream(std::uint64_t seed, std::uint64_t index) {
    Rng rng(seed);
    rng.Reseed(seed, index + 1);
    return rng;
  }

  std::uint64_t seed() const { return seed_; }

  std::uint64_t NextU64() { return engine_(); }

  // Uniform double in the open interval (0, 1) with 53 random bits.
  double Uniform01() {
    for (;;) {
      const std::uint64_t bits = engine_() >> 11;
      if (bits != 0) return static_cast<double>(bits) * 0x1.0p-53;
    }
  }

  // Uniform integer in [0, n) by rejection; n must be positive.
  std::uint64_t UniformBelow(std::uint64_t n) {
    if (n == 0) throw InvalidArgument("UniformBelow needs a positive bound");
    const std::uint64_t limit = -n % n;  // 2^64 mod n
    for (;;) {
      const std::uint64_t r = engine_();
      if (r >= limit) return r % n;
    }
  }

  // Standard normal draw (Box-Muller, cosine branch; two engine outputs).
  double StandardNormal() {
    const double u1 = Uniform01();
    const double u2 = Uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  void Reseed(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed),
                      static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream),
                      static_cast<std::uint32_t>(stream >> 32)};
    engine_.seed(seq);
  }

  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

// Draws a seed from the system entropy source.
inline std::uint64_t EntropySeed() {
  std::random_device device;
  return (static_cast<std::uint64_t>(device()) << 32) ^ device();
}

struct ContinuousGaussianParams {
  double sigma = 1.0;
};

// One draw from N(0, sigma^2): sigma times a standard normal, so draws at
// different sigma under the same seed differ by exactly the scale factor.
inline double sample_gaussian(const ContinuousGaussianParams& params, Rng& rng) {
  if (!(params.sigma > 0.0)) throw InvalidArgument("sigma must be positive");
  return params.sigma * rng.StandardNormal();
}

}  // namespace dpsh

#endif  // DPSH_RANDOM_HPP_
