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

// Discrete Gaussian N_Z(0, sigma^2) on the integers: probability mass,
// cumulative and tail sums with certified truncation, and an exact sampler
// (discrete Laplace proposal with Bernoulli(exp(-x)) acceptance, all in
// rational arithmetic).

#ifndef DPSH_DISCRETE_GAUSSIAN_HPP_
#define DPSH_DISCRETE_GAUSSIAN_HPP_

#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>

#include "dpsh/errors.hpp"
#include "dpsh/random.hpp"

namespace dpsh {

// Positive rational num / den with 64-bit parts, kept in lowest terms.
struct Rational {
  std::int64_t num = 1;
  std::int64_t den = 1;

  static Rational Of(std::int64_t num, std::int64_t den) {
    if (num <= 0 || den <= 0) throw InvalidArgument("rational must be positive");
    const std::int64_t g = std::gcd(num, den);
    return Rational{num / g, den / g};
  }

  // Exact conversion; rejects values that are not m / 2^e with 64-bit parts.
  static Rational Exact(double x) {
    if (!(x > 0.0) || !std::isfinite(x)) {
      throw InvalidArgument("variance must be a positive finite number");
    }
    std::int64_t den = 1;
    double scaled = x;
    while (scaled != std::floor(scaled)) {
      if (den > (std::int64_t{1} << 61)) {
        throw InvalidArgument("variance is not representable as a 64-bit rational");
      }
      scaled *= 2.0;
      den *= 2;
    }
    if (scaled >= 0x1.0p62) {
      throw InvalidArgument("variance is not representable as a 64-bit rational");
    }
    return Of(static_cast<std::int64_t>(scaled), den);
  }

  // Best rational approximation with denominator at most max_den, from the
  // continued fraction expansion of x.
  static Rational Approximate(double x, std::int64_t max_den = std::int64_t{1} << 20) {
    if (!(x > 0.0) || !std::isfinite(x) || x >= 0x1.0p62) {
      throw InvalidArgument("variance is not representable as a 64-bit rational");
    }
    std::int64_t p0 = 0, q0 = 1, p1 = 1, q1 = 0;
    double rest = x;
    for (int iter = 0; iter < 64; ++iter) {
      const double whole = std::floor(rest);
      if (whole > 0x1.0p62) break;
      const auto a = static_cast<std::int64_t>(whole);
      if (q1 != 0 && a > (max_den - q0) / q1) break;
      const std::int64_t p2 = a * p1 + p0;
      const std::int64_t q2 = a * q1 + q0;
      p0 = p1; q0 = q1; p1 = p2; q1 = q2;
      const double frac = rest - whole;
      if (frac < 1e-300 || static_cast<double>(p1) / static_cast<double>(q1) == x) break;
      rest = 1.0 / frac;
    }
    if (p1 <= 0) throw InvalidArgument("variance too small to approximate");
    return Of(p1, q1);
  }

  double ToDouble() const {
    return static_cast<double>(num) / static_cast<double>(den);
  }
};

struct DiscreteGaussianParams {
  Rational sigma2;
};

namespace detail {

inline double DiscreteKernel(double y, double sigma2) {
  return std::exp(-(y * y) / (2.0 * sigma2));
}

// Sum of exp(-y^2 / 2 sigma^2) over y >= start (start >= 0), stopped once the
// geometric bound on the remaining terms drops below 1e-18 of the sum.
inline double DiscreteUpperSum(std::int64_t start, double sigma2) {
  double sum = 0.0;
  for (std::int64_t y = start;; ++y) {
    const double yd = static_cast<double>(y);
    const double term = DiscreteKernel(yd, sigma2);
    sum += term;
    if (term == 0.0) break;
    // Remaining terms shrink by at least `ratio` each step.
    const double ratio = std::exp(-(2.0 * yd + 1.0) / (2.0 * sigma2));
    if (ratio < 1.0 && term * ratio / (1.0 - ratio) < 1e-18 * sum) break;
  }
  return sum;
}

inline void RequirePositiveVariance(double sigma2) {
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) {
    throw InvalidArgument("sigma2 must be positive and finite");
  }
}

}  // namespace detail

// Normalising constant sum_y exp(-y^2 / (2 sigma2)).
inline double discrete_gaussian_normalizer(double sigma2) {
  detail::RequirePositiveVariance(sigma2);
  return 1.0 + 2.0 * detail::DiscreteUpperSum(1, sigma2);
}

inline double discrete_gaussian_pmf(std::int64_t x, double sigma2) {
  detail::RequirePositiveVariance(sigma2);
  return detail::DiscreteKernel(static_cast<double>(x), sigma2) /
         discrete_gaussian_normalizer(sigma2);
}

// Pr[X > x] for X ~ N_Z(0, sigma2); relative accuracy in the upper tail.
inline double discrete_gaussian_survival(std::int64_t x, double sigma2) {
  detail::RequirePositiveVariance(sigma2);
  if (x < 0) return 1.0 - discrete_gaussian_survival(-x - 1, sigma2);
  return detail::DiscreteUpperSum(x + 1, sigma2) / discrete_gaussian_normalizer(sigma2);
}

// Pr[X <= x] for X ~ N_Z(0, sigma2).
inline double discrete_gaussian_cdf(std::int64_t x, double sigma2) {
  detail::RequirePositiveVariance(sigma2);
  if (x < 0) return discrete_gaussian_survival(-x - 1, sigma2);
  return 1.0 - discrete_gaussian_survival(x, sigma2);
}

namespace detail {

using BigInt = boost::multiprecision::cpp_int;

inline BigInt UniformBelow(const BigInt& n, Rng& rng) {
  if (n <= std::numeric_limits<std::uint64_t>::max()) {
    return BigInt(rng.UniformBelow(static_cast<std::uint64_t>(n)));
  }
  const unsigned bits = static_cast<unsigned>(boost::multiprecision::msb(n)) + 1;
  const unsigned words = (bits + 63) / 64;
  const unsigned excess = words * 64 - bits;
  for (;;) {
    BigInt candidate = 0;
    for (unsigned w = 0; w < words; ++w) {
      std::uint64_t word = rng.NextU64();
      if (w == 0 && excess > 0) word >>= excess;
      candidate = (candidate << 64) | word;
    }
    if (candidate < n) return candidate;
  }
}

// Bernoulli(num / den) with 0 <= num <= den.
inline bool Bernoulli(const BigInt& num, const BigInt& den, Rng& rng) {
  return UniformBelow(den, rng) < num;
}

// Bernoulli(exp(-num / den)) for 0 <= num / den <= 1.
inline bool BernoulliExpUnit(const BigInt& num, const BigInt& den, Rng& rng) {
  BigInt k = 1;
  while (Bernoulli(num, den * k, rng)) ++k;
  return (k & 1) == 1;
}

// Bernoulli(exp(-num / den)) for any num / den >= 0.
inline bool BernoulliExp(BigInt num, const BigInt& den, Rng& rng) {
  while (num > den) {
    if (!BernoulliExpUnit(1, 1, rng)) return false;
    num -= den;
  }
  return BernoulliExpUnit(num, den, rng);
}

// Discrete Laplace with scale t: Pr[X = x] proportional to exp(-|x| / t).
inline BigInt DiscreteLaplace(std::uint64_t t, Rng& rng) {
  const BigInt scale(t);
  for (;;) {
    const std::uint64_t u = rng.UniformBelow(t);
    if (!BernoulliExp(BigInt(u), scale, rng)) continue;
    BigInt v = 0;
    while (BernoulliExpUnit(1, 1, rng)) ++v;
    const BigInt magnitude = BigInt(u) + scale * v;
    const bool negative = (rng.NextU64() & 1) == 1;
    if (negative && magnitude == 0) continue;
    return negative ? BigInt(-magnitude) : magnitude;
  }
}

inline std::uint64_t FloorSqrt(std::uint64_t n) {
  auto r = static_cast<std::uint64_t>(std::sqrt(static_cast<double>(n)));
  while (r > 0 && r * r > n) --r;
  while ((r + 1) * (r + 1) <= n) ++r;
  return r;
}

}  // namespace detail

// Exact draw from N_Z(0, sigma2) with sigma2 = num / den.
inline std::int64_t sample_discrete_gaussian(const DiscreteGaussianParams& params,
                                             Rng& rng) {
  using detail::BigInt;
  const Rational s2 = Rational::Of(params.sigma2.num, params.sigma2.den);
  const std::uint64_t t =
      detail::FloorSqrt(static_cast<std::uint64_t>(s2.num / s2.den)) + 1;
  const BigInt num(s2.num);
  const BigInt den(s2.den);
  const BigInt scale(t);
  // Acceptance exponent (|y| - sigma2 / t)^2 / (2 sigma2)
  //   = (|y| den t - num)^2 / (2 num den t^2).
  const BigInt accept_den = 2 * num * den * scale * scale;
  for (;;) {
    const BigInt y = detail::DiscreteLaplace(t, rng);
    const BigInt diff = boost::multiprecision::abs(y) * den * scale - num;
    if (detail::BernoulliExp(diff * diff, accept_den, rng)) {
      return static_cast<std::int64_t>(y);
    }
  }
}

}  // namespace dpsh

#endif  // DPSH_DISCRETE_GAUSSIAN_HPP_
