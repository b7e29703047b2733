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

// Continuous Gaussian primitives: a tail-accurate standard normal CDF, its
// logarithm and inverse, and the hockey-stick divergence of two shifted
// Gaussians that every continuous delta formula in this library reduces to.

#ifndef DPSH_NORMAL_HPP_
#define DPSH_NORMAL_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>

#include "dpsh/errors.hpp"

namespace dpsh {

namespace detail {

inline constexpr double kSqrt2 = std::numbers::sqrt2;
inline constexpr double kLogSqrt2Pi = 0.91893853320467274178;  // log(sqrt(2 pi))

inline void RequireNotNan(double x, const char* what) {
  if (std::isnan(x)) throw InvalidArgument(std::string(what) + " is NaN");
}

// log Phi(x) for x < -30 from the asymptotic series of the Mills ratio.
// Truncated after twelve terms, the relative error is below 1e-20 there.
inline double LogCdfAsymptotic(double x) {
  const double inv_x2 = 1.0 / (x * x);
  double term = 1.0;
  double series = 1.0;
  for (int n = 1; n <= 12; ++n) {
    term *= -(2.0 * n - 1.0) * inv_x2;
    series += term;
  }
  return -0.5 * x * x - std::log(-x) - kLogSqrt2Pi + std::log(series);
}

// Lower-tail Phi^{-1}(p) for 0 < p <= 0.5. Acklam's rational approximation
// (relative error ~1e-9) polished by Newton steps on log Phi, which stays
// well conditioned down to subnormal p.
inline double InverseLowerTail(double p);

}  // namespace detail

// Phi(x).
inline double std_normal_cdf(double x) {
  detail::RequireNotNan(x, "x");
  return 0.5 * std::erfc(-x / detail::kSqrt2);
}

// 1 - Phi(x), accurate for large positive x.
inline double std_normal_survival(double x) {
  detail::RequireNotNan(x, "x");
  return 0.5 * std::erfc(x / detail::kSqrt2);
}

// log Phi(x), finite for every finite x.
inline double log_std_normal_cdf(double x) {
  detail::RequireNotNan(x, "x");
  if (x == std::numeric_limits<double>::infinity()) return 0.0;
  if (x > 0.0) return std::log1p(-0.5 * std::erfc(x / detail::kSqrt2));
  if (x > -30.0) return std::log(0.5 * std::erfc(-x / detail::kSqrt2));
  return detail::LogCdfAsymptotic(x);
}

// log phi(x) for the standard normal density.
inline double log_std_normal_pdf(double x) {
  return -0.5 * x * x - detail::kLogSqrt2Pi;
}

inline double std_normal_pdf(double x) { return std::exp(log_std_normal_pdf(x)); }

// 1 - Phi(x)^m computed as -expm1(m log Phi(x)), so that powers of values
// close to one keep their digits.
inline double std_normal_cdf_power_complement(double x, double m) {
  return -std::expm1(m * log_std_normal_cdf(x));
}

inline double detail::InverseLowerTail(double p) {
  static constexpr std::array<double, 6> a = {
      -3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
      1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr std::array<double, 5> b = {
      -5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
      6.680131188771972e+01, -1.328068155288572e+01};
  static constexpr std::array<double, 6> c = {
      -7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
      -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr std::array<double, 4> d = {
      7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
      3.754408661907416e+00};

  double x;
  if (p < 0.02425) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  }

  const double log_p = std::log(p);
  for (int iter = 0; iter < 4; ++iter) {
    const double log_cdf = log_std_normal_cdf(x);
    const double slope = std::exp(log_std_normal_pdf(x) - log_cdf);
    const double step = (log_cdf - log_p) / slope;
    x -= step;
    if (std::abs(step) <= 1e-16 * std::max(1.0, std::abs(x))) break;
  }
  return x;
}

// Phi^{-1}(p) for 0 < p < 1. Near p = 1 the input itself carries at most
// ~1e-16 absolute information; use std_normal_inv_survival for upper tails.
inline double std_normal_inv_cdf(double p) {
  if (!(p > 0.0 && p < 1.0)) throw InvalidArgument("p must lie in (0, 1)");
  if (p <= 0.5) return detail::InverseLowerTail(p);
  return -detail::InverseLowerTail(1.0 - p);
}

// The x with 1 - Phi(x) = q, for 0 < q < 1.
inline double std_normal_inv_survival(double q) {
  if (!(q > 0.0 && q < 1.0)) throw InvalidArgument("q must lie in (0, 1)");
  if (q <= 0.5) return -detail::InverseLowerTail(q);
  return detail::InverseLowerTail(1.0 - q);
}

namespace detail {

// Hockey-stick divergence at level epsilon between N(0, s^2) and N(D, s^2)
// as a function of ratio = D / s, for any real epsilon:
//   Phi(r/2 - eps/r) - e^eps Phi(-r/2 - eps/r).
// The second product is formed as exp(eps + log Phi(.)) so large epsilon
// and deep tails neither overflow nor flush to zero early.
inline double GaussianHockeyStick(double ratio, double epsilon) {
  const double shift = epsilon / ratio;
  const double upper = std_normal_cdf(0.5 * ratio - shift);
  const double lower = std::exp(epsilon + log_std_normal_cdf(-0.5 * ratio - shift));
  const double delta = upper - lower;
  if (delta <= 0.0) return 0.0;
  return delta > 1.0 ? 1.0 : delta;
}

}  // namespace detail

// Smallest delta for which adding N(0, sigma^2) noise to a query with l2
// sensitivity `sensitivity` is (epsilon, delta)-DP (analytic Gaussian
// mechanism).
inline double gaussian_mechanism_delta(double sensitivity, double sigma,
                                       double epsilon) {
  if (!(sensitivity > 0.0)) throw InvalidArgument("sensitivity must be positive");
  if (!(sigma > 0.0)) throw InvalidArgument("sigma must be positive");
  if (!(epsilon >= 0.0)) throw InvalidArgument("epsilon must be non-negative");
  return detail::GaussianHockeyStick(sensitivity / sigma, epsilon);
}

// Delta of the correlated Gaussian mechanism on d monotone counting queries
// with shared noise N(0, sigma^2 / gamma): identical to the plain Gaussian
// mechanism with sensitivity sqrt(d + gamma) / 2.
inline double correlated_gaussian_delta(std::int64_t d, double gamma, double sigma,
                                        double epsilon) {
  if (d < 1) throw InvalidArgument("d must be positive");
  if (!(gamma > 0.0)) throw InvalidArgument("gamma must be positive");
  return gaussian_mechanism_delta(0.5 * std::sqrt(static_cast<double>(d) + gamma),
                                  sigma, epsilon);
}

}  // namespace dpsh

#endif  // DPSH_NORMAL_HPP_
