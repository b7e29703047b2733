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

// Calibration: smallest threshold for a target (epsilon, delta), smallest
// feasible noise, and the noise level minimising the threshold.

#ifndef DPSH_CALIBRATION_HPP_
#define DPSH_CALIBRATION_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "dpsh/accounting.hpp"
#include "dpsh/errors.hpp"
#include "dpsh/normal.hpp"

namespace dpsh {

namespace detail {

inline std::string InfeasibleMessage(Analysis analysis, double floor, double target) {
  std::ostringstream os;
  os.precision(17);
  os << to_string(analysis) << ": infeasible noise level, delta floor " << floor
     << " is not below target delta " << target;
  return os.str();
}

// Threshold at which the pure threshold-crossing term 1 - Phi(tau / scale)^m
// equals delta. Every continuous analysis has a term of this form, so no
// smaller tau can be feasible.
inline double InfOnlyThreshold(double scale, double m, double delta) {
  const double per_coordinate = -std::expm1(std::log1p(-delta) / m);
  return scale * std_normal_inv_survival(per_coordinate);
}

}  // namespace detail

// Smallest tau with csh_add_deltas(k, sigma, tau).delta_total <= delta:
//   tau = Phi^-1((1 - (delta - delta_gauss))^(1 / (k + 1))) (1 + k^(-1/4)) sigma.
inline double csh_threshold_closed_form(std::int64_t k, double sigma,
                                        const PrivacyParams& target) {
  target.Validate();
  if (k < 1) throw InvalidArgument("k must be at least 1");
  const double kd = static_cast<double>(k);
  const double gauss = correlated_gaussian_delta(k, std::sqrt(kd), sigma, target.epsilon);
  const double slack = target.delta - gauss;
  if (!(slack > 0.0)) {
    throw InfeasibleError(detail::InfeasibleMessage(Analysis::kCshAdd, gauss, target.delta),
                          gauss);
  }
  return detail::InfOnlyThreshold(detail::CshScale(k) * sigma, kd + 1.0, slack);
}

// Smallest tau > 0 with delta_for(analysis, {k, sigma, tau}) <= target.delta,
// to relative tolerance 1e-9. Throws InfeasibleError (carrying the floor)
// when no threshold suffices.
inline double min_tau(Analysis analysis, std::int64_t k, double sigma,
                      const PrivacyParams& target) {
  target.Validate();
  if (k < 1) throw InvalidArgument("k must be at least 1");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw InvalidArgument("sigma must be positive");
  const double floor = delta_floor(analysis, k, sigma, target.epsilon);
  if (!(floor < target.delta)) {
    throw InfeasibleError(detail::InfeasibleMessage(analysis, floor, target.delta), floor);
  }
  std::vector<std::pair<double, double>> seen;
  auto delta_at = [&](double tau) {
    const double d = delta_for(analysis, MechanismConfig{k, sigma, tau}, target.epsilon);
    seen.emplace_back(tau, d);
    return d;
  };
  auto feasible = [&](double tau) { return delta_at(tau) <= target.delta; };

  double lo = 0.0;
  const double kd = static_cast<double>(k);
  switch (analysis) {
    case Analysis::kGshmAdd:
    case Analysis::kGshmExact:
      lo = detail::InfOnlyThreshold(sigma, kd, target.delta);
      break;
    case Analysis::kCshAdd:
    case Analysis::kCshTight:
      lo = detail::InfOnlyThreshold(detail::CshScale(k) * sigma, kd + 1.0, target.delta);
      break;
    case Analysis::kDiscreteCsh:
      lo = sigma / 100.0;
      break;
  }
  if (!(lo > 0.0)) lo = sigma * 1e-12;
  if (feasible(lo)) {
    if (analysis != Analysis::kDiscreteCsh) return lo;
    while (lo > sigma * 1e-12) {
      const double next = 0.5 * lo;
      if (!feasible(next)) break;
      lo = next;
    }
    if (lo <= sigma * 1e-12) return lo;
    // lo is feasible and lo / 2 is not.
    double hi = lo;
    lo = 0.5 * lo;
    while (hi - lo > 1e-9 * hi) {
      const double mid = 0.5 * (lo + hi);
      (feasible(mid) ? hi : lo) = mid;
    }
    return hi;
  }
  double hi = std::max(100.0 * sigma, 2.0 * lo);
  int doublings = 0;
  while (!feasible(hi)) {
    if (++doublings > 60) {
      throw InfeasibleError(detail::InfeasibleMessage(analysis, floor, target.delta), floor);
    }
    lo = hi;
    hi *= 2.0;
  }
  const double bracket_lo = lo;
  const double bracket_hi = hi;
  while (hi - lo > 1e-9 * hi) {
    const double mid = 0.5 * (lo + hi);
    (feasible(mid) ? hi : lo) = mid;
  }

  // Bisection assumes delta is non-increasing in tau. If any pair of
  // evaluations contradicts that, fall back to a grid scan of the bracket.
  std::sort(seen.begin(), seen.end());
  bool monotone = true;
  for (std::size_t i = 1; i < seen.size(); ++i) {
    if (seen[i].second > seen[i - 1].second * (1.0 + 1e-12) + 1e-300) monotone = false;
  }
  if (monotone) return hi;
  constexpr int kGrid = 4096;
  const double step = (bracket_hi - bracket_lo) / kGrid;
  int last_infeasible = -1;
  for (int i = 0; i <= kGrid; ++i) {
    if (!feasible(bracket_lo + step * i)) last_infeasible = i;
  }
  lo = bracket_lo + step * last_infeasible;
  hi = lo + step;
  while (hi - lo > 1e-9 * hi) {
    const double mid = 0.5 * (lo + hi);
    (feasible(mid) ? hi : lo) = mid;
  }
  return hi;
}

// Smallest sigma at which some threshold is feasible: the root of
// delta_floor(sigma) = delta, to relative tolerance 1e-9. The returned sigma
// is on the feasible side.
inline double min_sigma(Analysis analysis, std::int64_t k, const PrivacyParams& target) {
  target.Validate();
  if (k < 1) throw InvalidArgument("k must be at least 1");
  auto floor_at = [&](double s) { return delta_floor(analysis, k, s, target.epsilon); };
  double lo = 1.0;
  double hi = 1.0;
  while (floor_at(hi) >= target.delta) {
    lo = hi;
    hi *= 2.0;
    if (!std::isfinite(hi)) throw InvalidArgument("no feasible sigma");
  }
  while (floor_at(lo) < target.delta) {
    hi = lo;
    lo *= 0.5;
    if (lo < 1e-300) return hi;
  }
  while (hi - lo > 1e-9 * hi) {
    const double mid = 0.5 * (lo + hi);
    (floor_at(mid) < target.delta ? hi : lo) = mid;
  }
  return hi;
}

struct OptimalThreshold {
  double sigma = 0.0;
  double tau = 0.0;
};

// Noise level (above min_sigma) that minimises min_tau, found by a log grid
// on sigma / sigma_min - 1 in [1e-9, 10] and golden-section refinement.
inline OptimalThreshold optimal_tau(Analysis analysis, std::int64_t k,
                                    const PrivacyParams& target) {
  const double sigma_min = min_sigma(analysis, k, target);
  auto tau_at = [&](double log_m) -> double {
    try {
      return min_tau(analysis, k, sigma_min * (1.0 + std::pow(10.0, log_m)), target);
    } catch (const InfeasibleError&) {
      return std::numeric_limits<double>::infinity();
    }
  };
  constexpr int kGrid = 61;
  const double lo = -9.0;
  const double hi = 1.0;
  const double step = (hi - lo) / (kGrid - 1);
  int best = 0;
  double best_tau = std::numeric_limits<double>::infinity();
  for (int i = 0; i < kGrid; ++i) {
    const double t = tau_at(lo + step * i);
    if (t < best_tau) {
      best_tau = t;
      best = i;
    }
  }
  if (!std::isfinite(best_tau)) throw InfeasibleError("no feasible noise level found", 1.0);
  double a = lo + step * std::max(0, best - 1);
  double b = lo + step * std::min(kGrid - 1, best + 1);
  double best_log_m = lo + step * best;
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = tau_at(c);
  double fd = tau_at(d);
  for (int iter = 0; iter < 40; ++iter) {
    if (fc < fd) {
      b = d; d = c; fd = fc;
      c = b - inv_phi * (b - a);
      fc = tau_at(c);
    } else {
      a = c; c = d; fc = fd;
      d = a + inv_phi * (b - a);
      fd = tau_at(d);
    }
  }
  if (fc < best_tau) { best_tau = fc; best_log_m = c; }
  if (fd < best_tau) { best_tau = fd; best_log_m = d; }
  return {sigma_min * (1.0 + std::pow(10.0, best_log_m)), best_tau};
}

}  // namespace dpsh

#endif  // DPSH_CALIBRATION_HPP_
