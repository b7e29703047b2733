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

// Privacy accounting for sparse histogram release: delta as a function of
// (k, sigma, tau, epsilon) for the independent-noise and correlated-noise
// stability histograms, under add-the-deltas and case-split analyses, plus
// the discrete-noise variant and zCDP conversion.

#ifndef DPSH_ACCOUNTING_HPP_
#define DPSH_ACCOUNTING_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "dpsh/discrete_gaussian.hpp"
#include "dpsh/errors.hpp"
#include "dpsh/normal.hpp"

namespace dpsh {

struct PrivacyParams {
  double epsilon = 0.0;
  double delta = 0.0;

  void Validate() const {
    if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
      throw InvalidArgument("epsilon must be finite and non-negative");
    }
    if (!(delta > 0.0 && delta < 1.0)) {
      throw InvalidArgument("delta must lie in (0, 1)");
    }
  }
};

// Sparsity bound k, per-coordinate noise standard deviation sigma and
// threshold offset tau (noisy counts must exceed 1 + tau to be released).
struct MechanismConfig {
  std::int64_t k = 1;
  double sigma = 1.0;
  double tau = 1.0;

  // Accounting accepts tau = 0 as the limit of the formulas; releases do not.
  void Validate() const {
    if (k < 1) throw InvalidArgument("k must be at least 1");
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
      throw InvalidArgument("sigma must be positive and finite");
    }
    if (!(tau >= 0.0)) throw InvalidArgument("tau must be non-negative");
  }
};

struct DeltaBreakdown {
  double delta_gauss = 0.0;
  double delta_inf = 0.0;
  double delta_total = 0.0;
  // Set when the zCDP conversion cannot reach the requested epsilon
  // (epsilon <= rho); delta_gauss is then 1.
  bool gauss_conversion_infeasible = false;
};

// Every branch of the case-split analysis of the correlated mechanism.
// Index i of the per-j vectors holds j = i + 1; psi_of_m[m] is psi(m) for
// m = 0..k.
struct TightAnalysisTerms {
  double branch_inf_only = 0.0;
  double branch_gauss_only = 0.0;
  std::vector<double> branch_superset;
  std::vector<double> branch_subset;
  std::vector<double> gamma_of_j;
  std::vector<double> psi_of_m;
  std::vector<double> eps_hat_of_j;
};

struct ZcdpBudget {
  double rho = 1.0;
};

enum class Analysis { kGshmAdd, kGshmExact, kCshAdd, kCshTight, kDiscreteCsh };

inline const std::vector<Analysis>& AllAnalyses() {
  static const std::vector<Analysis> all = {Analysis::kGshmAdd, Analysis::kGshmExact,
                                            Analysis::kCshAdd, Analysis::kCshTight,
                                            Analysis::kDiscreteCsh};
  return all;
}

inline std::string to_string(Analysis a) {
  switch (a) {
    case Analysis::kGshmAdd: return "gshm-add";
    case Analysis::kGshmExact: return "gshm-exact";
    case Analysis::kCshAdd: return "csh-add";
    case Analysis::kCshTight: return "csh-tight";
    case Analysis::kDiscreteCsh: return "discrete-csh";
  }
  return "unknown";
}

inline Analysis parse_analysis(const std::string& name) {
  for (Analysis a : AllAnalyses()) {
    if (to_string(a) == name) return a;
  }
  throw InvalidArgument("unknown analysis '" + name + "'");
}

namespace detail {

inline double Clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

// 1 + k^(-1/4): scale between sigma and the spread of Z_corr + Z_i.
inline double CshScale(std::int64_t k) {
  return 1.0 + 1.0 / std::sqrt(std::sqrt(static_cast<double>(k)));
}

// Sensitivity of the correlated mechanism on k coordinates.
inline double CshSensitivity(std::int64_t k) {
  const double kd = static_cast<double>(k);
  return 0.5 * std::sqrt(kd + std::sqrt(kd));
}

inline double CshGamma(std::int64_t j, std::int64_t k) {
  const double jd = static_cast<double>(j);
  return std::min(std::sqrt(jd), 0.5 * std::sqrt(jd + std::sqrt(static_cast<double>(k))));
}

inline void RequireEpsilon(double epsilon) {
  if (!(epsilon >= 0.0)) throw InvalidArgument("epsilon must be non-negative");
}

// Maximum of value(j) over j in [first, last] and `best`, skipping blocks
// whose upper bound bound(lo, hi) cannot beat the running maximum.
template <typename Value, typename Bound>
double BlockMax(std::int64_t first, std::int64_t last, double best, const Value& value,
                const Bound& bound) {
  if (first > last) return best;
  constexpr std::int64_t kLeaf = 32;
  // Seed the running maximum with a coarse sweep.
  const std::int64_t stride = std::max<std::int64_t>(1, (last - first) / 64);
  for (std::int64_t j = first; j <= last; j += stride) best = std::max(best, value(j));
  best = std::max(best, value(last));
  std::vector<std::pair<std::int64_t, std::int64_t>> stack = {{first, last}};
  while (!stack.empty()) {
    const auto [lo, hi] = stack.back();
    stack.pop_back();
    if (hi - lo < kLeaf) {
      for (std::int64_t j = lo; j <= hi; ++j) best = std::max(best, value(j));
      continue;
    }
    if (bound(lo, hi) <= best) continue;
    const std::int64_t mid = lo + (hi - lo) / 2;
    stack.emplace_back(lo, mid);
    stack.emplace_back(mid + 1, hi);
  }
  return best;
}

struct GshmExactParts {
  double log_p;
  std::int64_t k;
  double sigma;
  double epsilon;

  double Gamma(std::int64_t j) const { return static_cast<double>(k - j) * log_p; }
  double Ratio(std::int64_t j) const { return std::sqrt(static_cast<double>(j)) / sigma; }
  double InfOnly() const { return -std::expm1(static_cast<double>(k) * log_p); }
  double Mixed(std::int64_t j) const {
    const double gamma = Gamma(j);
    const double q = std::exp(gamma);
    return Clamp01(-std::expm1(gamma) + q * GaussianHockeyStick(Ratio(j), epsilon - gamma));
  }
  double Shifted(std::int64_t j) const {
    return GaussianHockeyStick(Ratio(j), epsilon + Gamma(j));
  }
};

inline GshmExactParts MakeGshmParts(const MechanismConfig& config, double epsilon) {
  config.Validate();
  RequireEpsilon(epsilon);
  return {log_std_normal_cdf(config.tau / config.sigma), config.k, config.sigma, epsilon};
}

struct CshTightParts {
  double log_p;
  std::int64_t k;
  double sigma;
  double epsilon;

  // log psi(m) = (m + 1) log p.
  double LogPsi(std::int64_t m) const { return static_cast<double>(m + 1) * log_p; }
  double OneMinusPsi(std::int64_t m) const { return -std::expm1(LogPsi(m)); }
  double EpsHat(std::int64_t j) const { return epsilon + LogPsi(k - j); }
  double Ratio(std::int64_t j) const { return CshGamma(j, k) / sigma; }
  double InfOnly() const { return OneMinusPsi(k); }
  double GaussOnly() const { return GaussianHockeyStick(CshSensitivity(k) / sigma, epsilon); }
  double Superset(std::int64_t j) const {
    return Clamp01(OneMinusPsi(k - j) + GaussianHockeyStick(Ratio(j), epsilon));
  }
  double Subset(std::int64_t j) const { return GaussianHockeyStick(Ratio(j), EpsHat(j)); }
};

inline CshTightParts MakeCshParts(const MechanismConfig& config, double epsilon) {
  config.Validate();
  RequireEpsilon(epsilon);
  return {log_std_normal_cdf(config.tau / (CshScale(config.k) * config.sigma)), config.k,
          config.sigma, epsilon};
}

}  // namespace detail

// Independent Gaussian noise, add-the-deltas: delta_gauss at l2 sensitivity
// sqrt(k) and delta_inf = 1 - Phi(tau / sigma)^k.
inline DeltaBreakdown gshm_add_deltas(const MechanismConfig& config, double epsilon) {
  config.Validate();
  detail::RequireEpsilon(epsilon);
  DeltaBreakdown out;
  out.delta_gauss = gaussian_mechanism_delta(std::sqrt(static_cast<double>(config.k)),
                                             config.sigma, epsilon);
  out.delta_inf = std_normal_cdf_power_complement(config.tau / config.sigma,
                                                  static_cast<double>(config.k));
  out.delta_total = std::min(1.0, out.delta_gauss + out.delta_inf);
  return out;
}

// Exact delta of the independent-noise mechanism, scanning every j in [k].
inline double gshm_exact_delta_exhaustive(const MechanismConfig& config, double epsilon) {
  const auto parts = detail::MakeGshmParts(config, epsilon);
  double best = parts.InfOnly();
  for (std::int64_t j = 1; j <= config.k; ++j) {
    best = std::max({best, parts.Mixed(j), parts.Shifted(j)});
  }
  return detail::Clamp01(best);
}

// Same maximum as gshm_exact_delta_exhaustive. Blocks of j are skipped using
// monotonicity of the Gaussian term in sensitivity and in epsilon.
inline double gshm_exact_delta(const MechanismConfig& config, double epsilon) {
  const auto parts = detail::MakeGshmParts(config, epsilon);
  double best = parts.InfOnly();
  best = detail::BlockMax(
      1, config.k, best, [&](std::int64_t j) { return parts.Mixed(j); },
      [&](std::int64_t lo, std::int64_t hi) {
        const double q_lo = std::exp(parts.Gamma(lo));
        const double hs_hi =
            detail::GaussianHockeyStick(parts.Ratio(hi), epsilon - parts.Gamma(hi));
        return 1.0 - q_lo * (1.0 - hs_hi);
      });
  best = detail::BlockMax(
      1, config.k, best, [&](std::int64_t j) { return parts.Shifted(j); },
      [&](std::int64_t lo, std::int64_t hi) {
        return detail::GaussianHockeyStick(parts.Ratio(hi), epsilon + parts.Gamma(lo));
      });
  return detail::Clamp01(best);
}

// 1 - Phi(tau / (sigma (1 + k^(-1/4))))^(j + 1): bound on the probability
// that any of j coordinates with noise Z_i + Z_corr exceeds tau.
inline double delta_inf_bound(std::int64_t k, std::int64_t j, double sigma, double tau) {
  if (k < 1 || j < 1) throw InvalidArgument("k and j must be at least 1");
  if (!(sigma > 0.0)) throw InvalidArgument("sigma must be positive");
  if (!(tau >= 0.0)) throw InvalidArgument("tau must be non-negative");
  return std_normal_cdf_power_complement(tau / (sigma * detail::CshScale(k)),
                                         static_cast<double>(j + 1));
}

// Correlated noise, add-the-deltas.
inline DeltaBreakdown csh_add_deltas(const MechanismConfig& config, double epsilon) {
  config.Validate();
  detail::RequireEpsilon(epsilon);
  DeltaBreakdown out;
  const double kd = static_cast<double>(config.k);
  out.delta_gauss = correlated_gaussian_delta(config.k, std::sqrt(kd), config.sigma, epsilon);
  out.delta_inf = delta_inf_bound(config.k, config.k, config.sigma, config.tau);
  out.delta_total = std::min(1.0, out.delta_gauss + out.delta_inf);
  return out;
}

// Case-split delta of the correlated mechanism with the full breakdown of
// every branch.
inline std::pair<double, TightAnalysisTerms> csh_tight_delta(const MechanismConfig& config,
                                                             double epsilon) {
  const auto parts = detail::MakeCshParts(config, epsilon);
  const std::int64_t k = config.k;
  TightAnalysisTerms terms;
  terms.branch_inf_only = parts.InfOnly();
  terms.branch_gauss_only = parts.GaussOnly();
  terms.psi_of_m.reserve(static_cast<std::size_t>(k + 1));
  for (std::int64_t m = 0; m <= k; ++m) terms.psi_of_m.push_back(std::exp(parts.LogPsi(m)));
  double best = std::max(terms.branch_inf_only, terms.branch_gauss_only);
  for (std::int64_t j = 1; j <= k - 1; ++j) {
    terms.gamma_of_j.push_back(detail::CshGamma(j, k));
    terms.eps_hat_of_j.push_back(parts.EpsHat(j));
    terms.branch_superset.push_back(parts.Superset(j));
    terms.branch_subset.push_back(parts.Subset(j));
    best = std::max({best, terms.branch_superset.back(), terms.branch_subset.back()});
  }
  return {detail::Clamp01(best), std::move(terms)};
}

// Value of csh_tight_delta without the breakdown, using block bounds on the
// inner maxima.
inline double csh_tight_delta_value(const MechanismConfig& config, double epsilon) {
  const auto parts = detail::MakeCshParts(config, epsilon);
  const std::int64_t k = config.k;
  double best = std::max(parts.InfOnly(), parts.GaussOnly());
  best = detail::BlockMax(
      1, k - 1, best, [&](std::int64_t j) { return parts.Superset(j); },
      [&](std::int64_t lo, std::int64_t hi) {
        return parts.OneMinusPsi(k - lo) +
               detail::GaussianHockeyStick(parts.Ratio(hi), epsilon);
      });
  best = detail::BlockMax(
      1, k - 1, best, [&](std::int64_t j) { return parts.Subset(j); },
      [&](std::int64_t lo, std::int64_t hi) {
        return detail::GaussianHockeyStick(parts.Ratio(hi), parts.EpsHat(lo));
      });
  return detail::Clamp01(best);
}

// Comparable per-coordinate noise of the correlated mechanism:
// sqrt(sigma^2 + sigma^2 / sqrt(k)).
inline double total_noise_csh(double sigma, std::int64_t k) {
  if (k < 1) throw InvalidArgument("k must be at least 1");
  return sigma * std::sqrt(1.0 + 1.0 / std::sqrt(static_cast<double>(k)));
}

// Per-coordinate sigma whose total_noise_csh equals `total_noise`.
inline double sigma_from_total_noise_csh(double total_noise, std::int64_t k) {
  return total_noise / total_noise_csh(1.0, k);
}

// rho-zCDP implies (rho + 2 sqrt(rho log(1/delta)), delta)-DP.
inline double zcdp_to_approx_dp(const ZcdpBudget& budget, double delta) {
  if (!(budget.rho > 0.0)) throw InvalidArgument("rho must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidArgument("delta must lie in (0, 1)");
  return budget.rho + 2.0 * std::sqrt(budget.rho * -std::log(delta));
}

// Smallest delta with zcdp_to_approx_dp(rho, delta) <= epsilon:
// exp(-(epsilon - rho)^2 / (4 rho)). Returns 1 when epsilon <= rho.
inline double zcdp_delta_for_epsilon(const ZcdpBudget& budget, double epsilon) {
  if (!(budget.rho > 0.0)) throw InvalidArgument("rho must be positive");
  detail::RequireEpsilon(epsilon);
  if (epsilon <= budget.rho) return 1.0;
  const double gap = epsilon - budget.rho;
  return std::exp(-gap * gap / (4.0 * budget.rho));
}

// zCDP budget of the discrete correlated mechanism on k coordinates.
inline ZcdpBudget discrete_csh_rho(std::int64_t k, double sigma) {
  if (k < 1) throw InvalidArgument("k must be at least 1");
  if (!(sigma > 0.0)) throw InvalidArgument("sigma must be positive");
  const double kd = static_cast<double>(k);
  return {(kd + std::sqrt(kd)) / (8.0 * sigma * sigma)};
}

namespace detail {

// Pr[X <= floor(x)] written as its complement Pr[X > floor(x)].
inline double DiscreteSurvivalAtFloor(double x, double sigma2) {
  const double fx = std::floor(x);
  if (fx >= 0x1.0p62) return 0.0;
  return discrete_gaussian_survival(static_cast<std::int64_t>(fx), sigma2);
}

}  // namespace detail

// Discrete correlated mechanism with thresholding.
inline DeltaBreakdown discrete_csh_deltas(const MechanismConfig& config, double epsilon) {
  config.Validate();
  detail::RequireEpsilon(epsilon);
  DeltaBreakdown out;
  const ZcdpBudget rho = discrete_csh_rho(config.k, config.sigma);
  out.gauss_conversion_infeasible = epsilon <= rho.rho;
  out.delta_gauss = zcdp_delta_for_epsilon(rho, epsilon);
  const double kd = static_cast<double>(config.k);
  const double k_quarter = 1.0 / std::sqrt(std::sqrt(kd));
  const double c = 1.0 + k_quarter;
  const double s2 = config.sigma * config.sigma;
  const double tail_corr =
      detail::DiscreteSurvivalAtFloor(2.0 * config.tau * k_quarter / c, 4.0 * s2 / std::sqrt(kd));
  const double tail_each = detail::DiscreteSurvivalAtFloor(2.0 * config.tau / c, 4.0 * s2);
  out.delta_inf = detail::Clamp01(-std::expm1(std::log1p(-tail_corr) + kd * std::log1p(-tail_each)));
  out.delta_total = std::min(1.0, out.delta_gauss + out.delta_inf);
  return out;
}

// Gaussian part of the top-k mechanism when it also releases a noisy
// estimate of H^(k+1): sensitivity sqrt(k + 5 sqrt(k)) / 2.
inline double delta_gauss_with_offset_release(std::int64_t k, double sigma, double epsilon) {
  if (k < 1) throw InvalidArgument("k must be at least 1");
  const double kd = static_cast<double>(k);
  return gaussian_mechanism_delta(0.5 * std::sqrt(kd + 5.0 * std::sqrt(kd)), sigma, epsilon);
}

// Total delta of `analysis` at `config`.
inline double delta_for(Analysis analysis, const MechanismConfig& config, double epsilon) {
  switch (analysis) {
    case Analysis::kGshmAdd: return gshm_add_deltas(config, epsilon).delta_total;
    case Analysis::kGshmExact: return gshm_exact_delta(config, epsilon);
    case Analysis::kCshAdd: return csh_add_deltas(config, epsilon).delta_total;
    case Analysis::kCshTight: return csh_tight_delta_value(config, epsilon);
    case Analysis::kDiscreteCsh: return discrete_csh_deltas(config, epsilon).delta_total;
  }
  throw InvalidArgument("unknown analysis");
}

// Limit of delta_for as tau grows without bound: the part no threshold can
// remove.
inline double delta_floor(Analysis analysis, std::int64_t k, double sigma, double epsilon) {
  if (k < 1) throw InvalidArgument("k must be at least 1");
  detail::RequireEpsilon(epsilon);
  const double kd = static_cast<double>(k);
  switch (analysis) {
    case Analysis::kGshmAdd:
    case Analysis::kGshmExact:
      return gaussian_mechanism_delta(std::sqrt(kd), sigma, epsilon);
    case Analysis::kCshAdd:
    case Analysis::kCshTight:
      return correlated_gaussian_delta(k, std::sqrt(kd), sigma, epsilon);
    case Analysis::kDiscreteCsh:
      return zcdp_delta_for_epsilon(discrete_csh_rho(k, sigma), epsilon);
  }
  throw InvalidArgument("unknown analysis");
}

}  // namespace dpsh

#endif  // DPSH_ACCOUNTING_HPP_
