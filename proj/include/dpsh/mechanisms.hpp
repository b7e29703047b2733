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

// Release mechanisms: independent-noise and correlated-noise stability
// histograms, the top-k wrapper, and the discrete correlated Gaussian
// mechanism with its thresholded sparse variant.

#ifndef DPSH_MECHANISMS_HPP_
#define DPSH_MECHANISMS_HPP_

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "dpsh/accounting.hpp"
#include "dpsh/core_model.hpp"
#include "dpsh/discrete_gaussian.hpp"
#include "dpsh/errors.hpp"
#include "dpsh/random.hpp"

namespace dpsh {

// Exact multiple of one half, stored as twice its value.
struct HalfInteger {
  std::int64_t twice = 0;

  double ToDouble() const { return 0.5 * static_cast<double>(twice); }

  // Decimal form "x.0" or "x.5".
  std::string ToString() const {
    const bool negative = twice < 0;
    const std::uint64_t mag = negative ? 0 - static_cast<std::uint64_t>(twice)
                                       : static_cast<std::uint64_t>(twice);
    return std::string(negative ? "-" : "") + std::to_string(mag / 2) +
           (mag % 2 == 0 ? ".0" : ".5");
  }

  static HalfInteger Parse(const std::string& text) {
    const auto dot = text.find('.');
    const std::string whole = dot == std::string::npos ? text : text.substr(0, dot);
    const std::string frac = dot == std::string::npos ? "0" : text.substr(dot + 1);
    if (whole.empty() || whole == "-" || (frac != "0" && frac != "5")) {
      throw InvalidArgument("not a half-integer: '" + text + "'");
    }
    std::size_t used = 0;
    long long w = 0;
    try {
      w = std::stoll(whole, &used);
    } catch (const std::exception&) {
      throw InvalidArgument("not a half-integer: '" + text + "'");
    }
    if (used != whole.size()) throw InvalidArgument("not a half-integer: '" + text + "'");
    const bool negative = whole[0] == '-';
    const std::int64_t half = frac == "5" ? 1 : 0;
    return {2 * w + (negative ? -half : half)};
  }

  friend bool operator==(HalfInteger a, HalfInteger b) { return a.twice == b.twice; }
  friend bool operator<(HalfInteger a, HalfInteger b) { return a.twice < b.twice; }
};

// Released counts plus the metadata needed to reproduce them. Continuous
// mechanisms fill `counts`; the discrete one fills `half_counts`.
struct NoisyHistogram {
  std::string mechanism;
  MechanismConfig config;
  std::uint64_t seed = 0;
  bool discrete = false;
  std::map<ItemKey, double> counts;
  std::map<ItemKey, HalfInteger> half_counts;

  std::size_t size() const { return discrete ? half_counts.size() : counts.size(); }
};

struct ReleaseReceipt {
  NoisyHistogram output;
  MechanismConfig config;
  Analysis analysis = Analysis::kCshTight;
  PrivacyParams achieved;
  std::uint64_t seed = 0;
};

// Noise source drawing from an Rng. Mechanisms take the source as a template
// parameter so tests can substitute deterministic noise.
class RngNoise {
 public:
  explicit RngNoise(Rng& rng) : rng_(rng) {}
  double Correlated(double sd) { return sample_gaussian({sd}, rng_); }
  double Independent(double sd) { return sample_gaussian({sd}, rng_); }
  std::uint64_t seed() const { return rng_.seed(); }

 private:
  Rng& rng_;
};

namespace detail {

inline void RequireReleaseConfig(const MechanismConfig& config) {
  config.Validate();
  if (!(config.tau > 0.0) || !std::isfinite(config.tau)) {
    throw InvalidArgument("tau must be positive and finite");
  }
}

inline void RequireSparsity(const SparseHistogram& hist, std::int64_t k) {
  if (hist.size() > static_cast<std::size_t>(k)) {
    throw PreconditionViolation("histogram has " + std::to_string(hist.size()) +
                                " non-zero counts, exceeding the sparsity bound k = " +
                                std::to_string(k));
  }
}

}  // namespace detail

// Adds N(0, sigma^2) to every stored count (sorted key order) and keeps
// values strictly above 1 + tau.
template <typename Noise>
NoisyHistogram gshm_release(const SparseHistogram& hist, const MechanismConfig& config,
                            Noise& noise) {
  detail::RequireReleaseConfig(config);
  NoisyHistogram out{"gshm", config, noise.seed(), false, {}, {}};
  const double cutoff = 1.0 + config.tau;
  for (const auto& [key, count] : hist.counts()) {
    const double value = static_cast<double>(count) + noise.Independent(config.sigma);
    if (value > cutoff) out.counts.emplace(key, value);
  }
  return out;
}

inline NoisyHistogram gshm_release(const SparseHistogram& hist, const MechanismConfig& config,
                                   Rng& rng) {
  RngNoise noise(rng);
  return gshm_release(hist, config, noise);
}

// Form without an explicit sparsity bound; k is recorded as the support size.
inline NoisyHistogram gshm_release(const SparseHistogram& hist, double sigma, double tau,
                                   Rng& rng) {
  const auto k = static_cast<std::int64_t>(std::max<std::size_t>(1, hist.size()));
  return gshm_release(hist, MechanismConfig{k, sigma, tau}, rng);
}

// One shared Z_corr ~ N(0, sigma^2 / sqrt(k)) drawn first, then
// Z_i ~ N(0, sigma^2) per stored count in sorted key order; keeps values
// strictly above 1 + tau. Requires at most k stored counts.
template <typename Noise>
NoisyHistogram csh_release(const SparseHistogram& hist, const MechanismConfig& config,
                           Noise& noise) {
  detail::RequireReleaseConfig(config);
  detail::RequireSparsity(hist, config.k);
  NoisyHistogram out{"csh", config, noise.seed(), false, {}, {}};
  const double corr_sd = config.sigma / std::sqrt(std::sqrt(static_cast<double>(config.k)));
  const double z_corr = noise.Correlated(corr_sd);
  const double cutoff = 1.0 + config.tau;
  for (const auto& [key, count] : hist.counts()) {
    const double value =
        static_cast<double>(count) + noise.Independent(config.sigma) + z_corr;
    if (value > cutoff) out.counts.emplace(key, value);
  }
  return out;
}

inline NoisyHistogram csh_release(const SparseHistogram& hist, const MechanismConfig& config,
                                  Rng& rng) {
  RngNoise noise(rng);
  return csh_release(hist, config, noise);
}

// Subtracts the (k+1)-th largest count, then runs csh_release. Released
// values are offsets relative to that count.
template <typename Noise>
NoisyHistogram topk_release(const SparseHistogram& hist, const MechanismConfig& config,
                            Noise& noise) {
  detail::RequireReleaseConfig(config);
  NoisyHistogram out = csh_release(topk_preprocess(hist, config.k), config, noise);
  out.mechanism = "topk";
  return out;
}

inline NoisyHistogram topk_release(const SparseHistogram& hist, const MechanismConfig& config,
                                   Rng& rng) {
  RngNoise noise(rng);
  return topk_release(hist, config, noise);
}

// Rational variances (4 sigma^2 / sqrt(k), 4 sigma^2) of the shared and
// per-coordinate discrete noise.
inline std::pair<Rational, Rational> discrete_correlated_variances(std::int64_t k,
                                                                   double sigma) {
  if (k < 1) throw InvalidArgument("k must be at least 1");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw InvalidArgument("sigma must be positive");
  const double each = 4.0 * sigma * sigma;
  const double corr = each / std::sqrt(static_cast<double>(k));
  return {Rational::Approximate(corr), Rational::Approximate(each)};
}

// H_i + (Z_i + Z_corr) / 2 with Z_corr ~ N_Z(0, 4 sigma^2 / sqrt(k)) drawn
// first and Z_i ~ N_Z(0, 4 sigma^2).
inline std::vector<HalfInteger> discrete_correlated_release(
    const std::vector<std::int64_t>& hist, std::int64_t k, double sigma, Rng& rng) {
  if (hist.size() != static_cast<std::size_t>(k)) {
    throw InvalidArgument("histogram length " + std::to_string(hist.size()) +
                          " does not match k = " + std::to_string(k));
  }
  const auto [corr_var, each_var] = discrete_correlated_variances(k, sigma);
  const std::int64_t z_corr = sample_discrete_gaussian({corr_var}, rng);
  std::vector<HalfInteger> out;
  out.reserve(hist.size());
  for (std::int64_t h : hist) {
    if (h < 0) throw InvalidArgument("counts must be non-negative");
    const std::int64_t z = sample_discrete_gaussian({each_var}, rng);
    out.push_back({2 * h + z + z_corr});
  }
  return out;
}

// Rounds half-integers up, so rounded values still exceed the threshold.
inline std::int64_t RoundUp(HalfInteger v) {
  return v.twice % 2 == 0 ? v.twice / 2 : (v.twice + 1) / 2;
}

// Discrete mechanism on the support of `hist` (sorted key order); keeps
// values above 1 + tau. With `round`, released values are rounded up to
// integers afterwards.
inline NoisyHistogram discrete_csh_release(const SparseHistogram& hist,
                                           const MechanismConfig& config, Rng& rng,
                                           bool round = false) {
  detail::RequireReleaseConfig(config);
  detail::RequireSparsity(hist, config.k);
  NoisyHistogram out{"discrete-csh", config, rng.seed(), true, {}, {}};
  std::vector<std::int64_t> support;
  std::vector<ItemKey> keys;
  for (const auto& [key, count] : hist.counts()) {
    if (count > static_cast<std::uint64_t>(std::int64_t{1} << 61)) {
      throw InvalidArgument("count too large for the discrete mechanism");
    }
    keys.push_back(key);
    support.push_back(static_cast<std::int64_t>(count));
  }
  if (support.empty()) return out;
  const auto [corr_var, each_var] = discrete_correlated_variances(config.k, config.sigma);
  const std::int64_t z_corr = sample_discrete_gaussian({corr_var}, rng);
  const double cutoff = 1.0 + config.tau;
  for (std::size_t i = 0; i < support.size(); ++i) {
    const std::int64_t z = sample_discrete_gaussian({each_var}, rng);
    HalfInteger value{2 * support[i] + z + z_corr};
    if (!(value.ToDouble() > cutoff)) continue;
    if (round) value = HalfInteger{2 * RoundUp(value)};
    out.half_counts.emplace(keys[i], value);
  }
  return out;
}

// Runs `mechanism` ("gshm", "csh", "topk" or "discrete-csh") and attaches the
// accounting of `analysis` at `epsilon`.
inline ReleaseReceipt release_with_receipt(const std::string& mechanism,
                                           const SparseHistogram& hist,
                                           const MechanismConfig& config, double epsilon,
                                           Rng& rng, bool round = false) {
  ReleaseReceipt receipt;
  receipt.config = config;
  receipt.seed = rng.seed();
  if (mechanism == "gshm") {
    receipt.output = gshm_release(hist, config, rng);
    receipt.analysis = Analysis::kGshmExact;
  } else if (mechanism == "csh") {
    receipt.output = csh_release(hist, config, rng);
    receipt.analysis = Analysis::kCshTight;
  } else if (mechanism == "topk") {
    receipt.output = topk_release(hist, config, rng);
    receipt.analysis = Analysis::kCshTight;
  } else if (mechanism == "discrete-csh") {
    receipt.output = discrete_csh_release(hist, config, rng, round);
    receipt.analysis = Analysis::kDiscreteCsh;
  } else {
    throw InvalidArgument("unknown mechanism '" + mechanism + "'");
  }
  receipt.achieved = {epsilon, delta_for(receipt.analysis, config, epsilon)};
  return receipt;
}

}  // namespace dpsh

#endif  // DPSH_MECHANISMS_HPP_
