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

// Independent numerical checks of the accounting: a Monte Carlo estimate of
// the threshold-crossing probability, and the hockey-stick divergence between
// exact output distributions of the correlated mechanism for k <= 2 by
// adaptive quadrature.

#ifndef DPSH_ORACLES_HPP_
#define DPSH_ORACLES_HPP_

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include "dpsh/errors.hpp"
#include "dpsh/normal.hpp"
#include "dpsh/random.hpp"

namespace dpsh {

struct McEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  std::int64_t trials = 0;
};

// Worker count: DPSH_THREADS if set and positive, else the machine's cores.
inline int ThreadCount() {
  if (const char* env = std::getenv("DPSH_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

// Frequency of {exists i in [j]: Z_corr + Z_i > tau} with
// Z_corr ~ N(0, sigma^2 / sqrt(k)) and Z_i ~ N(0, sigma^2). Trials run in
// fixed blocks on seeded substreams, so the estimate does not depend on the
// number of threads.
inline McEstimate mc_delta_inf(std::int64_t k, std::int64_t j, double sigma, double tau,
                               std::int64_t trials, std::uint64_t seed, int threads = 0) {
  if (k < 1 || j < 1) throw InvalidArgument("k and j must be at least 1");
  if (!(sigma > 0.0)) throw InvalidArgument("sigma must be positive");
  if (trials < 10000) throw InvalidArgument("trials must be at least 10000");
  constexpr std::int64_t kBlock = 1 << 16;
  const std::int64_t blocks = (trials + kBlock - 1) / kBlock;
  const double corr_sd = sigma / std::sqrt(std::sqrt(static_cast<double>(k)));
  std::vector<std::int64_t> hits(static_cast<std::size_t>(blocks), 0);
  auto run_block = [&](std::int64_t b) {
    Rng rng = Rng::Substream(seed, static_cast<std::uint64_t>(b));
    const std::int64_t n = std::min(kBlock, trials - b * kBlock);
    std::int64_t count = 0;
    for (std::int64_t t = 0; t < n; ++t) {
      const double z_corr = corr_sd * rng.StandardNormal();
      for (std::int64_t i = 0; i < j; ++i) {
        if (z_corr + sigma * rng.StandardNormal() > tau) {
          ++count;
          break;
        }
      }
    }
    hits[static_cast<std::size_t>(b)] = count;
  };
  const int workers =
      static_cast<int>(std::min<std::int64_t>(threads > 0 ? threads : ThreadCount(), blocks));
  if (workers <= 1) {
    for (std::int64_t b = 0; b < blocks; ++b) run_block(b);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::int64_t b = w; b < blocks; b += workers) run_block(b);
      });
    }
    for (auto& th : pool) th.join();
  }
  std::int64_t total = 0;
  for (std::int64_t h : hits) total += h;
  McEstimate out;
  out.trials = trials;
  out.estimate = static_cast<double>(total) / static_cast<double>(trials);
  out.std_error =
      std::sqrt(out.estimate * (1.0 - out.estimate) / static_cast<double>(trials));
  return out;
}

enum class NeighborCase { kSuperset, kSubset, kSameSupport };

inline std::string to_string(NeighborCase c) {
  switch (c) {
    case NeighborCase::kSuperset: return "superset";
    case NeighborCase::kSubset: return "subset";
    case NeighborCase::kSameSupport: return "same-support";
  }
  return "unknown";
}

inline NeighborCase parse_neighbor_case(const std::string& name) {
  for (NeighborCase c :
       {NeighborCase::kSuperset, NeighborCase::kSubset, NeighborCase::kSameSupport}) {
    if (to_string(c) == name) return c;
  }
  throw InvalidArgument("unknown neighbor case '" + name + "'");
}

// sup_Y P(Y) - e^eps Q(Y) between N(a, s^2) and N(b, s^2), a > b, both
// censored at t: values <= t are reported only as "suppressed".
// `forward` selects P = N(a) (true) or P = N(b) (false).
inline double censored_gaussian_hockey_stick(double a, double b, double s, double t,
                                             double epsilon, bool forward) {
  if (!(a > b) || !(s > 0.0)) throw InvalidArgument("need a > b and s > 0");
  if (std::isinf(epsilon)) return 0.0;
  const double e = std::exp(epsilon);
  const double mid = 0.5 * (a + b);
  const double shift = epsilon * s * s / (a - b);
  double total = 0.0;
  if (forward) {
    total += std::max(0.0, std_normal_cdf((t - a) / s) - e * std_normal_cdf((t - b) / s));
    const double m = std::max(t, mid + shift);
    total += std::max(0.0, std_normal_survival((m - a) / s) -
                               e * std_normal_survival((m - b) / s));
  } else {
    total += std::max(0.0, std_normal_cdf((t - b) / s) - e * std_normal_cdf((t - a) / s));
    const double m = mid - shift;
    if (m > t) {
      const double q_mass = std_normal_cdf((m - b) / s) - std_normal_cdf((t - b) / s);
      const double p_mass = std_normal_cdf((m - a) / s) - std_normal_cdf((t - a) / s);
      total += std::max(0.0, q_mass - e * p_mass);
    }
  }
  return std::min(1.0, total);
}

namespace detail {

struct QuadResult {
  double value = 0.0;
  double error = 0.0;
};

inline QuadResult Integrate(const std::function<double(double)>& f, double a, double b,
                            double tol = 1e-11) {
  QuadResult r;
  r.value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 20, tol,
                                                                         &r.error);
  return r;
}

inline double NormalDensity(double x, double s) {
  const double u = x / s;
  return std::exp(-0.5 * u * u - kLogSqrt2Pi) / s;
}

// Exact output laws of the correlated mechanism for k <= 2 non-zero counts
// h, all expressed through one integral over the shared noise z.
class CshOutputLaw {
 public:
  CshOutputLaw(std::int64_t k, double sigma, double tau, std::vector<double> h)
      : k_(k), sigma_(sigma), cutoff_(1.0 + tau), h_(std::move(h)) {
    corr_sd_ = sigma / std::sqrt(std::sqrt(static_cast<double>(k)));
    z_lo_ = -14.0 * corr_sd_;
    z_hi_ = 14.0 * corr_sd_;
  }

  double cutoff() const { return cutoff_; }
  double sigma() const { return sigma_; }
  double corr_sd() const { return corr_sd_; }
  const std::vector<double>& h() const { return h_; }

  // Probability that every coordinate is suppressed.
  QuadResult AllSuppressed() const {
    if (h_.empty()) return {1.0, 0.0};
    if (h_.size() == 1) {
      const double s = std::hypot(sigma_, corr_sd_);
      return {std_normal_cdf((cutoff_ - h_[0]) / s), 0.0};
    }
    return Integrate(
        [&](double z) {
          double prod = NormalDensity(z, corr_sd_);
          for (double hi : h_) prod *= std_normal_cdf((cutoff_ - hi - z) / sigma_);
          return prod;
        },
        z_lo_, z_hi_);
  }

  // Density of coordinate i released at y with every other coordinate
  // suppressed.
  double SingleReleasedDensity(std::size_t i, double y) const {
    if (h_.size() == 1) return NormalDensity(y - h_[0], std::hypot(sigma_, corr_sd_));
    return Integrate(
               [&](double z) {
                 double prod = NormalDensity(z, corr_sd_) * NormalDensity(y - h_[i] - z, sigma_);
                 for (std::size_t o = 0; o < h_.size(); ++o) {
                   if (o != i) prod *= std_normal_cdf((cutoff_ - h_[o] - z) / sigma_);
                 }
                 return prod;
               },
               z_lo_, z_hi_, 1e-13)
        .value;
  }

 private:
  std::int64_t k_;
  double sigma_;
  double cutoff_;
  std::vector<double> h_;
  double corr_sd_;
  double z_lo_;
  double z_hi_;
};

// D_eps(P || Q) for laws on the same support with equal constant counts per
// law (hp > hq or hp < hq in every coordinate).
inline QuadResult SameSupportDivergence(const CshOutputLaw& p, const CshOutputLaw& q,
                                        double epsilon) {
  const double e = std::exp(epsilon);
  const double t = p.cutoff();
  const std::size_t n = p.h().size();
  QuadResult total;
  // Everything suppressed.
  const QuadResult p_none = p.AllSuppressed();
  const QuadResult q_none = q.AllSuppressed();
  total.value += std::max(0.0, p_none.value - e * q_none.value);
  total.error += p_none.error + e * q_none.error;
  // Exactly one coordinate released.
  const double spread = std::hypot(p.sigma(), p.corr_sd());
  const double y_hi = std::max(p.h()[0], q.h()[0]) + 16.0 * spread;
  for (std::size_t i = 0; i < n; ++i) {
    const QuadResult one = Integrate(
        [&](double y) {
          return std::max(0.0, p.SingleReleasedDensity(i, y) - e * q.SingleReleasedDensity(i, y));
        },
        t, std::max(t, y_hi) + spread, 1e-10);
    total.value += one.value;
    total.error += one.error;
  }
  if (n == 2) {
    // Both released: with u = y1 + y2 and v = y1 - y2 the laws differ only in
    // u, and v ~ N(0, 2 sigma^2) independently; the region is |v| < u - 2t.
    const double su = std::sqrt(2.0 * p.sigma() * p.sigma() + 4.0 * p.corr_sd() * p.corr_sd());
    const double sv = std::sqrt(2.0) * p.sigma();
    const double mp = 2.0 * p.h()[0];
    const double mq = 2.0 * q.h()[0];
    const QuadResult both = Integrate(
        [&](double u) {
          const double diff =
              std::max(0.0, NormalDensity(u - mp, su) - e * NormalDensity(u - mq, su));
          return diff * (2.0 * std_normal_cdf((u - 2.0 * t) / sv) - 1.0);
        },
        2.0 * t, std::max(2.0 * t, std::max(mp, mq)) + 16.0 * su, 1e-11);
    total.value += both.value;
    total.error += both.error;
  }
  total.value = std::min(1.0, total.value);
  return total;
}

}  // namespace detail

// Hockey-stick divergence between the correlated mechanism's outputs on a
// worst-case neighboring pair with k <= 2 coordinates:
//   superset:     D(M(1^k) || M(0))
//   subset:       D(M(0) || M(1^k))
//   same-support: max of both orders between M(2^k) and M(1^k).
// Throws if the quadrature error estimate exceeds 1e-7.
inline double hockey_stick_csh(std::int64_t k, double sigma, double tau, double epsilon,
                               NeighborCase neighbor_case) {
  if (k < 1 || k > 2) throw InvalidArgument("hockey-stick oracle supports k in {1, 2}");
  if (!(sigma > 0.0) || !(tau > 0.0)) throw InvalidArgument("sigma and tau must be positive");
  if (!(epsilon >= 0.0)) throw InvalidArgument("epsilon must be non-negative");
  if (std::isinf(epsilon)) return 0.0;
  const std::vector<double> ones(static_cast<std::size_t>(k), 1.0);
  const std::vector<double> twos(static_cast<std::size_t>(k), 2.0);
  detail::QuadResult result;
  switch (neighbor_case) {
    case NeighborCase::kSuperset: {
      const auto none = detail::CshOutputLaw(k, sigma, tau, ones).AllSuppressed();
      result = {1.0 - none.value, none.error};
      break;
    }
    case NeighborCase::kSubset: {
      const auto none = detail::CshOutputLaw(k, sigma, tau, ones).AllSuppressed();
      result = {std::max(0.0, 1.0 - std::exp(epsilon) * none.value),
                std::exp(epsilon) * none.error};
      break;
    }
    case NeighborCase::kSameSupport: {
      const detail::CshOutputLaw big(k, sigma, tau, twos);
      const detail::CshOutputLaw small(k, sigma, tau, ones);
      const auto fwd = detail::SameSupportDivergence(big, small, epsilon);
      const auto bwd = detail::SameSupportDivergence(small, big, epsilon);
      result = fwd.value >= bwd.value ? fwd : bwd;
      result.error = std::max(fwd.error, bwd.error);
      break;
    }
  }
  if (!(result.error <= 1e-7)) {
    throw Error("hockey-stick quadrature error estimate " + std::to_string(result.error) +
                " exceeds 1e-7");
  }
  return std::clamp(result.value, 0.0, 1.0);
}

}  // namespace dpsh

#endif  // DPSH_ORACLES_HPP_
