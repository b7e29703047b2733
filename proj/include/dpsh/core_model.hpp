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

// Histogram data model: sparse histograms, user datasets, neighbor
// construction and the top-k preprocessing transform.

#ifndef DPSH_CORE_MODEL_HPP_
#define DPSH_CORE_MODEL_HPP_

#include <algorithm>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "dpsh/errors.hpp"

namespace dpsh {

using ItemKey = std::string;

// Map from key to positive count. Keys with count zero are never stored, so
// size() is the l0 norm and absent keys read as zero.
class SparseHistogram {
 public:
  using Map = std::map<ItemKey, std::uint64_t>;

  SparseHistogram() = default;
  explicit SparseHistogram(const Map& counts) {
    for (const auto& [key, count] : counts) Set(key, count);
  }
  SparseHistogram(std::initializer_list<std::pair<const ItemKey, std::uint64_t>> init)
      : SparseHistogram(Map(init)) {}

  // Stores `count` for `key`; a zero count erases the key.
  void Set(const ItemKey& key, std::uint64_t count) {
    if (count == 0) {
      counts_.erase(key);
    } else {
      counts_[key] = count;
    }
  }

  std::uint64_t Get(const ItemKey& key) const {
    auto it = counts_.find(key);
    return it == counts_.end() ? 0 : it->second;
  }

  const Map& counts() const { return counts_; }
  std::size_t size() const { return counts_.size(); }
  bool empty() const { return counts_.empty(); }

  friend bool operator==(const SparseHistogram& a, const SparseHistogram& b) {
    return a.counts_ == b.counts_;
  }

 private:
  Map counts_;
};

// One record per user; each record is the set of keys the user holds.
struct Dataset {
  std::vector<std::set<ItemKey>> users;
};

enum class NeighborDirection { kAdd, kRemove };

inline SparseHistogram build_histogram(const Dataset& dataset) {
  SparseHistogram::Map counts;
  for (const auto& user : dataset.users) {
    for (const auto& key : user) {
      std::uint64_t& c = counts[key];
      if (c == std::numeric_limits<std::uint64_t>::max()) {
        throw InvalidArgument("count overflow for key '" + key + "'");
      }
      ++c;
    }
  }
  return SparseHistogram(counts);
}

// The (k+1)-th largest count, treating absent keys as zeros.
inline std::uint64_t kth_plus_one_largest(const SparseHistogram& hist, std::int64_t k) {
  if (k < 1) throw InvalidArgument("k must be at least 1");
  if (hist.size() <= static_cast<std::size_t>(k)) return 0;
  std::vector<std::uint64_t> values;
  values.reserve(hist.size());
  for (const auto& [key, count] : hist.counts()) values.push_back(count);
  auto nth = values.begin() + k;
  std::nth_element(values.begin(), nth, values.end(), std::greater<>());
  return *nth;
}

// H_i -> max(0, H_i - H^(k+1)). The result has at most k non-zero keys.
inline SparseHistogram topk_preprocess(const SparseHistogram& hist, std::int64_t k) {
  const std::uint64_t offset = kth_plus_one_largest(hist, k);
  SparseHistogram out;
  for (const auto& [key, count] : hist.counts()) {
    if (count > offset) out.Set(key, count - offset);
  }
  return out;
}

// True when both inputs are k-sparse and h1 - h2 lies entirely in {0,1}^d or
// entirely in {0,-1}^d.
inline bool is_k_sparse_monotonic_pair(const SparseHistogram& h1, const SparseHistogram& h2,
                                       std::int64_t k) {
  if (k < 0) return false;
  const auto limit = static_cast<std::size_t>(k);
  if (h1.size() > limit || h2.size() > limit) return false;
  bool has_plus = false;
  bool has_minus = false;
  auto check = [&](std::uint64_t a, std::uint64_t b) {
    if (a == b) return true;
    if (a == b + 1) {
      has_plus = true;
      return true;
    }
    if (b == a + 1) {
      has_minus = true;
      return true;
    }
    return false;
  };
  for (const auto& [key, count] : h1.counts()) {
    if (!check(count, h2.Get(key))) return false;
  }
  for (const auto& [key, count] : h2.counts()) {
    if (h1.Get(key) == 0 && !check(0, count)) return false;
  }
  return !(has_plus && has_minus);
}

// Histogram of the neighboring dataset that adds or removes one user holding
// `user_items`.
inline SparseHistogram generate_neighbor(const SparseHistogram& hist,
                                         NeighborDirection direction,
                                         const std::set<ItemKey>& user_items) {
  SparseHistogram out = hist;
  for (const auto& key : user_items) {
    const std::uint64_t c = out.Get(key);
    if (direction == NeighborDirection::kAdd) {
      if (c == std::numeric_limits<std::uint64_t>::max()) {
        throw InvalidArgument("count overflow for key '" + key + "'");
      }
      out.Set(key, c + 1);
    } else {
      if (c == 0) {
        throw PreconditionViolation("cannot remove key '" + key + "' with count 0");
      }
      out.Set(key, c - 1);
    }
  }
  return out;
}

}  // namespace dpsh

#endif  // DPSH_CORE_MODEL_HPP_
