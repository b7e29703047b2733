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

#include "dpsh/core_model.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "gmock/gmock.h"
#include "gtest/gtest.h"

namespace dpsh {
namespace {

using ::testing::ElementsAre;
using ::testing::Pair;

TEST(BuildHistogramTest, EmptyDataset) {
  EXPECT_TRUE(build_histogram(Dataset{}).empty());
}

TEST(BuildHistogramTest, CountsUsersPerKey) {
  Dataset data{{{"a", "b"}, {"b"}}};
  EXPECT_THAT(build_histogram(data).counts(), ElementsAre(Pair("a", 1), Pair("b", 2)));
}

TEST(BuildHistogramTest, MatchesNaiveTally) {
  std::mt19937_64 gen(5);
  Dataset data;
  for (int u = 0; u < 1000; ++u) {
    std::set<ItemKey> items;
    const int n = static_cast<int>(gen() % 8);
    for (int i = 0; i < n; ++i) items.insert("k" + std::to_string(gen() % 50));
    data.users.push_back(items);
  }
  const SparseHistogram hist = build_histogram(data);
  for (int key = 0; key < 50; ++key) {
    const std::string name = "k" + std::to_string(key);
    std::uint64_t tally = 0;
    for (const auto& user : data.users) tally += user.count(name);
    EXPECT_EQ(hist.Get(name), tally) << name;
  }
  for (const auto& [key, count] : hist.counts()) EXPECT_GE(count, 1u);
}

TEST(SparseHistogramTest, ZeroCountsAreNotStored) {
  SparseHistogram h = {{"a", 0}, {"b", 2}};
  EXPECT_EQ(h.size(), 1u);
  h.Set("b", 0);
  EXPECT_TRUE(h.empty());
}

TEST(TopkPreprocessTest, SubtractsKPlusOneLargest) {
  const SparseHistogram h = {{"a", 5}, {"b", 3}, {"c", 1}};
  EXPECT_THAT(topk_preprocess(h, 2).counts(), ElementsAre(Pair("a", 4), Pair("b", 2)));
}

TEST(TopkPreprocessTest, FewerThanKPlusOneKeysIsIdentity) {
  const SparseHistogram h = {{"a", 5}};
  EXPECT_EQ(topk_preprocess(h, 2), h);
}

TEST(TopkPreprocessTest, RejectsZeroK) {
  EXPECT_THROW(topk_preprocess(SparseHistogram{{"a", 1}}, 0), InvalidArgument);
}

TEST(TopkPreprocessTest, MatchesFullSortOracle) {
  std::mt19937_64 gen(11);
  SparseHistogram h;
  for (int i = 0; i < 200; ++i) h.Set("k" + std::to_string(i), 1 + gen() % 40);
  std::vector<std::uint64_t> sorted;
  for (const auto& [key, count] : h.counts()) sorted.push_back(count);
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  const std::uint64_t offset = sorted[10];
  const SparseHistogram out = topk_preprocess(h, 10);
  for (const auto& [key, count] : h.counts()) {
    EXPECT_EQ(out.Get(key), count > offset ? count - offset : 0) << key;
  }
  EXPECT_LE(out.size(), 10u);
}

TEST(TopkPreprocessTest, TiesAtTheCutoff) {
  const SparseHistogram h = {{"a", 4}, {"b", 4}, {"c", 4}};
  EXPECT_TRUE(topk_preprocess(h, 2).empty());
}

TEST(KSparseMonotonicPairTest, Examples) {
  EXPECT_TRUE(is_k_sparse_monotonic_pair({{"a", 2}, {"b", 1}}, {{"a", 1}}, 2));
  EXPECT_FALSE(is_k_sparse_monotonic_pair({{"a", 2}}, {{"a", 1}, {"b", 1}}, 2));
  const SparseHistogram h = {{"a", 3}, {"b", 7}};
  EXPECT_TRUE(is_k_sparse_monotonic_pair(h, h, 2));
  EXPECT_TRUE(is_k_sparse_monotonic_pair(h, h, 5));
}

TEST(KSparseMonotonicPairTest, RejectsDenseOrLargeSteps) {
  EXPECT_FALSE(is_k_sparse_monotonic_pair({{"a", 1}, {"b", 1}}, {}, 1));
  EXPECT_FALSE(is_k_sparse_monotonic_pair({{"a", 3}}, {{"a", 1}}, 1));
  EXPECT_TRUE(is_k_sparse_monotonic_pair({}, {{"a", 1}, {"b", 1}}, 2));
}

TEST(GenerateNeighborTest, AddAndRemove) {
  EXPECT_THAT(generate_neighbor({{"a", 1}}, NeighborDirection::kAdd, {"b"}).counts(),
              ElementsAre(Pair("a", 1), Pair("b", 1)));
  EXPECT_THAT(
      generate_neighbor({{"a", 1}, {"b", 2}}, NeighborDirection::kRemove, {"a", "b"}).counts(),
      ElementsAre(Pair("b", 1)));
}

TEST(GenerateNeighborTest, RoundTrip) {
  const SparseHistogram h = {{"a", 1}, {"c", 4}};
  const std::set<ItemKey> user = {"a", "b", "c"};
  const SparseHistogram added = generate_neighbor(h, NeighborDirection::kAdd, user);
  EXPECT_EQ(generate_neighbor(added, NeighborDirection::kRemove, user), h);
}

TEST(GenerateNeighborTest, RemovingAbsentKeyFails) {
  EXPECT_THROW(generate_neighbor({{"a", 1}}, NeighborDirection::kRemove, {"b"}),
               PreconditionViolation);
}

TEST(NeighborPropertyTest, SingleUserChangeIsMonotone) {
  std::mt19937_64 gen(3);
  for (int trial = 0; trial < 500; ++trial) {
    Dataset data;
    const int users = 1 + static_cast<int>(gen() % 30);
    for (int u = 0; u < users; ++u) {
      std::set<ItemKey> items;
      for (int i = 0; i < 5; ++i) items.insert(std::to_string(gen() % 20));
      data.users.push_back(items);
    }
    Dataset neighbor = data;
    neighbor.users.erase(neighbor.users.begin() + static_cast<long>(gen() % users));
    const SparseHistogram a = build_histogram(data);
    const SparseHistogram b = build_histogram(neighbor);
    const auto k = static_cast<std::int64_t>(std::max(a.size(), b.size()));
    EXPECT_TRUE(is_k_sparse_monotonic_pair(a, b, k));
  }
}

// Random datasets and single-user changes: top-k preprocessing of both
// sides is always a k-sparse monotonic pair.
TEST(TopkMonotonicityPropertyTest, TenThousandTrials) {
  std::mt19937_64 gen(2024);
  for (int trial = 0; trial < 10000; ++trial) {
    const int d = 1 + static_cast<int>(gen() % 100);
    const std::int64_t k = 1 + static_cast<std::int64_t>(gen() % 20);
    Dataset data;
    const int users = static_cast<int>(gen() % 40);
    for (int u = 0; u < users; ++u) {
      std::set<ItemKey> items;
      const int n = static_cast<int>(gen() % (d + 1));
      for (int i = 0; i < n; ++i) items.insert(std::to_string(gen() % d));
      data.users.push_back(items);
    }
    const SparseHistogram h = build_histogram(data);
    SparseHistogram other;
    if (users > 0 && gen() % 2 == 0) {
      const auto& user = data.users[gen() % users];
      other = generate_neighbor(h, NeighborDirection::kRemove, user);
    } else {
      std::set<ItemKey> user;
      const int n = static_cast<int>(gen() % (d + 1));
      for (int i = 0; i < n; ++i) user.insert(std::to_string(gen() % d));
      other = generate_neighbor(h, NeighborDirection::kAdd, user);
    }
    ASSERT_TRUE(is_k_sparse_monotonic_pair(topk_preprocess(h, k), topk_preprocess(other, k), k))
        << "trial " << trial << " d=" << d << " k=" << k;
  }
}

}  // namespace
}  // namespace dpsh
