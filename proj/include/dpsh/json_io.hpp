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

// JSON encodings of histograms, datasets, noisy releases and receipts.
//
//   histogram: {"counts": {"<key>": <positive integer>, ...}}
//   dataset:   {"users": [["k1", "k2"], ...]}
//   release:   {"mechanism", "config": {"k", "sigma", "tau"}, "seed", "counts"}
//              with half-integer counts written as strings "x.0" / "x.5"
//   receipt:   {"mechanism", "analysis", "config", "achieved": {"epsilon",
//              "delta"}, "seed"}

#ifndef DPSH_JSON_IO_HPP_
#define DPSH_JSON_IO_HPP_

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>

#include "dpsh/accounting.hpp"
#include "dpsh/core_model.hpp"
#include "dpsh/errors.hpp"
#include "dpsh/mechanisms.hpp"
#include "json.hpp"

namespace dpsh {

using Json = nlohmann::json;

inline Json histogram_to_json(const SparseHistogram& hist) {
  Json counts = Json::object();
  for (const auto& [key, count] : hist.counts()) counts[key] = count;
  return Json{{"counts", counts}};
}

inline SparseHistogram histogram_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("counts") || !j["counts"].is_object()) {
    throw IoError("histogram JSON must be an object with a \"counts\" object");
  }
  SparseHistogram hist;
  for (const auto& [key, value] : j["counts"].items()) {
    if (!value.is_number_unsigned() && !(value.is_number_integer() && value.get<std::int64_t>() >= 0)) {
      throw IoError("count for key '" + key + "' must be a non-negative integer");
    }
    hist.Set(key, value.get<std::uint64_t>());
  }
  return hist;
}

inline Json dataset_to_json(const Dataset& dataset) {
  Json users = Json::array();
  for (const auto& user : dataset.users) {
    Json items = Json::array();
    for (const auto& key : user) items.push_back(key);
    users.push_back(items);
  }
  return Json{{"users", users}};
}

inline Dataset dataset_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("users") || !j["users"].is_array()) {
    throw IoError("dataset JSON must be an object with a \"users\" array");
  }
  Dataset dataset;
  for (const auto& user : j["users"]) {
    if (!user.is_array()) throw IoError("each user record must be an array of keys");
    std::set<ItemKey> items;
    for (const auto& key : user) {
      if (!key.is_string()) throw IoError("item keys must be strings");
      if (!items.insert(key.get<std::string>()).second) {
        throw IoError("duplicate key '" + key.get<std::string>() + "' in one user record");
      }
    }
    dataset.users.push_back(std::move(items));
  }
  return dataset;
}

inline Json config_to_json(const MechanismConfig& config) {
  return Json{{"k", config.k}, {"sigma", config.sigma}, {"tau", config.tau}};
}

inline MechanismConfig config_from_json(const Json& j) {
  try {
    return {j.at("k").get<std::int64_t>(), j.at("sigma").get<double>(),
            j.at("tau").get<double>()};
  } catch (const Json::exception& e) {
    throw IoError(std::string("bad config JSON: ") + e.what());
  }
}

inline Json noisy_histogram_to_json(const NoisyHistogram& noisy) {
  Json counts = Json::object();
  if (noisy.discrete) {
    for (const auto& [key, value] : noisy.half_counts) counts[key] = value.ToString();
  } else {
    for (const auto& [key, value] : noisy.counts) counts[key] = value;
  }
  return Json{{"mechanism", noisy.mechanism},
              {"config", config_to_json(noisy.config)},
              {"seed", noisy.seed},
              {"counts", counts}};
}

inline NoisyHistogram noisy_histogram_from_json(const Json& j) {
  NoisyHistogram noisy;
  try {
    noisy.mechanism = j.at("mechanism").get<std::string>();
    noisy.config = config_from_json(j.at("config"));
    noisy.seed = j.at("seed").get<std::uint64_t>();
    noisy.discrete = noisy.mechanism == "discrete-csh";
    for (const auto& [key, value] : j.at("counts").items()) {
      if (noisy.discrete) {
        noisy.half_counts.emplace(key, HalfInteger::Parse(value.get<std::string>()));
      } else {
        noisy.counts.emplace(key, value.get<double>());
      }
    }
  } catch (const Json::exception& e) {
    throw IoError(std::string("bad release JSON: ") + e.what());
  }
  return noisy;
}

inline Json receipt_to_json(const ReleaseReceipt& receipt) {
  return Json{{"mechanism", receipt.output.mechanism},
              {"analysis", to_string(receipt.analysis)},
              {"config", config_to_json(receipt.config)},
              {"achieved", {{"epsilon", receipt.achieved.epsilon},
                            {"delta", receipt.achieved.delta}}},
              {"seed", receipt.seed}};
}

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw IoError("cannot parse '" + path + "': " + e.what());
  }
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << text;
  if (!out) throw IoError("write to '" + path + "' failed");
}

inline void write_json_file(const std::string& path, const Json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

}  // namespace dpsh

#endif  // DPSH_JSON_IO_HPP_
