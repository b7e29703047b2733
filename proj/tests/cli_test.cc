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

#include "cli_commands.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "gtest/gtest.h"

namespace dpsh::cli {
namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result Invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "dpsh");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  const int code = RunCli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() /
           ("dpsh_cli_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    std::filesystem::create_directories(dir_);
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }

  std::string Path(const std::string& name) const { return (dir_ / name).string(); }
  std::string Write(const std::string& name, const std::string& text) const {
    std::ofstream(Path(name)) << text;
    return Path(name);
  }
  static std::string Read(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  std::filesystem::path dir_;
};

TEST_F(CliTest, CalibrateWithSigma) {
  const Result r = Invoke({"calibrate", "--analysis", "csh-add", "--k", "1", "--epsilon", "1",
                        "--delta", "0.5", "--sigma", "1"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const Json j = Json::parse(r.out);
  EXPECT_EQ(j["analysis"], "csh-add");
  EXPECT_NEAR(j["tau"].get<double>(), csh_threshold_closed_form(1, 1.0, {1.0, 0.5}), 1e-6);
  EXPECT_NEAR(j["total_noise"].get<double>(), std::sqrt(2.0), 1e-15);
  for (const char* key : {"k", "epsilon", "delta", "sigma"}) EXPECT_TRUE(j.contains(key));
}

TEST_F(CliTest, CalibrateSolveSigmaAndOptimize) {
  Result r = Invoke({"calibrate", "--analysis", "gshm-exact", "--k", "10", "--epsilon", "0.35",
                  "--delta", "1e-5", "--solve-sigma"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NEAR(Json::parse(r.out)["min_sigma"].get<double>(),
              min_sigma(Analysis::kGshmExact, 10, {0.35, 1e-5}), 1e-12);
  r = Invoke({"calibrate", "--analysis", "csh-tight", "--k", "10", "--epsilon", "0.35", "--delta",
           "1e-5", "--optimize"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_GT(Json::parse(r.out)["tau"].get<double>(), 0.0);
}

TEST_F(CliTest, CalibrateInfeasible) {
  const Result r = Invoke({"calibrate", "--analysis", "gshm-exact", "--k", "100", "--epsilon",
                        "0.35", "--delta", "1e-5", "--sigma", "1"});
  EXPECT_EQ(r.code, kExitInfeasible);
  EXPECT_NE(r.err.find("delta floor"), std::string::npos);
}

TEST_F(CliTest, CalibrateUsageErrors) {
  EXPECT_EQ(Invoke({"calibrate", "--analysis", "csh-add", "--k", "1", "--epsilon", "1", "--delta",
                 "0.5"})
                .code,
            kExitPrecondition);
  EXPECT_EQ(Invoke({"calibrate", "--analysis", "nope", "--k", "1", "--epsilon", "1", "--delta",
                 "0.5", "--sigma", "1"})
                .code,
            kExitPrecondition);
  EXPECT_EQ(Invoke({"bogus"}).code, kExitPrecondition);
}

TEST_F(CliTest, CurveTwoSteps) {
  const std::string out = Path("curve.csv");
  const Result r = Invoke({"curve", "--k", "10", "--epsilon", "0.35", "--delta", "1e-5",
                        "--noise-min", "10", "--noise-max", "60", "--steps", "2", "--out", out});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  std::istringstream csv(Read(out));
  std::vector<std::string> lines;
  for (std::string line; std::getline(csv, line);) lines.push_back(line);
  ASSERT_EQ(lines.size(), 3u);
  EXPECT_EQ(lines[0], kCurveHeader);
  // Total noise 10 is below every floor: all four cells empty.
  EXPECT_EQ(lines[1], "10,,,,");
  EXPECT_EQ(std::count(lines[2].begin(), lines[2].end(), ','), 4);
  EXPECT_EQ(lines[2].find(",,"), std::string::npos);
}

TEST_F(CliTest, CurveRowsSatisfyDominance) {
  const auto rows = ComputeCurve(10, {0.35, 1e-5}, 15.0, 80.0, 30);
  int feasible = 0;
  for (const auto& row : rows) {
    if (!std::isnan(row.gshm_exact)) {
      EXPECT_LE(row.gshm_exact, row.gshm_add);
      ++feasible;
    }
    if (!std::isnan(row.csh_tight)) {
      EXPECT_LE(row.csh_tight, row.csh_add);
    }
  }
  EXPECT_GT(feasible, 10);
}

TEST_F(CliTest, CurveRejectsBadRange) {
  EXPECT_EQ(Invoke({"curve", "--k", "10", "--epsilon", "0.35", "--delta", "1e-5", "--noise-min",
                 "5", "--noise-max", "4", "--steps", "3"})
                .code,
            kExitPrecondition);
  EXPECT_EQ(Invoke({"curve", "--k", "10", "--epsilon", "0.35", "--delta", "1e-5", "--noise-min",
                 "5", "--noise-max", "8", "--steps", "3", "--out", Path("no/such/dir.csv")})
                .code,
            kExitIo);
}

TEST_F(CliTest, ReleaseIsDeterministicGivenSeed) {
  const std::string in = Write("h.json", R"({"counts":{"a":50,"b":30,"c":2}})");
  for (const std::string mech : {"gshm", "csh", "topk", "discrete-csh"}) {
    const std::string o1 = Path(mech + "1.json");
    const std::string o2 = Path(mech + "2.json");
    for (const auto& o : {o1, o2}) {
      const Result r = Invoke({"release", "--input", in, "--mechanism", mech, "--k", "3",
                            "--sigma", "2", "--tau", "3", "--seed", "42", "--out", o});
      ASSERT_EQ(r.code, kExitOk) << mech << ": " << r.err;
    }
    EXPECT_EQ(Read(o1), Read(o2)) << mech;
    EXPECT_EQ(Read(o1 + ".receipt.json"), Read(o2 + ".receipt.json")) << mech;
    const Json receipt = Json::parse(Read(o1 + ".receipt.json"));
    EXPECT_EQ(receipt["seed"], 42u);
    EXPECT_EQ(receipt["mechanism"], mech);
    EXPECT_EQ(receipt["achieved"]["epsilon"], 1.0);
  }
}

TEST_F(CliTest, ReleaseEmptyInputAndDataset) {
  const std::string in = Write("e.json", R"({"counts":{}})");
  Result r = Invoke({"release", "--input", in, "--mechanism", "csh", "--k", "2", "--sigma", "1",
                  "--tau", "1", "--seed", "1", "--out", Path("e_out.json")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_TRUE(Json::parse(Read(Path("e_out.json")))["counts"].empty());

  const std::string ds = Write("d.json", R"({"users":[["a"],["a","b"]]})");
  r = Invoke({"release", "--input", ds, "--mechanism", "gshm", "--k", "2", "--sigma", "1e-9",
           "--tau", "0.5", "--seed", "1", "--out", Path("d_out.json"), "--receipt",
           Path("d_receipt.json")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const Json counts = Json::parse(Read(Path("d_out.json")))["counts"];
  EXPECT_NEAR(counts["a"].get<double>(), 2.0, 1e-6);
  EXPECT_FALSE(counts.contains("b"));
  EXPECT_TRUE(std::filesystem::exists(Path("d_receipt.json")));
}

TEST_F(CliTest, ReleaseSparsityViolation) {
  const std::string in = Write("h.json", R"({"counts":{"a":5,"b":3,"c":2}})");
  const Result r = Invoke({"release", "--input", in, "--mechanism", "csh", "--k", "2", "--sigma",
                        "1", "--tau", "1", "--out", Path("o.json")});
  EXPECT_EQ(r.code, kExitPrecondition);
  EXPECT_NE(r.err.find("sparsity bound"), std::string::npos);
}

TEST_F(CliTest, ReleaseWithoutSeedRecordsDrawnSeed) {
  const std::string in = Write("h.json", R"({"counts":{"a":5}})");
  const Result r = Invoke({"release", "--input", in, "--mechanism", "discrete-csh", "--k", "1",
                        "--sigma", "1", "--tau", "1", "--out", Path("o.json"), "--round"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const Json receipt = Json::parse(Read(Path("o.json.receipt.json")));
  EXPECT_EQ(receipt["seed"], Json::parse(r.out)["seed"]);
  for (const auto& [key, v] : Json::parse(Read(Path("o.json")))["counts"].items()) {
    EXPECT_EQ(v.get<std::string>().substr(v.get<std::string>().size() - 2), ".0");
  }
}

TEST_F(CliTest, ReleaseMissingInput) {
  EXPECT_EQ(Invoke({"release", "--input", Path("none.json"), "--mechanism", "csh", "--k", "2",
                 "--sigma", "1", "--tau", "1", "--out", Path("o.json")})
                .code,
            kExitIo);
}

std::vector<Json> Lines(const std::string& text) {
  std::vector<Json> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(Json::parse(line));
  return out;
}

TEST_F(CliTest, AuditPasses) {
  const Result r = Invoke({"audit", "--k", "16", "--j", "16", "--sigma", "1", "--tau", "3",
                        "--trials", "1000000", "--seed", "5"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto lines = Lines(r.out);
  ASSERT_EQ(lines.size(), 1u);
  EXPECT_EQ(lines[0]["result"], "PASS");
  EXPECT_LE(lines[0]["estimate"].get<double>(),
            0.32377 + 4.0 * lines[0]["std_error"].get<double>());
}

TEST_F(CliTest, AuditHugeThreshold) {
  const Result r = Invoke({"audit", "--k", "4", "--sigma", "1", "--tau", "1e6", "--trials", "20000"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(Lines(r.out)[0]["estimate"], 0.0);
}

TEST_F(CliTest, AuditHockeyStick) {
  const Result r = Invoke({"audit", "--k", "2", "--sigma", "1", "--tau", "2", "--epsilon", "0.5",
                        "--trials", "20000", "--hockey-stick"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto lines = Lines(r.out);
  ASSERT_EQ(lines.size(), 4u);
  for (const auto& line : lines) EXPECT_EQ(line["result"], "PASS");
  EXPECT_EQ(Invoke({"audit", "--k", "3", "--sigma", "1", "--tau", "2", "--trials", "20000",
                 "--hockey-stick"})
                .code,
            kExitPrecondition);
}

TEST_F(CliTest, AuditCorruptedBoundFails) {
  const Result r = Invoke({"audit", "--k", "16", "--sigma", "1", "--tau", "2", "--trials", "100000",
                        "--corrupt-bound", "0.001"});
  EXPECT_EQ(r.code, kExitAuditFailed);
  EXPECT_EQ(Lines(r.out)[0]["result"], "FAIL");
}

}  // namespace
}  // namespace dpsh::cli
