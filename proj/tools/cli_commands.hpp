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

// Subcommands of the dpsh command-line tool. Kept in a header so tests can
// drive them in-process.
//
// Exit codes: 0 success, 1 audit check failed, 2 infeasible parameters,
// 3 precondition or usage error, 4 I/O error.

#ifndef DPSH_TOOLS_CLI_COMMANDS_HPP_
#define DPSH_TOOLS_CLI_COMMANDS_HPP_

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "dpsh/dpsh.hpp"

namespace dpsh::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitAuditFailed = 1;
inline constexpr int kExitInfeasible = 2;
inline constexpr int kExitPrecondition = 3;
inline constexpr int kExitIo = 4;

inline constexpr const char* kCurveHeader = "total_noise,gshm_add,gshm_exact,csh_add,csh_tight";

inline bool IsCorrelated(Analysis a) {
  return a == Analysis::kCshAdd || a == Analysis::kCshTight || a == Analysis::kDiscreteCsh;
}

inline double TotalNoise(Analysis a, double sigma, std::int64_t k) {
  return IsCorrelated(a) ? total_noise_csh(sigma, k) : sigma;
}

struct CalibrateFlags {
  std::string analysis;
  std::int64_t k = 0;
  double epsilon = 0.0;
  double delta = 0.0;
  std::optional<double> sigma;
  bool solve_sigma = false;
  bool optimize = false;
};

inline int CmdCalibrate(const CalibrateFlags& f, std::ostream& out) {
  const Analysis analysis = parse_analysis(f.analysis);
  const PrivacyParams target{f.epsilon, f.delta};
  target.Validate();
  if (f.k < 1) throw InvalidArgument("--k must be at least 1");
  const int modes = (f.sigma ? 1 : 0) + (f.solve_sigma ? 1 : 0) + (f.optimize ? 1 : 0);
  if (modes != 1) {
    throw InvalidArgument("give exactly one of --sigma, --solve-sigma, --optimize");
  }
  Json report = {{"analysis", to_string(analysis)},
                 {"k", f.k},
                 {"epsilon", f.epsilon},
                 {"delta", f.delta}};
  if (f.sigma) {
    const double tau = min_tau(analysis, f.k, *f.sigma, target);
    report["sigma"] = *f.sigma;
    report["tau"] = tau;
    report["total_noise"] = TotalNoise(analysis, *f.sigma, f.k);
  } else if (f.solve_sigma) {
    const double sigma = min_sigma(analysis, f.k, target);
    report["min_sigma"] = sigma;
    report["sigma"] = sigma;
    report["tau"] = nullptr;
    report["total_noise"] = TotalNoise(analysis, sigma, f.k);
  } else {
    const double sigma_min = min_sigma(analysis, f.k, target);
    const OptimalThreshold best = optimal_tau(analysis, f.k, target);
    report["min_sigma"] = sigma_min;
    report["sigma"] = best.sigma;
    report["tau"] = best.tau;
    report["total_noise"] = TotalNoise(analysis, best.sigma, f.k);
  }
  out << report.dump() << "\n";
  return kExitOk;
}

struct CurveFlags {
  std::int64_t k = 0;
  double epsilon = 0.0;
  double delta = 0.0;
  double noise_min = 0.0;
  double noise_max = 0.0;
  int steps = 0;
  std::string out = "-";
};

struct CurveRow {
  double total_noise = 0.0;
  // NaN marks an infeasible cell.
  double gshm_add = 0.0;
  double gshm_exact = 0.0;
  double csh_add = 0.0;
  double csh_tight = 0.0;
};

inline double TauOrNan(Analysis a, std::int64_t k, double sigma, const PrivacyParams& target) {
  try {
    return min_tau(a, k, sigma, target);
  } catch (const InfeasibleError&) {
    return std::numeric_limits<double>::quiet_NaN();
  }
}

inline std::vector<CurveRow> ComputeCurve(std::int64_t k, const PrivacyParams& target,
                                          double noise_min, double noise_max, int steps) {
  if (k < 1) throw InvalidArgument("--k must be at least 1");
  target.Validate();
  if (!(noise_min > 0.0) || !(noise_min < noise_max)) {
    throw InvalidArgument("need 0 < --noise-min < --noise-max");
  }
  if (steps < 2) throw InvalidArgument("--steps must be at least 2");
  std::vector<CurveRow> rows(static_cast<std::size_t>(steps));
  std::atomic<int> next{0};
  auto work = [&] {
    for (int i = next++; i < steps; i = next++) {
      CurveRow& row = rows[static_cast<std::size_t>(i)];
      row.total_noise = noise_min + (noise_max - noise_min) * i / (steps - 1);
      const double sigma_csh = sigma_from_total_noise_csh(row.total_noise, k);
      row.gshm_add = TauOrNan(Analysis::kGshmAdd, k, row.total_noise, target);
      row.gshm_exact = TauOrNan(Analysis::kGshmExact, k, row.total_noise, target);
      row.csh_add = TauOrNan(Analysis::kCshAdd, k, sigma_csh, target);
      row.csh_tight = TauOrNan(Analysis::kCshTight, k, sigma_csh, target);
    }
  };
  const int workers = std::min(ThreadCount(), steps);
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  return rows;
}

inline std::string FormatCell(double v) {
  if (std::isnan(v)) return "";
  std::ostringstream os;
  os << std::setprecision(12) << v;
  return os.str();
}

inline std::string CurveCsv(const std::vector<CurveRow>& rows) {
  std::ostringstream os;
  os << kCurveHeader << "\n";
  for (const auto& r : rows) {
    os << FormatCell(r.total_noise) << "," << FormatCell(r.gshm_add) << ","
       << FormatCell(r.gshm_exact) << "," << FormatCell(r.csh_add) << ","
       << FormatCell(r.csh_tight) << "\n";
  }
  return os.str();
}

inline int CmdCurve(const CurveFlags& f, std::ostream& out) {
  const auto rows = ComputeCurve(f.k, {f.epsilon, f.delta}, f.noise_min, f.noise_max, f.steps);
  const std::string csv = CurveCsv(rows);
  if (f.out == "-") {
    out << csv;
  } else {
    write_text_file(f.out, csv);
  }
  return kExitOk;
}

struct ReleaseFlags {
  std::string input;
  std::string mechanism;
  std::int64_t k = 0;
  double sigma = 0.0;
  double tau = 0.0;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string receipt;
  double epsilon = 1.0;
  bool round = false;
};

// Accepts either a histogram or a dataset file.
inline SparseHistogram LoadHistogramInput(const std::string& path) {
  const Json j = read_json_file(path);
  if (j.is_object() && j.contains("users")) return build_histogram(dataset_from_json(j));
  return histogram_from_json(j);
}

inline int CmdRelease(const ReleaseFlags& f, std::ostream& out) {
  const SparseHistogram hist = LoadHistogramInput(f.input);
  const MechanismConfig config{f.k, f.sigma, f.tau};
  const std::uint64_t seed = f.seed ? *f.seed : EntropySeed();
  Rng rng(seed);
  if (f.round && f.mechanism != "discrete-csh") {
    throw InvalidArgument("--round applies only to discrete-csh");
  }
  const ReleaseReceipt receipt =
      release_with_receipt(f.mechanism, hist, config, f.epsilon, rng, f.round);
  write_json_file(f.out, noisy_histogram_to_json(receipt.output));
  const std::string receipt_path = f.receipt.empty() ? f.out + ".receipt.json" : f.receipt;
  write_json_file(receipt_path, receipt_to_json(receipt));
  out << Json{{"released", receipt.output.size()}, {"seed", seed}, {"out", f.out},
              {"receipt", receipt_path}}
             .dump()
      << "\n";
  return kExitOk;
}

struct AuditFlags {
  std::int64_t k = 0;
  std::int64_t j = 0;
  double sigma = 0.0;
  double tau = 0.0;
  double epsilon = 1.0;
  std::int64_t trials = 1000000;
  std::uint64_t seed = 1;
  bool hockey_stick = false;
  // Test hook: scales every analytic bound by this factor before comparing.
  double corrupt_bound = 1.0;
};

inline int CmdAudit(const AuditFlags& f, std::ostream& out) {
  if (f.k < 1) throw InvalidArgument("--k must be at least 1");
  const std::int64_t j = f.j > 0 ? f.j : f.k;
  if (f.hockey_stick && f.k > 2) {
    throw InvalidArgument("--hockey-stick needs k <= 2");
  }
  bool all_pass = true;
  const McEstimate mc = mc_delta_inf(f.k, j, f.sigma, f.tau, f.trials, f.seed);
  const double bound = delta_inf_bound(f.k, j, f.sigma, f.tau) * f.corrupt_bound;
  const bool mc_pass = mc.estimate <= bound + 4.0 * mc.std_error;
  all_pass = all_pass && mc_pass;
  out << Json{{"check", "mc_delta_inf"}, {"k", f.k}, {"j", j}, {"sigma", f.sigma},
              {"tau", f.tau}, {"trials", mc.trials}, {"estimate", mc.estimate},
              {"std_error", mc.std_error}, {"bound", bound},
              {"result", mc_pass ? "PASS" : "FAIL"}}
             .dump()
      << "\n";
  if (f.hockey_stick) {
    const MechanismConfig config{f.k, f.sigma, f.tau};
    const double tight = csh_tight_delta_value(config, f.epsilon) * f.corrupt_bound;
    const double add = csh_add_deltas(config, f.epsilon).delta_total * f.corrupt_bound;
    for (NeighborCase c :
         {NeighborCase::kSuperset, NeighborCase::kSubset, NeighborCase::kSameSupport}) {
      const double hs = hockey_stick_csh(f.k, f.sigma, f.tau, f.epsilon, c);
      const bool pass = hs <= tight + 2e-7 && tight <= add + 2e-7;
      all_pass = all_pass && pass;
      out << Json{{"check", "hockey_stick"}, {"case", to_string(c)}, {"k", f.k},
                  {"sigma", f.sigma}, {"tau", f.tau}, {"epsilon", f.epsilon},
                  {"divergence", hs}, {"csh_tight", tight}, {"csh_add", add},
                  {"result", pass ? "PASS" : "FAIL"}}
                 .dump()
          << "\n";
    }
  }
  return all_pass ? kExitOk : kExitAuditFailed;
}

// Parses argv and runs one subcommand, mapping errors to exit codes.
inline int RunCli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Differentially private sparse histogram release"};
  app.require_subcommand(1);

  CalibrateFlags cal;
  double cal_sigma = 0.0;
  auto* calibrate = app.add_subcommand("calibrate", "Smallest threshold for a privacy target");
  calibrate->add_option("--analysis", cal.analysis, "gshm-add|gshm-exact|csh-add|csh-tight|discrete-csh")
      ->required();
  calibrate->add_option("--k", cal.k, "Sparsity bound")->required();
  calibrate->add_option("--epsilon", cal.epsilon)->required();
  calibrate->add_option("--delta", cal.delta)->required();
  auto* sigma_opt = calibrate->add_option("--sigma", cal_sigma, "Per-coordinate noise");
  calibrate->add_flag("--solve-sigma", cal.solve_sigma, "Report the smallest feasible sigma");
  calibrate->add_flag("--optimize", cal.optimize, "Pick sigma minimising the threshold");

  CurveFlags cur;
  auto* curve = app.add_subcommand("curve", "Minimum threshold against total noise (CSV)");
  curve->add_option("--k", cur.k)->required();
  curve->add_option("--epsilon", cur.epsilon)->required();
  curve->add_option("--delta", cur.delta)->required();
  curve->add_option("--noise-min", cur.noise_min)->required();
  curve->add_option("--noise-max", cur.noise_max)->required();
  curve->add_option("--steps", cur.steps)->required();
  curve->add_option("--out", cur.out, "Output CSV path, '-' for stdout");

  ReleaseFlags rel;
  std::uint64_t rel_seed = 0;
  auto* release = app.add_subcommand("release", "Run a release mechanism");
  release->add_option("--input", rel.input, "Histogram or dataset JSON")->required();
  release->add_option("--mechanism", rel.mechanism, "gshm|csh|topk|discrete-csh")->required();
  release->add_option("--k", rel.k)->required();
  release->add_option("--sigma", rel.sigma)->required();
  release->add_option("--tau", rel.tau)->required();
  auto* seed_opt = release->add_option("--seed", rel_seed);
  release->add_option("--out", rel.out)->required();
  release->add_option("--receipt", rel.receipt, "Receipt path (default <out>.receipt.json)");
  release->add_option("--epsilon", rel.epsilon, "Epsilon for the receipt (default 1)");
  release->add_flag("--round", rel.round, "Round discrete outputs up to integers");

  AuditFlags aud;
  auto* audit = app.add_subcommand("audit", "Check analytic bounds against oracles");
  audit->add_option("--k", aud.k)->required();
  audit->add_option("--j", aud.j, "Coordinates in the tail event (default k)");
  audit->add_option("--sigma", aud.sigma)->required();
  audit->add_option("--tau", aud.tau)->required();
  audit->add_option("--epsilon", aud.epsilon);
  audit->add_option("--trials", aud.trials);
  audit->add_option("--seed", aud.seed);
  audit->add_flag("--hockey-stick", aud.hockey_stick, "Also run the k <= 2 divergence oracle");
  audit->add_option("--corrupt-bound", aud.corrupt_bound)->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitPrecondition;
  }

  try {
    if (calibrate->parsed()) {
      if (sigma_opt->count() > 0) cal.sigma = cal_sigma;
      return CmdCalibrate(cal, out);
    }
    if (curve->parsed()) return CmdCurve(cur, out);
    if (release->parsed()) {
      if (seed_opt->count() > 0) rel.seed = rel_seed;
      return CmdRelease(rel, out);
    }
    if (audit->parsed()) return CmdAudit(aud, out);
  } catch (const InfeasibleError& e) {
    err << "infeasible: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const IoError& e) {
    err << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitPrecondition;
  }
  err << "error: no subcommand\n";
  return kExitPrecondition;
}

}  // namespace dpsh::cli

#endif  // DPSH_TOOLS_CLI_COMMANDS_HPP_
