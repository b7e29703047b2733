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

// Calibrates the correlated stability histogram for a small histogram and
// releases it once.

#include <iostream>

#include "dpsh/dpsh.hpp"

int main() {
  const dpsh::SparseHistogram hist = {{"apple", 120}, {"banana", 48}, {"cherry", 3}};
  const std::int64_t k = 4;
  const dpsh::PrivacyParams target{1.0, 1e-6};

  const double sigma = 1.2 * dpsh::min_sigma(dpsh::Analysis::kCshTight, k, target);
  const double tau = dpsh::min_tau(dpsh::Analysis::kCshTight, k, sigma, target);
  std::cout << "sigma " << sigma << ", tau " << tau << "\n";

  dpsh::Rng rng(2026);
  const dpsh::ReleaseReceipt receipt =
      dpsh::release_with_receipt("csh", hist, {k, sigma, tau}, target.epsilon, rng);
  std::cout << dpsh::noisy_histogram_to_json(receipt.output).dump(2) << "\n";
  std::cout << dpsh::receipt_to_json(receipt).dump(2) << "\n";
  return 0;
}
