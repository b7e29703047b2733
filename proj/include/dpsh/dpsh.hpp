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

// Umbrella header for the dpsh library.

#ifndef DPSH_DPSH_HPP_
#define DPSH_DPSH_HPP_

#include "dpsh/accounting.hpp"
#include "dpsh/calibration.hpp"
#include "dpsh/core_model.hpp"
#include "dpsh/discrete_gaussian.hpp"
#include "dpsh/errors.hpp"
#include "dpsh/json_io.hpp"
#include "dpsh/mechanisms.hpp"
#include "dpsh/normal.hpp"
#include "dpsh/oracles.hpp"
#include "dpsh/random.hpp"

#endif  // DPSH_DPSH_HPP_
