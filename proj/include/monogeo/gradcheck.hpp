// Copyright 2026 The monogeo Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Finite-difference battery over every analytic gradient of the library.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace monogeo {

struct GradCheckEntry {
  std::string name;
  std::size_t points{0};
  double max_deviation{0};
};

/// Each objective is checked at `points` random points kept away from its
/// kinks by a margin far above the finite-difference step.
std::vector<GradCheckEntry> gradcheck_battery(std::uint64_t seed, std::size_t points,
                                              double step = 1e-5);

}  // namespace monogeo
