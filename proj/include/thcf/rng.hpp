// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <cstdint>
#include <random>

#include "thcf/types.hpp"

namespace thcf {

using Rng = std::mt19937_64;

// Independent sub-streams derived from one experiment seed. Each component
// draws only from its own stream, so changing one component's consumption
// never perturbs another.
enum class Stream : std::uint32_t {
  kTopology = 1,
  kStatistics = 2,
  kFading = 3,
  kPhases = 4,
  kTest = 99,
};

Rng make_stream(std::uint64_t seed, Stream stream);

// CN(0, variance) sample.
cplx complex_normal(Rng& rng, double variance = 1.0);

}  // namespace thcf
