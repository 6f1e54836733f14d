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

#include "thcf/rng.hpp"

#include <cmath>

namespace thcf {

Rng make_stream(std::uint64_t seed, Stream stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), 0x7463u};
  return Rng(seq);
}

cplx complex_normal(Rng& rng, double variance) {
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5 * variance));
  const double re = normal(rng);
  const double im = normal(rng);
  return {re, im};
}

}  // namespace thcf
