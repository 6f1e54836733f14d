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

#include <functional>
#include <vector>

#include "thcf/wmmse.hpp"

namespace thcf {

enum class ExecPolicy { kSerial, kOpenMP };

// Runs body(i) for i in [0, count). The OpenMP policy falls back to a serial
// loop inside an enclosing parallel region. The first exception (lowest i)
// is rethrown after all iterations finish.
void for_each_index(int count, ExecPolicy policy, const std::function<void(int)>& body);

// Independent short-term solves, one per problem.
std::vector<ShortTermState> solve_slots(const std::vector<ShortTermProblem>& problems, ExecPolicy policy);

// Thread count from THCF_NUM_THREADS, else the OpenMP default.
int configured_threads();
void apply_thread_config();

}  // namespace thcf
