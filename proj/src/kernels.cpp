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

#include "thcf/kernels.hpp"

#include <cstdlib>
#include <exception>
#include <string>

#include <omp.h>

namespace thcf {

void for_each_index(int count, ExecPolicy policy, const std::function<void(int)>& body) {
  if (count <= 0) return;
  if (policy == ExecPolicy::kSerial || omp_in_parallel() || count == 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
#pragma omp parallel for schedule(dynamic, 1)
  for (int i = 0; i < count; ++i) {
    try {
      body(i);
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::vector<ShortTermState> solve_slots(const std::vector<ShortTermProblem>& problems, ExecPolicy policy) {
  std::vector<ShortTermState> out(problems.size());
  for_each_index(static_cast<int>(problems.size()), policy,
                 [&](int i) { out[static_cast<std::size_t>(i)] = run_short_term(problems[static_cast<std::size_t>(i)]); });
  return out;
}

int configured_threads() {
  if (const char* env = std::getenv("THCF_NUM_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n >= 1) return n;
    } catch (const std::exception&) {
    }
    throw Error(std::string("THCF_NUM_THREADS must be a positive integer, got '") + env + "'");
  }
  return omp_get_max_threads();
}

void apply_thread_config() { omp_set_num_threads(configured_threads()); }

}  // namespace thcf
