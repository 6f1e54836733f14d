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
#include <string>
#include <vector>

#include "thcf/ssca.hpp"

namespace thcf {

enum class SchemeId { kTHCF, kSCF, kASCF, kSSCF, kSCFNoDelay };

std::string scheme_name(SchemeId id);
SchemeId parse_scheme(const std::string& name);
const std::vector<SchemeId>& all_schemes();

enum class DelayMode { kDelayed, kZeroDelay };

// Every scheme is an instance of the two-timescale engine with its own
// front end and short-term mode; all draw channels from the same seed.
EngineOptions scheme_options(SchemeId id, const ScenarioConfig& config);

RunResult run_scf(const Scenario& scenario, const UtilitySpec& utility, const ScheduleSpec& schedules,
                  DelayMode delay, std::uint64_t seed, ExecPolicy exec = ExecPolicy::kOpenMP);
RunResult run_ascf(const Scenario& scenario, const UtilitySpec& utility, const ScheduleSpec& schedules,
                   std::uint64_t seed, ExecPolicy exec = ExecPolicy::kOpenMP);
RunResult run_sscf(const Scenario& scenario, const UtilitySpec& utility, const ScheduleSpec& schedules,
                   std::uint64_t seed, ExecPolicy exec = ExecPolicy::kOpenMP);

RunResult run_scheme(SchemeId id, const Scenario& scenario, const UtilitySpec& utility,
                     const ScheduleSpec& schedules, std::uint64_t seed, ExecPolicy exec = ExecPolicy::kOpenMP);

}  // namespace thcf
