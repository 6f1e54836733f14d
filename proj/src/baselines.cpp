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

#include "thcf/baselines.hpp"

namespace thcf {

std::string scheme_name(SchemeId id) {
  switch (id) {
    case SchemeId::kTHCF: return "THCF";
    case SchemeId::kSCF: return "SCF";
    case SchemeId::kASCF: return "ASCF";
    case SchemeId::kSSCF: return "SSCF";
    case SchemeId::kSCFNoDelay: return "SCF_NO_DELAY";
  }
  throw Error("scheme_name: unknown scheme");
}

SchemeId parse_scheme(const std::string& name) {
  for (SchemeId id : all_schemes())
    if (scheme_name(id) == name) return id;
  throw Error("unknown scheme '" + name + "'");
}

const std::vector<SchemeId>& all_schemes() {
  static const std::vector<SchemeId> ids{SchemeId::kTHCF, SchemeId::kSCF, SchemeId::kASCF, SchemeId::kSSCF,
                                         SchemeId::kSCFNoDelay};
  return ids;
}

EngineOptions scheme_options(SchemeId id, const ScenarioConfig& config) {
  EngineOptions opt = thcf_options(config);
  switch (id) {
    case SchemeId::kTHCF:
      break;
    case SchemeId::kSSCF:
      opt.short_term = ShortTermMode::kInitOnly;
      break;
    case SchemeId::kSCF:
    case SchemeId::kSCFNoDelay:
      opt.front_end = FrontEnd::kDigital;
      opt.learn_theta = false;
      opt.csi_delay_slots = id == SchemeId::kSCF ? config.full_csi_delay_slots() : 0;
      opt.jacobian_delay_slots = 0;
      break;
    case SchemeId::kASCF:
      opt.front_end = FrontEnd::kEigenAnalog;
      opt.short_term = ShortTermMode::kFixedUniform;
      opt.learn_theta = false;
      opt.csi_delay_slots = config.full_csi_delay_slots();
      opt.jacobian_delay_slots = 0;
      break;
  }
  return opt;
}

RunResult run_scheme(SchemeId id, const Scenario& scenario, const UtilitySpec& utility,
                     const ScheduleSpec& schedules, std::uint64_t seed, ExecPolicy exec) {
  EngineOptions opt = scheme_options(id, scenario.config);
  opt.exec = exec;
  return run_two_timescale(scenario, utility, schedules, opt, seed);
}

RunResult run_scf(const Scenario& scenario, const UtilitySpec& utility, const ScheduleSpec& schedules,
                  DelayMode delay, std::uint64_t seed, ExecPolicy exec) {
  const SchemeId id = delay == DelayMode::kDelayed ? SchemeId::kSCF : SchemeId::kSCFNoDelay;
  return run_scheme(id, scenario, utility, schedules, seed, exec);
}

RunResult run_ascf(const Scenario& scenario, const UtilitySpec& utility, const ScheduleSpec& schedules,
                   std::uint64_t seed, ExecPolicy exec) {
  return run_scheme(SchemeId::kASCF, scenario, utility, schedules, seed, exec);
}

RunResult run_sscf(const Scenario& scenario, const UtilitySpec& utility, const ScheduleSpec& schedules,
                   std::uint64_t seed, ExecPolicy exec) {
  return run_scheme(SchemeId::kSSCF, scenario, utility, schedules, seed, exec);
}

}  // namespace thcf
