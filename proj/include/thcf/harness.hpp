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
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "thcf/baselines.hpp"

namespace thcf {

class ConfigError : public Error {
 public:
  using Error::Error;
};

struct SweepSpec {
  std::string parameter = "none";  // none | fronthaul_capacity | antennas_per_rrh | csi_delay_ms
  std::vector<double> values;
};

struct ExperimentConfig {
  ScenarioConfig scenario;
  UtilitySpec utility;
  ScheduleSpec schedules;
  double epsilon = 1e-4;
  int burn_in_frames = 10;
  std::vector<SchemeId> schemes;
  SweepSpec sweep;
  std::vector<std::uint64_t> seeds;
  std::string output_path;
  std::string format = "csv";
  std::vector<std::string> warnings;
};

// Reference operating point: N=4, K=8, M=64, S=16, 1000 frames.
ExperimentConfig default_config();
// "desk" (N=2, K=4, M=16, S=4, 200 frames) or "paper".
void apply_preset(ExperimentConfig& config, const std::string& preset);

// JSON object with optional sections scenario, utility, schedules, solver,
// schemes, sweep, seeds, output, preset, plus a free-text top-level
// comment. Unknown keys are rejected with
// their full path. Empty text yields the defaults.
ExperimentConfig parse_config(const std::string& json_text, const std::optional<std::string>& preset = {});
ExperimentConfig load_config(const std::string& path, const std::optional<std::string>& preset = {});

// Applies one sweep value; C is floored to a whole number of bits per
// channel use with a warning.
ScenarioConfig scenario_for(const ExperimentConfig& config, double sweep_value);
void normalize_budget(ScenarioConfig& scenario, std::vector<std::string>& warnings);

struct ResultRow {
  std::string scheme;
  std::string sweep_parameter;
  double sweep_value = 0.0;
  std::uint64_t seed = 0;
  double sum_rate = 0.0;          // bit/s/Hz, integer bits
  double worst_user_rate = 0.0;
  double pfs_utility = 0.0;
  double relaxed_sum_rate = 0.0;  // relaxed bits
  double relaxed_worst_user_rate = 0.0;
  double relaxed_pfs_utility = 0.0;
  int frames = 0;
  int burn_in_slots = 0;
  std::string channel_hash;
  std::string error;
  std::optional<double> wall_time_s;
};

struct ResultTable {
  std::vector<ResultRow> rows;
  bool has_failures() const;
};

struct RateSummary {
  double sum_rate = 0.0;
  double worst_user_rate = 0.0;
  double pfs_utility = 0.0;
};

// Long-term average per-user rate over slots [burn_in, end).
RateSummary summarize_rates(const std::vector<RVec>& rates, int burn_in_slots, double pfs_epsilon);

struct SweepOptions {
  ExecPolicy exec = ExecPolicy::kOpenMP;
  bool timing = false;
};

ResultTable run_sweep(const ExperimentConfig& config, const SweepOptions& options = {});

// CSV (RFC 4180) or JSON lines; 10 significant digits; row order as given.
std::string format_results(const ResultTable& table, const std::string& format);
void emit_results(const ResultTable& table, const std::string& path, const std::string& format);
ResultTable parse_jsonl(const std::string& text);

std::string format_double(double v);

}  // namespace thcf
