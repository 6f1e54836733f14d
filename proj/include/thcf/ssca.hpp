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
#include <optional>
#include <vector>

#include "thcf/kernels.hpp"
#include "thcf/model.hpp"
#include "thcf/scenario.hpp"

namespace thcf {

// Step sizes rho_t = min(1, rho_scale (t+1)^-rho_exponent), likewise gamma_t;
// inner iterations J_t = min(J_cap, J_0 + floor(t / J_period)).
struct ScheduleSpec {
  double rho_scale = 1.0;
  double rho_exponent = 0.6;
  double gamma_scale = 1.0;
  double gamma_exponent = 0.9;
  int J0 = 10;
  int J_period = 10;
  int J_cap = 50;
  double tau = 1.0;

  double rho(int t) const;
  double gamma(int t) const;
  int J(int t) const;
  // Throws unless the step-size conditions for two-timescale convergence hold:
  // 0.5 < rho_exponent < 1, gamma_exponent in (rho_exponent, 1], tau > 0.
  void validate() const;
};

ScheduleSpec default_schedules();

struct LongTermState {
  RVec theta;
  RVec mu;
  RVec rhat;  // bits
  RMat Fhat;  // d rate (bits) / d theta
  int t = 0;
};

RVec update_rate_estimate(const RVec& rhat, const std::vector<RVec>& frame_rates, double rho);

struct GradEstimate {
  RMat Fhat;
  RVec f;
};

GradEstimate update_grad_estimate(const RMat& Fhat_prev, const RMat& J_sample, double rho, const RVec& rhat,
                                  const UtilitySpec& spec);

// argmax over the box of f^T (theta' - theta) - tau |theta' - theta|^2.
RVec surrogate_argmax(const RVec& theta, const RVec& f, double tau);

void averaging_updates(LongTermState& state, const RVec& theta_bar, const RVec& mu_bar, double gamma);

enum class FrontEnd {
  kHybrid,       // learned phase network F(theta)
  kDigital,      // F = I_M
  kEigenAnalog,  // per-slot phase projection of the dominant eigenvectors
};

enum class ShortTermMode {
  kOptimized,     // J_t WMMSE rounds
  kInitOnly,      // initialization plus one MMSE pass
  kFixedUniform,  // V = stream selection, uniform bits, full power, MMSE receiver
};

// Analog-only filters: entrywise phases of the S dominant eigenvectors of
// H_n H_n^H, scaled by 1/sqrt(M).
std::vector<CMat> eigen_analog_filters(const std::vector<CMat>& H, int S);

struct EngineOptions {
  FrontEnd front_end = FrontEnd::kHybrid;
  ShortTermMode short_term = ShortTermMode::kOptimized;
  bool learn_theta = true;
  bool learn_mu = true;
  bool move_theta = true;  // false keeps the estimators running at a frozen theta
  int csi_delay_slots = 0;       // staleness of the CSI used per slot
  int jacobian_delay_slots = 0;  // arrival delay of the per-frame full CSI sample
  std::optional<double> rho_slot;   // overrides the Doppler correlation
  std::optional<RVec> theta0;       // overrides the random start
  std::optional<int> fixed_J;       // overrides the J schedule
  int burn_in_frames = 10;
  double epsilon = 1e-4;
  ExecPolicy exec = ExecPolicy::kOpenMP;
};

struct FrameRecord {
  int frame = 0;
  double utility = 0.0;    // g(rhat)
  double step_norm = 0.0;  // |theta^{t+1} - theta^t|
  double step_bound = 0.0; // gamma_t |theta_bar - theta^t|
  double mu_min = 0.0;
  double mu_max = 0.0;
  double mu_gap = 0.0;     // |mu^t - grad g(rhat^t)|, before averaging
  int J = 0;
};

struct RunResult {
  LongTermState state;
  std::vector<FrameRecord> frames;
  std::vector<RVec> relaxed_rates;  // bits, true channel, per slot
  std::vector<RVec> integer_rates;  // bits, rounded bits and exact quantizer
  RVec last_f;
  RVec last_theta;  // theta^t at which last_f was formed
  std::uint64_t channel_hash = 0;
  int burn_in_slots = 0;
};

// Generic two-timescale loop shared by every scheme.
RunResult run_two_timescale(const Scenario& scenario, const UtilitySpec& utility, const ScheduleSpec& schedules,
                            const EngineOptions& options, std::uint64_t seed);

EngineOptions thcf_options(const ScenarioConfig& config);

// THCF: learned analog phases, optimized short-term variables, effective-CSI delay.
RunResult run_bcssca(const Scenario& scenario, const UtilitySpec& utility, const ScheduleSpec& schedules,
                     std::uint64_t seed, ExecPolicy exec = ExecPolicy::kOpenMP);

}  // namespace thcf
