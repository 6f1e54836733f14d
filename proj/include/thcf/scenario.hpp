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
#include <deque>
#include <vector>

#include "thcf/rng.hpp"
#include "thcf/types.hpp"

namespace thcf {

// Scenario parameters. Defaults are the full-size reference operating point.
struct ScenarioConfig {
  Dimensions dims{4, 64, 16, 8};
  int paths = 6;
  double cell_radius_m = 500.0;
  double angle_spread_deg = 10.0;
  double bandwidth_hz = 1.0e6;
  double noise_psd_dbm_hz = -169.0;
  double user_power_dbm = 23.0;
  double carrier_hz = 2.14e9;
  double speed_kmh = 3.0;
  double slot_s = 1.0e-3;
  int slots_per_frame = 10;
  int frames = 1000;
  double csi_delay_s = 4.0e-3;
  double fronthaul_bps = 64.0e6;

  double noise_floor_dbm() const;
  double user_power_w() const;
  double speed_mps() const { return speed_kmh / 3.6; }
  // Quantization bits per RRH per channel use: C / (2 B_W).
  double bit_budget() const { return fronthaul_bps / (2.0 * bandwidth_hz); }
  // CSI delay in slots for a channel of the given per-RRH dimension; the
  // delay scales with dimension / M and rounds to the nearest slot.
  int csi_delay_slots(int dimension) const;
  int full_csi_delay_slots() const { return csi_delay_slots(dims.M); }
  int effective_csi_delay_slots() const { return csi_delay_slots(dims.S); }
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

struct Topology {
  std::vector<Point2> rrh_positions;
  std::vector<Point2> user_positions;
  double cell_radius = 0.0;

  int N() const { return static_cast<int>(rrh_positions.size()); }
  int K() const { return static_cast<int>(user_positions.size()); }
};

// RRHs equally spaced on the circle of radius cell_radius/2 (RRH 0 on the
// positive x axis); users uniform in the disc.
Topology build_topology(int N, int K, double cell_radius, Rng& rng);

double pathloss_db(double dist_m);

// Half-wavelength ULA response, element m = exp(j pi m sin(phi)).
CVec array_response(double phi, int M);

// Multipath description of one RRH-user link.
struct LinkPaths {
  RVec angles;     // radians, relative to the array broadside
  RVec variances;  // linear power, sums to gain
  double gain = 0.0;
};

struct ChannelStatistics {
  int N = 0;
  int K = 0;
  int paths = 0;
  std::vector<LinkPaths> links;  // index n * K + k

  const LinkPaths& link(int n, int k) const { return links[static_cast<std::size_t>(n * K + k)]; }
};

// Gains are divided by the noise power at the noise floor, so the
// receiver noise is CN(0, I) and transmit powers stay in watts.
ChannelStatistics draw_statistics(const Topology& topology, int paths, double angle_spread_deg,
                                  double noise_floor_dbm, Rng& rng);

// Jakes temporal correlation J0(2 pi f_d lag).
double doppler_correlation(double speed_mps, double carrier_hz, double lag_s);

struct ChannelSample {
  std::vector<CMat> H;  // per RRH, M x K
  long slot_index = 0;
};

// Per-path AR(1) fading over frozen path angles. Keeps the most recent
// history_depth samples for delayed CSI views.
class ChannelProcess {
 public:
  ChannelProcess(ChannelStatistics stats, int M, double rho_slot, int history_depth, Rng rng);

  const ChannelSample& advance();
  const ChannelSample& current() const { return history_.back(); }
  const ChannelSample& delayed_view(int delay_slots) const;

  const ChannelStatistics& statistics() const { return stats_; }
  double rho_slot() const { return rho_; }
  int history_depth() const { return depth_; }
  // Path gains alpha_{n,k,i}; index n * K + k.
  const std::vector<CVec>& path_gains() const { return gains_; }

 private:
  ChannelSample assemble(long slot) const;

  ChannelStatistics stats_;
  int M_;
  double rho_;
  int depth_;
  Rng rng_;
  std::vector<CMat> steering_;  // per link, M x paths
  std::vector<CVec> gains_;
  std::deque<ChannelSample> history_;
};

// One statistics-coherence run: topology plus frozen channel statistics.
struct Scenario {
  ScenarioConfig config;
  Topology topology;
  ChannelStatistics statistics;
};

Scenario make_scenario(const ScenarioConfig& config, std::uint64_t seed);

// Fading process for a scenario; history deep enough for max_delay_slots.
ChannelProcess make_process(const Scenario& scenario, std::uint64_t seed, int max_delay_slots);

}  // namespace thcf
