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

#include "thcf/scenario.hpp"

#include <cmath>
#include <utility>

namespace thcf {

namespace {

constexpr double kMinUserDistanceM = 10.0;

double wrap_angle(double a) {
  a = std::fmod(a + kPi, kTwoPi);
  if (a < 0) a += kTwoPi;
  return a - kPi;
}

}  // namespace

double ScenarioConfig::noise_floor_dbm() const {
  return noise_psd_dbm_hz + 10.0 * std::log10(bandwidth_hz);
}

double ScenarioConfig::user_power_w() const { return std::pow(10.0, (user_power_dbm - 30.0) / 10.0); }

int ScenarioConfig::csi_delay_slots(int dimension) const {
  const double slots = static_cast<double>(dimension) / dims.M * csi_delay_s / slot_s;
  return std::max(0, static_cast<int>(std::lround(slots)));
}

Topology build_topology(int N, int K, double cell_radius, Rng& rng) {
  if (N < 1 || K < 1 || !(cell_radius > 0)) throw Error("build_topology: need N, K >= 1 and radius > 0");
  Topology topo;
  topo.cell_radius = cell_radius;
  for (int n = 0; n < N; ++n) {
    const double a = kTwoPi * n / N;
    topo.rrh_positions.push_back({0.5 * cell_radius * std::cos(a), 0.5 * cell_radius * std::sin(a)});
  }
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  while (topo.user_positions.size() < static_cast<std::size_t>(K)) {
    const double r = cell_radius * std::sqrt(unit(rng));
    const double a = kTwoPi * unit(rng);
    const Point2 p{r * std::cos(a), r * std::sin(a)};
    bool too_close = false;
    for (const auto& q : topo.rrh_positions)
      too_close = too_close || std::hypot(p.x - q.x, p.y - q.y) < kMinUserDistanceM;
    if (!too_close) topo.user_positions.push_back(p);
  }
  return topo;
}

double pathloss_db(double dist_m) {
  if (!(dist_m > 0)) throw Error("pathloss_db: distance must be positive");
  return 30.6 + 36.7 * std::log10(dist_m);
}

CVec array_response(double phi, int M) {
  CVec a(M);
  const double s = std::sin(phi);
  for (int m = 0; m < M; ++m) a(m) = std::polar(1.0, kPi * m * s);
  return a;
}

ChannelStatistics draw_statistics(const Topology& topology, int paths, double angle_spread_deg,
                                  double noise_floor_dbm, Rng& rng) {
  if (paths < 1) throw Error("draw_statistics: need at least one path");
  ChannelStatistics stats;
  stats.N = topology.N();
  stats.K = topology.K();
  stats.paths = paths;
  const double noise_w = std::pow(10.0, (noise_floor_dbm - 30.0) / 10.0);
  // Laplacian with standard deviation equal to the angle spread.
  const double scale = angle_spread_deg * kPi / 180.0 / std::sqrt(2.0);
  std::exponential_distribution<double> expo(1.0);
  std::bernoulli_distribution coin(0.5);

  for (int n = 0; n < stats.N; ++n) {
    const Point2 rrh = topology.rrh_positions[static_cast<std::size_t>(n)];
    // Broadside faces the cell centre.
    const double broadside = std::atan2(-rrh.y, -rrh.x);
    for (int k = 0; k < stats.K; ++k) {
      const Point2 ue = topology.user_positions[static_cast<std::size_t>(k)];
      const double dist = std::hypot(ue.x - rrh.x, ue.y - rrh.y);
      const double mean_angle = wrap_angle(std::atan2(ue.y - rrh.y, ue.x - rrh.x) - broadside);
      LinkPaths link;
      link.gain = std::pow(10.0, -pathloss_db(dist) / 10.0) / noise_w;
      link.angles.resize(paths);
      link.variances.resize(paths);
      for (int i = 0; i < paths; ++i) {
        const double offset = scale * expo(rng);
        link.angles(i) = mean_angle + (coin(rng) ? offset : -offset);
        link.variances(i) = expo(rng);
      }
      link.variances *= link.gain / link.variances.sum();
      stats.links.push_back(std::move(link));
    }
  }
  return stats;
}

double doppler_correlation(double speed_mps, double carrier_hz, double lag_s) {
  if (speed_mps < 0 || carrier_hz < 0 || lag_s < 0) throw Error("doppler_correlation: negative input");
  const double fd = speed_mps * carrier_hz / kSpeedOfLight;
  return std::cyl_bessel_j(0.0, kTwoPi * fd * lag_s);
}

ChannelProcess::ChannelProcess(ChannelStatistics stats, int M, double rho_slot, int history_depth, Rng rng)
    : stats_(std::move(stats)), M_(M), rho_(rho_slot), depth_(std::max(1, history_depth)), rng_(std::move(rng)) {
  if (M < 1) throw Error("ChannelProcess: M must be >= 1");
  if (rho_ < -1.0 || rho_ > 1.0) throw Error("ChannelProcess: rho_slot outside [-1, 1]");
  for (const auto& link : stats_.links) {
    CMat A(M_, stats_.paths);
    for (int i = 0; i < stats_.paths; ++i) A.col(i) = array_response(link.angles(i), M_);
    steering_.push_back(std::move(A));
    CVec g(stats_.paths);
    for (int i = 0; i < stats_.paths; ++i) g(i) = complex_normal(rng_, link.variances(i));
    gains_.push_back(std::move(g));
  }
  history_.push_back(assemble(0));
}

ChannelSample ChannelProcess::assemble(long slot) const {
  ChannelSample sample;
  sample.slot_index = slot;
  sample.H.assign(static_cast<std::size_t>(stats_.N), CMat::Zero(M_, stats_.K));
  for (int n = 0; n < stats_.N; ++n)
    for (int k = 0; k < stats_.K; ++k) {
      const auto idx = static_cast<std::size_t>(n * stats_.K + k);
      sample.H[static_cast<std::size_t>(n)].col(k) = steering_[idx] * gains_[idx];
    }
  return sample;
}

const ChannelSample& ChannelProcess::advance() {
  const double innovation = std::sqrt(std::max(0.0, 1.0 - rho_ * rho_));
  for (std::size_t idx = 0; idx < gains_.size(); ++idx) {
    const RVec& var = stats_.links[idx].variances;
    for (int i = 0; i < stats_.paths; ++i)
      gains_[idx](i) = rho_ * gains_[idx](i) + innovation * complex_normal(rng_, var(i));
  }
  history_.push_back(assemble(history_.back().slot_index + 1));
  while (static_cast<int>(history_.size()) > depth_) history_.pop_front();
  return history_.back();
}

const ChannelSample& ChannelProcess::delayed_view(int delay_slots) const {
  if (delay_slots < 0 || delay_slots >= static_cast<int>(history_.size()))
    throw Error("delayed_view: delay of " + std::to_string(delay_slots) + " slots exceeds history of " +
                std::to_string(history_.size()));
  return history_[history_.size() - 1 - static_cast<std::size_t>(delay_slots)];
}

Scenario make_scenario(const ScenarioConfig& config, std::uint64_t seed) {
  Scenario sc;
  sc.config = config;
  Rng topo_rng = make_stream(seed, Stream::kTopology);
  sc.topology = build_topology(config.dims.N, config.dims.K, config.cell_radius_m, topo_rng);
  Rng stats_rng = make_stream(seed, Stream::kStatistics);
  sc.statistics = draw_statistics(sc.topology, config.paths, config.angle_spread_deg, config.noise_floor_dbm(), stats_rng);
  return sc;
}

ChannelProcess make_process(const Scenario& scenario, std::uint64_t seed, int max_delay_slots) {
  const auto& cfg = scenario.config;
  const double rho = doppler_correlation(cfg.speed_mps(), cfg.carrier_hz, cfg.slot_s);
  return ChannelProcess(scenario.statistics, cfg.dims.M, rho, max_delay_slots + 1, make_stream(seed, Stream::kFading));
}

}  // namespace thcf
