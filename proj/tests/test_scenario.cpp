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


#include <cmath>
#include <vector>

#include "doctest.h"
#include "thcf/scenario.hpp"

using namespace thcf;

namespace {

double wrap(double a) { return std::remainder(a, kTwoPi); }

// Deterministic ring of K users at a fixed distance from a single RRH.
Topology ring_topology(int K, double radius) {
  Topology t;
  t.cell_radius = 2 * radius;
  t.rrh_positions.push_back({0.0, 0.0});
  for (int k = 0; k < K; ++k) t.user_positions.push_back({radius * std::cos(kTwoPi * k / K), radius * std::sin(kTwoPi * k / K)});
  return t;
}

}  // namespace

TEST_CASE("pathloss: reference distances") {
  CHECK(pathloss_db(1.0) == doctest::Approx(30.6));
  CHECK(pathloss_db(100.0) == doctest::Approx(30.6 + 73.4));
  CHECK(pathloss_db(1000.0) == doctest::Approx(30.6 + 110.1));
  CHECK_THROWS_AS(pathloss_db(0.0), Error);
}

TEST_CASE("array_response: unit modulus and linear phase") {
  const double phi = 0.37;
  const CVec a = array_response(phi, 9);
  for (int m = 0; m < 9; ++m) {
    CHECK(std::abs(a(m)) == doctest::Approx(1.0));
    CHECK(std::abs(a(m) - std::exp(cplx(0, kPi * m * std::sin(phi)))) < 1e-12);
  }
  const CVec b = array_response(0.0, 4);
  CHECK((b - CVec::Ones(4)).norm() < 1e-15);
}

TEST_CASE("noise floor and power conversions") {
  ScenarioConfig c;
  CHECK(c.noise_floor_dbm() == doctest::Approx(-109.0));
  CHECK(c.user_power_w() == doctest::Approx(0.19953).epsilon(1e-4));
  CHECK(c.bit_budget() == doctest::Approx(32.0));
}

TEST_CASE("csi delay slots scale with the channel dimension") {
  ScenarioConfig c;  // M = 64, S = 16, 4 ms, 1 ms slots
  CHECK(c.full_csi_delay_slots() == 4);
  CHECK(c.effective_csi_delay_slots() == 1);
  c.dims = Dimensions{2, 16, 4, 4};
  c.csi_delay_s = 8e-3;
  CHECK(c.full_csi_delay_slots() == 8);
  CHECK(c.effective_csi_delay_slots() == 2);
  c.csi_delay_s = 1e-3;
  CHECK(c.effective_csi_delay_slots() == 0);  // 0.25 slot rounds down
  c.csi_delay_s = 2e-3;
  CHECK(c.effective_csi_delay_slots() == 1);  // 0.5 slot rounds half away from zero
  c.csi_delay_s = 0.0;
  CHECK(c.full_csi_delay_slots() == 0);
}

TEST_CASE("topology: RRH ring and user placement") {
  Rng rng = make_stream(11, Stream::kTopology);
  const Topology t = build_topology(4, 500, 500.0, rng);
  REQUIRE(t.N() == 4);
  REQUIRE(t.K() == 500);
  for (int n = 0; n < 4; ++n) {
    const auto& p = t.rrh_positions[static_cast<std::size_t>(n)];
    CHECK(std::hypot(p.x, p.y) == doctest::Approx(250.0));
    CHECK(wrap(std::atan2(p.y, p.x) - kTwoPi * n / 4) == doctest::Approx(0.0).epsilon(1e-12));
  }
  int inner = 0;
  for (const auto& u : t.user_positions) {
    CHECK(std::hypot(u.x, u.y) <= 500.0);
    for (const auto& p : t.rrh_positions) CHECK(std::hypot(u.x - p.x, u.y - p.y) >= 10.0);
    inner += std::hypot(u.x, u.y) < 250.0;
  }
  // Uniform in the disc: a quarter of the users fall inside half the radius.
  CHECK(std::abs(inner / 500.0 - 0.25) < 4 * std::sqrt(0.25 * 0.75 / 500));
  CHECK_THROWS_AS(build_topology(0, 3, 500.0, rng), Error);
}

TEST_CASE("statistics: gain normalization and path variances") {
  const Topology t = ring_topology(8, 100.0);
  Rng rng = make_stream(5, Stream::kStatistics);
  const ChannelStatistics s = draw_statistics(t, 6, 10.0, -109.0, rng);
  const double noise_w = std::pow(10.0, (-109.0 - 30.0) / 10.0);
  const double gain = std::pow(10.0, -pathloss_db(100.0) / 10.0) / noise_w;
  for (int k = 0; k < 8; ++k) {
    const LinkPaths& l = s.link(0, k);
    CHECK(l.gain == doctest::Approx(gain));
    CHECK(l.variances.sum() == doctest::Approx(gain));
    CHECK((l.variances.array() > 0).all());
  }
}

TEST_CASE("statistics: broadside faces the cell centre") {
  Topology t;
  t.cell_radius = 500;
  t.rrh_positions.push_back({250.0, 0.0});
  t.user_positions.push_back({0.0, 0.0});
  Rng rng = make_stream(2, Stream::kStatistics);
  const ChannelStatistics s = draw_statistics(t, 2000, 0.0, -109.0, rng);
  // Zero spread: every path arrives from the mean direction, which is broadside.
  CHECK(s.link(0, 0).angles.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("statistics: Laplacian angle offsets have the configured spread") {
  Topology t;
  t.cell_radius = 500;
  t.rrh_positions.push_back({250.0, 0.0});
  t.user_positions.push_back({0.0, 0.0});
  Rng rng = make_stream(3, Stream::kStatistics);
  const int P = 200000;
  const ChannelStatistics s = draw_statistics(t, P, 10.0, -109.0, rng);
  const RVec& a = s.link(0, 0).angles;
  const double sd = std::sqrt(a.squaredNorm() / P) * 180.0 / kPi;
  const double mean_abs = a.cwiseAbs().mean() * 180.0 / kPi;
  CHECK(std::abs(a.mean()) * 180.0 / kPi < 0.1);
  CHECK(sd == doctest::Approx(10.0).epsilon(0.02));
  // Laplacian: E|x| = sd / sqrt(2).
  CHECK(mean_abs == doctest::Approx(10.0 / std::sqrt(2.0)).epsilon(0.02));
}

TEST_CASE("doppler correlation") {
  CHECK(doppler_correlation(3.0 / 3.6, 2.14e9, 4e-3) == doctest::Approx(0.9944).epsilon(1e-3));
  CHECK(doppler_correlation(3.0 / 3.6, 2.14e9, 0.0) == doctest::Approx(1.0));
  CHECK(doppler_correlation(0.0, 2.14e9, 1.0) == doctest::Approx(1.0));
  CHECK(std::abs(doppler_correlation(3.0 / 3.6, 2.14e9, 1.0)) < 0.5);
  CHECK_THROWS_AS(doppler_correlation(-1.0, 2.14e9, 1.0), Error);
}

TEST_CASE("channel process: frozen channel when rho = 1") {
  const Topology t = ring_topology(3, 80.0);
  Rng srng = make_stream(1, Stream::kStatistics);
  ChannelProcess proc(draw_statistics(t, 4, 10.0, -109.0, srng), 8, 1.0, 3, make_stream(1, Stream::kFading));
  const CMat H0 = proc.current().H[0];
  proc.advance();
  proc.advance();
  CHECK((proc.current().H[0] - H0).norm() == 0.0);
}

TEST_CASE("channel process: sample assembly matches the path sum") {
  const Topology t = ring_topology(2, 60.0);
  Rng srng = make_stream(4, Stream::kStatistics);
  const ChannelStatistics stats = draw_statistics(t, 3, 10.0, -109.0, srng);
  ChannelProcess proc(stats, 5, 0.9, 2, make_stream(4, Stream::kFading));
  proc.advance();
  for (int k = 0; k < 2; ++k) {
    CVec h = CVec::Zero(5);
    const CVec& g = proc.path_gains()[static_cast<std::size_t>(k)];
    for (int i = 0; i < 3; ++i) h += g(i) * array_response(stats.link(0, k).angles(i), 5);
    CHECK((proc.current().H[0].col(k) - h).norm() < 1e-12 * h.norm());
  }
}

TEST_CASE("channel process: rho = 0 gives uncorrelated consecutive samples") {
  const Topology t = ring_topology(1, 50.0);
  Rng srng = make_stream(6, Stream::kStatistics);
  const ChannelStatistics stats = draw_statistics(t, 1, 10.0, -109.0, srng);
  const double var = stats.link(0, 0).variances(0);
  ChannelProcess proc(stats, 1, 0.0, 1, make_stream(6, Stream::kFading));
  const int T = 10000;
  cplx cross = 0;
  double power = 0;
  cplx prev = proc.path_gains()[0](0);
  for (int i = 0; i < T; ++i) {
    proc.advance();
    const cplx cur = proc.path_gains()[0](0);
    cross += cur * std::conj(prev);
    power += std::norm(cur);
    prev = cur;
  }
  CHECK(power / T == doctest::Approx(var).epsilon(0.05));
  // Normalized cross-correlation has standard deviation 1/sqrt(T) per component.
  CHECK(std::abs(cross / power) < 4.0 / std::sqrt(T));
}

TEST_CASE("channel process: AR(1) preserves the per-path variance") {
  const Topology t = ring_topology(50, 70.0);
  Rng srng = make_stream(7, Stream::kStatistics);
  const ChannelStatistics stats = draw_statistics(t, 6, 10.0, -109.0, srng);
  ChannelProcess proc(stats, 2, 0.95, 1, make_stream(7, Stream::kFading));
  for (int i = 0; i < 1000; ++i) proc.advance();
  // Ensemble over 300 independent paths, each normalized by its variance.
  double acc = 0;
  int count = 0;
  for (int k = 0; k < 50; ++k)
    for (int i = 0; i < 6; ++i) {
      acc += std::norm(proc.path_gains()[static_cast<std::size_t>(k)](i)) / stats.link(0, k).variances(i);
      ++count;
    }
  // |alpha|^2 / sigma^2 is Exp(1): standard error 1/sqrt(300) ~ 5.8%.
  CHECK(std::abs(acc / count - 1.0) < 3.0 / std::sqrt(count));
}

TEST_CASE("channel process: AR(1) lag correlation equals rho^lag") {
  const Topology t = ring_topology(1, 50.0);
  Rng srng = make_stream(8, Stream::kStatistics);
  const ChannelStatistics stats = draw_statistics(t, 1, 10.0, -109.0, srng);
  const double rho = 0.8;
  ChannelProcess proc(stats, 1, rho, 1, make_stream(8, Stream::kFading));
  const int T = 40000;
  std::vector<cplx> a;
  for (int i = 0; i < T; ++i) a.push_back(proc.advance().H[0](0, 0));
  for (int lag : {1, 3}) {
    cplx c = 0;
    double p = 0;
    for (int i = lag; i < T; ++i) {
      c += a[static_cast<std::size_t>(i)] * std::conj(a[static_cast<std::size_t>(i - lag)]);
      p += std::norm(a[static_cast<std::size_t>(i)]);
    }
    CHECK((c / p).real() == doctest::Approx(std::pow(rho, lag)).epsilon(0.03));
  }
}

TEST_CASE("delayed view") {
  const Topology t = ring_topology(2, 90.0);
  Rng srng = make_stream(9, Stream::kStatistics);
  ChannelProcess proc(draw_statistics(t, 3, 10.0, -109.0, srng), 4, 0.5, 4, make_stream(9, Stream::kFading));
  std::vector<CMat> seen;
  for (int i = 0; i < 6; ++i) seen.push_back(proc.advance().H[0]);
  CHECK((proc.delayed_view(0).H[0] - proc.current().H[0]).norm() == 0.0);
  for (int d = 0; d < 4; ++d) {
    CHECK((proc.delayed_view(d).H[0] - seen[static_cast<std::size_t>(5 - d)]).norm() == 0.0);
    CHECK(proc.delayed_view(d).slot_index == 6 - d);
  }
  CHECK_THROWS_AS(proc.delayed_view(4), Error);
  CHECK_THROWS_AS(proc.delayed_view(-1), Error);
}

TEST_CASE("scenario construction is deterministic per seed") {
  ScenarioConfig c;
  c.dims = Dimensions{2, 16, 4, 4};
  const Scenario a = make_scenario(c, 42);
  const Scenario b = make_scenario(c, 42);
  const Scenario other = make_scenario(c, 43);
  for (int k = 0; k < 4; ++k) {
    CHECK(a.topology.user_positions[static_cast<std::size_t>(k)].x == b.topology.user_positions[static_cast<std::size_t>(k)].x);
    CHECK((a.statistics.link(1, k).angles - b.statistics.link(1, k).angles).norm() == 0.0);
  }
  CHECK(a.topology.user_positions[0].x != other.topology.user_positions[0].x);
  ChannelProcess pa = make_process(a, 42, 4);
  ChannelProcess pb = make_process(b, 42, 4);
  for (int i = 0; i < 5; ++i) CHECK((pa.advance().H[0] - pb.advance().H[0]).norm() == 0.0);
  CHECK(pa.history_depth() == 5);
}
