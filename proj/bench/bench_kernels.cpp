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

// Serial reference vs OpenMP batch of short-term solves at desk scale.

#include <benchmark/benchmark.h>

#include "thcf/kernels.hpp"
#include "thcf/scenario.hpp"

namespace {

std::vector<thcf::ShortTermProblem> make_batch(int count) {
  thcf::ScenarioConfig cfg;
  cfg.dims = thcf::Dimensions{2, 16, 4, 4};
  const thcf::Scenario sc = thcf::make_scenario(cfg, 11);
  thcf::ChannelProcess proc = thcf::make_process(sc, 11, 0);
  thcf::Rng rng = thcf::make_stream(11, thcf::Stream::kTest);
  std::uniform_real_distribution<double> unit(0.0, thcf::kTwoPi);
  thcf::RVec theta(cfg.dims.phases());
  for (auto& v : theta) v = unit(rng);
  const auto F = thcf::analog_matrices(theta, cfg.dims);
  std::vector<thcf::ShortTermProblem> batch;
  for (int i = 0; i < count; ++i) {
    thcf::ShortTermProblem p;
    p.link = thcf::hybrid_link(F, proc.advance().H);
    p.mu = thcf::RVec::Ones(cfg.dims.K);
    p.P = thcf::RVec::Constant(cfg.dims.K, cfg.user_power_w());
    p.C = thcf::RVec::Constant(cfg.dims.N, cfg.fronthaul_bps);
    p.B_W = cfg.bandwidth_hz;
    p.J = 10;
    batch.push_back(std::move(p));
  }
  return batch;
}

void BM_SolveSlots(benchmark::State& state, thcf::ExecPolicy policy) {
  const auto batch = make_batch(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(thcf::solve_slots(batch, policy));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK_CAPTURE(BM_SolveSlots, serial, thcf::ExecPolicy::kSerial)->Arg(10)->Arg(40);
BENCHMARK_CAPTURE(BM_SolveSlots, openmp, thcf::ExecPolicy::kOpenMP)->Arg(10)->Arg(40);

BENCHMARK_MAIN();
