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

#include "thcf/ssca.hpp"

#include <cmath>
#include <cstring>
#include <random>

#include <Eigen/Eigenvalues>

#include "thcf/wmmse.hpp"

namespace thcf {

double ScheduleSpec::rho(int t) const { return std::min(1.0, rho_scale * std::pow(t + 1.0, -rho_exponent)); }

double ScheduleSpec::gamma(int t) const { return std::min(1.0, gamma_scale * std::pow(t + 1.0, -gamma_exponent)); }

int ScheduleSpec::J(int t) const { return std::min(J_cap, J0 + t / std::max(1, J_period)); }

void ScheduleSpec::validate() const {
  if (!(rho_scale > 0) || !(gamma_scale > 0)) throw Error("schedules: scales must be positive");
  if (!(rho_exponent > 0.5 && rho_exponent < 1.0)) throw Error("schedules: rho_exponent must lie in (0.5, 1)");
  if (!(gamma_exponent > rho_exponent && gamma_exponent <= 1.0))
    throw Error("schedules: gamma_exponent must lie in (rho_exponent, 1]");
  if (J0 < 0 || J_cap < J0 || J_period < 1) throw Error("schedules: need 0 <= J0 <= J_cap and J_period >= 1");
  if (!(tau > 0)) throw Error("schedules: tau must be positive");
}

ScheduleSpec default_schedules() { return ScheduleSpec{}; }

RVec update_rate_estimate(const RVec& rhat, const std::vector<RVec>& frame_rates, double rho) {
  if (frame_rates.empty()) throw Error("update_rate_estimate: empty frame");
  RVec mean = RVec::Zero(rhat.size());
  for (const auto& r : frame_rates) mean += r;
  mean /= static_cast<double>(frame_rates.size());
  return (1.0 - rho) * rhat + rho * mean;
}

GradEstimate update_grad_estimate(const RMat& Fhat_prev, const RMat& J_sample, double rho, const RVec& rhat,
                                  const UtilitySpec& spec) {
  GradEstimate out;
  out.Fhat = (1.0 - rho) * Fhat_prev + rho * J_sample;
  out.f = out.Fhat * utility_and_gradient(rhat, spec).grad;
  return out;
}

RVec surrogate_argmax(const RVec& theta, const RVec& f, double tau) {
  if (!(tau > 0)) throw Error("surrogate_argmax: tau must be positive");
  return (theta + f / (2.0 * tau)).cwiseMax(0.0).cwiseMin(kTwoPi);
}

void averaging_updates(LongTermState& state, const RVec& theta_bar, const RVec& mu_bar, double gamma) {
  if (!(gamma > 0 && gamma <= 1)) throw Error("averaging_updates: gamma must lie in (0, 1]");
  // Exact arithmetic keeps the combination in the box; the clamp removes roundoff.
  state.theta = ((1.0 - gamma) * state.theta + gamma * theta_bar).cwiseMax(0.0).cwiseMin(kTwoPi);
  state.mu = (1.0 - gamma) * state.mu + gamma * mu_bar;
  ++state.t;
}

namespace {

struct SlotInput {
  std::vector<CMat> H_true;
  std::vector<CMat> H_csi;
};

struct SlotOutput {
  ShortTermState st;
  RVec relaxed_bits;
  RVec integer_bits;
};

std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t bytes) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < bytes; ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
  return h;
}

void check_feasible(const ShortTermState& st, const ShortTermProblem& prob) {
  const int L = prob.L();
  for (int k = 0; k < prob.K(); ++k)
    if (st.x.p(k) > prob.P(k) + 1e-12) throw Error("feasibility: power cap exceeded");
  if ((st.x.d.array() < 0).any()) throw Error("feasibility: negative bits");
  for (int n = 0; n < prob.N(); ++n) {
    const double used = 2.0 * prob.B_W * st.x.d.segment(n * L, L).sum();
    if (std::abs(used - prob.C(n)) > 1e-6 * std::max(1.0, prob.C(n))) throw Error("feasibility: fronthaul budget not met");
  }
}

SlotOutput solve_slot(const SlotInput& in, const std::vector<CMat>& F_theta, const ShortTermProblem& base,
                      const EngineOptions& opt, int S) {
  ShortTermProblem prob = base;
  LinkModel link_true;
  switch (opt.front_end) {
    case FrontEnd::kHybrid:
      prob.link = hybrid_link(F_theta, in.H_csi);
      link_true = hybrid_link(F_theta, in.H_true);
      break;
    case FrontEnd::kDigital:
      prob.link = digital_link(in.H_csi);
      link_true = digital_link(in.H_true);
      break;
    case FrontEnd::kEigenAnalog: {
      const std::vector<CMat> F = eigen_analog_filters(in.H_csi, S);
      prob.link = hybrid_link(F, in.H_csi);
      link_true = hybrid_link(F, in.H_true);
      break;
    }
  }

  SlotOutput out;
  if (opt.short_term == ShortTermMode::kFixedUniform) {
    prob.validate();
    const int N = prob.N(), K = prob.K(), L = prob.L(), Se = prob.link.S();
    ShortTermState& st = out.st;
    st.aux.beta = prob.P.cwiseSqrt().cast<cplx>();
    st.aux.w = RVec::Ones(K);
    st.x.p = prob.P;
    st.x.V.assign(static_cast<std::size_t>(N), CMat::Identity(Se, L));
    st.x.d.resize(N * L);
    for (int n = 0; n < N; ++n) st.x.d.segment(n * L, L).setConstant(prob.C(n) / (2.0 * prob.B_W * L));
    update_u(st, prob);
    update_w(st, prob);
  } else {
    if (opt.short_term == ShortTermMode::kInitOnly) prob.J = 0;
    out.st = run_short_term(prob);
  }
  check_feasible(out.st, prob);

  const ShortTermVars& x = out.st.x;
  out.relaxed_bits = sinr_and_rates(link_true, x, true).rate / kLn2;

  // Deployable point: integer bits, exact quantizer, receiver re-fit on the available CSI.
  const int L = prob.L();
  RVec d_int(x.d.size());
  for (int n = 0; n < prob.N(); ++n)
    d_int.segment(n * L, L) = round_bits(x.d.segment(n * L, L), prob.C(n), prob.B_W).cast<double>();
  const StreamModel sm_csi = stream_model(prob.link, x.V, x.p);
  const CMat U = mmse_receivers(sm_csi, quant_noise_variances(sm_csi, d_int, false), out.st.aux.beta);
  const StreamModel sm_true = stream_model(link_true, x.V, x.p);
  out.integer_bits = sinr_and_rates(sm_true, quant_noise_variances(sm_true, d_int, false), x.p, U).rate / kLn2;
  return out;
}

}  // namespace

std::vector<CMat> eigen_analog_filters(const std::vector<CMat>& H, int S) {
  std::vector<CMat> F;
  for (const auto& Hn : H) {
    const auto M = Hn.rows();
    Eigen::SelfAdjointEigenSolver<CMat> eig(Hn * Hn.adjoint());
    if (eig.info() != Eigen::Success) throw Error("eigen_analog_filters: eigen-decomposition failed");
    CMat Fn(M, S);
    const double scale = 1.0 / std::sqrt(static_cast<double>(M));
    for (int j = 0; j < S; ++j)
      for (Eigen::Index i = 0; i < M; ++i) Fn(i, j) = std::polar(scale, std::arg(eig.eigenvectors()(i, M - 1 - j)));
    F.push_back(std::move(Fn));
  }
  return F;
}

RunResult run_two_timescale(const Scenario& scenario, const UtilitySpec& utility, const ScheduleSpec& schedules,
                            const EngineOptions& opt, std::uint64_t seed) {
  schedules.validate();
  const ScenarioConfig& cfg = scenario.config;
  const Dimensions& dims = cfg.dims;
  const int K = dims.K;
  if (cfg.slots_per_frame < 1 || cfg.frames < 1) throw Error("run: need at least one slot and one frame");
  if (opt.csi_delay_slots < 0 || opt.jacobian_delay_slots < 0) throw Error("run: negative delay");
  const bool hybrid = opt.front_end == FrontEnd::kHybrid;
  const bool learn_theta = hybrid && opt.learn_theta;

  const int Ts = cfg.slots_per_frame;
  // The full sample of the frame's first slot arrives jacobian_delay_slots later. It is used if it
  // lands before the frame ends; otherwise the freshest sample available at the frame end is used.
  const int jac_lag = std::max(0, opt.jacobian_delay_slots - Ts + 1);
  const int max_delay = std::max(opt.csi_delay_slots, jac_lag);
  const double rho_slot = opt.rho_slot ? *opt.rho_slot : doppler_correlation(cfg.speed_mps(), cfg.carrier_hz, cfg.slot_s);
  ChannelProcess process(scenario.statistics, dims.M, rho_slot, max_delay + 1, make_stream(seed, Stream::kFading));
  // Same warm-up for every scheme of a scenario, so all see one channel sequence.
  const int warm_up = std::max(max_delay, cfg.full_csi_delay_slots());
  for (int i = 0; i < warm_up; ++i) process.advance();

  RunResult result;
  LongTermState& state = result.state;
  if (hybrid) {
    if (opt.theta0) {
      if (opt.theta0->size() != dims.phases()) throw Error("run: theta0 must have N*M*S entries");
      state.theta = opt.theta0->cwiseMax(0.0).cwiseMin(kTwoPi);
    } else {
      Rng phase_rng = make_stream(seed, Stream::kPhases);
      std::uniform_real_distribution<double> unit(0.0, kTwoPi);
      state.theta.resize(dims.phases());
      for (Eigen::Index i = 0; i < state.theta.size(); ++i) state.theta(i) = unit(phase_rng);
    }
  }
  state.mu = RVec::Ones(K);
  state.rhat = RVec::Zero(K);
  if (learn_theta) state.Fhat = RMat::Zero(dims.phases(), K);

  ShortTermProblem base;
  base.P = RVec::Constant(K, cfg.user_power_w());
  base.C = RVec::Constant(dims.N, cfg.fronthaul_bps);
  base.B_W = cfg.bandwidth_hz;
  base.epsilon = opt.epsilon;

  std::uint64_t hash = 1469598103934665603ULL;
  result.burn_in_slots = std::min(opt.burn_in_frames, cfg.frames) * Ts;

  for (int t = 0; t < cfg.frames; ++t) {
    std::vector<SlotInput> slots(static_cast<std::size_t>(Ts));
    std::vector<CMat> H_jac;
    for (int i = 0; i < Ts; ++i) {
      process.advance();
      SlotInput& s = slots[static_cast<std::size_t>(i)];
      s.H_true = process.current().H;
      s.H_csi = process.delayed_view(opt.csi_delay_slots).H;
      if (i == 0 && learn_theta) H_jac = process.delayed_view(jac_lag).H;
      for (const auto& Hn : s.H_true) hash = fnv1a(hash, Hn.data(), sizeof(cplx) * static_cast<std::size_t>(Hn.size()));
    }

    const std::vector<CMat> F = hybrid ? analog_matrices(state.theta, dims) : std::vector<CMat>{};
    base.mu = state.mu;
    base.J = opt.fixed_J ? *opt.fixed_J : schedules.J(t);

    std::vector<SlotOutput> outs(static_cast<std::size_t>(Ts));
    for_each_index(Ts, opt.exec, [&](int i) {
      outs[static_cast<std::size_t>(i)] = solve_slot(slots[static_cast<std::size_t>(i)], F, base, opt, dims.S);
    });

    std::vector<RVec> frame_rates;
    for (auto& o : outs) {
      frame_rates.push_back(o.relaxed_bits);
      result.relaxed_rates.push_back(std::move(o.relaxed_bits));
      result.integer_rates.push_back(std::move(o.integer_bits));
    }

    const double rho_t = schedules.rho(t);
    const double gamma_t = schedules.gamma(t);
    state.rhat = update_rate_estimate(state.rhat, frame_rates, rho_t);
    const UtilityValue uv = utility_and_gradient(state.rhat, utility);

    RVec theta_bar = state.theta;
    if (learn_theta) {
      const RMat J_sample = rate_jacobian_theta(state.theta, outs.front().st.x, H_jac, dims) / kLn2;
      GradEstimate ge = update_grad_estimate(state.Fhat, J_sample, rho_t, state.rhat, utility);
      state.Fhat = std::move(ge.Fhat);
      result.last_f = ge.f;
      result.last_theta = state.theta;
      if (opt.move_theta) theta_bar = surrogate_argmax(state.theta, result.last_f, schedules.tau);
    }

    FrameRecord rec;
    rec.frame = t;
    rec.utility = uv.g;
    rec.J = opt.short_term == ShortTermMode::kOptimized ? base.J : 0;
    rec.mu_gap = (state.mu - uv.grad).norm();
    const RVec theta_prev = state.theta;
    rec.step_bound = state.theta.size() > 0 ? gamma_t * (theta_bar - theta_prev).norm() : 0.0;
    averaging_updates(state, theta_bar, opt.learn_mu ? uv.grad : state.mu, gamma_t);
    if (state.theta.size() > 0) {
      if ((state.theta.array() < 0).any() || (state.theta.array() > kTwoPi).any())
        throw Error("run: theta left the feasible box");
      rec.step_norm = (state.theta - theta_prev).norm();
    }
    rec.mu_min = state.mu.minCoeff();
    rec.mu_max = state.mu.maxCoeff();
    result.frames.push_back(rec);
  }
  result.channel_hash = hash;
  return result;
}

EngineOptions thcf_options(const ScenarioConfig& config) {
  EngineOptions opt;
  opt.front_end = FrontEnd::kHybrid;
  opt.short_term = ShortTermMode::kOptimized;
  opt.csi_delay_slots = config.effective_csi_delay_slots();
  opt.jacobian_delay_slots = config.full_csi_delay_slots();
  return opt;
}

RunResult run_bcssca(const Scenario& scenario, const UtilitySpec& utility, const ScheduleSpec& schedules,
                     std::uint64_t seed, ExecPolicy exec) {
  EngineOptions opt = thcf_options(scenario.config);
  opt.exec = exec;
  return run_two_timescale(scenario, utility, schedules, opt, seed);
}

}  // namespace thcf
