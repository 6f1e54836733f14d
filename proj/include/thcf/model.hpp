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

#include <vector>

#include "thcf/types.hpp"

namespace thcf {

// Short-term control variables of one slot.
//   p: K powers (watts). V: per RRH, S x L digital filter.
//   d: N*L relaxed bit counts, stream (n, l) at n*L + l.
//   U: (N*L) x K, column k is the receiver of user k.
struct ShortTermVars {
  RVec p;
  std::vector<CMat> V;
  RVec d;
  CMat U;
};

// Channel after the (possibly absent) analog stage.
//   G[n] = F_n^H H_n (S x K), R[n] = F_n^H F_n (S x S).
struct LinkModel {
  std::vector<CMat> G;
  std::vector<CMat> R;

  int N() const { return static_cast<int>(G.size()); }
  int S() const { return G.empty() ? 0 : static_cast<int>(G.front().rows()); }
  int K() const { return G.empty() ? 0 : static_cast<int>(G.front().cols()); }
};

// Per-stream quantities for fixed V and p.
//   E(n*L+l, k) = v_{n,l}^H g_{n,k}; W = blockdiag(V_n^H R_n V_n);
//   power(i) = sum_k p_k |E(i,k)|^2 + W(i,i), the quantizer input power.
struct StreamModel {
  CMat E;
  CMat W;
  RVec power;
  int L = 0;
};

// theta_n holds RRH n's M*S phases, entry (i, j) at j*M + i.
CMat analog_matrix(const RVec& theta_n, int M, int S);
std::vector<CMat> analog_matrices(const RVec& theta, const Dimensions& dims);
CMat effective_channel(const CMat& F, const CMat& H);

LinkModel hybrid_link(const std::vector<CMat>& F, const std::vector<CMat>& H);
// Fully digital front end (F = I_M).
LinkModel digital_link(const std::vector<CMat>& H);

StreamModel stream_model(const LinkModel& link, const std::vector<CMat>& V, const RVec& p);

// q(i) = 3 * 4^{-d(i)} * power(i). In the exact model a stream with d = 0
// has infinite variance.
RVec quant_noise_variances(const StreamModel& sm, const RVec& d, bool relaxed);
RVec quant_noise_variances(const RVec& theta, const ShortTermVars& x, const std::vector<CMat>& H,
                           const Dimensions& dims, bool relaxed);

// Receiver columns (E P E^H + W + Q)^{-1} e_k beta_k. Streams with infinite
// q are excluded and get zero weight.
CMat mmse_receivers(const StreamModel& sm, const RVec& q, const CVec& beta);

struct RateReport {
  RVec sinr;
  RVec rate;  // nats
};

RateReport sinr_and_rates(const StreamModel& sm, const RVec& q, const RVec& p, const CMat& U);
RateReport sinr_and_rates(const LinkModel& link, const ShortTermVars& x, bool relaxed);
RateReport sinr_and_rates(const RVec& theta, const ShortTermVars& x, const std::vector<CMat>& H,
                          const Dimensions& dims, bool relaxed = true);

// MSE per user with p = |beta|^2 and relaxed quantization noise.
RVec mse_per_user(const LinkModel& link, const CVec& beta, const std::vector<CMat>& V, const RVec& d,
                  const CMat& U);

// d r_k / d theta in nats, (N*M*S) x K, relaxed model, V, d, U and p held fixed.
RMat rate_jacobian_theta(const RVec& theta, const ShortTermVars& x, const std::vector<CMat>& H,
                         const Dimensions& dims);

struct UtilitySpec {
  enum class Kind { kSumRate, kProportionalFair };
  Kind kind = Kind::kProportionalFair;
  double pfs_epsilon = 1e-2;
};

struct UtilityValue {
  double g = 0.0;
  RVec grad;
};

UtilityValue utility_and_gradient(const RVec& rbar, const UtilitySpec& spec);

// Integer bits for one RRH: floor where the fractional part is <= alpha,
// ceil otherwise, alpha bisected so the total equals C / (2 B_W). Equal
// fractional parts that straddle the target are ceiled in index order.
Eigen::VectorXi round_bits(const RVec& d_star, double C, double B_W);

}  // namespace thcf
