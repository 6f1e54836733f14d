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

#include <string>
#include <vector>

#include "thcf/model.hpp"

namespace thcf {

// Weighted sum-rate problem of one slot, posed on the effective channel.
struct ShortTermProblem {
  RVec mu;          // K positive weights
  LinkModel link;   // G_n = F_n^H H_n from the CSI available to the optimizer
  RVec P;           // K power caps (watts)
  RVec C;           // N fronthaul capacities (bit/s)
  double B_W = 1.0e6;
  double epsilon = 1e-4;  // proximal weight of the V step
  int J = 10;

  int N() const { return link.N(); }
  int K() const { return link.K(); }
  int L() const { return std::min(link.K(), link.S()); }
  void validate() const;
};

struct WmmseAux {
  CVec beta;  // real-valued amplitudes, p = |beta|^2
  RVec w;
};

struct ShortTermState {
  ShortTermVars x;
  WmmseAux aux;
};

// Quadratic model of the V step: minimize v^H B v - 2 Re(v^H J) + eps |v - v'|^2.
// v stacks v_{n,l} at offset (n*L + l) * S.
struct VNormalEquations {
  CMat B;
  CVec J;
};

ShortTermState init_short_term(const ShortTermProblem& prob);
void update_u(ShortTermState& st, const ShortTermProblem& prob);
void update_w(ShortTermState& st, const ShortTermProblem& prob);
void update_beta(ShortTermState& st, const ShortTermProblem& prob);
void update_v(ShortTermState& st, const ShortTermProblem& prob);
void update_d(ShortTermState& st, const ShortTermProblem& prob);

VNormalEquations v_normal_equations(const ShortTermState& st, const ShortTermProblem& prob, bool with_B = true);
// True when the V step is solved through its per-RRH Kronecker structure plus
// a low-rank correction instead of a dense factorization.
bool v_step_uses_structure(const ShortTermProblem& prob);
CVec stack_v(const std::vector<CMat>& V);
std::vector<CMat> unstack_v(const CVec& v, int N, int S, int L);

// Minimizer of sum_l c_l 4^{-d_l} subject to sum_l d_l = bits, d >= 0.
RVec waterfill_bits(const RVec& c, double bits);

// Per-stream weights c_{n,l} of the bit subproblem.
RVec bit_weights(const ShortTermState& st, const ShortTermProblem& prob);

double wmmse_objective(const ShortTermState& st, const ShortTermProblem& prob);

struct ShortTermTrace {
  std::vector<std::string> block;
  std::vector<double> objective;
};

// Init, J rounds of (u, w, beta, v, d), then a closing (u, w) pass so the
// returned receivers match the returned (p, V, d).
ShortTermState run_short_term(const ShortTermProblem& prob, ShortTermTrace* trace = nullptr);

}  // namespace thcf
