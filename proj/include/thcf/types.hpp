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

#include <algorithm>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace thcf {

using cplx = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kLn2 = std::numbers::ln2;
inline constexpr double kLn4 = 2.0 * std::numbers::ln2;
inline constexpr double kSpeedOfLight = 3.0e8;

// Raised for contract violations (bad shapes, infeasible budgets, stale
// receivers). Numerical routines never return partially valid results.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Network dimensions shared by every module.
//   N: RRHs, M: antennas per RRH, S: RF chains per RRH, K: users.
struct Dimensions {
  int N = 1;
  int M = 1;
  int S = 1;
  int K = 1;

  // Streams forwarded per RRH.
  int L() const { return std::min(K, S); }
  int streams() const { return N * L(); }
  int phases() const { return N * M * S; }
};

inline double nats_to_bits(double nats) { return nats / kLn2; }

}  // namespace thcf
