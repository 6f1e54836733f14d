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

#include "thcf/model.hpp"

#include <cmath>
#include <limits>
#include <numeric>

namespace thcf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kRegularization = 1e-12;

}  // namespace

CMat analog_matrix(const RVec& theta_n, int M, int S) {
  if (theta_n.size() != static_cast<Eigen::Index>(M) * S) throw Error("analog_matrix: theta_n must have M*S entries");
  const double scale = 1.0 / std::sqrt(static_cast<double>(M));
  CMat F(M, S);
  for (int j = 0; j < S; ++j)
    for (int i = 0; i < M; ++i) F(i, j) = std::polar(scale, theta_n(j * M + i));
  return F;
}

std::vector<CMat> analog_matrices(const RVec& theta, const Dimensions& dims) {
  if (theta.size() != dims.phases()) throw Error("analog_matrices: theta must have N*M*S entries");
  std::vector<CMat> F;
  const int block = dims.M * dims.S;
  for (int n = 0; n < dims.N; ++n) F.push_back(analog_matrix(theta.segment(n * block, block), dims.M, dims.S));
  return F;
}

CMat effective_channel(const CMat& F, const CMat& H) {
  if (F.rows() != H.rows()) throw Error("effective_channel: F and H row counts differ");
  return F.adjoint() * H;
}

LinkModel hybrid_link(const std::vector<CMat>& F, const std::vector<CMat>& H) {
  if (F.size() != H.size()) throw Error("hybrid_link: F and H RRH counts differ");
  LinkModel link;
  for (std::size_t n = 0; n < F.size(); ++n) {
    link.G.push_back(effective_channel(F[n], H[n]));
    link.R.push_back(F[n].adjoint() * F[n]);
  }
  return link;
}

LinkModel digital_link(const std::vector<CMat>& H) {
  LinkModel link;
  for (const auto& Hn : H) {
    link.G.push_back(Hn);
    link.R.push_back(CMat::Identity(Hn.rows(), Hn.rows()));
  }
  return link;
}

StreamModel stream_model(const LinkModel& link, const std::vector<CMat>& V, const RVec& p) {
  const int N = link.N();
  if (static_cast<int>(V.size()) != N) throw Error("stream_model: one V per RRH required");
  if (p.size() != link.K()) throw Error("stream_model: p must have K entries");
  const int L = N > 0 ? static_cast<int>(V.front().cols()) : 0;
  StreamModel sm;
  sm.L = L;
  sm.E.resize(N * L, link.K());
  sm.W = CMat::Zero(N * L, N * L);
  for (int n = 0; n < N; ++n) {
    if (V[n].rows() != link.G[n].rows() || V[n].cols() != L) throw Error("stream_model: V shape mismatch");
    sm.E.middleRows(n * L, L) = V[n].adjoint() * link.G[n];
    sm.W.block(n * L, n * L, L, L) = V[n].adjoint() * link.R[n] * V[n];
  }
  sm.power = sm.E.cwiseAbs2() * p + sm.W.diagonal().real();
  return sm;
}

RVec quant_noise_variances(const StreamModel& sm, const RVec& d, bool relaxed) {
  if (d.size() != sm.power.size()) throw Error("quant_noise_variances: d size mismatch");
  RVec q(d.size());
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    if (d(i) < 0) throw Error("quant_noise_variances: negative bit count");
    q(i) = (!relaxed && d(i) == 0.0) ? kInf : 3.0 * std::pow(4.0, -d(i)) * sm.power(i);
  }
  return q;
}

RVec quant_noise_variances(const RVec& theta, const ShortTermVars& x, const std::vector<CMat>& H,
                           const Dimensions& dims, bool relaxed) {
  const LinkModel link = hybrid_link(analog_matrices(theta, dims), H);
  return quant_noise_variances(stream_model(link, x.V, x.p), x.d, relaxed);
}

CMat mmse_receivers(const StreamModel& sm, const RVec& q, const CVec& beta) {
  const Eigen::Index dim = sm.E.rows();
  const Eigen::Index K = sm.E.cols();
  std::vector<Eigen::Index> active;
  for (Eigen::Index i = 0; i < dim; ++i)
    if (std::isfinite(q(i))) active.push_back(i);
  CMat U = CMat::Zero(dim, K);
  if (active.empty()) return U;

  const auto na = static_cast<Eigen::Index>(active.size());
  CMat Ea(na, K);
  CMat C(na, na);
  for (Eigen::Index a = 0; a < na; ++a) {
    Ea.row(a) = sm.E.row(active[a]);
    for (Eigen::Index b = 0; b < na; ++b) C(a, b) = sm.W(active[a], active[b]);
    C(a, a) += q(active[a]);
  }
  const RVec p = beta.cwiseAbs2();
  C += Ea * p.asDiagonal() * Ea.adjoint();
  const double trace = C.diagonal().real().sum();
  C.diagonal().array() += kRegularization * trace / static_cast<double>(na);
  const CMat Ua = C.ldlt().solve(Ea * beta.asDiagonal());
  for (Eigen::Index a = 0; a < na; ++a) U.row(active[a]) = Ua.row(a);
  return U;
}

RateReport sinr_and_rates(const StreamModel& sm, const RVec& q, const RVec& p, const CMat& U_in) {
  const Eigen::Index K = sm.E.cols();
  CMat U = U_in;
  RVec qf = q;
  for (Eigen::Index i = 0; i < q.size(); ++i)
    if (!std::isfinite(q(i))) {
      U.row(i).setZero();
      qf(i) = 0.0;
    }
  const CMat Z = U.adjoint() * sm.E;  // Z(k, l) = u_k^H e_l
  RateReport out;
  out.sinr.resize(K);
  out.rate.resize(K);
  for (Eigen::Index k = 0; k < K; ++k) {
    const CVec uk = U.col(k);
    const double signal = p(k) * std::norm(Z(k, k));
    double denom = (uk.adjoint() * sm.W * uk)(0, 0).real() + uk.cwiseAbs2().dot(qf);
    for (Eigen::Index l = 0; l < K; ++l)
      if (l != k) denom += p(l) * std::norm(Z(k, l));
    out.sinr(k) = denom > 0 ? signal / denom : 0.0;
    out.rate(k) = std::log1p(out.sinr(k));
  }
  return out;
}

RateReport sinr_and_rates(const LinkModel& link, const ShortTermVars& x, bool relaxed) {
  const StreamModel sm = stream_model(link, x.V, x.p);
  return sinr_and_rates(sm, quant_noise_variances(sm, x.d, relaxed), x.p, x.U);
}

RateReport sinr_and_rates(const RVec& theta, const ShortTermVars& x, const std::vector<CMat>& H,
                          const Dimensions& dims, bool relaxed) {
  return sinr_and_rates(hybrid_link(analog_matrices(theta, dims), H), x, relaxed);
}

RVec mse_per_user(const LinkModel& link, const CVec& beta, const std::vector<CMat>& V, const RVec& d,
                  const CMat& U) {
  const RVec p = beta.cwiseAbs2();
  const StreamModel sm = stream_model(link, V, p);
  const RVec q = quant_noise_variances(sm, d, true);
  const Eigen::Index K = sm.E.cols();
  const CMat Z = U.adjoint() * sm.E;
  RVec eta(K);
  for (Eigen::Index k = 0; k < K; ++k) {
    const CVec uk = U.col(k);
    double e = std::norm(1.0 - Z(k, k) * beta(k));
    for (Eigen::Index l = 0; l < K; ++l)
      if (l != k) e += std::norm(Z(k, l) * beta(l));
    e += (uk.adjoint() * sm.W * uk)(0, 0).real() + uk.cwiseAbs2().dot(q);
    eta(k) = e;
  }
  return eta;
}

RMat rate_jacobian_theta(const RVec& theta, const ShortTermVars& x, const std::vector<CMat>& H,
                         const Dimensions& dims) {
  const std::vector<CMat> F = analog_matrices(theta, dims);
  const LinkModel link = hybrid_link(F, H);
  const StreamModel sm = stream_model(link, x.V, x.p);
  const RVec q = quant_noise_variances(sm, x.d, true);
  const int N = dims.N, M = dims.M, S = dims.S, K = dims.K;
  const int L = sm.L;
  if (x.U.rows() != N * L || x.U.cols() != K) throw Error("rate_jacobian_theta: U shape mismatch");
  const RVec& p = x.p;
  const CMat Z = x.U.adjoint() * sm.E;  // Z(k, l) = u_k^H e_l

  // Y_n = (H_n P H_n^H + I) F_n V_n, shared by every user.
  std::vector<CMat> FV(N), Y(N);
  for (int n = 0; n < N; ++n) {
    FV[n] = F[n] * x.V[n];
    Y[n] = H[n] * (p.asDiagonal() * (H[n].adjoint() * FV[n])) + FV[n];
  }
  RVec c(N * L);
  for (int i = 0; i < N * L; ++i) c(i) = 3.0 * std::pow(4.0, -x.d(i));

  RMat J = RMat::Zero(dims.phases(), K);
  for (int k = 0; k < K; ++k) {
    const CVec uk = x.U.col(k);
    double gamma = (uk.adjoint() * sm.W * uk)(0, 0).real() + uk.cwiseAbs2().dot(q);
    for (int l = 0; l < K; ++l) gamma += p(l) * std::norm(Z(k, l));
    const double gamma_minus = gamma - p(k) * std::norm(Z(k, k));
    if (!(gamma_minus > 0)) continue;  // u_k = 0: rate is constant

    const CVec zc = Z.row(k).adjoint();  // conj(z_kl)
    for (int n = 0; n < N; ++n) {
      const CVec a = x.V[n] * uk.segment(n * L, L);
      RVec weights(L);
      for (int l = 0; l < L; ++l) weights(l) = c(n * L + l) * std::norm(uk(n * L + l));
      const CMat A_common = F[n] * a * a.adjoint() + Y[n] * weights.asDiagonal() * x.V[n].adjoint();
      const CMat A_signal = (p(k) * zc(k)) * H[n].col(k) * a.adjoint();
      const CVec interf = H[n] * p.cwiseProduct(zc) - p(k) * zc(k) * H[n].col(k);
      const CMat A_minus = A_common + interf * a.adjoint();
      const CMat A_full = A_minus + A_signal;
      const CMat combo = A_full / gamma - A_minus / gamma_minus;
      for (int j = 0; j < S; ++j)
        for (int i = 0; i < M; ++i)
          J(n * M * S + j * M + i, k) = 2.0 * (std::conj(F[n](i, j)) * combo(i, j)).imag();
    }
  }
  return J;
}

UtilityValue utility_and_gradient(const RVec& rbar, const UtilitySpec& spec) {
  UtilityValue out;
  if (spec.kind == UtilitySpec::Kind::kSumRate) {
    out.g = rbar.sum();
    out.grad = RVec::Ones(rbar.size());
    return out;
  }
  if (!(spec.pfs_epsilon > 0)) throw Error("utility_and_gradient: pfs_epsilon must be positive");
  const RVec shifted = rbar.array() + spec.pfs_epsilon;
  out.g = shifted.array().log().sum();
  out.grad = shifted.cwiseInverse();
  return out;
}

Eigen::VectorXi round_bits(const RVec& d_star, double C, double B_W) {
  constexpr double kIntTol = 1e-9;
  const double budget = C / (2.0 * B_W);
  const double target_d = std::round(budget);
  if (std::abs(budget - target_d) > kIntTol * std::max(1.0, budget))
    throw Error("round_bits: C / (2 B_W) = " + std::to_string(budget) + " is not an integer");
  if (std::abs(d_star.sum() - budget) > 1e-6 * std::max(1.0, budget))
    throw Error("round_bits: relaxed bits do not meet the budget");
  const long target = static_cast<long>(target_d);
  const Eigen::Index n = d_star.size();

  Eigen::VectorXi base(n);
  RVec frac(n);
  long base_sum = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (d_star(i) < -kIntTol) throw Error("round_bits: negative relaxed bits");
    const double nearest = std::round(d_star(i));
    const bool integral = std::abs(d_star(i) - nearest) <= kIntTol;
    const double fl = integral ? nearest : std::floor(d_star(i));
    base(i) = static_cast<int>(std::max(0.0, fl));
    frac(i) = integral ? 0.0 : d_star(i) - fl;
    base_sum += base(i);
  }
  const long ceils = target - base_sum;
  auto count_above = [&](double alpha) {
    long c = 0;
    for (Eigen::Index i = 0; i < n; ++i) c += frac(i) > alpha ? 1 : 0;
    return c;
  };
  if (ceils < 0 || ceils > count_above(0.0)) throw Error("round_bits: budget unreachable by rounding");

  // Smallest alpha leaving at most the required number of ceils.
  double lo = 0.0, hi = 1.0;
  if (count_above(lo) <= ceils) hi = lo;
  for (int it = 0; it < 60 && hi > lo; ++it) {
    const double mid = 0.5 * (lo + hi);
    (count_above(mid) <= ceils ? hi : lo) = mid;
  }
  const double alpha = hi;
  Eigen::VectorXi out = base;
  long placed = 0;
  for (Eigen::Index i = 0; i < n; ++i)
    if (frac(i) > alpha) {
      ++out(i);
      ++placed;
    }
  // Fractions tied at alpha: ceil in index order until the budget is met.
  for (Eigen::Index i = 0; i < n && placed < ceils; ++i)
    if (frac(i) > 0 && frac(i) <= alpha && alpha - frac(i) <= 1e-12) {
      ++out(i);
      ++placed;
    }
  if (placed != ceils) throw Error("round_bits: internal rounding mismatch");
  return out;
}

}  // namespace thcf
