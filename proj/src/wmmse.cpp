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

#include "thcf/wmmse.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Eigenvalues>

namespace thcf {

namespace {

constexpr int kBisectionIters = 60;

// Columns of X with the first significant entry rotated to the positive real axis.
void fix_column_phases(CMat& X) {
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    const double scale = X.col(j).norm();
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      const double mag = std::abs(X(i, j));
      if (mag > 1e-12 * scale) {
        X.col(j) *= std::conj(X(i, j)) / mag;
        X(i, j) = mag;
        break;
      }
    }
  }
}

StreamModel current_streams(const ShortTermState& st, const ShortTermProblem& prob) {
  return stream_model(prob.link, st.x.V, st.aux.beta.cwiseAbs2());
}

}  // namespace

void ShortTermProblem::validate() const {
  const int n = N(), k = K();
  if (n < 1 || k < 1) throw Error("ShortTermProblem: empty link");
  if (mu.size() != k || P.size() != k) throw Error("ShortTermProblem: mu and P need K entries");
  if (C.size() != n) throw Error("ShortTermProblem: C needs N entries");
  if ((mu.array() <= 0).any()) throw Error("ShortTermProblem: mu must be positive");
  if ((P.array() < 0).any() || (C.array() < 0).any()) throw Error("ShortTermProblem: negative budget");
  if (!(epsilon > 0) || !(B_W > 0) || J < 0) throw Error("ShortTermProblem: need epsilon, B_W > 0 and J >= 0");
}

ShortTermState init_short_term(const ShortTermProblem& prob) {
  prob.validate();
  const int N = prob.N(), K = prob.K(), L = prob.L();
  ShortTermState st;
  st.aux.beta = prob.P.cwiseSqrt().cast<cplx>();
  st.aux.w = RVec::Ones(K);
  st.x.p = prob.P;
  st.x.d.resize(N * L);
  for (int n = 0; n < N; ++n)
    st.x.d.segment(n * L, L).setConstant(prob.C(n) / (2.0 * prob.B_W * L));
  for (int n = 0; n < N; ++n) {
    const CMat& G = prob.link.G[static_cast<std::size_t>(n)];
    Eigen::SelfAdjointEigenSolver<CMat> eig(G * G.adjoint());
    if (eig.info() != Eigen::Success) throw Error("init_short_term: eigen-decomposition failed");
    const Eigen::Index S = G.rows();
    CMat V(S, L);
    for (int l = 0; l < L; ++l) V.col(l) = eig.eigenvectors().col(S - 1 - l);
    fix_column_phases(V);
    st.x.V.push_back(std::move(V));
  }
  st.x.U = CMat::Zero(N * L, K);
  return st;
}

void update_u(ShortTermState& st, const ShortTermProblem& prob) {
  const StreamModel sm = current_streams(st, prob);
  st.x.U = mmse_receivers(sm, quant_noise_variances(sm, st.x.d, true), st.aux.beta);
}

void update_w(ShortTermState& st, const ShortTermProblem& prob) {
  const StreamModel sm = current_streams(st, prob);
  for (int k = 0; k < prob.K(); ++k) {
    const cplx a = st.x.U.col(k).dot(sm.E.col(k));  // u_k^H e_k
    const double denom = (1.0 - a * st.aux.beta(k)).real();
    if (!(denom > 0)) throw Error("update_w: non-positive MSE; receiver is stale");
    st.aux.w(k) = 1.0 / denom;
  }
}

void update_beta(ShortTermState& st, const ShortTermProblem& prob) {
  const int K = prob.K();
  const StreamModel sm = current_streams(st, prob);
  const CMat Z = st.x.U.adjoint() * sm.E;  // Z(k, j) = u_k^H e_j
  const RVec c = 3.0 * (-kLn4 * st.x.d.array()).exp();
  const RVec mw = prob.mu.cwiseProduct(st.aux.w);
  // nu_j = sum_k mu_k w_k sum_i c_i |u_{k,i}|^2 |E(i, j)|^2
  const RVec per_stream = st.x.U.cwiseAbs2() * mw;
  const RVec nu = sm.E.cwiseAbs2().transpose() * c.cwiseProduct(per_stream);
  const RVec D = Z.cwiseAbs2().transpose() * mw + nu;

  for (int j = 0; j < K; ++j) {
    const double num = mw(j) * Z(j, j).real();
    const double cap = prob.P(j);
    auto beta_at = [&](double lambda) { return D(j) + lambda > 0 ? num / (D(j) + lambda) : 0.0; };
    double b = beta_at(0.0);
    if (num != 0.0 && b * b > cap) {
      double lo = 0.0, hi = 1.0;
      int guard = 0;
      while (beta_at(hi) * beta_at(hi) > cap) {
        hi *= 2.0;
        if (++guard > 2000) throw Error("update_beta: power bisection failed to bracket");
      }
      for (int it = 0; it < kBisectionIters; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double bm = beta_at(mid);
        (bm * bm > cap ? lo : hi) = mid;
      }
      b = beta_at(hi);
    }
    st.aux.beta(j) = b;
  }
  st.x.p = st.aux.beta.cwiseAbs2();
}

CVec stack_v(const std::vector<CMat>& V) {
  Eigen::Index total = 0;
  for (const auto& Vn : V) total += Vn.size();
  CVec v(total);
  Eigen::Index off = 0;
  for (const auto& Vn : V) {
    v.segment(off, Vn.size()) = Eigen::Map<const CVec>(Vn.data(), Vn.size());
    off += Vn.size();
  }
  return v;
}

std::vector<CMat> unstack_v(const CVec& v, int N, int S, int L) {
  if (v.size() != static_cast<Eigen::Index>(N) * S * L) throw Error("unstack_v: size mismatch");
  std::vector<CMat> V;
  for (int n = 0; n < N; ++n) V.push_back(Eigen::Map<const CMat>(v.data() + n * S * L, S, L));
  return V;
}

VNormalEquations v_normal_equations(const ShortTermState& st, const ShortTermProblem& prob, bool with_B) {
  const int N = prob.N(), K = prob.K(), L = prob.L();
  const int S = prob.link.S();
  const int NL = N * L;
  const RVec p = st.aux.beta.cwiseAbs2();
  const RVec mw = prob.mu.cwiseProduct(st.aux.w);
  const CMat& U = st.x.U;

  // Sc(i, i') = sum_k mu_k w_k conj(u_{k,i}) u_{k,i'}
  const CMat Sc = U.conjugate() * mw.asDiagonal() * U.transpose();
  const RVec c = 3.0 * (-kLn4 * st.x.d.array()).exp();

  std::vector<CMat> GP(static_cast<std::size_t>(N));
  for (int n = 0; n < N; ++n) GP[static_cast<std::size_t>(n)] = prob.link.G[static_cast<std::size_t>(n)] * p.asDiagonal();

  VNormalEquations eq;
  if (with_B) eq.B = CMat::Zero(NL * S, NL * S);
  eq.J = CVec::Zero(NL * S);
  for (int n = 0; n < N; ++n) {
    const auto un = static_cast<std::size_t>(n);
    for (int m = 0; m < N && with_B; ++m) {
      const auto um = static_cast<std::size_t>(m);
      CMat Dnm = GP[un] * prob.link.G[um].adjoint();
      if (n == m) Dnm += prob.link.R[un];
      for (int l = 0; l < L; ++l)
        for (int l2 = 0; l2 < L; ++l2) {
          const int i = n * L + l, i2 = m * L + l2;
          eq.B.block(i * S, i2 * S, S, S) = Sc(i, i2) * Dnm;
        }
      if (n == m)
        for (int l = 0; l < L; ++l) {
          const int i = n * L + l;
          eq.B.block(i * S, i * S, S, S) += (c(i) * Sc(i, i).real()) * Dnm;
        }
    }
    for (int l = 0; l < L; ++l) {
      const int i = n * L + l;
      CVec acc = CVec::Zero(S);
      for (int k = 0; k < K; ++k)
        acc += (mw(k) * st.aux.beta(k) * std::conj(U(i, k))) * prob.link.G[un].col(k);
      eq.J.segment(i * S, S) = acc;
    }
  }
  return eq;
}

namespace {

// Solves (B + eps I) v = rhs without forming B. B splits into
//   blockdiag_n(T_n kron R_n) + Gam Omega Gam^H,
// T_n = Sc_nn + diag(c_i Sc_ii), Gam = blockdiag_i(G_n P^{1/2}),
// Omega = (Sc + diag(c_i Sc_ii)) kron I_K. In the rotated basis
// (P_n kron Q_n), with T_n = P_n Sig P_n^H and R_n = Q_n Lam Q_n^H, the first
// part is the diagonal D and Gam becomes P_n^H kron Z_n, Z_n = Q_n^H G_n P^{1/2}.
// The rank-(N L K) part is removed with the push-through Woodbury identity.
CVec solve_v_structured(const ShortTermState& st, const ShortTermProblem& prob, const CVec& rhs) {
  const int N = prob.N(), K = prob.K(), L = prob.L();
  const int S = prob.link.S();
  const int NL = N * L;
  const RVec p = st.aux.beta.cwiseAbs2();
  const RVec mw = prob.mu.cwiseProduct(st.aux.w);
  const CMat& U = st.x.U;
  const CMat Sc = U.conjugate() * mw.asDiagonal() * U.transpose();
  const RVec c = 3.0 * (-kLn4 * st.x.d.array()).exp();
  CMat Tfull = Sc;
  for (int i = 0; i < NL; ++i) Tfull(i, i) += c(i) * Sc(i, i).real();

  struct Rotated {
    CMat P, Q, Z;
    CMat Dinv;  // S x L, 1 / (lambda_s sigma_l + eps)
  };
  std::vector<Rotated> rot(static_cast<std::size_t>(N));
  CMat Cblk = CMat::Zero(NL * K, NL * K);  // blockdiag_n Gam~^H D^-1 Gam~
  CVec g(NL * K);                           // Gam~^H D^-1 r~
  std::vector<CMat> Y0(static_cast<std::size_t>(N));
  for (int n = 0; n < N; ++n) {
    const auto un = static_cast<std::size_t>(n);
    Eigen::SelfAdjointEigenSolver<CMat> et(Tfull.block(n * L, n * L, L, L));
    if (et.info() != Eigen::Success) throw Error("update_v: eigen-decomposition failed");
    Rotated& r = rot[un];
    r.P = et.eigenvectors();
    RVec lam;
    if (prob.link.R[un].isIdentity(0.0)) {
      r.Q = CMat::Identity(S, S);
      lam = RVec::Ones(S);
    } else {
      Eigen::SelfAdjointEigenSolver<CMat> er(prob.link.R[un]);
      if (er.info() != Eigen::Success) throw Error("update_v: eigen-decomposition failed");
      r.Q = er.eigenvectors();
      lam = er.eigenvalues();
    }
    r.Z = r.Q.adjoint() * prob.link.G[un] * p.cwiseSqrt().asDiagonal();
    r.Dinv = ((lam * et.eigenvalues().transpose()).array() + prob.epsilon).inverse().cast<cplx>();

    for (int a = 0; a < L; ++a) {
      const CMat Ma = r.Z.adjoint() * r.Dinv.col(a).asDiagonal() * r.Z;
      for (int l = 0; l < L; ++l)
        for (int l2 = 0; l2 < L; ++l2)
          Cblk.block((n * L + l) * K, (n * L + l2) * K, K, K) += (r.P(l, a) * std::conj(r.P(l2, a))) * Ma;
    }
    const Eigen::Map<const CMat> X(rhs.data() + n * S * L, S, L);
    Y0[un] = (r.Q.adjoint() * X * r.P.conjugate()).cwiseProduct(r.Dinv);  // D^-1 r~
    const CMat Gn = r.Z.adjoint() * Y0[un] * r.P.transpose();               // K x L
    g.segment(n * L * K, L * K) = Eigen::Map<const CVec>(Gn.data(), L * K);
  }
  CMat Omega = CMat::Zero(NL * K, NL * K);
  for (int i = 0; i < NL; ++i)
    for (int i2 = 0; i2 < NL; ++i2) Omega.block(i * K, i2 * K, K, K).diagonal().setConstant(Tfull(i, i2));
  CMat core = Omega * Cblk;
  core.diagonal().array() += 1.0;
  const CVec corr = core.partialPivLu().solve(Omega * g);

  CVec v(rhs.size());
  for (int n = 0; n < N; ++n) {
    const Rotated& r = rot[static_cast<std::size_t>(n)];
    const Eigen::Map<const CMat> Wn(corr.data() + n * L * K, K, L);
    const CMat Yt = Y0[static_cast<std::size_t>(n)] - (r.Z * Wn * r.P.conjugate()).cwiseProduct(r.Dinv);
    const CMat Vn = r.Q * Yt * r.P.transpose();
    v.segment(n * S * L, S * L) = Eigen::Map<const CVec>(Vn.data(), S * L);
  }
  return v;
}

}  // namespace

bool v_step_uses_structure(const ShortTermProblem& prob) { return prob.link.S() > 2 * prob.K(); }

void update_v(ShortTermState& st, const ShortTermProblem& prob) {
  const CVec v_prev = stack_v(st.x.V);
  CVec v;
  if (v_step_uses_structure(prob)) {
    const VNormalEquations eq = v_normal_equations(st, prob, /*with_B=*/false);
    v = solve_v_structured(st, prob, eq.J + prob.epsilon * v_prev);
  } else {
    const VNormalEquations eq = v_normal_equations(st, prob);
    CMat A = eq.B;
    A.diagonal().array() += prob.epsilon;
    Eigen::LDLT<CMat> ldlt(A);
    if (ldlt.info() != Eigen::Success) throw Error("update_v: factorization failed");
    v = ldlt.solve(eq.J + prob.epsilon * v_prev);
  }
  if (!v.allFinite()) throw Error("update_v: non-finite solution");
  st.x.V = unstack_v(v, prob.N(), prob.link.S(), prob.L());
}

RVec bit_weights(const ShortTermState& st, const ShortTermProblem& prob) {
  const StreamModel sm = current_streams(st, prob);
  const RVec mw = prob.mu.cwiseProduct(st.aux.w);
  return 3.0 * (st.x.U.cwiseAbs2() * mw).cwiseProduct(sm.power);
}

RVec waterfill_bits(const RVec& c, double bits) {
  const Eigen::Index n = c.size();
  if (n == 0) return RVec();
  if (bits < 0) throw Error("waterfill_bits: negative budget");
  if ((c.array() < 0).any()) throw Error("waterfill_bits: negative weight");
  RVec d = RVec::Zero(n);
  if (bits == 0.0) return d;
  std::vector<Eigen::Index> live;
  for (Eigen::Index i = 0; i < n; ++i)
    if (c(i) > 0) live.push_back(i);
  if (live.empty()) return RVec::Constant(n, bits / static_cast<double>(n));

  // d_i(t) = max(0, log4(c_i) - t); t is the log4 water level.
  RVec lc = RVec::Zero(n);
  for (auto i : live) lc(i) = std::log(c(i)) / kLn4;
  auto total = [&](double t) {
    double s = 0.0;
    for (auto i : live) s += std::max(0.0, lc(i) - t);
    return s;
  };
  double hi = -std::numeric_limits<double>::infinity();
  for (auto i : live) hi = std::max(hi, lc(i));
  double lo = hi - bits - 1.0;
  while (total(lo) < bits) lo -= bits + 1.0;
  for (int it = 0; it < kBisectionIters; ++it) {
    const double mid = 0.5 * (lo + hi);
    (total(mid) > bits ? lo : hi) = mid;
  }
  // Exact level on the active set found by bisection.
  double t = 0.5 * (lo + hi);
  double sum_active = 0.0;
  int active = 0;
  for (auto i : live)
    if (lc(i) > t) {
      sum_active += lc(i);
      ++active;
    }
  if (active > 0) {
    const double exact = (sum_active - bits) / active;
    bool consistent = true;
    for (auto i : live) {
      const bool was_active = lc(i) > t;
      consistent = consistent && (was_active ? lc(i) > exact : lc(i) <= exact + 1e-12);
    }
    if (consistent) t = exact;
  }
  for (auto i : live) d(i) = std::max(0.0, lc(i) - t);
  return d;
}

void update_d(ShortTermState& st, const ShortTermProblem& prob) {
  const int N = prob.N(), L = prob.L();
  const RVec c = bit_weights(st, prob);
  for (int n = 0; n < N; ++n)
    st.x.d.segment(n * L, L) = waterfill_bits(c.segment(n * L, L), prob.C(n) / (2.0 * prob.B_W));
}

double wmmse_objective(const ShortTermState& st, const ShortTermProblem& prob) {
  const RVec eta = mse_per_user(prob.link, st.aux.beta, st.x.V, st.x.d, st.x.U);
  double obj = 0.0;
  for (int k = 0; k < prob.K(); ++k)
    obj += prob.mu(k) * (st.aux.w(k) * eta(k) - std::log(st.aux.w(k)));
  return obj;
}

ShortTermState run_short_term(const ShortTermProblem& prob, ShortTermTrace* trace) {
  ShortTermState st = init_short_term(prob);
  auto record = [&](const char* name) {
    if (trace) {
      trace->block.emplace_back(name);
      trace->objective.push_back(wmmse_objective(st, prob));
    }
  };
  for (int j = 0; j < prob.J; ++j) {
    update_u(st, prob);
    record("u");
    update_w(st, prob);
    record("w");
    update_beta(st, prob);
    record("beta");
    update_v(st, prob);
    record("v");
    update_d(st, prob);
    record("d");
  }
  update_u(st, prob);
  record("u");
  update_w(st, prob);
  record("w");
  return st;
}

}  // namespace thcf
