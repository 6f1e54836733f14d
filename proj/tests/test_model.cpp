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
#include <limits>
#include <random>

#include "doctest.h"
#include "thcf/model.hpp"
#include "thcf/rng.hpp"
#include "test_util.hpp"

using namespace thcf;
using thcf::testing::random_cmat;
using thcf::testing::random_instance;

TEST_CASE("analog_matrix: zero phases give constant entries") {
  const CMat F = analog_matrix(RVec::Zero(6), 3, 2);
  for (Eigen::Index i = 0; i < F.size(); ++i) CHECK(std::abs(F(i) - cplx(1.0 / std::sqrt(3.0), 0.0)) < 1e-15);
}

TEST_CASE("analog_matrix: single antenna with phase pi") {
  RVec th(1);
  th << kPi;
  CHECK(std::abs(analog_matrix(th, 1, 1)(0, 0) - cplx(-1.0, 0.0)) < 1e-15);
}

TEST_CASE("analog_matrix: modulus and Frobenius norm") {
  Rng rng = make_stream(3, Stream::kTest);
  std::uniform_real_distribution<double> u(0.0, kTwoPi);
  RVec th(8 * 3);
  for (auto& v : th) v = u(rng);
  const CMat F = analog_matrix(th, 8, 3);
  for (Eigen::Index i = 0; i < F.size(); ++i) CHECK(std::abs(std::abs(F(i)) - 1.0 / std::sqrt(8.0)) < 1e-12);
  CHECK(std::abs(F.squaredNorm() - 3.0) < 1e-12);
  // entry (i, j) reads phase j*M + i
  CHECK(std::abs(std::arg(F(5, 2) / std::abs(F(5, 2))) - std::remainder(th(2 * 8 + 5), kTwoPi)) < 1e-12);
}

TEST_CASE("effective_channel: brute-force product and degenerate inputs") {
  Rng rng = make_stream(5, Stream::kTest);
  const CMat F = random_cmat(4, 2, rng);
  const CMat H = random_cmat(4, 2, rng);
  const CMat G = effective_channel(F, H);
  for (int s = 0; s < 2; ++s)
    for (int k = 0; k < 2; ++k) {
      cplx acc = 0.0;
      for (int m = 0; m < 4; ++m) acc += std::conj(F(m, s)) * H(m, k);
      CHECK(std::abs(G(s, k) - acc) < 1e-12);
    }
  CHECK(effective_channel(F, CMat::Zero(4, 2)).norm() == 0.0);
  // theta = 0: each row is the scaled column sum of H
  const CMat G0 = effective_channel(analog_matrix(RVec::Zero(8), 4, 2), H);
  for (int k = 0; k < 2; ++k) CHECK(std::abs(G0(0, k) - H.col(k).sum() / 2.0) < 1e-12);
  CHECK_THROWS_AS(effective_channel(F, random_cmat(3, 2, rng)), Error);
}

TEST_CASE("quant_noise_variances: exact model, plug-in and 4^-d law") {
  StreamModel sm;
  sm.L = 2;
  sm.E = CMat::Zero(2, 1);
  sm.W = CMat::Identity(2, 2);
  sm.power = RVec::Ones(2);
  RVec d(2);
  d << 0.0, 1.0;
  const RVec exact = quant_noise_variances(sm, d, false);
  CHECK(std::isinf(exact(0)));
  CHECK(exact(1) == doctest::Approx(0.75).epsilon(1e-15));
  const RVec relaxed = quant_noise_variances(sm, d, true);
  CHECK(relaxed(0) == doctest::Approx(3.0));
  CHECK_THROWS_AS(quant_noise_variances(sm, RVec::Constant(2, -0.5), true), Error);

  Rng rng = make_stream(7, Stream::kTest);
  for (int trial = 0; trial < 10; ++trial) {
    const auto inst = random_instance(2, 6, 3, 3, rng);
    const RVec q0 = quant_noise_variances(inst.theta, inst.x, inst.H, inst.dims, true);
    ShortTermVars x1 = inst.x;
    x1.d.array() += 1.0;
    const RVec q1 = quant_noise_variances(inst.theta, x1, inst.H, inst.dims, true);
    for (Eigen::Index i = 0; i < q0.size(); ++i) CHECK(std::abs(q1(i) * 4.0 - q0(i)) <= 1e-12 * q0(i));
  }
}

// Scalar re-implementation of the SINR straight from the stacked filters.
static RVec brute_sinr(const testing::Instance& in) {
  const Dimensions& dm = in.dims;
  const int L = dm.L();
  const auto F = analog_matrices(in.theta, dm);
  const int NL = dm.N * L;
  // Vt: (N M) x (N L) block diagonal F_n V_n
  std::vector<std::vector<cplx>> Vt(static_cast<std::size_t>(dm.N * dm.M), std::vector<cplx>(static_cast<std::size_t>(NL), 0.0));
  for (int n = 0; n < dm.N; ++n)
    for (int m = 0; m < dm.M; ++m)
      for (int l = 0; l < L; ++l) {
        cplx acc = 0.0;
        for (int s = 0; s < dm.S; ++s) acc += F[n](m, s) * in.x.V[n](s, l);
        Vt[static_cast<std::size_t>(n * dm.M + m)][static_cast<std::size_t>(n * L + l)] = acc;
      }
  auto hv = [&](int k, int col) {  // h_k^H vt_col, over all RRHs
    cplx acc = 0.0;
    for (int n = 0; n < dm.N; ++n)
      for (int m = 0; m < dm.M; ++m)
        acc += std::conj(in.H[n](m, k)) * Vt[static_cast<std::size_t>(n * dm.M + m)][static_cast<std::size_t>(col)];
    return acc;
  };
  std::vector<double> q(static_cast<std::size_t>(NL));
  for (int i = 0; i < NL; ++i) {
    double pw = 0.0, nrm = 0.0;
    for (int k = 0; k < dm.K; ++k) pw += in.x.p(k) * std::norm(hv(k, i));
    for (int r = 0; r < dm.N * dm.M; ++r) nrm += std::norm(Vt[static_cast<std::size_t>(r)][static_cast<std::size_t>(i)]);
    q[static_cast<std::size_t>(i)] = 3.0 * std::pow(4.0, -in.x.d(i)) * (pw + nrm);
  }
  RVec sinr(dm.K);
  for (int k = 0; k < dm.K; ++k) {
    auto gain = [&](int l) {  // u_k^H Vt^H h_l
      cplx acc = 0.0;
      for (int i = 0; i < NL; ++i) acc += std::conj(in.x.U(i, k)) * std::conj(hv(l, i));
      return acc;
    };
    double den = 0.0;
    for (int l = 0; l < dm.K; ++l)
      if (l != k) den += in.x.p(l) * std::norm(gain(l));
    for (int r = 0; r < dm.N * dm.M; ++r) {
      cplx acc = 0.0;
      for (int i = 0; i < NL; ++i) acc += Vt[static_cast<std::size_t>(r)][static_cast<std::size_t>(i)] * in.x.U(i, k);
      den += std::norm(acc);
    }
    for (int i = 0; i < NL; ++i) den += std::norm(in.x.U(i, k)) * q[static_cast<std::size_t>(i)];
    sinr(k) = in.x.p(k) * std::norm(gain(k)) / den;
  }
  return sinr;
}

TEST_CASE("sinr_and_rates: brute-force oracle") {
  Rng rng = make_stream(11, Stream::kTest);
  for (int trial = 0; trial < 10; ++trial) {
    const auto inst = random_instance(2, 5, 3, 3, rng);
    const RateReport rr = sinr_and_rates(inst.theta, inst.x, inst.H, inst.dims);
    const RVec ref = brute_sinr(inst);
    for (int k = 0; k < inst.dims.K; ++k) {
      CHECK(std::abs(rr.sinr(k) - ref(k)) <= 1e-10 * std::max(1.0, ref(k)));
      CHECK(rr.rate(k) == doctest::Approx(std::log1p(ref(k))).epsilon(1e-10));
      CHECK(rr.rate(k) >= 0.0);
    }
  }
}

TEST_CASE("sinr_and_rates: zero receiver and single-user limit") {
  Rng rng = make_stream(13, Stream::kTest);
  auto inst = random_instance(1, 4, 2, 2, rng);
  inst.x.U.col(0).setZero();
  CHECK(sinr_and_rates(inst.theta, inst.x, inst.H, inst.dims).sinr(0) == 0.0);

  // K = 1, N = 1, d = 30, matched filter: SINR -> p |Vt^H h|^2 with orthonormal Vt
  auto one = random_instance(1, 4, 1, 1, rng);
  one.x.d.setConstant(30.0);
  const auto F = analog_matrices(one.theta, one.dims);
  const CMat FV = F[0];
  // V = (F^H F)^{-1/2} makes Vt = F V orthonormal.
  Eigen::SelfAdjointEigenSolver<CMat> eig(FV.adjoint() * FV);
  one.x.V[0] = eig.eigenvectors() * eig.eigenvalues().cwiseInverse().cwiseSqrt().asDiagonal() *
               eig.eigenvectors().adjoint();
  one.x.V[0] = one.x.V[0].leftCols(1).eval();
  const CVec e = (F[0] * one.x.V[0]).adjoint() * one.H[0].col(0);
  one.x.U = e;
  const double expect = one.x.p(0) * e.squaredNorm();
  const double got = sinr_and_rates(one.theta, one.x, one.H, one.dims).sinr(0);
  CHECK(std::abs(got - expect) <= 1e-6 * expect);
}

TEST_CASE("sinr_and_rates: more bits never lower any rate") {
  Rng rng = make_stream(17, Stream::kTest);
  for (int trial = 0; trial < 20; ++trial) {
    const auto inst = random_instance(2, 6, 3, 3, rng);
    ShortTermVars more = inst.x;
    std::uniform_real_distribution<double> u(0.0, 2.0);
    for (auto& v : more.d) v += u(rng);
    const RVec r0 = sinr_and_rates(inst.theta, inst.x, inst.H, inst.dims).rate;
    const RVec r1 = sinr_and_rates(inst.theta, more, inst.H, inst.dims).rate;
    for (int k = 0; k < inst.dims.K; ++k) CHECK(r1(k) >= r0(k) - 1e-12);
  }
}

TEST_CASE("sinr_and_rates: a zero-bit stream is dropped in the exact model") {
  Rng rng = make_stream(19, Stream::kTest);
  auto inst = random_instance(1, 4, 2, 2, rng);
  inst.x.d(1) = 0.0;
  const RateReport exact = sinr_and_rates(inst.theta, inst.x, inst.H, inst.dims, false);
  ShortTermVars dropped = inst.x;
  dropped.U.row(1).setZero();
  const RateReport ref = sinr_and_rates(inst.theta, dropped, inst.H, inst.dims, true);
  for (int k = 0; k < 2; ++k) CHECK(exact.rate(k) == doctest::Approx(ref.rate(k)).epsilon(1e-12));
}

TEST_CASE("mse_per_user: trivial cases") {
  Rng rng = make_stream(23, Stream::kTest);
  const auto inst = random_instance(2, 4, 2, 3, rng);
  const LinkModel link = hybrid_link(analog_matrices(inst.theta, inst.dims), inst.H);
  const CMat U0 = CMat::Zero(inst.x.U.rows(), inst.x.U.cols());
  const CVec beta = inst.x.p.cwiseSqrt().cast<cplx>();
  const RVec e0 = mse_per_user(link, beta, inst.x.V, inst.x.d, U0);
  const RVec e1 = mse_per_user(link, CVec::Zero(3), inst.x.V, inst.x.d, U0);
  for (int k = 0; k < 3; ++k) {
    CHECK(e0(k) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(e1(k) == doctest::Approx(1.0).epsilon(1e-15));
  }
}

TEST_CASE("mse_per_user: Monte Carlo of the defining expectation") {
  // s_k ~ CN(0,1), thermal noise CN(0, I), quantization CN(0, diag q).
  Rng rng = make_stream(29, Stream::kTest);
  const auto inst = random_instance(1, 4, 2, 2, rng);
  const auto F = analog_matrices(inst.theta, inst.dims);
  const LinkModel link = hybrid_link(F, inst.H);
  const CVec beta = inst.x.p.cwiseSqrt().cast<cplx>();
  const RVec eta = mse_per_user(link, beta, inst.x.V, inst.x.d, inst.x.U);
  const StreamModel sm = stream_model(link, inst.x.V, inst.x.p);
  const RVec q = quant_noise_variances(sm, inst.x.d, true);
  const CMat Vt = F[0] * inst.x.V[0];
  const int draws = 100000;
  RVec acc = RVec::Zero(2);
  for (int t = 0; t < draws; ++t) {
    CVec s(2), z(4), e(2);
    for (int k = 0; k < 2; ++k) s(k) = complex_normal(rng);
    for (int m = 0; m < 4; ++m) z(m) = complex_normal(rng);
    for (int l = 0; l < 2; ++l) e(l) = complex_normal(rng, q(l));
    const CVec y = Vt.adjoint() * (inst.H[0] * beta.cwiseProduct(s) + z) + e;
    for (int k = 0; k < 2; ++k) acc(k) += std::norm(s(k) - inst.x.U.col(k).dot(y));
  }
  for (int k = 0; k < 2; ++k) CHECK(std::abs(acc(k) / draws - eta(k)) < 0.01 * eta(k));
}

TEST_CASE("rate_jacobian_theta: central finite differences") {
  Rng rng = make_stream(31, Stream::kTest);
  for (int trial = 0; trial < 20; ++trial) {
    const auto inst = random_instance(1, 4, 2, 2, rng);
    const RMat J = rate_jacobian_theta(inst.theta, inst.x, inst.H, inst.dims);
    const double h = 1e-5;
    double worst = 0.0;
    for (Eigen::Index i = 0; i < inst.theta.size(); ++i) {
      RVec tp = inst.theta, tm = inst.theta;
      tp(i) += h;
      tm(i) -= h;
      const RVec fd = (sinr_and_rates(tp, inst.x, inst.H, inst.dims).rate -
                       sinr_and_rates(tm, inst.x, inst.H, inst.dims).rate) / (2 * h);
      for (int k = 0; k < 2; ++k) {
        const double scale = std::max(std::abs(fd(k)), 1e-3 * J.col(k).cwiseAbs().maxCoeff());
        worst = std::max(worst, std::abs(J(i, k) - fd(k)) / scale);
      }
    }
    CHECK(worst < 1e-4);
  }
}

TEST_CASE("rate_jacobian_theta: zero channel and ascent direction") {
  Rng rng = make_stream(37, Stream::kTest);
  auto inst = random_instance(1, 4, 2, 2, rng);
  std::vector<CMat> H0{CMat::Zero(4, 2)};
  CHECK(rate_jacobian_theta(inst.theta, inst.x, H0, inst.dims).norm() == 0.0);

  const RMat J = rate_jacobian_theta(inst.theta, inst.x, inst.H, inst.dims);
  const RVec r0 = sinr_and_rates(inst.theta, inst.x, inst.H, inst.dims).rate;
  for (int k = 0; k < 2; ++k) {
    const RVec dir = J.col(k).normalized();
    const RVec r1 = sinr_and_rates(RVec(inst.theta + 1e-4 * dir), inst.x, inst.H, inst.dims).rate;
    CHECK(r1(k) > r0(k));
  }
}

TEST_CASE("utility_and_gradient") {
  RVec r(2);
  r << 1.0, 2.0;
  UtilitySpec sum{UtilitySpec::Kind::kSumRate, 1e-2};
  const UtilityValue s = utility_and_gradient(r, sum);
  CHECK(s.g == 3.0);
  CHECK(s.grad == RVec::Ones(2));

  UtilitySpec pfs{UtilitySpec::Kind::kProportionalFair, 1.0};
  const UtilityValue z = utility_and_gradient(RVec::Zero(2), pfs);
  CHECK(z.g == 0.0);
  CHECK(z.grad == RVec::Ones(2));

  Rng rng = make_stream(41, Stream::kTest);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  pfs.pfs_epsilon = 0.1;
  for (int trial = 0; trial < 10; ++trial) {
    RVec rb(4);
    for (auto& v : rb) v = u(rng);
    const UtilityValue g = utility_and_gradient(rb, pfs);
    for (int k = 0; k < 4; ++k) {
      RVec a = rb, b = rb;
      a(k) += 1e-6;
      b(k) -= 1e-6;
      const double fd = (utility_and_gradient(a, pfs).g - utility_and_gradient(b, pfs).g) / 2e-6;
      CHECK(std::abs(fd - g.grad(k)) < 1e-6 * g.grad(k));
    }
  }
  CHECK_THROWS_AS(utility_and_gradient(RVec::Ones(2), UtilitySpec{UtilitySpec::Kind::kProportionalFair, 0.0}), Error);
}

// Every alpha that hits the budget, by enumerating the breakpoints.
static std::vector<Eigen::VectorXi> alpha_solutions(const RVec& d, long budget) {
  std::vector<double> cand{0.0, 1.0};
  for (auto v : d) {
    const double f = v - std::floor(v);
    cand.push_back(f);
    cand.push_back(std::min(1.0, f + 1e-7));
  }
  std::vector<Eigen::VectorXi> out;
  for (double a : cand) {
    Eigen::VectorXi r(d.size());
    for (Eigen::Index i = 0; i < d.size(); ++i) {
      const double f = d(i) - std::floor(d(i));
      r(i) = static_cast<int>(f <= a ? std::floor(d(i)) : std::ceil(d(i)));
    }
    if (r.sum() == budget) out.push_back(r);
  }
  return out;
}

TEST_CASE("round_bits: fixed examples") {
  RVec d(3);
  d << 1.0, 2.0, 3.0;
  CHECK(round_bits(d, 12.0, 1.0) == Eigen::Vector3i(1, 2, 3));
  RVec a(2);
  a << 1.2, 2.8;
  CHECK(round_bits(a, 8.0, 1.0) == Eigen::Vector2i(1, 3));
  CHECK(alpha_solutions(a, 4).front() == Eigen::Vector2i(1, 3));
  RVec t(3);
  t << 0.5, 0.5, 1.0;
  CHECK(alpha_solutions(t, 2).empty());  // no single alpha resolves the tie
  CHECK(round_bits(t, 4.0, 1.0) == Eigen::Vector3i(1, 0, 1));
}

TEST_CASE("round_bits: errors") {
  RVec d(2);
  d << 1.25, 1.25;
  CHECK_THROWS_AS(round_bits(d, 5.0, 1.0), Error);   // budget 2.5 is not whole
  CHECK_THROWS_AS(round_bits(d, 8.0, 1.0), Error);   // relaxed sum 2.5 != 4
}

TEST_CASE("round_bits: budget, deviation and agreement with alpha enumeration") {
  Rng rng = make_stream(43, Stream::kTest);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> len(1, 8), tot(1, 40);
  for (int trial = 0; trial < 500; ++trial) {
    const int n = len(rng);
    const long budget = tot(rng);
    RVec w(n);
    for (auto& v : w) v = u(rng) + 1e-3;
    const RVec d = w / w.sum() * static_cast<double>(budget);
    const Eigen::VectorXi r = round_bits(d, 2.0 * 1e6 * static_cast<double>(budget), 1e6);
    CHECK(r.sum() == budget);
    CHECK(((r.cast<double>() - d).cwiseAbs().array() < 1.0).all());
    const auto sols = alpha_solutions(d, budget);
    if (!sols.empty()) {
      bool found = false;
      for (const auto& s : sols) found = found || s == r;
      CHECK(found);
    }
  }
}
