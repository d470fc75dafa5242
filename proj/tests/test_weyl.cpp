// Copyright 2026 The qdm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <set>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "qdm/qdm.hpp"

namespace {

using qdm::Matrix;
using qdm::PhasedWeyl;
using qdm::WeylLabel;

WeylLabel random_label(int d, int n, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> u(0, d - 1);
  std::vector<int> p(n), q(n);
  for (int i = 0; i < n; ++i) {
    p[i] = u(rng);
    q[i] = u(rng);
  }
  return WeylLabel(d, p, q);
}

TEST(WeylMatrix, MatchesOracleForEverySingleLabel) {
  for (int d : {2, 3, 5})
    for (int p = 0; p < d; ++p)
      for (int q = 0; q < d; ++q) EXPECT_LT((qdm::weyl_single_matrix(d, p, q) - oracle::weyl(d, p, q)).norm(), 1e-13);
}

TEST(WeylMatrix, Examples) {
  EXPECT_LT((qdm::weyl_matrix(WeylLabel::single(3, 0, 0)) - Matrix::Identity(3, 3)).norm(), 1e-15);
  const Matrix z = qdm::weyl_matrix(WeylLabel::single(3, 1, 0));
  for (int n = 0; n < 3; ++n) EXPECT_LT(std::abs(z(n, n) - oracle::omega(3, n)), 1e-15);
  // omega^{-1/2} = omega^{-2} = omega
  const Matrix zx = oracle::omega(3) * oracle::clock(3) * oracle::shift(3);
  EXPECT_LT((qdm::weyl_matrix(WeylLabel::single(3, 1, 1)) - zx).norm(), 1e-14);
}

TEST(WeylMatrix, TensorOrder) {
  const WeylLabel l(3, {1, 0}, {0, 2});
  EXPECT_LT((qdm::weyl_matrix(l) - oracle::weyl(3, {1, 0}, {0, 2})).norm(), 1e-13);
}

TEST(WeylAlgebra, UnitarityOverRandomLabels) {
  std::mt19937_64 rng(100);
  for (int d : {2, 3, 5})
    for (int t = 0; t < 200; ++t) {
      const int n = d == 5 ? 1 + t % 2 : 1 + t % 3;
      const Matrix w = qdm::weyl_matrix(random_label(d, n, rng));
      EXPECT_LT((w.adjoint() * w - Matrix::Identity(w.rows(), w.cols())).norm(), 1e-12);
    }
}

TEST(WeylAlgebra, ComposeMatchesMatrixProduct) {
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<int> ph(0, 9);
  for (int d : {2, 3, 5})
    for (int t = 0; t < 200; ++t) {
      const int n = 1 + t % 2;
      const PhasedWeyl a(random_label(d, n, rng), ph(rng) % (2 * d));
      const PhasedWeyl b(random_label(d, n, rng), ph(rng) % (2 * d));
      const auto c = qdm::weyl_compose(a, b);
      EXPECT_LT((qdm::weyl_matrix(c) - qdm::weyl_matrix(a) * qdm::weyl_matrix(b)).norm(), 1e-12);
    }
}

TEST(WeylAlgebra, ComposePhaseBruteForce) {
  // W_{1,0} W_{0,1}: search all 2d phase candidates against the product.
  for (int d : {2, 3, 5}) {
    const auto c = qdm::weyl_compose(PhasedWeyl(WeylLabel::single(d, 1, 0), 0), PhasedWeyl(WeylLabel::single(d, 0, 1), 0));
    EXPECT_EQ(c.label, WeylLabel::single(d, 1, 1));
    const Matrix prod = oracle::weyl(d, 1, 0) * oracle::weyl(d, 0, 1);
    int found = -1;
    for (int k = 0; k < 2 * d; ++k)
      if ((std::polar(1.0, std::numbers::pi * k / d) * oracle::weyl(d, 1, 1) - prod).norm() < 1e-12) found = k;
    EXPECT_EQ(c.phase_exp, found);
  }
}

TEST(WeylAlgebra, InverseGivesIdentity) {
  std::mt19937_64 rng(102);
  for (int d : {2, 3, 5}) {
    const PhasedWeyl a(random_label(d, 2, rng), 3 % (2 * d));
    const auto e = qdm::weyl_compose(a, qdm::weyl_inverse(a));
    EXPECT_TRUE(e.label.is_identity());
    EXPECT_EQ(e.phase_exp, 0);
  }
}

TEST(WeylAlgebra, CommutatorMatchesMatrixOracle) {
  std::mt19937_64 rng(103);
  for (int d : {2, 3, 5})
    for (int t = 0; t < 200; ++t) {
      const int n = 1 + t % 2;
      const auto a = random_label(d, n, rng), b = random_label(d, n, rng);
      const int c = qdm::weyl_commutator_phase(a, b);
      const Matrix wa = qdm::weyl_matrix(a), wb = qdm::weyl_matrix(b);
      EXPECT_LT((wa * wb - oracle::omega(d, c) * wb * wa).norm(), 1e-12);
    }
}

TEST(WeylAlgebra, ClockShiftCommutator) {
  // Z X |n> = w^{n+1}|n+1>, X Z |n> = w^n |n+1>, so ZX = w XZ.
  const Matrix z = oracle::clock(3), x = oracle::shift(3);
  EXPECT_LT((z * x - oracle::omega(3) * x * z).norm(), 1e-14);
  EXPECT_EQ(qdm::weyl_commutator_phase(WeylLabel::single(3, 1, 0), WeylLabel::single(3, 0, 1)), 1);
  EXPECT_EQ(qdm::weyl_commutator_phase(WeylLabel::single(3, 0, 1), WeylLabel::single(3, 1, 0)), 2);
}

TEST(WeylAlgebra, SelfAndDisjointCommute) {
  std::mt19937_64 rng(104);
  const auto a = random_label(3, 2, rng);
  EXPECT_EQ(qdm::weyl_commutator_phase(a, a), 0);
  EXPECT_EQ(qdm::weyl_commutator_phase(WeylLabel(3, {1, 0}, {0, 0}), WeylLabel(3, {0, 0}, {0, 1})), 0);
}

TEST(WeylAlgebra, OneDesignIdentity) {
  std::mt19937_64 rng(105);
  for (int d : {2, 3, 5})
    for (int t = 0; t < 200; ++t) {
      const Matrix a = oracle::haar(d, rng) * std::complex<double>(1.0 + t % 3, 0.5);
      Matrix avg = Matrix::Zero(d, d);
      for (int p = 0; p < d; ++p)
        for (int q = 0; q < d; ++q) {
          const Matrix w = qdm::weyl_single_matrix(d, p, q);
          avg += w * a * w.adjoint();
        }
      avg /= static_cast<double>(d * d);
      EXPECT_LT((avg - a.trace() / static_cast<double>(d) * Matrix::Identity(d, d)).norm(), 1e-10);
    }
}

TEST(WeylLabel, IndexRoundTrip) {
  for (int d : {2, 3})
    for (std::size_t i = 0; i < WeylLabel::count(d, 2); ++i) EXPECT_EQ(WeylLabel::from_index(d, 2, i).index(), i);
}

TEST(Clifford, CzFixesClockOnControl) {
  const auto img = qdm::clifford_conjugate(qdm::CliffordGate::cz(3), PhasedWeyl(WeylLabel(3, {1, 0}, {0, 0}), 0));
  EXPECT_EQ(img.label, WeylLabel(3, {1, 0}, {0, 0}));
  EXPECT_EQ(img.phase_exp, 0);
}

TEST(Clifford, CzSendsShiftToShiftClock) {
  const auto img = qdm::clifford_conjugate(qdm::CliffordGate::cz(3), PhasedWeyl(WeylLabel(3, {0, 0}, {1, 0}), 0));
  EXPECT_EQ(img.label, WeylLabel(3, {0, 1}, {1, 0}));
  EXPECT_EQ(img.phase_exp, 0);
  const Matrix u = oracle::cz(3, 1);
  const Matrix conj = u * oracle::kron(oracle::shift(3), Matrix::Identity(3, 3)) * u.adjoint();
  EXPECT_LT((conj - oracle::kron(oracle::shift(3), oracle::clock(3))).norm(), 1e-13);
}

TEST(Clifford, HadamardSendsClockToShiftType) {
  const auto img = qdm::clifford_conjugate(qdm::CliffordGate::hadamard(3), PhasedWeyl(WeylLabel::single(3, 1, 0), 0));
  EXPECT_EQ(img.label.p[0], 0);
  EXPECT_NE(img.label.q[0], 0);
  const Matrix h = oracle::hadamard(3);
  EXPECT_LT((qdm::weyl_matrix(img) - h * oracle::clock(3) * h.adjoint()).norm(), 1e-12);
}

TEST(Clifford, ConjugationMatchesMatrixOracle) {
  std::mt19937_64 rng(106);
  for (int d : {2, 3, 5}) {
    std::vector<std::pair<qdm::CliffordGate, Matrix>> gates{
        {qdm::CliffordGate::cz(d), oracle::cz(d, 1)},
        {qdm::CliffordGate::cz_dag(d), oracle::cz(d, -1)},
    };
    for (auto& [g, u] : gates)
      for (int t = 0; t < 50; ++t) {
        const PhasedWeyl w(random_label(d, 2, rng), t % (2 * d));
        const auto img = qdm::clifford_conjugate(g, w);
        EXPECT_LT((qdm::weyl_matrix(img) - u * qdm::weyl_matrix(w) * u.adjoint()).norm(), 1e-10);
      }
    for (auto g : {qdm::CliffordGate::hadamard(d), qdm::CliffordGate::sdiag(d)})
      for (int t = 0; t < 20; ++t) {
        const PhasedWeyl w(random_label(d, 1, rng), 0);
        const auto img = qdm::clifford_conjugate(g, w);
        EXPECT_LT((qdm::weyl_matrix(img) - g.matrix() * qdm::weyl_matrix(w) * g.matrix().adjoint()).norm(), 1e-10);
      }
  }
}

TEST(Clifford, CzIsBijectionOnTwoQutritLabels) {
  std::set<std::size_t> images;
  for (std::size_t i = 0; i < 81; ++i)
    images.insert(qdm::clifford_conjugate(qdm::CliffordGate::cz(3), PhasedWeyl(WeylLabel::from_index(3, 2, i), 0)).label.index());
  EXPECT_EQ(images.size(), 81u);
}

TEST(Clifford, NonCliffordRejected) {
  std::mt19937_64 rng(107);
  EXPECT_THROW(qdm::CliffordGate::custom(oracle::haar(3, rng), 3), qdm::NormalizerViolation);
}

TEST(Clifford, CzDagMatrixAndOrder) {
  const Matrix u = qdm::cz_matrix(3, -1);
  EXPECT_LT(std::abs(u(4, 4) - std::polar(1.0, 4 * std::numbers::pi / 3)), 1e-15);
  EXPECT_LT((u * u * u - Matrix::Identity(9, 9)).norm(), 1e-13);
}

TEST(Eigenbasis, Examples) {
  EXPECT_LT((qdm::weyl_eigenbasis(WeylLabel::single(3, 1, 0)) - Matrix::Identity(3, 3)).norm(), 1e-12);
  EXPECT_LT((qdm::weyl_eigenbasis(WeylLabel::single(3, 0, 0)) - Matrix::Identity(3, 3)).norm(), 1e-15);
  const Matrix v = qdm::weyl_eigenbasis(WeylLabel::single(3, 0, 1));
  // Fourier columns up to phases
  const Matrix f = oracle::hadamard(3).adjoint();
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(std::abs((f.col(k).adjoint() * v.col(k))(0)), 1.0, 1e-12);
}

TEST(Eigenbasis, OrderedDiagonalizationForAllLabels) {
  for (int d : {2, 3, 5})
    for (int p = 0; p < d; ++p)
      for (int q = 0; q < d; ++q) {
        if (p == 0 && q == 0) continue;
        const Matrix v = qdm::weyl_eigenbasis(WeylLabel::single(d, p, q));
        EXPECT_LT((v.adjoint() * v - Matrix::Identity(d, d)).norm(), 1e-12);
        const Matrix diag = v.adjoint() * oracle::weyl(d, p, q) * v;
        for (int k = 0; k < d; ++k) EXPECT_LT(std::abs(diag(k, k) - oracle::omega(d, k)), 1e-10);
        EXPECT_LT((diag - Matrix(diag.diagonal().asDiagonal())).norm(), 1e-10);
      }
}

TEST(Twirl, MatchesBruteForceAverage) {
  std::mt19937_64 rng(108);
  for (auto [d, n] : {std::pair{3, 1}, std::pair{2, 2}, std::pair{3, 2}}) {
    const int dim = static_cast<int>(std::pow(d, n));
    const auto ks = oracle::random_kraus(dim, 2, rng);
    const auto tw = qdm::twirl_channel(qdm::QuantumChannel(ks), d);
    const Matrix rho = oracle::random_density(dim, rng);
    Matrix brute = Matrix::Zero(dim, dim);
    const int count = static_cast<int>(std::pow(d * d, n));
    for (int i = 0; i < count; ++i) {
      const Matrix w = oracle::weyl_by_index(d, n, i);
      brute += w.adjoint() * oracle::apply_kraus(ks, w * rho * w.adjoint()) * w;
    }
    brute /= static_cast<double>(count);
    EXPECT_LT((qdm::apply_channel(tw, qdm::DensityMatrix(rho)).data() - brute).norm(), 1e-10);
  }
}

TEST(Twirl, FixedPoints) {
  const auto id = qdm::twirl_channel(qdm::QuantumChannel::identity(9), 3);
  EXPECT_LT((id.superoperator() - Matrix::Identity(81, 81)).norm(), 1e-12);
  const auto st = qdm::depolarizing_weyl_channel(3, 1, 0.1);
  EXPECT_LT((qdm::twirl_channel(st, 3).superoperator() - st.superoperator()).norm(), 1e-10);
}

TEST(Twirl, UnitaryChannelBecomesDiagonalWithSameFidelity) {
  std::mt19937_64 rng(109);
  const qdm::Matrix u = oracle::haar(3, rng);
  const auto ch = qdm::QuantumChannel::unitary(u);
  const auto tw = qdm::twirl_channel(ch, 3);
  const auto r = oracle::ptm(tw.kraus(), 3, 1);
  Matrix off = r;
  off.diagonal().setZero();
  EXPECT_LT(off.norm(), 1e-10);
  EXPECT_NEAR(r.trace().real(), oracle::ptm(ch.kraus(), 3, 1).trace().real(), 1e-10);
}

}  // namespace
