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

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "qdm/qdm.hpp"

namespace {

using qdm::Matrix;

TEST(Kron, IdentityTimesIdentity) {
  EXPECT_LT((qdm::kron(Matrix::Identity(2, 2), Matrix::Identity(2, 2)) - Matrix::Identity(4, 4)).norm(), 1e-15);
}

TEST(Kron, ClockOnFirstQuditIsMostSignificant) {
  const Matrix zi = qdm::kron(qdm::weyl_single_matrix(3, 1, 0), Matrix::Identity(3, 3));
  for (int s = 0; s < 9; ++s) EXPECT_LT(std::abs(zi(s, s) - oracle::omega(3, s / 3)), 1e-14);
  EXPECT_LT((zi - Matrix(zi.diagonal().asDiagonal())).norm(), 1e-15);
}

TEST(Kron, ShiftShiftMapsZeroZeroToOneOne) {
  const Matrix xx = qdm::kron(oracle::shift(3), oracle::shift(3));
  qdm::Vector e00 = qdm::Vector::Zero(9);
  e00(0) = 1;
  const qdm::Vector out = xx * e00;
  EXPECT_NEAR(std::abs(out(4)), 1.0, 1e-15);  // |11> = 1*3+1
  EXPECT_NEAR(out.norm(), 1.0, 1e-15);
}

TEST(Kron, MatchesLoopOracleAndIsAssociative) {
  std::mt19937_64 rng(3);
  const auto a = oracle::haar(3, rng), b = oracle::haar(2, rng), c = oracle::haar(3, rng);
  EXPECT_LT((qdm::kron(a, b) - oracle::kron(a, b)).norm(), 1e-14);
  EXPECT_LT((qdm::kron(qdm::kron(a, b), c) - qdm::kron(a, qdm::kron(b, c))).norm(), 1e-12);
}

TEST(Kron, CapacityExceeded) {
  std::vector<Matrix> f(8, Matrix::Identity(3, 3));
  EXPECT_THROW(qdm::kron_all(f), qdm::CapacityError);
}

TEST(LocalApply, UnitaryMatchesEmbeddedOracle) {
  std::mt19937_64 rng(11);
  const int n = 3, d = 3;
  for (const std::vector<int>& t : {std::vector<int>{0}, {2}, {0, 2}, {2, 1}, {1, 0, 2}}) {
    const int k = static_cast<int>(t.size());
    const Matrix u = oracle::haar(static_cast<int>(std::pow(d, k)), rng);
    const Matrix rho = oracle::random_density(27, rng);
    Matrix got = rho;
    qdm::apply_unitary_local(got, u, n, d, t);
    const Matrix full = oracle::embed(u, n, d, t);
    EXPECT_LT((got - full * rho * full.adjoint()).norm(), 1e-12);
  }
}

TEST(LocalApply, SuperoperatorMatchesKrausOracle) {
  std::mt19937_64 rng(12);
  const int n = 3, d = 3;
  for (const std::vector<int>& t : {std::vector<int>{1}, {0, 2}, {2, 0}}) {
    const int dim = static_cast<int>(std::pow(d, t.size()));
    const auto ks = oracle::random_kraus(dim, 3, rng);
    const Matrix rho = oracle::random_density(27, rng);
    Matrix got = rho;
    qdm::apply_superop_local(got, qdm::kraus_superoperator(ks), n, d, t);
    std::vector<Matrix> full;
    for (const auto& k : ks) full.push_back(oracle::embed(k, n, d, t));
    EXPECT_LT((got - oracle::apply_kraus(full, rho)).norm(), 1e-12);
  }
}

TEST(Channel, IdentityLeavesStateUnchanged) {
  std::mt19937_64 rng(1);
  const qdm::DensityMatrix rho(oracle::random_density(3, rng));
  const auto out = qdm::apply_channel(qdm::QuantumChannel::identity(3), rho);
  EXPECT_LT((out.data() - rho.data()).norm(), 1e-14);
}

TEST(Channel, UniformWeylChannelFullyDepolarizes) {
  std::mt19937_64 rng(2);
  std::vector<double> probs(9, 1.0 / 9.0);
  const auto ch = qdm::weyl_channel(3, 1, probs);
  for (int trial = 0; trial < 5; ++trial) {
    const Matrix rho = oracle::random_density(3, rng);
    Matrix brute = Matrix::Zero(3, 3);
    for (int p = 0; p < 3; ++p)
      for (int q = 0; q < 3; ++q) brute += oracle::weyl(3, p, q) * rho * oracle::weyl(3, p, q).adjoint() / 9.0;
    const auto out = qdm::apply_channel(ch, qdm::DensityMatrix(rho));
    EXPECT_LT((out.data() - brute).norm(), 1e-12);
    EXPECT_LT((out.data() - Matrix::Identity(3, 3) / 3.0).norm(), 1e-12);
  }
}

TEST(Channel, SingleKrausIsUnitaryConjugation) {
  std::mt19937_64 rng(4);
  const Matrix u = oracle::haar(3, rng);
  const Matrix rho = oracle::random_density(3, rng);
  const auto out = qdm::apply_channel(qdm::QuantumChannel::unitary(u), qdm::DensityMatrix(rho));
  EXPECT_LT((out.data() - u * rho * u.adjoint()).norm(), 1e-13);
}

TEST(Channel, RandomChannelsPreserveTraceAndHermiticity) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const int dim = trial % 2 ? 3 : 9;
    const qdm::QuantumChannel ch(oracle::random_kraus(dim, 1 + trial % 4, rng));
    const auto out = qdm::apply_channel(ch, qdm::DensityMatrix(oracle::random_density(dim, rng)));
    EXPECT_NEAR(out.data().trace().real(), 1.0, 1e-12);
    EXPECT_LT(qdm::hermiticity_residual(out.data()), 1e-12);
    EXPECT_TRUE(ch.is_completely_positive());
  }
}

TEST(Channel, RejectsNonTracePreserving) {
  std::vector<Matrix> ks{0.5 * Matrix::Identity(3, 3)};
  EXPECT_THROW(qdm::QuantumChannel{ks}, qdm::InvariantViolation);
}

TEST(Channel, SuperoperatorRoundTrip) {
  std::mt19937_64 rng(6);
  const qdm::QuantumChannel ch(oracle::random_kraus(3, 2, rng));
  const auto back = qdm::QuantumChannel::from_superoperator(ch.superoperator());
  EXPECT_LT((back.superoperator() - ch.superoperator()).norm(), 1e-10);
  EXPECT_LE(back.kraus().size(), 9u);
}

TEST(Expectation, IdentityIsOne) {
  std::mt19937_64 rng(7);
  const qdm::DensityMatrix rho(oracle::random_density(9, rng));
  EXPECT_NEAR(std::abs(qdm::expectation(Matrix::Identity(9, 9), rho) - 1.0), 0.0, 1e-12);
}

TEST(Expectation, ClockOnOneGivesOmega) {
  const auto e = qdm::expectation(qdm::weyl_single_matrix(3, 1, 0), qdm::DensityMatrix::basis(3, 1));
  EXPECT_LT(std::abs(e - oracle::omega(3)), 1e-14);
}

TEST(Expectation, ClockClockOnGhzMatchesTraceOracle) {
  const Matrix zzi = oracle::kron(oracle::kron(oracle::clock(3), oracle::clock(3)), Matrix::Identity(3, 3));
  oracle::V psi = oracle::V::Zero(27);
  for (int k = 0; k < 3; ++k) psi(k * 13) = 1.0 / std::sqrt(3.0);
  const Matrix rho = psi * psi.adjoint();
  const auto got = qdm::expectation(zzi, qdm::DensityMatrix(rho));
  EXPECT_LT(std::abs(got - (zzi * rho).trace()), 1e-14);
}

TEST(Expectation, Linear) {
  std::mt19937_64 rng(8);
  const qdm::DensityMatrix rho(oracle::random_density(3, rng));
  const Matrix o1 = oracle::random_density(3, rng), o2 = oracle::haar(3, rng);
  const qdm::Complex a(0.3, -1.2), b(2.0, 0.5);
  const auto lhs = qdm::expectation(a * o1 + b * o2, rho);
  const auto rhs = a * qdm::expectation(o1, rho) + b * qdm::expectation(o2, rho);
  EXPECT_LT(std::abs(lhs - rhs), 1e-10);
}

TEST(DensityMatrixInvariants, RejectsBadInput) {
  Matrix m = Matrix::Identity(3, 3) / 3.0;
  m(0, 1) = 0.1;
  EXPECT_THROW(qdm::DensityMatrix{m}, qdm::InvariantViolation);
  EXPECT_THROW(qdm::DensityMatrix{Matrix(Matrix::Identity(3, 3))}, qdm::InvariantViolation);
  Matrix neg = Matrix::Zero(2, 2);
  neg(0, 0) = 1.5;
  neg(1, 1) = -0.5;
  EXPECT_THROW(qdm::DensityMatrix{neg}, qdm::InvariantViolation);
}

TEST(SampleCounts, PointMass) {
  std::vector<double> p(9, 0.0);
  p[5] = 1.0;
  const auto c = qdm::sample_counts(qdm::OutcomeDistribution(2, 3, p), 100, 1);
  EXPECT_EQ(c[5], 100u);
}

TEST(SampleCounts, UniformFrequenciesWithinThreeSigma) {
  const std::uint64_t shots = 1000000;
  const auto c = qdm::sample_counts(qdm::OutcomeDistribution(2, 3, std::vector<double>(9, 1.0 / 9)), shots, 42);
  const double sigma = std::sqrt((1.0 / 9) * (8.0 / 9) / shots);
  for (auto v : c) EXPECT_LT(std::abs(static_cast<double>(v) / shots - 1.0 / 9), 3 * sigma);
}

TEST(SampleCounts, DeterministicPerSeed) {
  const qdm::OutcomeDistribution d(1, 3, {0.2, 0.3, 0.5});
  EXPECT_EQ(qdm::sample_counts(d, 1000, 9), qdm::sample_counts(d, 1000, 9));
  EXPECT_NE(qdm::sample_counts(d, 1000, 9), qdm::sample_counts(d, 1000, 10));
}

TEST(SampleCounts, TrailingZeroProbabilityNeverSampled) {
  const qdm::OutcomeDistribution d(1, 3, {0.5, 0.5, 0.0});
  for (std::uint64_t s = 0; s < 50; ++s) EXPECT_EQ(qdm::sample_counts(d, 37, s)[2], 0u);
}

TEST(SampleCounts, QuasiInputRejected) {
  const qdm::OutcomeDistribution d(1, 3, {1.1, -0.1, 0.0}, true);
  EXPECT_THROW(qdm::sample_counts(d, 10, 1), qdm::DomainError);
  EXPECT_NO_THROW(qdm::sample_counts(d.clipped(), 10, 1));
}

}  // namespace
