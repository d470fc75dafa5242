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

TEST(CrossKerr, DiagonalPhases) {
  const qdm::CrossKerrParams p{0.1, 0.2, 0.3, 0.4, 0.5};
  const Matrix u = qdm::cross_kerr_unitary(p).data();
  const double w = 2.0 * std::numbers::pi * 0.5;
  EXPECT_LT(std::abs(u(4, 4) - std::polar(1.0, -w * 0.1)), 1e-14);
  EXPECT_LT(std::abs(u(5, 5) - std::polar(1.0, -w * 0.2)), 1e-14);
  EXPECT_LT(std::abs(u(7, 7) - std::polar(1.0, -w * 0.3)), 1e-14);
  EXPECT_LT(std::abs(u(8, 8) - std::polar(1.0, -w * 0.4)), 1e-14);
  for (int k : {0, 1, 2, 3, 6}) EXPECT_LT(std::abs(u(k, k) - 1.0), 1e-15);
  EXPECT_LT((u - Matrix(u.diagonal().asDiagonal())).norm(), 1e-15);
}

TEST(CoherentPhase, OnlyTouchesExcitedPairs) {
  const auto ch = qdm::coherent_phase_error({0.1, 0.0, 0.0, -0.2});
  ASSERT_EQ(ch.kraus().size(), 1u);
  const Matrix& u = ch.kraus()[0];
  EXPECT_LT(std::abs(u(4, 4) - std::polar(1.0, 0.1)), 1e-15);
  EXPECT_LT(std::abs(u(8, 8) - std::polar(1.0, -0.2)), 1e-15);
  EXPECT_LT(std::abs(u(5, 5) - 1.0), 1e-15);
}

TEST(CoherentPhase, SpectatorTerm) {
  qdm::SpectatorPhase sp;
  sp.gate_qudit = 1;
  sp.deltas = {0.3, 0, 0, 0};
  const Matrix u = qdm::coherent_phase_error({0, 0, 0, 0}, sp).kraus()[0];
  // |a b s> = |0 1 1> picks up the spectator phase
  EXPECT_LT(std::abs(u(4, 4) - std::polar(1.0, 0.3)), 1e-15);
  EXPECT_LT(std::abs(u(13, 13) - std::polar(1.0, 0.3)), 1e-15);
  EXPECT_LT(std::abs(u(12, 12) - 1.0), 1e-15);
}

TEST(StochasticWeyl, MatchesKrausOracle) {
  std::vector<std::pair<qdm::WeylLabel, double>> probs{
      {qdm::WeylLabel::single(3, 0, 0), 0.9}, {qdm::WeylLabel::single(3, 1, 0), 0.06}, {qdm::WeylLabel::single(3, 1, 2), 0.04}};
  const auto ch = qdm::stochastic_weyl_channel(probs);
  std::mt19937_64 rng(3);
  const Matrix rho = oracle::random_density(3, rng);
  Matrix expect = 0.9 * rho;
  expect += 0.06 * oracle::weyl(3, 1, 0) * rho * oracle::weyl(3, 1, 0).adjoint();
  expect += 0.04 * oracle::weyl(3, 1, 2) * rho * oracle::weyl(3, 1, 2).adjoint();
  EXPECT_LT((qdm::apply_channel(ch, qdm::DensityMatrix(rho)).data() - expect).norm(), 1e-13);
}

TEST(Depolarizing, WeylErrorProbabilities) {
  const auto ch = qdm::depolarizing_weyl_channel(3, 1, 0.09);
  const auto p = qdm::weyl_error_probabilities(ch, 3);
  EXPECT_NEAR(p[0], 1 - 0.09, 1e-13);
  for (std::size_t k = 1; k < p.size(); ++k) EXPECT_NEAR(p[k], 0.09 / 8, 1e-13);
}

TEST(Confusion, QutritRouting) {
  const auto c = qdm::ConfusionMatrix::from_qutrit_fidelities(0.98, 0.95, 0.9).matrix();
  EXPECT_NEAR(c(1, 0), 0.02, 1e-15);
  EXPECT_NEAR(c(0, 1), 0.05, 1e-15);
  EXPECT_NEAR(c(1, 2), 0.10, 1e-15);
  for (int j = 0; j < 3; ++j) EXPECT_NEAR(c.col(j).sum(), 1.0, 1e-15);
}

TEST(Confusion, RejectsBadColumns) {
  qdm::RealMatrix m = qdm::RealMatrix::Identity(3, 3);
  m(0, 0) = 0.9;
  EXPECT_THROW(qdm::ConfusionMatrix{m}, qdm::DomainError);
}

TEST(Rcal, CorrectionInvertsConfusion) {
  const auto noise = qdm::paper_default_noise(2);
  std::vector<double> p{0.5, 0, 0, 0, 0.2, 0, 0, 0, 0.3};
  const qdm::OutcomeDistribution ideal(2, 3, p);
  const auto noisy = qdm::apply_confusion(ideal, noise.readout());
  const auto back = qdm::rcal_correct(noisy, noise.readout());
  for (std::size_t i = 0; i < p.size(); ++i) EXPECT_NEAR(back.probs[i], p[i], 1e-12);
}

TEST(Rcal, ExactEstimateMatchesDevice) {
  const auto noise = qdm::paper_default_noise(3);
  const auto r = qdm::rcal_confusion(noise, 0, 1);
  ASSERT_EQ(r.confusions.size(), 3u);
  EXPECT_FALSE(r.singular);
  for (std::size_t q = 0; q < 3; ++q)
    EXPECT_LT((r.confusions[q].matrix() - noise.readout()[q].matrix()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Rcal, SampledEstimateWithinStatisticalError) {
  const auto noise = qdm::paper_default_noise(2);
  const std::uint64_t shots = 20000;
  const auto r = qdm::rcal_confusion(noise, shots, 7);
  for (std::size_t q = 0; q < 2; ++q)
    for (int k = 0; k < 3; ++k) {
      const double p = noise.readout()[q].matrix()(k, k);
      EXPECT_NEAR(r.confusions[q].matrix()(k, k), p, 4 * std::sqrt(p * (1 - p) / shots) + 1e-12);
    }
}

TEST(NoiseModel, RejectsMismatchedTargets) {
  qdm::NoiseModel m(2, 3);
  EXPECT_THROW(m.add_easy({0}, qdm::depolarizing_weyl_channel(3, 2, 0.1)), qdm::DimensionError);
  EXPECT_THROW(m.add_easy({2}, qdm::depolarizing_weyl_channel(3, 1, 0.1)), qdm::DimensionError);
}

TEST(Presets, NoneIsNoiseless) {
  EXPECT_TRUE(qdm::noise_preset("none", 3, 3).is_noiseless());
  EXPECT_THROW(qdm::noise_preset("bogus", 3, 3), qdm::Error);
}

}  // namespace
