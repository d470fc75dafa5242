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

using qdm::Circuit;
using qdm::Matrix;

double overlap(const Matrix& a, const Matrix& b) { return (a * b).trace().real(); }

TEST(RandomizedCompiling, NoiselessActionUnchanged) {
  for (std::uint64_t s = 0; s < 30; ++s) {
    const Circuit c = s % 2 ? qdm::ghz_circuit(3, 3) : qdm::rcs_circuit(2, 1 + s % 5, s);
    const Matrix r0 = qdm::simulate_matrix(c, nullptr);
    const auto rc = qdm::randomize(c, 100 + s);
    EXPECT_EQ(rc.circuit.num_hard(), c.num_hard());
    EXPECT_EQ(rc.circuit.cycles().size(), c.cycles().size());
    EXPECT_NEAR(overlap(r0, qdm::simulate_matrix(rc.circuit, nullptr)), 1.0, 1e-11);
  }
}

TEST(RandomizedCompiling, HardCyclesUntouched) {
  const Circuit c = qdm::ghz_circuit(3, 3);
  const auto rc = qdm::randomize(c, 4);
  for (auto pos : c.hard_cycle_positions()) EXPECT_EQ(rc.circuit.cycles()[pos].signature(), c.cycles()[pos].signature());
}

TEST(RandomizedCompiling, ExhaustiveAverageIsTwirledChannel) {
  // one CZdag cycle with a coherent error; averaging over every twirl gives
  // a Weyl-stochastic effective noise
  const Circuit c(2, 3, {qdm::Cycle::hard({{{0, 1}, qdm::Gate::cz_dag(3)}})});
  qdm::NoiseModel noise(2, 3);
  noise.add_hard("CZdag(0,1)", {0, 1}, qdm::coherent_phase_error({0.2, -0.1, 0.05, 0.3}));
  Matrix avg = Matrix::Zero(81, 81);
  for (std::size_t k = 0; k < 81; ++k)
    avg += qdm::circuit_superoperator(qdm::randomize_with(c, {qdm::WeylLabel::from_index(3, 2, k)}).circuit, &noise);
  avg /= 81.0;
  const Matrix cz = qdm::Gate::cz_dag(3).matrix;
  const Matrix eff = avg * qdm::kron(cz, cz.conjugate()).adjoint();
  const auto t = qdm::transfer_matrix_from_superoperator(eff, 3);
  EXPECT_LT(t.offdiagonal_mass(), 1e-10);
  const auto direct = qdm::transfer_matrix(qdm::twirl_channel(qdm::coherent_phase_error({0.2, -0.1, 0.05, 0.3}), 3), 3);
  EXPECT_LT((t.r - direct.r).norm(), 1e-10);
}

TEST(Fold, OrderPowerAlpha) {
  const Circuit c = qdm::ghz_circuit(3, 3);
  const auto f = qdm::fold(c, {0, 1, qdm::FoldStrategy::OrderPower});
  EXPECT_EQ(f.order, 3);
  EXPECT_EQ(f.alpha, 4);
  EXPECT_EQ(f.circuit.num_hard(), 5u);
  EXPECT_EQ(qdm::fold(c, {1, 3, qdm::FoldStrategy::OrderPower}).alpha, 10);
  EXPECT_EQ(qdm::fold(c, {0, 2, qdm::FoldStrategy::InversePair}).alpha, 5);
}

TEST(Fold, NoiselessEquivalence) {
  const Circuit c = qdm::rcs_circuit(3, 3, 2);
  const Matrix r0 = qdm::simulate_matrix(c, nullptr);
  for (auto s : {qdm::FoldStrategy::OrderPower, qdm::FoldStrategy::InversePair})
    for (std::size_t j = 0; j < 3; ++j)
      EXPECT_NEAR(overlap(r0, qdm::simulate_matrix(qdm::fold(c, {j, 2, s}).circuit, nullptr)), 1.0, 1e-11);
}

TEST(Fold, RejectsBadSpecs) {
  const Circuit c = qdm::ghz_circuit(2, 3);
  EXPECT_THROW(qdm::fold(c, {0, 0, qdm::FoldStrategy::OrderPower}), qdm::DomainError);
  EXPECT_THROW(qdm::fold(c, {5, 1, qdm::FoldStrategy::OrderPower}), qdm::DomainError);
}

TEST(Nox, RecoversLinearDecayExactly) {
  // independent per-cycle noise: E = 1 - e1 - e2, copy j scales e_j by alpha_j
  const double e1 = 0.03, e2 = 0.05;
  const std::vector<int> alphas{4, 10};
  const std::vector<double> copies{1 - 4 * e1 - e2, 1 - e1 - 10 * e2}, ses{0.01, 0.02};
  const auto out = qdm::nox_combine(1 - e1 - e2, 0.005, copies, ses, alphas);
  EXPECT_NEAR(out.value, 1.0, 1e-14);
  const double w1 = 1.0 / 3, w2 = 1.0 / 9;
  EXPECT_NEAR(out.std_error, std::sqrt(w1 * w1 * 1e-4 + w2 * w2 * 4e-4 + std::pow(1 + w1 + w2, 2) * 2.5e-5), 1e-15);
}

TEST(Nox, RejectsAlphaOne) {
  const std::vector<double> v{0.5}, s{0.0};
  const std::vector<int> a{1};
  EXPECT_THROW(qdm::nox_combine(0.5, 0, v, s, a), qdm::DomainError);
}

TEST(Hoeffding, BoundValues) {
  EXPECT_NEAR(qdm::hoeffding_bound(0.1, 100), 1 - std::exp(-2.0), 1e-15);
  EXPECT_THROW(qdm::hoeffding_bound(0.0, 10), qdm::DomainError);
  EXPECT_THROW(qdm::hoeffding_bound(0.1, 0), qdm::DomainError);
}

TEST(RcEstimate, ExactNoiselessEqualsIdeal) {
  const Circuit c = qdm::ghz_circuit(2, 3);
  const auto obs = qdm::Observable::projector(qdm::ghz_state(2, 3));
  qdm::RcConfig cfg{5, 0, 3};
  const auto e = qdm::rc_estimate(c, obs, nullptr, cfg);
  EXPECT_NEAR(e.value, 1.0, 1e-12);
  EXPECT_EQ(e.samples.size(), 5u);
}

TEST(RcEstimate, NoxImprovesStochasticNoise) {
  const Circuit c = qdm::ghz_circuit(3, 3);
  qdm::NoiseModel noise(3, 3);
  noise.add_hard("CZdag(0,1)", {0, 1}, qdm::depolarizing_weyl_channel(3, 2, 0.02));
  noise.add_hard("CZdag(1,2)", {1, 2}, qdm::depolarizing_weyl_channel(3, 2, 0.02));
  const auto obs = qdm::Observable::projector(qdm::ghz_state(3, 3));
  qdm::RcConfig cfg{4, 0, 1};
  const auto rc = qdm::rc_estimate(c, obs, &noise, cfg);
  const auto nox = qdm::nox_estimate(c, obs, &noise, cfg, qdm::fold_every_cycle(c, 1));
  EXPECT_LT(rc.value, 0.99);
  EXPECT_LT(std::abs(1 - nox.value), 0.1 * std::abs(1 - rc.value));
}

}  // namespace
