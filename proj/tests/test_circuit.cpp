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
using qdm::Cycle;
using qdm::Gate;
using qdm::Matrix;

TEST(CzDag, MatchesExplicitMatrix) {
  const Matrix cz = Gate::cz_dag(3).matrix;
  EXPECT_LT((cz - oracle::cz(3, -1)).norm(), 1e-14);
  EXPECT_LT(std::abs(cz(4, 4) - std::polar(1.0, 4.0 * std::numbers::pi / 3.0)), 1e-14);
  EXPECT_LT((cz * cz * cz - Matrix::Identity(9, 9)).norm(), 1e-13);
}

TEST(Ghz, NoiselessFidelityIsOne) {
  for (int n : {2, 3}) {
    const auto c = qdm::ghz_circuit(n, 3);
    const qdm::Vector psi = qdm::ghz_state(n, 3);
    const Matrix rho = qdm::simulate_matrix(c, nullptr);
    EXPECT_NEAR((psi.adjoint() * rho * psi)(0, 0).real(), 1.0, 1e-12) << "n=" << n;
    EXPECT_EQ(c.num_hard(), static_cast<std::size_t>(n - 1));
  }
}

TEST(Ghz, RejectsSingleQudit) { EXPECT_THROW(qdm::ghz_circuit(1, 3), qdm::DomainError); }

oracle::V statevector_of(const Circuit& c) {
  std::vector<oracle::Step> steps;
  for (const auto& cyc : c.cycles())
    for (const auto& pl : cyc.gates) steps.push_back({pl.qudits, pl.gate.matrix});
  return oracle::run_statevector(c.n(), c.d(), steps);
}

TEST(Rcs, MatchesStatevectorOracle) {
  for (int n : {2, 3})
    for (int depth : {0, 1, 4}) {
      const auto c = qdm::rcs_circuit(n, depth, 17 + depth);
      const oracle::V psi = statevector_of(c);
      const Matrix rho = qdm::simulate_matrix(c, nullptr);
      EXPECT_LT((rho - psi * psi.adjoint()).norm(), 1e-12) << "n=" << n << " depth=" << depth;
    }
}

TEST(Rcs, DepthZeroIsOneHaarLayer) {
  const auto c = qdm::rcs_circuit(2, 0, 3);
  ASSERT_EQ(c.cycles().size(), 1u);
  EXPECT_FALSE(c.cycles()[0].is_hard());
}

TEST(Rcs, PairsAlternateOnThreeQutrits) {
  const auto c = qdm::rcs_circuit(3, 4, 9);
  const auto hard = c.hard_cycle_positions();
  ASSERT_EQ(hard.size(), 4u);
  for (std::size_t l = 0; l < hard.size(); ++l) {
    const auto& q = c.cycles()[hard[l]].gates[0].qudits;
    const int a = l % 2 ? 1 : 0;
    EXPECT_EQ(q, (std::vector<int>{a, a + 1}));
  }
}

TEST(Rcs, SeedsAreReproducible) {
  EXPECT_TRUE(qdm::structurally_equal(qdm::rcs_circuit(3, 3, 5), qdm::rcs_circuit(3, 3, 5)));
  EXPECT_FALSE(qdm::structurally_equal(qdm::rcs_circuit(3, 3, 5), qdm::rcs_circuit(3, 3, 6)));
}

TEST(Circuit, RejectsOverlappingGates) {
  EXPECT_THROW(Circuit(2, 3, {Cycle::easy({{{0}, Gate::hadamard(3)}, {{0}, Gate::hadamard(3)}})}), qdm::DimensionError);
}

TEST(Circuit, UnitaryMatchesOracle) {
  const auto c = qdm::ghz_circuit(3, 3);
  EXPECT_LT((c.unitary().col(0) - statevector_of(c)).norm(), 1e-12);
}

}  // namespace
