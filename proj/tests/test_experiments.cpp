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

#include "qdm/qdm.hpp"

namespace {

TEST(VariationDistance, Examples) {
  const std::vector<double> p{0.5, 0.5, 0}, q{0, 0.5, 0.5}, r{0.2, 0.3, 0.5};
  EXPECT_NEAR(qdm::variation_distance(p, q), 0.5, 1e-15);
  EXPECT_NEAR(qdm::variation_distance(p, p), 0.0, 1e-15);
  EXPECT_NEAR(qdm::variation_distance(p, r), 0.5, 1e-15);
  const std::vector<double> a{1, 0, 0}, b{0, 0, 1};
  EXPECT_NEAR(qdm::variation_distance(a, b), 1.0, 1e-15);
}

TEST(PhaseChar, IdealGatePhases) {
  const auto noise = qdm::NoiseModel::none(2, 3);
  const double pi = std::numbers::pi;
  const double ideal[3] = {0.0, -2 * pi / 3, 2 * pi / 3};
  for (int s = 0; s < 3; ++s) {
    const auto r = qdm::characterize_entangling_phase(noise, s, {});
    EXPECT_NEAR(qdm::wrap_phase(r.phase - ideal[s]), 0.0, 1e-10) << s;
    EXPECT_GT(r.r2, 0.999);
  }
}

TEST(PhaseChar, InjectedPhaseIsRecovered) {
  qdm::NoiseModel noise(2, 3);
  noise.add_hard("CZdag(0,1)", {0, 1}, qdm::coherent_phase_error({0.1, 0, 0, 0}));
  const auto r1 = qdm::characterize_entangling_phase(noise, 1, {});
  EXPECT_NEAR(qdm::wrap_phase(r1.phase + 2 * std::numbers::pi / 3), 0.1, 1e-10);
  const auto r2 = qdm::characterize_entangling_phase(noise, 2, {});
  EXPECT_NEAR(qdm::wrap_phase(r2.phase - 2 * std::numbers::pi / 3), 0.0, 1e-10);
}

TEST(PhaseChar, RejectsBadControl) {
  EXPECT_THROW(qdm::characterize_entangling_phase(qdm::NoiseModel::none(2, 3), 3, {}), qdm::DomainError);
}

TEST(DecayFamily, ClosedFormMatchesTransferMatrix) {
  qdm::Rng rng(12);
  for (int d : {2, 3}) {
    const auto fam = qdm::random_coherent_family(d, 2, 0.01, rng);
    for (double theta : {0.1, 0.4, 0.9})
      EXPECT_NEAR(fam.fraction_at(theta), qdm::coherent_fraction(fam.at(theta)).value(), 1e-10) << d << " " << theta;
  }
}

TEST(DecayFamily, CalibrationHitsTarget) {
  qdm::Rng rng(13);
  const auto ch = qdm::calibrated_coherent_channel(qdm::random_coherent_family(3, 2, 0.01, rng), 0.7, 1e-4);
  EXPECT_NEAR(ch.coherent_fraction, 0.7, 1e-4);
}

TEST(DecayFamily, MaskedTwirlMatchesExplicitConjugation) {
  qdm::Rng rng(14);
  const auto fam = qdm::random_coherent_family(3, 1, 0.01, rng);
  const auto t = fam.at(0.6);
  const auto comm = qdm::commutator_table(3, 1);
  const std::vector<std::size_t> twirls{0, 4, 7};
  // explicit: (1/N) sum_k R_Wk^dagger R R_Wk
  qdm::Matrix avg = qdm::Matrix::Zero(9, 9);
  for (auto k : twirls) {
    const auto w = qdm::transfer_matrix(qdm::QuantumChannel::unitary(qdm::weyl_matrix(qdm::WeylLabel::from_index(3, 1, k))), 3);
    avg += w.r.adjoint() * t.r * w.r;
  }
  avg /= static_cast<double>(twirls.size());
  const qdm::TransferMatrix explicit_t{3, 1, avg};
  EXPECT_NEAR(qdm::twirled_coherent_fraction(t, comm, twirls), qdm::coherent_fraction(explicit_t).value(), 1e-10);
  std::vector<std::size_t> all(9);
  for (std::size_t k = 0; k < 9; ++k) all[k] = k;
  // the full twirl keeps only the diagonal of R
  qdm::TransferMatrix diag_t{3, 1, qdm::Matrix(t.r.diagonal().asDiagonal())};
  EXPECT_NEAR(qdm::twirled_coherent_fraction(t, comm, all), qdm::coherent_fraction(diag_t).value(), 1e-10);
}

TEST(LinearFit, ExactLine) {
  const std::vector<double> x{1, 2, 3, 4}, y{3, 5, 7, 9};
  const auto f = qdm::linear_fit(x, y);
  EXPECT_NEAR(f[0], 1.0, 1e-12);
  EXPECT_NEAR(f[1], 2.0, 1e-12);
  EXPECT_NEAR(f[2], 1.0, 1e-12);
}

TEST(Ghz, NoiselessExperimentIsPerfect) {
  qdm::GhzConfig cfg;
  cfg.n = 2;
  cfg.shots = 0;
  cfg.randomizations = 2;
  const auto r = qdm::ghz_experiment(cfg, qdm::NoiseModel::none(2, 3));
  for (const auto& m : r.methods) EXPECT_NEAR(m.fidelity, 1.0, 1e-9) << qdm::to_string(m.method);
}

TEST(Rcs, NoiselessVariationDistanceIsZero) {
  qdm::RcsConfig cfg;
  cfg.depths = {1, 2};
  cfg.instances = 3;
  cfg.randomizations = 2;
  cfg.shots = 0;
  const auto r = qdm::rcs_experiment(cfg, qdm::NoiseModel::none(2, 3));
  for (const auto& x : r.instances) {
    EXPECT_NEAR(x.vd_bare, 0.0, 1e-10);
    EXPECT_NEAR(x.vd_mitigated, 0.0, 1e-10);
  }
}

}  // namespace
