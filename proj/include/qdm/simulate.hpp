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

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "qdm/circuit.hpp"
#include "qdm/linalg.hpp"
#include "qdm/noise.hpp"

namespace qdm {

inline void check_noise_fits(const Circuit& c, const NoiseModel* noise) {
  if (noise && (noise->n() != c.n() || noise->d() != c.d()))
    throw DimensionError("noise model register (" + std::to_string(noise->n()) + " qudits) does not match circuit");
}

/// Applies one cycle and, when a noise model is given, the noise that follows
/// it: the Hard cycle's attached channels or the Easy-cycle channels.
inline void apply_cycle(Matrix& rho, const Cycle& cycle, int n, int d, const NoiseModel* noise) {
  for (const auto& pl : cycle.gates) apply_unitary_local(rho, pl.gate.matrix, n, d, pl.qudits);
  if (!noise) return;
  if (cycle.is_hard()) {
    if (const auto* chans = noise->hard_noise(cycle))
      for (const auto& lc : *chans) apply_superop_local(rho, lc.superop, n, d, lc.targets);
  } else {
    for (const auto& lc : noise->easy()) apply_superop_local(rho, lc.superop, n, d, lc.targets);
  }
}

/// Unvalidated state after the circuit; hot loops use this directly.
inline Matrix simulate_matrix(const Circuit& c, const NoiseModel* noise, const Matrix* initial = nullptr) {
  check_noise_fits(c, noise);
  const auto dim = static_cast<Eigen::Index>(c.dim());
  Matrix rho;
  if (initial) {
    if (initial->rows() != dim) throw DimensionError("initial state dimension does not match circuit");
    rho = *initial;
  } else {
    rho = Matrix::Zero(dim, dim);
    rho(0, 0) = 1.0;
  }
  for (const auto& cyc : c.cycles()) apply_cycle(rho, cyc, c.n(), c.d(), noise);
  return rho;
}

/// Superoperator of the whole circuit on row-major vec(rho).
inline Matrix circuit_superoperator(const Circuit& c, const NoiseModel* noise) {
  const auto dim = static_cast<Eigen::Index>(c.dim());
  check_capacity(static_cast<std::size_t>(dim * dim));
  Matrix s(dim * dim, dim * dim);
  for (Eigen::Index col = 0; col < dim * dim; ++col) {
    Matrix e = Matrix::Zero(dim, dim);
    e(col / dim, col % dim) = 1.0;
    const Matrix out = simulate_matrix(c, noise, &e);
    for (Eigen::Index a = 0; a < dim; ++a)
      for (Eigen::Index b = 0; b < dim; ++b) s(a * dim + b, col) = out(a, b);
  }
  return s;
}

/// Final density matrix of `c` under `noise` (nullptr: noiseless), starting
/// from |0...0> unless `initial` is given.
inline DensityMatrix simulate(const Circuit& c, const NoiseModel* noise = nullptr,
                              const std::optional<DensityMatrix>& initial = std::nullopt) {
  if (initial && initial->dim() != c.dim()) throw DimensionError("initial state dimension does not match circuit");
  return DensityMatrix(simulate_matrix(c, noise, initial ? &initial->data() : nullptr));
}

struct MeasurementResult {
  OutcomeDistribution exact;     ///< after readout confusion, before sampling
  std::vector<std::uint64_t> counts;  ///< empty when shots == 0
  OutcomeDistribution observed;  ///< frequencies (or exact when shots == 0)
};

/// Computational-basis diagonal, readout confusion, then multinomial sampling.
inline MeasurementResult measure_state(const Matrix& rho, int n, int d, const NoiseModel* noise, std::uint64_t shots,
                                       std::uint64_t seed) {
  auto dist = OutcomeDistribution::from_state(rho, n, d);
  if (noise && noise->has_readout_error()) dist = apply_confusion(dist, noise->readout());
  MeasurementResult r{dist, {}, dist};
  if (shots > 0) {
    r.counts = sample_counts(dist, shots, seed);
    r.observed = OutcomeDistribution::from_counts(r.counts, n, d);
  }
  return r;
}

inline MeasurementResult measure_distribution(const Circuit& c, const NoiseModel* noise, std::uint64_t shots,
                                              std::uint64_t seed) {
  return measure_state(simulate_matrix(c, noise), c.n(), c.d(), noise, shots, seed);
}

}  // namespace qdm
