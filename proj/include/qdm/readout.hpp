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

// Readout calibration: d preparation circuits W_{0,k} on every qudit give
// column k of each qudit's confusion matrix.

#pragma once

#include <cstdint>
#include <vector>

#include "qdm/circuit.hpp"
#include "qdm/noise.hpp"
#include "qdm/random.hpp"
#include "qdm/simulate.hpp"

namespace qdm {

struct RcalResult {
  std::vector<ConfusionMatrix> confusions;
  std::vector<double> condition_numbers;
  /// Set when any estimate is numerically singular; rcal_correct would throw.
  bool singular = false;
  std::uint64_t shots = 0;
};

inline constexpr double kRcalMaxCondition = 1e6;

inline Circuit rcal_preparation(int n, int d, int k) {
  std::vector<Placement> gates;
  for (int q = 0; q < n; ++q) gates.push_back({{q}, Gate::weyl(d, 0, k)});
  return Circuit(n, d, {Cycle::easy(std::move(gates))});
}

/// Estimates per-qudit confusion matrices by running the d preparation
/// circuits through measure_distribution. shots == 0 uses exact marginals.
inline RcalResult rcal_confusion(const NoiseModel& device, std::uint64_t shots, std::uint64_t seed) {
  const int n = device.n();
  const int d = device.d();
  std::vector<RealMatrix> est(static_cast<std::size_t>(n), RealMatrix::Zero(d, d));
  for (int k = 0; k < d; ++k) {
    const auto m = measure_distribution(rcal_preparation(n, d, k), &device, shots, derive_seed(seed, {static_cast<std::uint64_t>(k)}));
    const auto& probs = m.observed.probs;
    for (std::size_t s = 0; s < probs.size(); ++s) {
      std::size_t rem = s;
      for (int q = n - 1; q >= 0; --q) {
        const auto digit = static_cast<Eigen::Index>(rem % static_cast<std::size_t>(d));
        rem /= static_cast<std::size_t>(d);
        est[static_cast<std::size_t>(q)](digit, k) += probs[s];
      }
    }
  }
  RcalResult r;
  r.shots = shots;
  for (auto& c : est) {
    for (Eigen::Index j = 0; j < d; ++j) {
      const double s = c.col(j).sum();
      c.col(j) /= s;
    }
    ConfusionMatrix cm(c);
    const double kappa = cm.condition_number();
    r.condition_numbers.push_back(kappa);
    if (!(kappa < kRcalMaxCondition)) r.singular = true;
    r.confusions.push_back(std::move(cm));
  }
  return r;
}

}  // namespace qdm
