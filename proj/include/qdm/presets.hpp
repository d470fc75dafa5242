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

// Named noise presets. "paper-default" is a synthetic three-transmon-qutrit
// device: each CZdag cycle is followed by a spectator cross-Kerr phase, a
// uniform two-qutrit Weyl channel and a residual entangling-phase error.

#pragma once

#include <algorithm>
#include <array>
#include <numbers>
#include <string>

#include "qdm/noise.hpp"

namespace qdm {

struct DevicePreset {
  std::string version;
  /// Residual entangling phases: cross-Kerr couplings of the gate pair
  /// integrated for this long (us).
  double coherent_t_us = 0;
  /// Spectator coupling integrated for this long (us).
  double spectator_t_us = 0;
  /// Probability of a non-identity two-qutrit Weyl error per CZdag cycle.
  double weyl_error_rate = 0;
  /// P(0|0), P(1|1), P(2|2) per qutrit.
  std::array<std::array<double, 3>, 3> readout{};
  /// Cross-Kerr couplings (MHz) a11, a12, a21, a22 for (Q0,Q1) and (Q1,Q2).
  std::array<double, 4> kerr_q0q1{};
  std::array<double, 4> kerr_q1q2{};
};

/// Picked with tools/calibrate (qdm_calibrate --t 0.16 --rate 0.035).
inline const DevicePreset& paper_default_preset() {
  static const DevicePreset p{
      "paper-default/1",
      /*coherent_t_us=*/0.16,
      /*spectator_t_us=*/0.032,
      /*weyl_error_rate=*/0.035,
      {{{0.994, 0.979, 0.974}, {0.991, 0.953, 0.943}, {0.986, 0.943, 0.951}}},
      {0.10, 0.60, -0.44, 0.36},
      {0.16, 0.41, -0.16, 0.49},
  };
  return p;
}

/// Phase offsets on |11>,|12>,|21>,|22> from cross-Kerr couplings held for t.
inline std::array<double, 4> kerr_phases(const std::array<double, 4>& a, double t_us) {
  std::array<double, 4> out{};
  for (std::size_t i = 0; i < 4; ++i) out[i] = -2.0 * std::numbers::pi * a[i] * t_us;
  return out;
}

/// Swaps the roles of the two qutrits in a (|11>,|12>,|21>,|22>) table.
inline std::array<double, 4> transpose_pair(const std::array<double, 4>& a) { return {a[0], a[2], a[1], a[3]}; }

/// Noise channels following a CZ-type cycle on (a, b) for an n-qutrit
/// register (n = 2 or 3). Listed in application order.
inline std::vector<std::pair<std::vector<int>, QuantumChannel>> device_cycle_channels(const DevicePreset& p, int n, int a, int b) {
  std::vector<std::pair<std::vector<int>, QuantumChannel>> out;
  const bool pair01 = (std::min(a, b) == 0 && std::max(a, b) == 1);
  const auto& gate_kerr = pair01 ? p.kerr_q0q1 : p.kerr_q1q2;
  std::array<double, 4> gate_deltas = kerr_phases(gate_kerr, p.coherent_t_us);
  if (a > b) gate_deltas = transpose_pair(gate_deltas);
  if (n == 3) {
    // The middle qutrit of the chain couples to the idle one.
    const int spectator = 3 - a - b;
    const int gate_qudit = 1;
    const auto& spec_kerr = pair01 ? p.kerr_q1q2 : p.kerr_q0q1;
    // Coupling rows are ordered (lower index, higher index); we need (gate, spectator).
    std::array<double, 4> sd = kerr_phases(spec_kerr, p.spectator_t_us);
    if (gate_qudit > spectator) sd = transpose_pair(sd);
    if (p.spectator_t_us != 0.0) out.emplace_back(std::vector<int>{gate_qudit, spectator}, coherent_phase_error(sd));
  }
  if (p.weyl_error_rate > 0) out.emplace_back(std::vector<int>{a, b}, depolarizing_weyl_channel(3, 2, p.weyl_error_rate));
  out.emplace_back(std::vector<int>{a, b}, coherent_phase_error(gate_deltas));
  return out;
}

/// paper-default on n = 2 or 3 qutrits with CZ/CZdag on neighbouring pairs.
inline NoiseModel device_noise(const DevicePreset& p, int n) {
  if (n != 2 && n != 3) throw DomainError("paper-default preset covers 2 or 3 qutrits");
  NoiseModel m(n, 3);
  for (int a = 0; a + 1 < n; ++a)
    for (const char* g : {"CZdag", "CZ"})
      for (auto [x, y] : {std::pair{a, a + 1}, std::pair{a + 1, a}}) {
        const std::string sig = std::string(g) + "(" + std::to_string(x) + "," + std::to_string(y) + ")";
        for (auto& [t, ch] : device_cycle_channels(p, n, x, y)) m.add_hard(sig, t, ch);
      }
  std::vector<ConfusionMatrix> conf;
  for (int q = 0; q < n; ++q) {
    const auto& f = p.readout[static_cast<std::size_t>(q)];
    conf.push_back(ConfusionMatrix::from_qutrit_fidelities(f[0], f[1], f[2]));
  }
  m.set_readout(std::move(conf));
  m.metadata = {
      {"preset", p.version},
      {"coherent_t_us", p.coherent_t_us},
      {"spectator_t_us", p.spectator_t_us},
      {"weyl_error_rate", p.weyl_error_rate},
      {"kerr_pairing", {{"Q0-Q1", p.kerr_q0q1}, {"Q1-Q2", p.kerr_q1q2}}},
      {"kerr_pairing_note", "first alpha row of each coupling assigned to (Q0,Q1), second to (Q1,Q2)"},
      {"readout_routing", "P(1|0)=1-P(0|0), P(0|1)=1-P(1|1), P(1|2)=1-P(2|2)"},
      {"spectator", "middle qutrit couples to the idle qutrit during each CZdag cycle"},
  };
  return m;
}

inline NoiseModel paper_default_noise(int n) { return device_noise(paper_default_preset(), n); }

/// Resolves a preset name; "none" is noiseless.
inline NoiseModel noise_preset(const std::string& name, int n, int d) {
  if (name == "none") return NoiseModel::none(n, d);
  if (name == "paper-default") {
    if (d != 3) throw DomainError("paper-default is a qutrit preset (d = 3)");
    return paper_default_noise(n);
  }
  throw ConfigError("unknown noise preset '" + name + "'");
}

}  // namespace qdm
