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

// Scans the paper-default device parameters and prints GHZ fidelities,
// coherent share and RCS improvement for each grid point.

#include <cstdio>
#include <iostream>

#include "CLI11.hpp"
#include "qdm/qdm.hpp"

int main(int argc, char** argv) {
  CLI::App app{"qdm device preset scan"};
  std::vector<double> ts{0.25}, rates{0.03};
  double spec_ratio = 0.2;
  std::uint64_t shots = 0;
  int rcs_instances = 0;
  app.add_option("--t", ts, "coherent hold times (us)");
  app.add_option("--rate", rates, "Weyl error rates");
  app.add_option("--spectator-ratio", spec_ratio, "spectator_t / coherent_t");
  app.add_option("--shots", shots, "shots per setting (0 = exact)");
  app.add_option("--rcs-instances", rcs_instances, "RCS instances per depth (0 = skip)");
  CLI11_PARSE(app, argc, argv);

  std::printf("t_us,rate,share,bare,rc,nox,rc_pur,rcs_imp_min\n");
  for (double t : ts)
    for (double r : rates) {
      qdm::DevicePreset p = qdm::paper_default_preset();
      p.coherent_t_us = t;
      p.spectator_t_us = t * spec_ratio;
      p.weyl_error_rate = r;
      const auto noise = qdm::device_noise(p, 3);
      const qdm::Circuit g = qdm::ghz_circuit(3, 3);
      const auto tm = qdm::cycle_noise_transfer_matrix(noise, g.cycles()[g.hard_cycle_positions()[0]]);
      const double share = qdm::coherent_fraction(tm).value_or(0.0);
      qdm::GhzConfig cfg;
      cfg.shots = shots;
      cfg.rcal_shots = shots ? 100000 : 0;
      const auto res = qdm::ghz_experiment(cfg, noise);
      double imp = -1;
      if (rcs_instances > 0) {
        imp = 1e9;
        for (int n : {2, 3}) {
          qdm::RcsConfig rc;
          rc.n = n;
          rc.depths = n == 2 ? std::vector<int>{1, 2, 3, 6} : std::vector<int>{2, 4, 6};
          rc.instances = rcs_instances;
          rc.shots = shots;
          rc.rcal_shots = shots ? 100000 : 0;
          const auto rr = qdm::rcs_experiment(rc, qdm::device_noise(p, n));
          for (const auto& s : rr.summary)
            if (s.depth > 1) imp = std::min(imp, s.improvement);
        }
      }
      std::printf("%.4f,%.4f,%.4f,%.4f,%.4f,%.4f,%.4f,%.4f\n", t, r, share,
                  res.get(qdm::MitigationMethod::Bare).fidelity, res.get(qdm::MitigationMethod::RC).fidelity,
                  res.get(qdm::MitigationMethod::RCNOX).fidelity, res.get(qdm::MitigationMethod::RC).purified_fidelity,
                  imp);
      std::fflush(stdout);
    }
  return 0;
}
