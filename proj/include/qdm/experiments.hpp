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

// Experiment drivers: GHZ tomography, random circuit sampling, twirl decay,
// Hoeffding coverage, extrapolation bias scans and entangling-phase fits.

#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "qdm/circuit.hpp"
#include "qdm/mitigation.hpp"
#include "qdm/noise.hpp"
#include "qdm/parallel.hpp"
#include "qdm/presets.hpp"
#include "qdm/random.hpp"
#include "qdm/readout.hpp"
#include "qdm/simulate.hpp"
#include "qdm/tomography.hpp"

namespace qdm {

// ---------------------------------------------------------------------------
// Shared helpers
// ---------------------------------------------------------------------------

/// (1/2) sum |p - q|; quasi inputs are used as-is.
inline double variation_distance(const OutcomeDistribution& p, const OutcomeDistribution& q) {
  if (p.size() != q.size()) throw DimensionError("variation_distance: outcome spaces differ");
  double s = 0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p.probs[i] - q.probs[i]);
  return 0.5 * s;
}

inline double variation_distance(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw DimensionError("variation_distance: outcome spaces differ");
  double s = 0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
  return 0.5 * s;
}

/// Readout correction to use with `noise`: RCAL estimates when the model has
/// readout error, nothing otherwise.
struct ReadoutCorrection {
  std::optional<RcalResult> rcal;
  std::span<const ConfusionMatrix> span() const {
    return rcal ? std::span<const ConfusionMatrix>(rcal->confusions) : std::span<const ConfusionMatrix>();
  }
};

inline ReadoutCorrection calibrate_readout(const NoiseModel& noise, bool enabled, std::uint64_t shots, std::uint64_t seed) {
  ReadoutCorrection r;
  if (enabled && noise.has_readout_error()) {
    r.rcal = rcal_confusion(noise, shots, seed);
    if (r.rcal->singular) throw SingularMatrixError("RCAL estimate is singular; increase rcal shots");
  }
  return r;
}

/// Sum of the cycle-noise channels for one Hard cycle as a transfer matrix on
/// the whole register.
inline TransferMatrix cycle_noise_transfer_matrix(const NoiseModel& noise, const Cycle& cycle) {
  const int n = noise.n(), d = noise.d();
  const auto dim = static_cast<Eigen::Index>(ipow(static_cast<std::size_t>(d), static_cast<std::size_t>(n)));
  Matrix s(dim * dim, dim * dim);
  const auto* chans = noise.hard_noise(cycle);
  for (Eigen::Index col = 0; col < dim * dim; ++col) {
    Matrix e = Matrix::Zero(dim, dim);
    e(col / dim, col % dim) = 1.0;
    if (chans)
      for (const auto& lc : *chans) apply_superop_local(e, lc.superop, n, d, lc.targets);
    for (Eigen::Index a = 0; a < dim; ++a)
      for (Eigen::Index b = 0; b < dim; ++b) s(a * dim + b, col) = e(a, b);
  }
  return transfer_matrix_from_superoperator(s, d);
}

// ---------------------------------------------------------------------------
// GHZ tomography
// ---------------------------------------------------------------------------

struct GhzConfig {
  int n = 3;
  int d = 3;
  int randomizations = 20;
  std::uint64_t shots = 1024;  ///< per setting per circuit; 0 = exact
  int n_id = 1;
  FoldStrategy strategy = FoldStrategy::OrderPower;
  std::uint64_t seed = 1;
  bool rcal = true;
  std::uint64_t rcal_shots = 100000;
  int purify_steps = 20;
};

struct GhzMethodResult {
  MitigationMethod method = MitigationMethod::Bare;
  double fidelity = 0;            ///< projected estimate vs ideal
  double raw_fidelity = 0;        ///< linear inversion vs ideal
  double purified_fidelity = 0;   ///< McWeeny on the projected estimate
  double purification_residual = 0;
  std::vector<double> purification_trace;
  Matrix raw;
  Matrix projected;
  std::size_t circuits = 0;       ///< circuit executions (settings x circuits)
  std::vector<int> alphas;
};

struct GhzResult {
  GhzConfig config;
  std::vector<GhzMethodResult> methods;
  std::optional<RcalResult> rcal;
  std::size_t settings = 0;
  std::vector<double> fold_diagnostic;
  const GhzMethodResult& get(MitigationMethod m) const {
    for (const auto& r : methods)
      if (r.method == m) return r;
    throw DomainError("method not present");
  }
};

/// Setting-by-setting frequency tables for one state.
inline std::vector<std::vector<double>> tomography_frequencies(const Matrix& rho, int n, int d,
                                                               const std::vector<TomographySetting>& settings,
                                                               const NoiseModel* noise, std::uint64_t shots,
                                                               std::uint64_t seed,
                                                               std::span<const ConfusionMatrix> correction) {
  std::vector<std::vector<double>> out(settings.size());
  parallel_for(settings.size(), [&](std::size_t s) {
    out[s] = setting_distribution(rho, n, d, settings[s], noise, shots, derive_seed(seed, {s}), correction).probs;
  });
  return out;
}

/// Mean of the per-circuit frequency tables, each circuit simulated once and
/// measured in every setting.
inline std::vector<std::vector<double>> averaged_frequencies(const std::vector<Circuit>& circuits, const NoiseModel* noise,
                                                             const std::vector<TomographySetting>& settings,
                                                             std::uint64_t shots, std::uint64_t seed,
                                                             std::span<const ConfusionMatrix> correction) {
  const int n = circuits.front().n(), d = circuits.front().d();
  const std::size_t outcomes = circuits.front().dim();
  std::vector<std::vector<std::vector<double>>> per(circuits.size());
  parallel_for(circuits.size(), [&](std::size_t k) {
    const Matrix rho = simulate_matrix(circuits[k], noise);
    std::vector<std::vector<double>> f(settings.size());
    for (std::size_t s = 0; s < settings.size(); ++s)
      f[s] = setting_distribution(rho, n, d, settings[s], noise, shots, derive_seed(seed, {k, s}), correction).probs;
    per[k] = std::move(f);
  });
  std::vector<std::vector<double>> mean(settings.size(), std::vector<double>(outcomes, 0.0));
  for (const auto& f : per)
    for (std::size_t s = 0; s < settings.size(); ++s)
      for (std::size_t o = 0; o < outcomes; ++o) mean[s][o] += f[s][o];
  for (auto& row : mean)
    for (auto& v : row) v /= static_cast<double>(circuits.size());
  return mean;
}

inline GhzMethodResult finish_tomography(MitigationMethod method, const std::vector<TomographySetting>& settings,
                                         const std::vector<std::vector<double>>& freqs, int n, int d,
                                         const Vector& ideal, int purify_steps) {
  GhzMethodResult r;
  r.method = method;
  const auto expectations = estimate_weyl_expectations(settings, freqs, n, d);
  const auto rec = reconstruct(expectations, n, d);
  const DensityMatrix sigma = DensityMatrix::pure(ideal);
  r.raw = rec.raw;
  r.projected = rec.projected.data();
  r.fidelity = fidelity(rec.projected, sigma);
  r.raw_fidelity = (sigma.data().cwiseProduct(rec.raw.transpose())).sum().real();
  const auto pur = purify(rec.projected.data(), purify_steps);
  r.purification_trace = pur.residuals;
  r.purification_residual = pur.residual();
  r.purified_fidelity = fidelity(pur.normalized(), sigma);
  return r;
}

/// Bare, RC and RC+NOX tomography of the GHZ state. Bare uses N x shots per
/// setting so every method spends the same budget on the target circuit.
inline GhzResult ghz_experiment(const GhzConfig& cfg, const NoiseModel& noise) {
  if (cfg.randomizations < 1) throw ConfigError("randomizations must be positive");
  if (cfg.n_id < 1) throw ConfigError("n_id must be at least 1");
  const Circuit circuit = ghz_circuit(cfg.n, cfg.d);
  check_noise_fits(circuit, &noise);
  const Vector ideal = ghz_state(cfg.n, cfg.d);
  const auto settings = tomo_settings(cfg.n, cfg.d);
  const auto readout = calibrate_readout(noise, cfg.rcal, cfg.rcal_shots, derive_seed(cfg.seed, {99}));
  const auto corr = readout.span();

  GhzResult out;
  out.config = cfg;
  out.settings = settings.size();
  out.rcal = readout.rcal;
  out.fold_diagnostic = fold_commutation_diagnostic(circuit, noise);

  // Bare
  {
    const Matrix rho = simulate_matrix(circuit, &noise);
    const std::uint64_t shots = cfg.shots * static_cast<std::uint64_t>(cfg.randomizations);
    const auto f = tomography_frequencies(rho, cfg.n, cfg.d, settings, &noise, shots, derive_seed(cfg.seed, {0}), corr);
    auto r = finish_tomography(MitigationMethod::Bare, settings, f, cfg.n, cfg.d, ideal, cfg.purify_steps);
    r.circuits = settings.size();
    out.methods.push_back(std::move(r));
  }
  // RC
  std::vector<Circuit> rc;
  for (int k = 0; k < cfg.randomizations; ++k)
    rc.push_back(randomize(circuit, derive_seed(cfg.seed, {1, static_cast<std::uint64_t>(k)})).circuit);
  const auto f_rc = averaged_frequencies(rc, &noise, settings, cfg.shots, derive_seed(cfg.seed, {2}), corr);
  {
    auto r = finish_tomography(MitigationMethod::RC, settings, f_rc, cfg.n, cfg.d, ideal, cfg.purify_steps);
    r.circuits = settings.size() * rc.size();
    out.methods.push_back(std::move(r));
  }
  // RC + NOX: one folded copy per Hard cycle, each randomized independently.
  {
    const auto folds = fold_every_cycle(circuit, cfg.n_id, cfg.strategy);
    std::vector<std::vector<std::vector<double>>> copies;
    std::vector<int> alphas;
    for (std::size_t j = 0; j < folds.size(); ++j) {
      const auto f = fold(circuit, folds[j]);
      std::vector<Circuit> cs;
      for (int k = 0; k < cfg.randomizations; ++k)
        cs.push_back(randomize(f.circuit, derive_seed(cfg.seed, {3, j, static_cast<std::uint64_t>(k)})).circuit);
      copies.push_back(averaged_frequencies(cs, &noise, settings, cfg.shots, derive_seed(cfg.seed, {4, j}), corr));
      alphas.push_back(f.alpha);
    }
    std::vector<std::vector<double>> f_nox(settings.size());
    for (std::size_t s = 0; s < settings.size(); ++s) {
      std::vector<std::vector<double>> cj;
      for (const auto& c : copies) cj.push_back(c[s]);
      f_nox[s] = nox_combine_vector(f_rc[s], cj, alphas);
    }
    auto r = finish_tomography(MitigationMethod::RCNOX, settings, f_nox, cfg.n, cfg.d, ideal, cfg.purify_steps);
    r.circuits = settings.size() * rc.size() * (1 + folds.size());
    r.alphas = alphas;
    out.methods.push_back(std::move(r));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Random circuit sampling
// ---------------------------------------------------------------------------

/// m x [Haar layer, CZdag layer] then a final Haar layer. n = 3 alternates
/// the pair (0,1), (1,2) between layers.
inline Circuit rcs_circuit(int n, int depth, std::uint64_t seed, int d = 3) {
  if (n != 2 && n != 3) throw DomainError("rcs_circuit supports n = 2 or 3");
  if (depth < 0) throw DomainError("depth must be nonnegative");
  std::vector<Cycle> cycles;
  auto haar_layer = [&](int layer) {
    std::vector<Placement> g;
    for (int q = 0; q < n; ++q)
      g.push_back({{q}, Gate::haar(d, derive_seed(seed, {static_cast<std::uint64_t>(layer), static_cast<std::uint64_t>(q)}))});
    return Cycle::easy(std::move(g));
  };
  for (int l = 0; l < depth; ++l) {
    cycles.push_back(haar_layer(l));
    const int a = (n == 3 && l % 2 == 1) ? 1 : 0;
    cycles.push_back(Cycle::hard({{{a, a + 1}, Gate::cz_dag(d)}}));
  }
  cycles.push_back(haar_layer(depth));
  return Circuit(n, d, std::move(cycles));
}

struct RcsConfig {
  int n = 2;
  std::vector<int> depths{1, 2, 3, 6};
  int instances = 20;
  int randomizations = 20;
  std::uint64_t shots = 1024;
  int n_id = 3;
  FoldStrategy strategy = FoldStrategy::OrderPower;
  std::uint64_t seed = 1;
  bool rcal = true;
  std::uint64_t rcal_shots = 100000;
};

struct RcsInstance {
  int depth = 0;
  int instance = 0;
  std::uint64_t circuit_seed = 0;
  double vd_bare = 0;
  double vd_mitigated = 0;
  bool mitigated_quasi = false;
  double mitigated_negative_mass = 0;
};

struct RcsDepthSummary {
  int depth = 0;
  double mean_bare = 0, se_bare = 0;
  double mean_mitigated = 0, se_mitigated = 0;
  double improvement = 0;  ///< 1 - mean_mitigated / mean_bare
};

struct RcsResult {
  RcsConfig config;
  std::vector<RcsInstance> instances;
  std::vector<RcsDepthSummary> summary;
  std::optional<RcalResult> rcal;
  const RcsDepthSummary& at(int depth) const {
    for (const auto& s : summary)
      if (s.depth == depth) return s;
    throw DomainError("depth not present");
  }
};

/// Mean RCAL-corrected outcome vector over N randomizations of `c`.
inline std::vector<double> rc_distribution(const Circuit& c, const NoiseModel& noise, int randomizations,
                                           std::uint64_t shots, std::uint64_t seed,
                                           std::span<const ConfusionMatrix> corr) {
  std::vector<std::vector<double>> per(static_cast<std::size_t>(randomizations));
  parallel_for(per.size(), [&](std::size_t k) {
    const auto rc = randomize(c, derive_seed(seed, {k, 0}));
    const auto m = measure_distribution(rc.circuit, &noise, shots, derive_seed(seed, {k, 1}));
    per[k] = (corr.empty() ? m.observed : rcal_correct(m.observed, corr)).probs;
  });
  std::vector<double> mean(c.dim(), 0.0);
  for (const auto& p : per)
    for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += p[i] / static_cast<double>(randomizations);
  return mean;
}

inline RcsInstance rcs_instance(const RcsConfig& cfg, const NoiseModel& noise, int depth, int instance,
                                std::span<const ConfusionMatrix> corr) {
  RcsInstance r;
  r.depth = depth;
  r.instance = instance;
  r.circuit_seed = derive_seed(cfg.seed, {static_cast<std::uint64_t>(depth), static_cast<std::uint64_t>(instance)});
  const Circuit c = rcs_circuit(cfg.n, depth, r.circuit_seed);
  const auto ideal = measure_distribution(c, nullptr, 0, 0).exact;
  const std::uint64_t run_seed = derive_seed(r.circuit_seed, {7});

  const std::uint64_t bare_shots = cfg.shots * static_cast<std::uint64_t>(cfg.randomizations);
  const auto mb = measure_distribution(c, &noise, bare_shots, derive_seed(run_seed, {0}));
  const auto bare = corr.empty() ? mb.observed : rcal_correct(mb.observed, corr);
  r.vd_bare = variation_distance(bare, ideal);

  const auto target = rc_distribution(c, noise, cfg.randomizations, cfg.shots, derive_seed(run_seed, {1}), corr);
  std::vector<double> mitigated = target;
  if (c.num_hard() > 0) {
    std::vector<std::vector<double>> copies;
    std::vector<int> alphas;
    const auto folds = fold_every_cycle(c, cfg.n_id, cfg.strategy);
    for (std::size_t j = 0; j < folds.size(); ++j) {
      const auto f = fold(c, folds[j]);
      copies.push_back(rc_distribution(f.circuit, noise, cfg.randomizations, cfg.shots, derive_seed(run_seed, {2, j}), corr));
      alphas.push_back(f.alpha);
    }
    mitigated = nox_combine_vector(target, copies, alphas);
  }
  for (double v : mitigated)
    if (v < 0) {
      r.mitigated_quasi = true;
      r.mitigated_negative_mass -= v;
    }
  r.vd_mitigated = variation_distance(mitigated, ideal.probs);
  return r;
}

inline RcsResult rcs_experiment(const RcsConfig& cfg, const NoiseModel& noise) {
  if (cfg.depths.empty()) throw ConfigError("depths must be nonempty");
  if (cfg.instances < 1 || cfg.randomizations < 1) throw ConfigError("instances and randomizations must be positive");
  for (int m : cfg.depths)
    if (m < 1 || m > 8) throw ConfigError("RCS depths must lie in 1..8");
  if (noise.n() != cfg.n || noise.d() != 3) throw ConfigError("noise model does not match the RCS register");
  RcsResult out;
  out.config = cfg;
  const auto readout = calibrate_readout(noise, cfg.rcal, cfg.rcal_shots, derive_seed(cfg.seed, {99}));
  out.rcal = readout.rcal;
  const auto corr = readout.span();
  std::vector<std::pair<int, int>> jobs;
  for (int m : cfg.depths)
    for (int i = 0; i < cfg.instances; ++i) jobs.emplace_back(m, i);
  out.instances.resize(jobs.size());
  parallel_for(jobs.size(), [&](std::size_t j) {
    out.instances[j] = rcs_instance(cfg, noise, jobs[j].first, jobs[j].second, corr);
  });
  for (int m : cfg.depths) {
    std::vector<double> b, mit;
    for (const auto& r : out.instances)
      if (r.depth == m) {
        b.push_back(r.vd_bare);
        mit.push_back(r.vd_mitigated);
      }
    RcsDepthSummary s;
    s.depth = m;
    s.mean_bare = sample_mean(b);
    s.se_bare = standard_error(b);
    s.mean_mitigated = sample_mean(mit);
    s.se_mitigated = standard_error(mit);
    s.improvement = s.mean_bare > 0 ? 1.0 - s.mean_mitigated / s.mean_bare : 0.0;
    out.summary.push_back(s);
  }
  return out;
}

struct NidSweepResult {
  std::vector<int> n_ids;
  std::vector<RcsResult> runs;  ///< same circuits and seeds, one per n_id
};

inline NidSweepResult n_id_sweep(const RcsConfig& base, const std::vector<int>& n_ids, const NoiseModel& noise) {
  if (n_ids.empty()) throw ConfigError("n_id list must be nonempty");
  NidSweepResult out;
  out.n_ids = n_ids;
  for (int k : n_ids) {
    RcsConfig c = base;
    c.n_id = k;
    out.runs.push_back(rcs_experiment(c, noise));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Twirl decay of coherent errors
// ---------------------------------------------------------------------------

/// exp(-i theta H) for a fixed random Hermitian H with ||H||_F = 1, after
/// a stochastic Weyl channel (identity with 1 - eps, uniform otherwise).
struct CoherentChannelFamily {
  int d = 3, n = 2;
  Matrix hamiltonian;
  double eps = 0.01;

  Matrix unitary(double theta) const {
    Eigen::SelfAdjointEigenSolver<Matrix> es(hamiltonian);
    Vector ph(es.eigenvalues().size());
    for (Eigen::Index i = 0; i < ph.size(); ++i) ph(i) = std::exp(Complex(0, -theta * es.eigenvalues()(i)));
    return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
  }

  /// The uniform Weyl channel is diagonal with 1 - eps D^2/(D^2-1) off the
  /// identity label, so R = R_U diag(lambda).
  TransferMatrix at(double theta) const {
    auto t = transfer_matrix(QuantumChannel::unitary(unitary(theta)), d);
    const double d2 = static_cast<double>(t.size());
    const double lambda = 1.0 - eps * d2 / (d2 - 1.0);
    for (Eigen::Index j = 1; j < t.size(); ++j) t.r.col(j) *= lambda;
    return t;
  }

  /// Same as coherent_fraction(at(theta)) without building R: Tr R_U = |Tr U|^2
  /// and the columns of R_U have unit norm.
  double fraction_at(double theta) const {
    const double dim = static_cast<double>(hamiltonian.rows());
    const double d2 = dim * dim;
    const double lambda = 1.0 - eps * d2 / (d2 - 1.0);
    const double fp = (1.0 + lambda * (std::norm(unitary(theta).trace()) - 1.0)) / d2;
    const double fd = std::sqrt(1.0 + lambda * lambda * (d2 - 1.0)) / dim;
    return (fd - fp) / (1.0 - fp);
  }
};

inline CoherentChannelFamily random_coherent_family(int d, int n, double eps, Rng& rng) {
  const auto dim = static_cast<Eigen::Index>(ipow(static_cast<std::size_t>(d), static_cast<std::size_t>(n)));
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix a(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i)
    for (Eigen::Index j = 0; j < dim; ++j) a(i, j) = Complex(g(rng), g(rng));
  Matrix h = 0.5 * (a + a.adjoint());
  h -= (h.trace() / static_cast<double>(dim)) * Matrix::Identity(dim, dim);
  h /= h.norm();
  return {d, n, h, eps};
}

struct CoherentChannel {
  TransferMatrix ptm;
  double theta = 0;
  double coherent_fraction = 0;
};

/// Bisects the rotation angle until the coherent fraction is within `tol`
/// of `target`.
inline CoherentChannel calibrated_coherent_channel(const CoherentChannelFamily& fam, double target = 0.70,
                                                   double tol = 1e-4) {
  double lo = 0.0, hi = 0.05;
  while (fam.fraction_at(hi) < target) {
    lo = hi;
    hi *= 2;
    if (hi > 10) throw DomainError("coherent fraction target unreachable");
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double c = fam.fraction_at(mid);
    if (std::abs(c - target) < tol) {
      auto t = fam.at(mid);
      const double check = coherent_fraction(t).value_or(0.0);
      if (std::abs(check - c) > 1e-8) throw InvariantViolation("coherent fraction shortcut disagrees with the PTM");
      return {std::move(t), mid, check};
    }
    (c < target ? lo : hi) = mid;
  }
  throw DomainError("bisection did not converge");
}

/// Characters chi_k(i) = w^{c(W_k, L_i)} of label i under conjugation by W_k.
inline std::vector<std::vector<int>> commutator_table(int d, int n) {
  const std::size_t count = WeylLabel::count(d, n);
  std::vector<WeylLabel> labels;
  for (std::size_t i = 0; i < count; ++i) labels.push_back(WeylLabel::from_index(d, n, i));
  std::vector<std::vector<int>> t(count, std::vector<int>(count));
  for (std::size_t k = 0; k < count; ++k)
    for (std::size_t i = 0; i < count; ++i) t[k][i] = weyl_commutator_phase(labels[k], labels[i]);
  return t;
}

/// Coherent fraction of (1/N) sum_k W_k^dagger ch W_k for the twirls listed
/// (label indices). Conjugation only rephases R_ij by w^{c(k,j) - c(k,i)}.
inline double twirled_coherent_fraction(const TransferMatrix& t, const std::vector<std::vector<int>>& comm,
                                        std::span<const std::size_t> twirls) {
  const int d = t.d;
  const Eigen::Index size = t.size();
  std::vector<Complex> w(static_cast<std::size_t>(d));
  for (int k = 0; k < d; ++k) w[static_cast<std::size_t>(k)] = root_of_unity(d, k);
  double fro2 = 0;
  std::vector<Complex> chi(static_cast<std::size_t>(size));
  Matrix m = Matrix::Zero(size, size);
  // M_ij = (1/N) sum_k conj(chi_k(i)) chi_k(j), built as a sum of rank-one terms.
  Eigen::MatrixXcd x(size, static_cast<Eigen::Index>(twirls.size()));
  for (std::size_t k = 0; k < twirls.size(); ++k)
    for (Eigen::Index i = 0; i < size; ++i) x(i, static_cast<Eigen::Index>(k)) = w[static_cast<std::size_t>(comm[twirls[k]][static_cast<std::size_t>(i)])];
  m = x.conjugate() * x.transpose() / static_cast<double>(twirls.size());
  for (Eigen::Index i = 0; i < size; ++i)
    for (Eigen::Index j = 0; j < size; ++j) fro2 += std::norm(t.r(i, j)) * std::norm(m(i, j));
  const double fp = process_fidelity(t);
  const double fd = std::sqrt(fro2 / static_cast<double>(size));
  return (fd - fp) / (1.0 - fp);
}

struct TwirlDecayConfig {
  std::vector<int> dims{2, 3, 5};
  std::vector<int> qudits{2, 2, 2};  ///< register size per entry of dims
  std::vector<int> grid{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  int trials = 50;
  double target_fraction = 0.70;
  double eps = 0.01;
  std::uint64_t seed = 1;
};

struct TwirlDecayPoint {
  int d = 0, n = 0, N = 0;
  double mean = 0, std = 0, se = 0;
};

struct TwirlDecayResult {
  TwirlDecayConfig config;
  std::vector<TwirlDecayPoint> points;
  std::vector<double> start_fractions;   ///< per (d, trial), before twirling
  std::vector<double> exhaustive;        ///< per d: mean fraction after the full twirl
};

inline TwirlDecayResult twirl_decay_study(const TwirlDecayConfig& cfg) {
  if (cfg.dims.size() != cfg.qudits.size()) throw ConfigError("dims and qudits lists must align");
  if (cfg.grid.empty() || cfg.trials < 2) throw ConfigError("need a nonempty N grid and at least two trials");
  TwirlDecayResult out;
  out.config = cfg;
  for (std::size_t di = 0; di < cfg.dims.size(); ++di) {
    const int d = cfg.dims[di], n = cfg.qudits[di];
    check_capacity(ipow(static_cast<std::size_t>(d), static_cast<std::size_t>(2 * n)));
    const auto comm = commutator_table(d, n);
    const std::size_t count = comm.size();
    std::vector<CoherentChannel> chans(static_cast<std::size_t>(cfg.trials));
    parallel_for(chans.size(), [&](std::size_t t) {
      Rng rng(derive_seed(cfg.seed, {static_cast<std::uint64_t>(d), static_cast<std::uint64_t>(n), t}));
      chans[t] = calibrated_coherent_channel(random_coherent_family(d, n, cfg.eps, rng), cfg.target_fraction);
    });
    for (const auto& c : chans) out.start_fractions.push_back(c.coherent_fraction);
    std::vector<std::vector<double>> vals(cfg.grid.size(), std::vector<double>(chans.size()));
    parallel_for(chans.size(), [&](std::size_t t) {
      Rng rng(derive_seed(cfg.seed, {static_cast<std::uint64_t>(d), static_cast<std::uint64_t>(n), t, 1}));
      std::uniform_int_distribution<std::size_t> pick(0, count - 1);
      for (std::size_t g = 0; g < cfg.grid.size(); ++g) {
        std::vector<std::size_t> tw(static_cast<std::size_t>(cfg.grid[g]));
        for (auto& x : tw) x = pick(rng);
        vals[g][t] = twirled_coherent_fraction(chans[t].ptm, comm, tw);
      }
    });
    for (std::size_t g = 0; g < cfg.grid.size(); ++g) {
      TwirlDecayPoint p;
      p.d = d;
      p.n = n;
      p.N = cfg.grid[g];
      p.mean = sample_mean(vals[g]);
      p.se = standard_error(vals[g]);
      p.std = p.se * std::sqrt(static_cast<double>(vals[g].size()));
      out.points.push_back(p);
    }
    std::vector<std::size_t> all(count);
    std::iota(all.begin(), all.end(), 0);
    double ex = 0;
    for (const auto& c : chans) ex += twirled_coherent_fraction(c.ptm, comm, all);
    out.exhaustive.push_back(ex / static_cast<double>(chans.size()));
  }
  return out;
}

/// Least-squares line y = a + b x; returns (a, b, R^2).
inline std::array<double, 3> linear_fit(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  const double b = sxy / sxx;
  const double r2 = syy > 0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return {my - b * mx, b, r2};
}

// ---------------------------------------------------------------------------
// Hoeffding coverage
// ---------------------------------------------------------------------------

struct HoeffdingCase {
  double epsilon = 0;
  int N = 0;
  int trials = 0;
  int violations = 0;
  double rate = 0;
  double bound = 0;       ///< exp(-2 eps^2 N)
  double allowed = 0;     ///< bound + 3 sigma
};

struct HoeffdingResult {
  double exact = 0;                 ///< fully twirled expectation
  std::vector<double> twirl_values; ///< expectation for every twirl label
  std::vector<HoeffdingCase> cases;
};

/// Per-twirl expectations of `obs` (values in [0, 1]) on a one-Hard-cycle
/// circuit, then repeated N-sample means against the exhaustive average.
inline HoeffdingResult hoeffding_experiment(const Circuit& c, const Observable& obs, const NoiseModel& noise,
                                            const std::vector<double>& epsilons, const std::vector<int>& ns, int trials,
                                            std::uint64_t seed) {
  if (c.num_hard() != 1) throw DomainError("hoeffding_experiment expects exactly one Hard cycle");
  const std::size_t count = WeylLabel::count(c.d(), c.n());
  HoeffdingResult out;
  out.twirl_values.resize(count);
  parallel_for(count, [&](std::size_t i) {
    const auto rc = randomize_with(c, {WeylLabel::from_index(c.d(), c.n(), i)});
    const Matrix rho = simulate_matrix(rc.circuit, &noise);
    out.twirl_values[i] = (obs.op.cwiseProduct(rho.transpose())).sum().real();
  });
  out.exact = sample_mean(out.twirl_values);
  for (double eps : epsilons)
    for (int N : ns) {
      HoeffdingCase hc;
      hc.epsilon = eps;
      hc.N = N;
      hc.trials = trials;
      Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(eps * 1e6), static_cast<std::uint64_t>(N)}));
      std::uniform_int_distribution<std::size_t> pick(0, count - 1);
      for (int t = 0; t < trials; ++t) {
        double s = 0;
        for (int k = 0; k < N; ++k) s += out.twirl_values[pick(rng)];
        if (std::abs(s / N - out.exact) >= eps) ++hc.violations;
      }
      hc.rate = static_cast<double>(hc.violations) / trials;
      hc.bound = std::exp(-2.0 * eps * eps * N);
      hc.allowed = hc.bound + 3.0 * std::sqrt(hc.bound * (1.0 - hc.bound) / trials);
      out.cases.push_back(hc);
    }
  return out;
}

// ---------------------------------------------------------------------------
// Extrapolation bias scan
// ---------------------------------------------------------------------------

struct NoxBiasPoint {
  double eps = 0;
  double ideal = 0;
  double unmitigated = 0;
  double mitigated = 0;
};

/// Exact (shots = 0) RC and RC+NOX estimates of the ideal-state projector for
/// the GHZ circuit with uniform Weyl noise of rate eps after every CZdag cycle.
inline std::vector<NoxBiasPoint> nox_bias_scan(const std::vector<double>& eps_list, int n = 2, int n_id = 1,
                                               FoldStrategy strategy = FoldStrategy::OrderPower) {
  const int d = 3;
  const Circuit c = ghz_circuit(n, d);
  const Observable obs = Observable::projector(ghz_state(n, d));
  std::vector<NoxBiasPoint> out;
  for (double eps : eps_list) {
    NoiseModel noise(n, d);
    for (int a = 0; a + 1 < n; ++a) {
      const std::string sig = "CZdag(" + std::to_string(a) + "," + std::to_string(a + 1) + ")";
      noise.add_hard(sig, {a, a + 1}, depolarizing_weyl_channel(d, 2, eps));
    }
    RcConfig cfg;
    cfg.randomizations = 2;
    cfg.shots = 0;
    cfg.seed = 5;
    NoxBiasPoint p;
    p.eps = eps;
    p.ideal = 1.0;
    p.unmitigated = rc_estimate(c, obs, &noise, cfg).value;
    p.mitigated = nox_estimate(c, obs, &noise, cfg, fold_every_cycle(c, n_id, strategy)).value;
    out.push_back(p);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Entangling-phase characterization
// ---------------------------------------------------------------------------

struct PhaseCharConfig {
  int control = 0;               ///< qudit prepared in |s>
  int probe = 1;                 ///< qudit in (|a> + |b>)/sqrt(2)
  std::pair<int, int> pair{0, 1};///< CZdag placement
  int a = 0, b = 1;              ///< probe subspace
  int points = 24;
};

struct PhaseCharResult {
  int control_state = 0;
  double phase = 0;       ///< relative phase of |b> vs |a> on the probe, in (-pi, pi]
  double r2 = 0;
  double amplitude = 0;
  std::vector<double> sweep;       ///< analysis phases
  std::vector<double> population;  ///< P(probe = a)
};

/// Rotation by pi/2 about X in the {a, b} subspace of one qudit.
inline Matrix subspace_half_pi(int d, int a, int b, double sign = 1.0) {
  Matrix m = Matrix::Identity(d, d);
  const double c = std::cos(std::numbers::pi / 4), s = std::sin(std::numbers::pi / 4);
  m(a, a) = c;
  m(b, b) = c;
  m(a, b) = Complex(0, -sign * s);
  m(b, a) = Complex(0, -sign * s);
  return m;
}

inline double wrap_phase(double x) {
  x = std::remainder(x, 2.0 * std::numbers::pi);
  if (x <= -std::numbers::pi) x += 2.0 * std::numbers::pi;
  return x;
}

/// Ramsey sweep: prepare control |s>, probe in the {a,b} superposition, run
/// the (noisy) CZdag cycle, add a virtual phase phi on |b>, close the Ramsey
/// pair and read P(a). Fits P = c0 + c1 cos(phi) + c2 sin(phi).
inline PhaseCharResult characterize_entangling_phase(const NoiseModel& noise, int s, const PhaseCharConfig& cfg) {
  const int n = noise.n(), d = noise.d();
  if (s < 0 || s >= d) throw DomainError("control state out of range");
  if (cfg.points < 4) throw DomainError("need at least four sweep points");
  PhaseCharResult r;
  r.control_state = s;
  const Matrix open = subspace_half_pi(d, cfg.a, cfg.b, 1.0);
  for (int k = 0; k < cfg.points; ++k) {
    const double phi = 2.0 * std::numbers::pi * k / cfg.points;
    std::vector<double> ph(static_cast<std::size_t>(d), 0.0);
    ph[static_cast<std::size_t>(cfg.b)] = phi;
    const Matrix close = subspace_half_pi(d, cfg.a, cfg.b, 1.0) * Gate::virtual_diag(d, ph).matrix;
    std::vector<Cycle> cycles;
    cycles.push_back(Cycle::easy({{{cfg.control}, Gate::weyl(d, 0, s)}, {{cfg.probe}, Gate::custom(open, d, "ramsey_open")}}));
    cycles.push_back(Cycle::hard({{{cfg.pair.first, cfg.pair.second}, Gate::cz_dag(d)}}));
    cycles.push_back(Cycle::easy({{{cfg.probe}, Gate::custom(close, d, "ramsey_close")}}));
    const Circuit c(n, d, std::move(cycles));
    Matrix rho = simulate_matrix(c, &noise);
    // Marginal population of the probe in |a>.
    double pa = 0;
    const std::size_t dim = c.dim();
    const std::size_t stride = ipow(static_cast<std::size_t>(d), static_cast<std::size_t>(n - 1 - cfg.probe));
    for (std::size_t i = 0; i < dim; ++i)
      if (static_cast<int>((i / stride) % static_cast<std::size_t>(d)) == cfg.a) pa += rho(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)).real();
    r.sweep.push_back(phi);
    r.population.push_back(pa);
  }
  Eigen::MatrixXd a(cfg.points, 3);
  Eigen::VectorXd y(cfg.points);
  for (int k = 0; k < cfg.points; ++k) {
    a(k, 0) = 1.0;
    a(k, 1) = std::cos(r.sweep[static_cast<std::size_t>(k)]);
    a(k, 2) = std::sin(r.sweep[static_cast<std::size_t>(k)]);
    y(k) = r.population[static_cast<std::size_t>(k)];
  }
  const Eigen::VectorXd coef = a.colPivHouseholderQr().solve(y);
  const Eigen::VectorXd resid = y - a * coef;
  const double ss_tot = (y.array() - y.mean()).square().sum();
  r.r2 = ss_tot > 0 ? 1.0 - resid.squaredNorm() / ss_tot : 0.0;
  r.amplitude = std::hypot(coef(1), coef(2));
  // The Ramsey pair maps a relative phase theta to P(a) = (1 - cos(theta + phi)) / 2
  // for this open/close convention, so c1 = -cos(theta)/2 and c2 = sin(theta)/2.
  r.phase = wrap_phase(std::atan2(coef(2), -coef(1)));
  if (r.r2 < 0.9) throw DomainError("sinusoid fit failed (R^2 = " + std::to_string(r.r2) + ")");
  return r;
}

}  // namespace qdm
