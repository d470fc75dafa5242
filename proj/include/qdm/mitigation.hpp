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

// Randomized compiling, unitary folding and noiseless output extrapolation.

#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "qdm/circuit.hpp"
#include "qdm/noise.hpp"
#include "qdm/parallel.hpp"
#include "qdm/random.hpp"
#include "qdm/simulate.hpp"
#include "qdm/weyl.hpp"

namespace qdm {

// ---------------------------------------------------------------------------
// Randomized compiling
// ---------------------------------------------------------------------------

/// H W H^dagger for a whole Hard cycle; qudits outside every gate are untouched.
inline PhasedWeyl conjugate_by_cycle(const Cycle& cycle, const PhasedWeyl& w) {
  const int n = w.label.n();
  const int d = w.label.d;
  std::vector<int> p = w.label.p, q = w.label.q;
  long long phase = w.phase_exp;
  for (const auto& pl : cycle.gates) {
    const auto img = clifford_conjugate(pl.gate.clifford_gate(), PhasedWeyl(w.label.restrict(pl.qudits), 0));
    for (std::size_t i = 0; i < pl.qudits.size(); ++i) {
      p[static_cast<std::size_t>(pl.qudits[i])] = img.label.p[i];
      q[static_cast<std::size_t>(pl.qudits[i])] = img.label.q[i];
    }
    phase += img.phase_exp;
  }
  (void)n;
  return PhasedWeyl(WeylLabel(d, std::move(p), std::move(q)), static_cast<int>(mod(phase, 2LL * d)));
}

struct RandomizedCircuit {
  Circuit circuit;
  std::vector<WeylLabel> twirls;         ///< T_j inserted before Hard cycle j
  std::vector<PhasedWeyl> corrections;   ///< H_j T_j^dagger H_j^dagger after it (phase dropped in the gates)
};

/// Dresses every Hard cycle H_j with T_j before and H_j T_j^dagger H_j^dagger
/// after, both merged into the neighbouring Easy cycles. Output has the same
/// cycle structure and, up to global phase, the same noiseless action.
inline RandomizedCircuit randomize_with(const Circuit& c, const std::vector<WeylLabel>& twirls) {
  const auto hard = c.hard_cycle_positions();
  if (twirls.size() != hard.size()) throw DimensionError("randomize_with: one twirl per Hard cycle required");
  const int n = c.n();
  const int d = c.d();
  std::vector<PhasedWeyl> corrections;
  for (std::size_t j = 0; j < hard.size(); ++j) {
    if (twirls[j].d != d || twirls[j].n() != n) throw DimensionError("twirl label does not match circuit register");
    corrections.push_back(conjugate_by_cycle(c.cycles()[hard[j]], weyl_inverse(PhasedWeyl(twirls[j], 0))));
  }

  const std::vector<Cycle>& cycles = c.cycles();

  auto dress = [&](const Cycle& easy, const std::optional<PhasedWeyl>& first,
                   const std::optional<WeylLabel>& last) -> Cycle {
    std::vector<std::optional<Gate>> gates(static_cast<std::size_t>(n));
    for (const auto& pl : easy.gates) gates[static_cast<std::size_t>(pl.qudits[0])] = pl.gate;
    Cycle out = Cycle::easy();
    out.tag = easy.tag;
    for (int q = 0; q < n; ++q) {
      const auto qi = static_cast<std::size_t>(q);
      const WeylLabel a = first ? first->label.local(q) : WeylLabel::identity(d, 1);
      const WeylLabel b = last ? last->local(q) : WeylLabel::identity(d, 1);
      const auto& g = gates[qi];
      if (!g) {
        const auto combined = weyl_compose(PhasedWeyl(b, 0), PhasedWeyl(a, 0)).label;
        if (!combined.is_identity()) out.gates.push_back({{q}, Gate::weyl(combined)});
        continue;
      }
      if (a.is_identity() && b.is_identity()) {
        out.gates.push_back({{q}, *g});
        continue;
      }
      const Matrix m = weyl_matrix(b) * g->matrix * weyl_matrix(a);
      out.gates.push_back({{q}, Gate::custom(m, d, "rc(" + g->display_name() + ")")});
    }
    return out;
  };

  std::vector<Cycle> out;
  out.reserve(cycles.size());
  std::size_t hard_seen = 0;
  for (std::size_t i = 0; i < cycles.size(); ++i) {
    if (cycles[i].is_hard()) {
      out.push_back(cycles[i]);
      ++hard_seen;
      continue;
    }
    std::optional<PhasedWeyl> first;
    std::optional<WeylLabel> last;
    if (hard_seen > 0) first = corrections[hard_seen - 1];
    if (hard_seen < hard.size()) last = twirls[hard_seen];
    out.push_back(dress(cycles[i], first, last));
  }
  return {Circuit(n, d, std::move(out)), twirls, std::move(corrections)};
}

/// Uniformly random twirls, one per Hard cycle.
inline RandomizedCircuit randomize(const Circuit& c, std::uint64_t seed) {
  Rng rng(seed);
  const auto count = WeylLabel::count(c.d(), c.n());
  std::uniform_int_distribution<std::size_t> pick(0, count - 1);
  std::vector<WeylLabel> twirls;
  for (std::size_t j = 0; j < c.num_hard(); ++j) twirls.push_back(WeylLabel::from_index(c.d(), c.n(), pick(rng)));
  return randomize_with(c, twirls);
}

// ---------------------------------------------------------------------------
// Folding
// ---------------------------------------------------------------------------

enum class FoldStrategy { OrderPower, InversePair };

inline const char* to_string(FoldStrategy s) { return s == FoldStrategy::OrderPower ? "order_power" : "inverse_pair"; }

struct FoldSpec {
  std::size_t cycle_index = 0;  ///< which Hard cycle (0-based among Hard cycles)
  int n_id = 1;
  FoldStrategy strategy = FoldStrategy::OrderPower;
};

struct FoldResult {
  Circuit circuit;
  int alpha = 1;  ///< total noisy applications of the folded cycle
  int order = 0;  ///< gate order used (OrderPower), 0 otherwise
};

inline Matrix cycle_unitary_on_support(const Cycle& cycle, int d, std::vector<int>& support) {
  support.clear();
  for (const auto& pl : cycle.gates) support.insert(support.end(), pl.qudits.begin(), pl.qudits.end());
  std::sort(support.begin(), support.end());
  const int k = static_cast<int>(support.size());
  const auto dim = static_cast<Eigen::Index>(ipow(static_cast<std::size_t>(d), static_cast<std::size_t>(k)));
  Matrix u = Matrix::Identity(dim, dim);
  for (const auto& pl : cycle.gates) {
    std::vector<int> local;
    for (int q : pl.qudits) local.push_back(static_cast<int>(std::find(support.begin(), support.end(), q) - support.begin()));
    apply_left(u, pl.gate.matrix, LocalIndex(k, d, local));
  }
  return u;
}

/// Smallest o <= max_order with U^o proportional to I, or nullopt.
inline std::optional<int> cycle_order(const Cycle& cycle, int d, int max_order = 64) {
  std::vector<int> support;
  const Matrix u = cycle_unitary_on_support(cycle, d, support);
  Matrix acc = u;
  for (int o = 1; o <= max_order; ++o) {
    const Complex ph = acc(0, 0);
    if (std::abs(std::abs(ph) - 1.0) < 1e-10 &&
        (acc - ph * Matrix::Identity(acc.rows(), acc.cols())).norm() < 1e-10)
      return o;
    acc = u * acc;
  }
  return std::nullopt;
}

inline Cycle adjoint_cycle(const Cycle& c) {
  Cycle out = c;
  for (auto& pl : out.gates) pl.gate = pl.gate.adjoint();
  return out;
}

/// Unitary folding of one Hard cycle. OrderPower repeats it o*n_id more times
/// (o its order); InversePair appends n_id pairs (H^dagger, H).
inline FoldResult fold(const Circuit& c, const FoldSpec& spec) {
  if (spec.n_id < 1) throw DomainError("fold: n_id must be at least 1 (alpha must exceed 1)");
  const auto hard = c.hard_cycle_positions();
  if (spec.cycle_index >= hard.size()) throw DomainError("fold: Hard cycle index out of range");
  const std::size_t pos = hard[spec.cycle_index];
  const Cycle& target = c.cycles()[pos];
  std::vector<Cycle> inserted;
  FoldResult r{c, 1, 0};
  if (spec.strategy == FoldStrategy::OrderPower) {
    const auto o = cycle_order(target, c.d());
    if (!o) throw DomainError("fold: cycle has no finite order; use InversePair");
    r.order = *o;
    for (int i = 0; i < *o * spec.n_id; ++i) inserted.push_back(target);
    r.alpha = 1 + *o * spec.n_id;
  } else {
    const Cycle inv = adjoint_cycle(target);
    for (int i = 0; i < spec.n_id; ++i) {
      inserted.push_back(inv);
      inserted.push_back(target);
    }
    r.alpha = 1 + 2 * spec.n_id;
  }
  std::vector<Cycle> cycles;
  for (std::size_t i = 0; i < c.cycles().size(); ++i) {
    cycles.push_back(c.cycles()[i]);
    if (i == pos) cycles.insert(cycles.end(), inserted.begin(), inserted.end());
  }
  r.circuit = Circuit(c.n(), c.d(), std::move(cycles));
  return r;
}

/// One fold per Hard cycle, all with the same n_id and strategy.
inline std::vector<FoldSpec> fold_every_cycle(const Circuit& c, int n_id, FoldStrategy s = FoldStrategy::OrderPower) {
  std::vector<FoldSpec> out;
  for (std::size_t j = 0; j < c.num_hard(); ++j) out.push_back({j, n_id, s});
  return out;
}

/// Frobenius norm of the superoperator commutator [F, H] per noisy Hard cycle,
/// normalized by the superoperator dimension. Zero means folding amplifies
/// the cycle noise exactly.
inline std::vector<double> fold_commutation_diagnostic(const Circuit& c, const NoiseModel& noise) {
  std::vector<double> out;
  for (auto pos : c.hard_cycle_positions()) {
    const Cycle& cyc = c.cycles()[pos];
    const auto* chans = noise.hard_noise(cyc);
    if (!chans) {
      out.push_back(0.0);
      continue;
    }
    std::vector<int> support;
    for (const auto& pl : cyc.gates) support.insert(support.end(), pl.qudits.begin(), pl.qudits.end());
    for (const auto& lc : *chans) support.insert(support.end(), lc.targets.begin(), lc.targets.end());
    std::sort(support.begin(), support.end());
    support.erase(std::unique(support.begin(), support.end()), support.end());
    const int k = static_cast<int>(support.size());
    auto local = [&](const std::vector<int>& qs) {
      std::vector<int> l;
      for (int q : qs) l.push_back(static_cast<int>(std::find(support.begin(), support.end(), q) - support.begin()));
      return l;
    };
    const auto dim = static_cast<Eigen::Index>(ipow(static_cast<std::size_t>(c.d()), static_cast<std::size_t>(k)));
    Matrix u = Matrix::Identity(dim, dim);
    for (const auto& pl : cyc.gates) apply_left(u, pl.gate.matrix, LocalIndex(k, c.d(), local(pl.qudits)));
    const Matrix sh = Eigen::kroneckerProduct(u, u.conjugate()).eval();
    // Noise superoperator on the support, assembled column by column.
    Matrix sf(dim * dim, dim * dim);
    for (Eigen::Index col = 0; col < dim * dim; ++col) {
      Matrix e = Matrix::Zero(dim, dim);
      e(col / dim, col % dim) = 1.0;
      for (const auto& lc : *chans) apply_superop_local(e, lc.superop, k, c.d(), local(lc.targets));
      for (Eigen::Index a = 0; a < dim; ++a)
        for (Eigen::Index b = 0; b < dim; ++b) sf(a * dim + b, col) = e(a, b);
    }
    out.push_back((sf * sh - sh * sf).norm() / static_cast<double>(dim * dim));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Estimators
// ---------------------------------------------------------------------------

/// Observable with a bound on max |eigenvalue| (needed for concentration).
struct Observable {
  Matrix op;
  double bound = 1.0;

  static Observable diagonal(const std::vector<double>& values) {
    Matrix m = Matrix::Zero(static_cast<Eigen::Index>(values.size()), static_cast<Eigen::Index>(values.size()));
    double b = 0;
    for (std::size_t i = 0; i < values.size(); ++i) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = values[i];
      b = std::max(b, std::abs(values[i]));
    }
    return {m, b};
  }
  static Observable projector(const Vector& psi) {
    const Vector v = psi / psi.norm();
    return {v * v.adjoint(), 1.0};
  }
  bool is_diagonal() const {
    return (op - Matrix(op.diagonal().asDiagonal())).cwiseAbs().maxCoeff() < 1e-14;
  }
};

/// Single-circuit estimate of <O>. shots == 0 is exact. Diagonal observables
/// are read from the computational-basis distribution (readout confusion
/// included, then `correction` inverted if given); others are sampled in
/// their eigenbasis without readout error.
inline double estimate_observable(const Matrix& rho, int n, int d, const Observable& obs, const NoiseModel* noise,
                                  std::uint64_t shots, std::uint64_t seed,
                                  std::span<const ConfusionMatrix> correction = {}) {
  if (obs.op.rows() != rho.rows()) throw DimensionError("observable dimension does not match circuit");
  if (obs.is_diagonal()) {
    const auto m = measure_state(rho, n, d, noise, shots, seed);
    const auto dist = correction.empty() ? m.observed : rcal_correct(m.observed, correction);
    double acc = 0;
    for (std::size_t i = 0; i < dist.size(); ++i) acc += dist.probs[i] * obs.op(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)).real();
    return acc;
  }
  if (shots == 0) return (obs.op.cwiseProduct(rho.transpose())).sum().real();
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (obs.op + obs.op.adjoint()));
  const Matrix& v = es.eigenvectors();
  const Matrix rotated = v.adjoint() * rho * v;
  auto dist = OutcomeDistribution::from_state(rotated, n, d);
  const auto counts = sample_counts(dist, shots, seed);
  double acc = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) acc += static_cast<double>(counts[i]) * es.eigenvalues()(static_cast<Eigen::Index>(i));
  return acc / static_cast<double>(shots);
}

struct RcConfig {
  int randomizations = 20;
  std::uint64_t shots = 1024;
  std::uint64_t seed = 1;
};

enum class MitigationMethod { Bare, RC, RCNOX };

inline const char* to_string(MitigationMethod m) {
  switch (m) {
    case MitigationMethod::Bare: return "bare";
    case MitigationMethod::RC: return "rc";
    case MitigationMethod::RCNOX: return "rc+nox";
  }
  return "?";
}

struct MitigatedEstimate {
  double value = 0;
  double std_error = 0;
  MitigationMethod method = MitigationMethod::Bare;
  int randomizations = 0;
  std::uint64_t shots = 0;
  std::vector<int> alphas;
  int n_id = 0;
  std::vector<double> samples;  ///< per-randomization estimates
};

inline double sample_mean(std::span<const double> v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

inline double standard_error(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = sample_mean(v);
  double ss = 0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

/// (1/N) sum_k E(O | C_k) over N randomized compilations.
inline MitigatedEstimate rc_estimate(const Circuit& c, const Observable& obs, const NoiseModel* noise, const RcConfig& cfg,
                                     std::span<const ConfusionMatrix> correction = {}) {
  if (cfg.randomizations < 1) throw DomainError("rc_estimate: need at least one randomization");
  std::vector<double> vals(static_cast<std::size_t>(cfg.randomizations));
  parallel_for(vals.size(), [&](std::size_t k) {
    const auto rc = randomize(c, derive_seed(cfg.seed, {k, 0}));
    const Matrix rho = simulate_matrix(rc.circuit, noise);
    vals[k] = estimate_observable(rho, c.n(), c.d(), obs, noise, cfg.shots, derive_seed(cfg.seed, {k, 1}), correction);
  });
  MitigatedEstimate e;
  e.value = sample_mean(vals);
  e.std_error = standard_error(vals);
  e.method = MitigationMethod::RC;
  e.randomizations = cfg.randomizations;
  e.shots = cfg.shots;
  e.samples = std::move(vals);
  return e;
}

/// Exact expectation of the fully twirled circuit: average over all
/// (d^{2n})^m twirl assignments. Only for tiny instances.
inline double rc_exhaustive_expectation(const Circuit& c, const Observable& obs, const NoiseModel* noise) {
  const auto m = c.num_hard();
  const auto count = WeylLabel::count(c.d(), c.n());
  const std::size_t total = ipow(count, m);
  if (total > 100000) throw CapacityError("exhaustive twirl enumeration too large");
  double acc = 0;
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::vector<WeylLabel> tw;
    std::size_t rem = idx;
    for (std::size_t j = 0; j < m; ++j) {
      tw.push_back(WeylLabel::from_index(c.d(), c.n(), rem % count));
      rem /= count;
    }
    const Matrix rho = simulate_matrix(randomize_with(c, tw).circuit, noise);
    acc += (obs.op.cwiseProduct(rho.transpose())).sum().real();
  }
  return acc / static_cast<double>(total);
}

/// 1 - exp(-2 eps^2 N)
inline double hoeffding_bound(double epsilon, long long n) {
  if (!(epsilon > 0 && epsilon < 1)) throw DomainError("hoeffding_bound: epsilon must lie in (0, 1)");
  if (n < 1) throw DomainError("hoeffding_bound: N must be at least 1");
  return 1.0 - std::exp(-2.0 * epsilon * epsilon * static_cast<double>(n));
}

struct NoxCombination {
  double value = 0;
  double std_error = 0;
};

/// E + sum_j (E - E_j)/(alpha_j - 1): linear extrapolation of each cycle's
/// noise strength to zero. Standard errors add in quadrature.
inline NoxCombination nox_combine(double target, double target_se, std::span<const double> copies,
                                  std::span<const double> copies_se, std::span<const int> alphas) {
  if (copies.size() != alphas.size() || copies_se.size() != alphas.size())
    throw DimensionError("nox_combine: one alpha per copy required");
  double value = target;
  double w_target = 1.0;
  double var = 0;
  for (std::size_t j = 0; j < copies.size(); ++j) {
    if (alphas[j] <= 1) throw DomainError("nox_combine: alpha must exceed 1");
    const double w = 1.0 / (alphas[j] - 1);
    value += w * (target - copies[j]);
    w_target += w;
    var += w * w * copies_se[j] * copies_se[j];
  }
  var += w_target * w_target * target_se * target_se;
  return {value, std::sqrt(var)};
}

/// Elementwise nox_combine for vectors (e.g. outcome probabilities).
inline std::vector<double> nox_combine_vector(std::span<const double> target, const std::vector<std::vector<double>>& copies,
                                              std::span<const int> alphas) {
  std::vector<double> out(target.begin(), target.end());
  if (copies.size() != alphas.size()) throw DimensionError("nox_combine_vector: one alpha per copy required");
  for (std::size_t j = 0; j < copies.size(); ++j) {
    if (alphas[j] <= 1) throw DomainError("nox_combine_vector: alpha must exceed 1");
    if (copies[j].size() != target.size()) throw DimensionError("nox_combine_vector: length mismatch");
    const double w = 1.0 / (alphas[j] - 1);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += w * (target[i] - copies[j][i]);
  }
  return out;
}

/// RC-averaged target plus one RC-averaged folded copy per FoldSpec,
/// combined by nox_combine.
inline MitigatedEstimate nox_estimate(const Circuit& c, const Observable& obs, const NoiseModel* noise, const RcConfig& cfg,
                                      const std::vector<FoldSpec>& folds,
                                      std::span<const ConfusionMatrix> correction = {}) {
  if (folds.empty()) throw DomainError("nox_estimate: at least one folded copy is required");
  RcConfig tcfg = cfg;
  tcfg.seed = derive_seed(cfg.seed, {0});
  const auto target = rc_estimate(c, obs, noise, tcfg, correction);
  std::vector<double> vals, ses;
  std::vector<int> alphas;
  for (std::size_t j = 0; j < folds.size(); ++j) {
    const auto f = fold(c, folds[j]);
    RcConfig fcfg = cfg;
    fcfg.seed = derive_seed(cfg.seed, {1, j});
    const auto e = rc_estimate(f.circuit, obs, noise, fcfg, correction);
    vals.push_back(e.value);
    ses.push_back(e.std_error);
    alphas.push_back(f.alpha);
  }
  const auto comb = nox_combine(target.value, target.std_error, vals, ses, alphas);
  MitigatedEstimate out;
  out.value = comb.value;
  out.std_error = comb.std_error;
  out.method = MitigationMethod::RCNOX;
  out.randomizations = cfg.randomizations;
  out.shots = cfg.shots;
  out.alphas = std::move(alphas);
  out.n_id = folds.front().n_id;
  out.samples = target.samples;
  return out;
}

}  // namespace qdm
