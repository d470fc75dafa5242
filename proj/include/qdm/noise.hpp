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

// Synthetic device noise attached to circuit cycles, and readout confusion.

#pragma once

#include <array>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "qdm/circuit.hpp"
#include "qdm/linalg.hpp"
#include "qdm/weyl.hpp"

namespace qdm {

// ---------------------------------------------------------------------------
// Readout confusion
// ---------------------------------------------------------------------------

/// C(s', s) = P(report s' | prepared s); columns sum to one.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(RealMatrix c) : c_(std::move(c)) {
    if (c_.rows() != c_.cols() || c_.rows() < 2) throw DimensionError("confusion matrix must be d x d");
    for (Eigen::Index j = 0; j < c_.cols(); ++j) {
      double s = 0;
      for (Eigen::Index i = 0; i < c_.rows(); ++i) {
        const double v = c_(i, j);
        if (!(v >= 0.0 && v <= 1.0)) throw DomainError("confusion matrix entry outside [0, 1]");
        s += v;
      }
      if (std::abs(s - 1.0) > 1e-12) throw DomainError("confusion matrix column does not sum to 1");
    }
  }

  static ConfusionMatrix identity(int d) { return ConfusionMatrix(RealMatrix::Identity(d, d)); }

  /// Qutrit confusion from the assignment fidelities P(0|0), P(1|1), P(2|2).
  /// Errors are routed one level down (1 -> 0, 2 -> 1) and 0 -> 1.
  static ConfusionMatrix from_qutrit_fidelities(double p00, double p11, double p22) {
    RealMatrix c = RealMatrix::Zero(3, 3);
    c(0, 0) = p00;
    c(1, 0) = 1.0 - p00;
    c(1, 1) = p11;
    c(0, 1) = 1.0 - p11;
    c(2, 2) = p22;
    c(1, 2) = 1.0 - p22;
    return ConfusionMatrix(std::move(c));
  }

  int d() const { return static_cast<int>(c_.rows()); }
  const RealMatrix& matrix() const { return c_; }

  double condition_number() const {
    Eigen::JacobiSVD<RealMatrix> svd(c_);
    const auto& s = svd.singularValues();
    return s(s.size() - 1) > 0 ? s(0) / s(s.size() - 1) : std::numeric_limits<double>::infinity();
  }

  RealMatrix inverse(double max_condition = 1e10) const {
    const double k = condition_number();
    if (!(k < max_condition)) throw SingularMatrixError("confusion matrix is singular (condition number " + std::to_string(k) + ")");
    return c_.inverse();
  }

 private:
  RealMatrix c_;
};

/// Applies per-qudit d x d real matrices to a probability vector over d^n
/// outcomes (tensor product action).
inline std::vector<double> apply_local_stochastic(std::span<const double> probs, std::span<const RealMatrix> mats, int n,
                                                  int d) {
  std::vector<double> v(probs.begin(), probs.end());
  std::vector<double> in(static_cast<std::size_t>(d));
  for (int q = 0; q < n; ++q) {
    const RealMatrix& m = mats[static_cast<std::size_t>(q)];
    const std::size_t stride = ipow(static_cast<std::size_t>(d), static_cast<std::size_t>(n - 1 - q));
    const std::size_t block = stride * static_cast<std::size_t>(d);
    for (std::size_t base = 0; base < v.size(); base += block)
      for (std::size_t off = 0; off < stride; ++off) {
        for (int k = 0; k < d; ++k) in[static_cast<std::size_t>(k)] = v[base + off + static_cast<std::size_t>(k) * stride];
        for (int r = 0; r < d; ++r) {
          double acc = 0;
          for (int k = 0; k < d; ++k) acc += m(r, k) * in[static_cast<std::size_t>(k)];
          v[base + off + static_cast<std::size_t>(r) * stride] = acc;
        }
      }
  }
  return v;
}

/// Reported-outcome distribution given the true one.
inline OutcomeDistribution apply_confusion(const OutcomeDistribution& dist, std::span<const ConfusionMatrix> conf) {
  if (conf.empty()) return dist;
  if (static_cast<int>(conf.size()) != dist.n) throw DimensionError("need one confusion matrix per qudit");
  std::vector<RealMatrix> mats;
  for (const auto& c : conf) {
    if (c.d() != dist.d) throw DimensionError("confusion matrix dimension mismatch");
    mats.push_back(c.matrix());
  }
  auto p = apply_local_stochastic(dist.probs, mats, dist.n, dist.d);
  for (auto& v : p)
    if (v < 0 && v > -1e-15) v = 0;
  return OutcomeDistribution(dist.n, dist.d, std::move(p), dist.quasi);
}

/// Applies C_1^{-1} (x) ... (x) C_n^{-1}; the result is flagged quasi when any
/// entry is negative. Expectation values may be taken on it directly.
inline OutcomeDistribution rcal_correct(const OutcomeDistribution& dist, std::span<const ConfusionMatrix> conf) {
  if (conf.empty()) return dist;
  if (static_cast<int>(conf.size()) != dist.n) throw DimensionError("need one confusion matrix per qudit");
  std::vector<RealMatrix> inv;
  for (const auto& c : conf) {
    if (c.d() != dist.d) throw DimensionError("confusion matrix dimension mismatch");
    inv.push_back(c.inverse());
  }
  auto p = apply_local_stochastic(dist.probs, inv, dist.n, dist.d);
  bool negative = dist.quasi;
  for (double v : p)
    if (v < 0) negative = true;
  return OutcomeDistribution(dist.n, dist.d, std::move(p), negative);
}

// ---------------------------------------------------------------------------
// Channels
// ---------------------------------------------------------------------------

/// Cross-Kerr couplings in MHz (ordinary frequency) and duration in us.
struct CrossKerrParams {
  double a11 = 0, a12 = 0, a21 = 0, a22 = 0;
  double t_us = 0;
};

/// exp(-i t H) with H = 2 pi (a11|11><11| + a12|12><12| + a21|21><21| + a22|22><22|).
inline UnitaryMatrix cross_kerr_unitary(const CrossKerrParams& p) {
  for (double v : {p.a11, p.a12, p.a21, p.a22, p.t_us})
    if (!std::isfinite(v)) throw DomainError("cross-Kerr parameters must be finite");
  Matrix u = Matrix::Identity(9, 9);
  const double w = 2.0 * std::numbers::pi * p.t_us;
  u(4, 4) = std::polar(1.0, -w * p.a11);
  u(5, 5) = std::polar(1.0, -w * p.a12);
  u(7, 7) = std::polar(1.0, -w * p.a21);
  u(8, 8) = std::polar(1.0, -w * p.a22);
  return UnitaryMatrix(std::move(u));
}

/// Residual entangling phase between one gate qutrit and a spectator.
struct SpectatorPhase {
  int gate_qudit = 1;                   ///< 0 or 1: which qutrit of the pair couples
  std::array<double, 4> deltas{};       ///< phases on |11>, |12>, |21>, |22> of (gate, spectator)
};

/// Diagonal coherent error on a qutrit pair: phases on |11>, |12>, |21>, |22>.
/// With a spectator term the channel acts on (pair0, pair1, spectator).
inline QuantumChannel coherent_phase_error(const std::array<double, 4>& deltas,
                                           const std::optional<SpectatorPhase>& spectator = std::nullopt) {
  auto pair_phase = [](const std::array<double, 4>& dl, int a, int b) -> double {
    if (a == 0 || b == 0) return 0.0;
    return dl[static_cast<std::size_t>((a - 1) * 2 + (b - 1))];
  };
  for (double v : deltas)
    if (!std::isfinite(v)) throw DomainError("phase offsets must be finite");
  if (!spectator) {
    Matrix u = Matrix::Identity(9, 9);
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) u(a * 3 + b, a * 3 + b) = std::polar(1.0, pair_phase(deltas, a, b));
    return QuantumChannel::unitary(u);
  }
  if (spectator->gate_qudit != 0 && spectator->gate_qudit != 1) throw DomainError("spectator must couple to qudit 0 or 1");
  Matrix u = Matrix::Identity(27, 27);
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      for (int s = 0; s < 3; ++s) {
        const int g = spectator->gate_qudit == 0 ? a : b;
        const double ph = pair_phase(deltas, a, b) + pair_phase(spectator->deltas, g, s);
        u(a * 9 + b * 3 + s, a * 9 + b * 3 + s) = std::polar(1.0, ph);
      }
  return QuantumChannel::unitary(u);
}

/// Kraus set {sqrt(prob(W)) W}. Labels must share d and n.
inline QuantumChannel stochastic_weyl_channel(const std::vector<std::pair<WeylLabel, double>>& probs) {
  if (probs.empty()) throw DomainError("stochastic_weyl_channel: empty distribution");
  const int d = probs.front().first.d;
  const int n = probs.front().first.n();
  std::vector<double> dense(WeylLabel::count(d, n), 0.0);
  for (const auto& [l, p] : probs) {
    if (l.d != d || l.n() != n) throw DimensionError("stochastic_weyl_channel: labels on different registers");
    dense[l.index()] += p;
  }
  return weyl_channel(d, n, dense);
}

/// Identity with probability 1 - eps, every other Weyl error with eps/(d^{2n}-1).
inline QuantumChannel depolarizing_weyl_channel(int d, int n, double eps) {
  if (!(eps >= 0 && eps <= 1)) throw DomainError("error rate must lie in [0, 1]");
  const auto count = WeylLabel::count(d, n);
  std::vector<double> p(count, eps / static_cast<double>(count - 1));
  p[0] = 1.0 - eps;
  return weyl_channel(d, n, p);
}

// ---------------------------------------------------------------------------
// Noise model
// ---------------------------------------------------------------------------

/// A channel on a subset of qudits, with its superoperator precomputed.
struct LocalChannel {
  std::vector<int> targets;
  QuantumChannel channel;
  Matrix superop;

  LocalChannel(std::vector<int> t, QuantumChannel ch)
      : targets(std::move(t)), channel(std::move(ch)), superop(channel.superoperator()) {}
};

/// Per-cycle noise. Hard cycles look up channels by cycle tag first, then by
/// signature (see Cycle::signature). Easy noise follows every Easy cycle.
class NoiseModel {
 public:
  NoiseModel(int n, int d) : n_(n), d_(d) {}

  static NoiseModel none(int n, int d) { return NoiseModel(n, d); }

  int n() const { return n_; }
  int d() const { return d_; }

  void add_hard(const std::string& signature, std::vector<int> targets, QuantumChannel ch) {
    hard_[signature].push_back(make_local(std::move(targets), std::move(ch)));
  }
  void add_tagged(const std::string& tag, std::vector<int> targets, QuantumChannel ch) {
    tagged_[tag].push_back(make_local(std::move(targets), std::move(ch)));
  }
  void add_easy(std::vector<int> targets, QuantumChannel ch) { easy_.push_back(make_local(std::move(targets), std::move(ch))); }
  void set_readout(std::vector<ConfusionMatrix> conf) {
    if (!conf.empty() && static_cast<int>(conf.size()) != n_) throw DimensionError("need one confusion matrix per qudit");
    for (const auto& c : conf)
      if (c.d() != d_) throw DimensionError("confusion matrix dimension mismatch");
    readout_ = std::move(conf);
  }

  const std::vector<LocalChannel>* hard_noise(const Cycle& c) const {
    if (!c.tag.empty()) {
      auto it = tagged_.find(c.tag);
      if (it != tagged_.end()) return &it->second;
    }
    auto it = hard_.find(c.signature());
    return it == hard_.end() ? nullptr : &it->second;
  }

  const std::map<std::string, std::vector<LocalChannel>>& hard() const { return hard_; }
  const std::map<std::string, std::vector<LocalChannel>>& tagged() const { return tagged_; }
  const std::vector<LocalChannel>& easy() const { return easy_; }
  const std::vector<ConfusionMatrix>& readout() const { return readout_; }
  bool has_readout_error() const { return !readout_.empty(); }
  bool is_noiseless() const { return hard_.empty() && tagged_.empty() && easy_.empty() && readout_.empty(); }

  nlohmann::json metadata = nlohmann::json::object();

 private:
  LocalChannel make_local(std::vector<int> targets, QuantumChannel ch) const {
    std::vector<bool> seen(static_cast<std::size_t>(n_), false);
    for (int t : targets) {
      if (t < 0 || t >= n_) throw DimensionError("noise target qudit out of range");
      if (seen[static_cast<std::size_t>(t)]) throw DimensionError("repeated noise target qudit");
      seen[static_cast<std::size_t>(t)] = true;
    }
    if (ch.dim() != ipow(static_cast<std::size_t>(d_), targets.size()))
      throw DimensionError("channel dimension does not match its target qudits");
    return LocalChannel(std::move(targets), std::move(ch));
  }

  int n_;
  int d_;
  std::map<std::string, std::vector<LocalChannel>> hard_;
  std::map<std::string, std::vector<LocalChannel>> tagged_;
  std::vector<LocalChannel> easy_;
  std::vector<ConfusionMatrix> readout_;
};

}  // namespace qdm
