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

// Cycle-structured circuits: Easy (single-qudit) cycles alternate with Hard
// (multi-qudit Clifford) cycles, starting and ending with an Easy cycle.

#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "qdm/linalg.hpp"
#include "qdm/random.hpp"
#include "qdm/weyl.hpp"

namespace qdm {

enum class GateKind {
  Weyl,
  Hadamard,
  HadamardDag,
  VirtualDiag,
  Haar,
  EigenbasisRotation,
  Custom,
  CZ,
  CZdag,
  CliffordCustom,
};

inline const char* to_string(GateKind k) {
  switch (k) {
    case GateKind::Weyl: return "weyl";
    case GateKind::Hadamard: return "hadamard";
    case GateKind::HadamardDag: return "hadamard_dag";
    case GateKind::VirtualDiag: return "virtual_diag";
    case GateKind::Haar: return "haar";
    case GateKind::EigenbasisRotation: return "eigenbasis_rotation";
    case GateKind::Custom: return "custom";
    case GateKind::CZ: return "cz";
    case GateKind::CZdag: return "cz_dag";
    case GateKind::CliffordCustom: return "clifford";
  }
  return "?";
}

inline std::optional<GateKind> gate_kind_from_string(const std::string& s) {
  for (auto k : {GateKind::Weyl, GateKind::Hadamard, GateKind::HadamardDag, GateKind::VirtualDiag, GateKind::Haar,
                 GateKind::EigenbasisRotation, GateKind::Custom, GateKind::CZ, GateKind::CZdag,
                 GateKind::CliffordCustom})
    if (s == to_string(k)) return k;
  return std::nullopt;
}

/// Haar-random element of SU(d): QR of a complex Gaussian matrix with the
/// diagonal of R normalized to positive reals, then the determinant removed.
inline Matrix haar_unitary(int d, Rng& rng) {
  std::normal_distribution<double> g(0.0, std::sqrt(0.5));
  Matrix z(d, d);
  for (Eigen::Index c = 0; c < d; ++c)
    for (Eigen::Index r = 0; r < d; ++r) z(r, c) = Complex(g(rng), g(rng));
  Eigen::HouseholderQR<Matrix> qr(z);
  Matrix q = qr.householderQ() * Matrix::Identity(d, d);
  const Matrix rr = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index c = 0; c < d; ++c) {
    const Complex r = rr(c, c);
    q.col(c) *= r / std::abs(r);
  }
  const Complex det = q.determinant();
  q *= std::polar(1.0, -std::arg(det) / d);
  return q;
}

/// A gate with its matrix precomputed. The kind and payload fields are what
/// gets serialized; `matrix` always holds the operator on `arity` qudits.
struct Gate {
  GateKind kind = GateKind::Custom;
  int d = 3;
  int arity = 1;
  Matrix matrix;
  std::optional<WeylLabel> label;
  std::vector<double> phases;
  std::uint64_t seed_tag = 0;
  std::string name;

  static Gate weyl(const WeylLabel& l) {
    if (l.n() != 1) throw DimensionError("Weyl gates are single-qudit; place one per qudit");
    Gate g = base(GateKind::Weyl, l.d, 1, weyl_matrix(l));
    g.label = l;
    return g;
  }
  static Gate weyl(int d, int p, int q) { return weyl(WeylLabel::single(d, p, q)); }
  static Gate identity(int d) { return weyl(d, 0, 0); }
  static Gate hadamard(int d) { return base(GateKind::Hadamard, d, 1, hadamard_matrix(d)); }
  static Gate hadamard_dag(int d) { return base(GateKind::HadamardDag, d, 1, hadamard_matrix(d).adjoint()); }
  static Gate virtual_diag(int d, std::vector<double> ph) {
    if (static_cast<int>(ph.size()) != d) throw DimensionError("virtual_diag needs d phases");
    Matrix m = Matrix::Zero(d, d);
    for (int k = 0; k < d; ++k) m(k, k) = std::polar(1.0, ph[static_cast<std::size_t>(k)]);
    Gate g = base(GateKind::VirtualDiag, d, 1, std::move(m));
    g.phases = std::move(ph);
    return g;
  }
  static Gate haar(int d, std::uint64_t seed) {
    Rng rng(seed);
    Gate g = base(GateKind::Haar, d, 1, haar_unitary(d, rng));
    g.seed_tag = seed;
    return g;
  }
  /// Haar gate with an explicit matrix (used by the parser).
  static Gate haar_with_matrix(const Matrix& m, int d, std::uint64_t seed) {
    Gate g = base(GateKind::Haar, d, 1, UnitaryMatrix(m).data());
    g.seed_tag = seed;
    return g;
  }
  /// V^dagger for V = weyl_eigenbasis(label): a computational-basis readout
  /// afterwards reports the eigenvalue index k of w^k.
  static Gate eigenbasis_rotation(const WeylLabel& l) {
    Gate g = base(GateKind::EigenbasisRotation, l.d, 1, weyl_eigenbasis(l).adjoint());
    g.label = l;
    return g;
  }
  static Gate custom(const Matrix& m, int d, std::string nm = "custom") {
    const int arity = qudit_count(static_cast<std::size_t>(m.rows()), d);
    Gate g = base(GateKind::Custom, d, arity, UnitaryMatrix(m).data());
    g.name = std::move(nm);
    return g;
  }
  static Gate cz(int d) { return base(GateKind::CZ, d, 2, cz_matrix(d, 1)); }
  static Gate cz_dag(int d) { return base(GateKind::CZdag, d, 2, cz_matrix(d, -1)); }
  /// Multi-qudit Clifford declared by matrix; rejected unless it normalizes
  /// the Weyl group.
  static Gate clifford(const Matrix& m, int d, std::string nm) {
    const CliffordGate cg = CliffordGate::custom(m, d, nm);
    Gate g = base(GateKind::CliffordCustom, d, cg.arity(), cg.matrix());
    g.name = std::move(nm);
    return g;
  }

  bool is_hard() const { return kind == GateKind::CZ || kind == GateKind::CZdag || kind == GateKind::CliffordCustom; }

  std::string display_name() const {
    if (kind == GateKind::Custom || kind == GateKind::CliffordCustom) return name;
    if (kind == GateKind::CZ) return "CZ";
    if (kind == GateKind::CZdag) return "CZdag";
    return to_string(kind);
  }

  CliffordGate clifford_gate() const {
    switch (kind) {
      case GateKind::CZ: return CliffordGate::cz(d);
      case GateKind::CZdag: return CliffordGate::cz_dag(d);
      case GateKind::CliffordCustom: return CliffordGate::custom(matrix, d, name);
      case GateKind::Hadamard: return CliffordGate::hadamard(d);
      case GateKind::Weyl: return CliffordGate::weyl(*label);
      default: return CliffordGate::custom(matrix, d, display_name());
    }
  }

  Gate adjoint() const {
    switch (kind) {
      case GateKind::CZ: return cz_dag(d);
      case GateKind::CZdag: return cz(d);
      case GateKind::Hadamard: return hadamard_dag(d);
      case GateKind::HadamardDag: return hadamard(d);
      case GateKind::CliffordCustom: return clifford(matrix.adjoint(), d, name + "_dag");
      default: return custom(matrix.adjoint(), d, display_name() + "_dag");
    }
  }

 private:
  static Gate base(GateKind k, int d, int arity, Matrix m) {
    Gate g;
    g.kind = k;
    g.d = d;
    g.arity = arity;
    g.matrix = std::move(m);
    return g;
  }
};

enum class CycleKind { Easy, Hard };

struct Placement {
  std::vector<int> qudits;
  Gate gate;
};

struct Cycle {
  CycleKind kind = CycleKind::Easy;
  std::vector<Placement> gates;
  /// Optional per-instance key; a noise model may attach channels to it.
  std::string tag;

  static Cycle easy(std::vector<Placement> g = {}) { return Cycle{CycleKind::Easy, std::move(g), {}}; }
  static Cycle hard(std::vector<Placement> g) { return Cycle{CycleKind::Hard, std::move(g), {}}; }

  bool is_hard() const { return kind == CycleKind::Hard; }

  /// Canonical Hard-cycle key, e.g. "CZdag(0,1)" or "CZdag(0,1)+CZdag(2,3)".
  std::string signature() const {
    std::vector<std::string> parts;
    for (const auto& pl : gates) {
      std::string s = pl.gate.display_name() + "(";
      for (std::size_t i = 0; i < pl.qudits.size(); ++i) s += (i ? "," : "") + std::to_string(pl.qudits[i]);
      parts.push_back(s + ")");
    }
    std::sort(parts.begin(), parts.end());
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? "+" : "") + parts[i];
    return out;
  }
};

class Circuit {
 public:
  Circuit(int n, int d, std::vector<Cycle> cycles = {}) : n_(n), d_(d) {
    if (n < 1) throw DomainError("circuit needs at least one qudit");
    if (d < 2) throw DomainError("local dimension must be at least 2");
    check_capacity(ipow(static_cast<std::size_t>(d), static_cast<std::size_t>(n)));
    for (auto& c : cycles) validate(c);
    cycles_ = normalize(std::move(cycles));
  }

  int n() const { return n_; }
  int d() const { return d_; }
  std::size_t dim() const { return ipow(static_cast<std::size_t>(d_), static_cast<std::size_t>(n_)); }
  const std::vector<Cycle>& cycles() const { return cycles_; }

  std::vector<std::size_t> hard_cycle_positions() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < cycles_.size(); ++i)
      if (cycles_[i].is_hard()) out.push_back(i);
    return out;
  }
  std::size_t num_hard() const { return hard_cycle_positions().size(); }

  /// Full unitary (for small registers and tests).
  Matrix unitary() const {
    const auto dim = static_cast<Eigen::Index>(this->dim());
    Matrix u = Matrix::Identity(dim, dim);
    for (const auto& c : cycles_)
      for (const auto& pl : c.gates) {
        const LocalIndex idx(n_, d_, pl.qudits);
        apply_left(u, pl.gate.matrix, idx);
      }
    return u;
  }

 private:
  void validate(const Cycle& c) const {
    std::vector<bool> used(static_cast<std::size_t>(n_), false);
    for (const auto& pl : c.gates) {
      if (pl.gate.d != d_) throw DimensionError("gate dimension differs from circuit dimension");
      if (static_cast<int>(pl.qudits.size()) != pl.gate.arity)
        throw DimensionError("gate " + pl.gate.display_name() + " placed on wrong number of qudits");
      for (int q : pl.qudits) {
        if (q < 0 || q >= n_) throw DimensionError("qudit index " + std::to_string(q) + " out of range");
        if (used[static_cast<std::size_t>(q)]) throw DimensionError("gates within a cycle must act on disjoint qudits");
        used[static_cast<std::size_t>(q)] = true;
      }
      if (c.is_hard() && !pl.gate.is_hard())
        throw DomainError("Hard cycles hold only multi-qudit Clifford gates, got " + pl.gate.display_name());
      if (!c.is_hard() && pl.gate.arity != 1)
        throw DomainError("Easy cycles hold only single-qudit gates, got " + pl.gate.display_name());
    }
  }

  /// Merge runs of Easy cycles and pad with identity Easy cycles so the list
  /// reads Easy, Hard, Easy, ..., Easy.
  std::vector<Cycle> normalize(std::vector<Cycle> in) const {
    std::vector<Cycle> out;
    for (auto& c : in) {
      if (c.is_hard()) {
        if (out.empty() || out.back().is_hard()) out.push_back(Cycle::easy());
        out.push_back(std::move(c));
      } else if (!out.empty() && !out.back().is_hard()) {
        out.back() = merge_easy(out.back(), c);
      } else {
        out.push_back(std::move(c));
      }
    }
    if (out.empty() || out.back().is_hard()) out.push_back(Cycle::easy());
    return out;
  }

  Cycle merge_easy(const Cycle& first, const Cycle& second) const {
    std::vector<std::optional<Gate>> a(static_cast<std::size_t>(n_)), b(static_cast<std::size_t>(n_));
    for (const auto& pl : first.gates) a[static_cast<std::size_t>(pl.qudits[0])] = pl.gate;
    for (const auto& pl : second.gates) b[static_cast<std::size_t>(pl.qudits[0])] = pl.gate;
    Cycle out = Cycle::easy();
    out.tag = first.tag.empty() ? second.tag : first.tag;
    for (int q = 0; q < n_; ++q) {
      const auto& ga = a[static_cast<std::size_t>(q)];
      const auto& gb = b[static_cast<std::size_t>(q)];
      if (ga && gb)
        out.gates.push_back({{q}, Gate::custom(gb->matrix * ga->matrix, d_, gb->display_name() + "*" + ga->display_name())});
      else if (ga)
        out.gates.push_back({{q}, *ga});
      else if (gb)
        out.gates.push_back({{q}, *gb});
    }
    return out;
  }

  int n_;
  int d_;
  std::vector<Cycle> cycles_;
};

/// Exact structural comparison; matrices compared entrywise within `tol`.
inline bool structurally_equal(const Circuit& a, const Circuit& b, double tol = 1e-15) {
  if (a.n() != b.n() || a.d() != b.d() || a.cycles().size() != b.cycles().size()) return false;
  for (std::size_t i = 0; i < a.cycles().size(); ++i) {
    const auto& ca = a.cycles()[i];
    const auto& cb = b.cycles()[i];
    if (ca.kind != cb.kind || ca.tag != cb.tag || ca.gates.size() != cb.gates.size()) return false;
    for (std::size_t j = 0; j < ca.gates.size(); ++j) {
      const auto& ga = ca.gates[j];
      const auto& gb = cb.gates[j];
      if (ga.qudits != gb.qudits || ga.gate.kind != gb.gate.kind || ga.gate.label != gb.gate.label ||
          ga.gate.phases != gb.gate.phases || ga.gate.seed_tag != gb.gate.seed_tag || ga.gate.name != gb.gate.name)
        return false;
      if ((ga.gate.matrix - gb.gate.matrix).cwiseAbs().maxCoeff() > tol) return false;
    }
  }
  return true;
}

/// H(q0) H^dag(q1) . CZdag(q0,q1) . H(q1) H^dag(q2) . CZdag(q1,q2) . H(q2)
/// and so on along the chain; prepares (|0..0> + |1..1> + ...)/sqrt(d).
inline Circuit ghz_circuit(int n, int d) {
  if (n < 2) throw DomainError("GHZ circuit needs at least two qudits");
  std::vector<Cycle> cycles;
  cycles.push_back(Cycle::easy({{{0}, Gate::hadamard(d)}, {{1}, Gate::hadamard_dag(d)}}));
  for (int k = 0; k + 1 < n; ++k) {
    cycles.push_back(Cycle::hard({{{k, k + 1}, Gate::cz_dag(d)}}));
    std::vector<Placement> next{{{k + 1}, Gate::hadamard(d)}};
    if (k + 2 < n) next.push_back({{k + 2}, Gate::hadamard_dag(d)});
    cycles.push_back(Cycle::easy(std::move(next)));
  }
  return Circuit(n, d, std::move(cycles));
}

inline Vector ghz_state(int n, int d) {
  const auto dim = static_cast<Eigen::Index>(ipow(static_cast<std::size_t>(d), static_cast<std::size_t>(n)));
  Vector v = Vector::Zero(dim);
  for (int k = 0; k < d; ++k) {
    std::size_t idx = 0;
    for (int i = 0; i < n; ++i) idx = idx * static_cast<std::size_t>(d) + static_cast<std::size_t>(k);
    v(static_cast<Eigen::Index>(idx)) = 1.0 / std::sqrt(static_cast<double>(d));
  }
  return v;
}

}  // namespace qdm
