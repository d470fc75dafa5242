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

// Weyl-Heisenberg group over Z_d.
//
//   X|k> = |k+1 mod d>,  Z|k> = w^k |k>,  w = e^{2 pi i/d}
//   W_{p,q} = w^{-pq/2} Z^p X^q
//
// Phases are integers modulo 2d in units of t = e^{i pi/d} (t^2 = w). For odd
// d the half power w^{1/2} is taken to be w^{(d+1)/2}, which keeps every W of
// order d; for even d it is t itself (d = 2 gives X, Y, Z).

#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "qdm/linalg.hpp"

namespace qdm {

inline int mod(long long a, long long m) { return static_cast<int>(((a % m) + m) % m); }

/// t^k with t = e^{i pi/d}
inline Complex tau_power(int d, long long k) {
  const double a = std::numbers::pi * static_cast<double>(mod(k, 2LL * d)) / d;
  return {std::cos(a), std::sin(a)};
}

/// Exponent of t carried by the single-qudit W_{p,q} relative to Z^p X^q.
inline int weyl_intrinsic_phase(int d, int p, int q) {
  if (d % 2 == 1) return mod(2LL * mod(-static_cast<long long>(p) * q * ((d + 1) / 2), d), 2LL * d);
  return mod(-static_cast<long long>(p) * q, 2LL * d);
}

/// Symbolic n-qudit Weyl label (p, q) with entries in [0, d).
struct WeylLabel {
  int d = 2;
  std::vector<int> p;
  std::vector<int> q;

  WeylLabel() = default;
  WeylLabel(int d_, std::vector<int> p_, std::vector<int> q_) : d(d_), p(std::move(p_)), q(std::move(q_)) {
    if (d < 2) throw DomainError("local dimension must be at least 2");
    if (p.empty() || p.size() != q.size()) throw DimensionError("Weyl label needs equal, nonempty p and q");
    for (std::size_t i = 0; i < p.size(); ++i)
      if (p[i] < 0 || p[i] >= d || q[i] < 0 || q[i] >= d) throw DomainError("Weyl label entry outside [0, d)");
  }

  static WeylLabel identity(int d, int n) {
    return WeylLabel(d, std::vector<int>(static_cast<std::size_t>(n), 0), std::vector<int>(static_cast<std::size_t>(n), 0));
  }
  static WeylLabel single(int d, int p, int q) { return WeylLabel(d, {p}, {q}); }

  /// Label number `index` in [0, d^{2n}): qudit 0 most significant, each
  /// qudit contributing the digit p*d + q.
  static WeylLabel from_index(int d, int n, std::size_t index) {
    std::vector<int> p(static_cast<std::size_t>(n)), q(static_cast<std::size_t>(n));
    const std::size_t dd = static_cast<std::size_t>(d) * static_cast<std::size_t>(d);
    for (int i = n - 1; i >= 0; --i) {
      const auto digit = index % dd;
      index /= dd;
      p[static_cast<std::size_t>(i)] = static_cast<int>(digit / static_cast<std::size_t>(d));
      q[static_cast<std::size_t>(i)] = static_cast<int>(digit % static_cast<std::size_t>(d));
    }
    return WeylLabel(d, std::move(p), std::move(q));
  }

  static std::size_t count(int d, int n) { return ipow(static_cast<std::size_t>(d) * static_cast<std::size_t>(d), static_cast<std::size_t>(n)); }

  std::size_t index() const {
    std::size_t idx = 0;
    for (std::size_t i = 0; i < p.size(); ++i)
      idx = idx * static_cast<std::size_t>(d) * static_cast<std::size_t>(d) + static_cast<std::size_t>(p[i] * d + q[i]);
    return idx;
  }

  int n() const { return static_cast<int>(p.size()); }

  bool is_identity() const {
    for (std::size_t i = 0; i < p.size(); ++i)
      if (p[i] != 0 || q[i] != 0) return false;
    return true;
  }

  WeylLabel local(int i) const { return single(d, p.at(static_cast<std::size_t>(i)), q.at(static_cast<std::size_t>(i))); }

  /// Restriction to the listed qudits, in that order.
  WeylLabel restrict(std::span<const int> qudits) const {
    std::vector<int> pp, qq;
    for (int t : qudits) {
      pp.push_back(p.at(static_cast<std::size_t>(t)));
      qq.push_back(q.at(static_cast<std::size_t>(t)));
    }
    return WeylLabel(d, std::move(pp), std::move(qq));
  }

  WeylLabel negated() const {
    std::vector<int> pp(p.size()), qq(q.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
      pp[i] = mod(-p[i], d);
      qq[i] = mod(-q[i], d);
    }
    return WeylLabel(d, std::move(pp), std::move(qq));
  }

  std::string str() const {
    std::ostringstream os;
    os << "W[";
    for (std::size_t i = 0; i < p.size(); ++i) os << (i ? "|" : "") << p[i] << "," << q[i];
    os << "]";
    return os.str();
  }

  friend bool operator==(const WeylLabel&, const WeylLabel&) = default;
};

/// t^{phase_exp} W_label
struct PhasedWeyl {
  WeylLabel label;
  int phase_exp = 0;

  PhasedWeyl() = default;
  PhasedWeyl(WeylLabel l, int e = 0) : label(std::move(l)), phase_exp(mod(e, 2LL * label.d)) {}

  Complex phase() const { return tau_power(label.d, phase_exp); }
  friend bool operator==(const PhasedWeyl&, const PhasedWeyl&) = default;
};

/// Z^p X^q on one qudit (no phase).
inline Matrix clock_shift(int d, int p, int q) {
  Matrix m = Matrix::Zero(d, d);
  for (int k = 0; k < d; ++k) m((k + q) % d, k) = root_of_unity(d, static_cast<long long>(p) * ((k + q) % d));
  return m;
}

inline Matrix weyl_single_matrix(int d, int p, int q) {
  return tau_power(d, weyl_intrinsic_phase(d, p, q)) * clock_shift(d, p, q);
}

/// Tensor product of the single-qudit W_{p_i,q_i}.
inline Matrix weyl_matrix(const WeylLabel& label) {
  check_capacity(ipow(static_cast<std::size_t>(label.d), static_cast<std::size_t>(label.n())));
  Matrix out = Matrix::Identity(1, 1);
  for (int i = 0; i < label.n(); ++i)
    out = Eigen::kroneckerProduct(out, weyl_single_matrix(label.d, label.p[static_cast<std::size_t>(i)],
                                                          label.q[static_cast<std::size_t>(i)]))
              .eval();
  return out;
}

inline Matrix weyl_matrix(const PhasedWeyl& w) { return w.phase() * weyl_matrix(w.label); }

inline void require_compatible(const WeylLabel& a, const WeylLabel& b) {
  if (a.d != b.d || a.n() != b.n()) throw DimensionError("Weyl operands act on different registers");
}

/// Exact product a * b.
inline PhasedWeyl weyl_compose(const PhasedWeyl& a, const PhasedWeyl& b) {
  require_compatible(a.label, b.label);
  const int d = a.label.d;
  const auto n = static_cast<std::size_t>(a.label.n());
  std::vector<int> p(n), q(n);
  long long phase = static_cast<long long>(a.phase_exp) + b.phase_exp;
  for (std::size_t i = 0; i < n; ++i) {
    const int pa = a.label.p[i], qa = a.label.q[i], pb = b.label.p[i], qb = b.label.q[i];
    p[i] = (pa + pb) % d;
    q[i] = (qa + qb) % d;
    // Z^pa X^qa Z^pb X^qb = w^{-qa pb} Z^{pa+pb} X^{qa+qb}
    phase += weyl_intrinsic_phase(d, pa, qa) + weyl_intrinsic_phase(d, pb, qb) - 2LL * qa * pb -
             weyl_intrinsic_phase(d, p[i], q[i]);
  }
  return PhasedWeyl(WeylLabel(d, std::move(p), std::move(q)), static_cast<int>(mod(phase, 2LL * d)));
}

inline PhasedWeyl weyl_inverse(const PhasedWeyl& a) {
  const PhasedWeyl prod = weyl_compose(a, PhasedWeyl(a.label.negated(), 0));
  return PhasedWeyl(a.label.negated(), -prod.phase_exp);
}

inline PhasedWeyl weyl_power(const PhasedWeyl& a, int m) {
  PhasedWeyl out(WeylLabel::identity(a.label.d, a.label.n()), 0);
  for (int i = 0; i < m; ++i) out = weyl_compose(out, a);
  return out;
}

/// c in Z_d with W_a W_b = w^c W_b W_a.
inline int weyl_commutator_phase(const WeylLabel& a, const WeylLabel& b) {
  require_compatible(a, b);
  long long c = 0;
  for (int i = 0; i < a.n(); ++i) {
    const auto k = static_cast<std::size_t>(i);
    c += static_cast<long long>(a.p[k]) * b.q[k] - static_cast<long long>(a.q[k]) * b.p[k];
  }
  return mod(c, a.d);
}

/// Columns are eigenvectors of the single-qudit W for eigenvalues w^0..w^{d-1};
/// each column's first nonzero component is real positive.
inline Matrix weyl_eigenbasis(const WeylLabel& label) {
  if (label.n() != 1) throw DimensionError("weyl_eigenbasis acts on a single qudit");
  const int d = label.d;
  if (label.is_identity()) return Matrix::Identity(d, d);
  const Matrix w = weyl_matrix(label);
  std::vector<Matrix> powers{Matrix::Identity(d, d)};
  for (int m = 1; m < d; ++m) powers.push_back(powers.back() * w);
  Matrix v(d, d);
  for (int k = 0; k < d; ++k) {
    // rank-one spectral projector for eigenvalue w^k
    Matrix proj = Matrix::Zero(d, d);
    for (int m = 0; m < d; ++m) proj += root_of_unity(d, -static_cast<long long>(k) * m) * powers[static_cast<std::size_t>(m)];
    proj /= static_cast<double>(d);
    Eigen::Index best = 0;
    for (Eigen::Index j = 1; j < d; ++j)
      if (proj.col(j).norm() > proj.col(best).norm() + 1e-12) best = j;
    Vector col = proj.col(best);
    col /= col.norm();
    for (Eigen::Index j = 0; j < d; ++j) {
      if (std::abs(col(j)) > 1e-9) {
        col *= std::conj(col(j)) / std::abs(col(j));
        break;
      }
    }
    v.col(k) = col;
  }
  return v;
}

/// Orthonormal basis element W_label / sqrt(D).
inline Matrix weyl_basis_element(const WeylLabel& label) {
  const double dim = static_cast<double>(ipow(static_cast<std::size_t>(label.d), static_cast<std::size_t>(label.n())));
  return weyl_matrix(label) / std::sqrt(dim);
}

// ---------------------------------------------------------------------------
// Stochastic Weyl channels and twirling
// ---------------------------------------------------------------------------

/// rho -> sum_L prob[L] W_L rho W_L^dagger, probabilities indexed by
/// WeylLabel::index(). Zero-probability terms are omitted from the Kraus list.
inline QuantumChannel weyl_channel(int d, int n, std::span<const double> probs) {
  if (probs.size() != WeylLabel::count(d, n)) throw DimensionError("weyl_channel: need d^{2n} probabilities");
  double total = 0;
  for (double p : probs) {
    if (!(p >= 0)) throw DomainError("weyl_channel: negative or NaN probability");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12) throw DomainError("weyl_channel: probabilities sum to " + std::to_string(total));
  std::vector<Matrix> kraus;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] == 0) continue;
    kraus.push_back(std::sqrt(probs[i]) * weyl_matrix(WeylLabel::from_index(d, n, i)));
  }
  return QuantumChannel(std::move(kraus));
}

/// Weyl-diagonal of the process matrix: prob(L) = sum_k |Tr(W_L^dagger K_k)|^2 / D^2.
inline std::vector<double> weyl_error_probabilities(const QuantumChannel& ch, int d) {
  const int n = qudit_count(ch.dim(), d);
  const double dim = static_cast<double>(ch.dim());
  std::vector<double> probs(WeylLabel::count(d, n), 0.0);
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const Matrix w = weyl_matrix(WeylLabel::from_index(d, n, i));
    double acc = 0;
    for (const auto& k : ch.kraus()) acc += std::norm((w.adjoint() * k).trace());
    probs[i] = acc / (dim * dim);
  }
  return probs;
}

/// Uniform average of W^dagger ch(W . W^dagger) W over all d^{2n} Weyl
/// operators, which equals the Weyl channel given by the diagonal of the
/// process matrix.
inline QuantumChannel twirl_channel(const QuantumChannel& ch, int d) {
  const int n = qudit_count(ch.dim(), d);
  auto probs = weyl_error_probabilities(ch, d);
  double total = 0;
  for (auto& p : probs) {
    if (p < 1e-15) p = 0;
    total += p;
  }
  for (auto& p : probs) p /= total;
  return weyl_channel(d, n, probs);
}

// ---------------------------------------------------------------------------
// Clifford gates and conjugation
// ---------------------------------------------------------------------------

enum class CliffordKind { CZ, CZdag, Hadamard, Sdiag, WeylGate, Custom };

inline const char* to_string(CliffordKind k) {
  switch (k) {
    case CliffordKind::CZ: return "CZ";
    case CliffordKind::CZdag: return "CZdag";
    case CliffordKind::Hadamard: return "Hadamard";
    case CliffordKind::Sdiag: return "Sdiag";
    case CliffordKind::WeylGate: return "Weyl";
    case CliffordKind::Custom: return "Custom";
  }
  return "?";
}

/// sum_n |n><n| (x) Z^{sign*n}
inline Matrix cz_matrix(int d, int sign = 1) {
  Matrix m = Matrix::Zero(d * d, d * d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) m(a * d + b, a * d + b) = root_of_unity(d, static_cast<long long>(sign) * a * b);
  return m;
}

/// H|n> = d^{-1/2} sum_m w^{nm} |m>
inline Matrix hadamard_matrix(int d) {
  Matrix m(d, d);
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c) m(r, c) = root_of_unity(d, static_cast<long long>(r) * c) / std::sqrt(static_cast<double>(d));
  return m;
}

/// Diagonal phase Clifford: w^{n(n-1)/2} for odd d, diag(1, i) for d = 2.
inline Matrix sdiag_matrix(int d) {
  Matrix m = Matrix::Zero(d, d);
  for (int k = 0; k < d; ++k)
    m(k, k) = (d % 2 == 1) ? root_of_unity(d, static_cast<long long>(k) * (k - 1) / 2) : tau_power(d, static_cast<long long>(k) * k);
  return m;
}

/// Image of a PhasedWeyl under conjugation, or nullopt if M is not a phased
/// Weyl operator within `tol`.
inline std::optional<PhasedWeyl> identify_phased_weyl(const Matrix& m, int d, int n, double tol = 1e-10) {
  const double dim = static_cast<double>(m.rows());
  for (std::size_t i = 0; i < WeylLabel::count(d, n); ++i) {
    const WeylLabel l = WeylLabel::from_index(d, n, i);
    const Matrix w = weyl_matrix(l);
    const Complex t = (w.adjoint() * m).trace() / dim;
    if (std::abs(std::abs(t) - 1.0) > 1e-6) continue;
    const double units = std::arg(t) / (std::numbers::pi / d);
    const int e = mod(std::llround(units), 2LL * d);
    if ((m - tau_power(d, e) * w).norm() > tol) return std::nullopt;
    return PhasedWeyl(l, e);
  }
  return std::nullopt;
}

/// A Clifford gate on `arity` qudits. Custom matrices are accepted only after
/// the numerical normalizer check.
class CliffordGate {
 public:
  static CliffordGate cz(int d) { return CliffordGate(CliffordKind::CZ, d, 2, cz_matrix(d, 1)); }
  static CliffordGate cz_dag(int d) { return CliffordGate(CliffordKind::CZdag, d, 2, cz_matrix(d, -1)); }
  static CliffordGate hadamard(int d) { return CliffordGate(CliffordKind::Hadamard, d, 1, hadamard_matrix(d)); }
  static CliffordGate sdiag(int d) { return CliffordGate(CliffordKind::Sdiag, d, 1, sdiag_matrix(d)); }
  static CliffordGate weyl(const WeylLabel& l) {
    CliffordGate g(CliffordKind::WeylGate, l.d, l.n(), weyl_matrix(l));
    g.label_ = l;
    return g;
  }
  static CliffordGate custom(const Matrix& m, int d, std::string name = "Custom") {
    const int arity = qudit_count(static_cast<std::size_t>(m.rows()), d);
    CliffordGate g(CliffordKind::Custom, d, arity, UnitaryMatrix(m).data());
    g.name_ = std::move(name);
    g.table();  // throws NormalizerViolation
    return g;
  }

  CliffordKind kind() const { return kind_; }
  int d() const { return d_; }
  int arity() const { return arity_; }
  const Matrix& matrix() const { return matrix_; }
  const std::optional<WeylLabel>& label() const { return label_; }
  const std::string& name() const { return name_; }

  /// Images of Z_0, X_0, Z_1, X_1, ... under U . U^dagger.
  const std::vector<PhasedWeyl>& table() const;

 private:
  CliffordGate(CliffordKind k, int d, int arity, Matrix m)
      : kind_(k), d_(d), arity_(arity), matrix_(std::move(m)), name_(to_string(k)) {}

  std::string cache_key() const {
    std::ostringstream os;
    os << static_cast<int>(kind_) << ":" << d_ << ":" << arity_;
    if (kind_ == CliffordKind::Custom || kind_ == CliffordKind::WeylGate) {
      os.precision(17);
      for (Eigen::Index i = 0; i < matrix_.size(); ++i) os << ";" << matrix_(i).real() << "," << matrix_(i).imag();
    }
    return os.str();
  }

  CliffordKind kind_;
  int d_;
  int arity_;
  Matrix matrix_;
  std::optional<WeylLabel> label_;
  std::string name_;
};

namespace detail {

struct ConjugationCache {
  std::mutex mu;
  std::map<std::string, std::shared_ptr<const std::vector<PhasedWeyl>>> tables;
};

inline ConjugationCache& conjugation_cache() {
  static ConjugationCache cache;
  return cache;
}

inline std::vector<PhasedWeyl> build_generator_table(const Matrix& u, int d, int arity) {
  std::vector<PhasedWeyl> out;
  for (int i = 0; i < arity; ++i) {
    for (int gen = 0; gen < 2; ++gen) {
      WeylLabel l = WeylLabel::identity(d, arity);
      (gen == 0 ? l.p : l.q)[static_cast<std::size_t>(i)] = 1;
      const Matrix img = u * weyl_matrix(l) * u.adjoint();
      auto pw = identify_phased_weyl(img, d, arity);
      if (!pw) throw NormalizerViolation("gate does not normalize the Weyl group (generator " + l.str() + ")");
      // Z and X carry no intrinsic phase, so the generator is exactly W_l.
      out.push_back(*pw);
    }
  }
  return out;
}

}  // namespace detail

inline const std::vector<PhasedWeyl>& CliffordGate::table() const {
  auto& cache = detail::conjugation_cache();
  const std::string key = cache_key();
  {
    std::lock_guard lock(cache.mu);
    auto it = cache.tables.find(key);
    if (it != cache.tables.end()) return *it->second;
  }
  auto built = std::make_shared<const std::vector<PhasedWeyl>>(detail::build_generator_table(matrix_, d_, arity_));
  std::lock_guard lock(cache.mu);
  auto [it, inserted] = cache.tables.emplace(key, std::move(built));
  return *it->second;
}

/// U W U^dagger as a PhasedWeyl, assembled from the cached generator images.
inline PhasedWeyl clifford_conjugate(const CliffordGate& g, const PhasedWeyl& w) {
  if (w.label.d != g.d() || w.label.n() != g.arity())
    throw DimensionError("clifford_conjugate: Weyl operator does not match gate support");
  const auto& tab = g.table();
  const int d = g.d();
  const int k = g.arity();
  // W_{p,q} = t^{c} prod_i Z_i^{p_i} X_i^{q_i}
  long long intrinsic = w.phase_exp;
  for (int i = 0; i < k; ++i)
    intrinsic += weyl_intrinsic_phase(d, w.label.p[static_cast<std::size_t>(i)], w.label.q[static_cast<std::size_t>(i)]);
  PhasedWeyl acc(WeylLabel::identity(d, k), static_cast<int>(mod(intrinsic, 2LL * d)));
  for (int i = 0; i < k; ++i) {
    const auto& zi = tab[static_cast<std::size_t>(2 * i)];
    const auto& xi = tab[static_cast<std::size_t>(2 * i + 1)];
    for (int r = 0; r < w.label.p[static_cast<std::size_t>(i)]; ++r) acc = weyl_compose(acc, zi);
    for (int r = 0; r < w.label.q[static_cast<std::size_t>(i)]; ++r) acc = weyl_compose(acc, xi);
  }
  return acc;
}

}  // namespace qdm
