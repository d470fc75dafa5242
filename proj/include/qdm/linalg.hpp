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

// Dense linear algebra on small qudit registers.
//
// Basis convention: a register of n qudits of dimension d has composite index
//   s = s_0 * d^(n-1) + s_1 * d^(n-2) + ... + s_(n-1),
// i.e. qudit 0 is the most significant digit. Every module relies on this.

#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "qdm/errors.hpp"

namespace qdm {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;

inline constexpr std::size_t kMaxDim = 4096;
inline constexpr double kHermitianTol = 1e-10;
inline constexpr double kTraceTol = 1e-10;
inline constexpr double kPsdTol = 1e-9;
inline constexpr double kUnitaryTol = 1e-10;
inline constexpr double kTracePreservingTol = 1e-9;
inline constexpr double kDistributionTol = 1e-9;

/// e^{2 pi i k / d}
inline Complex root_of_unity(int d, long long k) {
  const long long r = ((k % d) + d) % d;
  const double a = 2.0 * std::numbers::pi * static_cast<double>(r) / d;
  return {std::cos(a), std::sin(a)};
}

inline std::size_t ipow(std::size_t base, std::size_t exp) {
  std::size_t r = 1;
  while (exp-- > 0) r *= base;
  return r;
}

/// Number of qudits n with d^n == dim, or throws.
inline int qudit_count(std::size_t dim, int d) {
  int n = 0;
  std::size_t v = 1;
  while (v < dim) {
    v *= static_cast<std::size_t>(d);
    ++n;
  }
  if (v != dim) throw DimensionError("dimension " + std::to_string(dim) + " is not a power of " + std::to_string(d));
  return n;
}

inline void check_capacity(std::size_t dim) {
  if (dim > kMaxDim)
    throw CapacityError("Hilbert space dimension " + std::to_string(dim) + " exceeds maximum " +
                        std::to_string(kMaxDim));
}

inline void require_square(const Matrix& m, const char* what) {
  if (m.rows() != m.cols()) throw DimensionError(std::string(what) + ": matrix is not square");
}

/// Kronecker product a (x) b; a supplies the most significant index digits.
inline Matrix kron(const Matrix& a, const Matrix& b) {
  require_square(a, "kron");
  require_square(b, "kron");
  check_capacity(static_cast<std::size_t>(a.rows()) * static_cast<std::size_t>(b.rows()));
  return Eigen::kroneckerProduct(a, b).eval();
}

inline Matrix kron_all(std::span<const Matrix> factors) {
  Matrix out = Matrix::Identity(1, 1);
  for (const auto& f : factors) out = kron(out, f);
  return out;
}

inline double hermiticity_residual(const Matrix& m) { return (m - m.adjoint()).norm(); }

/// Smallest eigenvalue of the Hermitian part of m.
inline double min_eigenvalue(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.adjoint()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

// ---------------------------------------------------------------------------
// Local operator application
// ---------------------------------------------------------------------------

/// Offsets that decompose a register index into (target digits, rest digits).
/// `target[l]` is the contribution of local index l (targets[0] most
/// significant); `rest[r]` enumerates every assignment of the other qudits.
struct LocalIndex {
  std::vector<std::size_t> target;
  std::vector<std::size_t> rest;

  LocalIndex(int n, int d, std::span<const int> targets) {
    std::vector<std::size_t> stride(static_cast<std::size_t>(n));
    for (int q = 0; q < n; ++q) stride[q] = ipow(static_cast<std::size_t>(d), static_cast<std::size_t>(n - 1 - q));
    std::vector<bool> is_target(static_cast<std::size_t>(n), false);
    for (int t : targets) {
      if (t < 0 || t >= n) throw DimensionError("qudit index " + std::to_string(t) + " out of range");
      if (is_target[t]) throw DimensionError("repeated qudit index " + std::to_string(t));
      is_target[t] = true;
    }
    target = offsets(d, targets, stride);
    std::vector<int> others;
    for (int q = 0; q < n; ++q)
      if (!is_target[q]) others.push_back(q);
    rest = offsets(d, others, stride);
  }

 private:
  static std::vector<std::size_t> offsets(int d, std::span<const int> qs, const std::vector<std::size_t>& stride) {
    std::vector<std::size_t> out{0};
    for (int q : qs) {
      std::vector<std::size_t> next;
      next.reserve(out.size() * static_cast<std::size_t>(d));
      for (auto o : out)
        for (int v = 0; v < d; ++v) next.push_back(o + static_cast<std::size_t>(v) * stride[q]);
      out = std::move(next);
    }
    return out;
  }
};

/// m <- (op on targets) * m
inline void apply_left(Matrix& m, const Matrix& op, const LocalIndex& idx) {
  const auto k = idx.target.size();
  std::vector<Complex> in(k), out(k);
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    for (auto r0 : idx.rest) {
      for (std::size_t a = 0; a < k; ++a) in[a] = m(static_cast<Eigen::Index>(r0 + idx.target[a]), c);
      for (std::size_t a = 0; a < k; ++a) {
        Complex acc = 0;
        for (std::size_t b = 0; b < k; ++b) acc += op(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) * in[b];
        out[a] = acc;
      }
      for (std::size_t a = 0; a < k; ++a) m(static_cast<Eigen::Index>(r0 + idx.target[a]), c) = out[a];
    }
  }
}

/// m <- m * (op on targets)^dagger
inline void apply_right_adjoint(Matrix& m, const Matrix& op, const LocalIndex& idx) {
  const auto k = idx.target.size();
  std::vector<Complex> in(k), out(k);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (auto c0 : idx.rest) {
      for (std::size_t a = 0; a < k; ++a) in[a] = m(r, static_cast<Eigen::Index>(c0 + idx.target[a]));
      for (std::size_t a = 0; a < k; ++a) {
        Complex acc = 0;
        for (std::size_t b = 0; b < k; ++b)
          acc += std::conj(op(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b))) * in[b];
        out[a] = acc;
      }
      for (std::size_t a = 0; a < k; ++a) m(r, static_cast<Eigen::Index>(c0 + idx.target[a])) = out[a];
    }
  }
}

/// rho <- U rho U^dagger with U acting on `targets`.
inline void apply_unitary_local(Matrix& rho, const Matrix& u, int n, int d, std::span<const int> targets) {
  const LocalIndex idx(n, d, targets);
  if (static_cast<std::size_t>(u.rows()) != idx.target.size())
    throw DimensionError("local operator dimension does not match target qudits");
  apply_left(rho, u, idx);
  apply_right_adjoint(rho, u, idx);
}

/// rho <- S(rho) where S is a superoperator on `targets` in row-major vec
/// convention: vec(X)[a*k + b] = X(a, b).
inline void apply_superop_local(Matrix& rho, const Matrix& superop, int n, int d, std::span<const int> targets) {
  const LocalIndex idx(n, d, targets);
  const auto k = idx.target.size();
  if (static_cast<std::size_t>(superop.rows()) != k * k)
    throw DimensionError("superoperator dimension does not match target qudits");
  Vector in(static_cast<Eigen::Index>(k * k)), out(static_cast<Eigen::Index>(k * k));
  for (auto r0 : idx.rest) {
    for (auto c0 : idx.rest) {
      for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = 0; b < k; ++b)
          in(static_cast<Eigen::Index>(a * k + b)) =
              rho(static_cast<Eigen::Index>(r0 + idx.target[a]), static_cast<Eigen::Index>(c0 + idx.target[b]));
      out.noalias() = superop * in;
      for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = 0; b < k; ++b)
          rho(static_cast<Eigen::Index>(r0 + idx.target[a]), static_cast<Eigen::Index>(c0 + idx.target[b])) =
              out(static_cast<Eigen::Index>(a * k + b));
    }
  }
}

// ---------------------------------------------------------------------------
// Value types
// ---------------------------------------------------------------------------

/// A validated density matrix: Hermitian, unit trace, positive semidefinite.
class DensityMatrix {
 public:
  explicit DensityMatrix(Matrix data) : data_(std::move(data)) {
    require_square(data_, "DensityMatrix");
    check_capacity(static_cast<std::size_t>(data_.rows()));
    const double herm = hermiticity_residual(data_);
    if (herm > kHermitianTol) throw InvariantViolation("density matrix not Hermitian (residual " + std::to_string(herm) + ")");
    const Complex tr = data_.trace();
    if (std::abs(tr - Complex(1.0, 0.0)) > kTraceTol)
      throw InvariantViolation("density matrix trace " + std::to_string(tr.real()) + " != 1");
    const double lo = min_eigenvalue(data_);
    if (lo < -kPsdTol) throw InvariantViolation("density matrix has eigenvalue " + std::to_string(lo));
  }

  static DensityMatrix pure(const Vector& psi) {
    const double nrm = psi.norm();
    if (nrm == 0.0) throw DomainError("zero state vector");
    Vector v = psi / nrm;
    return DensityMatrix(v * v.adjoint());
  }

  /// |index><index| on a register of dimension dim.
  static DensityMatrix basis(std::size_t dim, std::size_t index) {
    if (index >= dim) throw DimensionError("basis index out of range");
    Matrix m = Matrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    m(static_cast<Eigen::Index>(index), static_cast<Eigen::Index>(index)) = 1.0;
    return DensityMatrix(std::move(m));
  }

  static DensityMatrix maximally_mixed(std::size_t dim) {
    return DensityMatrix(Matrix::Identity(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim)) /
                         static_cast<double>(dim));
  }

  std::size_t dim() const { return static_cast<std::size_t>(data_.rows()); }
  const Matrix& data() const { return data_; }

 private:
  Matrix data_;
};

/// A validated unitary: U^dagger U = I within kUnitaryTol (Frobenius norm).
class UnitaryMatrix {
 public:
  explicit UnitaryMatrix(Matrix data) : data_(std::move(data)) {
    require_square(data_, "UnitaryMatrix");
    const auto n = data_.rows();
    const double res = (data_.adjoint() * data_ - Matrix::Identity(n, n)).norm();
    if (res > kUnitaryTol) throw InvariantViolation("matrix is not unitary (residual " + std::to_string(res) + ")");
  }
  static UnitaryMatrix identity(std::size_t dim) {
    return UnitaryMatrix(Matrix::Identity(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim)));
  }
  std::size_t dim() const { return static_cast<std::size_t>(data_.rows()); }
  const Matrix& data() const { return data_; }

 private:
  Matrix data_;
};

/// Superoperator of a Kraus list in row-major vec convention.
inline Matrix kraus_superoperator(std::span<const Matrix> kraus) {
  const auto dim = kraus.front().rows();
  Matrix s = Matrix::Zero(dim * dim, dim * dim);
  for (const auto& k : kraus) s += Eigen::kroneckerProduct(k, k.conjugate()).eval();
  return s;
}

/// Choi matrix J = sum_{ij} |i><j| (x) E(|i><j|).
inline Matrix kraus_choi(std::span<const Matrix> kraus) {
  const auto dim = kraus.front().rows();
  Matrix j = Matrix::Zero(dim * dim, dim * dim);
  for (const auto& k : kraus) {
    // column vector v_{(i,a)} = K(a,i)
    Vector v(dim * dim);
    for (Eigen::Index i = 0; i < dim; ++i)
      for (Eigen::Index a = 0; a < dim; ++a) v(i * dim + a) = k(a, i);
    j += v * v.adjoint();
  }
  return j;
}

/// CPTP map stored as a Kraus list.
class QuantumChannel {
 public:
  explicit QuantumChannel(std::vector<Matrix> kraus) : kraus_(std::move(kraus)) {
    if (kraus_.empty()) throw DomainError("channel needs at least one Kraus operator");
    const auto dim = kraus_.front().rows();
    Matrix sum = Matrix::Zero(dim, dim);
    for (const auto& k : kraus_) {
      if (k.rows() != dim || k.cols() != dim) throw DimensionError("Kraus operators must share one square shape");
      sum += k.adjoint() * k;
    }
    const double res = (sum - Matrix::Identity(dim, dim)).norm();
    if (res > kTracePreservingTol)
      throw InvariantViolation("channel is not trace preserving (residual " + std::to_string(res) + ")");
  }

  static QuantumChannel identity(std::size_t dim) {
    return QuantumChannel({Matrix::Identity(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim))});
  }
  static QuantumChannel unitary(const Matrix& u) { return QuantumChannel({UnitaryMatrix(u).data()}); }

  /// Kraus form of a superoperator via eigendecomposition of its Choi matrix.
  /// Eigenvalues below `cutoff` (relative to the largest) are discarded.
  static QuantumChannel from_superoperator(const Matrix& s, double cutoff = 1e-13) {
    const auto d2 = s.rows();
    const auto dim = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(d2))));
    if (dim * dim != d2 || s.cols() != d2) throw DimensionError("superoperator is not d^2 x d^2");
    // J_{(i,a),(j,b)} = S_{(a,b),(i,j)}
    Matrix j(d2, d2);
    for (Eigen::Index i = 0; i < dim; ++i)
      for (Eigen::Index a = 0; a < dim; ++a)
        for (Eigen::Index jj = 0; jj < dim; ++jj)
          for (Eigen::Index b = 0; b < dim; ++b) j(i * dim + a, jj * dim + b) = s(a * dim + b, i * dim + jj);
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (j + j.adjoint()));
    const auto& ev = es.eigenvalues();
    const double top = ev.maxCoeff();
    if (ev.minCoeff() < -1e-9 * std::max(1.0, top))
      throw InvariantViolation("superoperator is not completely positive");
    std::vector<Matrix> kraus;
    for (Eigen::Index e = d2 - 1; e >= 0; --e) {
      if (ev(e) <= cutoff * top) continue;
      const Vector v = es.eigenvectors().col(e) * std::sqrt(ev(e));
      Matrix k(dim, dim);
      for (Eigen::Index i = 0; i < dim; ++i)
        for (Eigen::Index a = 0; a < dim; ++a) k(a, i) = v(i * dim + a);
      kraus.push_back(std::move(k));
    }
    return QuantumChannel(std::move(kraus));
  }

  std::size_t dim() const { return static_cast<std::size_t>(kraus_.front().rows()); }
  const std::vector<Matrix>& kraus() const { return kraus_; }

  Matrix superoperator() const { return kraus_superoperator(kraus_); }
  Matrix choi() const { return kraus_choi(kraus_); }

  bool is_completely_positive(double tol = kPsdTol) const { return min_eigenvalue(choi()) >= -tol; }

  /// `after` applied to the output of *this.
  QuantumChannel then(const QuantumChannel& after) const {
    if (after.dim() != dim()) throw DimensionError("channel composition: dimension mismatch");
    std::vector<Matrix> out;
    out.reserve(kraus_.size() * after.kraus_.size());
    for (const auto& b : after.kraus_)
      for (const auto& a : kraus_) out.push_back(b * a);
    return QuantumChannel(std::move(out)).compressed();
  }

  /// Minimal Kraus representation (Choi rank); no-op for single-Kraus channels.
  QuantumChannel compressed() const {
    if (kraus_.size() <= 1 || kraus_.size() <= dim()) return *this;
    return from_superoperator(superoperator());
  }

 private:
  std::vector<Matrix> kraus_;
};

/// sum_k K rho K^dagger
inline DensityMatrix apply_channel(const QuantumChannel& ch, const DensityMatrix& rho) {
  if (ch.dim() != rho.dim()) throw DimensionError("apply_channel: channel and state dimensions differ");
  Matrix out = Matrix::Zero(rho.data().rows(), rho.data().cols());
  for (const auto& k : ch.kraus()) out += k * rho.data() * k.adjoint();
  return DensityMatrix(std::move(out));
}

/// Tr(O rho)
inline Complex expectation(const Matrix& obs, const DensityMatrix& rho) {
  if (static_cast<std::size_t>(obs.rows()) != rho.dim() || obs.cols() != obs.rows())
    throw DimensionError("expectation: observable and state dimensions differ");
  return (obs.cwiseProduct(rho.data().transpose())).sum();
}

// ---------------------------------------------------------------------------
// Outcome distributions
// ---------------------------------------------------------------------------

/// Probability vector over the d^n computational outcomes. `quasi` marks
/// vectors that may carry negative entries (after confusion inversion or
/// extrapolation).
struct OutcomeDistribution {
  int n = 0;
  int d = 0;
  std::vector<double> probs;
  bool quasi = false;

  OutcomeDistribution() = default;
  OutcomeDistribution(int n_, int d_, std::vector<double> p, bool quasi_ = false)
      : n(n_), d(d_), probs(std::move(p)), quasi(quasi_) {
    if (probs.size() != ipow(static_cast<std::size_t>(d), static_cast<std::size_t>(n)))
      throw DimensionError("distribution length does not equal d^n");
    double s = 0;
    for (double v : probs) {
      if (!std::isfinite(v)) throw DomainError("distribution has non-finite entry");
      if (!quasi && v < 0) throw DomainError("negative probability in a non-quasi distribution");
      s += v;
    }
    if (std::abs(s - 1.0) > kDistributionTol) throw DomainError("distribution sums to " + std::to_string(s));
  }

  std::size_t size() const { return probs.size(); }

  /// Diagonal of rho; round-off negatives above -1e-12 are set to zero.
  static OutcomeDistribution from_state(const Matrix& rho, int n, int d) {
    std::vector<double> p(static_cast<std::size_t>(rho.rows()));
    for (Eigen::Index i = 0; i < rho.rows(); ++i) {
      double v = rho(i, i).real();
      if (v < 0 && v > -1e-12) v = 0;
      p[static_cast<std::size_t>(i)] = v;
    }
    return OutcomeDistribution(n, d, std::move(p));
  }

  /// Frequencies from a count vector.
  static OutcomeDistribution from_counts(std::span<const std::uint64_t> counts, int n, int d) {
    std::uint64_t total = 0;
    for (auto c : counts) total += c;
    if (total == 0) throw DomainError("empty count vector");
    std::vector<double> p(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i) p[i] = static_cast<double>(counts[i]) / static_cast<double>(total);
    return OutcomeDistribution(n, d, std::move(p));
  }

  /// Negative entries clipped to zero and the rest renormalized.
  OutcomeDistribution clipped() const {
    std::vector<double> p(probs);
    double s = 0;
    for (auto& v : p) {
      v = std::max(v, 0.0);
      s += v;
    }
    if (s <= 0) throw DomainError("cannot clip an all-nonpositive quasi distribution");
    for (auto& v : p) v /= s;
    return OutcomeDistribution(n, d, std::move(p));
  }

  bool has_negative() const {
    for (double v : probs)
      if (v < 0) return true;
    return false;
  }
};

/// Multinomial sample of `shots` draws. Deterministic for a fixed seed.
inline std::vector<std::uint64_t> sample_counts(const OutcomeDistribution& dist, std::uint64_t shots,
                                                std::uint64_t seed) {
  if (dist.quasi && dist.has_negative())
    throw DomainError("sample_counts: quasi-distribution must be clipped before sampling");
  if (shots == 0) throw DomainError("sample_counts: shots must be positive");
  std::mt19937_64 rng(seed);
  std::vector<std::uint64_t> counts(dist.size(), 0);
  std::size_t last = 0;
  for (std::size_t i = 0; i < dist.size(); ++i)
    if (dist.probs[i] > 0) last = i;
  std::uint64_t remaining = shots;
  double mass = 1.0;
  for (std::size_t i = 0; i < last && remaining > 0; ++i) {
    const double p = dist.probs[i];
    if (p <= 0) continue;
    const double cond = mass > 0 ? std::clamp(p / mass, 0.0, 1.0) : 1.0;
    std::binomial_distribution<std::uint64_t> bin(remaining, cond);
    const auto c = bin(rng);
    counts[i] = c;
    remaining -= c;
    mass -= p;
  }
  counts[last] += remaining;
  return counts;
}

}  // namespace qdm
