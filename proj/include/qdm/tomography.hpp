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

// State tomography in Weyl eigenbases, fidelities, McWeeny purification and
// transfer-matrix analytics.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Eigenvalues>

#include "qdm/linalg.hpp"
#include "qdm/noise.hpp"
#include "qdm/simulate.hpp"
#include "qdm/weyl.hpp"

namespace qdm {

// ---------------------------------------------------------------------------
// Settings and expectation estimation
// ---------------------------------------------------------------------------

/// One measurement setting: qudit i is read out in the eigenbasis of
/// labels[i]. The rotation suffix is V_i^dagger on each qudit.
struct TomographySetting {
  std::vector<WeylLabel> labels;
  std::size_t index = 0;

  std::vector<Matrix> rotations() const {
    std::vector<Matrix> out;
    for (const auto& l : labels) out.push_back(weyl_eigenbasis(l).adjoint());
    return out;
  }
  std::string str() const {
    std::string s;
    for (const auto& l : labels) s += l.str();
    return s;
  }
};

inline constexpr std::size_t kMaxTomographySettings = 6561;

/// All d^{2n} tuples of single-qudit labels, identity included.
inline std::vector<TomographySetting> tomo_settings(int n, int d) {
  if (n < 1 || d < 2) throw DomainError("tomo_settings: need n >= 1 and d >= 2");
  const std::size_t total = WeylLabel::count(d, n);
  if (total > kMaxTomographySettings) throw CapacityError("tomo_settings: d^{2n} exceeds 6561");
  std::vector<TomographySetting> out;
  out.reserve(total);
  for (std::size_t i = 0; i < total; ++i) {
    const auto full = WeylLabel::from_index(d, n, i);
    TomographySetting s;
    s.index = i;
    for (int q = 0; q < n; ++q) s.labels.push_back(full.local(q));
    out.push_back(std::move(s));
  }
  return out;
}

/// Computational-basis distribution after rotating `rho` into the setting's
/// eigenbases. Readout confusion and sampling as in measure_state; the
/// rotation itself is noiseless. `correction` (if nonempty) is inverted.
inline OutcomeDistribution setting_distribution(const Matrix& rho, int n, int d, const TomographySetting& s,
                                                const NoiseModel* noise, std::uint64_t shots, std::uint64_t seed,
                                                std::span<const ConfusionMatrix> correction = {}) {
  Matrix r = rho;
  const auto rot = s.rotations();
  for (int q = 0; q < n; ++q) {
    if (s.labels[static_cast<std::size_t>(q)].is_identity()) continue;
    const std::vector<int> t{q};
    apply_unitary_local(r, rot[static_cast<std::size_t>(q)], n, d, t);
  }
  auto m = measure_state(r, n, d, noise, shots, seed);
  return correction.empty() ? m.observed : rcal_correct(m.observed, correction);
}

namespace detail {

/// Eigenvalue of single-qudit W_target on eigenvector k of the measured
/// label, or nullopt if the two do not commute as powers.
inline std::optional<std::vector<Complex>> eigen_values_for(const WeylLabel& measured, const WeylLabel& target) {
  const int d = measured.d;
  std::vector<Complex> vals(static_cast<std::size_t>(d), Complex(1.0, 0.0));
  if (target.is_identity()) return vals;
  if (measured.is_identity()) return std::nullopt;
  for (int m = 1; m < d; ++m) {
    if (mod(static_cast<long long>(m) * measured.p[0], d) != target.p[0] ||
        mod(static_cast<long long>(m) * measured.q[0], d) != target.q[0])
      continue;
    // W_S^m = tau^e W_target
    const auto pw = weyl_power(PhasedWeyl(measured, 0), m);
    for (int k = 0; k < d; ++k)
      vals[static_cast<std::size_t>(k)] = tau_power(d, -static_cast<long long>(pw.phase_exp)) *
                                          root_of_unity(d, static_cast<long long>(k) * m);
    return vals;
  }
  return std::nullopt;
}

}  // namespace detail

/// <W_L> for every n-qudit label from per-setting outcome frequencies
/// (possibly quasi). Each expectation averages every compatible setting:
/// a qudit measured in S contributes to targets S^m and the identity.
inline std::vector<Complex> estimate_weyl_expectations(const std::vector<TomographySetting>& settings,
                                                       const std::vector<std::vector<double>>& freqs, int n, int d) {
  if (settings.size() != freqs.size()) throw DimensionError("estimate_weyl_expectations: one distribution per setting");
  const std::size_t labels = WeylLabel::count(d, n);
  const std::size_t outcomes = ipow(static_cast<std::size_t>(d), static_cast<std::size_t>(n));
  const std::size_t d2 = static_cast<std::size_t>(d) * static_cast<std::size_t>(d);
  std::vector<Complex> sum(labels, Complex(0, 0));
  std::vector<std::size_t> hits(labels, 0);
  for (std::size_t si = 0; si < settings.size(); ++si) {
    const auto& s = settings[si];
    if (freqs[si].size() != outcomes) throw DimensionError("estimate_weyl_expectations: distribution length");
    // table[q][local label index] -> eigenvalues per outcome digit
    std::vector<std::vector<std::optional<std::vector<Complex>>>> table(static_cast<std::size_t>(n));
    for (int q = 0; q < n; ++q)
      for (std::size_t l = 0; l < d2; ++l)
        table[static_cast<std::size_t>(q)].push_back(
            detail::eigen_values_for(s.labels[static_cast<std::size_t>(q)], WeylLabel::from_index(d, 1, l)));
    for (std::size_t li = 0; li < labels; ++li) {
      std::vector<const std::vector<Complex>*> vals(static_cast<std::size_t>(n));
      bool ok = true;
      std::size_t rem = li;
      for (int q = n - 1; q >= 0; --q) {
        const auto& e = table[static_cast<std::size_t>(q)][rem % d2];
        rem /= d2;
        if (!e) {
          ok = false;
          break;
        }
        vals[static_cast<std::size_t>(q)] = &*e;
      }
      if (!ok) continue;
      Complex acc(0, 0);
      for (std::size_t o = 0; o < outcomes; ++o) {
        const double f = freqs[si][o];
        if (f == 0) continue;
        Complex v(1, 0);
        std::size_t r = o;
        for (int q = n - 1; q >= 0; --q) {
          v *= (*vals[static_cast<std::size_t>(q)])[r % static_cast<std::size_t>(d)];
          r /= static_cast<std::size_t>(d);
        }
        acc += f * v;
      }
      sum[li] += acc;
      ++hits[li];
    }
  }
  for (std::size_t li = 0; li < labels; ++li) {
    if (hits[li] == 0) throw DomainError("estimate_weyl_expectations: label " + WeylLabel::from_index(d, n, li).str() + " not covered");
    sum[li] /= static_cast<double>(hits[li]);
  }
  return sum;
}

/// Exact Tr(W_L rho) for every label, indexed by WeylLabel::index().
inline std::vector<Complex> weyl_expectations(const Matrix& rho, int n, int d) {
  std::vector<Complex> out(WeylLabel::count(d, n));
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (weyl_matrix(WeylLabel::from_index(d, n, i)).cwiseProduct(rho.transpose())).sum();
  return out;
}

// ---------------------------------------------------------------------------
// Reconstruction
// ---------------------------------------------------------------------------

enum class PsdProjection { WaterFilling, ClipRenormalize };

/// Nearest unit-trace PSD matrix. WaterFilling subtracts the clipped
/// negative mass evenly from the surviving eigenvalues (Frobenius-nearest);
/// ClipRenormalize zeroes negatives and rescales.
inline Matrix project_psd(const Matrix& m, PsdProjection method = PsdProjection::WaterFilling) {
  const Matrix h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  Eigen::VectorXd lam = es.eigenvalues();  // ascending
  const Eigen::Index dim = lam.size();
  const double tr = lam.sum();
  if (method == PsdProjection::ClipRenormalize) {
    lam = lam.cwiseMax(0.0);
    const double s = lam.sum();
    if (!(s > 0)) throw DomainError("project_psd: no positive eigenvalues");
    lam /= s;
  } else {
    lam /= tr;
    double acc = 0;
    Eigen::Index i = 0;
    for (; i < dim; ++i) {
      const double remaining = static_cast<double>(dim - i);
      if (lam(i) + acc / remaining < 0) {
        acc += lam(i);
        lam(i) = 0;
      } else {
        break;
      }
    }
    for (Eigen::Index j = i; j < dim; ++j) lam(j) += acc / static_cast<double>(dim - i);
  }
  return es.eigenvectors() * lam.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
}

struct Reconstruction {
  Matrix raw;               ///< linear inversion, Hermitian, unit trace, maybe not PSD
  DensityMatrix projected;  ///< after project_psd
};

/// rho = (1/D) sum_L E_L W_L^dagger, then projected.
inline Reconstruction reconstruct(std::span<const Complex> expectations, int n, int d,
                                  PsdProjection method = PsdProjection::WaterFilling) {
  const std::size_t labels = WeylLabel::count(d, n);
  if (expectations.size() != labels) throw DomainError("reconstruct: incomplete expectation set");
  if (std::abs(expectations[0] - 1.0) > 1e-9) throw DomainError("reconstruct: identity expectation must equal 1");
  const auto dim = static_cast<Eigen::Index>(ipow(static_cast<std::size_t>(d), static_cast<std::size_t>(n)));
  Matrix raw = Matrix::Zero(dim, dim);
  for (std::size_t i = 0; i < labels; ++i) {
    if (expectations[i] == Complex(0, 0)) continue;
    raw += expectations[i] * weyl_matrix(WeylLabel::from_index(d, n, i)).adjoint();
  }
  raw /= static_cast<double>(dim);
  raw = 0.5 * (raw + raw.adjoint()).eval();
  return {raw, DensityMatrix(project_psd(raw, method))};
}

// ---------------------------------------------------------------------------
// Fidelities and purification
// ---------------------------------------------------------------------------

/// Tr(sqrt(sigma) rho sqrt(sigma)) = Tr(sigma rho). For pure sigma this is the
/// overlap <psi|rho|psi>.
inline double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
  if (rho.dim() != sigma.dim()) throw DimensionError("fidelity: dimension mismatch");
  return (sigma.data().cwiseProduct(rho.data().transpose())).sum().real();
}

inline Matrix psd_sqrt(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.adjoint()));
  const Eigen::VectorXd s = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * s.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
}

/// (Tr sqrt(sqrt(sigma) rho sqrt(sigma)))^2, symmetric in its arguments.
inline double uhlmann_fidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
  if (rho.dim() != sigma.dim()) throw DimensionError("uhlmann_fidelity: dimension mismatch");
  const Matrix s = psd_sqrt(sigma.data());
  Eigen::SelfAdjointEigenSolver<Matrix> es(s * rho.data() * s);
  const double t = es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
  return t * t;
}

struct Purification {
  Matrix rho;                      ///< final iterate
  std::vector<double> residuals;   ///< ||rho_k^2 - rho_k||_F after each step
  double residual() const { return residuals.empty() ? 0.0 : residuals.back(); }
  /// Final iterate divided by its trace.
  DensityMatrix normalized() const {
    const double tr = rho.trace().real();
    if (!(tr > 0)) throw DomainError("purification collapsed to zero trace");
    Matrix m = rho / tr;
    m = 0.5 * (m + m.adjoint()).eval();
    return DensityMatrix(m);
  }
};

/// McWeeny iteration rho <- 3 rho^2 - 2 rho^3.
inline Purification purify(const Matrix& rho, int steps = 20) {
  if (steps < 0) throw DomainError("purify: negative step count");
  Purification out{rho, {}};
  for (int k = 0; k < steps; ++k) {
    const Matrix r2 = out.rho * out.rho;
    out.rho = 3.0 * r2 - 2.0 * r2 * out.rho;
    out.rho = 0.5 * (out.rho + out.rho.adjoint()).eval();
    out.residuals.push_back((out.rho * out.rho - out.rho).norm());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Transfer matrices
// ---------------------------------------------------------------------------

/// R_ij = Tr(B_i^dagger ch(B_j)) over B_k = W_k / sqrt(D), k = WeylLabel::index().
struct TransferMatrix {
  int d = 0;
  int n = 0;
  Matrix r;

  Eigen::Index size() const { return r.rows(); }
  double offdiagonal_mass() const {
    Matrix off = r;
    off.diagonal().setZero();
    return off.norm();
  }
};

/// Columns are row-major vec(B_k).
inline Matrix weyl_vec_basis(int d, int n) {
  const std::size_t count = WeylLabel::count(d, n);
  const auto dim = static_cast<Eigen::Index>(ipow(static_cast<std::size_t>(d), static_cast<std::size_t>(n)));
  Matrix b(dim * dim, static_cast<Eigen::Index>(count));
  for (std::size_t k = 0; k < count; ++k) {
    const Matrix e = weyl_basis_element(WeylLabel::from_index(d, n, k));
    for (Eigen::Index i = 0; i < dim; ++i)
      for (Eigen::Index j = 0; j < dim; ++j) b(i * dim + j, static_cast<Eigen::Index>(k)) = e(i, j);
  }
  return b;
}

inline TransferMatrix transfer_matrix_from_superoperator(const Matrix& s, int d) {
  const auto dim = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(s.rows()))));
  const int n = qudit_count(dim, d);
  const Matrix b = weyl_vec_basis(d, n);
  return {d, n, b.adjoint() * s * b};
}

inline TransferMatrix transfer_matrix(const QuantumChannel& ch, int d) {
  return transfer_matrix_from_superoperator(ch.superoperator(), d);
}

/// Re Tr(R) / D^2
inline double process_fidelity(const TransferMatrix& t) {
  const Complex tr = t.r.trace();
  if (std::abs(tr.imag()) > 1e-10 * static_cast<double>(t.size())) throw InvariantViolation("process_fidelity: complex trace");
  return tr.real() / static_cast<double>(t.size());
}

/// ||R||_F / D
inline double decoherent_fidelity(const TransferMatrix& t) {
  return t.r.norm() / std::sqrt(static_cast<double>(t.size()));
}

/// (F_decoh - F_P) / (1 - F_P). nullopt for an error-free channel; throws
/// when F_P <= 1/2 or F_decoh <= 1/sqrt(2).
inline std::optional<double> coherent_fraction(const TransferMatrix& t) {
  const double fp = process_fidelity(t);
  const double fd = decoherent_fidelity(t);
  if (!(fp > 0.5) || !(fd > 1.0 / std::sqrt(2.0)))
    throw DomainError("coherent_fraction: requires F_P > 1/2 and F_decoh > 1/sqrt(2)");
  if (1.0 - fp < 1e-12) return std::nullopt;
  return (fd - fp) / (1.0 - fp);
}

}  // namespace qdm
