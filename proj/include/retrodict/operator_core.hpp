// Copyright (c) 2026 The retrodict developers.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>

#include "retrodict/errors.hpp"
#include "retrodict/rng.hpp"

namespace retrodict {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

/// Hard cap on operator dimension; everything here is dense.
inline constexpr Eigen::Index kMaxDimension = 64;

/// Numerical thresholds used throughout the library. Absolute unless noted.
struct Tolerances {
  /// Max-entry Hermiticity defect accepted by operator validation.
  double hermitian = 1e-10;
  /// Positive semidefiniteness: smallest eigenvalue may reach
  /// -psd * max(1, spectral norm).
  double psd = 1e-9;
  /// Max-entry defect of U^dagger U from the identity.
  double unitary = 1e-10;
  /// Proportionality to the identity, relative to the largest entry.
  double proportionality = 1e-9;
  /// Degenerate probability denominators, relative to the natural scale of
  /// the quantity being normalized.
  double denominator = 1e-12;
};

namespace detail {

inline bool entry_finite(const Complex& z) {
  return std::isfinite(z.real()) && std::isfinite(z.imag());
}

inline void check_square(const Matrix& m) {
  if (m.rows() != m.cols())
    throw InvalidMatrix("matrix is " + std::to_string(m.rows()) + "x" +
                        std::to_string(m.cols()) + ", expected square");
  if (m.rows() < 1) throw InvalidMatrix("matrix is empty");
  if (m.rows() > kMaxDimension)
    throw InvalidMatrix("dimension " + std::to_string(m.rows()) +
                        " exceeds the supported maximum of " +
                        std::to_string(kMaxDimension));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      if (!entry_finite(m(r, c)))
        throw InvalidMatrix("matrix has a non-finite entry at (" +
                            std::to_string(r) + "," + std::to_string(c) + ")");
}

}  // namespace detail

/// A validated Hermitian matrix. Construction symmetrizes the input to
/// (A + A^dagger) / 2, so the stored matrix is Hermitian exactly; the
/// original defect is kept for reporting.
class HermitianOperator {
 public:
  /// Accepts matrices whose max-entry distance from their own adjoint is at
  /// most `tol.hermitian`; throws NotHermitian otherwise.
  static HermitianOperator validate(const Matrix& m,
                                    const Tolerances& tol = {}) {
    detail::check_square(m);
    const double defect = (m - m.adjoint().eval()).cwiseAbs().maxCoeff();
    if (defect > tol.hermitian) throw NotHermitian(defect);
    Matrix sym = (m + m.adjoint().eval()) / 2.0;
    return HermitianOperator(std::move(sym), defect);
  }

  const Matrix& matrix() const noexcept { return mat_; }
  Eigen::Index dim() const noexcept { return mat_.rows(); }
  /// Max-entry defect of the matrix as supplied, before symmetrization.
  double hermiticity_defect() const noexcept { return defect_; }

 private:
  HermitianOperator(Matrix m, double defect)
      : mat_(std::move(m)), defect_(defect) {}

  Matrix mat_;
  double defect_;
};

/// A validated unitary matrix.
class UnitaryMap {
 public:
  static UnitaryMap validate(const Matrix& m, const Tolerances& tol = {}) {
    detail::check_square(m);
    const Matrix gram = m.adjoint() * m;
    const double defect =
        (gram - Matrix::Identity(m.rows(), m.cols())).cwiseAbs().maxCoeff();
    if (defect > tol.unitary) throw NotUnitary(defect);
    return UnitaryMap(m, defect);
  }

  UnitaryMap adjoint(const Tolerances& tol = {}) const {
    return validate(mat_.adjoint(), tol);
  }

  const Matrix& matrix() const noexcept { return mat_; }
  Eigen::Index dim() const noexcept { return mat_.rows(); }
  double unitarity_defect() const noexcept { return defect_; }

 private:
  UnitaryMap(Matrix m, double defect) : mat_(std::move(m)), defect_(defect) {}

  Matrix mat_;
  double defect_;
};

/// Trace of a Hermitian operator; real by construction.
inline double trace(const HermitianOperator& a) {
  return a.matrix().trace().real();
}

/// Eigenvalues in ascending order.
inline Eigen::VectorXd eigenvalues_of(const HermitianOperator& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(a.matrix(),
                                               Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw EigenFailure();
  return solver.eigenvalues();
}

/// Smallest eigenvalue; the caller compares it against its own threshold.
inline double psd_check(const HermitianOperator& a) {
  return eigenvalues_of(a)(0);
}

/// Largest absolute eigenvalue.
inline double spectral_norm(const HermitianOperator& a) {
  const Eigen::VectorXd ev = eigenvalues_of(a);
  return std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
}

/// True when the smallest eigenvalue is no lower than
/// -tol.psd * max(1, spectral norm).
inline bool is_psd(const HermitianOperator& a, const Tolerances& tol = {}) {
  const Eigen::VectorXd ev = eigenvalues_of(a);
  const double norm = std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
  return ev(0) >= -tol.psd * std::max(1.0, norm);
}

/// Throws NotPsd carrying `label` when `a` fails the is_psd test.
inline void require_psd(const HermitianOperator& a, const std::string& label,
                        const Tolerances& tol = {}) {
  const Eigen::VectorXd ev = eigenvalues_of(a);
  const double norm = std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
  if (ev(0) < -tol.psd * std::max(1.0, norm)) throw NotPsd(label, ev(0));
}

/// Tr(A B) for Hermitian A, B. Real in exact arithmetic; an imaginary
/// residue beyond rounding noise signals internal corruption.
inline double trace_pair(const HermitianOperator& a, const HermitianOperator& b,
                         const Tolerances& tol = {}) {
  if (a.dim() != b.dim())
    throw DimensionMismatch("trace of a product needs equal dimensions, got " +
                            std::to_string(a.dim()) + " and " +
                            std::to_string(b.dim()));
  // Tr(A B) = sum_{r,c} A_{rc} B_{cr} = sum_{r,c} A_{rc} conj(B_{rc}).
  const Complex s = a.matrix().cwiseProduct(b.matrix().conjugate()).sum();
  const double scale =
      a.matrix().cwiseAbs().cwiseProduct(b.matrix().cwiseAbs()).sum();
  if (std::abs(s.imag()) > tol.hermitian * std::max(1.0, scale))
    throw InternalNumericalError(
        "trace of a Hermitian product has imaginary residue " +
        detail::fmt_real(s.imag()));
  return s.real();
}

/// U A U^dagger, validated as Hermitian on the way out.
inline HermitianOperator conjugate_by(const UnitaryMap& u,
                                      const HermitianOperator& a,
                                      const Tolerances& tol = {}) {
  if (u.dim() != a.dim())
    throw DimensionMismatch("conjugation needs equal dimensions, got " +
                            std::to_string(u.dim()) + " and " +
                            std::to_string(a.dim()));
  return HermitianOperator::validate(u.matrix() * a.matrix() *
                                         u.matrix().adjoint(),
                                     tol);
}

/// When `a` is within tolerance of g * identity, returns g = trace(a)/dim;
/// otherwise nullopt. The comparison is relative to max(1, largest entry).
inline std::optional<double> proportionality_to_identity(
    const HermitianOperator& a, const Tolerances& tol = {}) {
  const Eigen::Index d = a.dim();
  const double g = trace(a) / static_cast<double>(d);
  const double dev =
      (a.matrix() - g * Matrix::Identity(d, d)).cwiseAbs().maxCoeff();
  const double scale = std::max(1.0, a.matrix().cwiseAbs().maxCoeff());
  if (dev <= tol.proportionality * scale) return g;
  return std::nullopt;
}

/// Max-entry distance of `a` from (trace(a)/dim) * identity.
inline double identity_deviation(const HermitianOperator& a) {
  const Eigen::Index d = a.dim();
  const double g = trace(a) / static_cast<double>(d);
  return (a.matrix() - g * Matrix::Identity(d, d)).cwiseAbs().maxCoeff();
}

namespace detail {

inline Matrix gaussian_matrix(Eigen::Index dim, std::uint64_t seed) {
  if (dim < 1 || dim > kMaxDimension)
    throw InvalidMatrix("dimension " + std::to_string(dim) +
                        " outside the supported range [1, " +
                        std::to_string(kMaxDimension) + "]");
  SplitMix64 rng(seed);
  Matrix g(dim, dim);
  for (Eigen::Index r = 0; r < dim; ++r)
    for (Eigen::Index c = 0; c < dim; ++c) {
      const double re = rng.next_normal();
      const double im = rng.next_normal();
      g(r, c) = Complex(re, im);
    }
  return g;
}

}  // namespace detail

/// Random positive-semidefinite operator with unit trace, deterministic in
/// (dim, seed): G^dagger G / Tr(G^dagger G) for a complex Gaussian G.
inline HermitianOperator random_psd(Eigen::Index dim, std::uint64_t seed) {
  const Matrix g = detail::gaussian_matrix(dim, seed);
  Matrix p = g.adjoint() * g;
  p /= p.trace().real();
  return HermitianOperator::validate(p);
}

/// Haar-distributed random unitary, deterministic in (dim, seed): QR of a
/// complex Gaussian with the R diagonal's phases folded into Q.
inline UnitaryMap random_unitary(Eigen::Index dim, std::uint64_t seed) {
  const Matrix g = detail::gaussian_matrix(dim, seed);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().template triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < dim; ++j) {
    const Complex rjj = r(j, j);
    const double mag = std::abs(rjj);
    q.col(j) *= mag > 0.0 ? rjj / mag : Complex(1.0, 0.0);
  }
  return UnitaryMap::validate(q);
}

}  // namespace retrodict
