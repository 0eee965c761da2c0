// Copyright 2026 The qcrb Authors
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

// Dense complex matrix kernel. Everything spectral goes through one
// Hermitian eigendecomposition; there are no iterative square roots or
// Pade exponentials in this library.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>

#include "qcrb/config.hpp"
#include "qcrb/errors.hpp"

namespace qcrb {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;

inline constexpr Complex kI{0.0, 1.0};

namespace detail {

inline std::string dims_string(const ComplexMatrix& a) {
  return std::to_string(a.rows()) + "x" + std::to_string(a.cols());
}

inline void require_square(const ComplexMatrix& a, const char* where) {
  if (a.rows() != a.cols() || a.rows() == 0) {
    throw DimensionMismatch(std::string(where) + ": expected a non-empty square matrix, got " +
                            dims_string(a));
  }
}

inline void require_same_dim(const ComplexMatrix& a, const ComplexMatrix& b, const char* where) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionMismatch(std::string(where) + ": " + dims_string(a) + " vs " + dims_string(b));
  }
}

inline void require_finite(const ComplexMatrix& a, const char* where) {
  if (!a.allFinite()) throw NonFinite(std::string(where) + ": matrix has NaN or Inf entries");
}

}  // namespace detail

inline double max_abs_entry(const ComplexMatrix& a) {
  return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
}

inline double hermiticity_defect(const ComplexMatrix& a) {
  return a.size() == 0 ? 0.0 : (a - a.adjoint()).cwiseAbs().maxCoeff();
}

/// Square complex matrix certified Hermitian at construction.
///
/// Inputs whose defect max|A - A^dagger| is within kHermitianTolerance of
/// max(|A_ij|, 1) are symmetrized to (A + A^dagger)/2; anything larger is
/// rejected with NotHermitian. The stored matrix is exactly Hermitian.
class HermitianOperator {
 public:
  explicit HermitianOperator(const ComplexMatrix& m) {
    detail::require_square(m, "HermitianOperator");
    detail::require_finite(m, "HermitianOperator");
    defect_ = qcrb::hermiticity_defect(m);
    const double scale = std::max(max_abs_entry(m), 1.0);
    if (defect_ > kHermitianTolerance * scale) {
      throw NotHermitian("defect " + std::to_string(defect_) + " exceeds tolerance");
    }
    matrix_ = 0.5 * (m + m.adjoint());
  }

  static HermitianOperator identity(Eigen::Index dim) {
    return HermitianOperator(ComplexMatrix::Identity(dim, dim));
  }

  const ComplexMatrix& matrix() const noexcept { return matrix_; }
  Eigen::Index dim() const noexcept { return matrix_.rows(); }
  double hermiticity_defect() const noexcept { return defect_; }

 private:
  ComplexMatrix matrix_;
  double defect_ = 0.0;
};

struct Spectrum {
  RealVector values;     // ascending
  ComplexMatrix vectors;  // columns are eigenvectors
};

inline Spectrum eigensystem(const HermitianOperator& a) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(a.matrix());
  if (solver.info() != Eigen::Success) throw NonFinite("eigensolver did not converge");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

inline double spectral_norm(const HermitianOperator& a) {
  const RealVector ev = eigensystem(a).values;
  return std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
}

/// tr(a^dagger b).
inline Complex hs_inner(const ComplexMatrix& a, const ComplexMatrix& b) {
  detail::require_same_dim(a, b, "hs_inner");
  return a.conjugate().cwiseProduct(b).sum();
}

/// tr(a b) for Hermitian arguments, which is real.
inline double hs_inner(const HermitianOperator& a, const HermitianOperator& b) {
  return hs_inner(a.matrix(), b.matrix()).real();
}

/// tr(a b) for matrices known to be Hermitian. Aborts with ImaginaryResidue
/// when the imaginary part exceeds kImaginaryResidueTolerance relative to
/// ||a||_F ||b||_F (floored at 1).
inline double real_trace_product(const ComplexMatrix& a, const ComplexMatrix& b) {
  detail::require_same_dim(a, b, "real_trace_product");
  const Complex value = a.cwiseProduct(b.transpose()).sum();
  const double scale = std::max(1.0, a.norm() * b.norm());
  if (std::abs(value.imag()) > kImaginaryResidueTolerance * scale) {
    throw ImaginaryResidue("trace product has imaginary part " + std::to_string(value.imag()));
  }
  return value.real();
}

/// Trace of a matrix expected to be Hermitian, same residue contract.
inline double real_trace(const ComplexMatrix& a) {
  const Complex value = a.trace();
  const double scale = std::max(1.0, a.norm());
  if (std::abs(value.imag()) > kImaginaryResidueTolerance * scale) {
    throw ImaginaryResidue("trace has imaginary part " + std::to_string(value.imag()));
  }
  return value.real();
}

inline ComplexMatrix hermitian_part(const ComplexMatrix& a) { return 0.5 * (a + a.adjoint()); }

/// Positive square root through the eigendecomposition. Eigenvalues within
/// kPsdClamp of zero are set to zero, so rank-deficient inputs (pure states)
/// give exact projectors rather than sqrt(roundoff) noise.
inline HermitianOperator matrix_sqrt(const HermitianOperator& a) {
  const Spectrum s = eigensystem(a);
  if (s.values(0) < -kPsdClamp) {
    throw NotPositiveSemidefinite("minimum eigenvalue " + std::to_string(s.values(0)));
  }
  RealVector roots(s.values.size());
  for (Eigen::Index i = 0; i < roots.size(); ++i) {
    roots(i) = s.values(i) <= kPsdClamp ? 0.0 : std::sqrt(s.values(i));
  }
  const ComplexMatrix r = s.vectors * roots.cast<Complex>().asDiagonal() * s.vectors.adjoint();
  return HermitianOperator(hermitian_part(r));
}

/// a b - b a
inline ComplexMatrix commutator(const HermitianOperator& a, const ComplexMatrix& b) {
  detail::require_same_dim(a.matrix(), b, "commutator");
  return a.matrix() * b - b * a.matrix();
}

/// Nested commutator [h, [h, ... [h, x]]] with n brackets; n = 0 returns x.
inline ComplexMatrix ad_power(const HermitianOperator& h, const ComplexMatrix& x, int n) {
  if (n < 0) throw InvalidArgument("ad_power: negative order");
  detail::require_same_dim(h.matrix(), x, "ad_power");
  ComplexMatrix out = x;
  for (int k = 0; k < n; ++k) out = commutator(h, out);
  return out;
}

/// Conjugation x -> e^{-iht} x e^{iht}, with the spectrum of h computed once.
class UnitaryPropagator {
 public:
  explicit UnitaryPropagator(const HermitianOperator& h) : spectrum_(eigensystem(h)) {}

  ComplexMatrix unitary(double t) const {
    if (!std::isfinite(t)) throw InvalidArgument("unitary_evolve: non-finite time");
    Eigen::VectorXcd phases(spectrum_.values.size());
    for (Eigen::Index i = 0; i < phases.size(); ++i) {
      phases(i) = std::exp(Complex(0.0, -spectrum_.values(i) * t));
    }
    return spectrum_.vectors * phases.asDiagonal() * spectrum_.vectors.adjoint();
  }

  ComplexMatrix evolve(const ComplexMatrix& x, double t) const {
    detail::require_same_dim(spectrum_.vectors, x, "unitary_evolve");
    const ComplexMatrix u = unitary(t);
    return u * x * u.adjoint();
  }

  Eigen::Index dim() const noexcept { return spectrum_.vectors.rows(); }

 private:
  Spectrum spectrum_;
};

inline ComplexMatrix unitary_evolve(const HermitianOperator& h, const ComplexMatrix& x, double t) {
  detail::require_same_dim(h.matrix(), x, "unitary_evolve");
  return UnitaryPropagator(h).evolve(x, t);
}

}  // namespace qcrb
