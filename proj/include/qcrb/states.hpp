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

#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "qcrb/matcore.hpp"

namespace qcrb {

/// FNV-1a over the raw bytes of the matrix entries (row-major).
inline std::uint64_t fingerprint(const ComplexMatrix& m) {
  std::uint64_t hash = 1469598103934665603ull;
  auto mix = [&hash](double v) {
    unsigned char bytes[sizeof(double)];
    std::memcpy(bytes, &v, sizeof(double));
    for (unsigned char b : bytes) {
      hash ^= b;
      hash *= 1099511628211ull;
    }
  };
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      mix(m(i, j).real());
      mix(m(i, j).imag());
    }
  }
  return hash;
}

/// Validated density operator: Hermitian, unit trace, positive semidefinite.
/// Pure states are admitted.
class DensityMatrix {
 public:
  const HermitianOperator& op() const noexcept { return op_; }
  const ComplexMatrix& matrix() const noexcept { return op_.matrix(); }
  Eigen::Index dim() const noexcept { return op_.dim(); }
  double purity() const noexcept { return purity_; }
  double eigen_floor() const noexcept { return eigen_floor_; }

 private:
  DensityMatrix(HermitianOperator op, double purity, double floor)
      : op_(std::move(op)), purity_(purity), eigen_floor_(floor) {}

  friend DensityMatrix make_density(const ComplexMatrix& matrix);

  HermitianOperator op_;
  double purity_;
  double eigen_floor_;
};

/// Validates and renormalizes. Throws NotHermitian, TraceDeviationTooLarge or
/// NotPositiveSemidefinite.
inline DensityMatrix make_density(const ComplexMatrix& matrix) {
  HermitianOperator h(matrix);
  const double trace = h.matrix().trace().real();
  if (std::abs(trace - 1.0) > kTraceTolerance) {
    throw TraceDeviationTooLarge("trace " + std::to_string(trace));
  }
  ComplexMatrix m = h.matrix() / trace;
  Spectrum s = eigensystem(HermitianOperator(m));
  if (s.values(0) < -kPsdClamp) {
    throw NotPositiveSemidefinite("minimum eigenvalue " + std::to_string(s.values(0)));
  }
  if (s.values(0) < 0.0) {
    // Rebuild with the roundoff-level negative part removed.
    RealVector clamped = s.values.cwiseMax(0.0);
    clamped /= clamped.sum();
    m = s.vectors * clamped.cast<Complex>().asDiagonal() * s.vectors.adjoint();
    s.values = clamped;
  }
  HermitianOperator op(hermitian_part(m));
  const double purity = real_trace_product(op.matrix(), op.matrix());
  return DensityMatrix(std::move(op), purity, s.values(0));
}

inline DensityMatrix make_diagonal_density(std::span<const double> weights) {
  ComplexMatrix m = ComplexMatrix::Zero(static_cast<Eigen::Index>(weights.size()),
                                        static_cast<Eigen::Index>(weights.size()));
  for (std::size_t i = 0; i < weights.size(); ++i) {
    m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = weights[i];
  }
  return make_density(m);
}

/// Diagonal state with populations proportional to ratio^k, k = 0..dim-1.
inline DensityMatrix geometric_density(int dim, double ratio) {
  if (dim < 1 || !(ratio > 0.0)) throw InvalidArgument("geometric_density: bad arguments");
  std::vector<double> w(static_cast<std::size_t>(dim));
  double total = 0.0;
  for (int k = 0; k < dim; ++k) total += (w[static_cast<std::size_t>(k)] = std::pow(ratio, k));
  for (double& v : w) v /= total;
  return make_diagonal_density(w);
}

/// The embedded state xi = sqrt(rho), with tr(xi xi) = 1.
class SqrtState {
 public:
  const HermitianOperator& xi() const noexcept { return xi_; }
  const ComplexMatrix& matrix() const noexcept { return xi_.matrix(); }
  Eigen::Index dim() const noexcept { return xi_.dim(); }
  std::uint64_t source_hash() const noexcept { return source_hash_; }

  /// rho = xi xi
  ComplexMatrix rho() const { return xi_.matrix() * xi_.matrix(); }

  /// Wraps an already-computed square root (e.g. after unitary evolution).
  /// Checks normalization to 1e-10; positivity is checked to kPsdClamp.
  static SqrtState from_root(const ComplexMatrix& xi, std::uint64_t source_hash) {
    HermitianOperator op(hermitian_part(xi));
    const double norm = real_trace_product(op.matrix(), op.matrix());
    if (std::abs(norm - 1.0) > 1e-10) {
      throw TraceDeviationTooLarge("tr(xi xi) = " + std::to_string(norm));
    }
    if (eigensystem(op).values(0) < -kPsdClamp) {
      throw NotPositiveSemidefinite("square root has a negative eigenvalue");
    }
    return SqrtState(std::move(op), source_hash);
  }

 private:
  SqrtState(HermitianOperator xi, std::uint64_t hash) : xi_(std::move(xi)), source_hash_(hash) {}
  friend SqrtState sqrt_embed(const DensityMatrix& rho);

  HermitianOperator xi_;
  std::uint64_t source_hash_;
};

inline SqrtState sqrt_embed(const DensityMatrix& rho) {
  return SqrtState(matrix_sqrt(rho.op()), fingerprint(rho.matrix()));
}

/// xi_t = e^{-iHt} xi e^{iHt}
inline SqrtState evolve(const SqrtState& xi, const UnitaryPropagator& propagator, double t) {
  return SqrtState::from_root(propagator.evolve(xi.matrix(), t), xi.source_hash());
}

inline SqrtState evolve(const SqrtState& xi, const HermitianOperator& h, double t) {
  return evolve(xi, UnitaryPropagator(h), t);
}

/// x - tr(xi x xi) I
inline HermitianOperator center_operator(const HermitianOperator& x, const SqrtState& xi) {
  detail::require_same_dim(x.matrix(), xi.matrix(), "center_operator");
  const double mean = real_trace_product(x.matrix(), xi.rho());
  ComplexMatrix c = x.matrix();
  c.diagonal().array() -= mean;
  return HermitianOperator(c);
}

// ---------------------------------------------------------------------------
// Seeded ensembles. Every generator is a pure function of (dim, seed).

namespace detail {

inline ComplexMatrix complex_normal_matrix(int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  ComplexMatrix g(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) {
      const double re = normal(rng);
      const double im = normal(rng);
      g(i, j) = Complex(re, im);
    }
  }
  return g;
}

inline void require_dim(int dim, int minimum, const char* where) {
  if (dim < minimum) {
    throw InvalidArgument(std::string(where) + ": dim must be >= " + std::to_string(minimum));
  }
}

}  // namespace detail

/// Full-rank Ginibre state G G^dagger / tr(G G^dagger). If the smallest
/// eigenvalue is below 1e-10 the seed is incremented and the draw repeated.
inline DensityMatrix random_mixed(int dim, std::uint64_t seed) {
  detail::require_dim(dim, 2, "random_mixed");
  for (std::uint64_t s = seed;; ++s) {
    std::mt19937_64 rng(s);
    const ComplexMatrix g = detail::complex_normal_matrix(dim, rng);
    const ComplexMatrix w = g * g.adjoint();
    DensityMatrix rho = make_density(hermitian_part(w / w.trace().real()));
    if (rho.eigen_floor() >= 1e-10) return rho;
  }
}

/// GUE-style Hamiltonian (G + G^dagger)/2 rescaled to unit spectral norm.
inline HermitianOperator random_hamiltonian(int dim, std::uint64_t seed) {
  detail::require_dim(dim, 2, "random_hamiltonian");
  std::mt19937_64 rng(seed);
  const ComplexMatrix g = detail::complex_normal_matrix(dim, rng);
  const HermitianOperator h(hermitian_part(g));
  return HermitianOperator(h.matrix() / spectral_norm(h));
}

/// Haar-random pure state |psi><psi| (normalized complex Gaussian vector).
inline DensityMatrix random_pure(int dim, std::uint64_t seed) {
  detail::require_dim(dim, 2, "random_pure");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  Eigen::VectorXcd psi(dim);
  for (int i = 0; i < dim; ++i) {
    const double re = normal(rng);
    const double im = normal(rng);
    psi(i) = Complex(re, im);
  }
  psi.normalize();
  return make_density(psi * psi.adjoint());
}

// ---------------------------------------------------------------------------
// Approximately conjugate pair on a truncated ladder.

/// Generator h and estimator t_est with i[h, t_est] = I + defect, where the
/// defect is supported on the last `boundary_band` basis levels.
struct ConjugatePair {
  HermitianOperator h;
  HermitianOperator t_est;
  ComplexMatrix defect;
  int boundary_band = 2;

  Eigen::Index dim() const noexcept { return h.dim(); }
};

/// h = P = i(a^dagger - a)/sqrt(2), t_est = X = (a + a^dagger)/sqrt(2) on the
/// first `dim` number states. Since [a, a^dagger] = I - dim |dim-1><dim-1|
/// after truncation, i[P, X] - I is -dim at the top corner and zero elsewhere.
inline ConjugatePair truncated_conjugate_pair(int dim) {
  detail::require_dim(dim, 8, "truncated_conjugate_pair");
  ComplexMatrix a = ComplexMatrix::Zero(dim, dim);
  for (int k = 1; k < dim; ++k) a(k - 1, k) = std::sqrt(static_cast<double>(k));
  const ComplexMatrix ad = a.adjoint();
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  HermitianOperator x((a + ad) * inv_sqrt2);
  HermitianOperator p(kI * (ad - a) * inv_sqrt2);
  ComplexMatrix defect = kI * commutator(p, x.matrix());
  defect -= ComplexMatrix::Identity(dim, dim);
  return ConjugatePair{std::move(p), std::move(x), std::move(defect), 2};
}

/// True iff rho puts at most eps population on the top boundary_band + 2
/// levels of the pair's basis.
inline bool boundary_safe(const DensityMatrix& rho, const ConjugatePair& pair, double eps) {
  detail::require_same_dim(rho.matrix(), pair.h.matrix(), "boundary_safe");
  const Eigen::Index band = std::min<Eigen::Index>(pair.boundary_band + 2, rho.dim());
  double tail = 0.0;
  for (Eigen::Index k = rho.dim() - band; k < rho.dim(); ++k) tail += rho.matrix()(k, k).real();
  return tail <= eps;
}

}  // namespace qcrb
