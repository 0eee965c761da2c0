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

// Brute-force reference for the bounds module. Hermitian matrices are mapped
// to R^(d^2) over an orthonormal basis of the Hermitian subspace, so that
// tr(A B) is a plain dot product, and the derivative chain is orthogonalized
// explicitly. Nothing here reads a moment table.

#pragma once

#include <map>
#include <vector>

#include "qcrb/config.hpp"
#include "qcrb/statmoments.hpp"

namespace qcrb::oracle {

/// Coordinates over {E_kk} U {(E_jk + E_kj)/sqrt2} U {i(E_jk - E_kj)/sqrt2}
/// (with the sign of the last family chosen so that the imaginary part of the
/// upper entry is stored). tr(A B) = <vec A, vec B> for Hermitian A, B.
inline RealVector hermitian_to_vector(const ComplexMatrix& a) {
  const Eigen::Index d = a.rows();
  RealVector v(d * d);
  Eigen::Index idx = 0;
  for (Eigen::Index k = 0; k < d; ++k) v(idx++) = a(k, k).real();
  const double s = std::sqrt(2.0);
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index k = j + 1; k < d; ++k) {
      v(idx++) = s * a(j, k).real();
      v(idx++) = s * a(j, k).imag();
    }
  }
  return v;
}

inline ComplexMatrix vector_to_hermitian(const RealVector& v, Eigen::Index d) {
  ComplexMatrix a = ComplexMatrix::Zero(d, d);
  Eigen::Index idx = 0;
  for (Eigen::Index k = 0; k < d; ++k) a(k, k) = v(idx++);
  const double s = 1.0 / std::sqrt(2.0);
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index k = j + 1; k < d; ++k) {
      const double re = s * v(idx++);
      const double im = s * v(idx++);
      a(j, k) = Complex(re, im);
      a(k, j) = Complex(re, -im);
    }
  }
  return a;
}

struct OrthogonalSystem {
  DerivativeStack raw;
  double tolerance = kDegeneracyTolerance;

  // Full chain: hat_n is xi^(n) minus its components along
  // hat_0 = xi, hat_1, ..., hat_(n-1). Degenerate entries are zero.
  std::vector<ComplexMatrix> hat_vectors;
  std::vector<double> norms;
  std::vector<bool> degenerate;

  // Odd chain: psi_n is xi^(n) minus its components along psi_k, k < n odd.
  std::map<int, ComplexMatrix> psi_vectors;
  std::map<int, double> psi_norms;
  std::map<int, bool> psi_degenerate;

  // Vectorized copies in R^(d^2).
  std::vector<RealVector> raw_real;
  std::vector<RealVector> hat_real;
  std::map<int, RealVector> psi_real;
};

namespace detail {

// Two passes of modified Gram-Schmidt against `basis` (zero entries skipped).
inline RealVector orthogonalize(RealVector w, const std::vector<const RealVector*>& basis) {
  for (int pass = 0; pass < 2; ++pass) {
    for (const RealVector* e : basis) {
      const double nn = e->squaredNorm();
      if (nn > 0.0) w -= (w.dot(*e) / nn) * *e;
    }
  }
  return w;
}

}  // namespace detail

inline OrthogonalSystem build_orthogonal_system(const DerivativeStack& stack,
                                                double tol = kDegeneracyTolerance) {
  OrthogonalSystem sys{stack, tol, {}, {}, {}, {}, {}, {}, {}, {}, {}};
  const Eigen::Index d = stack.state().dim();
  const int n_max = stack.max_order();
  for (int n = 0; n <= n_max; ++n) sys.raw_real.push_back(hermitian_to_vector(stack[n]));

  // Degeneracy is tracked per parity as the running product of
  // ||residual||^2 / ||raw||^2, i.e. the Hadamard ratio of that parity's Gram
  // matrix; this is the quantity the determinant route thresholds.
  double ratio[2] = {1.0, 1.0};
  bool collapsed[2] = {false, false};
  std::vector<const RealVector*> basis;
  for (int n = 0; n <= n_max; ++n) {
    const int parity = n % 2;
    RealVector w = detail::orthogonalize(sys.raw_real[static_cast<std::size_t>(n)], basis);
    const double raw_nn = sys.raw_real[static_cast<std::size_t>(n)].squaredNorm();
    double nn = w.squaredNorm();
    ratio[parity] *= raw_nn > 0.0 ? nn / raw_nn : 0.0;
    if (collapsed[parity] || ratio[parity] <= tol) collapsed[parity] = true;
    const bool degenerate = collapsed[parity];
    if (degenerate) {
      w.setZero();
      nn = 0.0;
    }
    sys.hat_real.push_back(std::move(w));
    sys.norms.push_back(nn);
    sys.degenerate.push_back(degenerate);
    basis.clear();
    for (const RealVector& e : sys.hat_real) basis.push_back(&e);
  }
  for (const RealVector& e : sys.hat_real) sys.hat_vectors.push_back(vector_to_hermitian(e, d));

  double odd_ratio = 1.0;
  bool odd_collapsed = false;
  std::vector<const RealVector*> odd_basis;
  for (int n = 1; n <= n_max; n += 2) {
    const RealVector& raw = sys.raw_real[static_cast<std::size_t>(n)];
    RealVector w = detail::orthogonalize(raw, odd_basis);
    const double raw_nn = raw.squaredNorm();
    double nn = w.squaredNorm();
    odd_ratio *= raw_nn > 0.0 ? nn / raw_nn : 0.0;
    if (odd_collapsed || odd_ratio <= tol) odd_collapsed = true;
    if (odd_collapsed) {
      w.setZero();
      nn = 0.0;
    }
    sys.psi_real[n] = std::move(w);
    sys.psi_norms[n] = nn;
    sys.psi_degenerate[n] = odd_collapsed;
    sys.psi_vectors[n] = vector_to_hermitian(sys.psi_real[n], d);
    odd_basis.clear();
    for (const auto& [k, e] : sys.psi_real) odd_basis.push_back(&e);
  }
  return sys;
}

/// One more orthogonalization sweep over the existing hat vectors.
inline std::vector<RealVector> reorthogonalize(const OrthogonalSystem& sys) {
  std::vector<RealVector> out;
  std::vector<const RealVector*> basis;
  for (const RealVector& e : sys.hat_real) {
    RealVector w = detail::orthogonalize(e, basis);
    out.push_back(std::move(w));
    basis.clear();
    for (const RealVector& f : out) basis.push_back(&f);
  }
  return out;
}

/// (T - tr(xi T xi)) xi + xi (T - tr(xi T xi)), vectorized.
inline RealVector gradient_vector(const HermitianOperator& t_est, const SqrtState& xi) {
  qcrb::detail::require_same_dim(t_est.matrix(), xi.matrix(), "oracle gradient");
  const ComplexMatrix& s = xi.matrix();
  const Complex mean = (s * t_est.matrix() * s).trace();
  ComplexMatrix tt = t_est.matrix();
  tt.diagonal().array() -= mean.real();
  return hermitian_to_vector(hermitian_part(tt * s + s * tt));
}

inline bool psi_is_degenerate(const OrthogonalSystem& sys, int n) {
  return sys.psi_degenerate.at(n);
}

/// <xi^(n), psi_k> / ||psi_k||^2
inline double psi_projection(const OrthogonalSystem& sys, int n, int k) {
  if (sys.psi_degenerate.at(k)) throw DegenerateGram("oracle: psi_" + std::to_string(k));
  return sys.raw_real.at(static_cast<std::size_t>(n)).dot(sys.psi_real.at(k)) / sys.psi_norms.at(k);
}

/// U_n = psi_n . grad t, evaluated directly.
inline double psi_contraction(const OrthogonalSystem& sys, const HermitianOperator& t_est, int n) {
  return gradient_vector(t_est, sys.raw.state()).dot(sys.psi_real.at(n));
}

namespace detail {

inline void require_orders(const OrthogonalSystem& sys, const std::vector<int>& orders) {
  for (int n : orders) {
    if (n < 1 || n > sys.raw.max_order()) {
      throw InvalidArgument("oracle: order " + std::to_string(n) + " not computed");
    }
  }
}

}  // namespace detail

/// 1/2 sum_n (grad t . hat_n)^2 / ||hat_n||^2 over the requested orders.
inline double direct_bhattacharyya(const OrthogonalSystem& sys, const HermitianOperator& t_est,
                                   const SqrtState& xi, const std::vector<int>& orders) {
  detail::require_orders(sys, orders);
  const RealVector g = gradient_vector(t_est, xi);
  double sum = 0.0;
  for (int n : orders) {
    const auto i = static_cast<std::size_t>(n);
    if (sys.degenerate[i]) continue;
    const double c = g.dot(sys.hat_real[i]);
    sum += 0.5 * c * c / sys.norms[i];
  }
  return sum;
}

struct MinVarianceResult {
  double min_variance = 0.0;
  std::map<int, double> lambdas;  // minimizer per non-degenerate order
};

/// min over lambda of ||grad t + sum_n lambda_n hat_n||^2, solved through
/// the normal equations of the selected hat vectors.
inline MinVarianceResult min_variance_oracle(const OrthogonalSystem& sys,
                                             const HermitianOperator& t_est, const SqrtState& xi,
                                             const std::vector<int>& orders) {
  detail::require_orders(sys, orders);
  const RealVector g = gradient_vector(t_est, xi);
  std::vector<int> used;
  for (int n : orders) {
    if (!sys.degenerate[static_cast<std::size_t>(n)]) used.push_back(n);
  }
  MinVarianceResult out;
  if (used.empty()) {
    out.min_variance = g.squaredNorm();
    return out;
  }
  Eigen::MatrixXd e(g.size(), static_cast<Eigen::Index>(used.size()));
  for (std::size_t j = 0; j < used.size(); ++j) {
    e.col(static_cast<Eigen::Index>(j)) = sys.hat_real[static_cast<std::size_t>(used[j])];
  }
  const Eigen::MatrixXd normal = e.transpose() * e;
  const RealVector rhs = -(e.transpose() * g);
  const RealVector lambda = normal.ldlt().solve(rhs);
  out.min_variance = (g + e * lambda).squaredNorm();
  for (std::size_t j = 0; j < used.size(); ++j) out.lambdas[used[j]] = lambda(static_cast<Eigen::Index>(j));
  return out;
}

}  // namespace qcrb::oracle
