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

// Statistical functionals of the embedded state and the derivative/moment
// machinery of von Neumann dynamics.
//
// Conventions: the k-th time derivative of xi under d xi/dt = -i[H, xi] is
//   xi^(k) = (-i)^k Ad_H~^k [xi],   H~ = H - tr(H xi xi),
// and mu_2k = tr(xi^(k) xi^(k)). Anti-self-adjointness of Ad under tr(AB)
// gives the mixed-order law
//   tr(xi^(r) xi^(s)) = (-1)^((r-s)/2) mu_(r+s)   (r + s even),
//   tr(xi^(r) xi^(s)) = 0                          (r + s odd),
// which MomentTable checks rather than assumes.

#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "qcrb/matcore.hpp"
#include "qcrb/states.hpp"

namespace qcrb {

/// E_xi[X] = tr(xi X xi)
inline double expectation(const HermitianOperator& x, const SqrtState& xi) {
  detail::require_same_dim(x.matrix(), xi.matrix(), "expectation");
  return real_trace_product(xi.matrix() * x.matrix(), xi.matrix());
}

struct StatSummary {
  double mean = 0.0;
  double variance = 0.0;          // Delta X^2 = tr(X~ X~ rho)
  double delta_sq = 0.0;          // delta X^2 = tr(X xi X xi) - mean^2
  double wysi = 0.0;              // variance - delta_sq
  double wysi_commutator = 0.0;   // -1/2 tr([xi, X]^2), independent route
  double skew_second_kind = 0.0;  // variance + delta_sq
};

inline StatSummary stat_summary(const HermitianOperator& x, const SqrtState& xi) {
  detail::require_same_dim(x.matrix(), xi.matrix(), "stat_summary");
  const ComplexMatrix& s = xi.matrix();
  const ComplexMatrix& xm = x.matrix();
  StatSummary out;
  out.mean = expectation(x, xi);
  const HermitianOperator centered = center_operator(x, xi);
  const ComplexMatrix xs = centered.matrix() * s;
  out.variance = real_trace_product(xs.adjoint(), xs);
  out.delta_sq = real_trace_product(xm * s, xm * s) - out.mean * out.mean;
  out.wysi = out.variance - out.delta_sq;
  const ComplexMatrix c = s * xm - xm * s;
  out.wysi_commutator = -0.5 * real_trace_product(c, c);
  out.skew_second_kind = out.variance + out.delta_sq;
  return out;
}

/// xi^(0..max_order) for one (xi, H) instance, together with H~.
class DerivativeStack {
 public:
  int max_order() const noexcept { return static_cast<int>(vectors_.size()) - 1; }
  const ComplexMatrix& operator[](int n) const { return vectors_.at(static_cast<std::size_t>(n)); }
  const std::vector<ComplexMatrix>& vectors() const noexcept { return vectors_; }
  const HermitianOperator& centered_hamiltonian() const noexcept { return h_centered_; }
  const SqrtState& state() const noexcept { return xi_; }

 private:
  DerivativeStack(SqrtState xi, HermitianOperator h, std::vector<ComplexMatrix> v)
      : xi_(std::move(xi)), h_centered_(std::move(h)), vectors_(std::move(v)) {}
  friend DerivativeStack derivative_stack(const SqrtState&, const HermitianOperator&, int);

  SqrtState xi_;
  HermitianOperator h_centered_;
  std::vector<ComplexMatrix> vectors_;
};

/// Phase (-i)^n, cycling -i, -1, i, 1.
inline Complex minus_i_power(int n) {
  switch (((n % 4) + 4) % 4) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, -1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, 1.0};
  }
}

inline DerivativeStack derivative_stack(const SqrtState& xi, const HermitianOperator& h,
                                        int n_max) {
  if (n_max < 1) throw InvalidArgument("derivative_stack: n_max must be >= 1");
  detail::require_same_dim(h.matrix(), xi.matrix(), "derivative_stack");
  HermitianOperator h_tilde = center_operator(h, xi);
  std::vector<ComplexMatrix> v;
  v.reserve(static_cast<std::size_t>(n_max) + 1);
  v.push_back(xi.matrix());
  ComplexMatrix nested = xi.matrix();
  for (int n = 1; n <= n_max; ++n) {
    nested = commutator(h_tilde, nested);
    v.push_back(hermitian_part(minus_i_power(n) * nested));
  }
  return DerivativeStack(xi, std::move(h_tilde), std::move(v));
}

/// mu_2n = sum_ij |x_ij|^2 (e_i - e_j)^2n for n = 0..n_max, where e are the
/// eigenvalues of H and x is xi in the eigenbasis of H.
///
/// This is tr(xi^(n) xi^(n)) evaluated as the moments of a positive spectral
/// measure and accumulated in long double. Higher Hankel determinants amplify
/// unstructured rounding in the moments by many orders of magnitude;
/// moments of an actual measure, carried with extra digits, avoid that.
inline std::vector<long double> spectral_moments(const SqrtState& xi, const HermitianOperator& h,
                                                 int n_max) {
  detail::require_same_dim(h.matrix(), xi.matrix(), "spectral_moments");
  const Spectrum sp = eigensystem(h);
  const ComplexMatrix x = sp.vectors.adjoint() * xi.matrix() * sp.vectors;
  std::vector<long double> mu(static_cast<std::size_t>(n_max) + 1, 0.0L);
  const Eigen::Index d = x.rows();
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      const long double re = x(i, j).real(), im = x(i, j).imag();
      const long double w = re * re + im * im;
      const long double om = static_cast<long double>(sp.values(i)) - sp.values(j);
      long double p = w;
      for (int k = 0; k <= n_max; ++k) {
        mu[static_cast<std::size_t>(k)] += p;
        p *= om * om;
      }
    }
  }
  return mu;
}

/// mu_2n and mixed-order Gram entries for one instance.
///
/// `mu(k)` takes the even index k = 2n and comes from spectral_moments.
/// `cross(r, s)` is tr(xi^(r) xi^(s)) on the stack vectors themselves, so the
/// diagonal of `gram()` is the derivative-norm route to the same moments.
/// `energy_scale2()` is ||H~||^2 (spectral), used for absolute thresholds on
/// mu_2.
class MomentTable {
 public:
  /// Synthetic table from even moments {mu_0, mu_2, ..., mu_2N}; cross values
  /// follow the sign law.
  static MomentTable from_moments(std::vector<double> even_moments, double energy_scale2 = 1.0) {
    if (even_moments.size() < 2) throw InvalidArgument("from_moments: need mu_0 and mu_2");
    MomentTable t;
    t.mu_ = std::move(even_moments);
    t.mu_ext_.assign(t.mu_.begin(), t.mu_.end());
    const int n = static_cast<int>(t.mu_.size()) - 1;
    t.cross_ = Eigen::MatrixXd::Zero(n + 1, n + 1);
    for (int r = 0; r <= n; ++r) {
      for (int s = 0; s <= n; ++s) {
        if ((r + s) % 2 != 0 || (r + s) / 2 > n) continue;
        const int sign = ((r - s) / 2) % 2 == 0 ? 1 : -1;
        t.cross_(r, s) = sign * t.mu_[static_cast<std::size_t>((r + s) / 2)];
      }
    }
    t.energy_scale2_ = energy_scale2;
    return t;
  }

  int max_order() const noexcept { return static_cast<int>(mu_.size()) - 1; }
  bool has_moment(int index) const noexcept {
    return index >= 0 && index % 2 == 0 && index / 2 <= max_order();
  }

  double mu(int index) const {
    if (!has_moment(index)) throw MissingMoment("mu_" + std::to_string(index));
    return mu_[static_cast<std::size_t>(index / 2)];
  }

  /// The same moment before rounding to double.
  long double mu_extended(int index) const {
    if (!has_moment(index)) throw MissingMoment("mu_" + std::to_string(index));
    return mu_ext_[static_cast<std::size_t>(index / 2)];
  }

  double cross(int r, int s) const {
    if (r < 0 || s < 0 || r > max_order() || s > max_order()) {
      throw MissingMoment("cross(" + std::to_string(r) + "," + std::to_string(s) + ")");
    }
    return cross_(r, s);
  }

  const Eigen::MatrixXd& gram() const noexcept { return cross_; }
  double energy_scale2() const noexcept { return energy_scale2_; }

 private:
  MomentTable() = default;
  friend MomentTable moment_table(const DerivativeStack&);

  std::vector<double> mu_;   // mu_[n] = mu_2n
  std::vector<long double> mu_ext_;
  Eigen::MatrixXd cross_;
  double energy_scale2_ = 1.0;
};

inline MomentTable moment_table(const DerivativeStack& stack) {
  const int n = stack.max_order();
  MomentTable t;
  t.cross_ = Eigen::MatrixXd::Zero(n + 1, n + 1);
  for (int r = 0; r <= n; ++r) {
    for (int s = r; s <= n; ++s) {
      t.cross_(r, s) = t.cross_(s, r) = real_trace_product(stack[r], stack[s]);
    }
  }
  t.mu_ext_ = spectral_moments(stack.state(), stack.centered_hamiltonian(), n);
  t.mu_.assign(t.mu_ext_.begin(), t.mu_ext_.end());
  const double norm = spectral_norm(stack.centered_hamiltonian());
  t.energy_scale2_ = norm * norm;
  return t;
}

/// mu_2, mu_4, mu_6 from trace polynomials in H~ and xi, without forming any
/// derivative.
inline std::array<double, 3> closed_form_moments(const SqrtState& xi, const HermitianOperator& h) {
  detail::require_same_dim(h.matrix(), xi.matrix(), "closed_form_moments");
  const ComplexMatrix ht = center_operator(h, xi).matrix();
  const ComplexMatrix& s = xi.matrix();
  std::array<ComplexMatrix, 7> p;
  p[0] = ComplexMatrix::Identity(ht.rows(), ht.cols());
  for (std::size_t k = 1; k < p.size(); ++k) p[k] = p[k - 1] * ht;
  // w(j, k) = tr(H~^j xi H~^k xi)
  auto w = [&](int j, int k) {
    return real_trace_product(p[static_cast<std::size_t>(j)] * s, p[static_cast<std::size_t>(k)] * s);
  };
  const double mu2 = 2.0 * (w(2, 0) - w(1, 1));
  const double mu4 = 2.0 * (w(4, 0) - 4.0 * w(3, 1) + 3.0 * w(2, 2));
  const double mu6 = 2.0 * (w(6, 0) - 6.0 * w(5, 1) + 15.0 * w(4, 2) - 10.0 * w(3, 3));
  return {mu2, mu4, mu6};
}

/// Scalar Fisher metric G = 2 tr(xi' xi') = 2 mu_2.
inline double fisher_metric_scalar(const DerivativeStack& stack) {
  return 2.0 * real_trace_product(stack[1], stack[1]);
}

}  // namespace qcrb
