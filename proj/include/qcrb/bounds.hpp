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

// Estimator-independent bound engine.
//
// The odd derivatives xi^(1), xi^(3), ... are orthogonalized into psi_1,
// psi_3, ... purely through moments:
//
//   D_2n     Hankel determinant |mu_(2n-2i-2j)|, i,j = 0..(n-1)/2
//   N_n      ||psi_n||^2 = D_2n / D_(2n-4),  N_1 = mu_2
//   F_n,k    <xi^(n), psi_k> / N_k, a bordered Hankel determinant over D_2k
//   U_n      (-1)^m n mu_(n-1) - sum_k F_n,k U_k,  m = (n-1)/2,  U_1 = 1
//
// and the product bound is
//   (DT^2 + dT^2)(DH^2 - dH^2) >= 1/4 sum_k mu_2 U_k^2 / N_k.
//
// Order n is degenerate when D_2n <= tol * prod(diag), see config.hpp.
// Degeneracy is cumulative: once an order collapses every later one does too.
// All Hankel algebra runs in long double on the table's extended moments;
// results are rounded to double only when reported.

#pragma once

#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "qcrb/config.hpp"
#include "qcrb/statmoments.hpp"

namespace qcrb {

using ExtendedMatrix = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;

namespace detail {

inline void require_odd(int n, const char* where) {
  if (n < 1 || n % 2 == 0) {
    throw InvalidArgument(std::string(where) + ": order must be a positive odd integer, got " +
                          std::to_string(n));
  }
}

inline long double pivoted_determinant(const ExtendedMatrix& m) {
  return Eigen::FullPivLU<ExtendedMatrix>(m).determinant();
}

inline int sign_power(int e) { return e % 2 == 0 ? 1 : -1; }

inline void require_nonzero_fisher(const MomentTable& table, double tol) {
  if (!(table.mu(2) > tol * std::max(table.energy_scale2(), 1e-300))) {
    throw ZeroFisherInformation("mu_2 = " + std::to_string(table.mu(2)));
  }
}

}  // namespace detail

/// (n+1)/2 square Hankel matrix with entry (i, j) = mu_(2n - 2i - 2j), in
/// the table's extended precision.
inline ExtendedMatrix hankel_matrix(const MomentTable& table, int n) {
  detail::require_odd(n, "hankel_matrix");
  const int size = (n + 1) / 2;
  ExtendedMatrix m(size, size);
  for (int i = 0; i < size; ++i) {
    for (int j = 0; j < size; ++j) m(i, j) = table.mu_extended(2 * n - 2 * i - 2 * j);
  }
  return m;
}

namespace detail {

inline long double gram_determinant_ext(const MomentTable& table, int n) {
  return pivoted_determinant(hankel_matrix(table, n));
}

inline long double gram_scale_ext(const MomentTable& table, int n) {
  require_odd(n, "gram_scale");
  long double scale = 1.0L;
  for (int i = 0; i <= (n - 1) / 2; ++i) scale *= table.mu_extended(2 * n - 4 * i);
  return scale;
}

}  // namespace detail

inline double gram_determinant(const MomentTable& table, int n) {
  return static_cast<double>(detail::gram_determinant_ext(table, n));
}

/// Product of the Hankel diagonal, the scale against which D_2n is compared.
inline double gram_scale(const MomentTable& table, int n) {
  return static_cast<double>(detail::gram_scale_ext(table, n));
}

inline bool is_degenerate_order(const MomentTable& table, int n,
                                double tol = kDegeneracyTolerance) {
  detail::require_odd(n, "is_degenerate_order");
  for (int k = 1; k <= n; k += 2) {
    const long double scale = detail::gram_scale_ext(table, k);
    if (!(scale > 0.0L) || detail::gram_determinant_ext(table, k) <= tol * scale) return true;
  }
  return false;
}

namespace detail {

inline long double normalizer_ext(const MomentTable& table, int n, double tol) {
  require_odd(n, "normalizer");
  if (is_degenerate_order(table, n, tol)) {
    throw DegenerateGram("order " + std::to_string(n) + " has a singular Gram matrix");
  }
  if (n == 1) return table.mu_extended(2);
  return gram_determinant_ext(table, n) / gram_determinant_ext(table, n - 2);
}

inline long double projection_coeff_ext(const MomentTable& table, int n, int k, double tol) {
  require_odd(n, "projection_coeff");
  require_odd(k, "projection_coeff");
  if (k >= n) throw InvalidArgument("projection_coeff: need k < n");
  if (is_degenerate_order(table, k, tol)) {
    throw DegenerateGram("order " + std::to_string(k) + " has a singular Gram matrix");
  }
  ExtendedMatrix bordered = hankel_matrix(table, k);
  for (int j = 0; j < bordered.cols(); ++j) bordered(0, j) = table.mu_extended(n + k - 2 * j);
  const int sign = sign_power((n + k) / 2 - 1);
  return sign * pivoted_determinant(bordered) / gram_determinant_ext(table, k);
}

inline std::map<int, std::optional<long double>> u_recursion_ext(const MomentTable& table,
                                                                 int n_max, double tol) {
  require_odd(n_max, "u_recursion");
  require_nonzero_fisher(table, tol);
  std::map<int, std::optional<long double>> u;
  u[1] = 1.0L;
  for (int n = 3; n <= n_max; n += 2) {
    if (is_degenerate_order(table, n, tol)) {
      u[n] = std::nullopt;
      continue;
    }
    const int m = (n - 1) / 2;
    long double value = sign_power(m) * n * table.mu_extended(n - 1);
    for (int k = 1; k < n; k += 2) value -= projection_coeff_ext(table, n, k, tol) * *u.at(k);
    u[n] = value;
  }
  return u;
}

}  // namespace detail

inline double normalizer(const MomentTable& table, int n, double tol = kDegeneracyTolerance) {
  return static_cast<double>(detail::normalizer_ext(table, n, tol));
}

inline double projection_coeff(const MomentTable& table, int n, int k,
                               double tol = kDegeneracyTolerance) {
  return static_cast<double>(detail::projection_coeff_ext(table, n, k, tol));
}

/// U_n for odd n <= n_max; degenerate orders map to nullopt.
inline std::map<int, std::optional<double>> u_recursion(const MomentTable& table, int n_max,
                                                        double tol = kDegeneracyTolerance) {
  std::map<int, std::optional<double>> out;
  for (const auto& [n, v] : detail::u_recursion_ext(table, n_max, tol)) {
    out[n] = v ? std::optional<double>(static_cast<double>(*v)) : std::nullopt;
  }
  return out;
}

/// Order-2 term (grad t . xi^_2)^2 / (2 ||xi^_2||^2). It depends on the
/// estimator and is never folded into the estimator-independent bound.
struct EvenTerm {
  double value = 0.0;         // on the (DT^2 + dT^2) side
  double product_form = 0.0;  // value * (DH^2 - dH^2) = value * mu_2 / 2
  double numerator = 0.0;     // grad t . xi^_2
  double norm_sq = 0.0;       // ||xi^_2||^2
  bool degenerate = false;
};

struct BoundReport {
  std::vector<int> orders;
  std::map<int, double> d_values;  // keyed by 2n
  std::map<int, double> n_values;  // non-degenerate orders only
  std::map<std::pair<int, int>, double> f_values;
  std::map<int, double> u_values;
  std::map<int, double> terms;       // 1/4 mu_2 U_n^2 / N_n, 0 when degenerate
  std::map<int, double> cumulative;  // running sum through order n
  double cumulative_rhs = 0.0;
  std::vector<int> degenerate_orders;
  std::optional<double> kappa;
  std::optional<EvenTerm> even_order_2;
};

inline BoundReport bound_of_order(const MomentTable& table, int n_max,
                                  double tol = kDegeneracyTolerance) {
  detail::require_odd(n_max, "bound_of_order");
  detail::require_nonzero_fisher(table, tol);
  BoundReport r;
  const long double mu2 = table.mu_extended(2);
  const auto u = detail::u_recursion_ext(table, n_max, tol);
  for (int n = 1; n <= n_max; n += 2) {
    r.orders.push_back(n);
    r.d_values[2 * n] = gram_determinant(table, n);
    double term = 0.0;
    if (u.at(n)) {
      const long double un = *u.at(n);
      const long double nn = detail::normalizer_ext(table, n, tol);
      r.u_values[n] = static_cast<double>(un);
      r.n_values[n] = static_cast<double>(nn);
      for (int k = 1; k < n; k += 2) r.f_values[{n, k}] = projection_coeff(table, n, k, tol);
      term = static_cast<double>(0.25L * (mu2 * un * un / nn));
    } else {
      r.degenerate_orders.push_back(n);
    }
    r.terms[n] = term;
    r.cumulative_rhs += term;
    r.cumulative[n] = r.cumulative_rhs;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Estimator-dependent quantities.

/// grad t = T~ xi + xi T~ with T~ centered in xi.
inline ComplexMatrix estimator_gradient(const HermitianOperator& t_est, const SqrtState& xi) {
  const ComplexMatrix tt = center_operator(t_est, xi).matrix();
  return tt * xi.matrix() + xi.matrix() * tt;
}

struct Order1Product {
  double product = 0.0;       // (DT^2 + dT^2)(DH^2 - dH^2)
  double skew_t = 0.0;        // DT^2 + dT^2
  double wysi_h = 0.0;        // DH^2 - dH^2
  double symmetric_lhs = 0.0; // DT^2 DH^2
  double symmetric_rhs = 0.0; // 1/4 + dT^2 dH^2
};

inline Order1Product order1_product(const SqrtState& xi, const HermitianOperator& h,
                                    const HermitianOperator& t_est) {
  const StatSummary sh = stat_summary(h, xi);
  const StatSummary st = stat_summary(t_est, xi);
  Order1Product p;
  p.skew_t = st.skew_second_kind;
  p.wysi_h = sh.wysi;
  p.product = p.skew_t * p.wysi_h;
  p.symmetric_lhs = st.variance * sh.variance;
  p.symmetric_rhs = 0.25 + st.delta_sq * sh.delta_sq;
  return p;
}

inline Order1Product order1_product(const DensityMatrix& rho, const ConjugatePair& pair) {
  return order1_product(sqrt_embed(rho), pair.h, pair.t_est);
}

struct OddContraction {
  double observed = 0.0;   // grad t . xi^(n)
  double predicted = 0.0;  // (-1)^m n mu_(n-1)
};

struct ConjugationDiagnostics {
  double projection = 0.0;               // grad t . xi', exactly 1 under i[H,T] = I
  std::map<int, double> kappa_per_order; // tr(xi^(n) T~ xi^(n))
  std::map<int, OddContraction> odd_contraction;
  double defect_weight = 0.0;            // tr(defect rho) for the pair, if known
};

/// Diagnostics of the estimator against the stack's generator at the stack's
/// state. Defects are reported, not thrown.
inline ConjugationDiagnostics conjugation_diagnostics(const HermitianOperator& t_est,
                                                      const DerivativeStack& stack) {
  const SqrtState& xi = stack.state();
  const ComplexMatrix grad = estimator_gradient(t_est, xi);
  const ComplexMatrix tt = center_operator(t_est, xi).matrix();
  ConjugationDiagnostics d;
  d.projection = real_trace_product(grad, stack[1]);
  for (int n = 1; n <= stack.max_order(); ++n) {
    d.kappa_per_order[n] = real_trace_product(stack[n] * tt, stack[n]);
    if (n % 2 == 1) {
      const int m = (n - 1) / 2;
      OddContraction c;
      c.observed = real_trace_product(grad, stack[n]);
      c.predicted = detail::sign_power(m) * n * real_trace_product(stack[m], stack[m]);
      d.odd_contraction[n] = c;
    }
  }
  return d;
}

inline ConjugationDiagnostics conjugation_diagnostics(const ConjugatePair& pair,
                                                      const DerivativeStack& stack) {
  ConjugationDiagnostics d = conjugation_diagnostics(pair.t_est, stack);
  d.defect_weight = real_trace_product(hermitian_part(pair.defect), stack.state().rho());
  return d;
}

/// Constant-of-motion check: kappa_n(t) along xi_t = e^{-iHt} xi0 e^{iHt}.
struct KappaTrajectory {
  std::vector<double> times;
  std::map<int, std::vector<double>> kappa;  // per order, one value per time
  std::map<int, double> relative_drift;      // max |k(t) - k(t0)| / scale
};

/// Drift is measured against max(|kappa(t0)|, mu_2n sqrt(DT^2 + dT^2)) so that
/// symmetric states with kappa = 0 still get a meaningful scale.
inline KappaTrajectory kappa_trajectory(const SqrtState& xi0, const HermitianOperator& h,
                                        const HermitianOperator& t_est, int n_max,
                                        const std::vector<double>& times) {
  if (times.empty()) throw InvalidArgument("kappa_trajectory: no times");
  KappaTrajectory out;
  out.times = times;
  const UnitaryPropagator prop(h);
  std::map<int, double> scale;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const SqrtState xi = evolve(xi0, prop, times[i]);
    const DerivativeStack stack = derivative_stack(xi, h, n_max);
    const ConjugationDiagnostics d = conjugation_diagnostics(t_est, stack);
    for (const auto& [n, k] : d.kappa_per_order) {
      out.kappa[n].push_back(k);
      if (i == 0) {
        const double spread = std::sqrt(std::max(stat_summary(t_est, xi).skew_second_kind, 0.0));
        scale[n] = std::max({std::abs(k), real_trace_product(stack[n], stack[n]) * spread, 1e-300});
      }
    }
  }
  for (const auto& [n, values] : out.kappa) {
    double worst = 0.0;
    for (double v : values) worst = std::max(worst, std::abs(v - values.front()));
    out.relative_drift[n] = worst / scale[n];
  }
  return out;
}

inline EvenTerm estimator_term_even(const HermitianOperator& t_est, const DerivativeStack& stack,
                                    int n = 2, double tol = kDegeneracyTolerance) {
  if (n != 2) throw InvalidArgument("estimator_term_even: only order 2 is supported");
  if (stack.max_order() < 2) throw InvalidArgument("estimator_term_even: stack order < 2");
  const SqrtState& xi = stack.state();
  const double mu2 = real_trace_product(stack[1], stack[1]);
  const double mu4 = real_trace_product(stack[2], stack[2]);
  ComplexMatrix hat = stack[2] - real_trace_product(stack[2], stack[0]) * stack[0];
  if (mu2 > 0.0) hat -= (real_trace_product(stack[2], stack[1]) / mu2) * stack[1];
  EvenTerm e;
  e.norm_sq = real_trace_product(hat, hat);
  e.numerator = real_trace_product(estimator_gradient(t_est, xi), hat);
  e.degenerate = !(mu4 > 0.0) || e.norm_sq <= tol * mu4;
  if (!e.degenerate) {
    e.value = e.numerator * e.numerator / (2.0 * e.norm_sq);
    e.product_form = e.value * 0.5 * mu2;
  }
  return e;
}

}  // namespace qcrb
