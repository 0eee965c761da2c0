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

#include "gtest/gtest.h"

#include "qcrb/statmoments.hpp"
#include "support.hpp"

using namespace qcrb;
using namespace qcrb::testing;

namespace {

// Commuting pair: both diagonal.
struct Commuting {
  HermitianOperator h{diag2(0.3, -0.7)};
  SqrtState xi = sqrt_embed(qubit_rho());
};

}  // namespace

TEST(Expectation, examples) {
  const SqrtState xi = sqrt_embed(qubit_rho());
  EXPECT_NEAR(expectation(HermitianOperator(pauli_z()), xi), 0.5, 1e-15);
  EXPECT_NEAR(expectation(HermitianOperator::identity(2), xi), 1.0, 1e-15);
  EXPECT_NEAR(expectation(qubit_h(), xi), 0.0, 1e-15);
  EXPECT_THROW(expectation(HermitianOperator::identity(3), xi), DimensionMismatch);
}

TEST(Expectation, matches_trace_with_rho) {
  for (int s = 0; s < 20; ++s) {
    const SqrtState xi = sqrt_embed(random_mixed(5, s));
    const HermitianOperator x = random_hamiltonian(5, 100 + s);
    EXPECT_NEAR(expectation(x, xi), (x.matrix() * xi.rho()).trace().real(), 1e-12);
  }
}

TEST(StatSummary, qubit_values) {
  const StatSummary s = stat_summary(qubit_h(), sqrt_embed(qubit_rho()));
  const double c = qubit_c();
  EXPECT_NEAR(s.mean, 0.0, 1e-15);
  EXPECT_NEAR(s.variance, 0.25, 1e-15);
  EXPECT_NEAR(s.delta_sq, 0.21650635094610965, 1e-15);  // sqrt(0.75) * 0.5 / 2
  EXPECT_NEAR(s.wysi, c * c, 1e-15);
  EXPECT_NEAR(s.wysi, 0.033493649053890345, 1e-15);
  EXPECT_NEAR(s.wysi_commutator, s.wysi, 1e-15);
  EXPECT_NEAR(s.skew_second_kind, 0.25 + 0.21650635094610965, 1e-15);
}

TEST(StatSummary, pure_state_and_constant_observable) {
  const SqrtState pure = sqrt_embed(random_pure(4, 12));
  const StatSummary s = stat_summary(random_hamiltonian(4, 13), pure);
  EXPECT_NEAR(s.delta_sq, 0.0, 1e-12);
  EXPECT_NEAR(s.wysi, s.variance, 1e-12);

  const StatSummary id = stat_summary(HermitianOperator::identity(4), sqrt_embed(random_mixed(4, 1)));
  EXPECT_NEAR(id.variance, 0.0, 1e-14);
  EXPECT_NEAR(id.delta_sq, 0.0, 1e-14);
  EXPECT_NEAR(id.wysi, 0.0, 1e-14);
}

TEST(StatSummary, wysi_dual_formula_property) {
  for (int dim = 2; dim <= 8; ++dim) {
    for (int s = 0; s < 40; ++s) {
      const SqrtState xi = sqrt_embed(random_mixed(dim, 900 + 50 * dim + s));
      const StatSummary st = stat_summary(random_hamiltonian(dim, 3 * s + dim), xi);
      EXPECT_NEAR(st.wysi, st.wysi_commutator, 1e-10);
      EXPECT_GE(st.wysi, -1e-10);
      EXPECT_GE(st.variance, 0.0);
    }
  }
}

TEST(StatSummary, pure_delta_vanishes_property) {
  for (int s = 0; s < 100; ++s) {
    const int dim = 2 + s % 7;
    const SqrtState xi = sqrt_embed(random_pure(dim, 70 + s));
    EXPECT_LE(std::abs(stat_summary(random_hamiltonian(dim, s), xi).delta_sq), 1e-11);
  }
}

TEST(DerivativeStack, qubit_vectors) {
  const DerivativeStack st = derivative_stack(sqrt_embed(qubit_rho()), qubit_h(), 3);
  const double c = qubit_c();
  ComplexMatrix k(2, 2);
  k << 0, -c, c, 0;
  EXPECT_LE(max_abs_entry(st[1] - (-kI) * k), 1e-15);
  EXPECT_LE(max_abs_entry(st[2] + diag2(c, -c)), 1e-15);
  EXPECT_LE(max_abs_entry(st[3] - kI * k), 1e-15);
  EXPECT_THROW(derivative_stack(sqrt_embed(qubit_rho()), qubit_h(), 0), InvalidArgument);
}

TEST(DerivativeStack, first_derivative_uses_uncentered_h) {
  const SqrtState xi = sqrt_embed(random_mixed(4, 5));
  const HermitianOperator h = random_hamiltonian(4, 6);
  const DerivativeStack st = derivative_stack(xi, h, 1);
  EXPECT_LE(max_abs_entry(st[1] - (-kI) * commutator(h, xi.matrix())), 1e-14);
}

TEST(DerivativeStack, commuting_pair_is_stationary) {
  Commuting c;
  const DerivativeStack st = derivative_stack(c.xi, c.h, 5);
  for (int n = 1; n <= 5; ++n) EXPECT_LE(max_abs_entry(st[n]), 1e-15);
}

TEST(DerivativeStack, matches_central_difference) {
  for (int s = 0; s < 5; ++s) {
    const SqrtState xi = sqrt_embed(random_mixed(4, 40 + s));
    const HermitianOperator h = random_hamiltonian(4, 50 + s);
    const double step = 1e-5;
    const ComplexMatrix fd =
        (unitary_evolve(h, xi.matrix(), step) - unitary_evolve(h, xi.matrix(), -step)) / (2 * step);
    EXPECT_LE(max_abs_entry(derivative_stack(xi, h, 1)[1] - fd), 1e-8);
  }
}

TEST(DerivativeStack, vectors_are_hermitian_and_consecutive_orthogonal) {
  for (int s = 0; s < 20; ++s) {
    const int dim = 2 + s % 7;
    const DerivativeStack st =
        derivative_stack(sqrt_embed(random_mixed(dim, s)), random_hamiltonian(dim, 500 + s), 6);
    for (int n = 0; n < 6; ++n) {
      EXPECT_LE(qcrb::hermiticity_defect(st[n]), 1e-10);
      EXPECT_LE(std::abs(real_trace_product(st[n], st[n + 1])), 1e-10);
    }
  }
}

TEST(MomentTable, qubit_values) {
  const MomentTable t = moment_table(derivative_stack(sqrt_embed(qubit_rho()), qubit_h(), 3));
  const double c = qubit_c();
  EXPECT_NEAR(t.mu(0), 1.0, 1e-15);
  for (int k : {2, 4, 6}) EXPECT_NEAR(t.mu(k), 2 * c * c, 1e-15);
  EXPECT_NEAR(t.mu(2), 0.0669872981077807, 1e-15);
  EXPECT_THROW(t.mu(8), MissingMoment);
  EXPECT_THROW(t.mu(3), MissingMoment);
}

TEST(MomentTable, mu2_is_twice_wysi) {
  for (int s = 0; s < 30; ++s) {
    const int dim = 2 + s % 7;
    const SqrtState xi = sqrt_embed(random_mixed(dim, 700 + s));
    const HermitianOperator h = random_hamiltonian(dim, 800 + s);
    const MomentTable t = moment_table(derivative_stack(xi, h, 1));
    EXPECT_NEAR(t.mu(2), 2.0 * stat_summary(h, xi).wysi, 1e-10);
  }
}

TEST(MomentTable, commuting_pair_has_zero_moments) {
  Commuting c;
  const MomentTable t = moment_table(derivative_stack(c.xi, c.h, 3));
  for (int k : {2, 4, 6}) EXPECT_EQ(t.mu(k), 0.0);
}

TEST(MomentTable, sign_law_property) {
  for (int s = 0; s < 50; ++s) {
    const int dim = 3 + s % 6;
    const MomentTable t = moment_table(
        derivative_stack(sqrt_embed(random_mixed(dim, 60 + s)), random_hamiltonian(dim, 61 + s), 6));
    for (int r = 0; r <= 6; ++r) {
      for (int q = 0; q <= 6; ++q) {
        if ((r + q) % 2 == 1) {
          EXPECT_LE(std::abs(t.cross(r, q)), 1e-10);
        } else if ((r + q) / 2 <= 6) {
          const double sign = ((r - q) / 2) % 2 == 0 ? 1.0 : -1.0;
          EXPECT_LE(rel_err(t.cross(r, q), sign * t.mu(r + q)), 1e-9) << r << "," << q;
        }
      }
    }
  }
}

TEST(MomentTable, synthetic_tables_follow_the_sign_law) {
  const MomentTable t = MomentTable::from_moments({1.0, 2.0, 5.0, 14.0});
  EXPECT_EQ(t.max_order(), 3);
  EXPECT_EQ(t.cross(3, 1), -5.0);
  EXPECT_EQ(t.cross(1, 1), 2.0);
  EXPECT_EQ(t.cross(2, 0), -2.0);
  EXPECT_EQ(t.cross(1, 2), 0.0);
}

TEST(MomentTable, invariant_along_evolution_property) {
  for (int s = 0; s < 20; ++s) {
    const int dim = 2 + s % 7;
    const SqrtState xi = sqrt_embed(random_mixed(dim, 3000 + s));
    const HermitianOperator h = random_hamiltonian(dim, 3100 + s);
    const MomentTable t0 = moment_table(derivative_stack(xi, h, 5));
    for (double t : {0.3, 1.7}) {
      const MomentTable tt = moment_table(derivative_stack(evolve(xi, h, t), h, 5));
      for (int n = 1; n <= 5; ++n) EXPECT_LE(rel_err(t0.mu(2 * n), tt.mu(2 * n)), 1e-8);
    }
  }
}

TEST(ClosedFormMoments, qubit_and_commuting) {
  const double c = qubit_c();
  const auto q = closed_form_moments(sqrt_embed(qubit_rho()), qubit_h());
  for (double v : q) EXPECT_NEAR(v, 2 * c * c, 1e-14);
  Commuting cm;
  for (double v : closed_form_moments(cm.xi, cm.h)) EXPECT_NEAR(v, 0.0, 1e-15);
}

TEST(ClosedFormMoments, agrees_with_derivative_norms) {
  for (int s = 0; s < 40; ++s) {
    const int dim = 3 + s % 6;
    const SqrtState xi = sqrt_embed(random_mixed(dim, 11 * s + 1));
    const HermitianOperator h = random_hamiltonian(dim, 11 * s + 2);
    const auto cf = closed_form_moments(xi, h);
    const MomentTable t = moment_table(derivative_stack(xi, h, 3));
    EXPECT_LE(rel_err(cf[0], t.mu(2)), 1e-9);
    EXPECT_LE(rel_err(cf[1], t.mu(4)), 1e-9);
    EXPECT_LE(rel_err(cf[2], t.mu(6)), 1e-9);
  }
}

TEST(FisherMetric, examples) {
  const double c = qubit_c();
  EXPECT_NEAR(fisher_metric_scalar(derivative_stack(sqrt_embed(qubit_rho()), qubit_h(), 1)),
              4 * c * c, 1e-15);
  EXPECT_NEAR(4 * c * c, 0.1339745962155614, 1e-15);
  Commuting cm;
  EXPECT_EQ(fisher_metric_scalar(derivative_stack(cm.xi, cm.h, 1)), 0.0);

  // Pure states: G = 4 Delta H^2.
  const SqrtState pure = sqrt_embed(random_pure(5, 4));
  const HermitianOperator h = random_hamiltonian(5, 9);
  EXPECT_NEAR(fisher_metric_scalar(derivative_stack(pure, h, 1)), 4 * stat_summary(h, pure).variance,
              1e-11);
}
