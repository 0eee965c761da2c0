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

#include "qcrb/bounds.hpp"
#include "qcrb/oracle.hpp"
#include "support.hpp"

using namespace qcrb;
using namespace qcrb::testing;

namespace {

struct Instance {
  SqrtState xi;
  HermitianOperator h;
  DerivativeStack stack;
};

Instance make_instance(int dim, std::uint64_t seed, int n_max) {
  SqrtState xi = sqrt_embed(random_mixed(dim, seed));
  HermitianOperator h = random_hamiltonian(dim, seed + 5000);
  DerivativeStack st = derivative_stack(xi, h, n_max);
  return {xi, h, st};
}

}  // namespace

TEST(HermitianVector, round_trip_and_inner_product) {
  for (int s = 0; s < 20; ++s) {
    const int dim = 2 + s % 6;
    const ComplexMatrix a = random_hermitian_matrix(dim, s);
    const ComplexMatrix b = random_hermitian_matrix(dim, 100 + s);
    EXPECT_LE(max_abs_entry(oracle::vector_to_hermitian(oracle::hermitian_to_vector(a), dim) - a),
              1e-15);
    EXPECT_NEAR(oracle::hermitian_to_vector(a).dot(oracle::hermitian_to_vector(b)),
                (a * b).trace().real(), 1e-12);
  }
}

TEST(OrthogonalSystem, qubit_psi3_is_degenerate) {
  const DerivativeStack st = derivative_stack(sqrt_embed(qubit_rho()), qubit_h(), 5);
  const oracle::OrthogonalSystem sys = oracle::build_orthogonal_system(st);
  EXPECT_FALSE(oracle::psi_is_degenerate(sys, 1));
  EXPECT_TRUE(oracle::psi_is_degenerate(sys, 3));
  EXPECT_TRUE(oracle::psi_is_degenerate(sys, 5));
  EXPECT_EQ(sys.psi_norms.at(3), 0.0);
  EXPECT_THROW(oracle::psi_projection(sys, 5, 3), DegenerateGram);
}

TEST(OrthogonalSystem, qutrit_psi3_norm_is_n3) {
  for (int s = 0; s < 10; ++s) {
    const Instance in = make_instance(3, 10 + s, 3);
    const oracle::OrthogonalSystem sys = oracle::build_orthogonal_system(in.stack);
    const MomentTable t = moment_table(in.stack);
    ASSERT_FALSE(oracle::psi_is_degenerate(sys, 3));
    EXPECT_LE(rel_err(sys.psi_norms.at(3), gram_determinant(t, 3) / t.mu(2)), 1e-9);
  }
}

TEST(OrthogonalSystem, hat2_is_xi2_plus_mu2_xi) {
  for (int s = 0; s < 10; ++s) {
    const Instance in = make_instance(4, 30 + s, 2);
    const oracle::OrthogonalSystem sys = oracle::build_orthogonal_system(in.stack);
    const double mu2 = real_trace_product(in.stack[1], in.stack[1]);
    EXPECT_LE(max_abs_entry(sys.hat_vectors[2] - (in.stack[2] + mu2 * in.stack[0])), 1e-12);
    EXPECT_LE(max_abs_entry(sys.hat_vectors[0] - in.stack[0]), 1e-15);
  }
}

TEST(OrthogonalSystem, odd_hats_equal_psi_property) {
  for (int s = 0; s < 40; ++s) {
    const Instance in = make_instance(4 + s % 5, 60 + s, 7);
    const oracle::OrthogonalSystem sys = oracle::build_orthogonal_system(in.stack);
    for (int n = 1; n <= 7; n += 2) {
      EXPECT_EQ(sys.degenerate[static_cast<std::size_t>(n)], sys.psi_degenerate.at(n));
      const double scale = std::max(1.0, sys.raw_real[static_cast<std::size_t>(n)].norm());
      EXPECT_LE((sys.hat_real[static_cast<std::size_t>(n)] - sys.psi_real.at(n)).norm(),
                1e-9 * scale)
          << n;
    }
  }
}

TEST(OrthogonalSystem, reorthogonalization_is_idempotent) {
  for (int s = 0; s < 20; ++s) {
    const Instance in = make_instance(3 + s % 6, 90 + s, 6);
    const oracle::OrthogonalSystem sys = oracle::build_orthogonal_system(in.stack);
    const std::vector<RealVector> again = oracle::reorthogonalize(sys);
    for (std::size_t n = 0; n < again.size(); ++n) {
      const double scale = std::max(1.0, sys.raw_real[n].norm());
      EXPECT_LE((again[n] - sys.hat_real[n]).norm(), 1e-10 * scale) << n;
    }
  }
}

TEST(DirectBhattacharyya, bounded_by_skew_information) {
  for (int s = 0; s < 60; ++s) {
    const int dim = 3 + s % 6;
    const Instance in = make_instance(dim, 200 + s, 5);
    const HermitianOperator t_est = random_hamiltonian(dim, 300 + s);
    const oracle::OrthogonalSystem sys = oracle::build_orthogonal_system(in.stack);
    const double skew = stat_summary(t_est, in.xi).skew_second_kind;
    const double direct = oracle::direct_bhattacharyya(sys, t_est, in.xi, {1, 2, 3, 4, 5});
    EXPECT_LE(direct, skew + 1e-9);
    EXPECT_GE(direct, 0.0);
  }
}

TEST(DirectBhattacharyya, identity_and_shift) {
  const Instance in = make_instance(5, 7, 3);
  const oracle::OrthogonalSystem sys = oracle::build_orthogonal_system(in.stack);
  EXPECT_NEAR(oracle::direct_bhattacharyya(sys, HermitianOperator::identity(5), in.xi, {1, 2, 3}),
              0.0, 1e-15);
  const HermitianOperator t_est = random_hamiltonian(5, 8);
  const HermitianOperator shifted(t_est.matrix() + 2.5 * ComplexMatrix::Identity(5, 5));
  EXPECT_NEAR(oracle::direct_bhattacharyya(sys, t_est, in.xi, {1, 3}),
              oracle::direct_bhattacharyya(sys, shifted, in.xi, {1, 3}), 1e-13);
  EXPECT_THROW(oracle::direct_bhattacharyya(sys, t_est, in.xi, {5}), InvalidArgument);
}

TEST(MinVariance, equals_skew_minus_direct) {
  for (int s = 0; s < 40; ++s) {
    const int dim = 3 + s % 6;
    const Instance in = make_instance(dim, 400 + s, 4);
    const HermitianOperator t_est = random_hamiltonian(dim, 500 + s);
    const oracle::OrthogonalSystem sys = oracle::build_orthogonal_system(in.stack);
    const std::vector<int> orders{1, 2, 3, 4};
    const oracle::MinVarianceResult mv = oracle::min_variance_oracle(sys, t_est, in.xi, orders);
    const double skew = stat_summary(t_est, in.xi).skew_second_kind;
    const double direct = oracle::direct_bhattacharyya(sys, t_est, in.xi, orders);
    EXPECT_NEAR(mv.min_variance, 2.0 * skew - 2.0 * direct, 1e-10);
    EXPECT_GE(mv.min_variance, -1e-12);
  }
}

TEST(MinVariance, first_multiplier_for_conjugate_pair) {
  const ConjugatePair pair = truncated_conjugate_pair(32);
  const SqrtState xi = sqrt_embed(geometric_density(32, 0.2));
  const DerivativeStack st = derivative_stack(xi, pair.h, 1);
  const oracle::OrthogonalSystem sys = oracle::build_orthogonal_system(st);
  const oracle::MinVarianceResult mv = oracle::min_variance_oracle(sys, pair.t_est, xi, {1});
  const MomentTable t = moment_table(st);
  // lambda_1 = -U_1 / N_1 with U_1 = 1 and N_1 = mu_2.
  EXPECT_LE(rel_err(mv.lambdas.at(1), -1.0 / t.mu(2)), 1e-5);
}

TEST(CrossRoute, determinant_route_matches_oracle_property) {
  int compared = 0;
  for (int s = 0; s < 80; ++s) {
    const int dim = 3 + s % 8;
    const Instance in = make_instance(dim, 7000 + s, 7);
    const oracle::OrthogonalSystem sys = oracle::build_orthogonal_system(in.stack);
    const MomentTable t = moment_table(in.stack);
    for (int n = 1; n <= 7; n += 2) {
      const bool degenerate = is_degenerate_order(t, n);
      ASSERT_EQ(degenerate, oracle::psi_is_degenerate(sys, n)) << "dim " << dim << " n " << n;
      if (degenerate) continue;
      ++compared;
      EXPECT_LE(rel_err(normalizer(t, n), sys.psi_norms.at(n)), 1e-8);
      for (int k = 1; k < n; k += 2) {
        EXPECT_LE(rel_err(projection_coeff(t, n, k), oracle::psi_projection(sys, n, k)), 1e-8);
      }
    }
  }
  EXPECT_GT(compared, 250);
}

TEST(CrossRoute, u_recursion_matches_direct_contraction) {
  const ConjugatePair pair = truncated_conjugate_pair(32);
  for (std::uint64_t seed : {1u, 2u, 3u, 4u}) {
    const SqrtState xi = sqrt_embed(low_lying_state(32, 6, seed));
    const DerivativeStack st = derivative_stack(xi, pair.h, 5);
    const oracle::OrthogonalSystem sys = oracle::build_orthogonal_system(st);
    const auto u = u_recursion(moment_table(st), 5);
    for (int n : {1, 3, 5}) {
      ASSERT_TRUE(u.at(n).has_value());
      EXPECT_LE(rel_err(*u.at(n), oracle::psi_contraction(sys, pair.t_est, n)), 1e-5) << n;
    }
  }
}

TEST(CrossRoute, bound_matches_direct_for_conjugate_pair) {
  // With i[H, T] = I the odd contractions are estimator independent, so the
  // odd part of the direct sum times (DH^2 - dH^2) equals the bound.
  const ConjugatePair pair = truncated_conjugate_pair(32);
  const SqrtState xi = sqrt_embed(geometric_density(32, 0.2));
  const DerivativeStack st = derivative_stack(xi, pair.h, 5);
  const oracle::OrthogonalSystem sys = oracle::build_orthogonal_system(st);
  const BoundReport r = bound_of_order(moment_table(st), 5);
  const double wysi = stat_summary(pair.h, xi).wysi;
  EXPECT_LE(rel_err(oracle::direct_bhattacharyya(sys, pair.t_est, xi, {1, 3, 5}) * wysi,
                    r.cumulative_rhs),
            1e-5);
}
