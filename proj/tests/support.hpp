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

// Shared fixtures and test-only oracles. Nothing in here calls the code path
// it is used to check.

#pragma once

#include <cmath>
#include <cstdint>

#include "qcrb/states.hpp"

namespace qcrb::testing {

inline ComplexMatrix pauli_x() {
  ComplexMatrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

inline ComplexMatrix pauli_y() {
  ComplexMatrix m(2, 2);
  m << 0, Complex(0, -1), Complex(0, 1), 0;
  return m;
}

inline ComplexMatrix pauli_z() {
  ComplexMatrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

inline ComplexMatrix diag2(double a, double b) {
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

// The qubit smoke instance: H = sigma_x / 2, rho = diag(0.75, 0.25).
inline HermitianOperator qubit_h() { return HermitianOperator(0.5 * pauli_x()); }
inline DensityMatrix qubit_rho() { return make_density(diag2(0.75, 0.25)); }

// c = (sqrt(0.75) - 0.5) / 2, the single off-diagonal amplitude of [H, xi].
inline double qubit_c() { return (std::sqrt(0.75) - 0.5) / 2.0; }

// Integrates d xi / dt = -i [H, xi] with classical RK4.
inline ComplexMatrix rk4_evolve(const ComplexMatrix& h, ComplexMatrix x, double t, int steps) {
  const Complex mi(0.0, -1.0);
  auto f = [&](const ComplexMatrix& y) -> ComplexMatrix { return mi * (h * y - y * h); };
  const double dt = t / steps;
  for (int i = 0; i < steps; ++i) {
    const ComplexMatrix k1 = f(x);
    const ComplexMatrix k2 = f(x + 0.5 * dt * k1);
    const ComplexMatrix k3 = f(x + 0.5 * dt * k2);
    const ComplexMatrix k4 = f(x + dt * k3);
    x += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return x;
}

// Random Hermitian matrix with unit spectral norm from an independent stream.
inline ComplexMatrix random_hermitian_matrix(int dim, std::uint64_t seed) {
  return random_hamiltonian(dim, seed ^ 0x9e3779b97f4a7c15ull).matrix();
}

inline double rel_err(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

// Ginibre state supported on the lowest `support` levels of a dim-level space.
inline DensityMatrix low_lying_state(int dim, int support, std::uint64_t seed) {
  const DensityMatrix small = random_mixed(support, seed);
  ComplexMatrix m = ComplexMatrix::Zero(dim, dim);
  m.topLeftCorner(support, support) = small.matrix();
  return make_density(m);
}

}  // namespace qcrb::testing
