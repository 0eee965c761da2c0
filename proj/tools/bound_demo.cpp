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

// Prints the cumulative bound through orders 1, 3, 5, 7 next to the actual
// order-1 product for a truncated oscillator, time estimated with the
// position operator. Thermal states are Gaussian and every correction
// beyond order 1 vanishes; mixtures of the ground and second excited level
// are not, and the higher orders tighten the bound.

#include <cstdio>
#include <string>
#include <vector>

#include "qcrb/bounds.hpp"

namespace {

void row(const char* label, const qcrb::DensityMatrix& rho, const qcrb::ConjugatePair& pair) {
  const qcrb::SqrtState xi = qcrb::sqrt_embed(rho);
  const qcrb::MomentTable table = qcrb::moment_table(qcrb::derivative_stack(xi, pair.h, 7));
  const qcrb::BoundReport r = qcrb::bound_of_order(table, 7);
  std::string degenerate;
  for (int n : r.degenerate_orders) degenerate += std::to_string(n) + " ";
  std::printf("%-14s %12.8f %12.8f %12.8f %12.8f %12.8f %s%s\n", label,
              qcrb::order1_product(rho, pair).product, r.cumulative.at(1), r.cumulative.at(3),
              r.cumulative.at(5), r.cumulative.at(7), degenerate.c_str(),
              qcrb::boundary_safe(rho, pair, 1e-8) ? "" : "(boundary)");
}

}  // namespace

int main() {
  const int dim = 32;
  const qcrb::ConjugatePair pair = qcrb::truncated_conjugate_pair(dim);
  std::printf("%-14s %12s %12s %12s %12s %12s %s\n", "state", "order1", "rhs(1)", "rhs(3)",
              "rhs(5)", "rhs(7)", "degenerate");
  char label[32];
  for (double ratio : {0.05, 0.2}) {
    std::snprintf(label, sizeof label, "thermal %.2f", ratio);
    row(label, qcrb::geometric_density(dim, ratio), pair);
  }
  for (double p : {0.9, 0.7, 0.5, 0.3, 0.1}) {
    std::vector<double> w(dim, 0.0);
    w[0] = p;
    w[2] = 1.0 - p;
    std::snprintf(label, sizeof label, "fock0/2 %.1f", p);
    row(label, qcrb::make_diagonal_density(w), pair);
  }
  return 0;
}
