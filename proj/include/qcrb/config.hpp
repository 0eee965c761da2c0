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

namespace qcrb {

inline constexpr const char* kVersion = "0.1.0";

// Hermiticity defect accepted at construction, relative to max(|entry|, 1).
inline constexpr double kHermitianTolerance = 1e-12;

// Eigenvalues in [-kPsdClamp, kPsdClamp] are set to zero; below -kPsdClamp the
// matrix is rejected. Absolute, for unit-trace matrices.
inline constexpr double kPsdClamp = 1e-12;

// Accepted |tr(rho) - 1| before renormalization.
inline constexpr double kTraceTolerance = 1e-8;

// Relative imaginary residue on a trace of Hermitian products that aborts.
inline constexpr double kImaginaryResidueTolerance = 1e-10;

// Shared by the determinant route and the Gram-Schmidt oracle: an odd order n
// is degenerate when  D_2n <= kDegeneracyTolerance * prod(diag of the Gram
// matrix), i.e. when the Hadamard ratio of the odd-derivative Gram matrix
// falls below this value. Both routes must use the same number.
inline constexpr double kDegeneracyTolerance = 1e-10;

}  // namespace qcrb
