// Copyright 2026 The seqtherm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>

#include "seqtherm/numerics.hpp"
#include "seqtherm/rng.hpp"

namespace seqtherm::testing {

inline ComplexMatrix random_hermitian(Eigen::Index d, std::uint64_t seed) {
  RngStream rng(seed, 17);
  ComplexMatrix g(d, d);
  for (Eigen::Index c = 0; c < d; ++c) {
    for (Eigen::Index r = 0; r < d; ++r) g(r, c) = Complex(rng.normal(), rng.normal());
  }
  return 0.5 * (g + g.adjoint());
}

inline DensityMatrix random_state(Eigen::Index d, std::uint64_t seed) {
  RngStream rng(seed, 29);
  ComplexMatrix g(d, d);
  for (Eigen::Index c = 0; c < d; ++c) {
    for (Eigen::Index r = 0; r < d; ++r) g(r, c) = Complex(rng.normal(), rng.normal());
  }
  ComplexMatrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  return DensityMatrix(rho);
}

}  // namespace seqtherm::testing
