// Copyright 2026 The nonlocalsim Authors
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
#include <random>

#include "nonlocalsim/linalg.hpp"

namespace nonlocalsim::random {

using Rng = std::mt19937_64;

/// Independent stream for trial `index` of a seeded sweep.
inline Rng trial_rng(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return Rng(seq);
}

inline linalg::Vector gaussian_vector(linalg::Index dim, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  linalg::Vector v(dim);
  for (linalg::Index i = 0; i < dim; ++i) {
    const double re = normal(rng);
    const double im = normal(rng);
    v(i) = {re, im};
  }
  return v;
}

/// Haar-random pure state from normalized complex Gaussian amplitudes.
inline linalg::Vector random_pure_state(linalg::Index dim, Rng& rng) {
  linalg::Vector v = gaussian_vector(dim, rng);
  return v / v.norm();
}

/// Random mixed state G G^dagger / tr, with G a dim x rank Gaussian matrix.
inline linalg::Matrix random_density_matrix(linalg::Index dim, linalg::Index rank, Rng& rng) {
  linalg::Matrix g(dim, rank);
  for (linalg::Index c = 0; c < rank; ++c) g.col(c) = gaussian_vector(dim, rng);
  linalg::Matrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  return (rho + rho.adjoint()) / 2.0;
}

inline double uniform(Rng& rng, double lo = 0.0, double hi = 1.0) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

}  // namespace nonlocalsim::random
