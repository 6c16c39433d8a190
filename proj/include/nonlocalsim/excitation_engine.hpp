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

// Exact reduced simulation of the approximate state identification.
//
// With the m pair registers starting in alpha^{(x)(m-1)} (x) input, every
// step of the protocol (controlled cyclic shifts of whole pairs, operations
// on S and C) maps the span of
//   alpha^{(x)m}  and  alpha ... e_t (position k) ... alpha,
// with {e_t} an orthonormal basis of the complement of alpha, to itself. The
// engine stores amplitudes in that basis, indexed (ref, config, s, c) with
// config 0 = all alpha and config 1 + k (D - 1) + t = excitation e_t at k.
//
// The Alice and Bob halves of each cyclic shift leave this subspace, so the
// engine applies their composition (the pair-wise shift) in one go. The
// register engine in protocols.hpp runs the halves separately.

#pragma once

#include <string>
#include <vector>

#include "nonlocalsim/linalg.hpp"
#include "nonlocalsim/model.hpp"

namespace nonlocalsim::protocols {

class ExcitationEngine {
 public:
  using Index = linalg::Index;
  using Vector = linalg::Vector;
  using Matrix = linalg::Matrix;

  ExcitationEngine(const Vector& alpha, Index copies, Index reference_dim,
                   Index max_amplitudes = model::default_amplitude_cap());

  Index copies() const noexcept { return copies_; }
  Index reference_dim() const noexcept { return reference_dim_; }
  Index pair_dim() const noexcept { return pair_dim_; }
  Index config_count() const noexcept { return 1 + copies_ * (pair_dim_ - 1); }
  Index dimension() const noexcept { return reference_dim_ * config_count() * copies_ * 2; }

  const Vector& alpha() const noexcept { return alpha_; }
  /// pair_dim x (pair_dim - 1), orthonormal columns spanning alpha's complement.
  const Matrix& complement_basis() const noexcept { return complement_; }

  static constexpr Index kAllAlpha = 0;
  Index excitation_config(Index position, Index type) const {
    return 1 + position * (pair_dim_ - 1) + type;
  }
  Index index(Index ref, Index config, Index s, Index c) const {
    return ((ref * config_count() + config) * copies_ + s) * 2 + c;
  }

  /// Input on R (x) AB, catalyst copies in alpha, S in |s>, C in |0>.
  Vector load(const Vector& input) const;

  void cycle(Vector& state, model::CycleDirection direction) const;
  /// Coherent measurement of S with {|s><s|, I - |s><s|} into C.
  void flag(Vector& state) const;
  /// Ideal measurement of the input pair with {|alpha><alpha|, I - ...} into C.
  void ideal_flag(Vector& state) const;
  /// Multiplies the C = 0 branch by `value` (Diag(value, 1) on C).
  void phase(Vector& state, linalg::Cplx value) const;

  /// Steps 2-8 of the protocol on loaded coordinates. Sends of S are charged
  /// to `ledger` (Alice = party 1, Bob = party 2) when given.
  void measure(Vector& state, model::CommLedger* ledger,
               std::vector<std::string>* transcript) const;

  Vector approx_measurement(const Vector& input, model::CommLedger* ledger = nullptr,
                            std::vector<std::string>* transcript = nullptr) const;
  Vector ideal_measurement(const Vector& input) const;

  /// Traces out the catalyst copies, S and C: density on R (x) AB.
  Matrix discard(const Vector& state) const;

  /// Amplitudes on the register layout R, A, B, A2, B2, ..., Am, Bm, S, C.
  Vector embed(const Vector& state) const;

 private:
  Vector alpha_;
  Matrix complement_;
  Index copies_;
  Index reference_dim_;
  Index pair_dim_;
  Index max_amplitudes_;
};

}  // namespace nonlocalsim::protocols
