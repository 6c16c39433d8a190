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

// Executable protocols over the register model: the ideal and approximate
// coherent state identification, the gate simulation built from them, the
// permutation test, the r-eigenvalue generalization and the k-party variant.

#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "nonlocalsim/linalg.hpp"
#include "nonlocalsim/model.hpp"

namespace nonlocalsim::protocols {

using linalg::Cplx;
using linalg::Index;
using linalg::Matrix;
using linalg::Vector;

enum class Mode { kApprox, kIdeal };

/// kRegister runs every step on the full register layout with ownership
/// checks. kExcitation runs the same step sequence on the exact invariant
/// subspace spanned by alpha^{(x)m} and the single-excitation states, which
/// keeps large m tractable (see ExcitationEngine).
enum class Engine { kRegister, kExcitation };

enum class SymmetricVariant { kCyclic, kFull };

class DegenerateSpectrumError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct RunOptions {
  Index max_amplitudes = model::default_amplitude_cap();
  model::QubitAccounting accounting = model::QubitAccounting::kExact;
  Engine engine = Engine::kRegister;
};

struct ProtocolResult {
  std::optional<model::PureState> final_pure;
  std::optional<linalg::Density> final_density;
  model::CommLedger ledger;
  std::vector<std::string> transcript;
};

/// The state to identify. Its registers name the input registers it is
/// tested against; each register's owner is the party holding that share.
struct MeasurementTarget {
  model::PureState alpha;
};

inline constexpr const char* kControlLabel = "S";
inline constexpr const char* kFlagLabel = "C";

/// Label of catalyst copy `copy` (2..m) of register `base`, e.g. "A2".
std::string catalyst_label(const std::string& base, Index copy, const std::string& prefix = "");

/// Target on registers A (Alice) and B (Bob) of dimension d+1 holding |phi_->.
MeasurementTarget phi_minus_target(Index d);

/// Input registers (references first, then the target registers in order)
/// with the references owned by the referee.
model::PureState make_input(const Vector& amplitudes, const linalg::Dims& reference_dims,
                            const MeasurementTarget& target);

ProtocolResult run_ideal_measurement(const model::PureState& input, const MeasurementTarget& target,
                                     const RunOptions& options = {});

/// Output keeps every register: input, catalyst copies, S and the flag C.
ProtocolResult run_approx_measurement(const model::PureState& input,
                                      const MeasurementTarget& target, Index m,
                                      const RunOptions& options = {});

/// Simulates U on the trailing A, B registers and returns the state of the
/// input registers after the ancillas, S and C are discarded.
ProtocolResult run_w(const model::PureState& input, Index d, Index m, Mode mode,
                     const RunOptions& options = {});

/// Probability of the symmetric outcome on alpha^{(x)(m-1)} (x) beta.
double run_symmetric_test(const Vector& alpha, const Vector& beta, Index m,
                          SymmetricVariant variant);

struct Eigenpair {
  Cplx value;
  Vector vector;
};

/// Eigenpairs with |lambda - 1| > threshold of a unitary. Throws
/// DegenerateSpectrumError when two of them share an eigenvalue.
std::vector<Eigenpair> nontrivial_eigenpairs(const Matrix& unitary, double threshold = 1e-8);

/// Tests the input against each nontrivial eigenvector in turn, applies the
/// eigenvalue to the flag and undoes the test. Supply `eigenpairs` when the
/// nontrivial spectrum is degenerate.
ProtocolResult run_generalized_sim(const model::GateSpec& gate, const model::PureState& input,
                                   Index m_per_test, Mode mode, const RunOptions& options = {},
                                   std::span<const Eigenpair> eigenpairs = {},
                                   double threshold = 1e-8);

/// Circulating-S variant: party 1 prepares S, S visits every party, the
/// last party holds the answer, then the circulation is reversed.
ProtocolResult run_kparty_measurement(const model::PureState& input,
                                      const MeasurementTarget& target, Index m,
                                      const RunOptions& options = {});

}  // namespace nonlocalsim::protocols
