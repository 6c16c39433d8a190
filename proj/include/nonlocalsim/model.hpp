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

// Registers owned by parties, global pure states over them, the gates and
// states the protocols are built from, and the communication ledger.
//
// Locality is enforced: a party may only touch registers it currently owns,
// and moving a register between parties is the only way to communicate.
// Every move is charged to a CommLedger.

#pragma once

#include <compare>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "nonlocalsim/linalg.hpp"

namespace nonlocalsim::model {

using linalg::Cplx;
using linalg::Index;
using linalg::Matrix;
using linalg::Vector;

/// Party 0 is the referee: analysis-only global operations, never a sender.
struct Party {
  int id = 0;
  friend constexpr auto operator<=>(Party, Party) = default;
};

inline constexpr Party kReferee{0};
inline constexpr Party kAlice{1};
inline constexpr Party kBob{2};
constexpr Party party(int i) { return Party{i}; }

std::string to_string(Party p);

class LocalityError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class LayoutError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class BudgetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr Index kDefaultAmplitudeCap = Index{1} << 24;

/// Cap from NONLOCALSIM_MAX_AMPLITUDES when set, else 2^24.
Index default_amplitude_cap();

/// Throws BudgetError when `dim` exceeds `cap`; `what` names the run.
void check_budget(Index dim, Index cap, const std::string& what);

struct Register {
  std::string label;
  Index dim = 2;
  Party owner;
};

class RegisterLayout {
 public:
  RegisterLayout() = default;
  explicit RegisterLayout(std::vector<Register> registers);

  const std::vector<Register>& registers() const noexcept { return registers_; }
  Index size() const noexcept { return static_cast<Index>(registers_.size()); }
  bool contains(std::string_view label) const;
  Index position(std::string_view label) const;
  const Register& at(std::string_view label) const;
  Index total_dim() const;
  linalg::Dims dims() const;

  void set_owner(std::string_view label, Party owner);
  RegisterLayout appended(std::span<const Register> more) const;

 private:
  std::vector<Register> registers_;
};

class PureState;
enum class CycleDirection { kForward, kInverse };

struct GateSpec {
  Matrix matrix;
  std::vector<std::string> targets;
  /// kReferee marks an analysis-only global gate (no ownership check).
  Party party = kReferee;
};

enum class QubitAccounting { kExact, kIntegral };

struct LedgerEvent {
  std::string step;
  std::string register_label;
  Party sender;
  Party receiver;
  double qubits = 0.0;
};

/// Forward means toward the higher-numbered party (Alice -> Bob).
class CommLedger {
 public:
  explicit CommLedger(QubitAccounting accounting = QubitAccounting::kExact)
      : accounting_(accounting) {}

  void record(std::string step, std::string register_label, Party from, Party to, Index dim);
  void merge(const CommLedger& other);

  double forward_qubits() const noexcept { return forward_; }
  double backward_qubits() const noexcept { return backward_; }
  double total_qubits() const noexcept { return forward_ + backward_; }
  /// Classical bits needed with free entanglement: two per qubit.
  double classical_bits() const noexcept { return 2.0 * total_qubits(); }
  QubitAccounting accounting() const noexcept { return accounting_; }
  const std::vector<LedgerEvent>& events() const noexcept { return events_; }

 private:
  QubitAccounting accounting_;
  double forward_ = 0.0;
  double backward_ = 0.0;
  std::vector<LedgerEvent> events_;
};

double register_qubits(Index dim, QubitAccounting accounting);

class PureState {
 public:
  /// Validates length against the layout and unit norm within 1e-10.
  PureState(RegisterLayout layout, Vector amplitudes);

  const RegisterLayout& layout() const noexcept { return layout_; }
  const Vector& amplitudes() const noexcept { return amplitudes_; }
  Index dim() const noexcept { return amplitudes_.size(); }

  friend PureState apply_local(PureState state, const GateSpec& gate);
  friend PureState apply_controlled_cycle(PureState state, std::string_view s_label,
                                          std::span<const std::string> cycle_labels, Party actor,
                                          CycleDirection direction);
  friend PureState send_register(PureState state, std::string_view label, Party from, Party to,
                                 CommLedger& ledger, std::string step);
  friend PureState adjoin(PureState state, std::span<const Register> registers,
                          const Vector& amplitudes, Index max_amplitudes);

 private:
  struct Unchecked {};
  PureState(Unchecked, RegisterLayout layout, Vector amplitudes)
      : layout_(std::move(layout)), amplitudes_(std::move(amplitudes)) {}

  RegisterLayout layout_;
  Vector amplitudes_;
};

// Named states and gates. A and B carry d+1 levels {|0>, ..., |d>}.

/// (|11> + ... + |dd>) / sqrt(d) on C^{d+1} (x) C^{d+1}.
Vector phi_vector(Index d);
/// (|Phi> - |00>) / sqrt(2), the -1 eigenvector of U.
Vector phi_minus_vector(Index d);
/// U = |00><Phi| + |Phi><00| + I - P with P the projector onto span{|00>, |Phi>}.
Matrix gate_u_matrix(Index d);

PureState make_phi(Index d, std::string a_label = "A", std::string b_label = "B");
PureState make_phi_minus(Index d, std::string a_label = "A", std::string b_label = "B");
GateSpec make_gate_u(Index d, std::string a_label = "A", std::string b_label = "B");
/// (1/sqrt(m)) sum_j |j>; the amplitude vector of the cycle-control register.
Vector make_uniform_s(Index m);
/// Computational basis vector |index> of length dim.
Vector basis_vector(Index dim, Index index);

/// Applies the gate on its target registers. Non-referee gates must own
/// every target.
PureState apply_local(PureState state, const GateSpec& gate);

/// Controlled cyclic shift |j>|psi_1 ... psi_m> -> |j>|psi_{1-j} ... psi_{m-j}>
/// (indices mod m): register k receives the old content of register k-j.
/// For m = 3 and control j = 1 the contents (x, y, z) become (z, x, y); for
/// j = 2 they become (y, z, x). kInverse undoes the shift.
PureState apply_controlled_cycle(PureState state, std::string_view s_label,
                                 std::span<const std::string> cycle_labels, Party actor,
                                 CycleDirection direction);

/// Unitary P (x) I + (I - P) (x) X on targets (x) flag: flag 0 inside range(P).
PureState coherent_flag(PureState state, const Matrix& projector,
                        std::span<const std::string> targets, std::string_view flag_label,
                        Party actor);

/// Moves ownership of a register; amplitudes are untouched.
PureState send_register(PureState state, std::string_view label, Party from, Party to,
                        CommLedger& ledger, std::string step);

/// Appends fresh registers in the given product state (least significant).
PureState adjoin(PureState state, std::span<const Register> registers, const Vector& amplitudes,
                 Index max_amplitudes = default_amplitude_cap());
PureState adjoin(PureState state, const PureState& other,
                 Index max_amplitudes = default_amplitude_cap());

linalg::Density reduced_density(const PureState& state, std::span<const std::string> keep);

}  // namespace nonlocalsim::model
