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

#include "nonlocalsim/model.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <limits>
#include <cstdlib>
#include <unordered_set>

namespace nonlocalsim::model {
namespace {

constexpr double kNormTol = 1e-10;

void require_owned(const RegisterLayout& layout, std::string_view label, Party actor) {
  if (actor == kReferee) return;
  const Register& reg = layout.at(label);
  if (reg.owner != actor) {
    throw LocalityError(to_string(actor) + " cannot act on register " + reg.label + " owned by " +
                        to_string(reg.owner));
  }
}

}  // namespace

std::string to_string(Party p) {
  switch (p.id) {
    case 0: return "Referee";
    case 1: return "Alice";
    case 2: return "Bob";
    default: return "Party(" + std::to_string(p.id) + ")";
  }
}

Index default_amplitude_cap() {
  const char* env = std::getenv("NONLOCALSIM_MAX_AMPLITUDES");
  if (env == nullptr) return kDefaultAmplitudeCap;
  const std::string_view text(env);
  long long value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || value <= 0) {
    return kDefaultAmplitudeCap;
  }
  return static_cast<Index>(value);
}

void check_budget(Index dim, Index cap, const std::string& what) {
  if (dim > cap || dim <= 0) {
    const bool saturated = dim <= 0 || dim == std::numeric_limits<Index>::max();
    throw BudgetError("amplitude budget exceeded for " + what + ": needs " +
                      (saturated ? std::string("more than 2^63") : std::to_string(dim)) +
                      " amplitudes, cap is " + std::to_string(cap));
  }
}

RegisterLayout::RegisterLayout(std::vector<Register> registers) : registers_(std::move(registers)) {
  std::unordered_set<std::string> seen;
  for (const auto& reg : registers_) {
    if (reg.dim < 2) throw LayoutError("register " + reg.label + " must have dim >= 2");
    if (!seen.insert(reg.label).second) throw LayoutError("duplicate register label " + reg.label);
  }
}

bool RegisterLayout::contains(std::string_view label) const {
  return std::any_of(registers_.begin(), registers_.end(),
                     [&](const Register& r) { return r.label == label; });
}

Index RegisterLayout::position(std::string_view label) const {
  for (std::size_t i = 0; i < registers_.size(); ++i) {
    if (registers_[i].label == label) return static_cast<Index>(i);
  }
  throw LayoutError("unknown register " + std::string(label));
}

const Register& RegisterLayout::at(std::string_view label) const {
  return registers_[position(label)];
}

Index RegisterLayout::total_dim() const { return linalg::product(dims()); }

linalg::Dims RegisterLayout::dims() const {
  linalg::Dims out;
  for (const auto& r : registers_) out.push_back(r.dim);
  return out;
}

void RegisterLayout::set_owner(std::string_view label, Party owner) {
  registers_[position(label)].owner = owner;
}

RegisterLayout RegisterLayout::appended(std::span<const Register> more) const {
  std::vector<Register> regs = registers_;
  regs.insert(regs.end(), more.begin(), more.end());
  return RegisterLayout(std::move(regs));
}

double register_qubits(Index dim, QubitAccounting accounting) {
  if (accounting == QubitAccounting::kIntegral) {
    return static_cast<double>(std::bit_width(static_cast<std::uint64_t>(dim - 1)));
  }
  return std::log2(static_cast<double>(dim));
}

void CommLedger::record(std::string step, std::string register_label, Party from, Party to,
                        Index dim) {
  const double q = register_qubits(dim, accounting_);
  if (from.id < to.id) {
    forward_ += q;
  } else {
    backward_ += q;
  }
  events_.push_back({std::move(step), std::move(register_label), from, to, q});
}

void CommLedger::merge(const CommLedger& other) {
  for (const auto& e : other.events_) {
    if (e.sender.id < e.receiver.id) {
      forward_ += e.qubits;
    } else {
      backward_ += e.qubits;
    }
    events_.push_back(e);
  }
}

PureState::PureState(RegisterLayout layout, Vector amplitudes)
    : layout_(std::move(layout)), amplitudes_(std::move(amplitudes)) {
  if (amplitudes_.size() != layout_.total_dim()) {
    throw linalg::DimensionError("amplitude count does not match register layout");
  }
  if (!amplitudes_.allFinite() || std::abs(amplitudes_.norm() - 1.0) > kNormTol) {
    throw linalg::InvalidStateError("pure state must have unit norm");
  }
}

Vector basis_vector(Index dim, Index index) {
  if (index < 0 || index >= dim) throw linalg::DimensionError("basis index out of range");
  Vector v = Vector::Zero(dim);
  v(index) = 1.0;
  return v;
}

Vector phi_vector(Index d) {
  if (d < 1) throw std::invalid_argument("phi: d must be >= 1");
  const Index n = d + 1;
  Vector v = Vector::Zero(n * n);
  for (Index i = 1; i <= d; ++i) v(i * n + i) = 1.0 / std::sqrt(static_cast<double>(d));
  return v;
}

Vector phi_minus_vector(Index d) {
  if (d < 1) throw std::invalid_argument("phi_minus: d must be >= 1");
  Vector v = phi_vector(d);
  v(0) = -1.0;
  return v / std::sqrt(2.0);
}

Matrix gate_u_matrix(Index d) {
  if (d < 1) throw std::invalid_argument("gate U: d must be >= 1");
  const Index dim = (d + 1) * (d + 1);
  const Vector zero = basis_vector(dim, 0);
  const Vector phi = phi_vector(d);
  const Matrix p = zero * zero.adjoint() + phi * phi.adjoint();
  return zero * phi.adjoint() + phi * zero.adjoint() + Matrix::Identity(dim, dim) - p;
}

PureState make_phi(Index d, std::string a_label, std::string b_label) {
  return PureState(RegisterLayout({{std::move(a_label), d + 1, kAlice}, {std::move(b_label), d + 1, kBob}}),
                   phi_vector(d));
}

PureState make_phi_minus(Index d, std::string a_label, std::string b_label) {
  return PureState(RegisterLayout({{std::move(a_label), d + 1, kAlice}, {std::move(b_label), d + 1, kBob}}),
                   phi_minus_vector(d));
}

GateSpec make_gate_u(Index d, std::string a_label, std::string b_label) {
  return GateSpec{gate_u_matrix(d), {std::move(a_label), std::move(b_label)}, kReferee};
}

Vector make_uniform_s(Index m) {
  if (m < 1) throw std::invalid_argument("uniform s: m must be >= 1");
  return Vector::Constant(m, 1.0 / std::sqrt(static_cast<double>(m)));
}

PureState apply_local(PureState state, const GateSpec& gate) {
  const RegisterLayout& layout = state.layout_;
  if (gate.targets.empty()) throw linalg::DimensionError("gate has no targets");
  const linalg::Dims full_strides = linalg::strides(layout.dims());
  std::vector<Index> positions;
  linalg::Dims target_dims;
  for (const auto& label : gate.targets) {
    require_owned(layout, label, gate.party);
    const Index pos = layout.position(label);
    if (std::find(positions.begin(), positions.end(), pos) != positions.end()) {
      throw linalg::DimensionError("gate lists register " + label + " twice");
    }
    positions.push_back(pos);
    target_dims.push_back(layout.registers()[pos].dim);
  }
  const Index gdim = linalg::product(target_dims);
  if (gate.matrix.rows() != gdim || gate.matrix.cols() != gdim) {
    throw linalg::DimensionError("gate matrix does not match target dimensions");
  }
  if ((gate.matrix.adjoint() * gate.matrix - Matrix::Identity(gdim, gdim)).cwiseAbs().maxCoeff() >
      kNormTol) {
    throw std::invalid_argument("gate matrix is not unitary");
  }

  // Offsets of each gate basis index (targets in gate order, first most
  // significant) and of each configuration of the untouched registers.
  std::vector<Index> gate_off(gdim, 0);
  for (Index g = 0; g < gdim; ++g) {
    Index rem = g, off = 0;
    for (Index t = static_cast<Index>(positions.size()) - 1; t >= 0; --t) {
      off += (rem % target_dims[t]) * full_strides[positions[t]];
      rem /= target_dims[t];
    }
    gate_off[g] = off;
  }
  std::vector<Index> rest;
  for (Index i = 0; i < layout.size(); ++i) {
    if (std::find(positions.begin(), positions.end(), i) == positions.end()) rest.push_back(i);
  }
  const Index rest_dim = state.dim() / gdim;
  std::vector<Index> rest_off(rest_dim, 0);
  for (Index r = 0; r < rest_dim; ++r) {
    Index rem = r, off = 0;
    for (Index t = static_cast<Index>(rest.size()) - 1; t >= 0; --t) {
      const Index dim = layout.registers()[rest[t]].dim;
      off += (rem % dim) * full_strides[rest[t]];
      rem /= dim;
    }
    rest_off[r] = off;
  }

  Matrix block(gdim, rest_dim);
  for (Index r = 0; r < rest_dim; ++r) {
    for (Index g = 0; g < gdim; ++g) block(g, r) = state.amplitudes_(rest_off[r] + gate_off[g]);
  }
  const Matrix out = gate.matrix * block;
  for (Index r = 0; r < rest_dim; ++r) {
    for (Index g = 0; g < gdim; ++g) state.amplitudes_(rest_off[r] + gate_off[g]) = out(g, r);
  }
  return state;
}

PureState apply_controlled_cycle(PureState state, std::string_view s_label,
                                 std::span<const std::string> cycle_labels, Party actor,
                                 CycleDirection direction) {
  const RegisterLayout& layout = state.layout_;
  const Index m = static_cast<Index>(cycle_labels.size());
  if (m < 1) throw linalg::DimensionError("controlled cycle needs at least one register");
  require_owned(layout, s_label, actor);
  const Index s_pos = layout.position(s_label);
  const Index s_dim = layout.registers()[s_pos].dim;
  if (s_dim != m) {
    throw linalg::DimensionError("control register dimension must equal the cycle length");
  }
  const linalg::Dims full_strides = linalg::strides(layout.dims());
  std::vector<Index> cyc_pos;
  Index q = 0;
  for (const auto& label : cycle_labels) {
    require_owned(layout, label, actor);
    const Index pos = layout.position(label);
    if (pos == s_pos) throw linalg::DimensionError("control register cannot be cycled");
    const Index dim = layout.registers()[pos].dim;
    if (q == 0) q = dim;
    if (dim != q) throw linalg::DimensionError("cycled registers must have equal dimensions");
    cyc_pos.push_back(pos);
  }

  // Displacement of each joint cycled configuration (first register most
  // significant) under control value j, tabulated when small enough.
  const bool forward = direction == CycleDirection::kForward;
  const double joint_size = std::pow(static_cast<double>(q), static_cast<double>(m));
  const bool tabulate = joint_size * static_cast<double>(m) <= static_cast<double>(Index{1} << 22);
  std::vector<Index> weight(layout.size(), 0);
  std::vector<Index> shift;
  Index joint = 0;
  if (tabulate) {
    joint = static_cast<Index>(joint_size);
    for (Index k = m - 1, w = 1; k >= 0; --k, w *= q) weight[cyc_pos[k]] = w;
    shift.assign(static_cast<std::size_t>(m * joint), 0);
    std::vector<Index> cd(m, 0);
    for (Index c = 0; c < joint; ++c) {
      for (Index k = m - 1, rem = c; k >= 0; --k, rem /= q) cd[k] = rem % q;
      for (Index j = 1; j < m; ++j) {
        Index delta = 0;
        for (Index k = 0; k < m; ++k) {
          const Index src = forward ? (k - j + m) % m : (k + j) % m;
          delta += (cd[src] - cd[k]) * full_strides[cyc_pos[k]];
        }
        shift[static_cast<std::size_t>(j * joint + c)] = delta;
      }
    }
  }

  // Walk the basis with an odometer over all register digits.
  const linalg::Dims dims = layout.dims();
  const Index regs = static_cast<Index>(dims.size());
  std::vector<Index> digit(regs, 0);
  Index c = 0;
  const Index n = state.dim();
  Vector out(n);
  for (Index i = 0; i < n; ++i) {
    const Index j = digit[s_pos];
    Index target = i;
    if (j != 0) {
      if (tabulate) {
        target += shift[static_cast<std::size_t>(j * joint + c)];
      } else {
        for (Index k = 0; k < m; ++k) {
          const Index src = forward ? (k - j + m) % m : (k + j) % m;
          target += (digit[cyc_pos[src]] - digit[cyc_pos[k]]) * full_strides[cyc_pos[k]];
        }
      }
    }
    out(target) = state.amplitudes_(i);
    for (Index r = regs - 1; r >= 0; --r) {
      if (++digit[r] < dims[r]) {
        c += weight[r];
        break;
      }
      c -= (dims[r] - 1) * weight[r];
      digit[r] = 0;
    }
  }
  state.amplitudes_ = std::move(out);
  return state;
}

PureState coherent_flag(PureState state, const Matrix& projector,
                        std::span<const std::string> targets, std::string_view flag_label,
                        Party actor) {
  const Index pdim = projector.rows();
  if (projector.cols() != pdim) throw linalg::DimensionError("projector must be square");
  if ((projector * projector - projector).cwiseAbs().maxCoeff() > kNormTol ||
      (projector - projector.adjoint()).cwiseAbs().maxCoeff() > kNormTol) {
    throw std::invalid_argument("coherent_flag: operator is not an orthogonal projector");
  }
  if (state.layout().at(flag_label).dim != 2) {
    throw linalg::DimensionError("flag register must be a qubit");
  }
  Matrix x(2, 2);
  x << 0, 1, 1, 0;
  const Matrix id = Matrix::Identity(pdim, pdim);
  GateSpec gate;
  gate.matrix = linalg::tensor_product(projector, Matrix::Identity(2, 2)) +
                linalg::tensor_product(Matrix(id - projector), x);
  gate.targets.assign(targets.begin(), targets.end());
  gate.targets.emplace_back(flag_label);
  gate.party = actor;
  return apply_local(std::move(state), gate);
}

PureState send_register(PureState state, std::string_view label, Party from, Party to,
                        CommLedger& ledger, std::string step) {
  if (from == kReferee || to == kReferee) {
    throw LocalityError("the referee does not send or receive registers");
  }
  if (from == to) throw LocalityError("sender and receiver are the same party");
  const Register& reg = state.layout_.at(label);
  if (reg.owner != from) {
    throw LocalityError(to_string(from) + " does not own register " + reg.label);
  }
  ledger.record(std::move(step), reg.label, from, to, reg.dim);
  state.layout_.set_owner(label, to);
  return state;
}

PureState adjoin(PureState state, std::span<const Register> registers, const Vector& amplitudes,
                 Index max_amplitudes) {
  for (const auto& reg : registers) {
    if (state.layout_.contains(reg.label)) {
      throw LayoutError("register label " + reg.label + " already in use");
    }
  }
  RegisterLayout grown = state.layout_.appended(registers);
  Index extra = 1;
  for (const auto& reg : registers) extra *= reg.dim;
  if (amplitudes.size() != extra) throw linalg::DimensionError("adjoined amplitudes do not match registers");
  if (std::abs(amplitudes.norm() - 1.0) > kNormTol) {
    throw linalg::InvalidStateError("adjoined state must have unit norm");
  }
  check_budget(grown.total_dim(), max_amplitudes, "adjoin");
  Vector combined = linalg::tensor_product(state.amplitudes_, amplitudes);
  return PureState(PureState::Unchecked{}, std::move(grown), std::move(combined));
}

PureState adjoin(PureState state, const PureState& other, Index max_amplitudes) {
  return adjoin(std::move(state), other.layout().registers(), other.amplitudes(), max_amplitudes);
}

linalg::Density reduced_density(const PureState& state, std::span<const std::string> keep) {
  std::vector<Index> positions;
  for (const auto& label : keep) positions.push_back(state.layout().position(label));
  return linalg::reduced_density(state.amplitudes(), state.layout().dims(), positions);
}

}  // namespace nonlocalsim::model
