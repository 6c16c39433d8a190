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

#include "nonlocalsim/protocols.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "nonlocalsim/excitation_engine.hpp"

namespace nonlocalsim::protocols {
namespace {

using model::CommLedger;
using model::CycleDirection;
using model::Party;
using model::PureState;
using model::Register;

constexpr double kEigenTol = 1e-8;

// One coherent state identification on the register layout: the parties in
// `parties` each hold the registers in the matching `cycles` entry (input
// share first, then catalyst copies 2..m). S starts with parties.front()
// and the answer lands with parties.back().
struct Circulation {
  std::vector<Party> parties;
  std::vector<std::vector<std::string>> cycles;
  std::string s_label;
  std::string c_label;
  Index m = 0;
};

std::string step_name(const std::string& prefix, const std::string& text) {
  return prefix.empty() ? text : prefix + ": " + text;
}

PureState circulate(PureState state, const Circulation& circ, bool fresh, CommLedger& ledger,
                    std::vector<std::string>& transcript, Index cap, const std::string& prefix) {
  const Party first = circ.parties.front();
  const Party holder = circ.parties.back();
  const auto k = circ.parties.size();
  if (fresh) {
    const Register s_reg{circ.s_label, circ.m, first};
    state = model::adjoin(std::move(state), std::span(&s_reg, 1), model::make_uniform_s(circ.m), cap);
    transcript.push_back(step_name(prefix, model::to_string(first) + " prepares S in |s>"));
  }
  for (std::size_t i = 0; i < k; ++i) {
    state = model::apply_controlled_cycle(std::move(state), circ.s_label, circ.cycles[i],
                                          circ.parties[i], CycleDirection::kForward);
    transcript.push_back(step_name(prefix, model::to_string(circ.parties[i]) +
                                               " applies controlled cycle to S and its shares"));
    if (i + 1 < k && circ.parties[i] != circ.parties[i + 1]) {
      const std::string text = model::to_string(circ.parties[i]) + " sends S to " +
                               model::to_string(circ.parties[i + 1]);
      state = model::send_register(std::move(state), circ.s_label, circ.parties[i],
                                   circ.parties[i + 1], ledger, step_name(prefix, text));
      transcript.push_back(step_name(prefix, text));
    }
  }
  if (fresh) {
    const Register c_reg{circ.c_label, 2, holder};
    state = model::adjoin(std::move(state), std::span(&c_reg, 1), model::basis_vector(2, 0), cap);
  }
  const Vector s = model::make_uniform_s(circ.m);
  const Matrix s_proj = s * s.adjoint();
  const std::vector<std::string> s_target{circ.s_label};
  state = model::coherent_flag(std::move(state), s_proj, s_target, circ.c_label, holder);
  transcript.push_back(step_name(prefix, model::to_string(holder) + " coherently measures S into C"));
  for (std::size_t step = 0; step < k; ++step) {
    const std::size_t i = k - 1 - step;
    state = model::apply_controlled_cycle(std::move(state), circ.s_label, circ.cycles[i],
                                          circ.parties[i], CycleDirection::kInverse);
    transcript.push_back(step_name(prefix, model::to_string(circ.parties[i]) +
                                               " applies inverse cycle to S and its shares"));
    if (i > 0 && circ.parties[i] != circ.parties[i - 1]) {
      const std::string text = model::to_string(circ.parties[i]) + " sends S to " +
                               model::to_string(circ.parties[i - 1]);
      state = model::send_register(std::move(state), circ.s_label, circ.parties[i],
                                   circ.parties[i - 1], ledger, step_name(prefix, text));
      transcript.push_back(step_name(prefix, text));
    }
  }
  return state;
}

// Labels and owners of the registers a test acts on, checked against the input.
std::vector<Register> target_registers(const PureState& input,
                                       const std::vector<std::string>& labels) {
  std::vector<Register> regs;
  for (const auto& label : labels) regs.push_back(input.layout().at(label));
  return regs;
}

void check_input(const PureState& input, const MeasurementTarget& target) {
  const auto& in = input.layout().registers();
  const auto& tg = target.alpha.layout().registers();
  if (in.size() < tg.size()) throw linalg::DimensionError("input lacks the target registers");
  const std::size_t offset = in.size() - tg.size();
  for (std::size_t i = 0; i < tg.size(); ++i) {
    const Register& a = in[offset + i];
    const Register& b = tg[i];
    if (a.label != b.label || a.dim != b.dim) {
      throw linalg::DimensionError("input must end with the target registers (" + b.label + ")");
    }
    if (a.owner != b.owner) {
      throw model::LayoutError("input register " + a.label + " has a different owner than the target");
    }
  }
}

Circulation make_circulation(const std::vector<Register>& targets, Index m, const std::string& prefix) {
  Circulation circ;
  circ.m = m;
  circ.s_label = prefix + kControlLabel;
  circ.c_label = prefix + kFlagLabel;
  for (const auto& reg : targets) {
    circ.parties.push_back(reg.owner);
    std::vector<std::string> cycle{reg.label};
    for (Index copy = 2; copy <= m; ++copy) cycle.push_back(catalyst_label(reg.label, copy, prefix));
    circ.cycles.push_back(std::move(cycle));
  }
  return circ;
}

PureState adjoin_catalyst(PureState state, const std::vector<Register>& targets, const Vector& alpha,
                          Index m, const std::string& prefix, Index cap) {
  std::vector<Register> regs;
  for (Index copy = 2; copy <= m; ++copy) {
    for (const auto& reg : targets) regs.push_back({catalyst_label(reg.label, copy, prefix), reg.dim, reg.owner});
  }
  return model::adjoin(std::move(state), regs, linalg::tensor_power(alpha, m - 1), cap);
}

Index predicted_dim(Index input_dim, Index target_dim, Index m) {
  double dim = static_cast<double>(input_dim) * 2.0 * static_cast<double>(m);
  for (Index i = 1; i < m; ++i) dim *= static_cast<double>(target_dim);
  return dim > 9.0e18 ? std::numeric_limits<Index>::max() : static_cast<Index>(dim);
}

std::vector<std::string> labels_of(const std::vector<Register>& regs) {
  std::vector<std::string> out;
  for (const auto& r : regs) out.push_back(r.label);
  return out;
}

Matrix diag_flag(Cplx value) {
  Matrix g = Matrix::Identity(2, 2);
  g(0, 0) = value;
  return g;
}

PureState run_core(PureState state, const std::vector<Register>& targets, const Vector& alpha, Index m,
                   const std::string& prefix, CommLedger& ledger, std::vector<std::string>& transcript,
                   Index cap) {
  state = adjoin_catalyst(std::move(state), targets, alpha, m, prefix, cap);
  transcript.push_back(step_name(prefix, "adjoin catalyst copies 2.." + std::to_string(m)));
  return circulate(std::move(state), make_circulation(targets, m, prefix), true, ledger, transcript,
                   cap, prefix);
}

void check_eigenpairs(const Matrix& gate, std::span<const Eigenpair> pairs) {
  const Index n = gate.rows();
  Matrix rebuilt = Matrix::Identity(n, n);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& p = pairs[i];
    if (p.vector.size() != n || std::abs(p.vector.norm() - 1.0) > kEigenTol) {
      throw std::invalid_argument("eigenvector must be a unit vector on the gate's space");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (std::abs(pairs[j].vector.dot(p.vector)) > kEigenTol) {
        throw std::invalid_argument("supplied eigenvectors must be orthonormal");
      }
    }
    rebuilt += (p.value - 1.0) * p.vector * p.vector.adjoint();
  }
  if ((rebuilt - gate).cwiseAbs().maxCoeff() > kEigenTol) {
    throw std::invalid_argument("eigenpairs do not reproduce the gate's nontrivial part");
  }
}

}  // namespace

std::string catalyst_label(const std::string& base, Index copy, const std::string& prefix) {
  return prefix + base + std::to_string(copy);
}

MeasurementTarget phi_minus_target(Index d) { return {model::make_phi_minus(d)}; }

model::PureState make_input(const Vector& amplitudes, const linalg::Dims& reference_dims,
                            const MeasurementTarget& target) {
  std::vector<Register> regs;
  for (std::size_t i = 0; i < reference_dims.size(); ++i) {
    const std::string label = reference_dims.size() == 1 ? "R" : "R" + std::to_string(i + 1);
    regs.push_back({label, reference_dims[i], model::kReferee});
  }
  for (const auto& reg : target.alpha.layout().registers()) regs.push_back(reg);
  return PureState(model::RegisterLayout(std::move(regs)), amplitudes);
}

ProtocolResult run_ideal_measurement(const PureState& input, const MeasurementTarget& target,
                                     const RunOptions& options) {
  check_input(input, target);
  ProtocolResult result{std::nullopt, std::nullopt, CommLedger(options.accounting), {}};
  const auto targets = labels_of(target.alpha.layout().registers());
  const Party holder = target.alpha.layout().registers().back().owner;
  const Register c_reg{kFlagLabel, 2, holder};
  PureState state = model::adjoin(input, std::span(&c_reg, 1), model::basis_vector(2, 0),
                                  options.max_amplitudes);
  const Vector& alpha = target.alpha.amplitudes();
  state = model::coherent_flag(std::move(state), alpha * alpha.adjoint(), targets, kFlagLabel,
                               model::kReferee);
  result.transcript.push_back("ideal coherent measurement of the target into C");
  result.final_pure = std::move(state);
  return result;
}

ProtocolResult run_approx_measurement(const PureState& input, const MeasurementTarget& target,
                                      Index m, const RunOptions& options) {
  if (m < 2) throw std::invalid_argument("approximate measurement needs m >= 2");
  check_input(input, target);
  const auto& tregs = target.alpha.layout().registers();
  if (tregs.size() != 2 || tregs[0].owner != model::kAlice || tregs[1].owner != model::kBob) {
    throw model::LayoutError("bipartite target must be (Alice register, Bob register)");
  }
  model::check_budget(predicted_dim(input.dim(), target.alpha.dim(), m), options.max_amplitudes,
                      "approximate measurement (m=" + std::to_string(m) +
                          ", target dim=" + std::to_string(target.alpha.dim()) + ")");
  ProtocolResult result{std::nullopt, std::nullopt, CommLedger(options.accounting), {}};
  result.final_pure = run_core(input, tregs, target.alpha.amplitudes(), m, "", result.ledger,
                               result.transcript, options.max_amplitudes);
  return result;
}

ProtocolResult run_kparty_measurement(const PureState& input, const MeasurementTarget& target,
                                      Index m, const RunOptions& options) {
  if (m < 2) throw std::invalid_argument("k-party measurement needs m >= 2");
  check_input(input, target);
  const auto& tregs = target.alpha.layout().registers();
  if (tregs.size() < 2) throw model::LayoutError("k-party measurement needs k >= 2 registers");
  for (std::size_t i = 0; i < tregs.size(); ++i) {
    if (tregs[i].owner != model::party(static_cast<int>(i + 1))) {
      throw model::LayoutError("target register " + std::to_string(i + 1) +
                               " must be held by Party(" + std::to_string(i + 1) + ")");
    }
  }
  model::check_budget(predicted_dim(input.dim(), target.alpha.dim(), m), options.max_amplitudes,
                      "k-party measurement (k=" + std::to_string(tregs.size()) +
                          ", m=" + std::to_string(m) + ")");
  ProtocolResult result{std::nullopt, std::nullopt, CommLedger(options.accounting), {}};
  result.final_pure = run_core(input, tregs, target.alpha.amplitudes(), m, "", result.ledger,
                               result.transcript, options.max_amplitudes);
  return result;
}

ProtocolResult run_w(const PureState& input, Index d, Index m, Mode mode, const RunOptions& options) {
  if (d < 1) throw std::invalid_argument("run_w: d must be >= 1");
  const MeasurementTarget target = phi_minus_target(d);
  check_input(input, target);
  const Vector alpha = target.alpha.amplitudes();
  const auto& tregs = target.alpha.layout().registers();
  const auto input_labels = [&] {
    std::vector<std::string> out;
    for (const auto& r : input.layout().registers()) out.push_back(r.label);
    return out;
  }();
  const std::string budget_name = "run_w (d=" + std::to_string(d) + ", m=" + std::to_string(m) + ")";
  ProtocolResult result{std::nullopt, std::nullopt, CommLedger(options.accounting), {}};

  if (mode == Mode::kIdeal) {
    model::check_budget(input.dim() * 2, options.max_amplitudes, budget_name);
    const Register c_reg{kFlagLabel, 2, model::kBob};
    PureState state = model::adjoin(input, std::span(&c_reg, 1), model::basis_vector(2, 0),
                                    options.max_amplitudes);
    const auto targets = labels_of(tregs);
    const Matrix proj = alpha * alpha.adjoint();
    state = model::coherent_flag(std::move(state), proj, targets, kFlagLabel, model::kReferee);
    result.transcript.push_back("ideal coherent measurement into C");
    state = model::apply_local(std::move(state), {diag_flag(-1.0), {kFlagLabel}, model::kBob});
    result.transcript.push_back("Bob applies Diag(-1, 1) to C");
    state = model::coherent_flag(std::move(state), proj, targets, kFlagLabel, model::kReferee);
    result.transcript.push_back("ideal coherent measurement reversed");
    result.final_density = model::reduced_density(state, input_labels);
    result.transcript.push_back("discard C");
    result.final_pure = std::move(state);
    return result;
  }

  if (m < 2) throw std::invalid_argument("run_w: m must be >= 2");
  if (options.engine == Engine::kExcitation) {
    const Index ref_dim = input.dim() / alpha.size();
    const ExcitationEngine engine(alpha, m, ref_dim, options.max_amplitudes);
    result.transcript.push_back("adjoin catalyst copies 2.." + std::to_string(m));
    Vector state = engine.approx_measurement(input.amplitudes(), &result.ledger, &result.transcript);
    engine.phase(state, -1.0);
    result.transcript.push_back("Bob applies Diag(-1, 1) to C");
    engine.measure(state, &result.ledger, &result.transcript);
    result.final_density = linalg::Density{engine.discard(state), input.layout().dims()};
    result.transcript.push_back("discard catalyst, S and C");
    return result;
  }

  model::check_budget(predicted_dim(input.dim(), alpha.size(), m), options.max_amplitudes, budget_name);
  PureState state = run_core(input, tregs, alpha, m, "", result.ledger, result.transcript,
                             options.max_amplitudes);
  state = model::apply_local(std::move(state), {diag_flag(-1.0), {kFlagLabel}, model::kBob});
  result.transcript.push_back("Bob applies Diag(-1, 1) to C");
  state = circulate(std::move(state), make_circulation(tregs, m, ""), false, result.ledger,
                    result.transcript, options.max_amplitudes, "");
  result.final_density = model::reduced_density(state, input_labels);
  result.transcript.push_back("discard catalyst, S and C");
  result.final_pure = std::move(state);
  return result;
}

double run_symmetric_test(const Vector& alpha, const Vector& beta, Index m, SymmetricVariant variant) {
  if (alpha.size() != beta.size()) throw linalg::DimensionError("symmetric test: dimension mismatch");
  if (m < 1) throw std::invalid_argument("symmetric test: m must be >= 1");
  if (variant == SymmetricVariant::kFull && m > 6) {
    throw std::invalid_argument("full permutation test is limited to m <= 6");
  }
  // Gram matrix of the registers' contents: alpha in 0..m-2, beta in m-1.
  std::vector<const Vector*> content(m, &alpha);
  content[m - 1] = &beta;
  Matrix gram(m, m);
  for (Index a = 0; a < m; ++a) {
    for (Index b = 0; b < m; ++b) gram(a, b) = content[a]->dot(*content[b]);
  }
  // <Psi| pi |Psi> = prod_k <psi_k | psi_{pi^-1(k)}>.
  auto amplitude = [&](const std::vector<Index>& source) {
    Cplx prod = 1.0;
    for (Index k = 0; k < m; ++k) prod *= gram(k, source[k]);
    return prod;
  };
  Cplx total = 0.0;
  Index count = 0;
  std::vector<Index> source(m);
  if (variant == SymmetricVariant::kCyclic) {
    for (Index j = 0; j < m; ++j) {
      for (Index k = 0; k < m; ++k) source[k] = (k - j + m) % m;
      total += amplitude(source);
      ++count;
    }
  } else {
    std::iota(source.begin(), source.end(), Index{0});
    do {
      total += amplitude(source);
      ++count;
    } while (std::next_permutation(source.begin(), source.end()));
  }
  return total.real() / static_cast<double>(count);
}

std::vector<Eigenpair> nontrivial_eigenpairs(const Matrix& unitary, double threshold) {
  const Index n = unitary.rows();
  if (unitary.cols() != n) throw linalg::DimensionError("gate must be square");
  if ((unitary * unitary.adjoint() - Matrix::Identity(n, n)).cwiseAbs().maxCoeff() > kEigenTol) {
    throw std::invalid_argument("gate is not unitary");
  }
  // Unitaries are normal, so the Schur form is diagonal and Q is an eigenbasis.
  Eigen::ComplexSchur<Matrix> schur(unitary);
  const Matrix& t = schur.matrixT();
  const Matrix& q = schur.matrixU();
  std::vector<Eigenpair> out;
  for (Index i = 0; i < n; ++i) {
    const Cplx value = t(i, i);
    if (std::abs(value - 1.0) > threshold) out.push_back({value, q.col(i)});
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (std::abs(out[i].value - out[j].value) <= threshold) {
        throw DegenerateSpectrumError(
            "nontrivial eigenvalue is degenerate; supply eigenvectors explicitly");
      }
    }
  }
  return out;
}

ProtocolResult run_generalized_sim(const model::GateSpec& gate, const PureState& input,
                                   Index m_per_test, Mode mode, const RunOptions& options,
                                   std::span<const Eigenpair> eigenpairs, double threshold) {
  const auto tregs = target_registers(input, gate.targets);
  Index gdim = 1;
  for (const auto& r : tregs) gdim *= r.dim;
  if (gate.matrix.rows() != gdim || gate.matrix.cols() != gdim) {
    throw linalg::DimensionError("gate does not match its target registers");
  }
  std::vector<Eigenpair> pairs;
  if (eigenpairs.empty()) {
    pairs = nontrivial_eigenpairs(gate.matrix, threshold);
  } else {
    pairs.assign(eigenpairs.begin(), eigenpairs.end());
  }
  check_eigenpairs(gate.matrix, pairs);

  const Index r = static_cast<Index>(pairs.size());
  if (mode == Mode::kApprox && r > 0) {
    if (m_per_test < 2) throw std::invalid_argument("generalized simulation needs m >= 2");
    Index dim = input.dim();
    for (Index i = 0; i < r; ++i) dim = predicted_dim(dim, gdim, m_per_test);
    model::check_budget(dim, options.max_amplitudes,
                        "generalized simulation (r=" + std::to_string(r) +
                            ", m=" + std::to_string(m_per_test) + ")");
  }

  std::vector<std::string> input_labels;
  for (const auto& reg : input.layout().registers()) input_labels.push_back(reg.label);
  const Party holder = tregs.back().owner;
  const auto targets = labels_of(tregs);

  ProtocolResult result{std::nullopt, std::nullopt, CommLedger(options.accounting), {}};
  PureState state = input;
  for (Index i = 0; i < r; ++i) {
    const std::string prefix = "t" + std::to_string(i + 1) + ".";
    const Vector& v = pairs[i].vector;
    const std::string c_label = prefix + kFlagLabel;
    if (mode == Mode::kIdeal) {
      const Register c_reg{c_label, 2, holder};
      state = model::adjoin(std::move(state), std::span(&c_reg, 1), model::basis_vector(2, 0),
                            options.max_amplitudes);
      const Matrix proj = v * v.adjoint();
      state = model::coherent_flag(std::move(state), proj, targets, c_label, model::kReferee);
      state = model::apply_local(std::move(state), {diag_flag(pairs[i].value), {c_label}, holder});
      state = model::coherent_flag(std::move(state), proj, targets, c_label, model::kReferee);
      result.transcript.push_back(step_name(prefix, "ideal eigenvector test with phase"));
    } else {
      state = run_core(std::move(state), tregs, v, m_per_test, prefix, result.ledger,
                       result.transcript, options.max_amplitudes);
      state = model::apply_local(std::move(state), {diag_flag(pairs[i].value), {c_label}, holder});
      result.transcript.push_back(step_name(prefix, "apply eigenvalue to C"));
      state = circulate(std::move(state), make_circulation(tregs, m_per_test, prefix), false,
                        result.ledger, result.transcript, options.max_amplitudes, prefix);
    }
  }
  result.final_density = model::reduced_density(state, input_labels);
  result.final_pure = std::move(state);
  return result;
}

}  // namespace nonlocalsim::protocols
