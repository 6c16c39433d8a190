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

// Closed-form oracle states for the approximate state identification, every
// numeric bound around the protocols, channel-distance estimation and the
// entropy continuity checks.

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "nonlocalsim/linalg.hpp"
#include "nonlocalsim/model.hpp"
#include "nonlocalsim/random.hpp"

namespace nonlocalsim::analysis {

using linalg::Cplx;
using linalg::Dims;
using linalg::Index;
using linalg::Matrix;
using linalg::Vector;

/// sqrt(p) |a0>_R |alpha>_AB + sqrt(1 - p) |a1>_R |alpha_perp>_AB.
struct GeneralInput {
  double p = 1.0;
  Vector a0;
  Vector a1;
  Vector alpha;
  Vector alpha_perp;
};

void validate(const GeneralInput& g);
Vector assemble(const GeneralInput& g);
GeneralInput random_general_input(const Vector& alpha, Index reference_dim, random::Rng& rng);

/// Ideal output, deviation and their sum, in ExcitationEngine coordinates for
/// (alpha, m, dim a0).
struct CorErr {
  Vector cor;
  Vector err;
  Vector fin;
};

CorErr closed_form_cor_err(const GeneralInput& g, Index m,
                           Index max_amplitudes = model::default_amplitude_cap());

inline constexpr double kBoundSlack = 1e-9;

/// satisfied <=> measured <= bound + 1e-9.
struct BoundReport {
  nlohmann::json context = nlohmann::json::object();
  double measured = 0.0;
  double bound = 0.0;
  bool satisfied = true;
};

BoundReport make_report(nlohmann::json context, double measured, double bound);
void to_json(nlohmann::json& j, const BoundReport& report);

/// Deviation norm, cross term and overlap deficit of the protocol's output
/// against their closed-form bounds.
std::vector<BoundReport> verify_appendix_bounds(const GeneralInput& g, Index m,
                                                Index max_amplitudes = model::default_amplitude_cap());

// Channels on R (x) A (x) B, evaluated on pure inputs.

/// A pure output vector or a density matrix.
using ChannelOutput = std::variant<Vector, Matrix>;

struct Channel {
  Dims local_dims;  // {dim A, dim B}
  /// True when outputs live on R (x) A (x) B (as opposed to a larger space).
  bool output_on_input_space = true;
  std::function<ChannelOutput(const Vector& input, Index reference_dim)> apply;

  Index input_dim() const { return linalg::product(local_dims); }
};

/// Half the trace norm between two outputs of the same space.
double output_distance(const ChannelOutput& a, const ChannelOutput& b);
linalg::Matrix output_density(const ChannelOutput& out);

/// Approximate and ideal identification; outputs keep every register.
Channel approx_measurement_channel(const Vector& alpha, Dims local_dims, Index m,
                                   Index max_amplitudes = model::default_amplitude_cap());
Channel ideal_measurement_channel(const Vector& alpha, Dims local_dims, Index m,
                                  Index max_amplitudes = model::default_amplitude_cap());
/// The simulation of U, with the catalyst, S and C discarded.
Channel w_channel(Index d, Index m, Index max_amplitudes = model::default_amplitude_cap());
Channel gate_channel(const Matrix& gate, Dims local_dims);
Channel exact_u_channel(Index d);

inline double measurement_distance_bound(Index m) { return std::sqrt(2.0 / static_cast<double>(m)); }
inline double simulation_distance_bound(Index m) { return 2.0 * measurement_distance_bound(m); }

enum class SearchStrategy { kAnsatz, kRandom };

struct SearchOptions {
  SearchStrategy strategy = SearchStrategy::kAnsatz;
  /// Random inputs for kRandom, restarts for kAnsatz.
  int trials = 20;
  std::uint64_t seed = 1;
  /// State the ansatz inputs are built around (required for kAnsatz).
  Vector target;
  int jobs = 1;
};

/// Max over searched pure inputs of the half trace norm between the two
/// outputs: a lower estimate of half the diamond distance, reported against
/// `bound`. kAnsatz uses a 2-dim reference, kRandom a reference of the input's
/// dimension.
BoundReport channel_distance_search(const Channel& a, const Channel& b, double bound,
                                    const SearchOptions& options,
                                    nlohmann::json context = nlohmann::json::object());

struct SimulationCost {
  double m = 0.0;
  Index m_integral = 0;  // smallest power of two >= 8 / eps^2
  double qubits_each_direction = 0.0;
  double classical_bits = 0.0;
  double closed_form_bits = 0.0;  // 24 + 16 log2(1 / eps)
};

SimulationCost simulation_cost(double epsilon,
                               model::QubitAccounting accounting = model::QubitAccounting::kExact);

struct EprLowerBound {
  double delta = 0.0;
  std::optional<double> bits;  // empty when delta >= 1/2 (vacuous)
  bool vacuous() const { return !bits.has_value(); }
};

/// 2 log2 d - 1 + log2((1 - 2 delta)(1 - delta)^2) with delta = (4 eps)^{1/8}.
EprLowerBound epr_lower_bound(Index d, double epsilon);

struct CapacityChain {
  double term1 = 0.0;  // 4 c log2 n
  double term2 = 0.0;  // 16 sqrt(2) n^{1 - c/2}
  double term3 = 0.0;  // 8 2^{0.75} n^{-c/4}
  double total = 0.0;
  double m = 0.0;      // n^c
  double eta = 0.0;    // sqrt(2 / m)
  double chain_log_m = 0.0;    // 4 log2 m
  double chain_eta_n = 0.0;    // 16 eta n
  double chain_entropy = 0.0;  // 4 H2(2 eta)
  double chain_total = 0.0;
  bool dominated = false;      // every chain term <= its closed-form majorant
};

CapacityChain capacity_bound_chain(double n, double c);

/// 8 eps log2(d + 1) + 4 H2(eps).
double continuity_bound(double epsilon, Index d);
/// 4 eps log2(dim Y) + 2 H2(eps).
double fannes_alicki_bound(double epsilon, Index dim_y);

/// Pure members on A' (x) B' (x) A (x) B, classically labeled.
struct PureEnsemble {
  std::vector<double> probabilities;
  std::vector<Vector> states;
  Dims ancilla_dims;  // {dim A', dim B'}
};

PureEnsemble random_ensemble(Index members, Dims ancilla_dims, Dims local_dims, random::Rng& rng);

/// I(X; B B') of the ensemble's states.
double mutual_information_xb(const std::vector<double>& probabilities,
                             const std::vector<Matrix>& states, const Dims& dims);

/// I(X; BB') after the channel minus I(X; BB') before.
double mutual_info_gain(const Channel& channel, const PureEnsemble& ensemble);

/// Per-ensemble continuity: |I(X;BB')_a - I(X;BB')_b| <= 8 eps log2(d+1) + 4 H2(eps).
/// eps above 1 is clamped to 1 (trace distance never exceeds it). When the
/// outputs are further apart than eps the precondition report is returned,
/// which then fails.
BoundReport continuity_gap_check(const Channel& a, const Channel& b, double epsilon_bound,
                                 const PureEnsemble& ensemble, Index d);

/// Conditional entropy continuity with Y = factor 0 and Z = the remaining
/// factors; eps is the trace distance (half trace norm).
BoundReport fannes_alicki_check(const linalg::Density& sigma, const linalg::Density& sigma_prime);

/// Entanglement entropy across `cut` after the gate minus before.
double entanglement_delta(const Matrix& gate, const Vector& input, const Dims& dims,
                          const std::vector<Index>& cut);

inline double trivial_teleport_cost(double n) { return 4.0 * n; }

}  // namespace nonlocalsim::analysis
