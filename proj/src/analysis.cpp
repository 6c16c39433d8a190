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

#include "nonlocalsim/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "nonlocalsim/excitation_engine.hpp"
#include "nonlocalsim/parallel.hpp"

namespace nonlocalsim::analysis {
namespace {

using protocols::ExcitationEngine;

constexpr double kTol = linalg::kValidityTol;

void require_unit(const Vector& v, const char* name) {
  if (v.size() == 0 || std::abs(v.norm() - 1.0) > kTol) {
    throw linalg::InvalidStateError(std::string(name) + " must be a unit vector");
  }
}

// 2-dim reference: a0 = |0>, a1 = cos(theta)|0> + e^{i phi} sin(theta)|1>,
// alpha_perp from complex coordinates in the complement of the target.
struct AnsatzPoint {
  std::vector<double> x;  // p, theta, phi, (re, im) per complement direction
};

Vector ansatz_input(const AnsatzPoint& pt, const Vector& target, const Matrix& complement) {
  const double p = std::clamp(pt.x[0], 0.0, 1.0);
  const double theta = pt.x[1];
  const double phi = pt.x[2];
  Vector coords(complement.cols());
  for (Index t = 0; t < complement.cols(); ++t) coords(t) = {pt.x[3 + 2 * t], pt.x[4 + 2 * t]};
  if (coords.norm() < 1e-12) coords(0) = 1.0;
  const Vector perp = complement * (coords / coords.norm());
  Vector a0 = Vector::Zero(2);
  a0(0) = 1.0;
  Vector a1(2);
  a1(0) = std::cos(theta);
  a1(1) = std::polar(1.0, phi) * std::sin(theta);
  return std::sqrt(p) * linalg::tensor_product(a0, target) +
         std::sqrt(1.0 - p) * linalg::tensor_product(a1, perp);
}

Matrix complement_of(const Vector& v) {
  Eigen::HouseholderQR<Matrix> qr(v);
  const Matrix q = qr.householderQ();
  return q.rightCols(v.size() - 1);
}

}  // namespace

void validate(const GeneralInput& g) {
  if (!(g.p >= 0.0 && g.p <= 1.0)) throw std::invalid_argument("general input: p outside [0, 1]");
  require_unit(g.a0, "a0");
  require_unit(g.a1, "a1");
  require_unit(g.alpha, "alpha");
  require_unit(g.alpha_perp, "alpha_perp");
  if (g.a0.size() != g.a1.size()) throw linalg::DimensionError("a0 and a1 differ in dimension");
  if (g.alpha.size() != g.alpha_perp.size()) {
    throw linalg::DimensionError("alpha and alpha_perp differ in dimension");
  }
  if (std::abs(g.alpha.dot(g.alpha_perp)) > kTol) {
    throw linalg::InvalidStateError("alpha_perp is not orthogonal to alpha");
  }
}

Vector assemble(const GeneralInput& g) {
  validate(g);
  return std::sqrt(g.p) * linalg::tensor_product(g.a0, g.alpha) +
         std::sqrt(1.0 - g.p) * linalg::tensor_product(g.a1, g.alpha_perp);
}

GeneralInput random_general_input(const Vector& alpha, Index reference_dim, random::Rng& rng) {
  GeneralInput g;
  g.p = random::uniform(rng);
  g.a0 = random::random_pure_state(reference_dim, rng);
  g.a1 = random::random_pure_state(reference_dim, rng);
  g.alpha = alpha;
  Vector perp = random::gaussian_vector(alpha.size(), rng);
  perp -= alpha * alpha.dot(perp);
  g.alpha_perp = perp / perp.norm();
  return g;
}

CorErr closed_form_cor_err(const GeneralInput& g, Index m, Index max_amplitudes) {
  validate(g);
  const Index ref_dim = g.a0.size();
  const ExcitationEngine engine(g.alpha, m, ref_dim, max_amplitudes);
  const Vector beta = engine.complement_basis().adjoint() * g.alpha_perp;
  const double md = static_cast<double>(m);
  const double sp = std::sqrt(g.p);
  const double sq = std::sqrt(1.0 - g.p);

  CorErr out;
  out.cor = Vector::Zero(engine.dimension());
  out.err = Vector::Zero(engine.dimension());
  for (Index r = 0; r < ref_dim; ++r) {
    for (Index s = 0; s < m; ++s) {
      // sqrt(p)|a0>|alpha>^m|s>|0> + sqrt(1-p)|a1>|alpha_perp>|alpha>^{m-1}|s>|1>
      out.cor(engine.index(r, ExcitationEngine::kAllAlpha, s, 0)) = sp * g.a0(r) / std::sqrt(md);
      for (Index t = 0; t < beta.size(); ++t) {
        out.cor(engine.index(r, engine.excitation_config(0, t), s, 1)) =
            sq * g.a1(r) * beta(t) / std::sqrt(md);
      }
    }
    // m^{-3/2} sum_{j,j'} sqrt(1-p)|a1>|alpha_perp at (j - j') mod m>|j'>(|0> - |1>).
    const double scale = 1.0 / std::pow(md, 1.5);
    for (Index j = 0; j < m; ++j) {
      for (Index jp = 0; jp < m; ++jp) {
        const Index pos = ((j - jp) % m + m) % m;
        for (Index t = 0; t < beta.size(); ++t) {
          const Cplx amp = scale * sq * g.a1(r) * beta(t);
          out.err(engine.index(r, engine.excitation_config(pos, t), jp, 0)) += amp;
          out.err(engine.index(r, engine.excitation_config(pos, t), jp, 1)) -= amp;
        }
      }
    }
  }
  out.fin = out.cor + out.err;
  return out;
}

BoundReport make_report(nlohmann::json context, double measured, double bound) {
  return BoundReport{std::move(context), measured, bound, measured <= bound + kBoundSlack};
}

void to_json(nlohmann::json& j, const BoundReport& report) {
  j = nlohmann::json{{"context", report.context},
                     {"measured", report.measured},
                     {"bound", report.bound},
                     {"satisfied", report.satisfied}};
}

std::vector<BoundReport> verify_appendix_bounds(const GeneralInput& g, Index m, Index max_amplitudes) {
  const CorErr closed = closed_form_cor_err(g, m, max_amplitudes);
  // The output actually produced by the protocol, not the closed form.
  const ExcitationEngine engine(g.alpha, m, g.a0.size(), max_amplitudes);
  const Vector fin = engine.approx_measurement(assemble(g));
  const Vector err = fin - closed.cor;
  const double q = 1.0 - g.p;
  const double md = static_cast<double>(m);
  auto ctx = [&](const char* quantity) {
    return nlohmann::json{{"check", "appendix"}, {"quantity", quantity},
                          {"pair_dim", g.alpha.size()}, {"m", m}, {"p", g.p}};
  };
  return {
      make_report(ctx("err_norm"), err.norm(), std::sqrt(2.0 * q) / std::sqrt(md)),
      make_report(ctx("cor_err_overlap"), std::abs(closed.cor.dot(err)), std::sqrt(q) / std::sqrt(md)),
      make_report(ctx("cor_fin_deficit"), 1.0 - std::abs(closed.cor.dot(fin)),
                  std::sqrt(q) / std::sqrt(md)),
  };
}

linalg::Matrix output_density(const ChannelOutput& out) {
  if (const auto* v = std::get_if<Vector>(&out)) return (*v) * v->adjoint();
  return std::get<Matrix>(out);
}

double output_distance(const ChannelOutput& a, const ChannelOutput& b) {
  const auto* va = std::get_if<Vector>(&a);
  const auto* vb = std::get_if<Vector>(&b);
  if (va != nullptr && vb != nullptr) return linalg::trace_distance(*va, *vb);
  const Matrix ma = output_density(a);
  const Matrix mb = output_density(b);
  if (ma.rows() != mb.rows()) throw linalg::DimensionError("channel outputs differ in dimension");
  const linalg::Dims dims{ma.rows()};
  return linalg::trace_distance(linalg::Density{ma, dims}, linalg::Density{mb, dims});
}

Channel approx_measurement_channel(const Vector& alpha, Dims local_dims, Index m, Index max_amplitudes) {
  Channel ch{std::move(local_dims), false, {}};
  ch.apply = [alpha, m, max_amplitudes, dim = ch.input_dim()](const Vector& input, Index ref_dim) {
    if (ref_dim * dim != input.size()) throw linalg::DimensionError("input size mismatch");
    const ExcitationEngine engine(alpha, m, ref_dim, max_amplitudes);
    return ChannelOutput{engine.approx_measurement(input)};
  };
  return ch;
}

Channel ideal_measurement_channel(const Vector& alpha, Dims local_dims, Index m, Index max_amplitudes) {
  Channel ch{std::move(local_dims), false, {}};
  ch.apply = [alpha, m, max_amplitudes, dim = ch.input_dim()](const Vector& input, Index ref_dim) {
    if (ref_dim * dim != input.size()) throw linalg::DimensionError("input size mismatch");
    const ExcitationEngine engine(alpha, m, ref_dim, max_amplitudes);
    return ChannelOutput{engine.ideal_measurement(input)};
  };
  return ch;
}

Channel w_channel(Index d, Index m, Index max_amplitudes) {
  Channel ch{{d + 1, d + 1}, true, {}};
  ch.apply = [alpha = model::phi_minus_vector(d), m, max_amplitudes](const Vector& input,
                                                                     Index ref_dim) {
    const ExcitationEngine engine(alpha, m, ref_dim, max_amplitudes);
    Vector state = engine.approx_measurement(input);
    engine.phase(state, -1.0);
    engine.measure(state, nullptr, nullptr);
    return ChannelOutput{engine.discard(state)};
  };
  return ch;
}

Channel gate_channel(const Matrix& gate, Dims local_dims) {
  Channel ch{std::move(local_dims), true, {}};
  if (gate.rows() != ch.input_dim() || gate.cols() != ch.input_dim()) {
    throw linalg::DimensionError("gate does not match local dimensions");
  }
  ch.apply = [gate](const Vector& input, Index ref_dim) {
    const Matrix full = linalg::tensor_product(Matrix(Matrix::Identity(ref_dim, ref_dim)), gate);
    return ChannelOutput{Vector(full * input)};
  };
  return ch;
}

Channel exact_u_channel(Index d) { return gate_channel(model::gate_u_matrix(d), {d + 1, d + 1}); }

BoundReport channel_distance_search(const Channel& a, const Channel& b, double bound,
                                    const SearchOptions& options, nlohmann::json context) {
  if (a.local_dims != b.local_dims) throw linalg::DimensionError("channels act on different spaces");
  const Index dim = a.input_dim();
  auto distance = [&](const Vector& input, Index ref_dim) {
    return output_distance(a.apply(input, ref_dim), b.apply(input, ref_dim));
  };

  double best = 0.0;
  if (options.strategy == SearchStrategy::kRandom) {
    const auto values = parallel_trials(options.trials, options.jobs, [&](int trial) {
      auto rng = random::trial_rng(options.seed, static_cast<std::uint64_t>(trial));
      return distance(random::random_pure_state(dim * dim, rng), dim);
    });
    for (double v : values) best = std::max(best, v);
    context["strategy"] = "random";
  } else {
    if (options.target.size() != dim) {
      throw std::invalid_argument("ansatz search needs a target state on A (x) B");
    }
    const Matrix complement = complement_of(options.target);
    const std::size_t coords = 3 + 2 * static_cast<std::size_t>(complement.cols());
    const auto values = parallel_trials(options.trials, options.jobs, [&](int restart) {
      auto rng = random::trial_rng(options.seed, static_cast<std::uint64_t>(restart));
      AnsatzPoint pt{std::vector<double>(coords)};
      pt.x[0] = random::uniform(rng);
      pt.x[1] = random::uniform(rng, 0.0, std::numbers::pi);
      pt.x[2] = random::uniform(rng, 0.0, 2.0 * std::numbers::pi);
      std::normal_distribution<double> normal;
      for (std::size_t i = 3; i < coords; ++i) pt.x[i] = normal(rng);
      auto eval = [&](const AnsatzPoint& q) {
        return distance(ansatz_input(q, options.target, complement), 2);
      };
      double value = eval(pt);
      // Coordinate refinement with a halving step.
      for (double step = 0.5; step >= 1e-3;) {
        bool improved = false;
        for (std::size_t i = 0; i < coords; ++i) {
          for (double sign : {1.0, -1.0}) {
            AnsatzPoint trial = pt;
            trial.x[i] += sign * step;
            if (i == 0) trial.x[0] = std::clamp(trial.x[0], 0.0, 1.0);
            const double v = eval(trial);
            if (v > value + 1e-15) {
              value = v;
              pt = std::move(trial);
              improved = true;
            }
          }
        }
        if (!improved) step /= 2.0;
      }
      return value;
    });
    for (double v : values) best = std::max(best, v);
    context["strategy"] = "ansatz";
  }
  context["trials"] = options.trials;
  context["seed"] = options.seed;
  return make_report(std::move(context), best, bound);
}

SimulationCost simulation_cost(double epsilon, model::QubitAccounting accounting) {
  if (!(epsilon > 0.0 && epsilon <= 1.0)) {
    throw std::domain_error("simulation_cost: epsilon must lie in (0, 1]");
  }
  SimulationCost cost;
  cost.m = 8.0 / (epsilon * epsilon);
  cost.m_integral = 1;
  while (static_cast<double>(cost.m_integral) < cost.m * (1.0 - 1e-12)) cost.m_integral *= 2;
  const double log_m = accounting == model::QubitAccounting::kIntegral
                           ? std::log2(static_cast<double>(cost.m_integral))
                           : std::log2(cost.m);
  // Two identification rounds, each log m qubits per direction.
  cost.qubits_each_direction = 2.0 * log_m;
  cost.classical_bits = 2.0 * (2.0 * cost.qubits_each_direction);
  cost.closed_form_bits = 24.0 + 16.0 * std::log2(1.0 / epsilon);
  return cost;
}

EprLowerBound epr_lower_bound(Index d, double epsilon) {
  if (d < 2) throw std::invalid_argument("epr_lower_bound: d must be >= 2");
  if (!(epsilon > 0.0)) throw std::domain_error("epr_lower_bound: epsilon must be positive");
  EprLowerBound out;
  out.delta = std::pow(4.0 * epsilon, 0.125);
  // delta >= 1/2 exactly when 4 eps >= 2^-8.
  if (4.0 * epsilon >= 1.0 / 256.0) return out;
  const double delta = out.delta;
  out.bits = 2.0 * std::log2(static_cast<double>(d)) - 1.0 +
             std::log2((1.0 - 2.0 * delta) * (1.0 - delta) * (1.0 - delta));
  return out;
}

CapacityChain capacity_bound_chain(double n, double c) {
  if (!(n >= 2.0)) throw std::invalid_argument("capacity_bound_chain: n must be >= 2");
  if (!(c > 2.0)) throw std::invalid_argument("capacity_bound_chain: c must exceed 2");
  CapacityChain ch;
  ch.term1 = 4.0 * c * std::log2(n);
  ch.term2 = 16.0 * std::sqrt(2.0) * std::pow(n, 1.0 - c / 2.0);
  ch.term3 = 8.0 * std::pow(2.0, 0.75) * std::pow(n, -c / 4.0);
  ch.total = ch.term1 + ch.term2 + ch.term3;
  ch.m = std::pow(n, c);
  ch.eta = std::sqrt(2.0 / ch.m);
  ch.chain_log_m = 4.0 * std::log2(ch.m);
  ch.chain_eta_n = 16.0 * ch.eta * n;
  // H2 saturates at 1 once its argument leaves [0, 1].
  ch.chain_entropy = 2.0 * ch.eta <= 1.0 ? 4.0 * linalg::binary_entropy(2.0 * ch.eta) : 4.0;
  ch.chain_total = ch.chain_log_m + ch.chain_eta_n + ch.chain_entropy;
  const double rel = 1e-12;
  // 4 H2(2 eta) <= 8 sqrt(2 eta) = term3.
  ch.dominated = ch.chain_log_m <= ch.term1 * (1 + rel) && ch.chain_eta_n <= ch.term2 * (1 + rel) &&
                 ch.chain_entropy <= ch.term3 * (1 + rel);
  return ch;
}

double continuity_bound(double epsilon, Index d) {
  return 8.0 * epsilon * std::log2(static_cast<double>(d + 1)) + 4.0 * linalg::binary_entropy(epsilon);
}

double fannes_alicki_bound(double epsilon, Index dim_y) {
  return 4.0 * epsilon * std::log2(static_cast<double>(dim_y)) + 2.0 * linalg::binary_entropy(epsilon);
}

PureEnsemble random_ensemble(Index members, Dims ancilla_dims, Dims local_dims, random::Rng& rng) {
  if (members < 1 || ancilla_dims.size() != 2 || local_dims.size() != 2) {
    throw std::invalid_argument("random_ensemble: bad shape");
  }
  PureEnsemble e;
  e.ancilla_dims = ancilla_dims;
  const Index dim = linalg::product(ancilla_dims) * linalg::product(local_dims);
  double total = 0.0;
  for (Index x = 0; x < members; ++x) {
    e.probabilities.push_back(random::uniform(rng, 0.05, 1.0));
    total += e.probabilities.back();
    e.states.push_back(random::random_pure_state(dim, rng));
  }
  for (double& p : e.probabilities) p /= total;
  return e;
}

double mutual_information_xb(const std::vector<double>& probabilities,
                             const std::vector<Matrix>& states, const Dims& dims) {
  linalg::Ensemble<double> ens;
  ens.probabilities = probabilities;
  for (const auto& s : states) ens.states.push_back(linalg::Density{s, dims});
  // dims = {A', B', A, B}; keep B' and B.
  return linalg::holevo_information(ens, {1, 3});
}

double mutual_info_gain(const Channel& channel, const PureEnsemble& ensemble) {
  if (!channel.output_on_input_space) {
    throw std::invalid_argument("mutual_info_gain needs a channel with outputs on R (x) A (x) B");
  }
  const Index ref_dim = linalg::product(ensemble.ancilla_dims);
  const Dims dims{ensemble.ancilla_dims[0], ensemble.ancilla_dims[1], channel.local_dims[0],
                  channel.local_dims[1]};
  std::vector<Matrix> before, after;
  for (const auto& psi : ensemble.states) {
    if (psi.size() != ref_dim * channel.input_dim()) {
      throw linalg::DimensionError("ensemble member does not match channel dimensions");
    }
    before.push_back(psi * psi.adjoint());
    after.push_back(output_density(channel.apply(psi, ref_dim)));
  }
  return mutual_information_xb(ensemble.probabilities, after, dims) -
         mutual_information_xb(ensemble.probabilities, before, dims);
}

BoundReport continuity_gap_check(const Channel& a, const Channel& b, double epsilon_bound,
                                 const PureEnsemble& ensemble, Index d) {
  if (a.local_dims != b.local_dims || !a.output_on_input_space || !b.output_on_input_space) {
    throw linalg::DimensionError("continuity check needs two channels on the same R (x) A (x) B");
  }
  const double eps = std::min(epsilon_bound, 1.0);
  const Index ref_dim = linalg::product(ensemble.ancilla_dims);
  const Dims dims{ensemble.ancilla_dims[0], ensemble.ancilla_dims[1], a.local_dims[0], a.local_dims[1]};
  std::vector<Matrix> out_a, out_b;
  double cq_distance = 0.0;
  for (std::size_t x = 0; x < ensemble.states.size(); ++x) {
    const ChannelOutput oa = a.apply(ensemble.states[x], ref_dim);
    const ChannelOutput ob = b.apply(ensemble.states[x], ref_dim);
    cq_distance += ensemble.probabilities[x] * output_distance(oa, ob);
    out_a.push_back(output_density(oa));
    out_b.push_back(output_density(ob));
  }
  nlohmann::json ctx{{"d", d}, {"epsilon", eps}, {"members", ensemble.states.size()}};
  if (cq_distance > eps + kBoundSlack) {
    ctx["check"] = "continuity precondition";
    return make_report(std::move(ctx), cq_distance, eps);
  }
  ctx["check"] = "continuity";
  ctx["output_distance"] = cq_distance;
  const double gap = std::abs(mutual_information_xb(ensemble.probabilities, out_a, dims) -
                              mutual_information_xb(ensemble.probabilities, out_b, dims));
  return make_report(std::move(ctx), gap, continuity_bound(eps, d));
}

BoundReport fannes_alicki_check(const linalg::Density& sigma, const linalg::Density& sigma_prime) {
  if (sigma.dims != sigma_prime.dims || sigma.dims.size() < 2) {
    throw linalg::DimensionError("fannes_alicki_check needs two states on the same Y (x) Z");
  }
  const double eps = linalg::trace_distance(sigma, sigma_prime);
  const double gap = std::abs(linalg::conditional_entropy(sigma, {0}) -
                              linalg::conditional_entropy(sigma_prime, {0}));
  const Index dim_y = sigma.dims[0];
  nlohmann::json ctx{{"check", "fannes_alicki"}, {"dim_y", dim_y},
                     {"dim_z", sigma.dim() / dim_y}, {"epsilon", eps}};
  return make_report(std::move(ctx), gap, fannes_alicki_bound(eps, dim_y));
}

double entanglement_delta(const Matrix& gate, const Vector& input, const Dims& dims,
                          const std::vector<Index>& cut) {
  if (gate.rows() != input.size() || gate.cols() != input.size()) {
    throw linalg::DimensionError("gate does not match the input");
  }
  const Vector output = gate * input;
  return linalg::spectrum_entropy(linalg::schmidt_spectrum(output, dims, cut)) -
         linalg::spectrum_entropy(linalg::schmidt_spectrum(input, dims, cut));
}

}  // namespace nonlocalsim::analysis
