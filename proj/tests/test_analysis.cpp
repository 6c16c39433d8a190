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

#include <catch_amalgamated.hpp>

#include <cmath>

#include "nonlocalsim/analysis.hpp"
#include "nonlocalsim/excitation_engine.hpp"
#include "nonlocalsim/linalg.hpp"
#include "nonlocalsim/model.hpp"
#include "nonlocalsim/random.hpp"

using namespace nonlocalsim;
using namespace nonlocalsim::analysis;
using linalg::Index;
using linalg::Matrix;
using linalg::Vector;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

constexpr double kTol = 1e-9;

Vector ket(Index dim, Index i) { return model::basis_vector(dim, i); }

GeneralInput input_with_p(Index d, double p, std::uint64_t seed) {
  auto rng = random::trial_rng(seed, 0);
  GeneralInput g = random_general_input(model::phi_minus_vector(d), 2, rng);
  g.p = p;
  return g;
}

double h2(double x) { return x <= 0 || x >= 1 ? 0.0 : -x * std::log2(x) - (1 - x) * std::log2(1 - x); }

}  // namespace

TEST_CASE("general input validation") {
  GeneralInput g = input_with_p(1, 0.5, 1);
  CHECK_NOTHROW(validate(g));
  CHECK_THAT(assemble(g).norm(), WithinAbs(1.0, kTol));
  GeneralInput bad = g;
  bad.p = 1.5;
  CHECK_THROWS_AS(validate(bad), std::invalid_argument);
  bad = g;
  bad.alpha_perp = g.alpha;
  CHECK_THROWS_AS(validate(bad), linalg::InvalidStateError);
  bad = g;
  bad.a1 = ket(3, 0);
  CHECK_THROWS_AS(validate(bad), linalg::DimensionError);
}

TEST_CASE("closed form with p = 1 has no deviation") {
  const GeneralInput g = input_with_p(1, 1.0, 2);
  const CorErr ce = closed_form_cor_err(g, 4);
  CHECK(ce.err.norm() < 1e-15);
  CHECK((ce.fin - ce.cor).norm() < 1e-15);
  CHECK_THAT(ce.fin.norm(), WithinAbs(1.0, kTol));
}

TEST_CASE("closed form reproduces the protocol output") {
  for (Index d : {1, 2}) {
    for (Index m : {2, 3, 4, 8}) {
      for (std::uint64_t t = 0; t < 5; ++t) {
        auto rng = random::trial_rng(3, t + 10 * static_cast<std::uint64_t>(m));
        const GeneralInput g = random_general_input(model::phi_minus_vector(d), 2, rng);
        const CorErr ce = closed_form_cor_err(g, m);
        const protocols::ExcitationEngine engine(g.alpha, m, 2);
        const Vector fin = engine.approx_measurement(assemble(g));
        CHECK((ce.fin - fin).cwiseAbs().maxCoeff() < 1e-10);
        CHECK_THAT(ce.fin.norm(), WithinAbs(1.0, kTol));
        CHECK(std::abs(ce.cor.dot(ce.err)) <= std::sqrt(1 - g.p) / std::sqrt(double(m)) + kTol);
        // The correct part is the ideal output.
        CHECK((ce.cor - engine.ideal_measurement(assemble(g))).norm() < 1e-10);
      }
    }
  }
}

TEST_CASE("appendix bounds at p = 1 and p = 0") {
  const auto tight = verify_appendix_bounds(input_with_p(1, 1.0, 4), 4);
  REQUIRE(tight.size() == 3);
  for (const auto& r : tight) {
    CHECK(r.satisfied);
    CHECK_THAT(r.measured, WithinAbs(0.0, kTol));
    CHECK_THAT(r.bound, WithinAbs(0.0, kTol));
  }

  const auto zero = verify_appendix_bounds(input_with_p(1, 0.0, 5), 4);
  CHECK_THAT(zero[0].bound, WithinAbs(std::sqrt(2.0) / 2, kTol));
  CHECK_THAT(zero[1].bound, WithinAbs(0.5, kTol));
  CHECK_THAT(zero[2].bound, WithinAbs(0.5, kTol));
  // Exact values: ||err|| = sqrt(2(1-p)/m), 1 - |<cor|fin>| = (1-p)/m.
  CHECK_THAT(zero[0].measured, WithinAbs(std::sqrt(0.5), kTol));
  CHECK_THAT(zero[2].measured, WithinAbs(0.25, kTol));
  for (const auto& r : zero) CHECK(r.satisfied);
  CHECK(zero[0].context["quantity"] == "err_norm");
}

TEST_CASE("appendix bounds hold on random inputs") {
  for (std::uint64_t t = 0; t < 100; ++t) {
    auto rng = random::trial_rng(6, t);
    const auto g = random_general_input(model::phi_minus_vector(1 + t % 2), 2, rng);
    for (const auto& r : verify_appendix_bounds(g, 8)) CHECK(r.satisfied);
  }
}

TEST_CASE("bound report serialization") {
  const auto r = make_report({{"check", "x"}}, 0.5, 0.5 + 5e-10);
  CHECK(r.satisfied);
  CHECK_FALSE(make_report({}, 0.5 + 2e-9, 0.5).satisfied);
  const nlohmann::json j = r;
  CHECK(j["context"]["check"] == "x");
  CHECK(j["measured"] == 0.5);
  CHECK(j["satisfied"] == true);
  CHECK(j.contains("bound"));
}

TEST_CASE("distance search between identical channels is zero") {
  const Vector alpha = model::phi_minus_vector(1);
  const auto a = approx_measurement_channel(alpha, {2, 2}, 4);
  SearchOptions opts;
  opts.target = alpha;
  opts.trials = 2;
  CHECK_THAT(channel_distance_search(a, a, 1.0, opts).measured, WithinAbs(0.0, kTol));
  opts.strategy = SearchStrategy::kRandom;
  CHECK_THAT(channel_distance_search(a, a, 1.0, opts).measured, WithinAbs(0.0, kTol));
  CHECK_THROWS_AS(channel_distance_search(a, exact_u_channel(2), 1.0, opts), linalg::DimensionError);
}

TEST_CASE("measurement distance estimates") {
  const Vector alpha = model::phi_minus_vector(1);
  SearchOptions opts;
  opts.target = alpha;
  opts.trials = 4;
  double previous = 2.0;
  for (Index m : {2, 4, 8}) {
    const auto r = channel_distance_search(approx_measurement_channel(alpha, {2, 2}, m),
                                           ideal_measurement_channel(alpha, {2, 2}, m),
                                           measurement_distance_bound(m), opts);
    CHECK(r.satisfied);
    // The optimum over the family is sqrt(1 - (1 - 1/m)^2), reached at p = 0.
    const double md = static_cast<double>(m);
    CHECK_THAT(r.measured, WithinAbs(std::sqrt(2 / md - 1 / (md * md)), 1e-6));
    CHECK(r.measured < previous);
    previous = r.measured;
  }
}

TEST_CASE("random search does not beat the ansatz") {
  const Vector alpha = model::phi_minus_vector(1);
  for (Index m : {2, 4}) {
    const auto a = approx_measurement_channel(alpha, {2, 2}, m);
    const auto b = ideal_measurement_channel(alpha, {2, 2}, m);
    SearchOptions ansatz;
    ansatz.target = alpha;
    ansatz.trials = 3;
    SearchOptions rnd = ansatz;
    rnd.strategy = SearchStrategy::kRandom;
    rnd.trials = 200;
    const double best = channel_distance_search(a, b, 1.0, ansatz).measured;
    CHECK(channel_distance_search(a, b, 1.0, rnd).measured <= best + kTol);
  }
}

TEST_CASE("simulation distance is at most twice the measurement distance") {
  const Vector alpha = model::phi_minus_vector(1);
  SearchOptions opts;
  opts.target = alpha;
  opts.trials = 3;
  const Index m = 4;
  const auto meas = channel_distance_search(approx_measurement_channel(alpha, {2, 2}, m),
                                            ideal_measurement_channel(alpha, {2, 2}, m),
                                            measurement_distance_bound(m), opts);
  const auto sim = channel_distance_search(w_channel(1, m), exact_u_channel(1), simulation_distance_bound(m), opts);
  CHECK(sim.satisfied);
  CHECK(sim.measured <= std::sqrt(2.0) + kTol);
  CHECK(sim.measured <= 2 * meas.measured + kTol);
}

TEST_CASE("search results do not depend on the job count") {
  const auto a = w_channel(1, 8);
  const auto b = exact_u_channel(1);
  SearchOptions opts;
  opts.strategy = SearchStrategy::kRandom;
  opts.trials = 16;
  opts.seed = 9;
  const double serial = channel_distance_search(a, b, 1.0, opts).measured;
  opts.jobs = 4;
  CHECK(channel_distance_search(a, b, 1.0, opts).measured == serial);
}

TEST_CASE("simulation cost") {
  const auto one = simulation_cost(1.0);
  CHECK_THAT(one.m, WithinAbs(8.0, 1e-12));
  CHECK_THAT(one.classical_bits, WithinAbs(24.0, 1e-12));
  CHECK_THAT(one.qubits_each_direction, WithinAbs(6.0, 1e-12));
  const auto half = simulation_cost(0.5);
  CHECK_THAT(half.m, WithinAbs(32.0, 1e-12));
  CHECK_THAT(half.classical_bits, WithinAbs(40.0, 1e-12));
  for (int i = 1; i <= 20; ++i) {
    const double eps = i / 20.0;
    const auto c = simulation_cost(eps);
    CHECK_THAT(c.classical_bits, WithinAbs(c.closed_form_bits, 1e-9));
    CHECK_THAT(8 * std::log2(8 / (eps * eps)), WithinAbs(24 + 16 * std::log2(1 / eps), 1e-9));
  }
  const auto integral = simulation_cost(0.3, model::QubitAccounting::kIntegral);
  CHECK(integral.m_integral == 128);
  CHECK_THAT(integral.qubits_each_direction, WithinAbs(14.0, 1e-12));
  CHECK(simulation_cost(1.0, model::QubitAccounting::kIntegral).m_integral == 8);
  CHECK_THROWS_AS(simulation_cost(0.0), std::domain_error);
  CHECK_THROWS_AS(simulation_cost(1.5), std::domain_error);
}

TEST_CASE("entanglement lower bound on the simulation cost") {
  for (Index d : {2, 16, 64}) {
    const auto tiny = epr_lower_bound(d, 1e-40);
    REQUIRE_FALSE(tiny.vacuous());
    CHECK_THAT(*tiny.bits, WithinAbs(2 * std::log2(double(d)) - 1, 1e-4));
  }
  const auto lb = epr_lower_bound(16, std::ldexp(1.0, -18));
  CHECK_THAT(lb.delta, WithinAbs(0.25, 1e-15));
  CHECK_THAT(*lb.bits, WithinAbs(7 + std::log2(0.28125), 1e-12));
  CHECK_THAT(*lb.bits, WithinAbs(5.1699, 1e-4));
  CHECK(epr_lower_bound(16, std::ldexp(1.0, -10)).vacuous());
  CHECK(epr_lower_bound(16, 0.1).vacuous());
  CHECK_FALSE(epr_lower_bound(16, std::ldexp(1.0, -10) * 0.999).vacuous());
  CHECK_THROWS_AS(epr_lower_bound(1, 0.01), std::invalid_argument);
}

TEST_CASE("capacity bound chain") {
  const auto ch = capacity_bound_chain(1024, 3);
  CHECK_THAT(ch.term1, WithinAbs(120.0, 1e-12));
  CHECK_THAT(ch.term2, WithinAbs(16 * std::sqrt(2.0) / 32, 1e-12));
  CHECK_THAT(ch.term3, WithinAbs(8 * std::pow(2.0, 0.75) / std::pow(2.0, 7.5), 1e-12));
  CHECK_THAT(ch.total, WithinAbs(120.7814, 1e-4));
  CHECK(ch.dominated);
  // 16 eta n equals 16 sqrt(2) n^{1 - c/2}.
  CHECK_THAT(ch.chain_eta_n, WithinRel(ch.term2, 1e-12));
  CHECK_THAT(ch.chain_entropy, WithinAbs(4 * h2(2 * ch.eta), 1e-12));

  double t2 = 1e9, t3 = 1e9;
  for (double n = 2; n <= 1 << 20; n *= 2) {
    const auto c = capacity_bound_chain(n, 2.5);
    CHECK(c.term2 < t2);
    CHECK(c.term3 < t3);
    CHECK(c.dominated);
    t2 = c.term2;
    t3 = c.term3;
  }
  CHECK_THROWS_AS(capacity_bound_chain(1024, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(capacity_bound_chain(1, 3.0), std::invalid_argument);
}

TEST_CASE("mutual information gain") {
  auto rng = random::trial_rng(12, 0);
  const auto ens = random_ensemble(3, {2, 2}, {2, 2}, rng);
  CHECK_THAT(mutual_info_gain(gate_channel(Matrix::Identity(4, 4), {2, 2}), ens), WithinAbs(0.0, kTol));

  // U exchanges the two members.
  for (Index d : {2, 3}) {
    const Index n = (d + 1) * (d + 1);
    PureEnsemble swap{{0.5, 0.5}, {ket(n, 0), model::phi_vector(d)}, {1, 1}};
    CHECK_THAT(mutual_info_gain(exact_u_channel(d), swap), WithinAbs(0.0, kTol));
  }

  // CNOT from A into B copies X into B.
  Matrix cnot = Matrix::Zero(4, 4);
  cnot(0, 0) = cnot(1, 1) = cnot(3, 2) = cnot(2, 3) = 1;
  PureEnsemble copy{{0.5, 0.5}, {ket(4, 0), ket(4, 2)}, {1, 1}};
  CHECK_THAT(mutual_info_gain(gate_channel(cnot, {2, 2}), copy), WithinAbs(1.0, kTol));

  CHECK_THROWS_AS(mutual_info_gain(approx_measurement_channel(model::phi_minus_vector(1), {2, 2}, 2), copy),
                  std::invalid_argument);
}

TEST_CASE("continuity gap") {
  auto rng = random::trial_rng(13, 0);
  const auto ens = random_ensemble(3, {2, 2}, {2, 2}, rng);
  const auto u = exact_u_channel(1);
  const auto same = continuity_gap_check(u, u, 0.1, ens, 1);
  CHECK_THAT(same.measured, WithinAbs(0.0, kTol));
  CHECK(same.satisfied);

  const auto w8 = continuity_gap_check(u, w_channel(1, 8), simulation_distance_bound(8), ens, 1);
  CHECK_THAT(w8.bound, WithinAbs(8.0, kTol));
  CHECK(w8.measured <= 2.0);
  CHECK(w8.satisfied);

  for (std::uint64_t t = 0; t < 10; ++t) {
    auto r = random::trial_rng(14, t);
    const auto e = random_ensemble(3, {2, 2}, {2, 2}, r);
    CHECK(continuity_gap_check(u, w_channel(1, 16), simulation_distance_bound(16), e, 1).satisfied);
  }

  // A claimed epsilon below the actual output distance fails the precondition.
  const auto pre = continuity_gap_check(u, w_channel(1, 2), 1e-6, ens, 1);
  CHECK_FALSE(pre.satisfied);
  CHECK(pre.context["check"] == "continuity precondition");
}

TEST_CASE("continuity bound formula") {
  CHECK_THAT(continuity_bound(1.0, 1), WithinAbs(8.0, 1e-12));
  CHECK_THAT(continuity_bound(0.25, 3), WithinAbs(8 * 0.25 * 2 + 4 * h2(0.25), 1e-12));
  CHECK_THAT(fannes_alicki_bound(0.25, 2), WithinAbs(1 + 2 * h2(0.25), 1e-12));
}

TEST_CASE("Fannes-Alicki") {
  auto rng = random::trial_rng(15, 0);
  const linalg::Density s{random::random_density_matrix(8, 8, rng), {2, 4}};
  const auto same = fannes_alicki_check(s, s);
  CHECK_THAT(same.measured, WithinAbs(0.0, kTol));
  CHECK_THAT(same.bound, WithinAbs(0.0, kTol));

  for (Index dz : {2, 4, 8}) {
    for (std::uint64_t t = 0; t < 30; ++t) {
      auto r = random::trial_rng(16 + static_cast<std::uint64_t>(dz), t);
      const linalg::Density a{random::random_density_matrix(2 * dz, 1 + t % (2 * dz), r), {2, dz}};
      const linalg::Density b{random::random_density_matrix(2 * dz, 2 * dz, r), {2, dz}};
      CHECK(fannes_alicki_check(a, b).satisfied);
    }
  }

  // The bound only sees epsilon and dim Y.
  auto r = random::trial_rng(17, 0);
  const Matrix y = random::random_density_matrix(2, 2, r);
  const Matrix y2 = random::random_density_matrix(2, 2, r);
  std::vector<double> bounds;
  for (Index dz : {2, 4, 8}) {
    const Matrix z = random::random_density_matrix(dz, dz, r);
    const linalg::Density a{linalg::tensor_product(y, z), {2, dz}};
    const linalg::Density b{linalg::tensor_product(y2, z), {2, dz}};
    bounds.push_back(fannes_alicki_check(a, b).bound);
  }
  CHECK_THAT(bounds[1], WithinAbs(bounds[0], 1e-12));
  CHECK_THAT(bounds[2], WithinAbs(bounds[0], 1e-12));

  // Nearly orthogonal pure pair.
  Vector p(4), q(4);
  p << 1, 0, 0, 0;
  q << 1e-3, 0, 0, 1;
  q.normalize();
  const auto near = fannes_alicki_check(linalg::pure_density(p, {2, 2}), linalg::pure_density(q, {2, 2}));
  CHECK(near.satisfied);
  CHECK(near.bound > 3.9);
}

TEST_CASE("entanglement deltas of U") {
  for (Index d : {2, 3, 4}) {
    const Index n = (d + 1) * (d + 1);
    const Matrix u = model::gate_u_matrix(d);
    const linalg::Dims dims{d + 1, d + 1};
    const double ld = std::log2(static_cast<double>(d));
    CHECK_THAT(entanglement_delta(u, ket(n, 0), dims, {0}), WithinAbs(ld, kTol));
    CHECK_THAT(entanglement_delta(u, model::phi_vector(d), dims, {0}), WithinAbs(-ld, kTol));
    CHECK_THAT(entanglement_delta(u, ket(n, 1 * (d + 1) + 2), dims, {0}), WithinAbs(0.0, kTol));
  }
  CHECK_THROWS_AS(entanglement_delta(model::gate_u_matrix(1), ket(9, 0), {3, 3}, {0}), linalg::DimensionError);
}

TEST_CASE("trivial teleportation baseline") {
  CHECK(trivial_teleport_cost(1) == 4.0);
  CHECK(trivial_teleport_cost(10) == 40.0);
  const double eps = 0.01;
  const double bits = simulation_cost(eps).classical_bits;
  const double threshold = bits / 4;
  CHECK(bits < trivial_teleport_cost(std::floor(threshold) + 1));
  CHECK(bits >= trivial_teleport_cost(std::floor(threshold)));
}
