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

#include "nonlocalsim/linalg.hpp"
#include "nonlocalsim/model.hpp"
#include "nonlocalsim/random.hpp"

using namespace nonlocalsim;
using linalg::Cplx;
using linalg::Dims;
using linalg::Index;
using linalg::Matrix;
using linalg::Vector;
using Catch::Matchers::WithinAbs;

namespace {

constexpr double kTol = 1e-9;

Vector ket(Index dim, Index i) { return model::basis_vector(dim, i); }

// Tr_B rho = sum_k (I (x) <k|) rho (I (x) |k>) for a bipartite rho.
Matrix trace_out_second(const Matrix& rho, Index da, Index db) {
  Matrix out = Matrix::Zero(da, da);
  const Matrix id = Matrix::Identity(da, da);
  for (Index k = 0; k < db; ++k) {
    const Matrix sandwich = linalg::tensor_product(id, Matrix(ket(db, k)));
    out += sandwich.adjoint() * rho * sandwich;
  }
  return out;
}

Matrix trace_out_first(const Matrix& rho, Index da, Index db) {
  Matrix out = Matrix::Zero(db, db);
  const Matrix id = Matrix::Identity(db, db);
  for (Index k = 0; k < da; ++k) {
    const Matrix sandwich = linalg::tensor_product(Matrix(ket(da, k)), id);
    out += sandwich.adjoint() * rho * sandwich;
  }
  return out;
}

double h2(double x) { return -x * std::log2(x) - (1 - x) * std::log2(1 - x); }

}  // namespace

TEST_CASE("tensor product of identities and kets") {
  const Matrix i2 = Matrix::Identity(2, 2);
  CHECK(linalg::tensor_product(i2, i2).isApprox(Matrix::Identity(4, 4)));

  const Vector zz = linalg::tensor_product(ket(2, 0), ket(2, 0));
  CHECK(zz.isApprox(ket(4, 0)));

  Matrix x(2, 2);
  x << 0, 1, 1, 0;
  const Vector flipped = linalg::tensor_product(x, i2) * zz;
  // |10> has index 1 * 2 + 0 with the first factor most significant.
  CHECK(flipped.isApprox(ket(4, 2)));
}

TEST_CASE("tensor power repeats the factor") {
  const Vector plus = Vector::Constant(2, 1 / std::sqrt(2.0));
  const Vector p3 = linalg::tensor_power(plus, 3);
  REQUIRE(p3.size() == 8);
  CHECK(p3.isApprox(Vector::Constant(8, std::pow(2.0, -1.5))));
}

TEST_CASE("partial trace of maximally entangled and product states") {
  const Index d = 2;
  const auto rho = linalg::pure_density(model::phi_vector(d), {d + 1, d + 1});
  const auto a = linalg::partial_trace(rho, {0});
  Matrix expected = Matrix::Zero(3, 3);
  expected(1, 1) = expected(2, 2) = 0.5;
  CHECK((a.matrix - expected).norm() < kTol);
  CHECK(a.dims == Dims{3});

  auto rng = random::trial_rng(7, 0);
  const Vector u = random::random_pure_state(3, rng);
  const Vector v = random::random_pure_state(4, rng);
  const auto prod = linalg::pure_density(Vector(linalg::tensor_product(u, v)), {3, 4});
  CHECK((linalg::partial_trace(prod, {0}).matrix - u * u.adjoint()).norm() < kTol);
  CHECK((linalg::partial_trace(prod, {1}).matrix - v * v.adjoint()).norm() < kTol);
}

TEST_CASE("phi minus marginal has spectrum one half, one quarter, one quarter") {
  const Index d = 2;
  const Vector psi = model::phi_minus_vector(d);
  const Matrix oracle = trace_out_second(psi * psi.adjoint(), d + 1, d + 1);
  const auto reduced = linalg::partial_trace(linalg::pure_density(psi, {3, 3}), {0});
  CHECK((reduced.matrix - oracle).norm() < kTol);

  auto eig = linalg::hermitian_eigenvalues(reduced.matrix);
  std::vector<double> values(eig.data(), eig.data() + eig.size());
  std::sort(values.begin(), values.end());
  CHECK_THAT(values[0], WithinAbs(0.25, kTol));
  CHECK_THAT(values[1], WithinAbs(0.25, kTol));
  CHECK_THAT(values[2], WithinAbs(0.5, kTol));
}

TEST_CASE("partial trace matches the sandwich oracle on random states") {
  for (std::uint64_t t = 0; t < 20; ++t) {
    auto rng = random::trial_rng(11, t);
    const Index da = 2 + static_cast<Index>(t % 3), db = 2 + static_cast<Index>(t % 2);
    const auto rho = linalg::Density{random::random_density_matrix(da * db, 3, rng), {da, db}};
    CHECK((linalg::partial_trace(rho, {0}).matrix - trace_out_second(rho.matrix, da, db)).norm() < kTol);
    CHECK((linalg::partial_trace(rho, {1}).matrix - trace_out_first(rho.matrix, da, db)).norm() < kTol);
  }
}

TEST_CASE("partial trace keeps factors in the requested order") {
  auto rng = random::trial_rng(3, 0);
  const Vector a = random::random_pure_state(2, rng);
  const Vector b = random::random_pure_state(3, rng);
  const Vector c = random::random_pure_state(2, rng);
  const Vector abc = linalg::tensor_product(linalg::tensor_product(a, b), c);
  const auto rho = linalg::pure_density(abc, {2, 3, 2});
  const auto ca = linalg::partial_trace(rho, {2, 0});
  const Vector ca_vec = linalg::tensor_product(c, a);
  CHECK((ca.matrix - ca_vec * ca_vec.adjoint()).norm() < kTol);
  CHECK(ca.dims == Dims{2, 2});
}

TEST_CASE("tracing every factor leaves the trace") {
  auto rng = random::trial_rng(5, 0);
  const linalg::Density rho{random::random_density_matrix(12, 12, rng), {2, 3, 2}};
  const auto ab = linalg::partial_trace(rho, {0, 1});
  const auto a = linalg::partial_trace(ab, {0});
  CHECK_THAT(a.matrix.trace().real(), WithinAbs(1.0, kTol));
  CHECK((a.matrix - linalg::partial_trace(rho, {0}).matrix).norm() < kTol);
}

TEST_CASE("partial trace rejects bad factor lists") {
  const linalg::Density rho{Matrix::Identity(4, 4) / 4.0, {2, 2}};
  CHECK_THROWS_AS(linalg::partial_trace(rho, {2}), linalg::DimensionError);
  CHECK_THROWS_AS(linalg::partial_trace(rho, {}), linalg::DimensionError);
  CHECK_THROWS_AS(linalg::partial_trace(rho, {0, 0}), linalg::DimensionError);
}

TEST_CASE("reduced density of a vector matches the partial trace") {
  auto rng = random::trial_rng(9, 0);
  const Vector psi = random::random_pure_state(24, rng);
  const Dims dims{2, 3, 4};
  for (const std::vector<Index>& keep : {std::vector<Index>{0}, {1}, {2}, {0, 2}, {2, 1}}) {
    const auto fast = linalg::reduced_density(psi, dims, keep);
    const auto slow = linalg::partial_trace(linalg::pure_density(psi, dims), keep);
    CHECK((fast.matrix - slow.matrix).norm() < kTol);
  }
}

TEST_CASE("schmidt spectra") {
  const auto phi4 = linalg::schmidt_spectrum(model::phi_vector(4), {5, 5}, {0});
  REQUIRE(phi4.size() == 5);
  for (int i = 0; i < 4; ++i) CHECK_THAT(phi4[i], WithinAbs(0.25, kTol));
  CHECK_THAT(phi4[4], WithinAbs(0.0, kTol));

  const auto prod = linalg::schmidt_spectrum(ket(6, 4), {2, 3}, {0});
  CHECK_THAT(prod[0], WithinAbs(1.0, kTol));
  CHECK_THAT(prod[1], WithinAbs(0.0, kTol));

  // (|Phi>_{AB}|00>_{A'B'} + |00>_{AB}|Phi>_{A'B'}) / sqrt(2) across AA' | BB'
  // has Schmidt rank 2d with equal coefficients.
  for (Index d : {1, 2, 3}) {
    const Vector zero = ket((d + 1) * (d + 1), 0);
    const Vector phi = (linalg::tensor_product(model::phi_vector(d), zero) +
                        linalg::tensor_product(zero, model::phi_vector(d))) /
                       std::sqrt(2.0);
    const auto spec = linalg::schmidt_spectrum(phi, {d + 1, d + 1, d + 1, d + 1}, {0, 2});
    for (Index i = 0; i < 2 * d; ++i) CHECK_THAT(spec[i], WithinAbs(1.0 / (2 * d), kTol));
    if (static_cast<Index>(spec.size()) > 2 * d) CHECK_THAT(spec[2 * d], WithinAbs(0.0, kTol));
  }
}

TEST_CASE("schmidt spectrum rejects bad cuts and unnormalized vectors") {
  const Vector psi = ket(4, 0);
  CHECK_THROWS_AS(linalg::schmidt_spectrum(psi, {2, 2}, {0, 1}), linalg::DimensionError);
  CHECK_THROWS_AS(linalg::schmidt_spectrum(psi, {2, 2}, {3}), linalg::DimensionError);
  CHECK_THROWS_AS(linalg::schmidt_spectrum(psi, {2, 3}, {0}), linalg::DimensionError);
  CHECK_THROWS_AS(linalg::schmidt_spectrum(Vector(2.0 * psi), {2, 2}, {0}), linalg::InvalidStateError);
}

TEST_CASE("von Neumann entropy") {
  CHECK_THAT(linalg::von_neumann_entropy(linalg::Density{Matrix::Identity(2, 2) / 2.0, {2}}),
             WithinAbs(1.0, kTol));
  CHECK_THAT(linalg::von_neumann_entropy(linalg::pure_density(ket(3, 1), {3})), WithinAbs(0.0, kTol));
  for (Index d : {2, 3, 4}) {
    const auto a = linalg::partial_trace(linalg::pure_density(model::phi_vector(d), {d + 1, d + 1}), {0});
    CHECK_THAT(linalg::von_neumann_entropy(a), WithinAbs(std::log2(static_cast<double>(d)), kTol));
  }
}

TEST_CASE("both marginals of a pure state have equal entropy") {
  for (std::uint64_t t = 0; t < 25; ++t) {
    auto rng = random::trial_rng(13, t);
    const Vector psi = random::random_pure_state(12, rng);
    const double ha = linalg::von_neumann_entropy(linalg::reduced_density(psi, {3, 4}, {0}));
    const double hb = linalg::von_neumann_entropy(linalg::reduced_density(psi, {3, 4}, {1}));
    CHECK_THAT(ha, WithinAbs(hb, kTol));
  }
}

TEST_CASE("trace distance") {
  auto rng = random::trial_rng(17, 0);
  const linalg::Density rho{random::random_density_matrix(3, 2, rng), {3}};
  CHECK_THAT(linalg::trace_distance(rho, rho), WithinAbs(0.0, kTol));
  CHECK_THAT(linalg::trace_distance(linalg::pure_density(ket(2, 0), {2}), linalg::pure_density(ket(2, 1), {2})),
             WithinAbs(1.0, kTol));

  for (double x : {0.0, 0.2, 0.5, 0.9, 1.0}) {
    Vector a = ket(2, 0);
    Vector b(2);
    b << x, std::sqrt(1 - x * x);
    const double closed = linalg::trace_distance(a, b);
    const double dense = linalg::trace_distance(linalg::pure_density(a, {2}), linalg::pure_density(b, {2}));
    CHECK_THAT(closed, WithinAbs(std::sqrt(1 - x * x), kTol));
    CHECK_THAT(dense, WithinAbs(closed, kTol));
    CHECK(closed <= std::sqrt(2 * (1 - x)) + kTol);
  }

  CHECK_THROWS_AS(linalg::trace_distance(rho, linalg::Density{Matrix::Identity(2, 2) / 2.0, {2}}),
                  linalg::DimensionError);
}

TEST_CASE("trace distance is symmetric and satisfies the triangle inequality") {
  for (std::uint64_t t = 0; t < 50; ++t) {
    auto rng = random::trial_rng(19, t);
    const linalg::Density a{random::random_density_matrix(4, 4, rng), {4}};
    const linalg::Density b{random::random_density_matrix(4, 2, rng), {4}};
    const linalg::Density c{random::random_density_matrix(4, 1, rng), {4}};
    const double ab = linalg::trace_distance(a, b);
    CHECK_THAT(ab, WithinAbs(linalg::trace_distance(b, a), kTol));
    CHECK(ab <= 1 + kTol);
    CHECK(ab <= linalg::trace_distance(a, c) + linalg::trace_distance(c, b) + kTol);
  }
}

TEST_CASE("binary entropy") {
  CHECK_THAT(linalg::binary_entropy(0.5), WithinAbs(1.0, kTol));
  CHECK_THAT(linalg::binary_entropy(0.0), WithinAbs(0.0, kTol));
  CHECK_THAT(linalg::binary_entropy(1.0), WithinAbs(0.0, kTol));
  CHECK_THAT(linalg::binary_entropy(0.25), WithinAbs(0.75 * std::log2(4.0 / 3.0) + 0.25 * 2.0, kTol));
  CHECK_THAT(linalg::binary_entropy(0.25), WithinAbs(0.811278124459, 1e-12));
  CHECK_THROWS_AS(linalg::binary_entropy(-0.1), std::domain_error);
  CHECK_THROWS_AS(linalg::binary_entropy(1.5), std::domain_error);
  CHECK_THROWS_AS(linalg::binary_entropy(std::nan("")), std::domain_error);
}

TEST_CASE("binary entropy is below twice the square root") {
  for (int i = 0; i <= 1000; ++i) {
    const double x = i / 1000.0;
    CHECK(linalg::binary_entropy(x) <= 2 * std::sqrt(x) + kTol);
  }
}

TEST_CASE("conditional entropy") {
  auto rng = random::trial_rng(23, 0);
  const Matrix z = random::random_density_matrix(3, 2, rng);
  const linalg::Density mixed_y{linalg::tensor_product(Matrix(Matrix::Identity(2, 2) / 2.0), z), {2, 3}};
  CHECK_THAT(linalg::conditional_entropy(mixed_y, {0}), WithinAbs(1.0, kTol));

  const Vector bell = (ket(4, 0) + ket(4, 3)) / std::sqrt(2.0);
  CHECK_THAT(linalg::conditional_entropy(linalg::pure_density(bell, {2, 2}), {0}), WithinAbs(-1.0, kTol));

  Matrix cc = Matrix::Zero(4, 4);
  cc(0, 0) = cc(3, 3) = 0.5;
  CHECK_THAT(linalg::conditional_entropy(linalg::Density{cc, {2, 2}}, {0}), WithinAbs(0.0, kTol));

  CHECK_THROWS_AS(linalg::conditional_entropy(linalg::Density{cc, {2, 2}}, {4}), linalg::DimensionError);
}

TEST_CASE("Holevo information") {
  linalg::Ensemble<double> orth;
  for (Index k = 0; k < 4; ++k) {
    orth.probabilities.push_back(0.25);
    orth.states.push_back(linalg::pure_density(ket(4, k), {4}));
  }
  CHECK_THAT(linalg::holevo_information(orth, {0}), WithinAbs(2.0, kTol));

  linalg::Ensemble<double> same;
  const auto s = linalg::pure_density(model::phi_vector(2), {3, 3});
  same.probabilities = {0.3, 0.7};
  same.states = {s, s};
  CHECK_THAT(linalg::holevo_information(same, {0, 1}), WithinAbs(0.0, kTol));

  linalg::Ensemble<double> pair;
  Vector plus(2);
  plus << 1 / std::sqrt(2.0), 1 / std::sqrt(2.0);
  pair.probabilities = {0.5, 0.5};
  pair.states = {linalg::pure_density(ket(2, 0), {2}), linalg::pure_density(plus, {2})};
  const double expected = h2((1 + 1 / std::sqrt(2.0)) / 2);
  CHECK_THAT(linalg::holevo_information(pair, {0}), WithinAbs(expected, kTol));
  CHECK_THAT(expected, WithinAbs(0.600876, 1e-6));

  linalg::Ensemble<double> bad = pair;
  bad.probabilities = {0.5, 0.6};
  CHECK_THROWS_AS(linalg::holevo_information(bad, {0}), linalg::InvalidStateError);
  bad.probabilities = {0.5};
  CHECK_THROWS_AS(linalg::holevo_information(bad, {0}), linalg::InvalidStateError);
}

TEST_CASE("Holevo information on a subsystem ignores the rest") {
  // X is copied into the first factor only.
  linalg::Ensemble<double> e;
  for (Index x = 0; x < 2; ++x) {
    e.probabilities.push_back(0.5);
    e.states.push_back(linalg::pure_density(Vector(linalg::tensor_product(ket(2, x), ket(2, 0))), {2, 2}));
  }
  CHECK_THAT(linalg::holevo_information(e, {0}), WithinAbs(1.0, kTol));
  CHECK_THAT(linalg::holevo_information(e, {1}), WithinAbs(0.0, kTol));
}

TEST_CASE("density validation") {
  Matrix bad = Matrix::Identity(2, 2);
  CHECK_THROWS_AS(linalg::make_density(bad, {2}), linalg::InvalidStateError);
  Matrix nonherm = Matrix::Identity(2, 2) / 2.0;
  nonherm(0, 1) = 0.3;
  CHECK_THROWS_AS(linalg::make_density(nonherm, {2}), linalg::InvalidStateError);
  CHECK_THROWS_AS(linalg::make_density(Matrix(Matrix::Identity(2, 2) / 2.0), {3}), linalg::DimensionError);
  Matrix neg = Matrix::Zero(2, 2);
  neg(0, 0) = 1.5;
  neg(1, 1) = -0.5;
  CHECK_THROWS_AS(linalg::make_density(neg, {2}), linalg::InvalidStateError);
}

TEST_CASE("the toolkit works in extended precision") {
  using LD = long double;
  linalg::VectorX<LD> psi = linalg::VectorX<LD>::Zero(4);
  psi(0) = psi(3) = 1 / std::sqrt(LD(2));
  const auto rho = linalg::pure_density(psi, {2, 2});
  const auto a = linalg::partial_trace(rho, {0});
  CHECK(std::abs(static_cast<double>(linalg::von_neumann_entropy(a)) - 1.0) < kTol);
}
