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

// Dense complex linear algebra and entropic functionals. All logarithms are
// base 2, so entropies come out in bits.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

namespace nonlocalsim::linalg {

using Index = Eigen::Index;
using Dims = std::vector<Index>;

template <typename Real>
using Complex = std::complex<Real>;
template <typename Real>
using MatrixX = Eigen::Matrix<Complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Real>
using VectorX = Eigen::Matrix<Complex<Real>, Eigen::Dynamic, 1>;
template <typename Real>
using RealVectorX = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

using Cplx = Complex<double>;
using Matrix = MatrixX<double>;
using Vector = VectorX<double>;
using RealVector = RealVectorX<double>;

// Validity checks (hermiticity, positivity, normalization).
inline constexpr double kValidityTol = 1e-10;

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class InvalidStateError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline Index product(const Dims& dims) {
  return std::accumulate(dims.begin(), dims.end(), Index{1},
                         [](Index a, Index b) { return a * b; });
}

/// Row-major strides: the first factor is the most significant digit.
inline Dims strides(const Dims& dims) {
  Dims out(dims.size(), 1);
  for (Index i = static_cast<Index>(dims.size()) - 2; i >= 0; --i) {
    out[i] = out[i + 1] * dims[i + 1];
  }
  return out;
}

template <typename Real>
struct DensityOperator {
  MatrixX<Real> matrix;
  Dims dims;

  Index dim() const { return matrix.rows(); }
};

using Density = DensityOperator<double>;

template <typename Real>
struct Ensemble {
  std::vector<Real> probabilities;
  std::vector<DensityOperator<Real>> states;
};

/// Kronecker product; two column vectors give a column vector.
template <typename A, typename B>
auto tensor_product(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
  using Scalar = typename A::Scalar;
  static_assert(std::is_same_v<Scalar, typename B::Scalar>,
                "tensor_product needs matching scalar types");
  constexpr bool kVectors = A::ColsAtCompileTime == 1 && B::ColsAtCompileTime == 1;
  using Result = std::conditional_t<kVectors, Eigen::Matrix<Scalar, Eigen::Dynamic, 1>,
                                    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>>;
  Result out = Eigen::kroneckerProduct(a.derived(), b.derived()).eval();
  return out;
}

template <typename A>
auto tensor_power(const Eigen::MatrixBase<A>& a, Index n) {
  using Plain = typename A::PlainObject;
  if (n < 1) throw DimensionError("tensor_power: exponent must be >= 1");
  Plain out = a.derived();
  for (Index i = 1; i < n; ++i) out = tensor_product(out, a.derived());
  return out;
}

namespace detail {

inline std::vector<Index> checked_keep(const Dims& dims, std::vector<Index> keep) {
  if (keep.empty()) throw DimensionError("keep set must be nonempty");
  std::vector<Index> sorted = keep;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw DimensionError("keep set has duplicate factor indices");
  }
  for (Index k : sorted) {
    if (k < 0 || k >= static_cast<Index>(dims.size())) {
      throw DimensionError("factor index " + std::to_string(k) + " out of range");
    }
  }
  return keep;
}

inline std::vector<Index> complement(const Dims& dims, const std::vector<Index>& keep) {
  std::vector<Index> rest;
  for (Index i = 0; i < static_cast<Index>(dims.size()); ++i) {
    if (std::find(keep.begin(), keep.end(), i) == keep.end()) rest.push_back(i);
  }
  return rest;
}

// full_index[k * rest_dim + t] is the full basis index whose kept digits
// spell k and whose traced digits spell t.
inline std::vector<Index> split_table(const Dims& dims, const std::vector<Index>& keep,
                                      Index& keep_dim, Index& rest_dim) {
  const auto rest = complement(dims, keep);
  const Dims full_strides = strides(dims);
  Dims keep_dims, rest_dims;
  for (Index k : keep) keep_dims.push_back(dims[k]);
  for (Index r : rest) rest_dims.push_back(dims[r]);
  keep_dim = product(keep_dims);
  rest_dim = product(rest_dims);

  auto offsets = [&](const std::vector<Index>& factors, const Dims& sub_dims) {
    std::vector<Index> out(product(sub_dims), 0);
    std::vector<Index> digit(factors.size(), 0);
    for (std::size_t i = 0; i < out.size(); ++i) {
      Index off = 0;
      for (std::size_t f = 0; f < factors.size(); ++f) off += digit[f] * full_strides[factors[f]];
      out[i] = off;
      for (Index f = static_cast<Index>(factors.size()) - 1; f >= 0; --f) {
        if (++digit[f] < sub_dims[f]) break;
        digit[f] = 0;
      }
    }
    return out;
  };
  const auto keep_off = offsets(keep, keep_dims);
  const auto rest_off = offsets(rest, rest_dims);
  std::vector<Index> table(keep_dim * rest_dim);
  for (Index k = 0; k < keep_dim; ++k) {
    for (Index t = 0; t < rest_dim; ++t) table[k * rest_dim + t] = keep_off[k] + rest_off[t];
  }
  return table;
}

}  // namespace detail

template <typename Real>
void validate(const DensityOperator<Real>& rho, Real tol = Real(kValidityTol)) {
  const auto& m = rho.matrix;
  if (m.rows() != m.cols()) throw InvalidStateError("density operator must be square");
  if (product(rho.dims) != m.rows()) throw DimensionError("factor dims do not match matrix size");
  if (!m.allFinite()) throw InvalidStateError("density operator has non-finite entries");
  if ((m - m.adjoint()).cwiseAbs().maxCoeff() > tol) {
    throw InvalidStateError("density operator is not Hermitian");
  }
  if (std::abs(m.trace() - Complex<Real>(1)) > tol) {
    throw InvalidStateError("density operator trace is not 1");
  }
  Eigen::SelfAdjointEigenSolver<MatrixX<Real>> es(
      (m + m.adjoint()) / Real(2), Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -tol) {
    throw InvalidStateError("density operator has a negative eigenvalue");
  }
}

template <typename Real>
DensityOperator<Real> make_density(MatrixX<Real> matrix, Dims dims) {
  DensityOperator<Real> rho{std::move(matrix), std::move(dims)};
  validate(rho);
  return rho;
}

template <typename Real>
DensityOperator<Real> pure_density(const VectorX<Real>& psi, Dims dims) {
  if (product(dims) != psi.size()) throw DimensionError("factor dims do not match vector size");
  return DensityOperator<Real>{psi * psi.adjoint(), std::move(dims)};
}

/// Kept factors appear in the order listed in `keep`.
template <typename Real>
DensityOperator<Real> partial_trace(const DensityOperator<Real>& rho, std::vector<Index> keep) {
  if (product(rho.dims) != rho.dim()) throw DimensionError("factor dims do not match matrix size");
  keep = detail::checked_keep(rho.dims, std::move(keep));
  Index keep_dim = 0, rest_dim = 0;
  const auto table = detail::split_table(rho.dims, keep, keep_dim, rest_dim);
  MatrixX<Real> out = MatrixX<Real>::Zero(keep_dim, keep_dim);
  for (Index a = 0; a < keep_dim; ++a) {
    for (Index b = 0; b < keep_dim; ++b) {
      Complex<Real> acc(0);
      for (Index t = 0; t < rest_dim; ++t) {
        acc += rho.matrix(table[a * rest_dim + t], table[b * rest_dim + t]);
      }
      out(a, b) = acc;
    }
  }
  Dims kept;
  for (Index k : keep) kept.push_back(rho.dims[k]);
  return {std::move(out), std::move(kept)};
}

/// Reduced state of a pure vector without forming the full outer product.
template <typename Real>
DensityOperator<Real> reduced_density(const VectorX<Real>& psi, const Dims& dims,
                                      std::vector<Index> keep) {
  if (product(dims) != psi.size()) throw DimensionError("factor dims do not match vector size");
  keep = detail::checked_keep(dims, std::move(keep));
  Index keep_dim = 0, rest_dim = 0;
  const auto table = detail::split_table(dims, keep, keep_dim, rest_dim);
  MatrixX<Real> x(rest_dim, keep_dim);
  for (Index k = 0; k < keep_dim; ++k) {
    for (Index t = 0; t < rest_dim; ++t) x(t, k) = psi(table[k * rest_dim + t]);
  }
  Dims kept;
  for (Index k : keep) kept.push_back(dims[k]);
  MatrixX<Real> rho = (x.adjoint() * x).transpose();
  return {std::move(rho), std::move(kept)};
}

template <typename Derived>
auto hermitian_eigenvalues(const Eigen::MatrixBase<Derived>& m) {
  using Plain = typename Derived::PlainObject;
  const Plain sym = (m + m.adjoint()) / typename Plain::RealScalar(2);
  Eigen::SelfAdjointEigenSolver<Plain> es(sym, Eigen::EigenvaluesOnly);
  return es.eigenvalues().eval();
}

/// Squared Schmidt coefficients across (keep | rest), sorted descending.
template <typename Real>
std::vector<Real> schmidt_spectrum(const VectorX<Real>& psi, const Dims& dims,
                                   std::vector<Index> keep) {
  if (product(dims) != psi.size()) throw DimensionError("factor dims do not match vector size");
  if (std::abs(psi.norm() - Real(1)) > Real(kValidityTol)) {
    throw InvalidStateError("schmidt_spectrum needs a normalized vector");
  }
  keep = detail::checked_keep(dims, std::move(keep));
  if (keep.size() == dims.size()) throw DimensionError("cut must leave a nonempty complement");
  Index keep_dim = 0, rest_dim = 0;
  const auto table = detail::split_table(dims, keep, keep_dim, rest_dim);
  MatrixX<Real> x(keep_dim, rest_dim);
  for (Index k = 0; k < keep_dim; ++k) {
    for (Index t = 0; t < rest_dim; ++t) x(k, t) = psi(table[k * rest_dim + t]);
  }
  Eigen::JacobiSVD<MatrixX<Real>> svd(x);
  std::vector<Real> out;
  for (Index i = 0; i < svd.singularValues().size(); ++i) {
    out.push_back(svd.singularValues()(i) * svd.singularValues()(i));
  }
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

/// Shannon entropy of a spectrum; 0 log 0 := 0 and roundoff negatives are dropped.
template <typename Range>
auto spectrum_entropy(const Range& eigenvalues) {
  using Real = std::decay_t<decltype(*std::begin(eigenvalues))>;
  Real h(0);
  for (Real v : eigenvalues) {
    if (v > Real(0)) h -= v * std::log2(v);
  }
  return h;
}

template <typename Real>
Real von_neumann_entropy(const DensityOperator<Real>& rho) {
  const RealVectorX<Real> eig = hermitian_eigenvalues(rho.matrix);
  return std::max(Real(0), spectrum_entropy(std::vector<Real>(eig.data(), eig.data() + eig.size())));
}

/// Half the trace norm of the difference.
template <typename Real>
Real trace_distance(const DensityOperator<Real>& a, const DensityOperator<Real>& b) {
  if (a.dims != b.dims || a.dim() != b.dim()) {
    throw DimensionError("trace_distance: dimension mismatch");
  }
  const RealVectorX<Real> eig = hermitian_eigenvalues(a.matrix - b.matrix);
  return eig.cwiseAbs().sum() / Real(2);
}

/// Pure-state closed form sqrt(1 - |<a|b>|^2).
template <typename Real>
Real trace_distance(const VectorX<Real>& a, const VectorX<Real>& b) {
  if (a.size() != b.size()) throw DimensionError("trace_distance: dimension mismatch");
  const Complex<Real> inner = a.dot(b);
  const Real overlap = std::abs(inner);
  // 1 - |<a|b>| = ||a - e^{-i arg<a|b>} b||^2 / 2 avoids cancellation near 1.
  const Complex<Real> phase = overlap > Real(0) ? std::conj(inner) / overlap : Complex<Real>(1);
  const Real gap = (a - phase * b).squaredNorm() / Real(2);
  return std::sqrt(std::max(Real(0), gap * (Real(1) + overlap)));
}

template <typename Real>
Real binary_entropy(Real x) {
  if (!(x >= Real(0) && x <= Real(1))) {
    throw std::domain_error("binary_entropy: argument outside [0, 1]");
  }
  auto term = [](Real v) { return v > Real(0) ? -v * std::log2(v) : Real(0); };
  return term(x) + term(Real(1) - x);
}

/// H(Y|Z) = H(YZ) - H(Z), where Y is the listed factor set and Z the rest.
template <typename Real>
Real conditional_entropy(const DensityOperator<Real>& rho, std::vector<Index> y_factors) {
  y_factors = detail::checked_keep(rho.dims, std::move(y_factors));
  const auto z_factors = detail::complement(rho.dims, y_factors);
  const Real joint = von_neumann_entropy(rho);
  if (z_factors.empty()) return joint;
  return joint - von_neumann_entropy(partial_trace(rho, z_factors));
}

/// Holevo quantity of the ensemble restricted to `subsystem`.
template <typename Real>
Real holevo_information(const Ensemble<Real>& ensemble, const std::vector<Index>& subsystem) {
  const auto& p = ensemble.probabilities;
  if (p.empty() || p.size() != ensemble.states.size()) {
    throw InvalidStateError("ensemble needs one probability per state");
  }
  Real total(0);
  for (Real v : p) {
    if (v < Real(0)) throw InvalidStateError("ensemble probability is negative");
    total += v;
  }
  if (std::abs(total - Real(1)) > Real(kValidityTol)) {
    throw InvalidStateError("ensemble probabilities do not sum to 1");
  }
  const Dims& dims = ensemble.states.front().dims;
  DensityOperator<Real> average;
  Real mean_entropy(0);
  for (std::size_t x = 0; x < p.size(); ++x) {
    if (ensemble.states[x].dims != dims) throw DimensionError("ensemble members differ in dims");
    auto reduced = subsystem.size() == dims.size() ? ensemble.states[x]
                                                   : partial_trace(ensemble.states[x], subsystem);
    mean_entropy += p[x] * von_neumann_entropy(reduced);
    if (x == 0) {
      average = DensityOperator<Real>{p[x] * reduced.matrix, reduced.dims};
    } else {
      average.matrix += p[x] * reduced.matrix;
    }
  }
  return std::max(Real(0), von_neumann_entropy(average) - mean_entropy);
}

}  // namespace nonlocalsim::linalg
