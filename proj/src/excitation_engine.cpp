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

#include "nonlocalsim/excitation_engine.hpp"

#include <cmath>
#include <stdexcept>

namespace nonlocalsim::protocols {

using linalg::Cplx;

ExcitationEngine::ExcitationEngine(const Vector& alpha, Index copies, Index reference_dim,
                                   Index max_amplitudes)
    : alpha_(alpha),
      copies_(copies),
      reference_dim_(reference_dim),
      pair_dim_(alpha.size()),
      max_amplitudes_(max_amplitudes) {
  if (copies_ < 2) throw std::invalid_argument("excitation engine needs m >= 2");
  if (reference_dim_ < 1) throw linalg::DimensionError("reference dimension must be >= 1");
  if (pair_dim_ < 2) throw linalg::DimensionError("target must have dimension >= 2");
  if (std::abs(alpha_.norm() - 1.0) > linalg::kValidityTol) {
    throw linalg::InvalidStateError("target state must be normalized");
  }
  model::check_budget(dimension(), max_amplitudes_,
                      "excitation engine (m=" + std::to_string(copies_) +
                          ", target dim=" + std::to_string(pair_dim_) + ")");
  Eigen::HouseholderQR<Matrix> qr(alpha_);
  const Matrix q = qr.householderQ();
  complement_ = q.rightCols(pair_dim_ - 1);
}

linalg::Vector ExcitationEngine::load(const Vector& input) const {
  if (input.size() != reference_dim_ * pair_dim_) {
    throw linalg::DimensionError("input does not live on R (x) AB");
  }
  const double amp_s = 1.0 / std::sqrt(static_cast<double>(copies_));
  Vector state = Vector::Zero(dimension());
  for (Index r = 0; r < reference_dim_; ++r) {
    const auto block = input.segment(r * pair_dim_, pair_dim_);
    const Cplx on_alpha = alpha_.dot(block);
    const Vector on_perp = complement_.adjoint() * block;
    for (Index s = 0; s < copies_; ++s) {
      state(index(r, kAllAlpha, s, 0)) = amp_s * on_alpha;
      for (Index t = 0; t < pair_dim_ - 1; ++t) {
        state(index(r, excitation_config(0, t), s, 0)) = amp_s * on_perp(t);
      }
    }
  }
  return state;
}

void ExcitationEngine::cycle(Vector& state, model::CycleDirection direction) const {
  Vector out = Vector::Zero(state.size());
  const Index types = pair_dim_ - 1;
  for (Index r = 0; r < reference_dim_; ++r) {
    for (Index s = 0; s < copies_; ++s) {
      for (Index c = 0; c < 2; ++c) {
        out(index(r, kAllAlpha, s, c)) = state(index(r, kAllAlpha, s, c));
        for (Index k = 0; k < copies_; ++k) {
          // Register k receives the content of register k - s.
          const Index dest = direction == model::CycleDirection::kForward
                                 ? (k + s) % copies_
                                 : (k - s + copies_) % copies_;
          for (Index t = 0; t < types; ++t) {
            out(index(r, excitation_config(dest, t), s, c)) =
                state(index(r, excitation_config(k, t), s, c));
          }
        }
      }
    }
  }
  state = std::move(out);
}

void ExcitationEngine::flag(Vector& state) const {
  const double inv_m = 1.0 / static_cast<double>(copies_);
  for (Index r = 0; r < reference_dim_; ++r) {
    for (Index conf = 0; conf < config_count(); ++conf) {
      Cplx mean[2] = {0.0, 0.0};
      for (Index s = 0; s < copies_; ++s) {
        mean[0] += state(index(r, conf, s, 0));
        mean[1] += state(index(r, conf, s, 1));
      }
      mean[0] *= inv_m;
      mean[1] *= inv_m;
      // |s><s| v = mean * sqrt(m) |s>, i.e. `mean` on every entry.
      for (Index s = 0; s < copies_; ++s) {
        const Cplx v0 = state(index(r, conf, s, 0));
        const Cplx v1 = state(index(r, conf, s, 1));
        state(index(r, conf, s, 0)) = mean[0] + (v1 - mean[1]);
        state(index(r, conf, s, 1)) = mean[1] + (v0 - mean[0]);
      }
    }
  }
}

void ExcitationEngine::ideal_flag(Vector& state) const {
  for (Index r = 0; r < reference_dim_; ++r) {
    for (Index t = 0; t < pair_dim_ - 1; ++t) {
      const Index conf = excitation_config(0, t);
      for (Index s = 0; s < copies_; ++s) {
        std::swap(state(index(r, conf, s, 0)), state(index(r, conf, s, 1)));
      }
    }
  }
}

void ExcitationEngine::phase(Vector& state, Cplx value) const {
  for (Index i = 0; i < state.size(); i += 2) state(i) *= value;
}

void ExcitationEngine::measure(Vector& state, model::CommLedger* ledger,
                               std::vector<std::string>* transcript) const {
  auto note = [&](const char* step) {
    if (transcript != nullptr) transcript->emplace_back(step);
  };
  note("Alice applies controlled cycle to S and A-halves");
  note("Alice sends S to Bob");
  if (ledger != nullptr) ledger->record("send S", "S", model::kAlice, model::kBob, copies_);
  note("Bob applies controlled cycle to S and B-halves");
  cycle(state, model::CycleDirection::kForward);
  note("Bob coherently measures S into C");
  flag(state);
  note("Bob applies inverse cycle to S and B-halves");
  note("Bob sends S to Alice");
  if (ledger != nullptr) ledger->record("return S", "S", model::kBob, model::kAlice, copies_);
  note("Alice applies inverse cycle to S and A-halves");
  cycle(state, model::CycleDirection::kInverse);
}

linalg::Vector ExcitationEngine::approx_measurement(const Vector& input, model::CommLedger* ledger,
                                                    std::vector<std::string>* transcript) const {
  if (transcript != nullptr) transcript->emplace_back("Alice prepares S in |s>");
  Vector state = load(input);
  measure(state, ledger, transcript);
  return state;
}

linalg::Vector ExcitationEngine::ideal_measurement(const Vector& input) const {
  Vector state = load(input);
  ideal_flag(state);
  return state;
}

linalg::Matrix ExcitationEngine::discard(const Vector& state) const {
  const Index out_dim = reference_dim_ * pair_dim_;
  Matrix rho = Matrix::Zero(out_dim, out_dim);
  Matrix catalyst_ref = Matrix::Zero(reference_dim_, reference_dim_);
  Vector chi(out_dim);
  Vector v(reference_dim_);
  for (Index s = 0; s < copies_; ++s) {
    for (Index c = 0; c < 2; ++c) {
      // Environment with every catalyst copy in alpha.
      for (Index r = 0; r < reference_dim_; ++r) {
        Vector pair = state(index(r, kAllAlpha, s, c)) * alpha_;
        for (Index t = 0; t < pair_dim_ - 1; ++t) {
          pair += state(index(r, excitation_config(0, t), s, c)) * complement_.col(t);
        }
        chi.segment(r * pair_dim_, pair_dim_) = pair;
      }
      rho += chi * chi.adjoint();
      // Environment with the excitation on a catalyst copy: the input pair is alpha.
      for (Index k = 1; k < copies_; ++k) {
        for (Index t = 0; t < pair_dim_ - 1; ++t) {
          for (Index r = 0; r < reference_dim_; ++r) {
            v(r) = state(index(r, excitation_config(k, t), s, c));
          }
          catalyst_ref += v * v.adjoint();
        }
      }
    }
  }
  rho += linalg::tensor_product(catalyst_ref, Matrix(alpha_ * alpha_.adjoint()));
  return rho;
}

linalg::Vector ExcitationEngine::embed(const Vector& state) const {
  Index pairs_dim = 1;
  for (Index k = 0; k < copies_; ++k) pairs_dim *= pair_dim_;
  const Index full_dim = reference_dim_ * pairs_dim * copies_ * 2;
  model::check_budget(full_dim, max_amplitudes_, "embedding into the register layout");

  auto pair_product = [&](Index conf) {
    Vector out = Vector::Ones(1);
    for (Index k = 0; k < copies_; ++k) {
      Vector factor = alpha_;
      if (conf != kAllAlpha && (conf - 1) / (pair_dim_ - 1) == k) {
        factor = complement_.col((conf - 1) % (pair_dim_ - 1));
      }
      out = linalg::tensor_product(out, factor);
    }
    return out;
  };

  // For each reference index the full amplitudes form a (copies*2) x pairs_dim
  // column-major block: coefficients (copies*2 x configs) times pair products.
  const Index inner = copies_ * 2;
  Matrix products(pairs_dim, config_count());
  for (Index conf = 0; conf < config_count(); ++conf) products.col(conf) = pair_product(conf);
  Vector full(full_dim);
  Matrix coeff(inner, config_count());
  for (Index r = 0; r < reference_dim_; ++r) {
    for (Index conf = 0; conf < config_count(); ++conf) {
      for (Index sc = 0; sc < inner; ++sc) coeff(sc, conf) = state(index(r, conf, sc / 2, sc % 2));
    }
    Eigen::Map<Matrix> block(full.data() + r * pairs_dim * inner, inner, pairs_dim);
    block.noalias() = coeff * products.transpose();
  }
  return full;
}

}  // namespace nonlocalsim::protocols
