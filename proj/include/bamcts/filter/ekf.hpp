// Copyright 2026 The bamcts Authors
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

// Extended Kalman filter over the augmented state-parameter vector.
//
//   predict:  s- = f(s, u),            Sigma- = F Sigma F^T + blockdiag(Q, P_drift)
//   correct:  r  = o - h(s-, u),       S = H Sigma- H^T + R + eps I
//             K  = Sigma- H^T S^-1,    s+ = s- + K r,  Sigma+ = (I - K H) Sigma-
//
// Covariances are symmetrized after every step and eigenvalue-floored at zero
// if they drift out of the PSD cone. Parameter means are clamped to the model
// floors after correction; the covariance is left untouched.

#pragma once

#include <algorithm>

#include "bamcts/models/linear_parametric.hpp"

namespace bamcts {

template <int N>
struct GaussianBelief {
  Vec<N> mean;
  Mat<N, N> cov;
};

template <ParametricModel M>
using BeliefOf = GaussianBelief<M::kAugDim>;

template <ParametricModel M>
struct Jacobians {
  typename M::AugMatrix dynamics;       // df/ds at (s, u)
  typename M::ObsJacobian observation;  // dh/ds at (s, u)
};

namespace ekf {

inline constexpr double kInnovationJitter = 1e-9;
inline constexpr double kPsdTolerance = 1e-9;

/// Central-difference Jacobians with step max(1e-6, 1e-6 |s_i|).
template <ParametricModel M>
Jacobians<M> numeric_jacobians(const M& model, const typename M::Augmented& s,
                               const typename M::Control& u) {
  Jacobians<M> out;
  for (int i = 0; i < M::kAugDim; ++i) {
    const double h = std::max(1e-6, 1e-6 * std::abs(s(i)));
    typename M::Augmented plus = s;
    typename M::Augmented minus = s;
    plus(i) += h;
    minus(i) -= h;
    out.dynamics.col(i) = (model.propagate(plus, u) - model.propagate(minus, u)) / (2.0 * h);
    out.observation.col(i) = (model.measure(plus, u) - model.measure(minus, u)) / (2.0 * h);
  }
  return out;
}

/// Analytic Jacobians where the model provides them, finite differences
/// otherwise.
template <ParametricModel M>
Jacobians<M> jacobians(const M& model, const typename M::Augmented& s,
                       const typename M::Control& u) {
  constexpr bool kAnalyticDynamics = requires { model.dynamics_jacobian(s, u); };
  constexpr bool kAnalyticObservation = requires { model.observation_jacobian(s, u); };
  if constexpr (kAnalyticDynamics && kAnalyticObservation) {
    return {model.dynamics_jacobian(s, u), model.observation_jacobian(s, u)};
  } else {
    Jacobians<M> out = numeric_jacobians(model, s, u);
    if constexpr (kAnalyticDynamics) out.dynamics = model.dynamics_jacobian(s, u);
    if constexpr (kAnalyticObservation) out.observation = model.observation_jacobian(s, u);
    return out;
  }
}

/// Symmetrizes and, if the smallest eigenvalue is below -1e-9, floors the
/// spectrum at zero.
template <int N>
Mat<N, N> condition_covariance(const Mat<N, N>& cov) {
  Mat<N, N> sym = 0.5 * (cov + cov.transpose());
  Eigen::LLT<Mat<N, N>> llt(sym + kPsdTolerance * Mat<N, N>::Identity());
  if (llt.info() == Eigen::Success) return sym;
  Eigen::SelfAdjointEigenSolver<Mat<N, N>> eig(sym);
  if (eig.info() != Eigen::Success) throw FilterDivergence("covariance eigensolve failed");
  const Vec<N> floored = eig.eigenvalues().cwiseMax(0.0);
  sym = eig.eigenvectors() * floored.asDiagonal() * eig.eigenvectors().transpose();
  return 0.5 * (sym + sym.transpose());
}

template <ParametricModel M>
BeliefOf<M> predict(const BeliefOf<M>& belief, const M& model, const typename M::Control& u) {
  const typename M::AugMatrix f = jacobians(model, belief.mean, u).dynamics;
  BeliefOf<M> out;
  out.mean = model.propagate(belief.mean, u);
  out.cov = f * belief.cov * f.transpose() + model.transition_noise();
  if (!out.mean.allFinite() || !out.cov.allFinite()) {
    throw FilterDivergence("non-finite prediction");
  }
  out.cov = condition_covariance<M::kAugDim>(out.cov);
  return out;
}

template <ParametricModel M>
BeliefOf<M> correct(const BeliefOf<M>& predicted, const M& model, const typename M::Control& u,
                    const typename M::Observation& o) {
  using ObsCov = typename M::ObsCovariance;
  const typename M::ObsJacobian h = jacobians(model, predicted.mean, u).observation;
  const typename M::Observation residual = o - model.measure(predicted.mean, u);

  const Mat<M::kObsDim, M::kAugDim> h_sigma = h * predicted.cov;
  ObsCov s = h_sigma * h.transpose() + model.measurement_noise() +
             kInnovationJitter * ObsCov::Identity();
  s = 0.5 * (s + s.transpose());
  Eigen::LDLT<ObsCov> ldlt(s);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
    throw FilterDivergence("singular innovation covariance");
  }
  // K = Sigma- H^T S^-1 = (S^-1 H Sigma-)^T since S and Sigma- are symmetric.
  const Mat<M::kAugDim, M::kObsDim> gain = ldlt.solve(h_sigma).transpose();

  BeliefOf<M> out;
  out.mean = predicted.mean + gain * residual;
  out.cov = (M::AugMatrix::Identity() - gain * h) * predicted.cov;
  if (!out.mean.allFinite() || !out.cov.allFinite()) {
    throw FilterDivergence("non-finite correction");
  }
  out.cov = condition_covariance<M::kAugDim>(out.cov);
  out.mean = model.clamp(out.mean);
  return out;
}

/// predict followed by correct.
template <ParametricModel M>
BeliefOf<M> update(const BeliefOf<M>& belief, const M& model, const typename M::Control& u,
                   const typename M::Observation& o) {
  return correct(predict(belief, model, u), model, u, o);
}

}  // namespace ekf
}  // namespace bamcts
