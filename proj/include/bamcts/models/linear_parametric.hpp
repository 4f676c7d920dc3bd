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

// Shared machinery for systems of the form
//
//   x' = A(p) x + B(p, x) u + v,   v ~ N(0, Q)
//   p' = p + d,                    d ~ N(0, P_drift)
//   o  = h(x, u; p) + w,           w ~ N(0, R)
//
// where the parameters p are appended to the state to form the augmented
// vector s = [x; p]. Concrete models derive from LinearParametricModel and
// supply state_matrix(), input_matrix() and measure_state().

#pragma once

#include <concepts>
#include <limits>

#include "bamcts/core.hpp"

namespace bamcts {

template <int NX, int NP, int NU, int NO>
struct ModelDimensions {
  static constexpr int kStateDim = NX;
  static constexpr int kParamDim = NP;
  static constexpr int kControlDim = NU;
  static constexpr int kObsDim = NO;
  static constexpr int kAugDim = NX + NP;

  using State = Vec<NX>;
  using Params = Vec<NP>;
  using Control = Vec<NU>;
  using Observation = Vec<NO>;
  using Augmented = Vec<NX + NP>;

  using StateMatrix = Mat<NX, NX>;
  using InputMatrix = Mat<NX, NU>;
  using ParamMatrix = Mat<NP, NP>;
  using ObsCovariance = Mat<NO, NO>;
  using AugMatrix = Mat<NX + NP, NX + NP>;
  using ObsJacobian = Mat<NO, NX + NP>;
};

template <class Derived, class Dims>
class LinearParametricModel : public Dims {
 public:
  using typename Dims::Augmented;
  using typename Dims::AugMatrix;
  using typename Dims::Control;
  using typename Dims::InputMatrix;
  using typename Dims::ObsCovariance;
  using typename Dims::Observation;
  using typename Dims::ParamMatrix;
  using typename Dims::Params;
  using typename Dims::State;
  using typename Dims::StateMatrix;
  using Dims::kAugDim;
  using Dims::kParamDim;
  using Dims::kStateDim;

  LinearParametricModel(double dt, double u_max) : dt_(dt), u_max_(u_max) {
    if (!(dt > 0.0) || !std::isfinite(dt)) {
      throw std::invalid_argument("time step must be positive");
    }
    if (!(u_max > 0.0) || !std::isfinite(u_max)) {
      throw std::invalid_argument("control bound must be positive");
    }
    lower_bounds_.setConstant(-std::numeric_limits<double>::infinity());
    set_process_noise(StateMatrix::Zero());
    set_parameter_drift(ParamMatrix::Zero());
    set_measurement_noise(ObsCovariance::Zero());
  }

  double dt() const { return dt_; }
  double u_max() const { return u_max_; }

  const StateMatrix& process_noise() const { return process_cov_; }
  const ParamMatrix& parameter_drift() const { return drift_cov_; }
  const ObsCovariance& measurement_noise() const { return meas_cov_; }
  const Params& lower_bounds() const { return lower_bounds_; }

  void set_process_noise(const StateMatrix& q) {
    process_cov_ = 0.5 * (q + q.transpose());
    refresh_transition_noise();
  }
  /// Q = sigma^2 I over the physical state block.
  void set_process_sigma(double sigma) {
    set_process_noise(sigma * sigma * StateMatrix::Identity());
  }
  void set_parameter_drift(const ParamMatrix& p) {
    drift_cov_ = 0.5 * (p + p.transpose());
    refresh_transition_noise();
  }
  void set_measurement_noise(const ObsCovariance& r) {
    meas_cov_ = 0.5 * (r + r.transpose());
    meas_factor_ = psd_factor<Dims::kObsDim>(meas_cov_);
    has_meas_noise_ = !meas_cov_.isZero(0.0);
  }
  void set_lower_bounds(const Params& lb) { lower_bounds_ = lb; }

  /// blockdiag(Q, P_drift).
  const AugMatrix& transition_noise() const { return transition_cov_; }
  const AugMatrix& transition_noise_factor() const { return transition_factor_; }
  bool has_transition_noise() const { return has_transition_noise_; }
  const ObsCovariance& measurement_noise_factor() const { return meas_factor_; }
  bool has_measurement_noise() const { return has_meas_noise_; }

  Control saturate(const Control& u) const {
    return u.cwiseMax(-u_max_).cwiseMin(u_max_);
  }

  Params clamp_params(const Params& p) const { return p.cwiseMax(lower_bounds_); }

  Augmented clamp(const Augmented& s) const {
    Augmented out = s;
    out.template tail<kParamDim>() = clamp_params(params_of(s));
    return out;
  }

  static State state_of(const Augmented& s) { return s.template head<kStateDim>(); }
  static Params params_of(const Augmented& s) { return s.template tail<kParamDim>(); }
  static Augmented augment(const State& x, const Params& p) {
    Augmented s;
    s << x, p;
    return s;
  }

  /// Noise-free physical step f(x, u; p) = A(p) x + B(p, x) u.
  State step_state(const State& x, const Control& u, const Params& p) const {
    return self().state_matrix(p) * x + self().input_matrix(p, x) * u;
  }

  /// Noise-free augmented step: parameters are carried through unchanged.
  Augmented propagate(const Augmented& s, const Control& u) const {
    const Params p = params_of(s);
    return augment(step_state(state_of(s), u, p), p);
  }

  /// Noise-free observation h(x, u; p).
  Observation measure(const Augmented& s, const Control& u) const {
    return self().measure_state(state_of(s), u, params_of(s));
  }

 private:
  const Derived& self() const { return static_cast<const Derived&>(*this); }

  void refresh_transition_noise() {
    transition_cov_.setZero();
    transition_cov_.template topLeftCorner<kStateDim, kStateDim>() = process_cov_;
    transition_cov_.template bottomRightCorner<kParamDim, kParamDim>() = drift_cov_;
    transition_factor_ = psd_factor<kAugDim>(transition_cov_);
    has_transition_noise_ = !transition_cov_.isZero(0.0);
  }

  double dt_;
  double u_max_;
  StateMatrix process_cov_;
  ParamMatrix drift_cov_;
  ObsCovariance meas_cov_;
  Params lower_bounds_;
  AugMatrix transition_cov_;
  AugMatrix transition_factor_;
  ObsCovariance meas_factor_;
  bool has_transition_noise_ = false;
  bool has_meas_noise_ = false;
};

/// What the filter, the belief MDP and both planners need from a model.
template <class M>
concept ParametricModel =
    requires(const M& m, const typename M::Augmented& s, const typename M::Control& u,
             const typename M::State& x, const typename M::Params& p) {
      { m.propagate(s, u) } -> std::convertible_to<typename M::Augmented>;
      { m.measure(s, u) } -> std::convertible_to<typename M::Observation>;
      { m.state_matrix(p) } -> std::convertible_to<typename M::StateMatrix>;
      { m.input_matrix(p, x) } -> std::convertible_to<typename M::InputMatrix>;
      { m.saturate(u) } -> std::convertible_to<typename M::Control>;
      { m.clamp(s) } -> std::convertible_to<typename M::Augmented>;
      { m.transition_noise() } -> std::convertible_to<typename M::AugMatrix>;
      { m.measurement_noise() } -> std::convertible_to<typename M::ObsCovariance>;
      { m.u_max() } -> std::convertible_to<double>;
    };

/// Samples o = h(x, u; p) + w.
template <ParametricModel M>
typename M::Observation observe(const M& model, const typename M::Augmented& s,
                                const typename M::Control& u, Rng& rng) {
  typename M::Observation o = model.measure(s, u);
  if (model.has_measurement_noise()) {
    o += model.measurement_noise_factor() * standard_normal<M::kObsDim>(rng);
  }
  return o;
}

/// Advances the true augmented state one step. The control is saturated and
/// the parameter floors are enforced on the result.
template <ParametricModel M>
typename M::Augmented step_truth(const M& model, const typename M::Augmented& s,
                                 const typename M::Control& u, Rng& rng) {
  typename M::Augmented next = model.propagate(s, model.saturate(u));
  if (model.has_transition_noise()) {
    next += model.transition_noise_factor() * standard_normal<M::kAugDim>(rng);
  }
  return model.clamp(next);
}

}  // namespace bamcts
