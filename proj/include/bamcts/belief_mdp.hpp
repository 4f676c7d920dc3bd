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

#pragma once

#include <stdexcept>
#include <string_view>

#include "bamcts/filter/ekf.hpp"

namespace bamcts {

enum class RewardKind { kL1, kL2 };

/// Diagonal penalty weights on the mean state and the action. The first half
/// of the state vector is the position block and the second half the
/// velocity block; angles are wrapped to (-pi, pi] before penalizing.
struct RewardSpec {
  RewardKind kind = RewardKind::kL1;
  double position_weight = -10.0;
  double velocity_weight = -3.0;
  double control_weight = -1.0;

  void validate() const {
    if (position_weight > 0.0 || velocity_weight > 0.0 || control_weight > 0.0) {
      throw std::invalid_argument("reward weights must be non-positive");
    }
  }
};

inline RewardKind parse_reward_kind(std::string_view name) {
  if (name == "l1" || name == "L1") return RewardKind::kL1;
  if (name == "l2" || name == "L2") return RewardKind::kL2;
  throw std::invalid_argument("unknown reward kind: " + std::string(name));
}

inline const char* to_string(RewardKind kind) {
  return kind == RewardKind::kL1 ? "l1" : "l2";
}

namespace detail {
inline double penalty(RewardKind kind, double v) {
  return kind == RewardKind::kL1 ? std::abs(v) : v * v;
}
}  // namespace detail

template <ParametricModel M>
double reward(const RewardSpec& spec, const typename M::State& x,
              const typename M::Control& u) {
  constexpr int kHalf = M::kStateDim / 2;
  double pos = 0.0;
  double vel = 0.0;
  double effort = 0.0;
  for (int i = 0; i < kHalf; ++i) {
    const double xi = (i == M::kAngleIndex) ? wrap_angle(x(i)) : x(i);
    pos += detail::penalty(spec.kind, xi);
    vel += detail::penalty(spec.kind, x(kHalf + i));
  }
  for (int i = 0; i < M::kControlDim; ++i) effort += detail::penalty(spec.kind, u(i));
  return spec.position_weight * pos + spec.velocity_weight * vel + spec.control_weight * effort;
}

template <ParametricModel M>
struct BeliefTransition {
  BeliefOf<M> next_belief;
  double reward;
  typename M::Observation observation;
};

/// Generative model of the belief MDP: samples a next true state around the
/// propagated mean, samples an observation of it, runs the EKF, and scores
/// the updated mean state.
template <ParametricModel M>
BeliefTransition<M> generate(const BeliefOf<M>& belief, const typename M::Control& u_raw,
                             const M& model, const RewardSpec& spec, Rng& rng) {
  const typename M::Control u = model.saturate(u_raw);
  typename M::Augmented next = model.propagate(belief.mean, u);
  if (model.has_transition_noise()) {
    next += model.transition_noise_factor() * standard_normal<M::kAugDim>(rng);
  }
  next = model.clamp(next);
  const typename M::Observation o = observe(model, next, u, rng);
  BeliefTransition<M> out{ekf::update(belief, model, u, o), 0.0, o};
  out.reward = reward<M>(spec, M::state_of(out.next_belief.mean), u);
  return out;
}

}  // namespace bamcts
