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

// Certainty-equivalent receding-horizon control. The planner sees only the
// mean of the augmented belief: the dynamics are A(p_hat), B(p_hat, x_hat)
// with B frozen at the current state for the whole horizon, and the program
//
//   maximize  sum_{k=0}^{H-1} R(x_{k+1}, u_k)   s.t. |u_k|_inf <= u_max
//
// is condensed onto the control sequence (states eliminated through the
// dynamics) and handed to solve_convex().

#pragma once

#include <vector>

#include "bamcts/belief_mdp.hpp"
#include "bamcts/planners/convex_program.hpp"

namespace bamcts {

struct MpcConfig {
  int horizon = 20;
  double tolerance = 1e-6;  // objective-relative optimality
  int max_iterations = 100;

  void validate() const {
    if (horizon < 1) throw std::invalid_argument("MPC horizon must be >= 1");
    if (!(tolerance > 0.0)) throw std::invalid_argument("MPC tolerance must be > 0");
  }
};

struct MpcPlan {
  Eigen::VectorXd controls;  // stacked u_0 .. u_{H-1}
  double predicted_reward = 0.0;
  int solver_iterations = 0;
};

/// Stacked state predictions y = offsets + gains * z over the horizon, where
/// z stacks the controls; block (k, j) of `gains` is A^(k-j) B for j <= k.
struct Prediction {
  Eigen::VectorXd offsets;
  Eigen::MatrixXd gains;
};

template <ParametricModel M>
typename M::State mpc_initial_state(const typename M::Augmented& mean) {
  typename M::State x0 = M::state_of(mean);
  if constexpr (M::kAngleIndex >= 0) x0(M::kAngleIndex) = wrap_angle(x0(M::kAngleIndex));
  return x0;
}

template <ParametricModel M>
Prediction condensed_prediction(const typename M::Augmented& mean, const M& model, int horizon) {
  constexpr int nx = M::kStateDim;
  constexpr int nu = M::kControlDim;
  const typename M::Params p = M::params_of(mean);
  const typename M::State x0 = mpc_initial_state<M>(mean);
  const typename M::StateMatrix a = model.state_matrix(p);
  const typename M::InputMatrix b = model.input_matrix(p, x0);

  // powers[i] = A^i B
  std::vector<typename M::InputMatrix> powers(static_cast<std::size_t>(horizon));
  powers[0] = b;
  for (int i = 1; i < horizon; ++i) powers[i] = a * powers[i - 1];

  Prediction pred;
  pred.offsets.resize(horizon * nx);
  pred.gains = Eigen::MatrixXd::Zero(horizon * nx, horizon * nu);
  typename M::State free = x0;
  for (int k = 0; k < horizon; ++k) {
    free = a * free;
    pred.offsets.segment(k * nx, nx) = free;
    for (int j = 0; j <= k; ++j) {
      pred.gains.block(k * nx, j * nu, nx, nu) = powers[k - j];
    }
  }
  return pred;
}

/// Per-component penalty magnitudes (>= 0) of the stacked predicted states.
template <ParametricModel M>
Eigen::VectorXd state_penalty_weights(const RewardSpec& spec, int horizon) {
  constexpr int nx = M::kStateDim;
  Eigen::VectorXd w(horizon * nx);
  for (int k = 0; k < horizon; ++k) {
    for (int i = 0; i < nx; ++i) {
      w(k * nx + i) = -(i < nx / 2 ? spec.position_weight : spec.velocity_weight);
    }
  }
  return w;
}

/// The condensed program as a minimization of the negated reward.
template <ParametricModel M>
ConvexProgram build_mpc_program(const typename M::Augmented& mean, const M& model,
                                const RewardSpec& spec, int horizon) {
  constexpr int nu = M::kControlDim;
  const int n = horizon * nu;
  const Prediction pred = condensed_prediction(mean, model, horizon);
  const Eigen::VectorXd state_w = state_penalty_weights<M>(spec, horizon);
  const double control_w = -spec.control_weight;

  ConvexProgram prog;
  prog.lower = Eigen::VectorXd::Constant(n, -model.u_max());
  prog.upper = Eigen::VectorXd::Constant(n, model.u_max());

  if (spec.kind == RewardKind::kL1) {
    // Epigraph rows: every weighted predicted state, then every control.
    std::vector<int> rows;
    for (int i = 0; i < state_w.size(); ++i) {
      if (state_w(i) > 0.0) rows.push_back(i);
    }
    const int state_rows = static_cast<int>(rows.size());
    const int total = state_rows + (control_w > 0.0 ? n : 0);
    prog.abs_rows = Eigen::MatrixXd::Zero(total, n);
    prog.abs_offsets = Eigen::VectorXd::Zero(total);
    prog.abs_weights = Eigen::VectorXd::Zero(total);
    for (int k = 0; k < state_rows; ++k) {
      prog.abs_rows.row(k) = pred.gains.row(rows[k]);
      prog.abs_offsets(k) = pred.offsets(rows[k]);
      prog.abs_weights(k) = state_w(rows[k]);
    }
    if (control_w > 0.0) {
      prog.abs_rows.bottomRows(n).setIdentity();
      prog.abs_weights.tail(n).setConstant(control_w);
    }
  } else {
    // (o + G z)^T W (o + G z) + w_u z^T z
    const Eigen::MatrixXd wg = state_w.asDiagonal() * pred.gains;
    prog.quadratic = 2.0 * (pred.gains.transpose() * wg);
    prog.quadratic.diagonal().array() += 2.0 * control_w;
    prog.linear = 2.0 * (wg.transpose() * pred.offsets);
    prog.constant = pred.offsets.dot(state_w.cwiseProduct(pred.offsets));
  }
  return prog;
}

/// Solves the certainty-equivalent program. Only the belief mean is read.
template <ParametricModel M>
MpcPlan solve_mpc(const typename M::Augmented& mean, const M& model, const RewardSpec& spec,
                  const MpcConfig& config) {
  config.validate();
  const ConvexProgram prog = build_mpc_program(mean, model, spec, config.horizon);
  SolverOptions opts;
  opts.tolerance = std::min(1e-9, config.tolerance);
  opts.max_iterations = config.max_iterations;
  opts.acceptable_tolerance = config.tolerance;
  const ConvexSolution sol = solve_convex(prog, opts);
  return {sol.z, -sol.objective, sol.iterations};
}

/// First action of the receding-horizon plan, inside the control box.
template <ParametricModel M>
typename M::Control plan_mpc(const typename M::Augmented& mean, const M& model,
                             const RewardSpec& spec, const MpcConfig& config) {
  const MpcPlan plan = solve_mpc(mean, model, spec, config);
  return model.saturate(plan.controls.head(M::kControlDim));
}

}  // namespace bamcts
