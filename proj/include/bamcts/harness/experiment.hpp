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

// Closed-loop simulation of estimation and control. Each step:
//
//   u      <- policy(b)
//   s'     <- true dynamics(s, u)
//   o      <- measurement of s' (taken with u)
//   b      <- EKF(b, u, o)
//   reward += R(mean state of b, u)
//
// which is the same transition the MCTS planner samples from its generative
// model.

#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "bamcts/belief_mdp.hpp"
#include "bamcts/models/double_integrator.hpp"
#include "bamcts/models/planar_manipulation.hpp"
#include "bamcts/planners/mcts_dpw.hpp"
#include "bamcts/planners/mpc.hpp"

namespace bamcts {

enum class ModelKind { kDoubleIntegrator, kPlanarManipulation };
enum class PolicyKind { kMcts, kMpc };
enum class SweepAxis { kNone, kProcessNoise, kParamSigma };
enum class TruthMode { kPrior, kFixed };

inline ModelKind parse_model_kind(std::string_view s) {
  if (s == "1d") return ModelKind::kDoubleIntegrator;
  if (s == "pm") return ModelKind::kPlanarManipulation;
  throw std::invalid_argument("unknown model: " + std::string(s));
}
inline PolicyKind parse_policy_kind(std::string_view s) {
  if (s == "mcts") return PolicyKind::kMcts;
  if (s == "mpc") return PolicyKind::kMpc;
  throw std::invalid_argument("unknown policy: " + std::string(s));
}
inline SweepAxis parse_sweep_axis(std::string_view s) {
  if (s == "none") return SweepAxis::kNone;
  if (s == "process_noise") return SweepAxis::kProcessNoise;
  if (s == "param_sigma") return SweepAxis::kParamSigma;
  throw std::invalid_argument("unknown sweep axis: " + std::string(s));
}
inline TruthMode parse_truth_mode(std::string_view s) {
  if (s == "prior") return TruthMode::kPrior;
  if (s == "fixed") return TruthMode::kFixed;
  throw std::invalid_argument("unknown truth mode: " + std::string(s));
}
inline const char* to_string(ModelKind k) {
  return k == ModelKind::kDoubleIntegrator ? "1d" : "pm";
}
inline const char* to_string(PolicyKind k) { return k == PolicyKind::kMcts ? "mcts" : "mpc"; }
inline const char* to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::kProcessNoise: return "process_noise";
    case SweepAxis::kParamSigma: return "param_sigma";
    default: return "none";
  }
}
inline const char* to_string(TruthMode t) { return t == TruthMode::kPrior ? "prior" : "fixed"; }

struct ExperimentConfig {
  ModelKind model = ModelKind::kDoubleIntegrator;
  PolicyKind policy = PolicyKind::kMcts;
  RewardSpec reward;
  MctsConfig mcts;
  MpcConfig mpc;

  double dt = 0.1;
  double u_max = 300.0;
  int steps = 100;
  int trials = 30;

  double process_sigma = 1.0;
  // Initial belief standard deviation of every parameter, optionally
  // overridden for the mass (the quantity a param_sigma sweep varies).
  double param_sigma = std::sqrt(10.0);
  std::optional<double> mass_sigma;
  double param_mean = 5.0;
  double param_floor = 1.0;
  double param_drift_var = 0.0;
  double initial_state_var = 0.0;

  SweepAxis sweep = SweepAxis::kNone;
  std::vector<double> sweep_values;

  TruthMode truth = TruthMode::kPrior;
  std::vector<double> truth_params;   // fixed mode; empty means param_mean
  std::vector<double> initial_state;  // empty means the model default
  std::vector<double> sensor_offset{0.0, 0.0};

  std::uint64_t seed = 1;
  int threads = 0;  // 0: hardware concurrency

  void validate() const {
    if (steps < 0) throw std::invalid_argument("steps must be >= 0");
    if (trials < 1) throw std::invalid_argument("trials must be >= 1");
    if (!(dt > 0.0) || !(u_max > 0.0)) throw std::invalid_argument("dt and u_max must be > 0");
    if (!(process_sigma >= 0.0) || !(param_sigma >= 0.0) || !(param_drift_var >= 0.0) ||
        !(initial_state_var >= 0.0) || !(mass_sigma.value_or(0.0) >= 0.0)) {
      throw std::invalid_argument("noise levels must be non-negative");
    }
    for (double v : sweep_values) {
      if (!(v > 0.0)) throw std::invalid_argument("sweep values must be > 0");
    }
    if (sweep != SweepAxis::kNone && sweep_values.empty()) {
      throw std::invalid_argument("sweep requested without sweep values");
    }
    if (sensor_offset.size() != 2) throw std::invalid_argument("sensor offset needs 2 values");
    reward.validate();
    mcts.validate();
    mpc.validate();
  }
};

/// Shipped defaults for each domain.
inline ExperimentConfig default_config(ModelKind model) {
  ExperimentConfig cfg;
  cfg.model = model;
  if (model == ModelKind::kDoubleIntegrator) {
    cfg.u_max = 300.0;
    cfg.reward = {RewardKind::kL1, -10.0, -3.0, -1.0};
    cfg.mcts.exploration = 300.0;
    cfg.mcts.rollout_gain = 4.0;
    cfg.mcts.iterations = 2000;
  } else {
    cfg.u_max = 100.0;
    cfg.reward = {RewardKind::kL1, -1.0, -1.0, -0.1};
    cfg.mcts.exploration = 100.0;
    cfg.mcts.rollout_gain = 8.0;
    cfg.mcts.iterations = 100;
  }
  cfg.mcts.widening_k = 8.0;
  cfg.mcts.widening_alpha = 0.2;
  cfg.mcts.depth = 20;
  cfg.mpc.horizon = 20;
  return cfg;
}

inline std::vector<double> default_initial_state(ModelKind model) {
  if (model == ModelKind::kDoubleIntegrator) return {10.0, 0.0};
  return {5.0, 5.0, std::numbers::pi / 4.0, 0.0, 0.0, 0.0};
}

struct StepRecord {
  int step = 0;
  double reward = 0.0;
  std::vector<double> action;
  std::vector<double> mean;
  double cov_trace = 0.0;
  double wall_ms = 0.0;
};

struct TrialResult {
  double total_reward = 0.0;
  bool flagged = false;
  std::string flag_reason;
  std::vector<double> true_params;
  std::vector<double> final_state;
  std::vector<StepRecord> steps;
  int solver_fallbacks = 0;  // MPC steps that executed the solver's best iterate
};

namespace detail {

template <class ModelT>
ModelT make_model(const ExperimentConfig& cfg) {
  if constexpr (std::is_same_v<ModelT, DoubleIntegrator>) {
    ModelT model = build_double_integrator(cfg.dt, cfg.u_max, cfg.param_floor);
    model.set_process_sigma(cfg.process_sigma);
    model.set_parameter_drift(cfg.param_drift_var * ModelT::ParamMatrix::Identity());
    return model;
  } else {
    ModelT model = build_planar_manipulation(cfg.dt, cfg.u_max, cfg.param_floor);
    model.set_process_sigma(cfg.process_sigma);
    model.set_parameter_drift(cfg.param_drift_var * ModelT::ParamMatrix::Identity());
    model.set_sensor_offset({cfg.sensor_offset[0], cfg.sensor_offset[1]});
    return model;
  }
}

template <class V>
std::vector<double> to_vector(const V& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

// Normal draw rejected below `floor` (a truncated normal); gives up after a
// bounded number of attempts and returns the floor.
inline double truncated_normal(double mean, double sigma, double floor, Rng& rng) {
  if (sigma == 0.0) return std::max(mean, floor);
  std::normal_distribution<double> normal(mean, sigma);
  for (int i = 0; i < 10000; ++i) {
    const double v = normal(rng);
    if (v >= floor) return v;
  }
  return floor;
}

template <class ModelT>
typename ModelT::State initial_state(const ExperimentConfig& cfg) {
  const std::vector<double> init =
      cfg.initial_state.empty() ? default_initial_state(cfg.model) : cfg.initial_state;
  if (static_cast<int>(init.size()) != ModelT::kStateDim) {
    throw std::invalid_argument("initial state has the wrong dimension");
  }
  typename ModelT::State x0;
  for (int i = 0; i < ModelT::kStateDim; ++i) x0(i) = init[i];
  return x0;
}

template <class ModelT>
typename ModelT::Params initial_param_sigma(const ExperimentConfig& cfg) {
  typename ModelT::Params sigma = ModelT::Params::Constant(cfg.param_sigma);
  if (cfg.mass_sigma) sigma(0) = *cfg.mass_sigma;
  return sigma;
}

/// Prior belief: known initial state (up to initial_state_var), parameters
/// N(param_mean, sigma^2) with independent components.
template <class ModelT>
BeliefOf<ModelT> initial_belief(const ExperimentConfig& cfg, const ModelT& model) {
  constexpr int np = ModelT::kParamDim;
  constexpr int nx = ModelT::kStateDim;
  BeliefOf<ModelT> belief;
  belief.mean = ModelT::augment(initial_state<ModelT>(cfg),
                                model.clamp_params(ModelT::Params::Constant(cfg.param_mean)));
  belief.cov.setZero();
  belief.cov.template topLeftCorner<nx, nx>().diagonal().setConstant(cfg.initial_state_var);
  belief.cov.template bottomRightCorner<np, np>().diagonal() =
      initial_param_sigma<ModelT>(cfg).cwiseAbs2();
  return belief;
}

/// True parameters: fixed, or drawn from the prior truncated at the floors.
template <class ModelT>
typename ModelT::Params sample_true_params(const ExperimentConfig& cfg, const ModelT& model,
                                           Rng& rng) {
  constexpr int np = ModelT::kParamDim;
  using Params = typename ModelT::Params;
  Params p_true;
  if (cfg.truth == TruthMode::kFixed) {
    if (cfg.truth_params.empty()) {
      p_true = Params::Constant(cfg.param_mean);
    } else {
      if (static_cast<int>(cfg.truth_params.size()) != np) {
        throw std::invalid_argument("truth parameters have the wrong dimension");
      }
      for (int i = 0; i < np; ++i) p_true(i) = cfg.truth_params[i];
    }
  } else {
    const Params sigma = initial_param_sigma<ModelT>(cfg);
    for (int i = 0; i < np; ++i) {
      p_true(i) = truncated_normal(cfg.param_mean, sigma(i), model.lower_bounds()(i), rng);
    }
  }
  return model.clamp_params(p_true);
}

template <class ModelT>
TrialResult run_trial_impl(const ExperimentConfig& cfg, std::uint64_t trial_seed) {
  using Control = typename ModelT::Control;

  const ModelT model = make_model<ModelT>(cfg);
  Rng truth_rng(trial_seed);
  Rng policy_rng(mix_seed(trial_seed ^ 0x5bd1e9955bd1e995ULL));

  const typename ModelT::Params p_true = sample_true_params(cfg, model, truth_rng);
  typename ModelT::Augmented truth = ModelT::augment(initial_state<ModelT>(cfg), p_true);
  BeliefOf<ModelT> belief = initial_belief(cfg, model);

  std::optional<DpwPlanner<ModelT>> mcts;
  if (cfg.policy == PolicyKind::kMcts) mcts.emplace(model, cfg.reward, cfg.mcts);

  TrialResult result;
  result.true_params = to_vector(p_true);
  result.steps.reserve(static_cast<std::size_t>(cfg.steps));
  try {
    for (int t = 0; t < cfg.steps; ++t) {
      const auto start = std::chrono::steady_clock::now();
      Control u;
      if (cfg.policy == PolicyKind::kMcts) {
        u = mcts->plan(belief, policy_rng);
      } else {
        try {
          u = plan_mpc(belief.mean, model, cfg.reward, cfg.mpc);
        } catch (const SolverError& e) {
          u = e.best_iterate.allFinite() ? Control(e.best_iterate.head(ModelT::kControlDim))
                                         : Control::Zero();
          ++result.solver_fallbacks;
        }
      }
      u = model.saturate(u);
      const auto stop = std::chrono::steady_clock::now();

      // Measurement of the pre-step state, then the filter, then the plant.
      const typename ModelT::Observation o = observe(model, truth, u, truth_rng);
      belief = ekf::update(belief, model, u, o);
      truth = step_truth(model, truth, u, truth_rng);
      const double r = reward<ModelT>(cfg.reward, ModelT::state_of(belief.mean), u);
      result.total_reward += r;

      StepRecord rec;
      rec.step = t;
      rec.reward = r;
      rec.action = to_vector(u);
      rec.mean = to_vector(belief.mean);
      rec.cov_trace = belief.cov.trace();
      rec.wall_ms = std::chrono::duration<double, std::milli>(stop - start).count();
      result.steps.push_back(std::move(rec));
    }
  } catch (const FilterDivergence& e) {
    result.flagged = true;
    result.flag_reason = std::string("filter divergence: ") + e.what();
  }
  result.final_state = to_vector(ModelT::state_of(truth));
  return result;
}

}  // namespace detail

/// Calls fn(std::type_identity<ModelT>{}) with the configured model type.
template <class Fn>
decltype(auto) visit_model(ModelKind kind, Fn&& fn) {
  if (kind == ModelKind::kDoubleIntegrator) return fn(std::type_identity<DoubleIntegrator>{});
  return fn(std::type_identity<PlanarManipulation>{});
}

/// Runs one closed-loop trial with the configuration's current noise levels.
inline TrialResult run_trial(const ExperimentConfig& cfg, std::uint64_t trial_seed) {
  cfg.validate();
  return visit_model(cfg.model, [&]<class ModelT>(std::type_identity<ModelT>) {
    return detail::run_trial_impl<ModelT>(cfg, trial_seed);
  });
}

}  // namespace bamcts
