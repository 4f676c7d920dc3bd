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

// Plain-text experiment configuration: one `key = value` per line, `#`
// starts a comment, lists are comma separated. The `model` key selects the
// domain defaults and is applied before every other key regardless of its
// position in the file. Recognized keys:
//
//   model               1d | pm
//   policy              mcts | mpc
//   reward              l1 | l2
//   reward.position     reward.velocity     reward.control
//   steps  trials  dt  u_max  seed  threads
//   process_sigma       param_sigma         mass_sigma
//   param_mean          param_floor         param_drift_var
//   initial_state_var   initial_state       sensor_offset
//   sweep               none | process_noise | param_sigma
//   sweep_values        e.g. 0.0316, 0.1, 0.316, 1.0
//   truth               prior | fixed
//   truth_params
//   mcts.exploration    mcts.k   mcts.alpha   mcts.depth
//   mcts.iterations     mcts.rollout_gain     mcts.discount
//   mpc.horizon         mpc.tolerance

#pragma once

#include <fstream>
#include <istream>
#include <map>
#include <sstream>
#include <string>

#include "bamcts/harness/experiment.hpp"

namespace bamcts {

namespace detail {

inline std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

inline double parse_double(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(value, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("bad number for " + key + ": " + value);
  }
  if (used != value.size()) throw std::invalid_argument("bad number for " + key + ": " + value);
  return v;
}

inline int parse_int(const std::string& key, const std::string& value) {
  const double v = parse_double(key, value);
  if (v != std::floor(v)) throw std::invalid_argument("expected an integer for " + key);
  return static_cast<int>(v);
}

inline std::vector<double> parse_list(const std::string& key, const std::string& value) {
  std::vector<double> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(parse_double(key, item));
  }
  return out;
}

}  // namespace detail

/// Applies one key to `cfg`. Unknown keys are an error.
inline void apply_config_key(ExperimentConfig& cfg, const std::string& key,
                             const std::string& value) {
  using detail::parse_double;
  using detail::parse_int;
  using detail::parse_list;
  if (key == "model") {
    if (parse_model_kind(value) != cfg.model) {
      throw std::invalid_argument("model must be applied before other keys");
    }
  } else if (key == "policy") {
    cfg.policy = parse_policy_kind(value);
  } else if (key == "reward") {
    cfg.reward.kind = parse_reward_kind(value);
  } else if (key == "reward.position") {
    cfg.reward.position_weight = parse_double(key, value);
  } else if (key == "reward.velocity") {
    cfg.reward.velocity_weight = parse_double(key, value);
  } else if (key == "reward.control") {
    cfg.reward.control_weight = parse_double(key, value);
  } else if (key == "steps") {
    cfg.steps = parse_int(key, value);
  } else if (key == "trials") {
    cfg.trials = parse_int(key, value);
  } else if (key == "dt") {
    cfg.dt = parse_double(key, value);
  } else if (key == "u_max") {
    cfg.u_max = parse_double(key, value);
  } else if (key == "seed") {
    cfg.seed = static_cast<std::uint64_t>(std::stoull(value));
  } else if (key == "threads") {
    cfg.threads = parse_int(key, value);
  } else if (key == "process_sigma") {
    cfg.process_sigma = parse_double(key, value);
  } else if (key == "param_sigma") {
    cfg.param_sigma = parse_double(key, value);
  } else if (key == "mass_sigma") {
    cfg.mass_sigma = parse_double(key, value);
  } else if (key == "param_mean") {
    cfg.param_mean = parse_double(key, value);
  } else if (key == "param_floor") {
    cfg.param_floor = parse_double(key, value);
  } else if (key == "param_drift_var") {
    cfg.param_drift_var = parse_double(key, value);
  } else if (key == "initial_state_var") {
    cfg.initial_state_var = parse_double(key, value);
  } else if (key == "initial_state") {
    cfg.initial_state = parse_list(key, value);
  } else if (key == "sensor_offset") {
    cfg.sensor_offset = parse_list(key, value);
  } else if (key == "sweep") {
    cfg.sweep = parse_sweep_axis(value);
  } else if (key == "sweep_values") {
    cfg.sweep_values = parse_list(key, value);
  } else if (key == "truth") {
    cfg.truth = parse_truth_mode(value);
  } else if (key == "truth_params") {
    cfg.truth_params = parse_list(key, value);
  } else if (key == "mcts.exploration") {
    cfg.mcts.exploration = parse_double(key, value);
  } else if (key == "mcts.k") {
    cfg.mcts.widening_k = parse_double(key, value);
  } else if (key == "mcts.alpha") {
    cfg.mcts.widening_alpha = parse_double(key, value);
  } else if (key == "mcts.depth") {
    cfg.mcts.depth = parse_int(key, value);
  } else if (key == "mcts.iterations") {
    cfg.mcts.iterations = parse_int(key, value);
  } else if (key == "mcts.rollout_gain") {
    cfg.mcts.rollout_gain = parse_double(key, value);
  } else if (key == "mcts.discount") {
    cfg.mcts.discount = parse_double(key, value);
  } else if (key == "mpc.horizon") {
    cfg.mpc.horizon = parse_int(key, value);
  } else if (key == "mpc.tolerance") {
    cfg.mpc.tolerance = parse_double(key, value);
  } else {
    throw std::invalid_argument("unknown config key: " + key);
  }
}

/// Parses a configuration stream on top of the defaults of its model.
inline ExperimentConfig parse_config(std::istream& in) {
  std::vector<std::pair<std::string, std::string>> entries;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key = value");
    }
    entries.emplace_back(detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
  }

  ModelKind model = ModelKind::kDoubleIntegrator;
  for (const auto& [k, v] : entries) {
    if (k == "model") model = parse_model_kind(v);
  }
  ExperimentConfig cfg = default_config(model);
  for (const auto& [k, v] : entries) apply_config_key(cfg, k, v);
  cfg.validate();
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  return parse_config(in);
}

namespace detail {
inline std::string join(const std::vector<double>& v) {
  std::ostringstream os;
  os << std::setprecision(17);
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
  return os.str();
}
}  // namespace detail

/// Writes every key, so the output round-trips through parse_config().
inline void write_config(std::ostream& os, const ExperimentConfig& cfg) {
  os << std::setprecision(17);
  os << "model = " << to_string(cfg.model) << '\n'
     << "policy = " << to_string(cfg.policy) << '\n'
     << "reward = " << to_string(cfg.reward.kind) << '\n'
     << "reward.position = " << cfg.reward.position_weight << '\n'
     << "reward.velocity = " << cfg.reward.velocity_weight << '\n'
     << "reward.control = " << cfg.reward.control_weight << '\n'
     << "steps = " << cfg.steps << '\n'
     << "trials = " << cfg.trials << '\n'
     << "dt = " << cfg.dt << '\n'
     << "u_max = " << cfg.u_max << '\n'
     << "seed = " << cfg.seed << '\n'
     << "threads = " << cfg.threads << '\n'
     << "process_sigma = " << cfg.process_sigma << '\n'
     << "param_sigma = " << cfg.param_sigma << '\n';
  if (cfg.mass_sigma) os << "mass_sigma = " << *cfg.mass_sigma << '\n';
  os << "param_mean = " << cfg.param_mean << '\n'
     << "param_floor = " << cfg.param_floor << '\n'
     << "param_drift_var = " << cfg.param_drift_var << '\n'
     << "initial_state_var = " << cfg.initial_state_var << '\n';
  if (!cfg.initial_state.empty()) os << "initial_state = " << detail::join(cfg.initial_state) << '\n';
  os << "sensor_offset = " << detail::join(cfg.sensor_offset) << '\n'
     << "sweep = " << to_string(cfg.sweep) << '\n';
  if (!cfg.sweep_values.empty()) os << "sweep_values = " << detail::join(cfg.sweep_values) << '\n';
  os << "truth = " << to_string(cfg.truth) << '\n';
  if (!cfg.truth_params.empty()) os << "truth_params = " << detail::join(cfg.truth_params) << '\n';
  os << "mcts.exploration = " << cfg.mcts.exploration << '\n'
     << "mcts.k = " << cfg.mcts.widening_k << '\n'
     << "mcts.alpha = " << cfg.mcts.widening_alpha << '\n'
     << "mcts.depth = " << cfg.mcts.depth << '\n'
     << "mcts.iterations = " << cfg.mcts.iterations << '\n'
     << "mcts.rollout_gain = " << cfg.mcts.rollout_gain << '\n'
     << "mcts.discount = " << cfg.mcts.discount << '\n'
     << "mpc.horizon = " << cfg.mpc.horizon << '\n'
     << "mpc.tolerance = " << cfg.mpc.tolerance << '\n';
}

}  // namespace bamcts
