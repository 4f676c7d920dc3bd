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

// Monte Carlo tree search with double progressive widening over the EKF
// belief MDP.
//
// Each iteration descends from the root. At a belief node s a new action is
// admitted while |actions(s)| < ceil(k (N(s) + 1)^alpha); the first admitted
// action is the proportional rollout controller's, later ones are uniform on
// the control box. Actions are chosen by UCB
//
//   Q(s, u) + c sqrt(log N(s) / N(s, u))      (unvisited actions first)
//
// and a new child belief is sampled from the generative model while
// |children(s, u)| < ceil(k (N(s, u) + 1)^alpha). A freshly sampled child is
// valued by a rollout; otherwise an existing child is revisited with
// probability proportional to its transition count. The tree is rebuilt on
// every call to plan().

#pragma once

#include <cmath>
#include <limits>
#include <ostream>
#include <vector>

#include "bamcts/belief_mdp.hpp"

namespace bamcts {

struct MctsConfig {
  double exploration = 300.0;
  double widening_k = 8.0;
  double widening_alpha = 0.2;
  int depth = 20;
  int iterations = 2000;
  double rollout_gain = 4.0;
  double discount = 1.0;
  int max_retries = 10;

  void validate() const {
    if (!(exploration >= 0.0)) throw std::invalid_argument("exploration constant must be >= 0");
    if (!(widening_k > 0.0)) throw std::invalid_argument("widening k must be > 0");
    if (!(widening_alpha > 0.0 && widening_alpha < 1.0)) {
      throw std::invalid_argument("widening alpha must lie in (0, 1)");
    }
    if (depth < 1) throw std::invalid_argument("search depth must be >= 1");
    if (iterations < 1) throw std::invalid_argument("iterations must be >= 1");
    if (!(discount > 0.0 && discount <= 1.0)) {
      throw std::invalid_argument("discount must lie in (0, 1]");
    }
  }

  /// ceil(k n^alpha)
  std::size_t width_limit(int visits) const {
    if (visits <= 0) return 0;
    return static_cast<std::size_t>(std::ceil(widening_k * std::pow(visits, widening_alpha)));
  }
};

/// One completed iteration, for offline auditing of the root backups.
struct MctsTraceRecord {
  int iteration = 0;
  int depth_reached = 0;
  int root_action = -1;
  double root_return = 0.0;
};

inline void write_trace_csv(std::ostream& os, const std::vector<MctsTraceRecord>& trace) {
  os << "iteration,depth_reached,root_action,return\n";
  os.precision(17);
  for (const auto& r : trace) {
    os << r.iteration << ',' << r.depth_reached << ',' << r.root_action << ',' << r.root_return
       << '\n';
  }
}

/// Proportional position controller, -gain * (position block), saturated.
template <ParametricModel M>
typename M::Control proportional_action(const M& model, const BeliefOf<M>& belief, double gain) {
  static_assert(M::kStateDim / 2 == M::kControlDim,
                "rollout controller maps each position coordinate to one control");
  typename M::Control u;
  for (int i = 0; i < M::kControlDim; ++i) {
    const double xi = belief.mean(i);
    u(i) = -gain * (i == M::kAngleIndex ? wrap_angle(xi) : xi);
  }
  return model.saturate(u);
}

template <ParametricModel M>
class DpwPlanner {
 public:
  using Control = typename M::Control;
  using Belief = BeliefOf<M>;

  struct BeliefNode {
    Belief belief;
    double incoming_reward = 0.0;
    int visits = 0;
    int depth = 0;
    std::vector<int> actions;
  };

  struct ActionNode {
    Control u;
    int visits = 0;
    double value = 0.0;
    std::vector<int> children;
    std::vector<int> child_counts;
  };

  DpwPlanner(const M& model, RewardSpec spec, MctsConfig config)
      : model_(model), spec_(spec), config_(config) {
    config_.validate();
    spec_.validate();
  }

  const MctsConfig& config() const { return config_; }
  const std::vector<BeliefNode>& belief_nodes() const { return beliefs_; }
  const std::vector<ActionNode>& action_nodes() const { return actions_; }
  int discarded_simulations() const { return discarded_; }

  /// Builds a fresh tree rooted at `belief` and returns the root action with
  /// the highest value estimate.
  Control plan(const Belief& belief, Rng& rng, std::vector<MctsTraceRecord>* trace = nullptr) {
    beliefs_.clear();
    actions_.clear();
    discarded_ = 0;
    beliefs_.reserve(static_cast<std::size_t>(config_.iterations) + 1);
    beliefs_.push_back(BeliefNode{belief, 0.0, 0, 0, {}});

    for (int it = 0; it < config_.iterations; ++it) {
      for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
        try {
          SimulationInfo info;
          const double ret = simulate(0, config_.depth, rng, info);
          if (trace != nullptr) {
            trace->push_back({it, info.depth_reached, info.root_action, ret});
          }
          break;
        } catch (const FilterDivergence&) {
          ++discarded_;
        }
      }
    }
    return best_root_action();
  }

  /// Action to admit at a node: the rollout controller's on first expansion,
  /// uniform over the control box afterwards.
  Control sample_action(const BeliefNode& node, Rng& rng) const {
    if (node.actions.empty()) return proportional_action(model_, node.belief, config_.rollout_gain);
    std::uniform_real_distribution<double> box(-model_.u_max(), model_.u_max());
    Control u;
    for (int i = 0; i < M::kControlDim; ++i) u(i) = box(rng);
    return u;
  }

  /// Discounted return of the proportional controller over `remaining_depth`
  /// generative steps.
  double rollout(const Belief& start, Rng& rng, int remaining_depth) const {
    double total = 0.0;
    double weight = 1.0;
    Belief b = start;
    for (int d = 0; d < remaining_depth; ++d) {
      const Control u = proportional_action(model_, b, config_.rollout_gain);
      BeliefTransition<M> tr = generate(b, u, model_, spec_, rng);
      total += weight * tr.reward;
      weight *= config_.discount;
      b = std::move(tr.next_belief);
    }
    return total;
  }

  /// Every node satisfies both widening limits.
  bool widths_respected() const {
    for (const BeliefNode& node : beliefs_) {
      if (node.actions.size() > config_.width_limit(node.visits)) return false;
      int action_visits = 0;
      for (int a : node.actions) {
        const ActionNode& an = actions_[a];
        if (an.children.size() > config_.width_limit(an.visits)) return false;
        action_visits += an.visits;
      }
      if (action_visits != node.visits) return false;
    }
    return true;
  }

 private:
  struct SimulationInfo {
    int depth_reached = 0;
    int root_action = -1;
  };

  double simulate(int s, int depth, Rng& rng, SimulationInfo& info) {
    if (depth == 0) return 0.0;

    bool added_action = false;
    if (beliefs_[s].actions.size() < config_.width_limit(beliefs_[s].visits + 1)) {
      actions_.push_back(ActionNode{model_.saturate(sample_action(beliefs_[s], rng))});
      beliefs_[s].actions.push_back(static_cast<int>(actions_.size()) - 1);
      added_action = true;
    }
    const int a = select_action(s);
    if (s == 0) info.root_action = root_index(a);

    double q = 0.0;
    bool added_child = false;
    int chosen_slot = -1;
    try {
      if (actions_[a].children.size() < config_.width_limit(actions_[a].visits + 1)) {
        BeliefTransition<M> tr = generate(beliefs_[s].belief, actions_[a].u, model_, spec_, rng);
        const int child_depth = beliefs_[s].depth + 1;
        beliefs_.push_back(BeliefNode{std::move(tr.next_belief), tr.reward, 0, child_depth, {}});
        added_child = true;
        const int child = static_cast<int>(beliefs_.size()) - 1;
        actions_[a].children.push_back(child);
        actions_[a].child_counts.push_back(1);
        info.depth_reached = child_depth;
        q = tr.reward + config_.discount * rollout(beliefs_[child].belief, rng, depth - 1);
      } else {
        chosen_slot = pick_child(actions_[a], rng);
        const int child = actions_[a].children[chosen_slot];
        q = beliefs_[child].incoming_reward +
            config_.discount * simulate(child, depth - 1, rng, info);
        ++actions_[a].child_counts[chosen_slot];
      }
    } catch (const FilterDivergence&) {
      if (added_child) {
        actions_[a].children.pop_back();
        actions_[a].child_counts.pop_back();
        beliefs_.pop_back();
      }
      if (added_action) {
        beliefs_[s].actions.pop_back();
        actions_.pop_back();
      }
      throw;
    }

    ++beliefs_[s].visits;
    ActionNode& an = actions_[a];
    ++an.visits;
    an.value += (q - an.value) / an.visits;
    return q;
  }

  int select_action(int s) const {
    const BeliefNode& node = beliefs_[s];
    const double log_n = node.visits > 0 ? std::log(static_cast<double>(node.visits)) : 0.0;
    int best = -1;
    double best_score = -std::numeric_limits<double>::infinity();
    for (int a : node.actions) {
      const ActionNode& an = actions_[a];
      if (an.visits == 0) return a;
      const double score = an.value + config_.exploration * std::sqrt(log_n / an.visits);
      if (score > best_score) {
        best_score = score;
        best = a;
      }
    }
    return best;
  }

  static int pick_child(const ActionNode& an, Rng& rng) {
    int total = 0;
    for (int c : an.child_counts) total += c;
    std::uniform_int_distribution<int> pick(0, total - 1);
    int ticket = pick(rng);
    for (std::size_t i = 0; i < an.child_counts.size(); ++i) {
      ticket -= an.child_counts[i];
      if (ticket < 0) return static_cast<int>(i);
    }
    return static_cast<int>(an.child_counts.size()) - 1;
  }

  int root_index(int a) const {
    const auto& acts = beliefs_[0].actions;
    for (std::size_t i = 0; i < acts.size(); ++i) {
      if (acts[i] == a) return static_cast<int>(i);
    }
    return -1;
  }

  Control best_root_action() const {
    const ActionNode* best = nullptr;
    for (int a : beliefs_[0].actions) {
      const ActionNode& an = actions_[a];
      if (an.visits == 0) continue;
      if (best == nullptr || an.value > best->value ||
          (an.value == best->value && an.visits > best->visits)) {
        best = &an;
      }
    }
    if (best == nullptr) {
      return proportional_action(model_, beliefs_[0].belief, config_.rollout_gain);
    }
    return best->u;
  }

  const M& model_;
  RewardSpec spec_;
  MctsConfig config_;
  std::vector<BeliefNode> beliefs_;
  std::vector<ActionNode> actions_;
  int discarded_ = 0;
};

/// One-shot planning call.
template <ParametricModel M>
typename M::Control plan(const BeliefOf<M>& belief, const M& model, const RewardSpec& spec,
                         const MctsConfig& config, Rng& rng) {
  DpwPlanner<M> planner(model, spec, config);
  return planner.plan(belief, rng);
}

}  // namespace bamcts
