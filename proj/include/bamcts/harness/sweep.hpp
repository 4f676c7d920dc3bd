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

#include <atomic>
#include <functional>
#include <iomanip>
#include <ostream>
#include <thread>
#include <vector>

#include "bamcts/harness/experiment.hpp"

namespace bamcts {

struct SweepRow {
  double sweep_value = 0.0;
  double mean_reward = 0.0;
  double sem = 0.0;
  int trials = 0;   // unflagged trials entering the statistics
  int flagged = 0;
  bool available = true;
};

using SweepTable = std::vector<SweepRow>;

/// Mean and standard error (sample stddev / sqrt(n)) over unflagged trials.
/// A single trial has SEM 0; a point with no unflagged trial is unavailable.
inline SweepRow aggregate(double sweep_value, const std::vector<TrialResult>& results) {
  SweepRow row;
  row.sweep_value = sweep_value;
  double sum = 0.0;
  for (const TrialResult& r : results) {
    if (r.flagged) {
      ++row.flagged;
    } else {
      ++row.trials;
      sum += r.total_reward;
    }
  }
  if (row.trials == 0) {
    row.available = false;
    row.mean_reward = std::numeric_limits<double>::quiet_NaN();
    row.sem = std::numeric_limits<double>::quiet_NaN();
    return row;
  }
  row.mean_reward = sum / row.trials;
  if (row.trials > 1) {
    double ss = 0.0;
    for (const TrialResult& r : results) {
      if (!r.flagged) ss += (r.total_reward - row.mean_reward) * (r.total_reward - row.mean_reward);
    }
    row.sem = std::sqrt(ss / (row.trials - 1)) / std::sqrt(static_cast<double>(row.trials));
  }
  return row;
}

/// Seed of trial `trial` at sweep point `point`.
inline std::uint64_t trial_seed(std::uint64_t master, int trial, int point) {
  return combine_seed(master, static_cast<std::uint64_t>(trial),
                      static_cast<std::uint64_t>(point));
}

/// Configuration of sweep point `point`.
inline ExperimentConfig config_at(const ExperimentConfig& cfg, int point) {
  ExperimentConfig out = cfg;
  if (cfg.sweep == SweepAxis::kProcessNoise) out.process_sigma = cfg.sweep_values.at(point);
  if (cfg.sweep == SweepAxis::kParamSigma) out.mass_sigma = cfg.sweep_values.at(point);
  return out;
}

inline std::vector<double> sweep_points(const ExperimentConfig& cfg) {
  if (cfg.sweep == SweepAxis::kNone) return {cfg.process_sigma};
  return cfg.sweep_values;
}

/// Runs `jobs` calls of `fn(i)` across worker threads. Results must be
/// written by index so that the outcome does not depend on scheduling.
inline void parallel_for(int jobs, int threads, const std::function<void(int)>& fn) {
  int workers = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::max(1, std::min(workers, jobs));
  if (workers == 1) {
    for (int i = 0; i < jobs; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::jthread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < jobs; i = next++) fn(i);
    });
  }
}

/// All trials of every sweep point, indexed [point][trial].
inline std::vector<std::vector<TrialResult>> run_sweep_trials(const ExperimentConfig& cfg) {
  cfg.validate();
  const std::vector<double> points = sweep_points(cfg);
  const int np = static_cast<int>(points.size());
  std::vector<std::vector<TrialResult>> results(static_cast<std::size_t>(np));
  for (auto& r : results) r.resize(static_cast<std::size_t>(cfg.trials));
  std::vector<ExperimentConfig> configs;
  for (int j = 0; j < np; ++j) configs.push_back(config_at(cfg, j));

  parallel_for(np * cfg.trials, cfg.threads, [&](int job) {
    const int j = job / cfg.trials;
    const int i = job % cfg.trials;
    TrialResult r = run_trial(configs[j], trial_seed(cfg.seed, i, j));
    r.steps.clear();  // keep memory flat; per-step logs come from `trial`
    results[j][i] = std::move(r);
  });
  return results;
}

inline SweepTable run_sweep(const ExperimentConfig& cfg) {
  const std::vector<double> points = sweep_points(cfg);
  const auto results = run_sweep_trials(cfg);
  SweepTable table;
  for (std::size_t j = 0; j < points.size(); ++j) table.push_back(aggregate(points[j], results[j]));
  return table;
}

inline void write_sweep_csv(std::ostream& os, const SweepTable& table) {
  os << "sweep_value,mean_reward,sem,trials,flagged\n";
  os << std::setprecision(12);
  for (const SweepRow& row : table) {
    os << row.sweep_value << ',';
    if (row.available) {
      os << row.mean_reward << ',' << row.sem;
    } else {
      os << "NA,NA";
    }
    os << ',' << row.trials << ',' << row.flagged << '\n';
  }
}

inline void write_trial_csv(std::ostream& os, const TrialResult& trial) {
  const std::size_t nu = trial.steps.empty() ? 0 : trial.steps.front().action.size();
  const std::size_t nm = trial.steps.empty() ? 0 : trial.steps.front().mean.size();
  os << "step,reward";
  for (std::size_t i = 0; i < nu; ++i) os << ",action_" << i;
  for (std::size_t i = 0; i < nm; ++i) os << ",mean_" << i;
  os << ",cov_trace,wall_ms\n";
  os << std::setprecision(12);
  for (const StepRecord& rec : trial.steps) {
    os << rec.step << ',' << rec.reward;
    for (double a : rec.action) os << ',' << a;
    for (double m : rec.mean) os << ',' << m;
    os << ',' << rec.cov_trace << ',' << rec.wall_ms << '\n';
  }
}

}  // namespace bamcts
