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

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "bamcts/bamcts.hpp"
#include "support/oracles.hpp"

namespace bamcts {
namespace {

TrialResult with_total(double total, bool flagged = false) {
  TrialResult r;
  r.total_reward = total;
  r.flagged = flagged;
  return r;
}

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

ExperimentConfig quick_config(ModelKind model, PolicyKind policy) {
  ExperimentConfig cfg = default_config(model);
  cfg.policy = policy;
  cfg.steps = 15;
  cfg.trials = 3;
  cfg.threads = 1;
  cfg.mcts.iterations = 60;
  cfg.mcts.depth = 8;
  cfg.mpc.horizon = 10;
  return cfg;
}

TEST(Aggregate, TwoTrials) {
  const SweepRow row = aggregate(1.0, {with_total(-10.0), with_total(-20.0)});
  EXPECT_DOUBLE_EQ(row.mean_reward, -15.0);
  EXPECT_DOUBLE_EQ(row.sem, 5.0);
  EXPECT_EQ(row.trials, 2);
  EXPECT_EQ(row.flagged, 0);
}

TEST(Aggregate, MatchesIndependentMoments) {
  std::mt19937_64 gen(30);
  std::normal_distribution<double> n(-5000.0, 800.0);
  std::vector<TrialResult> results;
  std::vector<double> totals;
  for (int i = 0; i < 30; ++i) {
    totals.push_back(n(gen));
    results.push_back(with_total(totals.back()));
  }
  const SweepRow row = aggregate(0.5, results);
  const oracle::Moments m = oracle::sample_moments(totals);
  EXPECT_NEAR(row.mean_reward, m.mean, 1e-12 * std::abs(m.mean));
  EXPECT_NEAR(row.sem, m.sem, 1e-12 * m.sem);
}

TEST(Aggregate, FlaggedTrialsAreExcluded) {
  const SweepRow one = aggregate(1.0, {with_total(-7.0), with_total(-1e9, true)});
  EXPECT_DOUBLE_EQ(one.mean_reward, -7.0);
  EXPECT_EQ(one.sem, 0.0);
  EXPECT_EQ(one.trials, 1);
  EXPECT_EQ(one.flagged, 1);

  const SweepRow none = aggregate(1.0, {with_total(-1.0, true), with_total(-2.0, true)});
  EXPECT_FALSE(none.available);
  std::ostringstream os;
  write_sweep_csv(os, {none});
  EXPECT_NE(os.str().find("NA,NA,0,2"), std::string::npos);
}

TEST(Csv, Headers) {
  std::ostringstream sweep;
  write_sweep_csv(sweep, {aggregate(1.0, {with_total(-3.0)})});
  EXPECT_EQ(first_line(sweep.str()), "sweep_value,mean_reward,sem,trials,flagged");

  ExperimentConfig cfg = quick_config(ModelKind::kDoubleIntegrator, PolicyKind::kMpc);
  cfg.steps = 2;
  std::ostringstream trial;
  write_trial_csv(trial, run_trial(cfg, 1));
  EXPECT_EQ(first_line(trial.str()),
            "step,reward,action_0,mean_0,mean_1,mean_2,cov_trace,wall_ms");
}

TEST(Trial, ZeroStepsScoresZero) {
  ExperimentConfig cfg = quick_config(ModelKind::kDoubleIntegrator, PolicyKind::kMcts);
  cfg.steps = 0;
  const TrialResult r = run_trial(cfg, 4);
  EXPECT_EQ(r.total_reward, 0.0);
  EXPECT_TRUE(r.steps.empty());
  EXPECT_FALSE(r.flagged);
}

TEST(Trial, TotalIsSumOfStepRewards) {
  for (ModelKind model : {ModelKind::kDoubleIntegrator, ModelKind::kPlanarManipulation}) {
    for (PolicyKind policy : {PolicyKind::kMcts, PolicyKind::kMpc}) {
      const ExperimentConfig cfg = quick_config(model, policy);
      const TrialResult r = run_trial(cfg, 11);
      ASSERT_FALSE(r.flagged) << r.flag_reason;
      ASSERT_EQ(r.steps.size(), static_cast<std::size_t>(cfg.steps));
      double sum = 0.0;
      for (const StepRecord& s : r.steps) {
        EXPECT_LE(s.reward, 0.0);
        sum += s.reward;
      }
      EXPECT_NEAR(r.total_reward, sum, 1e-9 * (1.0 + std::abs(sum)));
    }
  }
}

TEST(Trial, SameSeedSameResult) {
  for (PolicyKind policy : {PolicyKind::kMcts, PolicyKind::kMpc}) {
    const ExperimentConfig cfg = quick_config(ModelKind::kPlanarManipulation, policy);
    const TrialResult a = run_trial(cfg, 123);
    const TrialResult b = run_trial(cfg, 123);
    EXPECT_EQ(a.total_reward, b.total_reward);
    EXPECT_EQ(a.true_params, b.true_params);
    EXPECT_EQ(a.final_state, b.final_state);
    ASSERT_EQ(a.steps.size(), b.steps.size());
    for (std::size_t t = 0; t < a.steps.size(); ++t) {
      EXPECT_EQ(a.steps[t].action, b.steps[t].action);
      EXPECT_EQ(a.steps[t].mean, b.steps[t].mean);
    }
  }
}

TEST(Trial, TruthIsSharedAcrossPolicies) {
  const ExperimentConfig mcts = quick_config(ModelKind::kDoubleIntegrator, PolicyKind::kMcts);
  const ExperimentConfig mpc = quick_config(ModelKind::kDoubleIntegrator, PolicyKind::kMpc);
  EXPECT_EQ(run_trial(mcts, 5).true_params, run_trial(mpc, 5).true_params);
}

TEST(Trial, PriorDrawRespectsFloor) {
  ExperimentConfig cfg = quick_config(ModelKind::kPlanarManipulation, PolicyKind::kMpc);
  cfg.steps = 0;
  cfg.param_sigma = 100.0;
  for (std::uint64_t s = 0; s < 50; ++s) {
    const TrialResult r = run_trial(cfg, s);
    for (int i = 0; i < 3; ++i) EXPECT_GE(r.true_params[static_cast<std::size_t>(i)], 1.0);
  }
}

TEST(Seeds, DistinctAcrossTrialsAndPoints) {
  std::set<std::uint64_t> seen;
  for (int point = 0; point < 6; ++point) {
    for (int trial = 0; trial < 30; ++trial) seen.insert(trial_seed(1, trial, point));
  }
  EXPECT_EQ(seen.size(), 180u);
  EXPECT_NE(trial_seed(1, 0, 0), trial_seed(2, 0, 0));
}

TEST(Sweep, ResultsIndependentOfThreadCount) {
  ExperimentConfig cfg = quick_config(ModelKind::kDoubleIntegrator, PolicyKind::kMcts);
  cfg.sweep = SweepAxis::kProcessNoise;
  cfg.sweep_values = {0.1, 1.0};
  cfg.trials = 2;
  cfg.steps = 5;
  const auto serial = run_sweep_trials(cfg);
  cfg.threads = 3;
  const auto threaded = run_sweep_trials(cfg);
  for (std::size_t j = 0; j < serial.size(); ++j) {
    for (std::size_t i = 0; i < serial[j].size(); ++i) {
      EXPECT_EQ(serial[j][i].total_reward, threaded[j][i].total_reward);
    }
  }
  const SweepTable table = run_sweep(cfg);
  ASSERT_EQ(table.size(), 2u);
  EXPECT_EQ(table[1].sweep_value, 1.0);
}

TEST(Sweep, MassSigmaAxisOverridesMassOnly) {
  ExperimentConfig cfg = default_config(ModelKind::kPlanarManipulation);
  cfg.sweep = SweepAxis::kParamSigma;
  cfg.sweep_values = {0.5, 2.0};
  const ExperimentConfig at = config_at(cfg, 1);
  ASSERT_TRUE(at.mass_sigma.has_value());
  EXPECT_EQ(*at.mass_sigma, 2.0);
  EXPECT_EQ(at.param_sigma, cfg.param_sigma);
  EXPECT_EQ(at.process_sigma, cfg.process_sigma);
}

TEST(Config, RoundTrip) {
  ExperimentConfig cfg = default_config(ModelKind::kPlanarManipulation);
  cfg.policy = PolicyKind::kMpc;
  cfg.reward.kind = RewardKind::kL2;
  cfg.steps = 42;
  cfg.seed = 987654321;
  cfg.mass_sigma = 0.316;
  cfg.sweep = SweepAxis::kProcessNoise;
  cfg.sweep_values = {0.0316, 0.1, 1.0 / 3.0};
  cfg.truth = TruthMode::kFixed;
  cfg.truth_params = {2.0, 3.0, 4.0, 0.5, -0.25};
  cfg.sensor_offset = {0.1, -0.2};
  cfg.mcts.exploration = 12.5;
  cfg.mpc.horizon = 7;

  std::ostringstream os;
  write_config(os, cfg);
  std::istringstream in(os.str());
  const ExperimentConfig back = parse_config(in);
  std::ostringstream again;
  write_config(again, back);
  EXPECT_EQ(os.str(), again.str());
  EXPECT_EQ(back.sweep_values, cfg.sweep_values);
  EXPECT_EQ(back.mass_sigma, cfg.mass_sigma);
  EXPECT_EQ(back.mpc.horizon, 7);
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  std::istringstream unknown("model = 1d\nbogus = 3\n");
  EXPECT_THROW(parse_config(unknown), std::invalid_argument);
  std::istringstream bad("steps = ten\n");
  EXPECT_THROW(parse_config(bad), std::invalid_argument);
  std::istringstream comments("# comment\n\nmodel = pm\ntrials = 4\n");
  const ExperimentConfig cfg = parse_config(comments);
  EXPECT_EQ(cfg.model, ModelKind::kPlanarManipulation);
  EXPECT_EQ(cfg.trials, 4);
  EXPECT_EQ(cfg.u_max, 100.0);
}

TEST(Trial, NoiselessKnownMassMpcSettles) {
  ExperimentConfig cfg = default_config(ModelKind::kDoubleIntegrator);
  cfg.policy = PolicyKind::kMpc;
  cfg.process_sigma = 0.0;
  cfg.param_sigma = 0.0;
  cfg.truth = TruthMode::kFixed;
  const TrialResult r = run_trial(cfg, 1);
  ASSERT_FALSE(r.flagged) << r.flag_reason;
  EXPECT_LT(std::abs(r.final_state[0]), 0.1);
}

}  // namespace
}  // namespace bamcts
