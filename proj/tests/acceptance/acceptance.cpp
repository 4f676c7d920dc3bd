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

// Acceptance gate. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.
//
//   acceptance [--csv DIR] [criterion ...]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "bamcts/bamcts.hpp"
#include "support/oracles.hpp"

namespace bamcts {
namespace {

using DI = DoubleIntegrator;
using PM = PlanarManipulation;

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string csv_dir;

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::string describe(const SweepRow& r) {
  if (!r.available) return "NA";
  return fmt("%.0f+-%.0f", r.mean_reward, r.sem) +
         (r.flagged > 0 ? fmt("(%d flagged)", r.flagged) : std::string());
}

SweepTable sweep(ExperimentConfig cfg, PolicyKind policy, SweepAxis axis,
                 std::vector<double> values, const std::string& name) {
  cfg.policy = policy;
  cfg.sweep = axis;
  cfg.sweep_values = std::move(values);
  SweepTable table = run_sweep(cfg);
  if (!csv_dir.empty()) {
    std::ofstream os(std::filesystem::path(csv_dir) / (name + "_" + to_string(policy) + ".csv"));
    write_sweep_csv(os, table);
  }
  return table;
}

bool all_available(const SweepTable& t) {
  return std::all_of(t.begin(), t.end(), [](const SweepRow& r) { return r.available; });
}

std::string series(const SweepTable& t) {
  std::string out;
  for (const SweepRow& r : t) out += (out.empty() ? "" : " ") + describe(r);
  return out;
}

// ---------------------------------------------------------------------------

Verdict filter_oracle() {
  DI model = build_double_integrator(0.1, 300.0);
  model.set_process_sigma(0.3);
  model.set_measurement_noise(0.5 * DI::ObsCovariance::Identity());
  const double mass = 3.0;
  oracle::TextbookKalman kf;
  kf.a = model.state_matrix(DI::Params::Constant(mass));
  kf.b = model.input_matrix(DI::Params::Constant(mass), DI::State::Zero());
  kf.h = Eigen::Matrix2d::Identity();
  kf.q = model.process_noise();
  kf.r = model.measurement_noise() + ekf::kInnovationJitter * Eigen::Matrix2d::Identity();
  kf.x = Eigen::Vector2d(4.0, -1.0);
  kf.p = Eigen::Matrix2d::Identity();

  BeliefOf<DI> b;
  b.mean = DI::Augmented(4.0, -1.0, mass);
  b.cov = DI::AugMatrix::Zero();
  b.cov.topLeftCorner<2, 2>().setIdentity();
  Rng rng(11);
  std::uniform_real_distribution<double> force(-300.0, 300.0);
  std::normal_distribution<double> noise(0.0, 5.0);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const DI::Control u = DI::Control::Constant(force(rng));
    const DI::Observation o(noise(rng), noise(rng));
    kf.step(u, o);
    b = ekf::update(b, model, u, o);
    worst = std::max(worst, (b.mean.head<2>() - kf.x).lpNorm<Eigen::Infinity>());
    const Eigen::Matrix2d p = b.cov.topLeftCorner<2, 2>();
    worst = std::max(worst, (p - kf.p).lpNorm<Eigen::Infinity>());
  }
  return {worst <= 1e-8, fmt("max elementwise gap %.2e over 100 steps", worst)};
}

template <class M>
double jacobian_gap(const M& model, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> n(0.0, 2.0);
  std::uniform_real_distribution<double> par(1.0, 10.0);
  std::uniform_real_distribution<double> ang(-std::numbers::pi, std::numbers::pi);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    typename M::Augmented s;
    for (int k = 0; k < M::kStateDim; ++k) s(k) = n(gen);
    if constexpr (M::kAngleIndex >= 0) s(M::kAngleIndex) = ang(gen);
    for (int k = 0; k < M::kParamDim; ++k) s(M::kStateDim + k) = par(gen);
    typename M::Control u;
    for (int k = 0; k < M::kControlDim; ++k) u(k) = 0.5 * model.u_max() * n(gen);
    const Jacobians<M> jac = ekf::jacobians(model, s, u);
    const Eigen::MatrixXd fd_f = oracle::finite_difference(
        [&](const Eigen::VectorXd& z) -> Eigen::VectorXd {
          return model.propagate(typename M::Augmented(z), u);
        },
        s);
    const Eigen::MatrixXd fd_h = oracle::finite_difference(
        [&](const Eigen::VectorXd& z) -> Eigen::VectorXd {
          return model.measure(typename M::Augmented(z), u);
        },
        s);
    worst = std::max(worst, oracle::relative_gap(jac.dynamics, fd_f));
    worst = std::max(worst, oracle::relative_gap(jac.observation, fd_h));
  }
  return worst;
}

Verdict jacobians() {
  const double di = jacobian_gap(build_double_integrator(0.1, 300.0), 1);
  PM pm = build_planar_manipulation(0.1, 100.0);
  pm.set_sensor_offset(Eigen::Vector2d(0.3, -0.2));
  const double pmg = jacobian_gap(pm, 2);
  return {std::max(di, pmg) <= 1e-5,
          fmt("max relative gap 1d %.2e, pm %.2e over 1000 points each", di, pmg)};
}

Verdict mpc_grid() {
  const DI model = build_double_integrator(0.1, 300.0);
  const RewardSpec spec;
  std::mt19937_64 gen(2024);
  std::uniform_real_distribution<double> val(-20.0, 20.0);
  std::uniform_real_distribution<double> mass(1.0, 10.0);
  int failures = 0;
  double worst_excess = 0.0;
  for (int i = 0; i < 100; ++i) {
    const int h = 1 + i % 3;
    const Eigen::Vector2d x0(val(gen), val(gen));
    const double m = mass(gen);
    MpcConfig cfg;
    cfg.horizon = h;
    const MpcPlan plan = solve_mpc(DI::Augmented(x0(0), x0(1), m), model, spec, cfg);
    const std::vector<double> u(plan.controls.data(), plan.controls.data() + h);
    const double achieved = oracle::di_sequence_reward(model, spec, x0, m, u);
    const oracle::GridResult grid = oracle::di_grid_search(model, spec, x0, m, h);
    const double tol = 1e-7 * (1.0 + std::abs(grid.best_reward));
    if (achieved < grid.best_reward - tol || achieved > grid.best_reward + grid.slack + tol) {
      ++failures;
    }
    worst_excess = std::max(worst_excess, (achieved - grid.best_reward) / grid.slack);
  }
  return {failures == 0, fmt("%d/100 outside slack, largest gain over grid %.2f of slack",
                             failures, worst_excess)};
}

Verdict dpw_invariants() {
  DI model = build_double_integrator(0.1, 300.0);
  model.set_process_sigma(1.0);
  const ExperimentConfig cfg = default_config(ModelKind::kDoubleIntegrator);
  DpwPlanner<DI> planner(model, cfg.reward, cfg.mcts);
  BeliefOf<DI> b;
  b.mean = DI::Augmented(10.0, 0.0, 5.0);
  b.cov = DI::AugMatrix::Zero();
  b.cov(2, 2) = 10.0;
  Rng rng(4);
  planner.plan(b, rng);
  const bool ok = planner.widths_respected() &&
                  planner.belief_nodes().front().visits == cfg.mcts.iterations;
  return {ok, fmt("%zu belief nodes, %zu action nodes, root visits %d",
                  planner.belief_nodes().size(), planner.action_nodes().size(),
                  planner.belief_nodes().front().visits)};
}

Verdict near_optimality() {
  ExperimentConfig cfg = default_config(ModelKind::kDoubleIntegrator);
  cfg.process_sigma = 0.0;
  cfg.param_sigma = 0.0;
  cfg.truth = TruthMode::kFixed;
  cfg.policy = PolicyKind::kMpc;
  const double mpc = run_trial(cfg, 1).total_reward;
  cfg.policy = PolicyKind::kMcts;
  std::vector<double> runs;
  for (std::uint64_t s = 1; s <= 5; ++s) runs.push_back(run_trial(cfg, s).total_reward);
  const double mcts = oracle::sample_moments(runs).mean;
  const double gap = std::abs(mcts - mpc) / std::abs(mpc);
  return {gap < 0.10, fmt("MCTS %.0f (mean of 5 seeds) vs MPC %.0f, gap %.1f%%", mcts, mpc,
                          100.0 * gap)};
}

Verdict fig3() {
  const ExperimentConfig cfg = default_config(ModelKind::kDoubleIntegrator);
  const std::vector<double> sigmas{0.0316, 1.0};
  const SweepTable mcts = sweep(cfg, PolicyKind::kMcts, SweepAxis::kProcessNoise, sigmas, "fig3");
  const SweepTable mpc = sweep(cfg, PolicyKind::kMpc, SweepAxis::kProcessNoise, sigmas, "fig3");
  if (!all_available(mcts) || !all_available(mpc)) return {false, "a sweep point is unavailable"};
  const double low_gap =
      std::abs(mcts[0].mean_reward - mpc[0].mean_reward) / std::abs(mpc[0].mean_reward);
  const double ratio = mpc[1].mean_reward / mcts[1].mean_reward;
  const bool separated =
      mcts[1].mean_reward - 2.0 * mcts[1].sem > mpc[1].mean_reward + 2.0 * mpc[1].sem;
  const bool ok = low_gap < 0.25 && ratio >= 2.0 && separated;
  return {ok, fmt("sigma 0.0316: MCTS %s vs MPC %s (gap %.1f%%); sigma 1: MCTS %s vs MPC %s "
                  "(MPC/MCTS %.2f, 2SEM %s)",
                  describe(mcts[0]).c_str(), describe(mpc[0]).c_str(), 100.0 * low_gap,
                  describe(mcts[1]).c_str(), describe(mpc[1]).c_str(), ratio,
                  separated ? "separated" : "overlapping")};
}

Verdict fig4() {
  ExperimentConfig cfg = default_config(ModelKind::kDoubleIntegrator);
  cfg.process_sigma = std::sqrt(3.0);
  const std::vector<double> sigmas{0.316, 1.0, 3.16, 10.0, 31.6, 100.0};
  const SweepTable mcts = sweep(cfg, PolicyKind::kMcts, SweepAxis::kParamSigma, sigmas, "fig4");
  const SweepTable mpc = sweep(cfg, PolicyKind::kMpc, SweepAxis::kParamSigma, sigmas, "fig4");
  if (!all_available(mcts) || !all_available(mpc)) return {false, "a sweep point is unavailable"};
  double lo = mcts[0].mean_reward;
  double hi = lo;
  for (const SweepRow& r : mcts) {
    lo = std::min(lo, r.mean_reward);
    hi = std::max(hi, r.mean_reward);
  }
  const double mcts_spread = lo / hi;
  bool monotone = true;
  for (std::size_t j = 1; j < mpc.size(); ++j) {
    monotone = monotone && mpc[j].mean_reward < mpc[j - 1].mean_reward;
  }
  const double degradation = mpc.back().mean_reward / mpc.front().mean_reward;
  const bool ok = mcts_spread < 2.0 && monotone && degradation >= 4.0;
  return {ok, fmt("MCTS spread x%.2f [%s]; MPC %s, x%.2f [%s]", mcts_spread,
                  series(mcts).c_str(), monotone ? "monotone" : "not monotone", degradation,
                  series(mpc).c_str())};
}

Verdict fig5() {
  ExperimentConfig cfg = default_config(ModelKind::kDoubleIntegrator);
  cfg.process_sigma = 1.0;
  cfg.param_sigma = std::sqrt(10.0);
  const std::vector<double> sigma{1.0};
  const SweepTable l1_mcts = sweep(cfg, PolicyKind::kMcts, SweepAxis::kProcessNoise, sigma, "fig5_l1");
  const SweepTable l1_mpc = sweep(cfg, PolicyKind::kMpc, SweepAxis::kProcessNoise, sigma, "fig5_l1");
  cfg.reward.kind = RewardKind::kL2;
  const SweepTable l2_mcts = sweep(cfg, PolicyKind::kMcts, SweepAxis::kProcessNoise, sigma, "fig5_l2");
  const SweepTable l2_mpc = sweep(cfg, PolicyKind::kMpc, SweepAxis::kProcessNoise, sigma, "fig5_l2");
  for (const SweepTable* t : {&l1_mcts, &l1_mpc, &l2_mcts, &l2_mpc}) {
    if (!all_available(*t)) return {false, "a sweep point is unavailable"};
  }
  const bool l1_ok = l1_mcts[0].mean_reward > l1_mpc[0].mean_reward;
  const double l2_gap =
      std::abs(l2_mcts[0].mean_reward - l2_mpc[0].mean_reward) / std::abs(l2_mpc[0].mean_reward);
  const bool l2_ok = l2_mpc[0].mean_reward >= l2_mcts[0].mean_reward && l2_gap <= 0.35;
  return {l1_ok && l2_ok,
          fmt("L1: MCTS %s vs MPC %s; L2: MCTS %s vs MPC %s (gap %.1f%%)",
              describe(l1_mcts[0]).c_str(), describe(l1_mpc[0]).c_str(),
              describe(l2_mcts[0]).c_str(), describe(l2_mpc[0]).c_str(), 100.0 * l2_gap)};
}

Verdict fig6_7() {
  ExperimentConfig cfg = default_config(ModelKind::kPlanarManipulation);
  cfg.mcts.iterations = 100;
  const std::vector<double> noise{0.0316, 0.1, 0.316, 1.0, 3.16, 10.0};
  const SweepTable n_mcts = sweep(cfg, PolicyKind::kMcts, SweepAxis::kProcessNoise, noise, "fig6");
  const SweepTable n_mpc = sweep(cfg, PolicyKind::kMpc, SweepAxis::kProcessNoise, noise, "fig6");
  cfg.process_sigma = 0.1;
  const std::vector<double> mass{0.0316, 0.1, 0.316, 1.0, 3.16, 10.0, 31.6};
  const SweepTable m_mcts = sweep(cfg, PolicyKind::kMcts, SweepAxis::kParamSigma, mass, "fig7");
  const SweepTable m_mpc = sweep(cfg, PolicyKind::kMpc, SweepAxis::kParamSigma, mass, "fig7");
  for (const SweepTable* t : {&n_mcts, &n_mpc, &m_mcts, &m_mpc}) {
    if (!all_available(*t)) return {false, "a sweep point is unavailable"};
  }
  int noise_wins = 0;
  for (std::size_t j = 0; j < noise.size(); ++j) {
    noise_wins += n_mcts[j].mean_reward >= n_mpc[j].mean_reward;
  }
  int mass_wins = 0;
  double lo = m_mcts[0].mean_reward;
  double hi = lo;
  for (std::size_t j = 0; j < mass.size(); ++j) {
    mass_wins += m_mcts[j].mean_reward > m_mpc[j].mean_reward;
    lo = std::min(lo, m_mcts[j].mean_reward);
    hi = std::max(hi, m_mcts[j].mean_reward);
  }
  const double spread = (lo - hi) / hi;
  const bool ok = noise_wins == static_cast<int>(noise.size()) &&
                  mass_wins == static_cast<int>(mass.size()) && spread < 0.15;
  return {ok, fmt("n=100. noise sweep: MCTS ahead at %d/%zu [MCTS %s | MPC %s]; mass sweep: "
                  "MCTS ahead at %d/%zu, MCTS spread %.1f%% [MCTS %s | MPC %s]",
                  noise_wins, noise.size(), series(n_mcts).c_str(), series(n_mpc).c_str(),
                  mass_wins, mass.size(), 100.0 * spread, series(m_mcts).c_str(),
                  series(m_mpc).c_str())};
}

Verdict throughput() {
  ExperimentConfig cfg = default_config(ModelKind::kPlanarManipulation);
  cfg.policy = PolicyKind::kMcts;
  cfg.mcts.iterations = 10;
  const TrialResult r = run_trial(cfg, trial_seed(cfg.seed, 0, 0));
  double total_ms = 0.0;
  for (const StepRecord& s : r.steps) total_ms += s.wall_ms;
  const double mean_s = r.steps.empty() ? 0.0 : total_ms / 1000.0 / r.steps.size();
  return {!r.flagged && r.steps.size() == 100u && mean_s < 1.0,
          fmt("%.4f s per decision step over %zu steps", mean_s, r.steps.size())};
}

bool same_trial(const TrialResult& a, const TrialResult& b) {
  if (a.total_reward != b.total_reward || a.steps.size() != b.steps.size()) return false;
  for (std::size_t t = 0; t < a.steps.size(); ++t) {
    if (a.steps[t].action != b.steps[t].action) return false;
  }
  return true;
}

Verdict determinism() {
  int checked = 0;
  int identical = 0;
  for (ModelKind model : {ModelKind::kDoubleIntegrator, ModelKind::kPlanarManipulation}) {
    for (PolicyKind policy : {PolicyKind::kMcts, PolicyKind::kMpc}) {
      ExperimentConfig cfg = default_config(model);
      cfg.policy = policy;
      if (model == ModelKind::kPlanarManipulation) cfg.mcts.iterations = 10;
      const std::uint64_t seed = trial_seed(cfg.seed, 7, 1);
      ++checked;
      identical += same_trial(run_trial(cfg, seed), run_trial(cfg, seed));
    }
  }
  return {identical == checked, fmt("%d/%d re-runs bit-identical", identical, checked)};
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Verdict()> run;
};

}  // namespace
}  // namespace bamcts

int main(int argc, char** argv) {
  using namespace bamcts;
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--csv" && i + 1 < argc) {
      csv_dir = argv[++i];
      std::filesystem::create_directories(csv_dir);
    } else {
      selected.insert(std::stoi(arg));
    }
  }

  const std::vector<Criterion> criteria{
      {1, "filter matches textbook Kalman filter", 1.0, filter_oracle},
      {2, "analytic Jacobians match finite differences", 5.0, jacobians},
      {3, "MPC matches grid search", 60.0, mpc_grid},
      {4, "DPW width bounds", 30.0, dpw_invariants},
      {5, "near-optimality under certainty", 300.0, near_optimality},
      {6, "process-noise trend (1d)", 7200.0, fig3},
      {7, "initial-mass trend (1d)", 10800.0, fig4},
      {8, "L1/L2 reversal (1d)", 3600.0, fig5},
      {9, "process-noise and initial-mass trends (pm)", 14400.0, fig6_7},
      {10, "pm throughput", 100.0, throughput},
      {11, "determinism", 600.0, determinism},
  };

  int failed = 0;
  for (const Criterion& c : criteria) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs <= c.budget_s;
    const bool pass = v.pass && in_time;
    failed += !pass;
    std::cout << (pass ? "PASS" : "FAIL") << "  " << c.id << ". " << c.name << ": " << v.detail
              << fmt(" (%.1f s%s)", secs, in_time ? "" : ", over budget") << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
