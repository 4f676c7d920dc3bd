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

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "bamcts/bamcts.hpp"

namespace {

struct Overrides {
  std::string config_path;
  std::optional<std::string> model;
  std::optional<std::string> policy;
  std::optional<std::string> reward;
  std::optional<int> iters;
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  std::optional<int> steps;
  std::optional<int> threads;
  std::optional<double> process_sigma;
  std::optional<double> param_sigma;
  std::optional<double> mass_sigma;
  std::optional<std::string> sweep;
  std::vector<double> values;
  std::optional<std::string> truth;
  std::string out;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config_path, "key = value experiment file");
  cmd->add_option("--model", o.model, "1d | pm")->check(CLI::IsMember({"1d", "pm"}));
  cmd->add_option("--policy", o.policy, "mcts | mpc")->check(CLI::IsMember({"mcts", "mpc"}));
  cmd->add_option("--reward", o.reward, "l1 | l2")->check(CLI::IsMember({"l1", "l2"}));
  cmd->add_option("--iters", o.iters, "MCTS iterations per step");
  cmd->add_option("--seed", o.seed, "master seed");
  cmd->add_option("--trials", o.trials, "trials per sweep point");
  cmd->add_option("--steps", o.steps, "steps per trial");
  cmd->add_option("--threads", o.threads, "worker threads (0: all cores)");
  cmd->add_option("--process-sigma", o.process_sigma, "process noise standard deviation");
  cmd->add_option("--param-sigma", o.param_sigma, "initial parameter standard deviation");
  cmd->add_option("--mass-sigma", o.mass_sigma, "initial mass standard deviation");
  cmd->add_option("--sweep", o.sweep, "none | process_noise | param_sigma")
      ->check(CLI::IsMember({"none", "process_noise", "param_sigma"}));
  cmd->add_option("--values", o.values, "sweep values")->delimiter(',');
  cmd->add_option("--truth", o.truth, "prior | fixed")->check(CLI::IsMember({"prior", "fixed"}));
  cmd->add_option("--out", o.out, "output CSV path (stdout if omitted)");
}

bamcts::ExperimentConfig resolve(const Overrides& o) {
  using namespace bamcts;
  ExperimentConfig cfg = default_config(ModelKind::kDoubleIntegrator);
  if (!o.config_path.empty()) {
    cfg = load_config(o.config_path);
    if (o.model && parse_model_kind(*o.model) != cfg.model) {
      throw std::invalid_argument("--model conflicts with the config file");
    }
  } else if (o.model) {
    cfg = default_config(parse_model_kind(*o.model));
  }
  if (o.policy) cfg.policy = parse_policy_kind(*o.policy);
  if (o.reward) cfg.reward.kind = parse_reward_kind(*o.reward);
  if (o.iters) cfg.mcts.iterations = *o.iters;
  if (o.seed) cfg.seed = *o.seed;
  if (o.trials) cfg.trials = *o.trials;
  if (o.steps) cfg.steps = *o.steps;
  if (o.threads) cfg.threads = *o.threads;
  if (o.process_sigma) cfg.process_sigma = *o.process_sigma;
  if (o.param_sigma) cfg.param_sigma = *o.param_sigma;
  if (o.mass_sigma) cfg.mass_sigma = *o.mass_sigma;
  if (o.sweep) cfg.sweep = parse_sweep_axis(*o.sweep);
  if (!o.values.empty()) cfg.sweep_values = o.values;
  if (o.truth) cfg.truth = parse_truth_mode(*o.truth);
  cfg.validate();
  return cfg;
}

template <class Fn>
void with_output(const std::string& path, Fn&& fn) {
  if (path.empty()) {
    fn(std::cout);
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  fn(out);
}

void print_table(const char* label, const bamcts::SweepTable& table) {
  std::cerr << label << '\n';
  for (const auto& row : table) {
    std::cerr << "  " << row.sweep_value << ": ";
    if (row.available) {
      std::cerr << row.mean_reward << " +/- " << row.sem;
    } else {
      std::cerr << "unavailable";
    }
    std::cerr << " (" << row.trials << " trials, " << row.flagged << " flagged)\n";
  }
}

std::string suffixed(const std::string& path, const std::string& tag) {
  if (path.empty()) return {};
  std::filesystem::path p(path);
  return (p.parent_path() / (p.stem().string() + "_" + tag + p.extension().string())).string();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simultaneous estimation and control with MCTS-DPW and certainty-equivalent MPC"};
  app.require_subcommand(1);

  Overrides trial_opts, sweep_opts, compare_opts;
  std::string dump_config;
  auto* trial = app.add_subcommand("trial", "run one closed-loop trial and log every step");
  add_common(trial, trial_opts);
  std::string trace_path, program_path;
  trial->add_option("--trace", trace_path, "MCTS iteration trace of the first step (CSV)");
  trial->add_option("--dump-program", program_path, "MPC program of the first step (text)");
  auto* sweep = app.add_subcommand("sweep", "run a parameter sweep for one policy");
  add_common(sweep, sweep_opts);
  auto* compare = app.add_subcommand("compare", "run the same sweep for MCTS and MPC");
  add_common(compare, compare_opts);
  for (auto* cmd : {trial, sweep, compare}) {
    cmd->add_option("--print-config", dump_config, "write the resolved config to this path");
  }

  CLI11_PARSE(app, argc, argv);

  try {
    using namespace bamcts;
    if (trial->parsed()) {
      ExperimentConfig cfg = resolve(trial_opts);
      if (!dump_config.empty()) with_output(dump_config, [&](std::ostream& os) { write_config(os, cfg); });
      const std::uint64_t seed = trial_seed(cfg.seed, 0, 0);
      if (!trace_path.empty() || !program_path.empty()) {
        visit_model(cfg.model, [&]<class ModelT>(std::type_identity<ModelT>) {
          const ModelT model = detail::make_model<ModelT>(cfg);
          const BeliefOf<ModelT> b = detail::initial_belief(cfg, model);
          if (!trace_path.empty()) {
            std::vector<MctsTraceRecord> tr;
            Rng rng(seed);
            DpwPlanner<ModelT>(model, cfg.reward, cfg.mcts).plan(b, rng, &tr);
            with_output(trace_path, [&](std::ostream& os) { write_trace_csv(os, tr); });
          }
          if (!program_path.empty()) {
            with_output(program_path, [&](std::ostream& os) {
              write_program(os, build_mpc_program(b.mean, model, cfg.reward, cfg.mpc.horizon));
            });
          }
        });
      }
      const TrialResult r = run_trial(cfg, seed);
      with_output(trial_opts.out, [&](std::ostream& os) { write_trial_csv(os, r); });
      std::cerr << "total_reward " << r.total_reward;
      if (r.flagged) std::cerr << " (flagged: " << r.flag_reason << ")";
      std::cerr << '\n';
      return r.flagged ? 2 : 0;
    }
    if (sweep->parsed()) {
      const ExperimentConfig cfg = resolve(sweep_opts);
      if (!dump_config.empty()) with_output(dump_config, [&](std::ostream& os) { write_config(os, cfg); });
      const SweepTable table = run_sweep(cfg);
      with_output(sweep_opts.out, [&](std::ostream& os) { write_sweep_csv(os, table); });
      print_table(to_string(cfg.policy), table);
      return 0;
    }
    if (compare->parsed()) {
      ExperimentConfig cfg = resolve(compare_opts);
      if (!dump_config.empty()) with_output(dump_config, [&](std::ostream& os) { write_config(os, cfg); });
      for (PolicyKind policy : {PolicyKind::kMcts, PolicyKind::kMpc}) {
        cfg.policy = policy;
        const SweepTable table = run_sweep(cfg);
        const std::string path = suffixed(compare_opts.out, to_string(policy));
        if (path.empty()) std::cout << "# policy " << to_string(policy) << '\n';
        with_output(path, [&](std::ostream& os) { write_sweep_csv(os, table); });
        print_table(to_string(policy), table);
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
