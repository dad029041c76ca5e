// vqdqn: train, evaluate and compare variational-circuit Q-learning agents.
//
//   vqdqn train <config.json> [--parallel-seeds k]
//   vqdqn eval <model.json> <env> [--backend analytic|shots] [--shots N]
//              [--device FILE] [--assignment q0,q1,..] [--episodes N] [--seed S]
//   vqdqn compare-params --env radio --n 2..5
//
// Exit status: 0 success, 1 invalid input, 2 runtime failure.

#include <future>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vqdqn/errors.hpp"
#include "vqdqn/experiment.hpp"

namespace {

using namespace vqdqn;

int cmd_train(const std::string& config_file, int parallel_seeds) {
  const auto cfg = experiment::load_config(config_file);
  if (parallel_seeds <= 1) {
    const auto result = experiment::run_training(cfg);
    experiment::write_outputs(cfg, result, cfg.output_dir);
    std::cout << "wrote " << result.log.size() << " episodes to " << cfg.output_dir.string() << "\n";
    return 0;
  }
  std::vector<std::future<void>> jobs;
  for (int k = 0; k < parallel_seeds; ++k) {
    auto run_cfg = cfg;
    run_cfg.seed = cfg.seed + static_cast<std::uint64_t>(k);
    jobs.push_back(std::async(std::launch::async, [run_cfg] {
      const auto dir = run_cfg.output_dir / ("seed_" + std::to_string(run_cfg.seed));
      experiment::write_outputs(run_cfg, experiment::run_training(run_cfg), dir);
    }));
  }
  for (auto& j : jobs) j.get();
  std::cout << "wrote " << parallel_seeds << " runs under " << cfg.output_dir.string() << "\n";
  return 0;
}

struct EvalArgs {
  std::string checkpoint;
  std::string env;
  std::string backend = "analytic";
  int shots = 1024;
  std::string device;
  std::vector<int> assignment;
  std::size_t episodes = 5;
  std::uint64_t seed = 0;
};

int cmd_eval(const EvalArgs& a) {
  const auto ckpt = load_checkpoint(a.checkpoint);
  const auto env_cfg = experiment::parse_env_argument(a.env);
  auto env = experiment::make_env(env_cfg);
  experiment::check_compatible(ckpt.model, *env);

  experiment::BackendConfig bc;
  if (a.backend == "analytic") {
    bc.kind = experiment::BackendKind::Analytic;
    if (!a.device.empty()) throw ArgumentError("--device needs --backend shots");
  } else if (a.backend == "shots") {
    bc.kind = experiment::BackendKind::Shots;
    bc.shots = a.shots;
    bc.trajectories = 0;
    if (a.shots < 1) throw ArgumentError("--shots must be at least 1");
  } else {
    throw ArgumentError("--backend must be 'analytic' or 'shots'");
  }
  bc.device = a.device;
  bc.assignment = a.assignment;
  const auto backend = experiment::make_backend(bc, ckpt.model.spec.n_qubits, a.seed);
  const auto episodes = rl::evaluate_greedy(*env, ckpt.model, a.episodes, backend, a.seed);
  std::cout << experiment::format_eval_table(episodes);
  return 0;
}

int cmd_compare(const std::string& env, const std::string& range) {
  if (env != "radio") throw ArgumentError("compare-params supports --env radio only");
  int lo = 0, hi = 0;
  const auto dots = range.find("..");
  try {
    if (dots == std::string::npos) {
      lo = hi = std::stoi(range);
    } else {
      lo = std::stoi(range.substr(0, dots));
      hi = std::stoi(range.substr(dots + 2));
    }
  } catch (const std::exception&) {
    throw ArgumentError("--n expects N or A..B, got '" + range + "'");
  }
  std::cout << experiment::compare_params_csv(lo, hi);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Variational quantum circuit deep Q-learning"};
  app.require_subcommand(1);

  std::string config_file;
  int parallel_seeds = 1;
  auto* train = app.add_subcommand("train", "Train an agent from a JSON config");
  train->add_option("config", config_file, "Experiment config")->required();
  train->add_option("--parallel-seeds", parallel_seeds, "Run k seeds concurrently")
      ->check(CLI::PositiveNumber);

  EvalArgs ev;
  auto* eval = app.add_subcommand("eval", "Greedy rollouts of a trained model");
  eval->add_option("checkpoint", ev.checkpoint, "model.json from a training run")->required();
  eval->add_option("env", ev.env, "Map/pattern file, frozen_lake[:label] or radio:<n>[:label]")
      ->required();
  eval->add_option("--backend", ev.backend, "analytic or shots");
  eval->add_option("--shots", ev.shots, "Measurement shots per circuit");
  eval->add_option("--device", ev.device, "Device calibration CSV for noise");
  eval->add_option("--assignment", ev.assignment, "Device qubit per circuit wire")->delimiter(',');
  eval->add_option("--episodes", ev.episodes, "Episodes to run");
  eval->add_option("--seed", ev.seed, "Sampling seed");

  std::string cmp_env = "radio";
  std::string cmp_range = "2..5";
  auto* cmp = app.add_subcommand("compare-params", "Parameter counts per channel count as CSV");
  cmp->add_option("--env", cmp_env, "Environment family");
  cmp->add_option("--n", cmp_range, "Channel range, e.g. 2..5");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (train->parsed()) return cmd_train(config_file, parallel_seeds);
    if (eval->parsed()) return cmd_eval(ev);
    if (cmp->parsed()) return cmd_compare(cmp_env, cmp_range);
  } catch (const vqdqn::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
