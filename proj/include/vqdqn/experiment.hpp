#pragma once

// Experiment configuration and the train / eval pipelines behind the CLI.
//
// Config files are JSON objects with the keys
//
//   env        {"kind": "frozen_lake", "map": "a" | "map_file": path, "step_cap": 200}
//              {"kind": "radio", "n_channels": 4, "pattern": "a" | "pattern_file": path}
//   agent      gamma, batch_size, replay_capacity, target_sync_every,
//              epsilon_schedule, epsilon_init, epsilon_floor_enabled,
//              epsilon_floor, learning_rate, alpha, eps
//   circuit    n_layers, observable ("prob_one" | "pauli_z")
//   backend    {"kind": "analytic"}
//              {"kind": "trajectory_average", "device": path, "assignment": [..], "trajectories": 16}
//              {"kind": "shots", "shots": 1024, "device": path, "assignment": [..], "trajectories": 0}
//   seed, episodes, output_dir
//
// Every key is optional except env.kind. Unknown keys are errors. Relative
// paths resolve against the directory holding the config file.

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "vqdqn/checkpoint.hpp"
#include "vqdqn/envs.hpp"
#include "vqdqn/noise.hpp"
#include "vqdqn/rl.hpp"
#include "vqdqn/vqc.hpp"

namespace vqdqn::experiment {

enum class EnvKind { FrozenLake, Radio };

struct EnvConfig {
  EnvKind kind = EnvKind::FrozenLake;
  std::string builtin = "a";
  std::filesystem::path file;  // overrides builtin when set
  int n_channels = 4;
  int step_cap = 200;
};

enum class BackendKind { Analytic, TrajectoryAverage, Shots };

struct BackendConfig {
  BackendKind kind = BackendKind::Analytic;
  int shots = 1024;
  std::filesystem::path device;
  std::vector<int> assignment;  // empty: smallest linear chain on the device
  int trajectories = 16;
};

struct ExperimentConfig {
  EnvConfig env;
  rl::AgentConfig agent = rl::AgentConfig::frozen_lake();
  int n_layers = 2;
  vqc::Observable observable = vqc::Observable::ProbOne;
  BackendConfig backend;
  std::uint64_t seed = 0;
  std::size_t episodes = 500;
  std::filesystem::path output_dir = "runs";
};

/// Throws ConfigError with the offending key path.
ExperimentConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir);
ExperimentConfig load_config(const std::filesystem::path& file);

/// The resolved config with every default spelled out.
nlohmann::json lock_json(const ExperimentConfig& cfg);

/// "frozen_lake[:label]", "radio:<n>[:label]", or a map / pattern file.
EnvConfig parse_env_argument(const std::string& arg);

std::unique_ptr<envs::DiscreteEnv> make_env(const EnvConfig& cfg);
vqc::CircuitSpec circuit_for(const EnvConfig& env, int n_layers,
                             vqc::Observable observable = vqc::Observable::ProbOne);

/// Noise model for a circuit of n_qubits wires; an empty assignment takes
/// the smallest linear chain on the device.
qsim::NoiseModel device_noise(const std::filesystem::path& device, std::vector<int> assignment,
                              int n_qubits);
vqc::Backend make_backend(const BackendConfig& cfg, int n_qubits, std::uint64_t seed);

struct RunResult {
  std::vector<rl::EpisodeRecord> log;
  Checkpoint checkpoint;
};

/// Model initialized from derive_seed(seed, 0); deterministic given the config.
RunResult run_training(const ExperimentConfig& cfg, const rl::EpisodeCallback& on_episode = {});

/// Writes scores.csv, model.json and config.lock.json into `dir`.
void write_outputs(const ExperimentConfig& cfg, const RunResult& result,
                   const std::filesystem::path& dir);

/// Throws CompatibilityError if the model cannot drive the environment.
void check_compatible(const vqc::VqcModel& model, const envs::DiscreteEnv& env);

std::string format_eval_table(const std::vector<rl::EvalEpisode>& episodes);

/// CSV "n,q_table,dqn,vq_dqn" for the radio task.
std::string compare_params_csv(int n_min, int n_max);

}  // namespace vqdqn::experiment
