#include "vqdqn/experiment.hpp"

#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "vqdqn/errors.hpp"

namespace vqdqn::experiment {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

void only_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items()) {
    if (!ok.count(key)) throw ConfigError("unknown key '" + where + "." + key + "'");
  }
}

template <typename T>
void read(const json& j, const char* key, const std::string& where, T& out) {
  if (!j.contains(key)) return;
  const auto& v = j.at(key);
  if constexpr (std::is_same_v<T, bool>) {
    if (!v.is_boolean()) throw ConfigError(where + "." + key + " must be a boolean");
  } else if constexpr (std::is_integral_v<T>) {
    if (!v.is_number_integer()) throw ConfigError(where + "." + key + " must be an integer");
    if constexpr (std::is_unsigned_v<T>) {
      if (v.is_number_integer() && !v.is_number_unsigned()) {
        throw ConfigError(where + "." + key + " must be non-negative");
      }
    }
  } else if constexpr (std::is_floating_point_v<T>) {
    if (!v.is_number()) throw ConfigError(where + "." + key + " must be a number");
  } else if constexpr (std::is_same_v<T, std::string>) {
    if (!v.is_string()) throw ConfigError(where + "." + key + " must be a string");
  }
  try {
    out = v.get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + " has the wrong type");
  }
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : (base / path).lexically_normal();
}

void require_file(const fs::path& p, const std::string& what) {
  if (!fs::is_regular_file(p)) throw ConfigError(what + " '" + p.string() + "' does not exist");
}

const char* kind_name(EnvKind k) { return k == EnvKind::FrozenLake ? "frozen_lake" : "radio"; }

const char* backend_name(BackendKind k) {
  switch (k) {
    case BackendKind::Analytic:
      return "analytic";
    case BackendKind::TrajectoryAverage:
      return "trajectory_average";
    case BackendKind::Shots:
      return "shots";
  }
  return "analytic";
}

}  // namespace

ExperimentConfig parse_config(const json& j, const fs::path& base_dir) {
  only_keys(j, {"env", "agent", "circuit", "backend", "seed", "episodes", "output_dir"}, "config");
  ExperimentConfig cfg;

  if (!j.contains("env")) throw ConfigError("config is missing 'env'");
  const auto& e = j.at("env");
  only_keys(e, {"kind", "map", "map_file", "step_cap", "n_channels", "pattern", "pattern_file"}, "env");
  std::string kind;
  read(e, "kind", "env", kind);
  if (kind == "frozen_lake") {
    cfg.env.kind = EnvKind::FrozenLake;
    for (const char* k : {"n_channels", "pattern", "pattern_file"}) {
      if (e.contains(k)) throw ConfigError(std::string("env.") + k + " does not apply to frozen_lake");
    }
    read(e, "map", "env", cfg.env.builtin);
    std::string file;
    read(e, "map_file", "env", file);
    if (!file.empty()) {
      cfg.env.file = resolve(base_dir, file);
      require_file(cfg.env.file, "env.map_file");
    }
    read(e, "step_cap", "env", cfg.env.step_cap);
    cfg.agent = rl::AgentConfig::frozen_lake();
  } else if (kind == "radio") {
    cfg.env.kind = EnvKind::Radio;
    for (const char* k : {"map", "map_file", "step_cap"}) {
      if (e.contains(k)) throw ConfigError(std::string("env.") + k + " does not apply to radio");
    }
    read(e, "n_channels", "env", cfg.env.n_channels);
    read(e, "pattern", "env", cfg.env.builtin);
    std::string file;
    read(e, "pattern_file", "env", file);
    if (!file.empty()) {
      cfg.env.file = resolve(base_dir, file);
      require_file(cfg.env.file, "env.pattern_file");
      const auto pattern = envs::RadioPattern::load(cfg.env.file);
      if (e.contains("n_channels") && pattern.n_channels != cfg.env.n_channels) {
        throw ConfigError("env.n_channels disagrees with env.pattern_file");
      }
      cfg.env.n_channels = pattern.n_channels;
    }
    cfg.agent = rl::AgentConfig::radio();
  } else {
    throw ConfigError("env.kind must be 'frozen_lake' or 'radio'");
  }
  make_env(cfg.env);  // surfaces bad labels, channel counts and step caps early

  if (j.contains("agent")) {
    const auto& a = j.at("agent");
    only_keys(a, {"gamma", "batch_size", "replay_capacity", "target_sync_every", "epsilon_schedule",
                  "epsilon_init", "epsilon_floor_enabled", "epsilon_floor", "learning_rate", "alpha",
                  "eps"},
              "agent");
    read(a, "gamma", "agent", cfg.agent.gamma);
    read(a, "batch_size", "agent", cfg.agent.batch_size);
    read(a, "replay_capacity", "agent", cfg.agent.replay_capacity);
    read(a, "target_sync_every", "agent", cfg.agent.target_sync_every);
    std::string schedule;
    read(a, "epsilon_schedule", "agent", schedule);
    if (!schedule.empty()) cfg.agent.epsilon_schedule = rl::parse_epsilon_schedule(schedule);
    read(a, "epsilon_init", "agent", cfg.agent.epsilon_init);
    read(a, "epsilon_floor_enabled", "agent", cfg.agent.epsilon_floor_enabled);
    read(a, "epsilon_floor", "agent", cfg.agent.epsilon_floor);
    read(a, "learning_rate", "agent", cfg.agent.optimizer.learning_rate);
    read(a, "alpha", "agent", cfg.agent.optimizer.alpha);
    read(a, "eps", "agent", cfg.agent.optimizer.eps);
  }
  cfg.agent.validate();

  if (j.contains("circuit")) {
    const auto& c = j.at("circuit");
    only_keys(c, {"n_layers", "observable"}, "circuit");
    read(c, "n_layers", "circuit", cfg.n_layers);
    std::string obs;
    read(c, "observable", "circuit", obs);
    if (obs == "pauli_z") {
      cfg.observable = vqc::Observable::PauliZ;
    } else if (!obs.empty() && obs != "prob_one") {
      throw ConfigError("circuit.observable must be 'prob_one' or 'pauli_z'");
    }
  }
  if (cfg.n_layers < 0) throw ConfigError("circuit.n_layers must be non-negative");

  if (j.contains("backend")) {
    const auto& b = j.at("backend");
    only_keys(b, {"kind", "shots", "device", "assignment", "trajectories"}, "backend");
    std::string bk = "analytic";
    read(b, "kind", "backend", bk);
    if (bk == "analytic") {
      cfg.backend.kind = BackendKind::Analytic;
    } else if (bk == "trajectory_average") {
      cfg.backend.kind = BackendKind::TrajectoryAverage;
    } else if (bk == "shots") {
      cfg.backend.kind = BackendKind::Shots;
      cfg.backend.trajectories = 0;
    } else {
      throw ConfigError("backend.kind must be 'analytic', 'trajectory_average' or 'shots'");
    }
    read(b, "shots", "backend", cfg.backend.shots);
    read(b, "trajectories", "backend", cfg.backend.trajectories);
    read(b, "assignment", "backend", cfg.backend.assignment);
    std::string device;
    read(b, "device", "backend", device);
    if (!device.empty()) {
      cfg.backend.device = resolve(base_dir, device);
      require_file(cfg.backend.device, "backend.device");
    }
    if (cfg.backend.kind == BackendKind::TrajectoryAverage && cfg.backend.device.empty()) {
      throw ConfigError("backend.device is required for trajectory_average");
    }
    if (cfg.backend.shots < 1) throw ConfigError("backend.shots must be at least 1");
    if (cfg.backend.trajectories < 0) throw ConfigError("backend.trajectories must be non-negative");
    if (cfg.backend.kind == BackendKind::TrajectoryAverage && cfg.backend.trajectories < 1) {
      throw ConfigError("backend.trajectories must be at least 1 for trajectory_average");
    }
  }

  read(j, "seed", "config", cfg.seed);
  read(j, "episodes", "config", cfg.episodes);
  std::string out = "runs";
  read(j, "output_dir", "config", out);
  cfg.output_dir = resolve(base_dir, out);
  return cfg;
}

ExperimentConfig load_config(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open config " + file.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(file.string() + ": not valid JSON: " + e.what());
  }
  try {
    return parse_config(j, fs::absolute(file).parent_path());
  } catch (const ConfigError& e) {
    throw ConfigError(file.string() + ": " + e.what());
  }
}

json lock_json(const ExperimentConfig& cfg) {
  json env{{"kind", kind_name(cfg.env.kind)}};
  if (cfg.env.kind == EnvKind::FrozenLake) {
    if (cfg.env.file.empty()) {
      env["map"] = cfg.env.builtin;
    } else {
      env["map_file"] = cfg.env.file.string();
    }
    env["step_cap"] = cfg.env.step_cap;
  } else {
    env["n_channels"] = cfg.env.n_channels;
    if (cfg.env.file.empty()) {
      env["pattern"] = cfg.env.builtin;
    } else {
      env["pattern_file"] = cfg.env.file.string();
    }
  }
  const auto& a = cfg.agent;
  json agent{{"gamma", a.gamma},
             {"batch_size", a.batch_size},
             {"replay_capacity", a.replay_capacity},
             {"target_sync_every", a.target_sync_every},
             {"epsilon_schedule", rl::to_string(a.epsilon_schedule)},
             {"epsilon_init", a.epsilon_init},
             {"epsilon_floor_enabled", a.epsilon_floor_enabled},
             {"epsilon_floor", a.epsilon_floor},
             {"learning_rate", a.optimizer.learning_rate},
             {"alpha", a.optimizer.alpha},
             {"eps", a.optimizer.eps}};
  json circuit{{"n_layers", cfg.n_layers},
               {"observable", cfg.observable == vqc::Observable::ProbOne ? "prob_one" : "pauli_z"}};
  json backend{{"kind", backend_name(cfg.backend.kind)}};
  if (cfg.backend.kind != BackendKind::Analytic) {
    backend["trajectories"] = cfg.backend.trajectories;
    if (cfg.backend.kind == BackendKind::Shots) backend["shots"] = cfg.backend.shots;
    if (!cfg.backend.device.empty()) {
      backend["device"] = cfg.backend.device.string();
      const int n = circuit_for(cfg.env, cfg.n_layers).n_qubits;
      backend["assignment"] =
          cfg.backend.assignment.empty()
              ? noise::find_linear_chain(noise::parse_device_file(cfg.backend.device), n)
              : cfg.backend.assignment;
    }
  }
  return json{{"env", env},
              {"agent", agent},
              {"circuit", circuit},
              {"backend", backend},
              {"seed", cfg.seed},
              {"episodes", cfg.episodes},
              {"output_dir", cfg.output_dir.string()}};
}

EnvConfig parse_env_argument(const std::string& arg) {
  EnvConfig env;
  const fs::path p(arg);
  if (fs::is_regular_file(p)) {
    env.file = fs::absolute(p);
    const auto desc = envs::load_env_config(p);
    if (const auto* pattern = std::get_if<envs::RadioPattern>(&desc)) {
      env.kind = EnvKind::Radio;
      env.n_channels = pattern->n_channels;
    } else {
      env.kind = EnvKind::FrozenLake;
    }
    return env;
  }
  std::vector<std::string> parts;
  std::stringstream ss(arg);
  std::string part;
  while (std::getline(ss, part, ':')) parts.push_back(part);
  if (parts.empty()) throw ConfigError("empty environment argument");
  if (parts[0] == "frozen_lake" && parts.size() <= 2) {
    env.kind = EnvKind::FrozenLake;
    if (parts.size() == 2) env.builtin = parts[1];
  } else if (parts[0] == "radio" && parts.size() >= 2 && parts.size() <= 3) {
    env.kind = EnvKind::Radio;
    try {
      env.n_channels = std::stoi(parts[1]);
    } catch (const std::exception&) {
      throw ConfigError("radio channel count '" + parts[1] + "' is not an integer");
    }
    if (parts.size() == 3) env.builtin = parts[2];
  } else {
    throw ConfigError("environment '" + arg +
                      "' is neither a file nor one of frozen_lake[:label], radio:<n>[:label]");
  }
  make_env(env);
  return env;
}

std::unique_ptr<envs::DiscreteEnv> make_env(const EnvConfig& cfg) {
  if (cfg.kind == EnvKind::FrozenLake) {
    auto map = cfg.file.empty() ? envs::builtin_lake(cfg.builtin) : envs::FrozenLakeMap::load(cfg.file);
    return std::make_unique<envs::FrozenLake>(map, cfg.step_cap);
  }
  auto pattern = cfg.file.empty() ? envs::builtin_radio(cfg.builtin, cfg.n_channels)
                                  : envs::RadioPattern::load(cfg.file);
  return std::make_unique<envs::CognitiveRadio>(pattern);
}

vqc::CircuitSpec circuit_for(const EnvConfig& env, int n_layers, vqc::Observable observable) {
  auto spec = env.kind == EnvKind::FrozenLake ? vqc::CircuitSpec::frozen_lake(n_layers)
                                              : vqc::CircuitSpec::radio(env.n_channels, n_layers);
  spec.observable = observable;
  return spec;
}

qsim::NoiseModel device_noise(const fs::path& device, std::vector<int> assignment, int n_qubits) {
  const auto props = noise::parse_device_file(device);
  if (assignment.empty()) assignment = noise::find_linear_chain(props, n_qubits);
  if (static_cast<int>(assignment.size()) != n_qubits) {
    throw MappingError("assignment lists " + std::to_string(assignment.size()) +
                       " device qubits for a " + std::to_string(n_qubits) + "-wire circuit");
  }
  return noise::synthesize_noise_model(props, assignment);
}

vqc::Backend make_backend(const BackendConfig& cfg, int n_qubits, std::uint64_t seed) {
  std::optional<qsim::NoiseModel> noise;
  if (!cfg.device.empty()) noise = device_noise(cfg.device, cfg.assignment, n_qubits);
  switch (cfg.kind) {
    case BackendKind::Analytic:
      return vqc::backend::Analytic{};
    case BackendKind::TrajectoryAverage:
      if (!noise) throw ConfigError("trajectory_average needs a device file");
      return vqc::backend::TrajectoryAverage{*noise, cfg.trajectories, seed};
    case BackendKind::Shots:
      return vqc::backend::Shots{cfg.shots, seed, noise, cfg.trajectories};
  }
  return vqc::backend::Analytic{};
}

RunResult run_training(const ExperimentConfig& cfg, const rl::EpisodeCallback& on_episode) {
  auto env = make_env(cfg.env);
  const auto spec = circuit_for(cfg.env, cfg.n_layers, cfg.observable);
  std::mt19937_64 init_rng(vqc::derive_seed(cfg.seed, 0));
  auto model = vqc::VqcModel::random(spec, init_rng);
  rl::DqnTrainer trainer(model, cfg.agent, cfg.seed,
                         make_backend(cfg.backend, spec.n_qubits, vqc::derive_seed(cfg.seed, 3)));
  RunResult res;
  res.log = rl::train(*env, trainer, cfg.episodes, on_episode);
  res.checkpoint.model = trainer.model();
  res.checkpoint.seed = cfg.seed;
  res.checkpoint.optimizer = trainer.optimizer_state();
  return res;
}

void write_outputs(const ExperimentConfig& cfg, const RunResult& result, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + dir.string() + ": " + ec.message());
  {
    std::ofstream out(dir / "scores.csv");
    if (!out) throw ConfigError("cannot write " + (dir / "scores.csv").string());
    out << rl::scores_csv(result.log);
  }
  save_checkpoint(result.checkpoint, dir / "model.json");
  std::ofstream lock(dir / "config.lock.json");
  if (!lock) throw ConfigError("cannot write " + (dir / "config.lock.json").string());
  auto j = lock_json(cfg);
  j["output_dir"] = dir.string();
  lock << j.dump(2) << "\n";
}

void check_compatible(const vqc::VqcModel& model, const envs::DiscreteEnv& env) {
  if (model.spec.n_actions() != static_cast<std::size_t>(env.n_actions())) {
    throw CompatibilityError("checkpoint measures " + std::to_string(model.spec.n_actions()) +
                             " wires but the environment has " + std::to_string(env.n_actions()) +
                             " actions");
  }
  if (env.n_states() > model.spec.n_states_supported()) {
    throw CompatibilityError("environment has " + std::to_string(env.n_states()) +
                             " states, the circuit encodes only " +
                             std::to_string(model.spec.n_states_supported()));
  }
}

std::string format_eval_table(const std::vector<rl::EvalEpisode>& episodes) {
  std::ostringstream out;
  out << std::left << std::setw(10) << "Episode" << std::setw(14) << "Total Steps"
      << "Total Reward\n";
  for (std::size_t i = 0; i < episodes.size(); ++i) {
    // round away float noise such as 0.9500000000000001 from summed step rewards
    std::ostringstream reward;
    reward << std::setprecision(10) << episodes[i].total_reward;
    out << std::left << std::setw(10) << i + 1 << std::setw(14) << episodes[i].steps << reward.str()
        << "\n";
  }
  return out.str();
}

std::string compare_params_csv(int n_min, int n_max) {
  if (n_min < 2 || n_max > 5 || n_min > n_max) {
    throw ArgumentError("channel range must lie within 2..5");
  }
  std::ostringstream out;
  out << "n,q_table,dqn,vq_dqn\n";
  for (int n = n_min; n <= n_max; ++n) {
    out << n << ',' << rl::q_table_size(n) << ',' << rl::dense_dqn_param_count(n) << ','
        << vqc::param_count(vqc::CircuitSpec::radio(n)) << "\n";
  }
  return out.str();
}

}  // namespace vqdqn::experiment
