#pragma once

// Discrete environments: a non-slippery 4x4 frozen lake and a cognitive-radio
// channel selection task against a periodic primary user.

#include <array>
#include <cstddef>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

namespace vqdqn::envs {

struct EnvOutcome {
  std::size_t next_state = 0;
  double reward = 0.0;
  bool terminal = false;
  /// The episode ended on a step limit rather than a task outcome.
  bool truncated = false;
};

/// Single-owner episodic environment over integer states.
class DiscreteEnv {
 public:
  virtual ~DiscreteEnv() = default;
  virtual std::size_t n_states() const = 0;
  virtual int n_actions() const = 0;
  virtual std::size_t reset() = 0;
  virtual EnvOutcome step(int action) = 0;
  virtual std::string name() const = 0;
};

// ---------------------------------------------------------------- frozen lake

enum class Cell : char { Start = 'S', Frozen = 'F', Hole = 'H', Goal = 'G' };

enum class LakeAction : int { Left = 0, Down = 1, Right = 2, Up = 3 };

inline constexpr int kLakeSide = 4;
inline constexpr double kHoleReward = -0.2;
inline constexpr double kGoalReward = 1.0;
inline constexpr double kStepReward = -0.01;

struct FrozenLakeMap {
  std::array<Cell, kLakeSide * kLakeSide> grid{};

  /// Parses four rows of S/F/H/G. Throws ConfigError naming the offending
  /// cell or row, a missing START/GOAL, or an unreachable GOAL.
  static FrozenLakeMap parse(const std::string& text);
  static FrozenLakeMap load(const std::filesystem::path& file);

  Cell at(std::size_t state) const { return grid[state]; }
  std::size_t start() const;
  std::size_t goal() const;
  bool is_terminal(std::size_t state) const;
  std::string to_string() const;
};

/// Built-in layouts "a", "b" and "c"; "a" is SFFF/FHFH/FFFH/HFFG.
FrozenLakeMap builtin_lake(const std::string& label);

std::size_t fl_reset(const FrozenLakeMap& map);
/// Deterministic move, walls clamp. Throws UsageError from a terminal cell.
EnvOutcome fl_step(const FrozenLakeMap& map, std::size_t state, int action);

class FrozenLake final : public DiscreteEnv {
 public:
  explicit FrozenLake(FrozenLakeMap map, int step_cap = 200);

  std::size_t n_states() const override { return kLakeSide * kLakeSide; }
  int n_actions() const override { return 4; }
  std::size_t reset() override;
  /// Reaching step_cap ends the episode as terminal + truncated.
  EnvOutcome step(int action) override;
  std::string name() const override { return "frozen_lake"; }

  const FrozenLakeMap& map() const { return map_; }
  int step_cap() const { return step_cap_; }

 private:
  FrozenLakeMap map_;
  int step_cap_;
  std::size_t state_ = 0;
  int steps_ = 0;
  bool done_ = true;
};

// -------------------------------------------------------------- cognitive radio

inline constexpr double kCollisionReward = -1.0;
inline constexpr double kClearReward = 1.0;
inline constexpr int kRadioStepCap = 100;
inline constexpr int kRadioCollisionLimit = 3;

struct RadioPattern {
  int n_channels = 0;
  std::vector<int> occupancy;  // primary-user channel at time t is occupancy[t % n]
  std::string label;

  int occupied(long time) const { return occupancy[static_cast<std::size_t>(time % n_channels)]; }
  /// Throws ConfigError naming the offending entry.
  void validate() const;

  static RadioPattern parse_json(const std::string& text);
  static RadioPattern load(const std::filesystem::path& file);
  std::string to_json() const;
};

/// Configuration (a) sweeps channels 0..n-1 in order for any n in 2..5.
/// Configurations (b) and (c) exist only for four channels.
RadioPattern builtin_radio(const std::string& label, int n_channels);

std::size_t cr_state_index(int occupied_channel, long time, int n_channels);
/// Reward for choosing `chosen` at `time`.
double cr_reward(const RadioPattern& pattern, long time, int chosen);

class CognitiveRadio final : public DiscreteEnv {
 public:
  explicit CognitiveRadio(RadioPattern pattern);

  std::size_t n_states() const override;
  int n_actions() const override { return pattern_.n_channels; }
  std::size_t reset() override;
  /// Terminal after the third collision or the 100th step; the step limit
  /// is flagged as truncated.
  EnvOutcome step(int channel) override;
  std::string name() const override { return "radio"; }

  const RadioPattern& pattern() const { return pattern_; }
  long time() const { return time_; }
  int collisions() const { return collisions_; }

 private:
  RadioPattern pattern_;
  long time_ = 0;
  int steps_ = 0;
  int collisions_ = 0;
  bool done_ = true;
};

using EnvDescription = std::variant<FrozenLakeMap, RadioPattern>;

/// Radio pattern for *.json files, frozen-lake map otherwise.
EnvDescription load_env_config(const std::filesystem::path& file);

}  // namespace vqdqn::envs
