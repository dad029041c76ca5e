#include "vqdqn/envs.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <queue>
#include <sstream>

#include <json.hpp>

#include "vqdqn/errors.hpp"

namespace vqdqn::envs {
namespace {

std::string read_file(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open " + file.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t move(std::size_t state, int action) {
  int row = static_cast<int>(state) / kLakeSide;
  int col = static_cast<int>(state) % kLakeSide;
  switch (static_cast<LakeAction>(action)) {
    case LakeAction::Left:
      col = std::max(col - 1, 0);
      break;
    case LakeAction::Down:
      row = std::min(row + 1, kLakeSide - 1);
      break;
    case LakeAction::Right:
      col = std::min(col + 1, kLakeSide - 1);
      break;
    case LakeAction::Up:
      row = std::max(row - 1, 0);
      break;
  }
  return static_cast<std::size_t>(row * kLakeSide + col);
}

bool goal_reachable(const FrozenLakeMap& map) {
  std::vector<bool> seen(map.grid.size(), false);
  std::queue<std::size_t> frontier;
  frontier.push(map.start());
  seen[map.start()] = true;
  while (!frontier.empty()) {
    const std::size_t s = frontier.front();
    frontier.pop();
    if (map.at(s) == Cell::Goal) return true;
    if (map.at(s) == Cell::Hole) continue;
    for (int a = 0; a < 4; ++a) {
      const std::size_t next = move(s, a);
      if (!seen[next]) {
        seen[next] = true;
        frontier.push(next);
      }
    }
  }
  return false;
}

}  // namespace

FrozenLakeMap FrozenLakeMap::parse(const std::string& text) {
  std::vector<std::string> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    line.erase(std::remove_if(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); }),
               line.end());
    if (line.empty() || line[0] == '#') continue;
    rows.push_back(line);
  }
  if (rows.size() != kLakeSide) {
    throw ConfigError("frozen-lake map needs 4 rows, found " + std::to_string(rows.size()));
  }
  FrozenLakeMap map;
  int starts = 0, goals = 0;
  for (int r = 0; r < kLakeSide; ++r) {
    if (rows[r].size() != kLakeSide) {
      throw ConfigError("frozen-lake row " + std::to_string(r) + " has " +
                        std::to_string(rows[r].size()) + " cells, expected 4");
    }
    for (int c = 0; c < kLakeSide; ++c) {
      const char ch = rows[r][c];
      if (ch != 'S' && ch != 'F' && ch != 'H' && ch != 'G') {
        throw ConfigError("frozen-lake cell (" + std::to_string(r) + "," + std::to_string(c) +
                          ") has invalid symbol '" + std::string(1, ch) + "'");
      }
      starts += ch == 'S';
      goals += ch == 'G';
      map.grid[r * kLakeSide + c] = static_cast<Cell>(ch);
    }
  }
  if (starts != 1) throw ConfigError("frozen-lake map needs exactly one S, found " + std::to_string(starts));
  if (goals != 1) throw ConfigError("frozen-lake map needs exactly one G, found " + std::to_string(goals));
  if (!goal_reachable(map)) throw ConfigError("frozen-lake goal is unreachable from the start");
  return map;
}

FrozenLakeMap FrozenLakeMap::load(const std::filesystem::path& file) {
  try {
    return parse(read_file(file));
  } catch (const ConfigError& e) {
    throw ConfigError(file.string() + ": " + e.what());
  }
}

std::size_t FrozenLakeMap::start() const {
  return static_cast<std::size_t>(std::find(grid.begin(), grid.end(), Cell::Start) - grid.begin());
}

std::size_t FrozenLakeMap::goal() const {
  return static_cast<std::size_t>(std::find(grid.begin(), grid.end(), Cell::Goal) - grid.begin());
}

bool FrozenLakeMap::is_terminal(std::size_t state) const {
  return grid[state] == Cell::Hole || grid[state] == Cell::Goal;
}

std::string FrozenLakeMap::to_string() const {
  std::string out;
  for (int r = 0; r < kLakeSide; ++r) {
    for (int c = 0; c < kLakeSide; ++c) out += static_cast<char>(grid[r * kLakeSide + c]);
    out += '\n';
  }
  return out;
}

FrozenLakeMap builtin_lake(const std::string& label) {
  // (b) and (c) are stand-in layouts; ship your own map files to replace them.
  if (label == "a") return FrozenLakeMap::parse("SFFF\nFHFH\nFFFH\nHFFG\n");
  if (label == "b") return FrozenLakeMap::parse("SFFH\nFFHF\nHFFF\nHHFG\n");
  if (label == "c") return FrozenLakeMap::parse("SHFF\nFFFH\nHFHF\nFFFG\n");
  throw ConfigError("unknown frozen-lake configuration '" + label + "'");
}

std::size_t fl_reset(const FrozenLakeMap& map) { return map.start(); }

EnvOutcome fl_step(const FrozenLakeMap& map, std::size_t state, int action) {
  if (state >= map.grid.size()) throw IndexError("frozen-lake state " + std::to_string(state));
  if (action < 0 || action > 3) throw IndexError("frozen-lake action " + std::to_string(action));
  if (map.is_terminal(state)) {
    throw UsageError("frozen-lake step from terminal state " + std::to_string(state));
  }
  EnvOutcome out;
  out.next_state = move(state, action);
  switch (map.at(out.next_state)) {
    case Cell::Hole:
      out.reward = kHoleReward;
      out.terminal = true;
      break;
    case Cell::Goal:
      out.reward = kGoalReward;
      out.terminal = true;
      break;
    default:
      out.reward = kStepReward;
      break;
  }
  return out;
}

FrozenLake::FrozenLake(FrozenLakeMap map, int step_cap) : map_(map), step_cap_(step_cap) {
  if (step_cap_ < 1) throw ConfigError("frozen-lake step cap must be positive");
}

std::size_t FrozenLake::reset() {
  state_ = fl_reset(map_);
  steps_ = 0;
  done_ = false;
  return state_;
}

EnvOutcome FrozenLake::step(int action) {
  if (done_) throw UsageError("frozen-lake episode already finished; call reset()");
  EnvOutcome out = fl_step(map_, state_, action);
  state_ = out.next_state;
  ++steps_;
  if (!out.terminal && steps_ >= step_cap_) {
    out.terminal = true;
    out.truncated = true;
  }
  done_ = out.terminal;
  return out;
}

void RadioPattern::validate() const {
  if (n_channels < 2 || n_channels > 5) {
    throw ConfigError("radio n_channels " + std::to_string(n_channels) + " outside [2, 5]");
  }
  if (static_cast<int>(occupancy.size()) != n_channels) {
    throw ConfigError("radio occupancy has " + std::to_string(occupancy.size()) +
                      " entries, expected one per channel (" + std::to_string(n_channels) + ")");
  }
  std::vector<bool> used(n_channels, false);
  for (std::size_t t = 0; t < occupancy.size(); ++t) {
    const int ch = occupancy[t];
    if (ch < 0 || ch >= n_channels) {
      throw ConfigError("radio occupancy[" + std::to_string(t) + "] = " + std::to_string(ch) +
                        " is not a channel");
    }
    if (used[ch]) {
      throw ConfigError("radio occupancy[" + std::to_string(t) + "] repeats channel " +
                        std::to_string(ch) + "; the cycle must visit each channel once");
    }
    used[ch] = true;
  }
}

RadioPattern RadioPattern::parse_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("radio pattern is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("radio pattern must be a JSON object");
  RadioPattern p;
  for (const auto& [key, value] : j.items()) {
    if (key == "n_channels" && value.is_number_integer()) {
      p.n_channels = value.get<int>();
    } else if (key == "occupancy" && value.is_array()) {
      for (const auto& v : value) {
        if (!v.is_number_integer()) throw ConfigError("radio occupancy entries must be integers");
        p.occupancy.push_back(v.get<int>());
      }
    } else if (key == "label" && value.is_string()) {
      p.label = value.get<std::string>();
    } else if (key == "n_channels" || key == "occupancy" || key == "label") {
      throw ConfigError("radio pattern key '" + key + "' has the wrong type");
    } else {
      throw ConfigError("radio pattern has unknown key '" + key + "'");
    }
  }
  if (!j.contains("n_channels")) throw ConfigError("radio pattern is missing n_channels");
  if (!j.contains("occupancy")) throw ConfigError("radio pattern is missing occupancy");
  p.validate();
  return p;
}

RadioPattern RadioPattern::load(const std::filesystem::path& file) {
  try {
    return parse_json(read_file(file));
  } catch (const ConfigError& e) {
    throw ConfigError(file.string() + ": " + e.what());
  }
}

std::string RadioPattern::to_json() const {
  nlohmann::json j{{"label", label}, {"n_channels", n_channels}, {"occupancy", occupancy}};
  return j.dump(2) + "\n";
}

RadioPattern builtin_radio(const std::string& label, int n_channels) {
  RadioPattern p;
  p.n_channels = n_channels;
  p.label = label;
  if (label == "a") {
    for (int c = 0; c < n_channels; ++c) p.occupancy.push_back(c);
  } else if ((label == "b" || label == "c") && n_channels == 4) {
    // stand-in cycles for the alternative four-channel configurations
    p.occupancy = label == "b" ? std::vector<int>{0, 2, 1, 3} : std::vector<int>{3, 1, 0, 2};
  } else {
    throw ConfigError("no built-in radio configuration '" + label + "' for " +
                      std::to_string(n_channels) + " channels");
  }
  p.validate();
  return p;
}

std::size_t cr_state_index(int occupied_channel, long time, int n_channels) {
  return static_cast<std::size_t>(occupied_channel) * static_cast<std::size_t>(n_channels) +
         static_cast<std::size_t>(time % n_channels);
}

double cr_reward(const RadioPattern& pattern, long time, int chosen) {
  return chosen == pattern.occupied(time) ? kCollisionReward : kClearReward;
}

CognitiveRadio::CognitiveRadio(RadioPattern pattern) : pattern_(std::move(pattern)) {
  pattern_.validate();
}

std::size_t CognitiveRadio::n_states() const {
  return static_cast<std::size_t>(pattern_.n_channels) * static_cast<std::size_t>(pattern_.n_channels);
}

std::size_t CognitiveRadio::reset() {
  time_ = 0;
  steps_ = 0;
  collisions_ = 0;
  done_ = false;
  return cr_state_index(pattern_.occupied(time_), time_, pattern_.n_channels);
}

EnvOutcome CognitiveRadio::step(int channel) {
  if (done_) throw UsageError("radio episode already finished; call reset()");
  if (channel < 0 || channel >= pattern_.n_channels) {
    throw IndexError("radio channel " + std::to_string(channel) + " outside [0, " +
                     std::to_string(pattern_.n_channels) + ")");
  }
  EnvOutcome out;
  out.reward = cr_reward(pattern_, time_, channel);
  if (out.reward == kCollisionReward) ++collisions_;
  ++steps_;
  ++time_;
  out.next_state = cr_state_index(pattern_.occupied(time_), time_, pattern_.n_channels);
  if (collisions_ >= kRadioCollisionLimit) {
    out.terminal = true;
  } else if (steps_ >= kRadioStepCap) {
    out.terminal = true;
    out.truncated = true;
  }
  done_ = out.terminal;
  return out;
}

EnvDescription load_env_config(const std::filesystem::path& file) {
  if (file.extension() == ".json") return RadioPattern::load(file);
  return FrozenLakeMap::load(file);
}

}  // namespace vqdqn::envs
