#pragma once

// Tabular Q-learning and SARSA baselines.

#include <cstdint>
#include <vector>

#include "vqdqn/envs.hpp"
#include "vqdqn/rl.hpp"

namespace vqdqn::rl {

class QTable {
 public:
  QTable(std::size_t n_states, int n_actions);

  std::size_t n_states() const { return n_states_; }
  int n_actions() const { return n_actions_; }
  std::size_t size() const { return values_.size(); }

  double& at(std::size_t s, int a) { return values_.at(s * n_actions_ + a); }
  double at(std::size_t s, int a) const { return values_.at(s * n_actions_ + a); }
  std::span<const double> row(std::size_t s) const;
  double max(std::size_t s) const;
  int greedy(std::size_t s) const;

  const std::vector<double>& values() const { return values_; }

 private:
  std::size_t n_states_;
  int n_actions_;
  std::vector<double> values_;
};

struct TabularConfig {
  double alpha = 0.1;
  double gamma = 0.99;
  EpsilonSchedule schedule = EpsilonSchedule::PerEpisodeDecay;
  double epsilon_init = 1.0;
  double epsilon_floor = 0.0;
  std::uint64_t seed = 0;
};

struct TabularResult {
  QTable table;
  std::vector<EpisodeRecord> log;
};

/// Off-policy update Q(s,a) += alpha [r + gamma max_a' Q(s',a') - Q(s,a)],
/// table initialized to zeros.
TabularResult q_learning_baseline(envs::DiscreteEnv& env, const TabularConfig& cfg,
                                  std::size_t episodes);

/// On-policy update Q(s,a) += alpha [r + gamma Q(s',a') - Q(s,a)] with a' the
/// action actually taken next.
TabularResult sarsa_baseline(envs::DiscreteEnv& env, const TabularConfig& cfg,
                             std::size_t episodes);

/// States visited by the greedy policy from reset until a terminal state or
/// max_steps, starting state included.
std::vector<std::size_t> greedy_path(envs::DiscreteEnv& env, const QTable& table,
                                     int max_steps = 100);

}  // namespace vqdqn::rl
