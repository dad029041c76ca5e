#include "vqdqn/tabular.hpp"

#include <algorithm>

#include "vqdqn/errors.hpp"
#include "vqdqn/vqc.hpp"

namespace vqdqn::rl {
namespace {

enum class Rule { QLearning, Sarsa };

double next_epsilon_step(const TabularConfig& cfg, double eps) {
  return cfg.schedule == EpsilonSchedule::PerStepGeometric
             ? std::max(epsilon_update_radio(eps), cfg.epsilon_floor)
             : eps;
}

TabularResult run(envs::DiscreteEnv& env, const TabularConfig& cfg, std::size_t episodes, Rule rule) {
  if (!(cfg.alpha >= 0.0 && cfg.alpha <= 1.0)) throw ConfigError("tabular alpha must lie in [0, 1]");
  if (!(cfg.gamma >= 0.0 && cfg.gamma <= 1.0)) throw ConfigError("tabular gamma must lie in [0, 1]");
  TabularResult res{QTable(env.n_states(), env.n_actions()), {}};
  QTable& q = res.table;
  std::mt19937_64 rng(vqc::derive_seed(cfg.seed, 2));
  double eps = cfg.epsilon_init;
  for (std::size_t e = 0; e < episodes; ++e) {
    if (cfg.schedule == EpsilonSchedule::PerEpisodeDecay) {
      eps = std::max(epsilon_update_frozenlake(eps, e), cfg.epsilon_floor);
    }
    EpisodeRecord rec;
    rec.episode = e + 1;
    std::size_t s = env.reset();
    int a = select_action(q.row(s), eps, rng);
    for (;;) {
      const auto out = env.step(a);
      rec.total_reward += out.reward;
      ++rec.steps;
      eps = next_epsilon_step(cfg, eps);
      const bool bootstrap = !out.terminal || out.truncated;
      int a_next = 0;
      if (!out.terminal) a_next = select_action(q.row(out.next_state), eps, rng);
      double future = 0.0;
      if (bootstrap) {
        future = rule == Rule::QLearning || out.terminal ? q.max(out.next_state)
                                                         : q.at(out.next_state, a_next);
      }
      double& cell = q.at(s, a);
      cell += cfg.alpha * (out.reward + cfg.gamma * future - cell);
      if (out.terminal) break;
      s = out.next_state;
      a = a_next;
    }
    rec.epsilon = eps;
    res.log.push_back(rec);
  }
  fill_rolling_stats(res.log);
  return res;
}

}  // namespace

QTable::QTable(std::size_t n_states, int n_actions)
    : n_states_(n_states), n_actions_(n_actions), values_(n_states * n_actions, 0.0) {
  if (n_states == 0 || n_actions <= 0) throw ArgumentError("q-table dimensions must be positive");
}

std::span<const double> QTable::row(std::size_t s) const {
  if (s >= n_states_) throw IndexError("q-table state " + std::to_string(s));
  return {values_.data() + s * n_actions_, static_cast<std::size_t>(n_actions_)};
}

double QTable::max(std::size_t s) const {
  const auto r = row(s);
  return *std::max_element(r.begin(), r.end());
}

int QTable::greedy(std::size_t s) const { return argmax(row(s)); }

TabularResult q_learning_baseline(envs::DiscreteEnv& env, const TabularConfig& cfg,
                                  std::size_t episodes) {
  return run(env, cfg, episodes, Rule::QLearning);
}

TabularResult sarsa_baseline(envs::DiscreteEnv& env, const TabularConfig& cfg,
                             std::size_t episodes) {
  return run(env, cfg, episodes, Rule::Sarsa);
}

std::vector<std::size_t> greedy_path(envs::DiscreteEnv& env, const QTable& table, int max_steps) {
  std::vector<std::size_t> path{env.reset()};
  for (int i = 0; i < max_steps; ++i) {
    const auto out = env.step(table.greedy(path.back()));
    path.push_back(out.next_state);
    if (out.terminal) break;
  }
  return path;
}

}  // namespace vqdqn::rl
