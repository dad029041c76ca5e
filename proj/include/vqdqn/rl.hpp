#pragma once

// Deep Q-learning with a variational circuit as the Q-function: experience
// replay, a periodically synced target circuit, epsilon-greedy exploration
// and RMSprop on the squared TD error.

#include <cstdint>
#include <deque>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "vqdqn/envs.hpp"
#include "vqdqn/vqc.hpp"

namespace vqdqn::rl {

struct Transition {
  std::size_t state = 0;
  int action = 0;
  double reward = 0.0;
  std::size_t next_state = 0;
  bool terminal = false;

  bool operator==(const Transition&) const = default;
};

/// Bounded FIFO; pushing into a full buffer evicts the oldest entry.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(const Transition& t);
  std::size_t size() const { return entries_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return entries_.empty(); }
  /// Index 0 is the oldest entry.
  const Transition& operator[](std::size_t i) const { return entries_[i]; }
  /// k distinct entries chosen uniformly. Throws ArgumentError if k > size().
  std::vector<Transition> sample(std::size_t k, std::mt19937_64& rng) const;

 private:
  std::size_t capacity_;
  std::deque<Transition> entries_;
};

enum class EpsilonSchedule {
  PerEpisodeDecay,   // eps <- eps / (episode / 100 + 1) at the start of each episode
  PerStepGeometric,  // eps <- 0.99 eps after every step
};

std::string to_string(EpsilonSchedule s);
/// Accepts "per_episode_decay" and "per_step_geometric".
EpsilonSchedule parse_epsilon_schedule(const std::string& name);

struct RmsPropConfig {
  double learning_rate = 0.01;
  double alpha = 0.99;
  double eps = 1e-8;
};

struct RmsPropState {
  std::vector<double> square_avg;
  std::size_t steps = 0;
};

/// s <- alpha s + (1 - alpha) g^2;  p <- p - lr g / (sqrt(s) + eps).
/// A zero-length accumulator is initialized to zeros. Throws TrainingError
/// carrying the step index on a non-finite gradient, ArgumentError on a shape
/// mismatch.
void rmsprop_update(std::vector<double>& params, const std::vector<double>& grads,
                    RmsPropState& state, const RmsPropConfig& cfg = {});

struct AgentConfig {
  double gamma = 0.99;
  std::size_t batch_size = 5;
  std::size_t replay_capacity = 1000;
  std::size_t target_sync_every = 20;
  EpsilonSchedule epsilon_schedule = EpsilonSchedule::PerStepGeometric;
  double epsilon_init = 1.0;
  bool epsilon_floor_enabled = true;
  double epsilon_floor = 0.01;
  RmsPropConfig optimizer;

  static AgentConfig frozen_lake();
  static AgentConfig radio();

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

/// Uniform action with probability epsilon, otherwise the lowest index among
/// the maximal q-values. Throws ArgumentError for empty q or epsilon
/// outside [0, 1].
int select_action(std::span<const double> q, double epsilon, std::mt19937_64& rng);
int argmax(std::span<const double> q);

double epsilon_update_frozenlake(double epsilon, std::size_t episode);
double epsilon_update_radio(double epsilon);

/// y = r for terminal transitions, r + gamma max_a Q_target(s', a) otherwise.
std::vector<double> td_target(const std::vector<Transition>& batch, const vqc::VqcModel& target,
                              double gamma, const vqc::Backend& backend = vqc::backend::Analytic{});

/// (1/B) sum (y_j - Q(s_j, a_j))^2.
double batch_loss(const vqc::VqcModel& model, const std::vector<Transition>& batch,
                  const std::vector<double>& targets,
                  const vqc::Backend& backend = vqc::backend::Analytic{});

struct LossGradient {
  std::vector<double> grad;  // laid out like VqcModel::flat_parameters()
  double loss = 0.0;
};

/// Gradient of batch_loss through the taken-action outputs only.
LossGradient loss_gradient(const vqc::VqcModel& model, const std::vector<Transition>& batch,
                           const std::vector<double>& targets,
                           const vqc::Backend& backend = vqc::backend::Analytic{});

struct StepResult {
  envs::EnvOutcome outcome;
  int action = 0;
  bool trained = false;
  double loss = 0.0;  // before the update; 0 when not trained
};

class DqnTrainer {
 public:
  /// The backend is used for every circuit evaluation; stochastic backends
  /// are reseeded per evaluation from `seed`.
  DqnTrainer(vqc::VqcModel init, AgentConfig cfg, std::uint64_t seed,
             vqc::Backend backend = vqc::backend::Analytic{});

  const vqc::VqcModel& model() const { return model_; }
  const vqc::VqcModel& target() const { return target_; }
  const AgentConfig& config() const { return cfg_; }
  const ReplayBuffer& buffer() const { return buffer_; }
  const RmsPropState& optimizer_state() const { return opt_; }
  double epsilon() const { return epsilon_; }
  void set_epsilon(double e) { epsilon_ = e; }
  std::size_t global_step() const { return global_step_; }
  std::uint64_t seed() const { return seed_; }

  /// Applies the per-episode schedule, if selected, for 0-based `episode`.
  void begin_episode(std::size_t episode);

  std::vector<double> q_values(std::size_t state);
  int act(std::size_t state);

  /// One interaction: act, store, train on a minibatch once the buffer holds
  /// batch_size transitions, sync the target every target_sync_every steps,
  /// then apply the per-step schedule if selected.
  StepResult step(envs::DiscreteEnv& env, std::size_t state);

  /// One RMSprop step on the batch against the current target. Returns the
  /// loss before the update.
  double gradient_step(const std::vector<Transition>& batch);

  void sync_target() { target_ = model_; }

 private:
  vqc::Backend next_backend();
  double floor(double e) const;

  vqc::VqcModel model_;
  vqc::VqcModel target_;
  AgentConfig cfg_;
  std::uint64_t seed_;
  vqc::Backend backend_;
  std::mt19937_64 rng_;
  ReplayBuffer buffer_;
  RmsPropState opt_;
  double epsilon_;
  std::size_t global_step_ = 0;
  std::uint64_t evaluations_ = 0;
};

struct EpisodeRecord {
  std::size_t episode = 0;  // 1-based
  double total_reward = 0.0;
  int steps = 0;
  double rolling_mean = 0.0;
  double rolling_std = 0.0;
  double epsilon = 0.0;  // at the end of the episode
};

/// Mean and population standard deviation of the last min(window, k)
/// rewards ending at each position k.
void fill_rolling_stats(std::vector<EpisodeRecord>& log, std::size_t window = 100);

using EpisodeCallback = std::function<void(const EpisodeRecord&, const DqnTrainer&)>;

std::vector<EpisodeRecord> train(envs::DiscreteEnv& env, DqnTrainer& trainer, std::size_t episodes,
                                 const EpisodeCallback& on_episode = {});

struct EvalEpisode {
  int steps = 0;
  double total_reward = 0.0;
};

/// Greedy rollouts. Stochastic backends get a fresh seed per forward pass.
std::vector<EvalEpisode> evaluate_greedy(envs::DiscreteEnv& env, const vqc::VqcModel& model,
                                         std::size_t episodes,
                                         const vqc::Backend& backend = vqc::backend::Analytic{},
                                         std::uint64_t seed = 0);

/// Parameter bookkeeping for the n-channel radio task.
std::size_t q_table_size(int n_channels);       // n^3
std::size_t dense_dqn_param_count(int n_channels);  // 2n^2 + 2n

std::string scores_csv(const std::vector<EpisodeRecord>& log);

}  // namespace vqdqn::rl
