#include "vqdqn/rl.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <sstream>

#include "vqdqn/errors.hpp"

namespace vqdqn::rl {
namespace {

std::string fmt(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::uint64_t seed_of(const vqc::Backend& b) {
  return std::visit(
      [](const auto& cfg) -> std::uint64_t {
        if constexpr (requires { cfg.seed; }) {
          return cfg.seed;
        } else {
          return 0;
        }
      },
      b);
}

void rolling_at(std::vector<EpisodeRecord>& log, std::size_t k, std::size_t window) {
  const std::size_t first = k + 1 > window ? k + 1 - window : 0;
  const double n = static_cast<double>(k + 1 - first);
  double mean = 0.0;
  for (std::size_t i = first; i <= k; ++i) mean += log[i].total_reward;
  mean /= n;
  double var = 0.0;
  for (std::size_t i = first; i <= k; ++i) {
    const double d = log[i].total_reward - mean;
    var += d * d;
  }
  log[k].rolling_mean = mean;
  log[k].rolling_std = std::sqrt(var / n);
}

}  // namespace

// ---------------------------------------------------------------- replay

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw ConfigError("replay capacity must be positive");
}

void ReplayBuffer::push(const Transition& t) {
  if (entries_.size() == capacity_) entries_.pop_front();
  entries_.push_back(t);
}

std::vector<Transition> ReplayBuffer::sample(std::size_t k, std::mt19937_64& rng) const {
  if (k > entries_.size()) {
    throw ArgumentError("cannot sample " + std::to_string(k) + " transitions from " +
                        std::to_string(entries_.size()));
  }
  std::vector<std::size_t> idx(entries_.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::vector<Transition> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
    std::swap(idx[i], idx[pick(rng)]);
    out.push_back(entries_[idx[i]]);
  }
  return out;
}

// ---------------------------------------------------------------- schedules

std::string to_string(EpsilonSchedule s) {
  return s == EpsilonSchedule::PerEpisodeDecay ? "per_episode_decay" : "per_step_geometric";
}

EpsilonSchedule parse_epsilon_schedule(const std::string& name) {
  if (name == "per_episode_decay") return EpsilonSchedule::PerEpisodeDecay;
  if (name == "per_step_geometric") return EpsilonSchedule::PerStepGeometric;
  throw ConfigError("unknown epsilon schedule '" + name + "'");
}

double epsilon_update_frozenlake(double epsilon, std::size_t episode) {
  return epsilon / (static_cast<double>(episode) / 100.0 + 1.0);
}

double epsilon_update_radio(double epsilon) { return 0.99 * epsilon; }

// ---------------------------------------------------------------- optimizer

void rmsprop_update(std::vector<double>& params, const std::vector<double>& grads,
                    RmsPropState& state, const RmsPropConfig& cfg) {
  if (grads.size() != params.size()) {
    throw ArgumentError("gradient has " + std::to_string(grads.size()) + " entries, parameters " +
                        std::to_string(params.size()));
  }
  if (state.square_avg.empty()) state.square_avg.assign(params.size(), 0.0);
  if (state.square_avg.size() != params.size()) {
    throw ArgumentError("optimizer state does not match the parameter count");
  }
  for (std::size_t i = 0; i < grads.size(); ++i) {
    if (!std::isfinite(grads[i])) {
      throw TrainingError(state.steps, "non-finite gradient at parameter " + std::to_string(i));
    }
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    double& s = state.square_avg[i];
    s = cfg.alpha * s + (1.0 - cfg.alpha) * g * g;
    params[i] -= cfg.learning_rate * g / (std::sqrt(s) + cfg.eps);
  }
  ++state.steps;
}

// ---------------------------------------------------------------- config

AgentConfig AgentConfig::frozen_lake() {
  AgentConfig c;
  c.replay_capacity = 80;
  c.epsilon_schedule = EpsilonSchedule::PerEpisodeDecay;
  return c;
}

AgentConfig AgentConfig::radio() { return AgentConfig{}; }

void AgentConfig::validate() const {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("agent.gamma must lie in (0, 1]");
  if (batch_size == 0) throw ConfigError("agent.batch_size must be positive");
  if (replay_capacity == 0) throw ConfigError("agent.replay_capacity must be positive");
  if (batch_size > replay_capacity) {
    throw ConfigError("agent.batch_size exceeds agent.replay_capacity");
  }
  if (target_sync_every == 0) throw ConfigError("agent.target_sync_every must be positive");
  if (!(epsilon_init >= 0.0 && epsilon_init <= 1.0)) {
    throw ConfigError("agent.epsilon_init must lie in [0, 1]");
  }
  if (!(epsilon_floor >= 0.0 && epsilon_floor <= 1.0)) {
    throw ConfigError("agent.epsilon_floor must lie in [0, 1]");
  }
  if (!(optimizer.learning_rate > 0.0)) throw ConfigError("agent.learning_rate must be positive");
  if (!(optimizer.alpha > 0.0 && optimizer.alpha < 1.0)) {
    throw ConfigError("agent.alpha must lie in (0, 1)");
  }
  if (!(optimizer.eps > 0.0)) throw ConfigError("agent.eps must be positive");
}

// ---------------------------------------------------------------- policy

int argmax(std::span<const double> q) {
  if (q.empty()) throw ArgumentError("argmax of an empty q-vector");
  return static_cast<int>(std::max_element(q.begin(), q.end()) - q.begin());
}

int select_action(std::span<const double> q, double epsilon, std::mt19937_64& rng) {
  if (q.empty()) throw ArgumentError("select_action needs at least one q-value");
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw ArgumentError("epsilon outside [0, 1]");
  std::uniform_real_distribution<double> u(0.0, 1.0);
  if (u(rng) < epsilon) {
    std::uniform_int_distribution<int> pick(0, static_cast<int>(q.size()) - 1);
    return pick(rng);
  }
  return argmax(q);
}

// ---------------------------------------------------------------- loss

std::vector<double> td_target(const std::vector<Transition>& batch, const vqc::VqcModel& target,
                              double gamma, const vqc::Backend& backend) {
  std::vector<double> y;
  y.reserve(batch.size());
  std::uint64_t call = 0;
  for (const auto& t : batch) {
    if (t.terminal) {
      y.push_back(t.reward);
      continue;
    }
    const auto b = vqc::is_stochastic(backend)
                       ? vqc::reseeded(backend, vqc::derive_seed(seed_of(backend), call++))
                       : backend;
    const auto q = vqc::forward(target, t.next_state, b);
    y.push_back(t.reward + gamma * *std::max_element(q.begin(), q.end()));
  }
  return y;
}

double batch_loss(const vqc::VqcModel& model, const std::vector<Transition>& batch,
                  const std::vector<double>& targets, const vqc::Backend& backend) {
  if (batch.empty() || targets.size() != batch.size()) {
    throw ArgumentError("batch and targets must be non-empty and of equal length");
  }
  double sum = 0.0;
  for (std::size_t j = 0; j < batch.size(); ++j) {
    const auto q = vqc::forward(model, batch[j].state, backend);
    const double d = targets[j] - q.at(static_cast<std::size_t>(batch[j].action));
    sum += d * d;
  }
  return sum / static_cast<double>(batch.size());
}

LossGradient loss_gradient(const vqc::VqcModel& model, const std::vector<Transition>& batch,
                           const std::vector<double>& targets, const vqc::Backend& backend) {
  if (batch.empty() || targets.size() != batch.size()) {
    throw ArgumentError("batch and targets must be non-empty and of equal length");
  }
  const std::size_t n_theta = model.thetas.size();
  LossGradient out;
  out.grad.assign(n_theta + model.bias.size(), 0.0);
  const double scale = -2.0 / static_cast<double>(batch.size());
  for (std::size_t j = 0; j < batch.size(); ++j) {
    const auto& t = batch[j];
    const auto output = static_cast<std::size_t>(t.action);
    const auto g =
        vqc::is_stochastic(backend)
            ? vqc::parameter_shift_grad(
                  model, t.state, output,
                  vqc::reseeded(backend, vqc::derive_seed(seed_of(backend), j)))
            : vqc::parameter_shift_grad(model, t.state, output);
    const double residual = targets[j] - g.value;
    out.loss += residual * residual;
    for (std::size_t i = 0; i < n_theta; ++i) out.grad[i] += scale * residual * g.thetas[i];
    for (std::size_t k = 0; k < g.bias.size(); ++k) {
      out.grad[n_theta + k] += scale * residual * g.bias[k];
    }
  }
  out.loss /= static_cast<double>(batch.size());
  return out;
}

// ---------------------------------------------------------------- trainer

DqnTrainer::DqnTrainer(vqc::VqcModel init, AgentConfig cfg, std::uint64_t seed, vqc::Backend backend)
    : model_(std::move(init)),
      target_(model_),
      cfg_(cfg),
      seed_(seed),
      backend_(std::move(backend)),
      rng_(vqc::derive_seed(seed, 1)),
      buffer_(cfg.replay_capacity),
      epsilon_(cfg.epsilon_init) {
  cfg_.validate();
  model_.spec.validate();
}

double DqnTrainer::floor(double e) const {
  return cfg_.epsilon_floor_enabled ? std::max(e, cfg_.epsilon_floor) : e;
}

vqc::Backend DqnTrainer::next_backend() {
  if (!vqc::is_stochastic(backend_)) return backend_;
  return vqc::reseeded(backend_, vqc::derive_seed(seed_ ^ 0x5bd1e995ULL, evaluations_++));
}

void DqnTrainer::begin_episode(std::size_t episode) {
  if (cfg_.epsilon_schedule == EpsilonSchedule::PerEpisodeDecay) {
    epsilon_ = floor(epsilon_update_frozenlake(epsilon_, episode));
  }
}

std::vector<double> DqnTrainer::q_values(std::size_t state) {
  return vqc::forward(model_, state, next_backend());
}

int DqnTrainer::act(std::size_t state) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  if (u(rng_) < epsilon_) {
    std::uniform_int_distribution<int> pick(0, static_cast<int>(model_.spec.n_actions()) - 1);
    return pick(rng_);
  }
  return argmax(q_values(state));
}

double DqnTrainer::gradient_step(const std::vector<Transition>& batch) {
  const auto targets = td_target(batch, target_, cfg_.gamma, next_backend());
  const auto lg = loss_gradient(model_, batch, targets, next_backend());
  auto params = model_.flat_parameters();
  rmsprop_update(params, lg.grad, opt_, cfg_.optimizer);
  model_.set_flat_parameters(params);
  return lg.loss;
}

StepResult DqnTrainer::step(envs::DiscreteEnv& env, std::size_t state) {
  StepResult r;
  r.action = act(state);
  r.outcome = env.step(r.action);
  // A step-limit ending is not a true terminal state, so it still bootstraps.
  buffer_.push({state, r.action, r.outcome.reward, r.outcome.next_state,
                r.outcome.terminal && !r.outcome.truncated});
  ++global_step_;
  if (buffer_.size() >= cfg_.batch_size) {
    r.loss = gradient_step(buffer_.sample(cfg_.batch_size, rng_));
    r.trained = true;
  }
  if (global_step_ % cfg_.target_sync_every == 0) sync_target();
  if (cfg_.epsilon_schedule == EpsilonSchedule::PerStepGeometric) {
    epsilon_ = floor(epsilon_update_radio(epsilon_));
  }
  return r;
}

// ---------------------------------------------------------------- episodes

void fill_rolling_stats(std::vector<EpisodeRecord>& log, std::size_t window) {
  for (std::size_t k = 0; k < log.size(); ++k) rolling_at(log, k, window);
}

std::vector<EpisodeRecord> train(envs::DiscreteEnv& env, DqnTrainer& trainer, std::size_t episodes,
                                 const EpisodeCallback& on_episode) {
  if (static_cast<std::size_t>(env.n_actions()) != trainer.model().spec.n_actions()) {
    throw CompatibilityError("environment has " + std::to_string(env.n_actions()) +
                             " actions, circuit measures " +
                             std::to_string(trainer.model().spec.n_actions()) + " wires");
  }
  if (env.n_states() > trainer.model().spec.n_states_supported()) {
    throw CompatibilityError("environment has more states than the circuit can encode");
  }
  std::vector<EpisodeRecord> log;
  log.reserve(episodes);
  for (std::size_t e = 0; e < episodes; ++e) {
    trainer.begin_episode(e);
    std::size_t state = env.reset();
    EpisodeRecord rec;
    rec.episode = e + 1;
    for (;;) {
      const auto r = trainer.step(env, state);
      rec.total_reward += r.outcome.reward;
      ++rec.steps;
      state = r.outcome.next_state;
      if (r.outcome.terminal) break;
    }
    rec.epsilon = trainer.epsilon();
    log.push_back(rec);
    rolling_at(log, log.size() - 1, 100);
    if (on_episode) on_episode(log.back(), trainer);
  }
  return log;
}

std::vector<EvalEpisode> evaluate_greedy(envs::DiscreteEnv& env, const vqc::VqcModel& model,
                                         std::size_t episodes, const vqc::Backend& backend,
                                         std::uint64_t seed) {
  std::vector<EvalEpisode> out;
  std::uint64_t call = 0;
  for (std::size_t e = 0; e < episodes; ++e) {
    std::size_t state = env.reset();
    EvalEpisode ep;
    for (;;) {
      const auto b = vqc::is_stochastic(backend) ? vqc::reseeded(backend, vqc::derive_seed(seed, call++))
                                                 : backend;
      const auto outcome = env.step(argmax(vqc::forward(model, state, b)));
      ep.total_reward += outcome.reward;
      ++ep.steps;
      state = outcome.next_state;
      if (outcome.terminal) break;
    }
    out.push_back(ep);
  }
  return out;
}

std::size_t q_table_size(int n_channels) {
  const auto n = static_cast<std::size_t>(n_channels);
  return n * n * n;
}

std::size_t dense_dqn_param_count(int n_channels) {
  const auto n = static_cast<std::size_t>(n_channels);
  return 2 * n * n + 2 * n;
}

std::string scores_csv(const std::vector<EpisodeRecord>& log) {
  std::ostringstream out;
  out << "episode,total_reward,steps,rolling_mean_100,rolling_std_100,epsilon\n";
  for (const auto& r : log) {
    out << r.episode << ',' << fmt(r.total_reward) << ',' << r.steps << ',' << fmt(r.rolling_mean)
        << ',' << fmt(r.rolling_std) << ',' << fmt(r.epsilon) << '\n';
  }
  return out.str();
}

}  // namespace vqdqn::rl
