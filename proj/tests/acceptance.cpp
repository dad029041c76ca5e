// Acceptance run: one PASS/FAIL line per criterion.
//
//   acceptance [--known-failure N]...
//
// Exit status is 0 when every criterion passes or fails only where listed
// with --known-failure; a listed criterion that fails is still printed as FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <queue>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "vqdqn/experiment.hpp"
#include "vqdqn/qsim.hpp"
#include "vqdqn/rl.hpp"
#include "vqdqn/tabular.hpp"
#include "vqdqn/vqc.hpp"

using namespace vqdqn;
namespace fs = std::filesystem;

namespace {

// Tolerances and protocol constants.
constexpr double kEncodingTol = 1e-12;
constexpr double kEncodingSeconds = 1.0;
constexpr double kGradTol = 1e-5;
constexpr double kGradStep = 1e-4;
constexpr int kGradDraws = 100;
constexpr double kGradSeconds = 30.0;
constexpr std::size_t kEpisodes = 500;
constexpr std::size_t kRadioDeadline = 300;
constexpr double kRadioTarget = 95.0;
constexpr double kLakeGreedyTarget = 0.94;
constexpr double kLakeRollingTarget = 0.80;
constexpr double kNoisyMeanTarget = 96.0;
constexpr double kNoisyMinTarget = 90.0;
constexpr double kNoisyEvalSelect = 95.0;  // final rolling mean a model must reach to be evaluated
constexpr int kNoisyShots = 1024;
constexpr std::size_t kNoisyEvalEpisodes = 5;
constexpr std::uint64_t kNoisyEvalSeed = 7;
constexpr double kNoisyTrainTarget = 90.0;
constexpr int kNoisyTrajectories = 16;
constexpr int kSeedsNeeded = 2;
const std::vector<std::uint64_t> kSeeds{1, 2, 3};

const fs::path kData = VQDQN_DATA_DIR;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

double best_rolling_until(const std::vector<rl::EpisodeRecord>& log, std::size_t episode) {
  double best = -1e300;
  for (const auto& r : log) {
    if (r.episode <= episode) best = std::max(best, r.rolling_mean);
  }
  return best;
}

experiment::ExperimentConfig radio_config(int n, std::uint64_t seed, std::size_t episodes) {
  experiment::ExperimentConfig cfg;
  cfg.env.kind = experiment::EnvKind::Radio;
  cfg.env.n_channels = n;
  cfg.agent = rl::AgentConfig::radio();
  cfg.seed = seed;
  cfg.episodes = episodes;
  return cfg;
}

// ------------------------------------------------------------------ criteria

Outcome encoding_oracle() {
  const auto t0 = Clock::now();
  double worst_target = 0.0, worst_other = 0.0;
  for (std::size_t s = 0; s < 16; ++s) {
    const auto gates = vqc::build_circuit(vqc::VqcModel::zeros(vqc::CircuitSpec::uniform(4, 0)),
                                          vqc::encode(s, 4));
    const auto sv = qsim::run_circuit(qsim::StateVector::zero(4), gates);
    for (std::size_t i = 0; i < 16; ++i) {
      if (i == s) {
        worst_target = std::max(worst_target, std::abs(std::abs(sv[i]) - 1.0));
      } else {
        worst_other = std::max(worst_other, std::abs(sv[i]));
      }
    }
  }
  const double secs = seconds_since(t0);
  char buf[160];
  std::snprintf(buf, sizeof buf, "max |1-|a_s||=%.1e, max |a_other|=%.1e, %.3fs", worst_target,
                worst_other, secs);
  return {worst_target <= kEncodingTol && worst_other < kEncodingTol && secs < kEncodingSeconds, buf};
}

Outcome gradient_fidelity() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<std::size_t> state(0, 15), out(0, 3);
  double worst = 0.0;
  for (int draw = 0; draw < kGradDraws; ++draw) {
    auto m = vqc::VqcModel::random(vqc::CircuitSpec::uniform(4, 2), rng);
    const std::size_t s = state(rng), o = out(rng);
    const auto g = vqc::parameter_shift_grad(m, s, o);
    for (std::size_t k = 0; k < m.thetas.size(); ++k) {
      const double x = m.thetas[k];
      m.thetas[k] = x + kGradStep;
      const double up = vqc::forward(m, s)[o];
      m.thetas[k] = x - kGradStep;
      const double down = vqc::forward(m, s)[o];
      m.thetas[k] = x;
      worst = std::max(worst, std::abs(g.thetas[k] - (up - down) / (2 * kGradStep)));
    }
  }
  const double secs = seconds_since(t0);
  char buf[160];
  std::snprintf(buf, sizeof buf, "%d models, max |shift - fd|=%.2e, %.2fs", kGradDraws, worst, secs);
  return {worst <= kGradTol && secs < kGradSeconds, buf};
}

Outcome parameter_counts() {
  const std::vector<std::size_t> vq{vqc::param_count(vqc::CircuitSpec::radio(2)),
                                    vqc::param_count(vqc::CircuitSpec::radio(3)),
                                    vqc::param_count(vqc::CircuitSpec::radio(4)),
                                    vqc::param_count(vqc::CircuitSpec::radio(5)),
                                    vqc::param_count(vqc::CircuitSpec::frozen_lake())};
  std::vector<std::size_t> table;
  for (int n = 2; n <= 5; ++n) {
    envs::CognitiveRadio env(envs::builtin_radio("a", n));
    table.push_back(rl::QTable(env.n_states(), env.n_actions()).size());
  }
  envs::FrozenLake lake(envs::builtin_lake("a"));
  table.push_back(rl::QTable(lake.n_states(), lake.n_actions()).size());
  const bool ok = vq == std::vector<std::size_t>{14, 21, 28, 35, 28} &&
                  table == std::vector<std::size_t>{8, 27, 64, 125, 64};
  char buf[160];
  std::snprintf(buf, sizeof buf, "vq-dqn {%zu,%zu,%zu,%zu,%zu}, q-table {%zu,%zu,%zu,%zu,%zu}", vq[0], vq[1],
                vq[2], vq[3], vq[4], table[0], table[1], table[2], table[3], table[4]);
  return {ok, buf};
}

struct RadioRuns {
  // [n - 2][seed index]
  std::vector<std::vector<experiment::RunResult>> results;
  double slowest_seconds = 0.0;
};

RadioRuns train_radio() {
  RadioRuns runs;
  for (int n = 2; n <= 5; ++n) {
    runs.results.emplace_back();
    for (auto seed : kSeeds) {
      const auto t0 = Clock::now();
      runs.results.back().push_back(experiment::run_training(radio_config(n, seed, kEpisodes)));
      const double secs = seconds_since(t0);
      runs.slowest_seconds = std::max(runs.slowest_seconds, secs);
      std::printf("  radio n=%d seed=%llu: best rolling mean by %zu = %.2f, final = %.2f (%.1fs)\n", n,
                  static_cast<unsigned long long>(seed), kRadioDeadline,
                  best_rolling_until(runs.results.back().back().log, kRadioDeadline),
                  runs.results.back().back().log.back().rolling_mean, secs);
      std::fflush(stdout);
    }
  }
  return runs;
}

Outcome radio_convergence(const RadioRuns& runs) {
  bool ok = true;
  std::string detail;
  for (int n = 2; n <= 5; ++n) {
    int hits = 0;
    for (const auto& r : runs.results[n - 2]) hits += best_rolling_until(r.log, kRadioDeadline) >= kRadioTarget;
    ok = ok && hits >= kSeedsNeeded;
    detail += "n=" + std::to_string(n) + ":" + std::to_string(hits) + "/3 ";
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "slowest run %.1fs", runs.slowest_seconds);
  return {ok, detail + buf};
}

Outcome frozen_lake_training() {
  int hits = 0;
  std::string detail;
  for (auto seed : kSeeds) {
    experiment::ExperimentConfig cfg;
    cfg.env.kind = experiment::EnvKind::FrozenLake;
    cfg.agent = rl::AgentConfig::frozen_lake();
    cfg.seed = seed;
    cfg.episodes = kEpisodes;
    envs::FrozenLake probe(envs::builtin_lake("a"), cfg.env.step_cap);
    double best_greedy = -1e300;
    const auto t0 = Clock::now();
    const auto result = experiment::run_training(cfg, [&](const rl::EpisodeRecord&, const rl::DqnTrainer& t) {
      best_greedy = std::max(best_greedy, rl::evaluate_greedy(probe, t.model(), 1)[0].total_reward);
    });
    const double final_mean = result.log.back().rolling_mean;
    const bool ok = best_greedy >= kLakeGreedyTarget && final_mean >= kLakeRollingTarget;
    hits += ok;
    char buf[160];
    std::snprintf(buf, sizeof buf, "seed %llu: best greedy %.2f, rolling@500 %.3f (%.1fs); ",
                  static_cast<unsigned long long>(seed), best_greedy, final_mean, seconds_since(t0));
    std::printf("  frozen lake %s\n", buf);
    std::fflush(stdout);
    detail += buf;
  }
  detail.resize(detail.size() - 2);
  return {hits >= kSeedsNeeded, std::to_string(hits) + "/3 seeds; " + detail};
}

Outcome noisy_inference(const RadioRuns& runs) {
  const auto& four = runs.results[2];
  std::size_t pick = four.size();
  for (std::size_t i = 0; i < four.size(); ++i) {
    if (four[i].log.back().rolling_mean >= kNoisyEvalSelect) {
      pick = i;
      break;
    }
  }
  if (pick == four.size()) return {false, "no 4-channel run ended with rolling mean >= 95"};
  const auto& model = four[pick].checkpoint.model;
  experiment::BackendConfig bc;
  bc.kind = experiment::BackendKind::Shots;
  bc.shots = kNoisyShots;
  bc.trajectories = 0;
  bc.device = kData / "devices" / "ibmq-valencia.csv";
  const auto backend = experiment::make_backend(bc, model.spec.n_qubits, kNoisyEvalSeed);
  envs::CognitiveRadio env(envs::builtin_radio("a", 4));
  const auto eps = rl::evaluate_greedy(env, model, kNoisyEvalEpisodes, backend, kNoisyEvalSeed);
  double sum = 0.0, lo = 1e300;
  std::string scores;
  for (const auto& e : eps) {
    sum += e.total_reward;
    lo = std::min(lo, e.total_reward);
    scores += std::to_string(static_cast<int>(e.total_reward)) + " ";
  }
  const double mean = sum / static_cast<double>(eps.size());
  char stats[64];
  std::snprintf(stats, sizeof stats, "mean %.1f min %d", mean, static_cast<int>(lo));
  return {mean >= kNoisyMeanTarget && lo >= kNoisyMinTarget,
          "model seed " + std::to_string(kSeeds[pick]) + ", scores " + scores + stats};
}

Outcome noisy_training() {
  int hits = 0;
  std::string detail;
  for (auto seed : kSeeds) {
    auto cfg = radio_config(2, seed, kRadioDeadline);
    cfg.backend.kind = experiment::BackendKind::TrajectoryAverage;
    cfg.backend.device = kData / "devices" / "ibmq-poughkeepsie.csv";
    cfg.backend.trajectories = kNoisyTrajectories;
    const auto t0 = Clock::now();
    const auto result = experiment::run_training(cfg);
    const double best = best_rolling_until(result.log, kRadioDeadline);
    hits += best >= kNoisyTrainTarget;
    char buf[120];
    std::snprintf(buf, sizeof buf, "seed %llu: %.2f (%.0fs); ", static_cast<unsigned long long>(seed), best,
                  seconds_since(t0));
    std::printf("  noisy radio n=2 %s\n", buf);
    std::fflush(stdout);
    detail += buf;
  }
  detail.resize(detail.size() - 2);
  return {hits >= kSeedsNeeded, std::to_string(hits) + "/3 seeds; best rolling mean by 300: " + detail};
}

// Value iteration on a deterministic frozen lake.
std::vector<std::array<double, 4>> lake_q_star(const envs::FrozenLakeMap& map, double gamma) {
  std::vector<std::array<double, 4>> q(16, {0, 0, 0, 0});
  for (int sweep = 0; sweep < 10000; ++sweep) {
    double change = 0.0;
    for (std::size_t s = 0; s < 16; ++s) {
      if (map.is_terminal(s)) continue;
      for (int a = 0; a < 4; ++a) {
        const auto o = envs::fl_step(map, s, a);
        double v = o.reward;
        if (!o.terminal) v += gamma * *std::max_element(q[o.next_state].begin(), q[o.next_state].end());
        change = std::max(change, std::abs(v - q[s][a]));
        q[s][a] = v;
      }
    }
    if (change < 1e-15) break;
  }
  return q;
}

int lake_bfs(const envs::FrozenLakeMap& map) {
  std::vector<int> dist(16, -1);
  std::queue<std::size_t> frontier;
  dist[map.start()] = 0;
  frontier.push(map.start());
  while (!frontier.empty()) {
    const auto s = frontier.front();
    frontier.pop();
    if (map.at(s) == envs::Cell::Goal) return dist[s];
    if (map.at(s) == envs::Cell::Hole) continue;
    for (int a = 0; a < 4; ++a) {
      const auto n = envs::fl_step(map, s, a).next_state;
      if (dist[n] < 0) {
        dist[n] = dist[s] + 1;
        frontier.push(n);
      }
    }
  }
  return -1;
}

Outcome baseline_oracle() {
  const auto map = envs::builtin_lake("a");
  rl::TabularConfig cfg;
  const auto q_star = lake_q_star(map, cfg.gamma);
  const int shortest = lake_bfs(map);
  auto check = [&](const rl::QTable& table, envs::DiscreteEnv& env) {
    const auto path = rl::greedy_path(env, table);
    if (path.size() != static_cast<std::size_t>(shortest) + 1 || map.at(path.back()) != envs::Cell::Goal) {
      return false;
    }
    for (std::size_t k = 0; k + 1 < path.size(); ++k) {
      const auto& row = q_star[path[k]];
      const double best = *std::max_element(row.begin(), row.end());
      if (std::abs(row[table.greedy(path[k])] - best) > 1e-9) return false;
    }
    return true;
  };
  int q_ok = 0, sarsa_ok = 0;
  for (auto seed : kSeeds) {
    cfg.seed = seed;
    envs::FrozenLake env(map);
    q_ok += check(rl::q_learning_baseline(env, cfg, 2000).table, env);
    sarsa_ok += check(rl::sarsa_baseline(env, cfg, 2000).table, env);
  }
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "BFS length %d; greedy paths shortest and Q*-optimal: q-learning %d/3, sarsa %d/3", shortest,
                q_ok, sarsa_ok);
  return {q_ok == 3 && sarsa_ok == 3, buf};
}

Outcome property_suite() {
  std::vector<std::string> failed;

  std::mt19937_64 rng(99);
  double worst_norm = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto m = vqc::VqcModel::random(vqc::CircuitSpec::uniform(4, 3), rng);
    const auto sv = qsim::run_circuit(qsim::StateVector::zero(4), vqc::build_circuit(m, vqc::encode(trial % 16, 4)));
    worst_norm = std::max(worst_norm, std::abs(sv.norm_squared() - 1.0));
  }
  if (worst_norm > 1e-9) failed.push_back("norm");

  bool fifo = true;
  for (std::size_t extra : {0u, 3u, 500u}) {
    rl::ReplayBuffer buf(80);
    for (std::size_t i = 0; i < 80 + extra; ++i) buf.push({i, 0, 0.0, 0, false});
    for (std::size_t k = 0; k < 80; ++k) fifo = fifo && buf[k].state == extra + k;
  }
  if (!fifo) failed.push_back("fifo");

  {
    envs::CognitiveRadio env(envs::builtin_radio("a", 2));
    std::mt19937_64 init(vqc::derive_seed(1, 0));
    rl::DqnTrainer t(vqc::VqcModel::random(vqc::CircuitSpec::radio(2), init), rl::AgentConfig::radio(), 1);
    auto state = env.reset();
    auto prev = t.target();
    bool sync_ok = true;
    for (int i = 0; i < 200; ++i) {
      const auto r = t.step(env, state);
      if (t.global_step() % t.config().target_sync_every == 0) {
        sync_ok = sync_ok && t.target() == t.model();
      } else {
        sync_ok = sync_ok && t.target() == prev;
      }
      prev = t.target();
      state = r.outcome.terminal ? env.reset() : r.outcome.next_state;
    }
    if (!sync_ok) failed.push_back("target-sync");
  }

  bool bias_ok = true;
  for (int trial = 0; trial < 20; ++trial) {
    auto m = vqc::VqcModel::random(vqc::CircuitSpec::uniform(4), rng);
    auto shifted = m;
    for (auto& b : shifted.bias) b += 0.37 * trial - 3.0;
    for (std::size_t s = 0; s < 16; ++s) {
      bias_ok = bias_ok && rl::argmax(vqc::forward(m, s)) == rl::argmax(vqc::forward(shifted, s));
    }
  }
  if (!bias_ok) failed.push_back("bias-shift");

  const auto a = experiment::run_training(radio_config(3, 11, 30));
  const auto b = experiment::run_training(radio_config(3, 11, 30));
  if (rl::scores_csv(a.log) != rl::scores_csv(b.log) || !(a.checkpoint == b.checkpoint)) {
    failed.push_back("determinism");
  }

  if (failed.empty()) return {true, "norm, fifo, target-sync, bias-shift, determinism"};
  std::string detail = "failed:";
  for (const auto& f : failed) detail += " " + f;
  return {false, detail};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> known;
  for (int i = 1; i < argc; ++i) {
    if (std::string(argv[i]) == "--known-failure" && i + 1 < argc) {
      known.insert(std::stoi(argv[++i]));
    } else {
      std::fprintf(stderr, "usage: acceptance [--known-failure N]...\n");
      return 2;
    }
  }

  std::vector<std::pair<int, Outcome>> results;
  auto report = [&](int id, const char* name, const Outcome& o) {
    std::printf("[%s] %d. %s: %s\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str());
    std::fflush(stdout);
    results.emplace_back(id, o);
  };

  report(1, "encoding oracle", encoding_oracle());
  report(2, "gradient fidelity", gradient_fidelity());
  report(3, "parameter counts", parameter_counts());
  const auto radio = train_radio();
  report(4, "cognitive-radio training", radio_convergence(radio));
  report(5, "frozen-lake training", frozen_lake_training());
  report(6, "noisy inference", noisy_inference(radio));
  report(7, "noisy training", noisy_training());
  report(8, "baseline oracle", baseline_oracle());
  report(9, "property suite", property_suite());

  int unexpected = 0, passed = 0;
  for (const auto& [id, o] : results) {
    passed += o.pass;
    if (!o.pass && !known.count(id)) ++unexpected;
  }
  std::printf("%d/%zu criteria passed", passed, results.size());
  if (!known.empty()) {
    std::printf("; known failures:");
    for (int k : known) std::printf(" %d", k);
  }
  std::printf("\n");
  return unexpected == 0 ? 0 : 1;
}
