#include <doctest.h>

#include <algorithm>
#include <queue>
#include <random>
#include <set>

#include "vqdqn/envs.hpp"
#include "vqdqn/errors.hpp"

using namespace vqdqn;
using namespace vqdqn::envs;

namespace {

constexpr int kLeft = 0, kDown = 1, kRight = 2, kUp = 3;

// Grid arithmetic oracle for a clamped move.
std::size_t clamp_move(std::size_t s, int a) {
  int r = static_cast<int>(s) / 4, c = static_cast<int>(s) % 4;
  if (a == kLeft) c = std::max(c - 1, 0);
  if (a == kDown) r = std::min(r + 1, 3);
  if (a == kRight) c = std::min(c + 1, 3);
  if (a == kUp) r = std::max(r - 1, 0);
  return static_cast<std::size_t>(r * 4 + c);
}

int bfs_moves(const FrozenLakeMap& map) {
  std::vector<int> dist(16, -1);
  std::queue<std::size_t> q;
  dist[map.start()] = 0;
  q.push(map.start());
  while (!q.empty()) {
    const auto s = q.front();
    q.pop();
    if (map.at(s) == Cell::Goal) return dist[s];
    if (map.at(s) == Cell::Hole) continue;
    for (int a = 0; a < 4; ++a) {
      const auto n = clamp_move(s, a);
      if (dist[n] < 0) {
        dist[n] = dist[s] + 1;
        q.push(n);
      }
    }
  }
  return -1;
}

}  // namespace

TEST_CASE("fl_reset") {
  CHECK(fl_reset(builtin_lake("a")) == 0);
  const auto m = FrozenLakeMap::parse("FFFF\nFFSF\nFFFF\nFFFG\n");
  CHECK(fl_reset(m) == 6);
  CHECK_THROWS_AS(FrozenLakeMap::parse("FFFF\nFFFF\nFFFF\nFFFG\n"), ConfigError);
}

TEST_CASE("map loading errors") {
  CHECK_THROWS_AS(FrozenLakeMap::parse("SFFF\nFFFF\nFFFF\nFFFF\n"), ConfigError);  // no goal
  CHECK_THROWS_AS(FrozenLakeMap::parse("SFFF\nFFFF\nFFFF\n"), ConfigError);        // 3 rows
  CHECK_THROWS_AS(FrozenLakeMap::parse("SFFF\nFFXF\nFFFF\nFFFG\n"), ConfigError);  // bad cell
  CHECK_THROWS_AS(FrozenLakeMap::parse("SSFF\nFFFF\nFFFF\nFFFG\n"), ConfigError);  // two starts
  // goal sealed off by holes; BFS oracle agrees it is unreachable
  const std::string sealed = "SFFF\nFFFF\nFFHH\nFFHG\n";
  CHECK_THROWS_AS(FrozenLakeMap::parse(sealed), ConfigError);
  try {
    FrozenLakeMap::parse("SFFF\nFFXF\nFFFF\nFFFG\n");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("X") != std::string::npos);
  }
}

TEST_CASE("builtin maps are valid and round trip") {
  for (const char* label : {"a", "b", "c"}) {
    const auto m = builtin_lake(label);
    CHECK(bfs_moves(m) > 0);
    CHECK(FrozenLakeMap::parse(m.to_string()).grid == m.grid);
  }
  CHECK(builtin_lake("a").to_string() == "SFFF\nFHFH\nFFFH\nHFFG\n");
  CHECK(bfs_moves(builtin_lake("a")) == 6);
  CHECK_THROWS_AS(builtin_lake("z"), ConfigError);
}

TEST_CASE("fl_step") {
  const auto m = builtin_lake("a");
  SUBCASE("into the goal") {
    const auto o = fl_step(m, 14, kRight);
    CHECK(o.next_state == 15);
    CHECK(o.reward == kGoalReward);
    CHECK(o.terminal);
  }
  SUBCASE("wall clamp") {
    const auto o = fl_step(m, 0, kLeft);
    CHECK(o.next_state == 0);
    CHECK(o.reward == kStepReward);
    CHECK_FALSE(o.terminal);
  }
  SUBCASE("into a hole") {
    const auto o = fl_step(m, 1, kDown);
    CHECK(o.next_state == 5);
    CHECK(o.reward == kHoleReward);
    CHECK(o.terminal);
  }
  SUBCASE("from a terminal cell") {
    CHECK_THROWS_AS(fl_step(m, 5, kUp), UsageError);
    CHECK_THROWS_AS(fl_step(m, 15, kUp), UsageError);
  }
}

TEST_CASE("property: frozen-lake rewards and moves over every state-action pair") {
  for (const char* label : {"a", "b", "c"}) {
    const auto m = builtin_lake(label);
    for (std::size_t s = 0; s < 16; ++s) {
      if (m.is_terminal(s)) continue;
      for (int a = 0; a < 4; ++a) {
        const auto o = fl_step(m, s, a);
        CHECK(o.next_state == clamp_move(s, a));
        const std::set<double> allowed{kHoleReward, kGoalReward, kStepReward};
        CHECK(allowed.count(o.reward) == 1);
        CHECK(o.terminal == m.is_terminal(o.next_state));
        const auto again = fl_step(m, s, a);
        CHECK(again.next_state == o.next_state);
        CHECK(again.reward == o.reward);
      }
    }
  }
}

TEST_CASE("property: frozen-lake episode reward is bounded by the shortest path") {
  const auto map = builtin_lake("a");
  const double bound = 1.0 - 0.01 * (bfs_moves(map) - 1);
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> act(0, 3);
  FrozenLake env(map, 200);
  for (int ep = 0; ep < 2000; ++ep) {
    env.reset();
    double total = 0.0;
    for (;;) {
      const auto o = env.step(act(rng));
      total += o.reward;
      if (o.terminal) break;
    }
    CHECK(total <= bound + 1e-12);
  }
}

TEST_CASE("FrozenLake step cap truncates") {
  FrozenLake env(builtin_lake("a"), 3);
  env.reset();
  CHECK_FALSE(env.step(kUp).terminal);
  CHECK_FALSE(env.step(kUp).terminal);
  const auto o = env.step(kUp);
  CHECK(o.terminal);
  CHECK(o.truncated);
  CHECK_THROWS_AS(env.step(kUp), UsageError);
}

TEST_CASE("cr_state_index") {
  CHECK(cr_state_index(2, 5, 4) == 9);
  for (int n = 2; n <= 5; ++n) CHECK(cr_state_index(0, 0, n) == 0);
  std::set<std::size_t> seen;
  for (int c = 0; c < 3; ++c) {
    for (long t = 0; t < 3; ++t) seen.insert(cr_state_index(c, t, 3));
  }
  CHECK(seen.size() == 9);
  CHECK(*seen.rbegin() < 16);
}

TEST_CASE("radio patterns") {
  CHECK(builtin_radio("a", 4).occupancy == std::vector<int>{0, 1, 2, 3});
  CHECK(builtin_radio("a", 2).occupancy == std::vector<int>{0, 1});
  CHECK(builtin_radio("b", 4).occupancy == std::vector<int>{0, 2, 1, 3});
  CHECK(builtin_radio("c", 4).occupancy == std::vector<int>{3, 1, 0, 2});
  CHECK_THROWS_AS(builtin_radio("b", 3), ConfigError);
  CHECK_THROWS_AS(builtin_radio("a", 6), ConfigError);
  CHECK_THROWS_AS(RadioPattern::parse_json(R"({"n_channels": 3, "occupancy": [0, 1, 3]})"),
                  ConfigError);
  CHECK_THROWS_AS(RadioPattern::parse_json(R"({"n_channels": 3, "occupancy": [0, 1]})"),
                  ConfigError);
  const auto p = builtin_radio("c", 4);
  CHECK(RadioPattern::parse_json(p.to_json()).occupancy == p.occupancy);
}

TEST_CASE("property: radio occupancy is periodic") {
  for (int n = 2; n <= 5; ++n) {
    const auto p = builtin_radio("a", n);
    for (long t = 0; t <= 200; ++t) CHECK(p.occupied(t) == p.occupied(t + n));
  }
}

TEST_CASE("cognitive radio episodes") {
  const auto pattern = builtin_radio("a", 4);
  auto free_channel = [&](long t) { return (pattern.occupied(t) + 1) % 4; };

  SUBCASE("perfect play scores 100 and stops at the step cap") {
    CognitiveRadio env(pattern);
    env.reset();
    double score = 0.0;
    int steps = 0;
    for (;;) {
      const auto o = env.step(free_channel(env.time()));
      score += o.reward;
      ++steps;
      if (o.terminal) {
        CHECK(o.truncated);
        break;
      }
    }
    CHECK(score == 100.0);
    CHECK(steps == kRadioStepCap);
  }
  SUBCASE("three collisions end the episode at -3") {
    CognitiveRadio env(pattern);
    env.reset();
    double score = 0.0;
    EnvOutcome o;
    for (int i = 0; i < 3; ++i) {
      o = env.step(pattern.occupied(env.time()));
      score += o.reward;
    }
    CHECK(o.terminal);
    CHECK_FALSE(o.truncated);
    CHECK(score == -3.0);
  }
  SUBCASE("one collision scores 98") {
    CognitiveRadio env(pattern);
    env.reset();
    double score = env.step(pattern.occupied(0)).reward;
    for (;;) {
      const auto o = env.step(free_channel(env.time()));
      score += o.reward;
      if (o.terminal) break;
    }
    CHECK(score == 98.0);
  }
  SUBCASE("reset clears the collision counter") {
    CognitiveRadio env(pattern);
    env.reset();
    env.step(pattern.occupied(0));
    env.step(pattern.occupied(1));
    env.reset();
    CHECK(env.collisions() == 0);
    CHECK(env.time() == 0);
  }
}

TEST_CASE("property: radio rewards, next states and score bounds") {
  std::mt19937_64 rng(12);
  for (int n = 2; n <= 5; ++n) {
    CognitiveRadio env(builtin_radio("a", n));
    std::uniform_int_distribution<int> act(0, n - 1);
    for (int ep = 0; ep < 200; ++ep) {
      env.reset();
      double score = 0.0;
      for (;;) {
        const long t = env.time();
        const int a = act(rng);
        const auto o = env.step(a);
        CHECK((o.reward == kCollisionReward || o.reward == kClearReward));
        CHECK(o.reward == cr_reward(env.pattern(), t, a));
        CHECK(o.next_state == cr_state_index(env.pattern().occupied(t + 1), t + 1, n));
        CHECK(o.next_state < env.n_states());
        score += o.reward;
        if (o.terminal) break;
      }
      CHECK(score >= -3.0);
      CHECK(score <= 100.0);
    }
  }
}

TEST_CASE("load_env_config") {
  const std::filesystem::path data = VQDQN_DATA_DIR;
  const auto lake = load_env_config(data / "maps" / "frozen_lake_a.txt");
  REQUIRE(std::holds_alternative<FrozenLakeMap>(lake));
  CHECK(std::get<FrozenLakeMap>(lake).grid == builtin_lake("a").grid);
  const auto radio = load_env_config(data / "radio" / "pattern_a_4ch.json");
  REQUIRE(std::holds_alternative<RadioPattern>(radio));
  CHECK(std::get<RadioPattern>(radio).occupancy == std::vector<int>{0, 1, 2, 3});
  CHECK_THROWS_AS(load_env_config(data / "maps" / "missing.txt"), ConfigError);
}
