#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "iil/dqn.hpp"

using namespace iil;

namespace {

const StateVec kS0{1.0, 0.0};
const StateVec kS1{0.0, 1.0};

// Linear Q-network on one-hot states: Q(s_i, a) = w[a][i] + b[a].
void set_q(DqnAgent& agent, const std::vector<double>& w, const std::vector<double>& b) {
  auto& layer = agent.qnet().layers().front();
  layer.weights = w;
  layer.biases = b;
  agent.sync_target();
}

DqnConfig toy_config(double gamma) {
  DqnConfig c;
  c.gamma = gamma;
  c.alpha = 0.5;
  c.epsilon = 0.0;
  c.sync_interval = 1;
  c.warmup = 1;
  return c;
}

}  // namespace

TEST_CASE("temporal difference targets") {
  DqnAgent agent({2, 2}, toy_config(0.9), 1);
  // Q(s0) = (1, 3.5), Q(s1) = (-2.5, 0.5)
  set_q(agent, {1.0, -2.5, 3.0, 0.0}, {0.0, 0.5});
  CHECK(agent.target_net().forward(kS0) == std::vector<double>{1.0, 3.5});
  CHECK(agent.target_net().forward(kS1) == std::vector<double>{-2.5, 0.5});

  std::vector<DqnTransition> batch{{kS0, 0, 1.0, kS1, false}, {kS1, 1, -1.0, kS0, false}, {kS0, 1, 4.0, kS0, true}};
  auto y = agent.td_targets(batch);
  CHECK(y[0] == doctest::Approx(1.0 + 0.9 * 0.5).epsilon(1e-12));
  CHECK(y[1] == doctest::Approx(-1.0 + 0.9 * 3.5).epsilon(1e-12));
  CHECK(y[2] == 4.0);

  DqnAgent myopic({2, 2}, toy_config(0.0), 2);
  set_q(myopic, {1.0, -2.5, 3.0, 0.0}, {0.0, 0.5});
  auto y0 = myopic.td_targets(batch);
  for (std::size_t k = 0; k < batch.size(); ++k) CHECK(y0[k] == batch[k].reward);

  CHECK_THROWS_AS(agent.td_targets({}), InvalidBatch);
  CHECK_THROWS_AS(agent.update({}), InvalidBatch);
  CHECK_THROWS_AS(agent.update({{kS0, 2, 0.0, kS1, false}}), ShapeError);
}

TEST_CASE("an update only moves the taken action") {
  DqnAgent agent({2, 2}, toy_config(0.9), 3);
  set_q(agent, {1.0, -2.5, 3.0, 0.0}, {0.0, 0.5});
  agent.update({{kS0, 0, 5.0, kS1, true}});
  auto q = agent.qnet().forward(kS0);
  CHECK(q[0] > 1.0);
  CHECK(q[1] == 3.5);
}

TEST_CASE("epsilon greedy") {
  DqnConfig cfg;
  cfg.epsilon = 0.0;
  DqnAgent greedy(EnvKind::cartpole, cfg, 4);
  Rng rng(5);
  std::uniform_real_distribution<double> u(-0.2, 0.2);
  for (int k = 0; k < 200; ++k) {
    StateVec s{u(rng), u(rng), u(rng), u(rng)};
    auto q = greedy.qnet().forward(s);
    CHECK(greedy.epsilon_greedy(s, rng).argmax() ==
          static_cast<std::size_t>(std::max_element(q.begin(), q.end()) - q.begin()));
  }

  cfg.epsilon = 1.0;
  DqnAgent random(EnvKind::cartpole, cfg, 6);
  int zeros = 0;
  const int n = 10000;
  for (int k = 0; k < n; ++k) zeros += random.epsilon_greedy({0, 0, 0, 0}, rng).argmax() == 0;
  CHECK(std::abs(zeros / double(n) - 0.5) <= 0.02);

  DqnAgent tie({2, 3}, toy_config(0.9), 7);
  set_q(tie, std::vector<double>(6, 0.0), std::vector<double>(3, 0.25));
  CHECK(tie.greedy(kS0).argmax() == 0);
  CHECK(tie.epsilon_greedy(kS1, rng).argmax() == 0);
}

TEST_CASE("epsilon decays per episode down to the floor") {
  DqnConfig cfg;
  cfg.epsilon = 0.5;
  cfg.epsilon_decay = 0.5;
  cfg.epsilon_min = 0.1;
  DqnAgent agent(EnvKind::cartpole, cfg, 8);
  agent.end_episode();
  CHECK(agent.epsilon() == doctest::Approx(0.25));
  agent.end_episode();
  agent.end_episode();
  CHECK(agent.epsilon() == doctest::Approx(0.1));
}

TEST_CASE("target network sync") {
  DqnConfig cfg = toy_config(0.9);
  cfg.alpha = 0.05;
  cfg.sync_interval = 5;
  DqnAgent agent({2, 8, 2}, cfg, 9);
  Rng rng(10);
  std::vector<DqnTransition> data{{kS0, 0, 0.0, kS0, false}, {kS0, 1, 1.0, kS1, false}, {kS1, 0, 2.0, kS0, false},
                                  {kS1, 1, 0.0, kS1, false}};

  std::vector<Mlp> snapshots;
  std::vector<Mlp> target_history;
  Mlp target = agent.target_net();
  for (int u = 1; u <= 15; ++u) {
    agent.update(data);
    if (u % 5 == 0) {
      snapshots.push_back(agent.qnet());
      target_history.push_back(agent.target_net());
      CHECK(agent.target_net().forward(kS0) == agent.qnet().forward(kS0));
      CHECK(agent.target_net().forward(kS1) == agent.qnet().forward(kS1));
      target = agent.target_net();
    } else {
      CHECK(agent.target_net() == target);
      CHECK_FALSE(agent.qnet() == target);
    }
  }
  REQUIRE(target_history.size() == 3);
  for (std::size_t k = 0; k < 3; ++k) CHECK(target_history[k] == snapshots[k]);
  CHECK(agent.updates() == 15);
}

TEST_CASE("toy problem converges to the Bellman fixed point") {
  // s0: a0 stays (r 0), a1 moves to s1 (r 1); s1: a0 moves to s0 (r 2), a1 stays (r 0)
  const double gamma = 0.9;
  const std::size_t next[2][2] = {{0, 1}, {0, 1}};
  const double reward[2][2] = {{0.0, 1.0}, {2.0, 0.0}};
  double q[2][2] = {{0, 0}, {0, 0}};
  for (int it = 0; it < 2000; ++it) {
    double n[2][2];
    for (int s = 0; s < 2; ++s)
      for (int a = 0; a < 2; ++a) n[s][a] = reward[s][a] + gamma * std::max(q[next[s][a]][0], q[next[s][a]][1]);
    std::copy(&n[0][0], &n[0][0] + 4, &q[0][0]);
  }

  DqnAgent agent({2, 2}, toy_config(gamma), 11);
  const StateVec states[2] = {kS0, kS1};
  std::vector<DqnTransition> all;
  for (int s = 0; s < 2; ++s)
    for (int a = 0; a < 2; ++a) all.push_back({states[s], std::size_t(a), reward[s][a], states[next[s][a]], false});
  for (int u = 0; u < 20000; ++u) agent.update(all);
  for (int s = 0; s < 2; ++s) {
    auto got = agent.qnet().forward(states[s]);
    for (int a = 0; a < 2; ++a) CHECK(std::abs(got[a] - q[s][a]) <= 1e-3);
  }
}

TEST_CASE("observe waits for the warmup") {
  DqnConfig cfg;
  cfg.warmup = 10;
  cfg.batch_size = 4;
  DqnAgent agent(EnvKind::cartpole, cfg, 12);
  for (int k = 0; k < 9; ++k) agent.observe({{0, 0, 0, 0}, 0, 1.0, {0, 0, 0, 0}, false});
  CHECK(agent.updates() == 0);
  agent.observe({{0, 0, 0, 0}, 1, 1.0, {0, 0, 0, 0}, true});
  CHECK(agent.updates() == 1);
  CHECK(agent.replay().size() == 10);
}

TEST_CASE("config") {
  DqnConfig c;
  CHECK(c.gamma == 0.99);
  CHECK(c.alpha == 1e-4);
  CHECK(c.epsilon_decay == 0.99941);
  auto back = dqn_config_from_json(nlohmann::json::parse(to_json(c).dump()));
  CHECK(to_json(back) == to_json(c));
  c.gamma = 1.5;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = DqnConfig{};
  c.sync_interval = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  CHECK_THROWS_AS(DqnAgent(EnvKind::reacher, DqnConfig{}, 0), ConfigError);
}
