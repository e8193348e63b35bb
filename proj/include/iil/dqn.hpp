#pragma once

#include <cstdint>
#include <vector>

#include <json.hpp>

#include "iil/buffers.hpp"
#include "iil/policy.hpp"

namespace iil {

struct DqnTransition {
  StateVec state;
  std::size_t action = 0;
  double reward = 0.0;
  StateVec next_state;
  bool done = false;
};

struct DqnConfig {
  double gamma = 0.99;
  double alpha = 1e-4;
  double epsilon = 1.0;
  double epsilon_decay = 0.99941;  // applied once per episode
  double epsilon_min = 0.01;
  int sync_interval = 500;         // in updates
  std::size_t batch_size = 32;
  std::size_t replay_capacity = 50000;
  std::size_t warmup = 500;        // transitions collected before updates start
  std::size_t hidden = 64;

  void validate() const;
};

nlohmann::json to_json(const DqnConfig& c);
DqnConfig dqn_config_from_json(const nlohmann::json& doc);

/// Q-learning with a replay buffer and a periodically synced target network.
class DqnAgent {
 public:
  DqnAgent(EnvKind env, DqnConfig cfg, std::uint64_t seed);
  /// Arbitrary Q-network shape (linear head), for small hand-built problems.
  DqnAgent(std::vector<std::size_t> layer_sizes, DqnConfig cfg, std::uint64_t seed);

  /// Random action with probability epsilon, otherwise the greedy one.
  ActionVec epsilon_greedy(const StateVec& state, Rng& rng) const;
  /// argmax_a Q(state, a), lowest index on ties.
  ActionVec greedy(const StateVec& state) const;

  /// Regression targets r + gamma * max_a Q_target(s', a) (r alone when done).
  std::vector<double> td_targets(const std::vector<DqnTransition>& batch) const;
  /// One SGD step on the batch; returns the pre-step loss.
  double update(const std::vector<DqnTransition>& batch);
  void sync_target();

  /// Stores a transition and, once warmed up, trains on a replay sample.
  void observe(DqnTransition t);
  /// Decays epsilon.
  void end_episode();

  FrozenPolicy frozen() const { return FrozenPolicy{qnet_, ActionKind::discrete, 0.0}; }
  const Mlp& qnet() const { return qnet_; }
  Mlp& qnet() { return qnet_; }
  const Mlp& target_net() const { return target_; }
  const DqnConfig& config() const { return cfg_; }
  double epsilon() const { return epsilon_; }
  std::size_t updates() const { return updates_; }
  const BoundedBuffer<DqnTransition>& replay() const { return replay_; }
  Rng& rng() { return rng_; }

 private:
  DqnConfig cfg_;
  Mlp qnet_;
  Mlp target_;
  BoundedBuffer<DqnTransition> replay_;
  Rng rng_;
  double epsilon_;
  std::size_t updates_ = 0;
};

}  // namespace iil
