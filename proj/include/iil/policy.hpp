#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "iil/buffers.hpp"
#include "iil/envs.hpp"
#include "iil/nn.hpp"

namespace iil {

/// Policy network shape per environment: two hidden layers, 16 units for
/// Cart-Pole and 32 elsewhere; softmax head for discrete actions.
std::vector<std::size_t> policy_layer_sizes(EnvKind kind);
OutputHead policy_head(EnvKind kind);
ActionKind action_kind_of(EnvKind kind);
std::size_t action_dim_of(EnvKind kind);
std::size_t state_dim_of(EnvKind kind);

/// Network output -> executable action (argmax one-hot, or clipped values).
ActionVec action_from_output(ActionKind kind, const std::vector<double>& output);

/// mean + N(0, sigma^2) per dimension, clipped to [-1, 1].
ActionVec sample_gaussian_action(const ActionVec& mean, double sigma, Rng& rng);

/// "Do nothing" action: zeros for continuous spaces; index 0 for the discrete
/// lander. Cart-Pole has none.
std::optional<ActionVec> zero_action(EnvKind kind);

/// A read-only copy of a policy used for evaluation and streaming.
struct FrozenPolicy {
  Mlp net;
  ActionKind kind = ActionKind::discrete;
  double sigma = 0.0;

  ActionVec act(const StateVec& state, Rng& rng) const;
};

/// Immediate update on one (state, target) pair.
double update_on_pair(Mlp& policy, const StateVec& state, const ActionVec& target, const TrainConfig& cfg);

/// One SGD step on a batch sampled (with replacement) from the demo buffer.
/// Returns false, without touching the policy, when the buffer is empty.
bool update_on_batch(Mlp& policy, const BoundedBuffer<DemoPair>& demo, const TrainConfig& cfg, Rng& rng);

/// Runs n frozen-policy episodes. Episode i draws its initial state and policy
/// noise from its own stream derived from (seed, i), so results do not depend
/// on how episodes are scheduled across threads.
std::vector<double> evaluate(const FrozenPolicy& policy, EnvKind env_kind, int n, const InitSpec& init,
                             std::uint64_t seed);

/// Same, reporting the per-episode step counts as well.
struct EvalEpisode {
  double reward = 0.0;
  int steps = 0;
  DoneReason reason = DoneReason::none;
};
std::vector<EvalEpisode> evaluate_detailed(const FrozenPolicy& policy, EnvKind env_kind, int n,
                                           const InitSpec& init, std::uint64_t seed);

Rng derive_rng(std::uint64_t seed, std::uint64_t stream);

}  // namespace iil
