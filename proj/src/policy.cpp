#include "iil/policy.hpp"

#include <algorithm>

namespace iil {

std::vector<std::size_t> policy_layer_sizes(EnvKind kind) {
  switch (kind) {
    case EnvKind::cartpole: return {4, 16, 16, 2};
    case EnvKind::reacher: return {11, 32, 32, 2};
    case EnvKind::lander_discrete: return {8, 32, 32, 4};
    case EnvKind::lander_continuous: return {8, 32, 32, 2};
  }
  throw ConfigError("unknown environment kind");
}

ActionKind action_kind_of(EnvKind kind) {
  return kind == EnvKind::cartpole || kind == EnvKind::lander_discrete ? ActionKind::discrete
                                                                         : ActionKind::continuous;
}

OutputHead policy_head(EnvKind kind) {
  return action_kind_of(kind) == ActionKind::discrete ? OutputHead::softmax : OutputHead::linear;
}

std::size_t action_dim_of(EnvKind kind) { return policy_layer_sizes(kind).back(); }

std::size_t state_dim_of(EnvKind kind) { return policy_layer_sizes(kind).front(); }

ActionVec action_from_output(ActionKind kind, const std::vector<double>& output) {
  if (kind == ActionKind::discrete) {
    const auto idx = static_cast<std::size_t>(std::max_element(output.begin(), output.end()) - output.begin());
    return ActionVec::one_hot(output.size(), idx);
  }
  return ActionVec::continuous(output).clipped();
}

ActionVec sample_gaussian_action(const ActionVec& mean, double sigma, Rng& rng) {
  if (sigma < 0.0) throw ConfigError("sigma must be nonnegative");
  if (sigma == 0.0 || mean.kind == ActionKind::discrete) return mean.clipped();
  std::normal_distribution<double> noise(0.0, sigma);
  ActionVec out = mean;
  for (double& v : out.values) v += noise(rng);
  return out.clipped();
}

std::optional<ActionVec> zero_action(EnvKind kind) {
  switch (kind) {
    case EnvKind::cartpole: return std::nullopt;
    case EnvKind::lander_discrete: return ActionVec::one_hot(4, 0);
    case EnvKind::reacher:
    case EnvKind::lander_continuous: return ActionVec::zeros(ActionKind::continuous, 2);
  }
  return std::nullopt;
}

ActionVec FrozenPolicy::act(const StateVec& state, Rng& rng) const {
  ActionVec mean = action_from_output(kind, net.forward(state));
  return sigma > 0.0 ? sample_gaussian_action(mean, sigma, rng) : mean;
}

double update_on_pair(Mlp& policy, const StateVec& state, const ActionVec& target, const TrainConfig& cfg) {
  Matrix x(1, state.size());
  std::copy(state.begin(), state.end(), x.data.begin());
  Matrix y(1, target.values.size());
  std::copy(target.values.begin(), target.values.end(), y.data.begin());
  return train_step(policy, x, y, cfg);
}

bool update_on_batch(Mlp& policy, const BoundedBuffer<DemoPair>& demo, const TrainConfig& cfg, Rng& rng) {
  if (demo.empty()) return false;
  const auto batch = demo.sample(cfg.batch_size, rng);
  Matrix x(batch.size(), policy.input_dim());
  Matrix y(batch.size(), policy.output_dim());
  for (std::size_t r = 0; r < batch.size(); ++r) {
    std::copy(batch[r].state.begin(), batch[r].state.end(), x.row(r));
    std::copy(batch[r].target_action.values.begin(), batch[r].target_action.values.end(), y.row(r));
  }
  train_step(policy, x, y, cfg);
  return true;
}

Rng derive_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32), 0x11u};
  return Rng(seq);
}

std::vector<EvalEpisode> evaluate_detailed(const FrozenPolicy& policy, EnvKind env_kind, int n,
                                           const InitSpec& init, std::uint64_t seed) {
  std::vector<EvalEpisode> out(static_cast<std::size_t>(std::max(n, 0)));
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n; ++i) {
    auto env = make_env(env_kind);
    Rng rng = derive_rng(seed, static_cast<std::uint64_t>(i));
    StateVec s = env->reset(init, rng);
    EvalEpisode ep;
    for (;;) {
      const StepResult r = env->step(policy.act(s, rng));
      ep.reward += r.reward;
      ++ep.steps;
      s = r.next_state;
      if (r.done) {
        ep.reason = r.done_reason;
        break;
      }
    }
    out[static_cast<std::size_t>(i)] = ep;
  }
  return out;
}

std::vector<double> evaluate(const FrozenPolicy& policy, EnvKind env_kind, int n, const InitSpec& init,
                             std::uint64_t seed) {
  std::vector<double> rewards;
  for (const auto& ep : evaluate_detailed(policy, env_kind, n, init, seed)) rewards.push_back(ep.reward);
  return rewards;
}

}  // namespace iil
