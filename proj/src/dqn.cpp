#include "iil/dqn.hpp"

#include <algorithm>

namespace iil {

void DqnConfig::validate() const {
  if (gamma < 0.0 || gamma > 1.0) throw ConfigError("gamma must lie in [0, 1]");
  if (!(alpha > 0.0)) throw ConfigError("alpha must be positive");
  if (epsilon < 0.0 || epsilon > 1.0) throw ConfigError("epsilon must lie in [0, 1]");
  if (epsilon_decay <= 0.0 || epsilon_decay > 1.0) throw ConfigError("epsilon_decay must lie in (0, 1]");
  if (sync_interval < 1) throw ConfigError("sync_interval must be at least 1");
  if (batch_size < 1 || replay_capacity < 1 || hidden < 1) throw ConfigError("sizes must be positive");
}

nlohmann::json to_json(const DqnConfig& c) {
  return nlohmann::json{{"gamma", c.gamma},           {"alpha", c.alpha},
                        {"epsilon", c.epsilon},       {"epsilon_decay", c.epsilon_decay},
                        {"epsilon_min", c.epsilon_min}, {"sync_interval", c.sync_interval},
                        {"batch_size", c.batch_size}, {"replay_capacity", c.replay_capacity},
                        {"warmup", c.warmup},         {"hidden", c.hidden}};
}

DqnConfig dqn_config_from_json(const nlohmann::json& d) {
  DqnConfig c;
  c.gamma = d.at("gamma").get<double>();
  c.alpha = d.at("alpha").get<double>();
  c.epsilon = d.at("epsilon").get<double>();
  c.epsilon_decay = d.at("epsilon_decay").get<double>();
  c.epsilon_min = d.at("epsilon_min").get<double>();
  c.sync_interval = d.at("sync_interval").get<int>();
  c.batch_size = d.at("batch_size").get<std::size_t>();
  c.replay_capacity = d.at("replay_capacity").get<std::size_t>();
  c.warmup = d.at("warmup").get<std::size_t>();
  c.hidden = d.at("hidden").get<std::size_t>();
  return c;
}

namespace {
std::vector<std::size_t> dqn_layers(EnvKind env, std::size_t hidden) {
  if (action_kind_of(env) != ActionKind::discrete) throw ConfigError("DQN needs a discrete action space");
  return {state_dim_of(env), hidden, hidden, action_dim_of(env)};
}
}  // namespace

DqnAgent::DqnAgent(EnvKind env, DqnConfig cfg, std::uint64_t seed)
    : DqnAgent(dqn_layers(env, cfg.hidden), cfg, seed) {}

DqnAgent::DqnAgent(std::vector<std::size_t> layer_sizes, DqnConfig cfg, std::uint64_t seed)
    : cfg_(cfg),
      qnet_(std::move(layer_sizes), OutputHead::linear, seed),
      target_(qnet_),
      replay_(cfg.replay_capacity),
      rng_(seed + 1),
      epsilon_(cfg.epsilon) {
  cfg_.validate();
}

ActionVec DqnAgent::greedy(const StateVec& state) const {
  return action_from_output(ActionKind::discrete, qnet_.forward(state));
}

ActionVec DqnAgent::epsilon_greedy(const StateVec& state, Rng& rng) const {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  if (epsilon_ > 0.0 && u(rng) < epsilon_) {
    std::uniform_int_distribution<std::size_t> pick(0, qnet_.output_dim() - 1);
    return ActionVec::one_hot(qnet_.output_dim(), pick(rng));
  }
  return greedy(state);
}

std::vector<double> DqnAgent::td_targets(const std::vector<DqnTransition>& batch) const {
  if (batch.empty()) throw InvalidBatch("empty DQN batch");
  Matrix next(batch.size(), qnet_.input_dim());
  for (std::size_t r = 0; r < batch.size(); ++r) {
    if (batch[r].next_state.size() != qnet_.input_dim()) throw ShapeError("transition state has the wrong length");
    std::copy(batch[r].next_state.begin(), batch[r].next_state.end(), next.row(r));
  }
  const Matrix q_next = target_.forward_batch(next);
  std::vector<double> y(batch.size());
  for (std::size_t r = 0; r < batch.size(); ++r) {
    y[r] = batch[r].reward;
    if (!batch[r].done) {
      const double* row = q_next.row(r);
      y[r] += cfg_.gamma * *std::max_element(row, row + q_next.cols);
    }
  }
  return y;
}

double DqnAgent::update(const std::vector<DqnTransition>& batch) {
  const std::vector<double> y = td_targets(batch);
  Matrix x(batch.size(), qnet_.input_dim());
  for (std::size_t r = 0; r < batch.size(); ++r) {
    if (batch[r].state.size() != qnet_.input_dim()) throw ShapeError("transition state has the wrong length");
    if (batch[r].action >= qnet_.output_dim()) throw ShapeError("transition action index out of range");
    std::copy(batch[r].state.begin(), batch[r].state.end(), x.row(r));
  }
  // Untaken actions regress onto their own current value, so only Q(s, a) moves.
  Matrix targets = qnet_.forward_batch(x);
  for (std::size_t r = 0; r < batch.size(); ++r) targets(r, batch[r].action) = y[r];
  const double loss = train_step(qnet_, x, targets, TrainConfig{cfg_.alpha, batch.size()});
  ++updates_;
  if (updates_ % static_cast<std::size_t>(cfg_.sync_interval) == 0) sync_target();
  return loss;
}

void DqnAgent::sync_target() { target_ = qnet_; }

void DqnAgent::observe(DqnTransition t) {
  replay_.push(std::move(t));
  if (replay_.size() < std::max(cfg_.warmup, std::size_t{1})) return;
  update(replay_.sample(cfg_.batch_size, rng_));
}

void DqnAgent::end_episode() { epsilon_ = std::max(cfg_.epsilon_min, epsilon_ * cfg_.epsilon_decay); }

}  // namespace iil
