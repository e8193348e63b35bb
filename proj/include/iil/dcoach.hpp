#pragma once

#include <cstdint>

#include <json.hpp>

#include "iil/agent.hpp"
#include "iil/buffers.hpp"

namespace iil {

struct DcoachConfig {
  double e = 0.5;
  double e_fine = 0.1;
  int b = 10;
  int immediate_reps = 1;
  int batch_reps = 1;
  double sigma = 0.0;
  TrainConfig train{3e-3, 32};
  std::size_t demo_capacity = 1000;

  static DcoachConfig defaults(EnvKind env);
  void validate() const;
};

nlohmann::json to_json(const DcoachConfig& c);
DcoachConfig dcoach_config_from_json(const nlohmann::json& doc);

/// Target action for a corrective signal. Cart-Pole signals pick the one-hot
/// push; Reacher moves one joint by e and zeroes the other; continuous lander
/// shifts main (UP/DOWN) and side (LEFT lowers, RIGHT raises) throttle and may
/// combine both; discrete lander keys select engines directly. HOLD and
/// DO_NOTHING give the stop action. Continuous results are clipped.
ActionVec correct_action(EnvKind env, const ActionVec& action, const Feedback& fb, double e, double e_fine);

class DcoachAgent final : public Agent {
 public:
  DcoachAgent(EnvKind env, DcoachConfig cfg, std::uint64_t seed);

  EnvKind env() const override { return env_; }
  AgentMode mode() const override { return AgentMode::action_space; }
  ActionVec propose(const StateVec& state) override;
  ActionVec step(const StateVec& state, const Feedback& fb, long step_index, const ActionVec& proposal) override;
  ActionVec step(const StateVec& state, const Feedback& fb, long step_index);
  bool last_step_corrected() const override { return last_corrected_; }
  FrozenPolicy frozen() const override { return FrozenPolicy{policy_, action_kind_of(env_), cfg_.sigma}; }

  const DcoachConfig& config() const { return cfg_; }
  DcoachConfig& config() { return cfg_; }
  const Mlp& policy() const override { return policy_; }
  Mlp& policy() { return policy_; }
  const BoundedBuffer<DemoPair>& demo_buffer() const { return demo_; }
  BoundedBuffer<DemoPair>& demo_buffer() { return demo_; }
  Rng& rng() { return rng_; }

 private:
  EnvKind env_;
  DcoachConfig cfg_;
  Mlp policy_;
  BoundedBuffer<DemoPair> demo_;
  Rng rng_;
  bool last_corrected_ = false;
};

}  // namespace iil
