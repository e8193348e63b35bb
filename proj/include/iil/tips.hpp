#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include <json.hpp>

#include "iil/agent.hpp"
#include "iil/buffers.hpp"
#include "iil/envs.hpp"
#include "iil/feedback.hpp"
#include "iil/nn.hpp"
#include "iil/policy.hpp"

namespace iil {

// ---- Forward dynamics model ------------------------------------------------

/// Learned one-step model s' = f(s, a). Internally the network regresses the
/// standardised state change; `predict` always returns full next states.
/// Reacher inputs and outputs have the target slots forced to zero.
class Fdm {
 public:
  Fdm() = default;
  Fdm(EnvKind env, std::uint64_t seed);

  static std::vector<std::size_t> layer_sizes(EnvKind env);

  EnvKind env() const { return env_; }
  const Mlp& net() const { return net_; }
  Mlp& net() { return net_; }
  bool fitted() const { return fitted_; }
  void mark_fitted() { fitted_ = true; }

  /// Sets the standardisation from a transition sample.
  void fit_normalizer(const std::vector<Transition>& data);

  StateVec predict(const StateVec& state, const ActionVec& action) const;
  /// One prediction per candidate action, all from the same state.
  std::vector<StateVec> predict_candidates(const StateVec& state, const std::vector<ActionVec>& actions) const;

  /// One SGD step on a batch; returns the pre-step loss (standardised units).
  double train_batch(const std::vector<Transition>& batch, const TrainConfig& cfg);

  nlohmann::json to_json() const;
  static Fdm from_json(const nlohmann::json& doc);

 private:
  StateVec masked(const StateVec& s) const;
  void build_inputs(const std::vector<StateVec>& states, const std::vector<const ActionVec*>& actions,
                    Matrix& x) const;

  EnvKind env_ = EnvKind::cartpole;
  Mlp net_;
  std::vector<double> in_mean_, in_scale_, out_mean_, out_scale_;
  bool fitted_ = false;
};

/// Uniform random action for the environment.
ActionVec random_action(EnvKind env, Rng& rng);

struct PretrainResult {
  Fdm fdm;
  BoundedBuffer<Transition> experience;
};

/// Collects `n_samples` random-policy transitions, then trains a fresh model
/// for `epochs` shuffled passes.
PretrainResult pretrain_fdm(EnvKind env, std::size_t n_samples, int epochs, const TrainConfig& cfg, Rng& rng,
                            std::size_t experience_capacity = 0);

/// Shuffled passes over a transition set; returns the mean loss of the last pass.
double train_fdm_passes(Fdm& fdm, const std::vector<Transition>& data, int passes, const TrainConfig& cfg, Rng& rng);

// ---- State correction, action encoding, internal cost ---------------------

enum class CorrectedDim { tip_velocity_x, tip_velocity_y, effector_x, effector_y, vertical_velocity, angular_velocity };

/// Desired state over the environment's corrected dimensions. `scored` marks
/// which entries the internal cost compares; unscored entries carry the value
/// the correction pinned them to (e.g. a zeroed angular velocity).
struct DesiredState {
  std::vector<CorrectedDim> dims;
  std::vector<double> values;
  std::vector<bool> scored;
};

/// Cart-Pole tip-velocity split as done by the original teaching code: the
/// angle entry is treated as degrees and the horizontal part uses sine.
std::pair<double, double> cartpole_tip_velocity(const StateVec& state);

double project(const StateVec& state, CorrectedDim dim);

DesiredState state_correction(EnvKind env, const StateVec& state, const Feedback& fb, double e_coarse, double e_fine);

double internal_cost(EnvKind env, const StateVec& predicted, const DesiredState& desired);

struct EncodingResult {
  ActionVec action;
  std::size_t index = 0;
  std::vector<ActionVec> candidates;
  std::vector<double> costs;
};

/// Samples candidates, predicts their outcomes and returns the lowest-cost one
/// (lowest index on ties). With `exhaustive` on a discrete space every action
/// is scored exactly once.
EncodingResult encode_action(const Fdm& fdm, const StateVec& state, const DesiredState& desired,
                             int ifdm_queries, bool exhaustive, Rng& rng);

// ---- Agent -----------------------------------------------------------------

struct TipsConfig {
  double e_coarse = 0.5;
  double e_fine = 0.1;
  int b = 10;
  int ifdm_queries = 10;
  double sigma = 0.0;
  bool exhaustive = false;
  int immediate_reps = 1;
  int batch_reps = 1;
  int fdm_refit_passes = 10;
  std::size_t fdm_refit_max_batches = 0;  // 0 = no cap on batches per refit
  TrainConfig policy_train{3e-3, 32};
  TrainConfig fdm_train{1e-3, 32};
  std::size_t demo_capacity = 1000;
  std::size_t experience_capacity = 10000;

  static TipsConfig defaults(EnvKind env);
  void validate() const;
};

nlohmann::json to_json(const TipsConfig& c);
TipsConfig tips_config_from_json(const nlohmann::json& doc);

class TipsAgent final : public Agent {
 public:
  TipsAgent(EnvKind env, TipsConfig cfg, std::uint64_t seed);

  /// Installs a fitted model; its training data seeds the experience buffer.
  void set_fdm(Fdm fdm, const BoundedBuffer<Transition>* pretrain_data = nullptr);

  /// Policy action for `state`, with Gaussian exploration when sigma > 0.
  ActionVec propose(const StateVec& state) override;
  ActionVec step(const StateVec& state, const Feedback& fb, long step_index, const ActionVec& proposal) override;
  ActionVec step(const StateVec& state, const Feedback& fb, long step_index);

  void record_transition(const StateVec& state, const ActionVec& action, const StateVec& next_state) override;
  /// Refits the model from the experience buffer.
  void end_episode() override;

  bool last_step_corrected() const override { return last_corrected_; }
  FrozenPolicy frozen() const override { return FrozenPolicy{policy_, action_kind_of(env_), cfg_.sigma}; }

  EnvKind env() const override { return env_; }
  AgentMode mode() const override { return AgentMode::state_space; }
  const TipsConfig& config() const { return cfg_; }
  TipsConfig& config() { return cfg_; }
  const Mlp& policy() const override { return policy_; }
  Mlp& policy() { return policy_; }
  const Fdm& fdm() const { return fdm_; }
  const BoundedBuffer<DemoPair>& demo_buffer() const { return demo_; }
  BoundedBuffer<DemoPair>& demo_buffer() { return demo_; }
  const BoundedBuffer<Transition>& experience_buffer() const { return exp_; }
  BoundedBuffer<Transition>& experience_buffer() { return exp_; }
  Rng& rng() { return rng_; }

 private:
  EnvKind env_;
  TipsConfig cfg_;
  Mlp policy_;
  Fdm fdm_;
  BoundedBuffer<DemoPair> demo_;
  BoundedBuffer<Transition> exp_;
  Rng rng_;
  bool last_corrected_ = false;
};

}  // namespace iil
