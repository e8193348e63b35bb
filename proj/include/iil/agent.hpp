#pragma once

#include "iil/envs.hpp"
#include "iil/feedback.hpp"
#include "iil/policy.hpp"

namespace iil {

/// Interface shared by the feedback-driven learners.
class Agent {
 public:
  virtual ~Agent() = default;

  virtual EnvKind env() const = 0;
  virtual AgentMode mode() const = 0;
  /// Policy action for `state` (sampled when the policy is stochastic).
  virtual ActionVec propose(const StateVec& state) = 0;
  /// Applies one step of feedback and returns the action to execute.
  virtual ActionVec step(const StateVec& state, const Feedback& fb, long step_index, const ActionVec& proposal) = 0;
  virtual void record_transition(const StateVec&, const ActionVec&, const StateVec&) {}
  virtual void end_episode() {}
  virtual bool last_step_corrected() const = 0;
  virtual FrozenPolicy frozen() const = 0;
  virtual const Mlp& policy() const = 0;
};

}  // namespace iil
