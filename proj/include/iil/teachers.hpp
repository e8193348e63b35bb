#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <mutex>
#include <vector>

#include "iil/envs.hpp"
#include "iil/feedback.hpp"

namespace iil {

struct OracleConfig {
  double p_feedback = 0.6;
  double p_error = 0.0;
  double threshold = -1.0;   // < 0 selects the environment default
  bool two_level = false;    // Reacher: fine signals near the target and HOLD when close
  double fine_radius = 0.03; // Reacher distance below which fine signals are used
  double hold_radius = 0.004; // two-level Reacher: inside this, only HOLD (replaces threshold)
  double hold_motion = 0.002;

  void validate() const;
};

double default_oracle_threshold(EnvKind env, AgentMode mode);

// ---- Reference controllers -------------------------------------------------

/// Cart-Pole: push right when a fixed linear feedback of the state is positive.
std::size_t cartpole_reference(const StateVec& s);

/// Reacher: joint-rate direction along J^T (target - effector), scaled so the
/// larger component is 1.
ActionVec reacher_reference(const StateVec& s);

struct LanderTargets {
  double vertical_velocity = 0.0;
  double angular_velocity = 0.0;
};

/// Lander: desired vertical speed (slower near the ground) and an angular
/// velocity steering the attitude towards a position/velocity dependent tilt.
LanderTargets lander_targets(const StateVec& s);
ActionVec lander_continuous_reference(const StateVec& s);
std::size_t lander_discrete_reference(const StateVec& s);

/// Scripted teacher: compares the proposal with the reference controller and,
/// when they disagree, emits the corrective signal with probability
/// p_feedback; each emitted signal is flipped with probability p_error.
Feedback oracle_feedback(EnvKind env, AgentMode mode, const StateVec& state, const ActionVec& proposal,
                         const OracleConfig& cfg, Rng& rng);

// ---- Feedback sources ------------------------------------------------------

class Teacher {
 public:
  virtual ~Teacher() = default;
  /// Signal for the current step. Polled at most once per environment step.
  virtual Feedback poll(const StateVec& state, const ActionVec& proposal) = 0;
  /// Called before each teaching episode.
  virtual void episode_starting(int /*episode*/) {}
  /// Blocks until the source can deliver signals again; false on timeout.
  virtual bool wait_until_available(std::chrono::milliseconds /*timeout*/) { return true; }
  virtual bool is_human() const { return false; }
};

class OracleTeacher final : public Teacher {
 public:
  OracleTeacher(EnvKind env, AgentMode mode, OracleConfig cfg, std::uint64_t seed);
  Feedback poll(const StateVec& state, const ActionVec& proposal) override;

  const OracleConfig& config() const { return cfg_; }

 private:
  EnvKind env_;
  AgentMode mode_;
  OracleConfig cfg_;
  Rng rng_;
};

/// Keyboard-driven source. Key events arrive from another thread; a press
/// asserts its signal on every poll until released. A press that is released
/// before any poll saw it is still reported once.
class HumanTeacher final : public Teacher {
 public:
  Feedback poll(const StateVec& state, const ActionVec& proposal) override;
  Feedback poll();
  void episode_starting(int episode) override;
  bool wait_until_available(std::chrono::milliseconds timeout) override;
  bool is_human() const override { return true; }

  void push_key(FeedbackSignal signal, bool pressed);
  void set_connected(bool connected);
  bool connected() const;
  std::uint64_t events_received() const;

  /// Invoked (outside the lock) at the start of every episode; the bridge
  /// uses it to remind the demonstrator and wait for an acknowledgement.
  void set_episode_hook(std::function<void(int)> hook);

 private:
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::deque<std::pair<FeedbackSignal, bool>> events_;
  Feedback held_;
  bool connected_ = false;
  std::uint64_t received_ = 0;
  std::function<void(int)> hook_;
};

}  // namespace iil
