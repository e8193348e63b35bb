#pragma once

#include <array>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "iil/common.hpp"

namespace iil {

enum class EnvKind { cartpole, reacher, lander_discrete, lander_continuous };

std::string to_string(EnvKind kind);
EnvKind env_kind_from_string(const std::string& name);

enum class ActionKind { discrete, continuous };

std::string to_string(ActionKind kind);

using StateVec = std::vector<double>;

/// Discrete actions are one-hot rows; continuous actions live in [-1, 1] per dimension.
struct ActionVec {
  ActionKind kind = ActionKind::continuous;
  std::vector<double> values;

  static ActionVec one_hot(std::size_t n, std::size_t index);
  static ActionVec continuous(std::vector<double> v);
  static ActionVec zeros(ActionKind kind, std::size_t n);

  /// Index of the largest entry, lowest index on ties.
  std::size_t argmax() const;
  /// Clips continuous entries into [-1, 1]; no-op for discrete actions.
  ActionVec clipped() const;
  bool operator==(const ActionVec&) const = default;
};

/// Initial-state distribution. Uniform mode perturbs the environment's nominal
/// start by independent draws on [-half_width, +half_width]; fixed mode uses
/// the given state verbatim.
struct InitSpec {
  enum class Mode { uniform, fixed };
  Mode mode = Mode::uniform;
  double half_width = 0.05;
  std::vector<double> fixed_values;

  static InitSpec uniform(double half_width);
  static InitSpec fixed(std::vector<double> values);
};

enum class DoneReason { none, pole_fell, out_of_bounds, crashed, landed, time_limit };

std::string to_string(DoneReason reason);

struct StepResult {
  StateVec next_state;
  double reward = 0.0;
  bool done = false;
  DoneReason done_reason = DoneReason::none;
};

/// One seedable simulation instance. `advance` is the pure transition shared by
/// `step` and `true_transition`; the base class adds episode bookkeeping.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual EnvKind kind() const = 0;
  virtual std::size_t state_dim() const = 0;
  virtual std::size_t action_dim() const = 0;
  virtual ActionKind action_kind() const = 0;
  virtual int max_steps() const = 0;
  virtual InitSpec default_init() const = 0;
  virtual std::unique_ptr<Environment> clone() const = 0;

  /// Pure successor function (no step counter, no time limit).
  virtual StepResult advance(const StateVec& state, const ActionVec& action) const = 0;

  StateVec reset(const InitSpec& spec, Rng& rng);
  StepResult step(const ActionVec& action);
  StateVec true_transition(const StateVec& state, const ActionVec& action) const;

  const StateVec& state() const { return state_; }
  int steps_taken() const { return steps_; }

  void check_action(const ActionVec& action) const;
  void check_state(const StateVec& state) const;

 protected:
  virtual StateVec sample_initial(const InitSpec& spec, Rng& rng) const = 0;

 private:
  StateVec state_;
  int steps_ = 0;
  bool done_ = false;
};

std::unique_ptr<Environment> make_env(EnvKind kind);

// ---- Cart-Pole -------------------------------------------------------------
// State: [cart position, cart velocity, pole angle (rad), pole tip velocity
// (angular rate, rad/s)]. Actions: one-hot {push left, push right}.
struct CartPoleParams {
  double gravity = 9.8;
  double cart_mass = 1.0;
  double pole_mass = 0.1;
  double half_pole_length = 0.5;
  double force_mag = 10.0;
  double dt = 0.02;
  double angle_limit = 12.0 * 3.14159265358979323846 / 180.0;
  double position_limit = 2.4;
  int max_steps = 200;
};

class CartPole final : public Environment {
 public:
  explicit CartPole(CartPoleParams p = {}) : p_(p) {}
  EnvKind kind() const override { return EnvKind::cartpole; }
  std::size_t state_dim() const override { return 4; }
  std::size_t action_dim() const override { return 2; }
  ActionKind action_kind() const override { return ActionKind::discrete; }
  int max_steps() const override { return p_.max_steps; }
  InitSpec default_init() const override { return InitSpec::uniform(0.05); }
  std::unique_ptr<Environment> clone() const override { return std::make_unique<CartPole>(*this); }
  StepResult advance(const StateVec& state, const ActionVec& action) const override;
  const CartPoleParams& params() const { return p_; }

 protected:
  StateVec sample_initial(const InitSpec& spec, Rng& rng) const override;

 private:
  CartPoleParams p_;
};

// ---- Reacher ---------------------------------------------------------------
// Kinematic two-link arm (no inertia, links 0.1 and 0.11): joint rates are
// action * max_joint_rate.
// Observation layout follows the 11-slot reacher convention with the
// target-related slots {4, 5, 8, 9, 10} held at zero.
struct ReacherParams {
  double max_joint_rate = 1.0;
  double dt = 0.05;
  double target_x = 0.1;
  double target_y = 0.1;
  // nominal start: upper arm 45 degrees below the x axis, elbow at a right angle
  double start_theta1 = -0.25 * 3.14159265358979323846;
  double start_theta2 = 0.5 * 3.14159265358979323846;
  int max_steps = 50;
};

inline constexpr std::array<std::size_t, 5> kReacherZeroedIndices{4, 5, 8, 9, 10};
inline constexpr double kReacherLink1 = 0.1;
inline constexpr double kReacherLink2 = 0.11;

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

/// End-effector position from a reacher observation (joint angles via atan2).
Point2 reacher_end_effector(const StateVec& state);

/// Joint angles (theta1, theta2) from a reacher observation.
std::pair<double, double> reacher_joint_angles(const StateVec& state);

class Reacher final : public Environment {
 public:
  explicit Reacher(ReacherParams p = {}) : p_(p) {}
  EnvKind kind() const override { return EnvKind::reacher; }
  std::size_t state_dim() const override { return 11; }
  std::size_t action_dim() const override { return 2; }
  ActionKind action_kind() const override { return ActionKind::continuous; }
  int max_steps() const override { return p_.max_steps; }
  InitSpec default_init() const override { return InitSpec::uniform(0.1); }
  std::unique_ptr<Environment> clone() const override { return std::make_unique<Reacher>(*this); }
  StepResult advance(const StateVec& state, const ActionVec& action) const override;

  const ReacherParams& params() const { return p_; }
  Point2 target() const { return {p_.target_x, p_.target_y}; }
  double distance_to_target(const StateVec& state) const;
  /// Observation for given joint angles and end-effector velocity.
  StateVec make_state(double theta1, double theta2, double vx = 0.0, double vy = 0.0) const;

 protected:
  StateVec sample_initial(const InitSpec& spec, Rng& rng) const override;

 private:
  ReacherParams p_;
};

// ---- Lander ----------------------------------------------------------------
// Planar rigid body. State: [x, y, vx, vy, angle, angular velocity, leg1
// contact, leg2 contact]; angle is counter-clockwise positive. Discrete
// actions: {nothing, left engine, main engine, right engine}. Continuous:
// [main throttle, side throttle] with the usual dead zones.
struct LanderParams {
  double gravity = 1.6;
  double main_accel = 4.0;    // body-axis acceleration at full main throttle
  double side_accel = 0.6;    // lateral acceleration at full side throttle
  double side_torque = 3.0;   // angular acceleration at full side throttle
  double dt = 0.05;
  double leg_offset = 0.1;    // legs sit +-leg_offset along the body x-axis
  double start_height = 1.4;
  double pad_half_width = 0.2;
  double safe_vertical_speed = 0.8;
  double safe_horizontal_speed = 0.6;
  double safe_angle = 0.4;
  double x_limit = 1.5;
  double y_limit = 2.2;
  double main_fuel_cost = 0.3;
  double side_fuel_cost = 0.03;
  double landing_bonus = 100.0;
  double crash_penalty = 100.0;
  int max_steps = 400;
};

struct EngineCommand {
  double main = 0.0;  // throttle in [0, 1]; 0 when the engine is off
  double side = 0.0;  // signed: < 0 left engine, > 0 right engine, magnitude in [0, 1]
};

class Lander final : public Environment {
 public:
  explicit Lander(bool continuous, LanderParams p = {}) : continuous_(continuous), p_(p) {}
  EnvKind kind() const override { return continuous_ ? EnvKind::lander_continuous : EnvKind::lander_discrete; }
  std::size_t state_dim() const override { return 8; }
  std::size_t action_dim() const override { return continuous_ ? 2 : 4; }
  ActionKind action_kind() const override { return continuous_ ? ActionKind::continuous : ActionKind::discrete; }
  int max_steps() const override { return p_.max_steps; }
  InitSpec default_init() const override { return InitSpec::uniform(0.3); }
  std::unique_ptr<Environment> clone() const override { return std::make_unique<Lander>(*this); }
  StepResult advance(const StateVec& state, const ActionVec& action) const override;

  const LanderParams& params() const { return p_; }
  EngineCommand decode(const ActionVec& action) const;
  /// Shaping potential; the per-step reward is its difference minus fuel.
  double potential(const StateVec& state) const;
  StateVec nominal_start() const;

 protected:
  StateVec sample_initial(const InitSpec& spec, Rng& rng) const override;

 private:
  bool continuous_;
  LanderParams p_;
};

}  // namespace iil
