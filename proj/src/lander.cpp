#include <cmath>

#include "iil/envs.hpp"

namespace iil {

StateVec Lander::nominal_start() const { return {0.0, p_.start_height, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0}; }

StateVec Lander::sample_initial(const InitSpec& spec, Rng& rng) const {
  StateVec s = nominal_start();
  if (spec.half_width > 0.0) {
    std::uniform_real_distribution<double> d(-spec.half_width, spec.half_width);
    // x, vx, vy and angular velocity are perturbed; height and attitude are not.
    for (std::size_t i : {0UL, 2UL, 3UL, 5UL}) s[i] += d(rng);
  }
  return s;
}

EngineCommand Lander::decode(const ActionVec& action) const {
  check_action(action);
  EngineCommand c;
  if (!continuous_) {
    switch (action.argmax()) {
      case 1: c.side = -1.0; break;
      case 2: c.main = 1.0; break;
      case 3: c.side = 1.0; break;
      default: break;
    }
    return c;
  }
  const ActionVec a = action.clipped();
  if (a.values[0] > 0.0) c.main = 0.5 + 0.5 * a.values[0];
  if (std::abs(a.values[1]) > 0.5) c.side = a.values[1];
  return c;
}

double Lander::potential(const StateVec& s) const {
  return -100.0 * std::hypot(s[0], s[1]) - 100.0 * std::hypot(s[2], s[3]) - 100.0 * std::abs(s[4]) +
         10.0 * (s[6] + s[7]);
}

StepResult Lander::advance(const StateVec& state, const ActionVec& action) const {
  check_state(state);
  const EngineCommand cmd = decode(action);

  const double theta = state[4];
  const double ux = -std::sin(theta), uy = std::cos(theta);  // body up axis
  const double rx = std::cos(theta), ry = std::sin(theta);   // body right axis
  // The right engine pushes the hull towards body -x and spins it
  // counter-clockwise; the left engine does the opposite.
  const double lateral = -cmd.side * p_.side_accel;
  const double ax = ux * cmd.main * p_.main_accel + rx * lateral;
  const double ay = -p_.gravity + uy * cmd.main * p_.main_accel + ry * lateral;
  const double alpha = cmd.side * p_.side_torque;

  StateVec n(8, 0.0);
  n[2] = state[2] + ax * p_.dt;
  n[3] = state[3] + ay * p_.dt;
  n[0] = state[0] + n[2] * p_.dt;
  n[1] = state[1] + n[3] * p_.dt;
  n[5] = state[5] + alpha * p_.dt;
  n[4] = theta + n[5] * p_.dt;
  const double leg1_y = n[1] - p_.leg_offset * std::sin(n[4]);
  const double leg2_y = n[1] + p_.leg_offset * std::sin(n[4]);
  n[6] = leg1_y <= 0.0 ? 1.0 : 0.0;
  n[7] = leg2_y <= 0.0 ? 1.0 : 0.0;

  double fuel = 0.0;
  if (cmd.main > 0.0) fuel += p_.main_fuel_cost;
  if (cmd.side != 0.0) fuel += p_.side_fuel_cost;

  StepResult r;
  const double prev_potential = potential(state);
  if (n[6] > 0.0 || n[7] > 0.0) {
    const bool soft = std::abs(n[3]) <= p_.safe_vertical_speed && std::abs(n[2]) <= p_.safe_horizontal_speed &&
                      std::abs(n[4]) <= p_.safe_angle;
    r.done = true;
    if (soft) {
      // The hull settles on both legs.
      n = {n[0], 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 1.0};
      r.done_reason = DoneReason::landed;
      r.reward = potential(n) - prev_potential - fuel + p_.landing_bonus;
    } else {
      n[1] = std::max(n[1], 0.0);
      r.done_reason = DoneReason::crashed;
      r.reward = potential(n) - prev_potential - fuel - p_.crash_penalty;
    }
  } else if (std::abs(n[0]) > p_.x_limit || n[1] > p_.y_limit) {
    r.done = true;
    r.done_reason = DoneReason::out_of_bounds;
    r.reward = potential(n) - prev_potential - fuel - p_.crash_penalty;
  } else {
    r.reward = potential(n) - prev_potential - fuel;
  }
  r.next_state = std::move(n);
  return r;
}

}  // namespace iil
