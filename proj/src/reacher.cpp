#include <cmath>

#include "iil/envs.hpp"

namespace iil {

std::pair<double, double> reacher_joint_angles(const StateVec& state) {
  if (state.size() < 4) throw ShapeError("reacher state needs at least 4 entries");
  if (state[0] == 0.0 && state[2] == 0.0) throw InvalidState("first joint has a degenerate (cos, sin) pair");
  if (state[1] == 0.0 && state[3] == 0.0) throw InvalidState("second joint has a degenerate (cos, sin) pair");
  return {std::atan2(state[2], state[0]), std::atan2(state[3], state[1])};
}

Point2 reacher_end_effector(const StateVec& state) {
  const auto [t1, t2] = reacher_joint_angles(state);
  return {kReacherLink1 * std::cos(t1) + kReacherLink2 * std::cos(t1 + t2), kReacherLink1 * std::sin(t1) + kReacherLink2 * std::sin(t1 + t2)};
}

StateVec Reacher::make_state(double theta1, double theta2, double vx, double vy) const {
  StateVec s(11, 0.0);
  s[0] = std::cos(theta1);
  s[1] = std::cos(theta2);
  s[2] = std::sin(theta1);
  s[3] = std::sin(theta2);
  s[6] = vx;
  s[7] = vy;
  return s;
}

double Reacher::distance_to_target(const StateVec& state) const {
  const Point2 p = reacher_end_effector(state);
  return std::hypot(p.x - p_.target_x, p.y - p_.target_y);
}

StateVec Reacher::sample_initial(const InitSpec& spec, Rng& rng) const {
  std::uniform_real_distribution<double> d(-spec.half_width, spec.half_width);
  const double t1 = p_.start_theta1 + (spec.half_width > 0.0 ? d(rng) : 0.0);
  const double t2 = p_.start_theta2 + (spec.half_width > 0.0 ? d(rng) : 0.0);
  return make_state(t1, t2);
}

StepResult Reacher::advance(const StateVec& state, const ActionVec& action) const {
  check_action(action);
  check_state(state);
  const ActionVec a = action.clipped();
  const auto [t1, t2] = reacher_joint_angles(state);
  const Point2 before = reacher_end_effector(state);
  const double n1 = t1 + a.values[0] * p_.max_joint_rate * p_.dt;
  const double n2 = t2 + a.values[1] * p_.max_joint_rate * p_.dt;
  StateVec next = make_state(n1, n2);
  const Point2 after = reacher_end_effector(next);
  next[6] = (after.x - before.x) / p_.dt;
  next[7] = (after.y - before.y) / p_.dt;

  StepResult r;
  r.next_state = std::move(next);
  r.reward = -std::hypot(after.x - p_.target_x, after.y - p_.target_y);
  return r;
}

}  // namespace iil
