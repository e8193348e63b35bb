#include <cmath>

#include "iil/envs.hpp"

namespace iil {

StateVec CartPole::sample_initial(const InitSpec& spec, Rng& rng) const {
  std::uniform_real_distribution<double> d(-spec.half_width, spec.half_width);
  StateVec s(4);
  for (double& v : s) v = spec.half_width > 0.0 ? d(rng) : 0.0;
  return s;
}

StepResult CartPole::advance(const StateVec& state, const ActionVec& action) const {
  check_action(action);
  check_state(state);
  const double x = state[0];
  const double x_dot = state[1];
  const double theta = state[2];
  const double theta_dot = state[3];

  const double force = action.argmax() == 1 ? p_.force_mag : -p_.force_mag;
  const double total_mass = p_.cart_mass + p_.pole_mass;
  const double pole_mass_length = p_.pole_mass * p_.half_pole_length;
  const double cos_t = std::cos(theta);
  const double sin_t = std::sin(theta);

  const double temp = (force + pole_mass_length * theta_dot * theta_dot * sin_t) / total_mass;
  const double theta_acc = (p_.gravity * sin_t - cos_t * temp) /
                           (p_.half_pole_length * (4.0 / 3.0 - p_.pole_mass * cos_t * cos_t / total_mass));
  const double x_acc = temp - pole_mass_length * theta_acc * cos_t / total_mass;

  StepResult r;
  r.next_state = {x + p_.dt * x_dot, x_dot + p_.dt * x_acc, theta + p_.dt * theta_dot, theta_dot + p_.dt * theta_acc};
  r.reward = 1.0;
  const auto& n = r.next_state;
  if (std::abs(n[2]) > p_.angle_limit) {
    r.done = true;
    r.done_reason = DoneReason::pole_fell;
  } else if (std::abs(n[0]) > p_.position_limit) {
    r.done = true;
    r.done_reason = DoneReason::out_of_bounds;
  }
  return r;
}

}  // namespace iil
