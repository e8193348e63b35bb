#include "iil/envs.hpp"

#include <algorithm>

namespace iil {

std::string to_string(EnvKind kind) {
  switch (kind) {
    case EnvKind::cartpole: return "cartpole";
    case EnvKind::reacher: return "reacher";
    case EnvKind::lander_discrete: return "lander-discrete";
    case EnvKind::lander_continuous: return "lander-continuous";
  }
  return "unknown";
}

EnvKind env_kind_from_string(const std::string& name) {
  if (name == "cartpole") return EnvKind::cartpole;
  if (name == "reacher") return EnvKind::reacher;
  if (name == "lander-discrete") return EnvKind::lander_discrete;
  if (name == "lander-continuous") return EnvKind::lander_continuous;
  throw ConfigError("unknown environment '" + name + "'");
}

std::string to_string(ActionKind kind) { return kind == ActionKind::discrete ? "discrete" : "continuous"; }

std::string to_string(DoneReason reason) {
  switch (reason) {
    case DoneReason::none: return "none";
    case DoneReason::pole_fell: return "pole-fell";
    case DoneReason::out_of_bounds: return "out-of-bounds";
    case DoneReason::crashed: return "crashed";
    case DoneReason::landed: return "landed";
    case DoneReason::time_limit: return "time-limit";
  }
  return "none";
}

ActionVec ActionVec::one_hot(std::size_t n, std::size_t index) {
  if (index >= n) throw ShapeError("one-hot index out of range");
  ActionVec a{ActionKind::discrete, std::vector<double>(n, 0.0)};
  a.values[index] = 1.0;
  return a;
}

ActionVec ActionVec::continuous(std::vector<double> v) { return ActionVec{ActionKind::continuous, std::move(v)}; }

ActionVec ActionVec::zeros(ActionKind kind, std::size_t n) { return ActionVec{kind, std::vector<double>(n, 0.0)}; }

std::size_t ActionVec::argmax() const {
  if (values.empty()) throw ShapeError("argmax of an empty action");
  return static_cast<std::size_t>(std::max_element(values.begin(), values.end()) - values.begin());
}

ActionVec ActionVec::clipped() const {
  ActionVec out = *this;
  if (kind == ActionKind::continuous)
    for (double& v : out.values) v = std::clamp(v, -1.0, 1.0);
  return out;
}

InitSpec InitSpec::uniform(double half_width) {
  if (half_width < 0.0) throw ConfigError("half_width must be nonnegative");
  InitSpec s;
  s.mode = Mode::uniform;
  s.half_width = half_width;
  return s;
}

InitSpec InitSpec::fixed(std::vector<double> values) {
  InitSpec s;
  s.mode = Mode::fixed;
  s.half_width = 0.0;
  s.fixed_values = std::move(values);
  return s;
}

void Environment::check_action(const ActionVec& action) const {
  if (action.kind != action_kind())
    throw ActionKindError(to_string(kind()) + " expects a " + to_string(action_kind()) + " action");
  if (action.values.size() != action_dim()) throw ShapeError("action has the wrong length");
}

void Environment::check_state(const StateVec& state) const {
  if (state.size() != state_dim())
    throw ShapeError("state length " + std::to_string(state.size()) + " != " + std::to_string(state_dim()));
}

StateVec Environment::reset(const InitSpec& spec, Rng& rng) {
  if (spec.mode == InitSpec::Mode::fixed) {
    check_state(spec.fixed_values);
    state_ = spec.fixed_values;
  } else {
    state_ = sample_initial(spec, rng);
  }
  steps_ = 0;
  done_ = false;
  return state_;
}

StepResult Environment::step(const ActionVec& action) {
  check_action(action);
  StepResult r = advance(state_, action);
  ++steps_;
  if (!r.done && steps_ >= max_steps()) {
    r.done = true;
    r.done_reason = DoneReason::time_limit;
  }
  state_ = r.next_state;
  done_ = r.done;
  return r;
}

StateVec Environment::true_transition(const StateVec& state, const ActionVec& action) const {
  check_action(action);
  check_state(state);
  return advance(state, action).next_state;
}

std::unique_ptr<Environment> make_env(EnvKind kind) {
  switch (kind) {
    case EnvKind::cartpole: return std::make_unique<CartPole>();
    case EnvKind::reacher: return std::make_unique<Reacher>();
    case EnvKind::lander_discrete: return std::make_unique<Lander>(false);
    case EnvKind::lander_continuous: return std::make_unique<Lander>(true);
  }
  throw ConfigError("unknown environment kind");
}

}  // namespace iil
