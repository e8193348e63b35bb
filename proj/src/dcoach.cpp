#include "iil/dcoach.hpp"

namespace iil {

DcoachConfig DcoachConfig::defaults(EnvKind env) {
  DcoachConfig c;
  if (env == EnvKind::cartpole || env == EnvKind::reacher) {
    c.b = 1;
    c.train.learning_rate = 0.05;
  }
  if (env == EnvKind::lander_discrete || env == EnvKind::lander_continuous) {
    c.immediate_reps = c.batch_reps = 5;
    c.demo_capacity = 4000;
  }
  c.e_fine = 0.2 * c.e;
  return c;
}

void DcoachConfig::validate() const {
  if (!(e > 0.0) || !(e_fine > 0.0)) throw ConfigError("e must be positive");
  if (b < 1) throw ConfigError("b must be at least 1");
  if (immediate_reps < 0 || batch_reps < 0) throw ConfigError("repetition counts must be >= 0");
  if (sigma < 0.0) throw ConfigError("sigma must be nonnegative");
  train.validate();
}

nlohmann::json to_json(const DcoachConfig& c) {
  return nlohmann::json{{"e", c.e},
                        {"e_fine", c.e_fine},
                        {"b", c.b},
                        {"immediate_reps", c.immediate_reps},
                        {"batch_reps", c.batch_reps},
                        {"sigma", c.sigma},
                        {"lr", c.train.learning_rate},
                        {"batch", c.train.batch_size},
                        {"demo_capacity", c.demo_capacity}};
}

DcoachConfig dcoach_config_from_json(const nlohmann::json& d) {
  DcoachConfig c;
  c.e = d.at("e").get<double>();
  c.e_fine = d.at("e_fine").get<double>();
  c.b = d.at("b").get<int>();
  c.immediate_reps = d.at("immediate_reps").get<int>();
  c.batch_reps = d.at("batch_reps").get<int>();
  c.sigma = d.at("sigma").get<double>();
  c.train = {d.at("lr").get<double>(), d.at("batch").get<std::size_t>()};
  c.demo_capacity = d.at("demo_capacity").get<std::size_t>();
  return c;
}

ActionVec correct_action(EnvKind env, const ActionVec& action, const Feedback& raw, double e, double e_fine) {
  const Feedback fb = applicable_feedback(env, raw);
  if (fb.empty()) throw NoCorrection("no applicable corrective signal");
  if (action.values.size() != action_dim_of(env)) throw ShapeError("action has the wrong length");
  auto step_of = [&](FeedbackSignal s) { return is_fine(s) ? e_fine : e; };
  const FeedbackSignal latest = fb.latest();

  switch (env) {
    case EnvKind::cartpole:
      return ActionVec::one_hot(2, coarse(fb.horizontal()) == FeedbackSignal::left ? 0 : 1);
    case EnvKind::lander_discrete:
      switch (coarse(latest)) {
        case FeedbackSignal::up: return ActionVec::one_hot(4, 2);
        case FeedbackSignal::left: return ActionVec::one_hot(4, 1);
        case FeedbackSignal::right: return ActionVec::one_hot(4, 3);
        default: return ActionVec::one_hot(4, 0);
      }
    case EnvKind::reacher: {
      if (latest == FeedbackSignal::hold) return *zero_action(env);
      std::vector<double> a = action.values;
      const double step = step_of(latest);
      switch (coarse(latest)) {
        case FeedbackSignal::left: a = {a[0] + step, 0.0}; break;
        case FeedbackSignal::right: a = {a[0] - step, 0.0}; break;
        case FeedbackSignal::up: a = {0.0, a[1] + step}; break;
        case FeedbackSignal::down: a = {0.0, a[1] - step}; break;
        default: break;
      }
      return ActionVec::continuous(std::move(a)).clipped();
    }
    case EnvKind::lander_continuous: {
      if (latest == FeedbackSignal::hold || latest == FeedbackSignal::do_nothing) return *zero_action(env);
      std::vector<double> a = action.values;
      const FeedbackSignal v = fb.vertical();
      const FeedbackSignal h = fb.horizontal();
      if (v != FeedbackSignal::null) a[0] += coarse(v) == FeedbackSignal::up ? step_of(v) : -step_of(v);
      if (h != FeedbackSignal::null) a[1] += coarse(h) == FeedbackSignal::left ? -step_of(h) : step_of(h);
      return ActionVec::continuous(std::move(a)).clipped();
    }
  }
  throw NoCorrection("unknown environment");
}

DcoachAgent::DcoachAgent(EnvKind env, DcoachConfig cfg, std::uint64_t seed)
    : env_(env), cfg_(cfg), policy_(policy_layer_sizes(env), policy_head(env), seed), demo_(cfg.demo_capacity),
      rng_(seed + 1) {
  cfg_.validate();
}

ActionVec DcoachAgent::propose(const StateVec& state) {
  ActionVec mean = action_from_output(action_kind_of(env_), policy_.forward(state));
  return cfg_.sigma > 0.0 ? sample_gaussian_action(mean, cfg_.sigma, rng_) : mean;
}

ActionVec DcoachAgent::step(const StateVec& state, const Feedback& fb, long step_index) {
  return step(state, fb, step_index, propose(state));
}

ActionVec DcoachAgent::step(const StateVec& state, const Feedback& raw, long step_index, const ActionVec& proposal) {
  last_corrected_ = false;
  ActionVec executed = proposal;
  const Feedback fb = applicable_feedback(env_, raw);
  if (!fb.empty()) {
    ActionVec target = correct_action(env_, proposal, fb, cfg_.e, cfg_.e_fine);
    for (int k = 0; k < cfg_.immediate_reps; ++k) update_on_pair(policy_, state, target, cfg_.train);
    for (int k = 0; k < cfg_.batch_reps; ++k) update_on_batch(policy_, demo_, cfg_.train, rng_);
    demo_.push(DemoPair{state, target});
    executed = std::move(target);
    last_corrected_ = true;
  }
  if (step_index % cfg_.b == 0)
    for (int k = 0; k < cfg_.batch_reps; ++k) update_on_batch(policy_, demo_, cfg_.train, rng_);
  return executed;
}

}  // namespace iil
