#include "iil/tips.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace iil {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::vector<double> mean_scale(const Matrix& m, std::vector<double>& scale) {
  std::vector<double> mean(m.cols, 0.0);
  scale.assign(m.cols, 0.0);
  const double n = static_cast<double>(m.rows);
  for (std::size_t r = 0; r < m.rows; ++r)
    for (std::size_t c = 0; c < m.cols; ++c) mean[c] += m(r, c);
  for (double& v : mean) v /= n;
  for (std::size_t r = 0; r < m.rows; ++r)
    for (std::size_t c = 0; c < m.cols; ++c) scale[c] += (m(r, c) - mean[c]) * (m(r, c) - mean[c]);
  for (double& v : scale) {
    v = std::sqrt(v / n);
    if (v < 1e-8) v = 1.0;
  }
  return mean;
}

}  // namespace

// ---- Fdm -------------------------------------------------------------------

std::vector<std::size_t> Fdm::layer_sizes(EnvKind env) {
  const std::size_t s = state_dim_of(env);
  const std::size_t a = action_dim_of(env);
  const std::size_t hidden = env == EnvKind::cartpole ? 16 : 64;
  return {s + a, hidden, hidden, s};
}

Fdm::Fdm(EnvKind env, std::uint64_t seed) : env_(env), net_(layer_sizes(env), OutputHead::linear, seed) {
  const auto sizes = layer_sizes(env);
  in_mean_.assign(sizes.front(), 0.0);
  in_scale_.assign(sizes.front(), 1.0);
  out_mean_.assign(sizes.back(), 0.0);
  out_scale_.assign(sizes.back(), 1.0);
}

StateVec Fdm::masked(const StateVec& s) const {
  StateVec out = s;
  if (env_ == EnvKind::reacher)
    for (auto i : kReacherZeroedIndices) out[i] = 0.0;
  return out;
}

void Fdm::build_inputs(const std::vector<StateVec>& states, const std::vector<const ActionVec*>& actions,
                       Matrix& x) const {
  const std::size_t sd = state_dim_of(env_);
  const std::size_t ad = action_dim_of(env_);
  x = Matrix(states.size(), sd + ad);
  for (std::size_t r = 0; r < states.size(); ++r) {
    if (states[r].size() != sd || actions[r]->values.size() != ad) throw ShapeError("fdm input has the wrong shape");
    const StateVec s = masked(states[r]);
    double* row = x.row(r);
    for (std::size_t i = 0; i < sd; ++i) row[i] = (s[i] - in_mean_[i]) / in_scale_[i];
    for (std::size_t j = 0; j < ad; ++j) row[sd + j] = (actions[r]->values[j] - in_mean_[sd + j]) / in_scale_[sd + j];
  }
}

void Fdm::fit_normalizer(const std::vector<Transition>& data) {
  if (data.empty()) return;
  const std::size_t sd = state_dim_of(env_);
  const std::size_t ad = action_dim_of(env_);
  Matrix in(data.size(), sd + ad);
  Matrix delta(data.size(), sd);
  for (std::size_t r = 0; r < data.size(); ++r) {
    const StateVec s = masked(data[r].state);
    const StateVec n = masked(data[r].next_state);
    std::copy(s.begin(), s.end(), in.row(r));
    std::copy(data[r].action.values.begin(), data[r].action.values.end(), in.row(r) + sd);
    for (std::size_t i = 0; i < sd; ++i) delta(r, i) = n[i] - s[i];
  }
  in_mean_ = mean_scale(in, in_scale_);
  out_mean_ = mean_scale(delta, out_scale_);
}

std::vector<StateVec> Fdm::predict_candidates(const StateVec& state, const std::vector<ActionVec>& actions) const {
  std::vector<StateVec> states(actions.size(), state);
  std::vector<const ActionVec*> acts;
  acts.reserve(actions.size());
  for (const auto& a : actions) acts.push_back(&a);
  Matrix x;
  build_inputs(states, acts, x);
  const Matrix y = net_.forward_batch(x);
  const StateVec base = masked(state);
  std::vector<StateVec> out(actions.size(), base);
  for (std::size_t r = 0; r < actions.size(); ++r) {
    for (std::size_t i = 0; i < base.size(); ++i) out[r][i] += y(r, i) * out_scale_[i] + out_mean_[i];
    out[r] = masked(out[r]);
  }
  return out;
}

StateVec Fdm::predict(const StateVec& state, const ActionVec& action) const {
  return predict_candidates(state, {action}).front();
}

double Fdm::train_batch(const std::vector<Transition>& batch, const TrainConfig& cfg) {
  if (batch.empty()) throw InvalidBatch("empty fdm batch");
  std::vector<StateVec> states;
  std::vector<const ActionVec*> acts;
  states.reserve(batch.size());
  for (const auto& t : batch) {
    states.push_back(t.state);
    acts.push_back(&t.action);
  }
  Matrix x;
  build_inputs(states, acts, x);
  const std::size_t sd = state_dim_of(env_);
  Matrix y(batch.size(), sd);
  for (std::size_t r = 0; r < batch.size(); ++r) {
    const StateVec s = masked(batch[r].state);
    const StateVec n = masked(batch[r].next_state);
    for (std::size_t i = 0; i < sd; ++i) y(r, i) = (n[i] - s[i] - out_mean_[i]) / out_scale_[i];
  }
  return train_step(net_, x, y, cfg);
}

nlohmann::json Fdm::to_json() const {
  return nlohmann::json{{"env", iil::to_string(env_)},
                        {"net", iil::to_json(net_)},
                        {"input_mean", in_mean_},
                        {"input_scale", in_scale_},
                        {"delta_mean", out_mean_},
                        {"delta_scale", out_scale_},
                        {"fitted", fitted_}};
}

Fdm Fdm::from_json(const nlohmann::json& doc) {
  try {
    Fdm f;
    f.env_ = env_kind_from_string(doc.at("env").get<std::string>());
    f.net_ = mlp_from_json(doc.at("net"));
    f.in_mean_ = doc.at("input_mean").get<std::vector<double>>();
    f.in_scale_ = doc.at("input_scale").get<std::vector<double>>();
    f.out_mean_ = doc.at("delta_mean").get<std::vector<double>>();
    f.out_scale_ = doc.at("delta_scale").get<std::vector<double>>();
    f.fitted_ = doc.at("fitted").get<bool>();
    if (f.net_.layer_sizes() != layer_sizes(f.env_)) throw LoadError("fdm network shape does not match its environment");
    if (f.in_mean_.size() != f.net_.input_dim() || f.in_scale_.size() != f.net_.input_dim() ||
        f.out_mean_.size() != f.net_.output_dim() || f.out_scale_.size() != f.net_.output_dim())
      throw LoadError("fdm normaliser has the wrong length");
    return f;
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(std::string("malformed fdm document: ") + e.what());
  } catch (const ConfigError& e) {
    throw LoadError(e.what());
  }
}

ActionVec random_action(EnvKind env, Rng& rng) {
  const std::size_t n = action_dim_of(env);
  if (action_kind_of(env) == ActionKind::discrete) {
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    return ActionVec::one_hot(n, pick(rng));
  }
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return ActionVec::continuous(std::move(v));
}

double train_fdm_passes(Fdm& fdm, const std::vector<Transition>& data, int passes, const TrainConfig& cfg, Rng& rng) {
  cfg.validate();
  if (data.empty() || passes <= 0) return 0.0;
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  double last = 0.0;
  for (int p = 0; p < passes; ++p) {
    std::shuffle(order.begin(), order.end(), rng);
    double total = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
      std::vector<Transition> batch;
      batch.reserve(stop - start);
      for (std::size_t k = start; k < stop; ++k) batch.push_back(data[order[k]]);
      total += fdm.train_batch(batch, cfg);
      ++batches;
    }
    last = total / static_cast<double>(batches);
  }
  return last;
}

PretrainResult pretrain_fdm(EnvKind env_kind, std::size_t n_samples, int epochs, const TrainConfig& cfg, Rng& rng,
                            std::size_t experience_capacity) {
  if (n_samples < 1) throw ConfigError("pretraining needs at least one sample");
  if (experience_capacity == 0) experience_capacity = TipsConfig::defaults(env_kind).experience_capacity;
  auto env = make_env(env_kind);
  const InitSpec init = env->default_init();
  std::vector<Transition> data;
  data.reserve(n_samples);
  StateVec s = env->reset(init, rng);
  while (data.size() < n_samples) {
    ActionVec a = random_action(env_kind, rng);
    const StepResult r = env->step(a);
    data.push_back(Transition{s, std::move(a), r.next_state});
    s = r.done ? env->reset(init, rng) : r.next_state;
  }
  PretrainResult out{Fdm(env_kind, rng()), BoundedBuffer<Transition>(std::max(experience_capacity, std::size_t{1}))};
  out.fdm.fit_normalizer(data);
  train_fdm_passes(out.fdm, data, epochs, cfg, rng);
  out.fdm.mark_fitted();
  for (auto& t : data) out.experience.push(std::move(t));
  return out;
}

// ---- Correction ------------------------------------------------------------

std::pair<double, double> cartpole_tip_velocity(const StateVec& state) {
  const double angle = state[2] * kPi / 180.0;
  return {state[3] * std::sin(angle), state[3] * std::cos(angle)};
}

double project(const StateVec& state, CorrectedDim dim) {
  switch (dim) {
    case CorrectedDim::tip_velocity_x: return cartpole_tip_velocity(state).first;
    case CorrectedDim::tip_velocity_y: return cartpole_tip_velocity(state).second;
    case CorrectedDim::effector_x: return reacher_end_effector(state).x;
    case CorrectedDim::effector_y: return reacher_end_effector(state).y;
    case CorrectedDim::vertical_velocity: return state[3];
    case CorrectedDim::angular_velocity: return state[5];
  }
  return 0.0;
}

DesiredState state_correction(EnvKind env, const StateVec& state, const Feedback& raw, double e_coarse,
                              double e_fine) {
  const Feedback fb = applicable_feedback(env, raw);
  if (fb.empty()) throw NoCorrection("state correction needs a directional signal");
  if (fb.contains(FeedbackSignal::hold) || fb.contains(FeedbackSignal::do_nothing))
    throw Error("HOLD / DO_NOTHING map straight to the stop action, not to a desired state");
  auto magnitude = [&](FeedbackSignal s) { return is_fine(s) ? e_fine : e_coarse; };

  DesiredState d;
  switch (env) {
    case EnvKind::cartpole: {
      const auto [vx, vy] = cartpole_tip_velocity(state);
      const FeedbackSignal s = fb.horizontal();
      const double e = magnitude(s);
      d.dims = {CorrectedDim::tip_velocity_x, CorrectedDim::tip_velocity_y};
      d.values = {coarse(s) == FeedbackSignal::left ? vx - e : vx + e, vy};
      d.scored = {true, false};
      break;
    }
    case EnvKind::reacher: {
      const Point2 p = reacher_end_effector(state);
      const FeedbackSignal s = fb.latest();
      const double e = magnitude(s);
      double x = p.x, y = p.y;
      switch (coarse(s)) {
        case FeedbackSignal::left: x -= e; break;
        case FeedbackSignal::right: x += e; break;
        case FeedbackSignal::up: y += e; break;
        case FeedbackSignal::down: y -= e; break;
        default: break;
      }
      d.dims = {CorrectedDim::effector_x, CorrectedDim::effector_y};
      d.values = {x, y};
      d.scored = {true, true};
      break;
    }
    case EnvKind::lander_discrete:
    case EnvKind::lander_continuous: {
      const FeedbackSignal v = fb.vertical();
      const FeedbackSignal h = fb.horizontal();
      double vy = 0.0, w = 0.0;
      if (v != FeedbackSignal::null) vy = state[3] + (coarse(v) == FeedbackSignal::up ? 1.0 : -1.0) * magnitude(v);
      if (h != FeedbackSignal::null) w = state[5] + (coarse(h) == FeedbackSignal::left ? 1.0 : -1.0) * magnitude(h);
      d.dims = {CorrectedDim::vertical_velocity, CorrectedDim::angular_velocity};
      d.values = {vy, w};
      d.scored = {v != FeedbackSignal::null, h != FeedbackSignal::null};
      break;
    }
  }
  return d;
}

double internal_cost(EnvKind, const StateVec& predicted, const DesiredState& desired) {
  if (desired.dims.size() != desired.values.size() || desired.dims.size() != desired.scored.size())
    throw ShapeError("desired state fields differ in length");
  double cost = 0.0;
  for (std::size_t k = 0; k < desired.dims.size(); ++k)
    if (desired.scored[k]) cost += std::abs(project(predicted, desired.dims[k]) - desired.values[k]);
  return cost;
}

EncodingResult encode_action(const Fdm& fdm, const StateVec& state, const DesiredState& desired, int ifdm_queries,
                             bool exhaustive, Rng& rng) {
  if (ifdm_queries < 1) throw ConfigError("ifdm_queries must be at least 1");
  const EnvKind env = fdm.env();
  EncodingResult res;
  if (exhaustive && action_kind_of(env) == ActionKind::discrete) {
    for (std::size_t i = 0; i < action_dim_of(env); ++i) res.candidates.push_back(ActionVec::one_hot(action_dim_of(env), i));
  } else {
    res.candidates.reserve(static_cast<std::size_t>(ifdm_queries));
    for (int k = 0; k < ifdm_queries; ++k) res.candidates.push_back(random_action(env, rng));
  }
  const auto predicted = fdm.predict_candidates(state, res.candidates);
  res.costs.assign(predicted.size(), 0.0);
  const auto n = static_cast<long>(predicted.size());
#pragma omp parallel for schedule(static) if (n >= 256)
  for (long k = 0; k < n; ++k)
    res.costs[static_cast<std::size_t>(k)] = internal_cost(env, predicted[static_cast<std::size_t>(k)], desired);
  for (std::size_t k = 1; k < res.costs.size(); ++k)
    if (res.costs[k] < res.costs[res.index]) res.index = k;
  res.action = res.candidates[res.index];
  return res;
}

// ---- Agent -----------------------------------------------------------------

TipsConfig TipsConfig::defaults(EnvKind env) {
  TipsConfig c;
  switch (env) {
    case EnvKind::cartpole:
      c.e_coarse = 0.5;
      c.ifdm_queries = 10;
      c.b = 1;
      c.policy_train.learning_rate = 0.05;
      break;
    case EnvKind::reacher:
      c.e_coarse = 0.02;
      c.ifdm_queries = 500;
      c.fdm_train.learning_rate = 1e-2;
      c.fdm_refit_max_batches = 100;
      c.b = 1;
      c.policy_train.learning_rate = 0.05;
      break;
    case EnvKind::lander_discrete:
      c.e_coarse = 0.5;
      c.ifdm_queries = 24;
      c.immediate_reps = c.batch_reps = 5;
      c.demo_capacity = 4000;
      c.experience_capacity = 20000;
      break;
    case EnvKind::lander_continuous:
      c.e_coarse = 0.5;
      c.ifdm_queries = 500;
      c.immediate_reps = c.batch_reps = 5;
      c.demo_capacity = 4000;
      c.experience_capacity = 20000;
      break;
  }
  c.e_fine = 0.2 * c.e_coarse;
  return c;
}

void TipsConfig::validate() const {
  if (!(e_coarse > 0.0) || !(e_fine > 0.0)) throw ConfigError("correction constants must be positive");
  if (!(e_fine < e_coarse)) throw ConfigError("e_fine must be smaller than e_coarse");
  if (b < 1) throw ConfigError("b must be at least 1");
  if (ifdm_queries < 1) throw ConfigError("ifdm_queries must be at least 1");
  if (sigma < 0.0) throw ConfigError("sigma must be nonnegative");
  if (immediate_reps < 0 || batch_reps < 0 || fdm_refit_passes < 0) throw ConfigError("repetition counts must be >= 0");
  policy_train.validate();
  fdm_train.validate();
}

nlohmann::json to_json(const TipsConfig& c) {
  return nlohmann::json{{"e_coarse", c.e_coarse},
                        {"e_fine", c.e_fine},
                        {"b", c.b},
                        {"ifdm_queries", c.ifdm_queries},
                        {"sigma", c.sigma},
                        {"exhaustive", c.exhaustive},
                        {"immediate_reps", c.immediate_reps},
                        {"batch_reps", c.batch_reps},
                        {"fdm_refit_passes", c.fdm_refit_passes},
                        {"fdm_refit_max_batches", c.fdm_refit_max_batches},
                        {"policy_lr", c.policy_train.learning_rate},
                        {"policy_batch", c.policy_train.batch_size},
                        {"fdm_lr", c.fdm_train.learning_rate},
                        {"fdm_batch", c.fdm_train.batch_size},
                        {"demo_capacity", c.demo_capacity},
                        {"experience_capacity", c.experience_capacity}};
}

TipsConfig tips_config_from_json(const nlohmann::json& d) {
  TipsConfig c;
  c.e_coarse = d.at("e_coarse").get<double>();
  c.e_fine = d.at("e_fine").get<double>();
  c.b = d.at("b").get<int>();
  c.ifdm_queries = d.at("ifdm_queries").get<int>();
  c.sigma = d.at("sigma").get<double>();
  c.exhaustive = d.at("exhaustive").get<bool>();
  c.immediate_reps = d.at("immediate_reps").get<int>();
  c.batch_reps = d.at("batch_reps").get<int>();
  c.fdm_refit_passes = d.at("fdm_refit_passes").get<int>();
  c.fdm_refit_max_batches = d.at("fdm_refit_max_batches").get<std::size_t>();
  c.policy_train = {d.at("policy_lr").get<double>(), d.at("policy_batch").get<std::size_t>()};
  c.fdm_train = {d.at("fdm_lr").get<double>(), d.at("fdm_batch").get<std::size_t>()};
  c.demo_capacity = d.at("demo_capacity").get<std::size_t>();
  c.experience_capacity = d.at("experience_capacity").get<std::size_t>();
  return c;
}

TipsAgent::TipsAgent(EnvKind env, TipsConfig cfg, std::uint64_t seed)
    : env_(env),
      cfg_(cfg),
      policy_(policy_layer_sizes(env), policy_head(env), seed),
      fdm_(env, seed ^ 0x9e3779b97f4a7c15ULL),
      demo_(cfg.demo_capacity),
      exp_(cfg.experience_capacity),
      rng_(seed + 1) {
  cfg_.validate();
}

void TipsAgent::set_fdm(Fdm fdm, const BoundedBuffer<Transition>* pretrain_data) {
  if (fdm.env() != env_) throw ConfigError("fdm was trained for a different environment");
  fdm_ = std::move(fdm);
  if (pretrain_data)
    for (const auto& t : *pretrain_data) exp_.push(t);
}

ActionVec TipsAgent::propose(const StateVec& state) {
  ActionVec mean = action_from_output(action_kind_of(env_), policy_.forward(state));
  return cfg_.sigma > 0.0 ? sample_gaussian_action(mean, cfg_.sigma, rng_) : mean;
}

ActionVec TipsAgent::step(const StateVec& state, const Feedback& fb, long step_index) {
  return step(state, fb, step_index, propose(state));
}

ActionVec TipsAgent::step(const StateVec& state, const Feedback& raw, long step_index, const ActionVec& proposal) {
  last_corrected_ = false;
  ActionVec executed = proposal;
  const Feedback fb = applicable_feedback(env_, raw);
  if (!fb.empty()) {
    if (!fdm_.fitted()) throw ModelNotReady("the forward dynamics model has not been trained");
    ActionVec target;
    if (fb.contains(FeedbackSignal::hold) || fb.contains(FeedbackSignal::do_nothing)) {
      target = *zero_action(env_);
    } else {
      const DesiredState desired = state_correction(env_, state, fb, cfg_.e_coarse, cfg_.e_fine);
      target = encode_action(fdm_, state, desired, cfg_.ifdm_queries, cfg_.exhaustive, rng_).action;
    }
    demo_.push(DemoPair{state, target});
    for (int k = 0; k < cfg_.immediate_reps; ++k) update_on_pair(policy_, state, target, cfg_.policy_train);
    for (int k = 0; k < cfg_.batch_reps; ++k) update_on_batch(policy_, demo_, cfg_.policy_train, rng_);
    executed = std::move(target);
    last_corrected_ = true;
  }
  if (step_index % cfg_.b == 0)
    for (int k = 0; k < cfg_.batch_reps; ++k) update_on_batch(policy_, demo_, cfg_.policy_train, rng_);
  return executed;
}

void TipsAgent::record_transition(const StateVec& state, const ActionVec& action, const StateVec& next_state) {
  exp_.push(Transition{state, action, next_state});
}

void TipsAgent::end_episode() {
  if (exp_.empty() || cfg_.fdm_refit_passes <= 0) return;
  std::vector<Transition> data(exp_.begin(), exp_.end());
  if (cfg_.fdm_refit_max_batches > 0) {
    // Capped refit: the given number of mini-batches drawn from a shuffled buffer.
    std::shuffle(data.begin(), data.end(), rng_);
    const std::size_t keep = std::min(data.size(), cfg_.fdm_refit_max_batches * cfg_.fdm_train.batch_size);
    data.resize(keep);
    train_fdm_passes(fdm_, data, 1, cfg_.fdm_train, rng_);
  } else {
    train_fdm_passes(fdm_, data, cfg_.fdm_refit_passes, cfg_.fdm_train, rng_);
  }
  fdm_.mark_fitted();
}

}  // namespace iil
