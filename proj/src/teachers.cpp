#include "iil/teachers.hpp"

#include <algorithm>
#include <cmath>

namespace iil {

namespace {

constexpr double kPi = 3.14159265358979323846;

double clamp1(double v) { return std::clamp(v, -1.0, 1.0); }

FeedbackSignal maybe_fine(FeedbackSignal s, bool fine) {
  if (!fine) return s;
  switch (s) {
    case FeedbackSignal::left: return FeedbackSignal::fine_left;
    case FeedbackSignal::right: return FeedbackSignal::fine_right;
    case FeedbackSignal::up: return FeedbackSignal::fine_up;
    case FeedbackSignal::down: return FeedbackSignal::fine_down;
    default: return s;
  }
}

double cartpole_tip_x(const StateVec& s) { return s[3] * std::sin(s[2] * kPi / 180.0); }

double lander_cost(const StateVec& next, const LanderTargets& t) {
  return std::abs(next[3] - t.vertical_velocity) + std::abs(next[5] - t.angular_velocity);
}

Feedback cartpole_oracle(AgentMode mode, const StateVec& s, const ActionVec& proposal) {
  const std::size_t ref = cartpole_reference(s);
  if (proposal.argmax() == ref) return {};
  if (mode == AgentMode::action_space) return Feedback(ref == 1 ? FeedbackSignal::right : FeedbackSignal::left);
  // The signal is phrased in the tip-velocity terms the state-space agent
  // decodes, so the reference action is the one it will recover.
  CartPole env;
  const double h_ref = cartpole_tip_x(env.true_transition(s, ActionVec::one_hot(2, ref)));
  const double h_other = cartpole_tip_x(env.true_transition(s, ActionVec::one_hot(2, 1 - ref)));
  if (h_ref == h_other) return {};
  return Feedback(h_ref > h_other ? FeedbackSignal::right : FeedbackSignal::left);
}

Feedback reacher_oracle(AgentMode mode, const StateVec& s, const ActionVec& proposal, const OracleConfig& cfg,
                        double thr) {
  Reacher env;
  const double d = env.distance_to_target(s);
  const ActionVec prop = proposal.clipped();
  const StateVec next_prop = env.true_transition(s, prop);
  if (!cfg.two_level && d < thr) return {};
  if (cfg.two_level && d < cfg.hold_radius) {
    const Point2 a = reacher_end_effector(s);
    const Point2 b = reacher_end_effector(next_prop);
    return std::hypot(b.x - a.x, b.y - a.y) > cfg.hold_motion ? Feedback(FeedbackSignal::hold) : Feedback{};
  }
  const ActionVec ref = reacher_reference(s);
  const double progress_ref = d - env.distance_to_target(env.true_transition(s, ref));
  const double progress_prop = d - env.distance_to_target(next_prop);
  if (progress_prop >= 0.4 * progress_ref) return {};

  const bool fine = cfg.two_level && d < cfg.fine_radius;
  FeedbackSignal sig;
  if (mode == AgentMode::action_space) {
    const double g0 = ref.values[0] - prop.values[0];
    const double g1 = ref.values[1] - prop.values[1];
    if (std::abs(g0) >= std::abs(g1))
      sig = g0 > 0.0 ? FeedbackSignal::left : FeedbackSignal::right;
    else
      sig = g1 > 0.0 ? FeedbackSignal::up : FeedbackSignal::down;
  } else {
    // the axis the reference actually moves the effector along; near a
    // singular pose the straight line to the target is not reachable
    const Point2 p = reacher_end_effector(s);
    const Point2 q = reacher_end_effector(env.true_transition(s, ref));
    const double dx = q.x - p.x;
    const double dy = q.y - p.y;
    if (std::abs(dx) >= std::abs(dy))
      sig = dx > 0.0 ? FeedbackSignal::right : FeedbackSignal::left;
    else
      sig = dy > 0.0 ? FeedbackSignal::up : FeedbackSignal::down;
  }
  return Feedback(maybe_fine(sig, fine));
}

Feedback lander_continuous_oracle(AgentMode mode, const StateVec& s, const ActionVec& proposal, double thr) {
  Lander env(true);
  const StateVec next = env.true_transition(s, proposal.clipped());
  double vy_goal, w_goal;
  if (mode == AgentMode::state_space) {
    const LanderTargets t = lander_targets(s);
    vy_goal = t.vertical_velocity;
    w_goal = t.angular_velocity;
  } else {
    const StateVec ref = env.true_transition(s, lander_continuous_reference(s));
    vy_goal = ref[3];
    w_goal = ref[5];
  }
  Feedback fb;
  if (next[3] < vy_goal - thr) fb.add(FeedbackSignal::up);
  if (next[3] > vy_goal + thr) fb.add(FeedbackSignal::down);
  // State-space LEFT asks for more counter-clockwise spin; action-space LEFT
  // lowers the side throttle, which spins the hull clockwise.
  const bool action_space = mode == AgentMode::action_space;
  if (next[5] < w_goal - thr) fb.add(action_space ? FeedbackSignal::right : FeedbackSignal::left);
  if (next[5] > w_goal + thr) fb.add(action_space ? FeedbackSignal::left : FeedbackSignal::right);
  return fb;
}

Feedback lander_discrete_oracle(AgentMode mode, const StateVec& s, const ActionVec& proposal, double thr) {
  Lander env(false);
  const LanderTargets t = lander_targets(s);
  const std::size_t ref = lander_discrete_reference(s);
  const std::size_t k = proposal.argmax();
  if (k == ref) return {};
  const double gap = lander_cost(env.true_transition(s, ActionVec::one_hot(4, k)), t) -
                     lander_cost(env.true_transition(s, ActionVec::one_hot(4, ref)), t);
  if (gap <= thr) return {};
  switch (ref) {
    case 0: return Feedback(FeedbackSignal::do_nothing);
    case 2: return Feedback(FeedbackSignal::up);
    case 1: return Feedback(mode == AgentMode::action_space ? FeedbackSignal::left : FeedbackSignal::right);
    default: return Feedback(mode == AgentMode::action_space ? FeedbackSignal::right : FeedbackSignal::left);
  }
}

}  // namespace

void OracleConfig::validate() const {
  if (p_feedback < 0.0 || p_feedback > 1.0) throw ConfigError("p_feedback must lie in [0, 1]");
  if (p_error < 0.0 || p_error > 1.0) throw ConfigError("p_error must lie in [0, 1]");
  if (fine_radius < 0.0 || hold_radius < 0.0 || hold_motion < 0.0) throw ConfigError("oracle radii must be nonnegative");
}

double default_oracle_threshold(EnvKind env, AgentMode mode) {
  switch (env) {
    case EnvKind::cartpole: return 0.0;
    case EnvKind::reacher: return 0.02;
    case EnvKind::lander_continuous: return mode == AgentMode::state_space ? 0.1 : 0.05;
    case EnvKind::lander_discrete: return 0.01;
  }
  return 0.0;
}

std::size_t cartpole_reference(const StateVec& s) {
  return 0.1 * s[0] + 0.2 * s[1] + 1.0 * s[2] + 0.3 * s[3] > 0.0 ? 1 : 0;
}

ActionVec reacher_reference(const StateVec& s) {
  const auto [t1, t2] = reacher_joint_angles(s);
  const Point2 p = reacher_end_effector(s);
  const ReacherParams rp;
  const double ex = rp.target_x - p.x, ey = rp.target_y - p.y;
  const double j00 = -kReacherLink1 * std::sin(t1) - kReacherLink2 * std::sin(t1 + t2);
  const double j01 = -kReacherLink2 * std::sin(t1 + t2);
  const double j10 = kReacherLink1 * std::cos(t1) + kReacherLink2 * std::cos(t1 + t2);
  const double j11 = kReacherLink2 * std::cos(t1 + t2);
  double g0 = j00 * ex + j10 * ey;
  double g1 = j01 * ex + j11 * ey;
  const double m = std::max(std::abs(g0), std::abs(g1));
  if (m > 0.0) {
    g0 /= m;
    g1 /= m;
  }
  return ActionVec::continuous({g0, g1});
}

LanderTargets lander_targets(const StateVec& s) {
  const double tilt = std::clamp(0.5 * s[0] + 1.0 * s[2], -0.4, 0.4);
  return {-(0.1 + 0.35 * s[1]), 2.0 * (tilt - s[4])};
}

ActionVec lander_continuous_reference(const StateVec& s) {
  const LanderTargets t = lander_targets(s);
  return ActionVec::continuous({clamp1(5.0 * (t.vertical_velocity - s[3])), clamp1(5.0 * (t.angular_velocity - s[5]))});
}

std::size_t lander_discrete_reference(const StateVec& s) {
  Lander env(false);
  const LanderTargets t = lander_targets(s);
  std::size_t best = 0;
  double best_cost = 0.0;
  for (std::size_t k = 0; k < 4; ++k) {
    const double c = lander_cost(env.true_transition(s, ActionVec::one_hot(4, k)), t);
    if (k == 0 || c < best_cost) {
      best = k;
      best_cost = c;
    }
  }
  return best;
}

Feedback oracle_feedback(EnvKind env, AgentMode mode, const StateVec& state, const ActionVec& proposal,
                         const OracleConfig& cfg, Rng& rng) {
  if (cfg.p_feedback <= 0.0) return {};
  const double thr = cfg.threshold >= 0.0 ? cfg.threshold : default_oracle_threshold(env, mode);
  Feedback wanted;
  switch (env) {
    case EnvKind::cartpole: wanted = cartpole_oracle(mode, state, proposal); break;
    case EnvKind::reacher: wanted = reacher_oracle(mode, state, proposal, cfg, thr); break;
    case EnvKind::lander_continuous: wanted = lander_continuous_oracle(mode, state, proposal, thr); break;
    case EnvKind::lander_discrete: wanted = lander_discrete_oracle(mode, state, proposal, thr); break;
  }
  if (wanted.empty()) return {};
  std::uniform_real_distribution<double> u(0.0, 1.0);
  if (u(rng) >= cfg.p_feedback) return {};
  if (cfg.p_error <= 0.0) return wanted;
  Feedback out;
  for (auto sig : wanted.signals()) out.add(u(rng) < cfg.p_error ? opposite(sig) : sig);
  return out;
}

OracleTeacher::OracleTeacher(EnvKind env, AgentMode mode, OracleConfig cfg, std::uint64_t seed)
    : env_(env), mode_(mode), cfg_(cfg), rng_(seed) {
  cfg_.validate();
}

Feedback OracleTeacher::poll(const StateVec& state, const ActionVec& proposal) {
  return oracle_feedback(env_, mode_, state, proposal, cfg_, rng_);
}

// ---- Human -----------------------------------------------------------------

Feedback HumanTeacher::poll(const StateVec&, const ActionVec&) { return poll(); }

Feedback HumanTeacher::poll() {
  std::lock_guard<std::mutex> lock(mu_);
  if (!connected_) throw SourceUnavailable("no teaching client is connected");
  Feedback fresh;    // pressed since the last poll
  Feedback latched;  // pressed and released since the last poll
  while (!events_.empty()) {
    const auto [sig, pressed] = events_.front();
    events_.pop_front();
    if (pressed) {
      held_.add(sig);
      fresh.add(sig);
    } else {
      if (fresh.contains(sig)) latched.add(sig);
      held_.remove(sig);
    }
  }
  Feedback out = held_;
  for (auto s : latched.signals()) out.add(s);
  return out;
}

void HumanTeacher::episode_starting(int episode) {
  std::function<void(int)> hook;
  {
    std::lock_guard<std::mutex> lock(mu_);
    hook = hook_;
  }
  if (hook) hook(episode);
}

bool HumanTeacher::wait_until_available(std::chrono::milliseconds timeout) {
  std::unique_lock<std::mutex> lock(mu_);
  return cv_.wait_for(lock, timeout, [this] { return connected_; });
}

void HumanTeacher::push_key(FeedbackSignal signal, bool pressed) {
  {
    std::lock_guard<std::mutex> lock(mu_);
    events_.emplace_back(signal, pressed);
    ++received_;
  }
  cv_.notify_all();
}

void HumanTeacher::set_connected(bool connected) {
  {
    std::lock_guard<std::mutex> lock(mu_);
    connected_ = connected;
    if (!connected) {
      events_.clear();
      held_ = Feedback{};
    }
  }
  cv_.notify_all();
}

bool HumanTeacher::connected() const {
  std::lock_guard<std::mutex> lock(mu_);
  return connected_;
}

std::uint64_t HumanTeacher::events_received() const {
  std::lock_guard<std::mutex> lock(mu_);
  return received_;
}

void HumanTeacher::set_episode_hook(std::function<void(int)> hook) {
  std::lock_guard<std::mutex> lock(mu_);
  hook_ = std::move(hook);
}

}  // namespace iil
