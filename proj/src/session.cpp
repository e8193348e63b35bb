#include "iil/session.hpp"

#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>

namespace iil {

namespace {

template <class E>
E parse_enum(const std::string& name, std::initializer_list<std::pair<const char*, E>> table, const char* what) {
  for (const auto& [n, v] : table)
    if (name == n) return v;
  throw ConfigError(std::string("unknown ") + what + ": " + name);
}

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) { return derive_rng(seed, stream)(); }

constexpr std::uint64_t kTeachStream = 1;
constexpr std::uint64_t kOracleStream = 2;
constexpr std::uint64_t kPretrainStream = 3;
constexpr std::uint64_t kEvalStreamBase = 1000000;

void write_vec(std::ostream& out, const std::vector<double>& v) {
  for (double x : v) out << ',' << x;
}

}  // namespace

std::string to_string(AgentKind k) {
  switch (k) {
    case AgentKind::dcoach: return "dcoach";
    case AgentKind::tips: return "tips";
    case AgentKind::dqn: return "dqn";
  }
  return "?";
}

AgentKind agent_kind_from_string(const std::string& name) {
  return parse_enum<AgentKind>(name, {{"dcoach", AgentKind::dcoach}, {"tips", AgentKind::tips}, {"dqn", AgentKind::dqn}},
                               "agent");
}

std::string to_string(TeacherKind k) {
  switch (k) {
    case TeacherKind::none: return "none";
    case TeacherKind::human: return "human";
    case TeacherKind::oracle: return "oracle";
  }
  return "?";
}

TeacherKind teacher_kind_from_string(const std::string& name) {
  return parse_enum<TeacherKind>(
      name, {{"none", TeacherKind::none}, {"human", TeacherKind::human}, {"oracle", TeacherKind::oracle}}, "teacher");
}

std::string to_string(FrameMode m) {
  switch (m) {
    case FrameMode::teaching: return "teaching";
    case FrameMode::evaluating: return "evaluating";
    case FrameMode::paused: return "paused";
  }
  return "?";
}

nlohmann::json to_json(const InitSpec& s) {
  if (s.mode == InitSpec::Mode::fixed) return {{"mode", "fixed"}, {"values", s.fixed_values}};
  return {{"mode", "uniform"}, {"half_width", s.half_width}};
}

InitSpec init_spec_from_json(const nlohmann::json& d) {
  const auto mode = d.at("mode").get<std::string>();
  if (mode == "fixed") return InitSpec::fixed(d.at("values").get<std::vector<double>>());
  if (mode == "uniform") return InitSpec::uniform(d.at("half_width").get<double>());
  throw ConfigError("unknown init mode: " + mode);
}

// ---- RunConfig -------------------------------------------------------------

RunConfig RunConfig::defaults(EnvKind env, AgentKind agent) {
  RunConfig c;
  c.env = env;
  c.agent = agent;
  c.teacher = agent == AgentKind::dqn ? TeacherKind::none : TeacherKind::oracle;
  c.init = c.eval_init = make_env(env)->default_init();
  c.dcoach = DcoachConfig::defaults(env);
  c.tips = TipsConfig::defaults(env);
  const bool lander = env == EnvKind::lander_discrete || env == EnvKind::lander_continuous;
  c.episodes = lander ? 160 : 50;
  c.fdm_samples = lander ? 20000 : 10000;
  if (env == EnvKind::reacher) c.fdm_pretrain.learning_rate = 1e-2;
  return c;
}

void RunConfig::validate() const {
  if (episodes < 0) throw ConfigError("episodes must be nonnegative");
  if (eval_episodes < 0) throw ConfigError("eval_episodes must be nonnegative");
  if (agent == AgentKind::dqn) {
    if (teacher != TeacherKind::none) throw ConfigError("the DQN baseline learns without a teacher");
    if (action_kind_of(env) != ActionKind::discrete) throw ConfigError("the DQN baseline needs discrete actions");
  } else if (teacher == TeacherKind::none) {
    throw ConfigError("interactive agents need a teacher");
  }
  oracle.validate();
  dcoach.validate();
  tips.validate();
  dqn.validate();
  fdm_pretrain.validate();
}

nlohmann::json to_json(const RunConfig& c) {
  return nlohmann::json{{"env", to_string(c.env)},
                        {"agent", to_string(c.agent)},
                        {"teacher", to_string(c.teacher)},
                        {"episodes", c.episodes},
                        {"seed", c.seed},
                        {"init", to_json(c.init)},
                        {"eval_init", to_json(c.eval_init)},
                        {"eval_episodes", c.eval_episodes},
                        {"oracle",
                         {{"p_feedback", c.oracle.p_feedback},
                          {"p_error", c.oracle.p_error},
                          {"threshold", c.oracle.threshold},
                          {"two_level", c.oracle.two_level},
                          {"fine_radius", c.oracle.fine_radius},
                          {"hold_radius", c.oracle.hold_radius},
                          {"hold_motion", c.oracle.hold_motion}}},
                        {"dcoach", to_json(c.dcoach)},
                        {"tips", to_json(c.tips)},
                        {"dqn", to_json(c.dqn)},
                        {"fdm_samples", c.fdm_samples},
                        {"fdm_epochs", c.fdm_epochs},
                        {"fdm_pretrain_lr", c.fdm_pretrain.learning_rate},
                        {"fdm_pretrain_batch", c.fdm_pretrain.batch_size}};
}

RunConfig run_config_from_json(const nlohmann::json& d) {
  RunConfig c;
  c.env = env_kind_from_string(d.at("env").get<std::string>());
  c.agent = agent_kind_from_string(d.at("agent").get<std::string>());
  c.teacher = teacher_kind_from_string(d.at("teacher").get<std::string>());
  c.episodes = d.at("episodes").get<int>();
  c.seed = d.at("seed").get<std::uint64_t>();
  c.init = init_spec_from_json(d.at("init"));
  c.eval_init = init_spec_from_json(d.at("eval_init"));
  c.eval_episodes = d.at("eval_episodes").get<int>();
  const auto& o = d.at("oracle");
  c.oracle.p_feedback = o.at("p_feedback").get<double>();
  c.oracle.p_error = o.at("p_error").get<double>();
  c.oracle.threshold = o.at("threshold").get<double>();
  c.oracle.two_level = o.at("two_level").get<bool>();
  c.oracle.fine_radius = o.at("fine_radius").get<double>();
  c.oracle.hold_radius = o.at("hold_radius").get<double>();
  c.oracle.hold_motion = o.at("hold_motion").get<double>();
  c.dcoach = dcoach_config_from_json(d.at("dcoach"));
  c.tips = tips_config_from_json(d.at("tips"));
  c.dqn = dqn_config_from_json(d.at("dqn"));
  c.fdm_samples = d.at("fdm_samples").get<std::size_t>();
  c.fdm_epochs = d.at("fdm_epochs").get<int>();
  c.fdm_pretrain = {d.at("fdm_pretrain_lr").get<double>(), d.at("fdm_pretrain_batch").get<std::size_t>()};
  return c;
}

// ---- Metrics ---------------------------------------------------------------

std::string metrics_csv_header(int eval_episodes) {
  std::string h = "episode,teaching_reward,feedback_rate,eval_mean";
  for (int i = 1; i <= eval_episodes; ++i) h += ",eval_" + std::to_string(i);
  return h;
}

std::string metrics_csv_row(const EpisodeMetrics& m) {
  std::ostringstream out;
  out.precision(10);
  out << m.episode_index << ',' << m.teaching_reward << ',' << m.feedback_rate << ',' << m.eval_mean_reward;
  write_vec(out, m.eval_rewards);
  return out.str();
}

void write_metrics_csv(const std::string& path, const std::vector<EpisodeMetrics>& rows, int eval_episodes) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << metrics_csv_header(eval_episodes) << '\n';
  for (const auto& m : rows) out << metrics_csv_row(m) << '\n';
}

// ---- Session ---------------------------------------------------------------

std::shared_ptr<Teacher> make_oracle_teacher(const RunConfig& cfg) {
  const AgentMode mode = cfg.agent == AgentKind::tips ? AgentMode::state_space : AgentMode::action_space;
  return std::make_shared<OracleTeacher>(cfg.env, mode, cfg.oracle, stream_seed(cfg.seed, kOracleStream));
}

Session::Session(RunConfig cfg, std::shared_ptr<Teacher> teacher, Restore)
    : cfg_(std::move(cfg)), teacher_(std::move(teacher)), env_(make_env(cfg_.env)), rng_(derive_rng(cfg_.seed, kTeachStream)) {
  cfg_.validate();
  if (cfg_.agent == AgentKind::dqn) throw ConfigError("use run_dqn_baseline for the DQN agent");
  if (!teacher_) throw ConfigError("a session needs a teacher");
  build_agent();
}

Session::Session(RunConfig cfg, std::shared_ptr<Teacher> teacher, std::optional<PretrainResult> fdm)
    : Session(std::move(cfg), std::move(teacher), Restore{}) {
  if (cfg_.agent != AgentKind::tips) return;
  auto& tips = static_cast<TipsAgent&>(*agent_);
  if (!fdm) {
    Rng prng = derive_rng(cfg_.seed, kPretrainStream);
    fdm = pretrain_fdm(cfg_.env, cfg_.fdm_samples, cfg_.fdm_epochs, cfg_.fdm_pretrain, prng,
                       cfg_.tips.experience_capacity);
  }
  if (fdm->fdm.env() != cfg_.env) throw ConfigError("fdm was trained for a different environment");
  tips.set_fdm(fdm->fdm, &fdm->experience);
}

void Session::build_agent() {
  if (cfg_.agent == AgentKind::dcoach)
    agent_ = std::make_unique<DcoachAgent>(cfg_.env, cfg_.dcoach, cfg_.seed);
  else
    agent_ = std::make_unique<TipsAgent>(cfg_.env, cfg_.tips, cfg_.seed);
}

void Session::set_transition_log(std::ostream* out) {
  transitions_ = out;
  if (!out) return;
  const std::size_t sd = state_dim_of(cfg_.env), ad = action_dim_of(cfg_.env);
  *out << "episode,step";
  for (std::size_t i = 0; i < sd; ++i) *out << ",s" << i;
  for (std::size_t i = 0; i < ad; ++i) *out << ",a" << i;
  *out << ",cumulative_reward";
  for (std::size_t i = 0; i < sd; ++i) *out << ",next_s" << i;
  *out << '\n';
}

std::vector<double> Session::evaluate(int n, const InitSpec& init, std::uint64_t seed) const {
  return iil::evaluate(agent_->frozen(), cfg_.env, n, init, seed);
}

EpisodeMetrics Session::run_teaching_episode(const std::optional<StateVec>& fixed_init) {
  const auto t0 = std::chrono::steady_clock::now();
  EpisodeMetrics m;
  m.episode_index = episodes_run_ + 1;

  teacher_->episode_starting(m.episode_index);
  if (observer_) observer_->on_episode_start(m.episode_index);

  const InitSpec init = fixed_init ? InitSpec::fixed(*fixed_init) : cfg_.init;
  StateVec s = env_->reset(init, rng_);
  std::vector<double> last;
  for (;;) {
    if (observer_)
      observer_->on_step({cfg_.env, m.episode_index, m.steps, s, last, m.teaching_reward, FrameMode::teaching});
    const ActionVec proposal = agent_->propose(s);
    Feedback fb;
    for (;;) {
      try {
        fb = teacher_->poll(s, proposal);
        break;
      } catch (const SourceUnavailable&) {
        if (observer_)
          observer_->on_step({cfg_.env, m.episode_index, m.steps, s, last, m.teaching_reward, FrameMode::paused});
        if (!teacher_->wait_until_available(pause_timeout_)) throw;
      }
    }
    ++total_steps_;
    const ActionVec a = agent_->step(s, fb, total_steps_, proposal);
    if (agent_->last_step_corrected()) ++m.feedback_steps;
    const StepResult r = env_->step(a);
    last = a.values;
    agent_->record_transition(s, a, r.next_state);
    m.teaching_reward += r.reward;
    ++m.steps;
    if (transitions_) {
      *transitions_ << m.episode_index << ',' << m.steps;
      write_vec(*transitions_, s);
      write_vec(*transitions_, a.values);
      *transitions_ << ',' << m.teaching_reward;
      write_vec(*transitions_, r.next_state);
      *transitions_ << '\n';
    }
    s = r.next_state;
    if (r.done) break;
  }
  agent_->end_episode();
  ++episodes_run_;

  m.feedback_rate = static_cast<double>(m.feedback_steps) / static_cast<double>(m.steps);
  m.eval_rewards = evaluate(cfg_.eval_episodes, cfg_.eval_init,
                            stream_seed(cfg_.seed, kEvalStreamBase + static_cast<std::uint64_t>(episodes_run_)));
  if (!m.eval_rewards.empty())
    m.eval_mean_reward = std::accumulate(m.eval_rewards.begin(), m.eval_rewards.end(), 0.0) /
                         static_cast<double>(m.eval_rewards.size());
  m.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (observer_) observer_->on_episode_end(m);
  return m;
}

std::vector<EpisodeMetrics> Session::run(int episodes) {
  if (episodes < 0) episodes = cfg_.episodes;
  std::vector<EpisodeMetrics> out;
  for (int i = 0; i < episodes; ++i) out.push_back(run_teaching_episode());
  return out;
}

nlohmann::json Session::checkpoint() const {
  nlohmann::json agent;
  agent["policy"] = to_json(agent_->policy());
  if (cfg_.agent == AgentKind::dcoach) {
    agent["demo_buffer"] = dump_buffer(static_cast<const DcoachAgent&>(*agent_).demo_buffer());
  } else {
    const auto& tips = static_cast<const TipsAgent&>(*agent_);
    agent["demo_buffer"] = dump_buffer(tips.demo_buffer());
    agent["fdm"] = tips.fdm().to_json();
    agent["experience_buffer"] = dump_buffer(tips.experience_buffer());
  }
  return nlohmann::json{{"format", "iil-checkpoint"},
                        {"version", 1},
                        {"run_config", to_json(cfg_)},
                        {"episodes_run", episodes_run_},
                        {"total_steps", total_steps_},
                        {"agent", agent}};
}

void Session::save_checkpoint(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << checkpoint().dump(1) << '\n';
}

Session Session::from_checkpoint(const nlohmann::json& doc, std::shared_ptr<Teacher> teacher) {
  try {
    if (doc.at("format").get<std::string>() != "iil-checkpoint") throw LoadError("not a checkpoint");
    if (doc.at("version").get<int>() != 1) throw LoadError("unsupported checkpoint version");
    RunConfig cfg = run_config_from_json(doc.at("run_config"));
    Session s(std::move(cfg), std::move(teacher), Restore{});
    s.episodes_run_ = doc.at("episodes_run").get<int>();
    s.total_steps_ = doc.at("total_steps").get<long>();
    const auto& a = doc.at("agent");
    Mlp policy = mlp_from_json(a.at("policy"));
    if (policy.layer_sizes() != policy_layer_sizes(s.cfg_.env) || policy.head() != policy_head(s.cfg_.env))
      throw LoadError("policy shape does not match the environment");
    if (s.cfg_.agent == AgentKind::dcoach) {
      auto& d = static_cast<DcoachAgent&>(*s.agent_);
      d.policy() = std::move(policy);
      d.demo_buffer() = load_demo_buffer(a.at("demo_buffer"));
    } else {
      auto& t = static_cast<TipsAgent&>(*s.agent_);
      t.policy() = std::move(policy);
      t.demo_buffer() = load_demo_buffer(a.at("demo_buffer"));
      t.set_fdm(Fdm::from_json(a.at("fdm")));
      t.experience_buffer() = load_transition_buffer(a.at("experience_buffer"));
    }
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(std::string("malformed checkpoint: ") + e.what());
  } catch (const LoadError&) {
    throw;
  } catch (const Error& e) {
    throw LoadError(std::string("invalid checkpoint: ") + e.what());
  }
}

Session Session::load_checkpoint(const std::string& path, std::shared_ptr<Teacher> teacher) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(std::string("corrupt checkpoint file: ") + e.what());
  }
  return from_checkpoint(doc, std::move(teacher));
}

std::vector<EpisodeMetrics> reinforce_train(Session& session, const std::vector<StateVec>& init_states, int episodes) {
  if (episodes > 0 && init_states.empty()) throw ConfigError("reinforce training needs at least one initial state");
  std::vector<EpisodeMetrics> out;
  for (int i = 0; i < episodes; ++i)
    out.push_back(session.run_teaching_episode(init_states[static_cast<std::size_t>(i) % init_states.size()]));
  return out;
}

// ---- DQN baseline ----------------------------------------------------------

DqnRunResult run_dqn_baseline(const RunConfig& cfg, std::optional<double> stop_at, SessionObserver* observer) {
  cfg.validate();
  if (cfg.agent != AgentKind::dqn) throw ConfigError("run_dqn_baseline needs agent = dqn");
  DqnRunResult res{{}, DqnAgent(cfg.env, cfg.dqn, cfg.seed)};
  auto env = make_env(cfg.env);
  Rng rng = derive_rng(cfg.seed, kTeachStream);
  for (int ep = 1; ep <= cfg.episodes; ++ep) {
    const auto t0 = std::chrono::steady_clock::now();
    EpisodeMetrics m;
    m.episode_index = ep;
    if (observer) observer->on_episode_start(ep);
    StateVec s = env->reset(cfg.init, rng);
    std::vector<double> last;
    for (;;) {
      if (observer) observer->on_step({cfg.env, ep, m.steps, s, last, m.teaching_reward, FrameMode::teaching});
      const ActionVec a = res.agent.epsilon_greedy(s, rng);
      last = a.values;
      const StepResult r = env->step(a);
      // Time-limit cut-offs are not terminal for bootstrapping.
      const bool terminal = r.done && r.done_reason != DoneReason::time_limit;
      res.agent.observe({s, a.argmax(), r.reward, r.next_state, terminal});
      m.teaching_reward += r.reward;
      ++m.steps;
      s = r.next_state;
      if (r.done) break;
    }
    res.agent.end_episode();
    m.eval_rewards = evaluate(res.agent.frozen(), cfg.env, cfg.eval_episodes, cfg.eval_init,
                              stream_seed(cfg.seed, kEvalStreamBase + static_cast<std::uint64_t>(ep)));
    if (!m.eval_rewards.empty())
      m.eval_mean_reward = std::accumulate(m.eval_rewards.begin(), m.eval_rewards.end(), 0.0) /
                           static_cast<double>(m.eval_rewards.size());
    m.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (observer) observer->on_episode_end(m);
    res.metrics.push_back(m);
    if (stop_at && m.eval_mean_reward >= *stop_at) break;
  }
  return res;
}

}  // namespace iil
