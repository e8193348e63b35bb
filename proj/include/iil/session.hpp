#pragma once

#include <chrono>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "iil/agent.hpp"
#include "iil/dcoach.hpp"
#include "iil/dqn.hpp"
#include "iil/teachers.hpp"
#include "iil/tips.hpp"

namespace iil {

enum class AgentKind { dcoach, tips, dqn };
enum class TeacherKind { none, human, oracle };

std::string to_string(AgentKind k);
AgentKind agent_kind_from_string(const std::string& name);
std::string to_string(TeacherKind k);
TeacherKind teacher_kind_from_string(const std::string& name);

nlohmann::json to_json(const InitSpec& s);
InitSpec init_spec_from_json(const nlohmann::json& doc);

struct RunConfig {
  EnvKind env = EnvKind::cartpole;
  AgentKind agent = AgentKind::tips;
  TeacherKind teacher = TeacherKind::oracle;
  int episodes = 50;
  std::uint64_t seed = 0;
  InitSpec init = InitSpec::uniform(0.05);       // teaching episodes
  InitSpec eval_init = InitSpec::uniform(0.05);  // the evaluation episodes after each one
  int eval_episodes = 9;
  OracleConfig oracle;
  DcoachConfig dcoach;
  TipsConfig tips;
  DqnConfig dqn;
  std::size_t fdm_samples = 10000;
  int fdm_epochs = 20;
  TrainConfig fdm_pretrain{1e-3, 32};

  /// Per-environment defaults for every field.
  static RunConfig defaults(EnvKind env, AgentKind agent);
  void validate() const;
};

nlohmann::json to_json(const RunConfig& c);
RunConfig run_config_from_json(const nlohmann::json& doc);

struct EpisodeMetrics {
  int episode_index = 0;
  double teaching_reward = 0.0;
  double feedback_rate = 0.0;
  double eval_mean_reward = 0.0;
  std::vector<double> eval_rewards;
  double wall_time = 0.0;
  int steps = 0;
  int feedback_steps = 0;
};

std::string metrics_csv_header(int eval_episodes);
std::string metrics_csv_row(const EpisodeMetrics& m);
void write_metrics_csv(const std::string& path, const std::vector<EpisodeMetrics>& rows, int eval_episodes);

enum class FrameMode { teaching, evaluating, paused };
std::string to_string(FrameMode m);

struct StepFrame {
  EnvKind env = EnvKind::cartpole;
  int episode = 0;
  int step = 0;
  StateVec state;
  std::vector<double> last_action;  // empty before the first action
  double reward_so_far = 0.0;
  FrameMode mode = FrameMode::teaching;
};

/// Receives the live view of a run (the bridge streams it to the browser).
class SessionObserver {
 public:
  virtual ~SessionObserver() = default;
  virtual void on_episode_start(int /*episode*/) {}
  virtual void on_step(const StepFrame& /*frame*/) {}
  virtual void on_episode_end(const EpisodeMetrics& /*metrics*/) {}
};

/// Owns one feedback-driven learner, its environment and its teacher.
class Session {
 public:
  /// For TIPS a forward dynamics model is pre-trained unless `fdm` is given.
  Session(RunConfig cfg, std::shared_ptr<Teacher> teacher, std::optional<PretrainResult> fdm = std::nullopt);

  /// One teaching episode followed by the evaluation episodes. A fixed initial
  /// state overrides the configured teaching distribution.
  EpisodeMetrics run_teaching_episode(const std::optional<StateVec>& fixed_init = std::nullopt);
  /// Runs `episodes` teaching episodes (the configured count when negative).
  std::vector<EpisodeMetrics> run(int episodes = -1);

  std::vector<double> evaluate(int n, const InitSpec& init, std::uint64_t seed) const;

  nlohmann::json checkpoint() const;
  void save_checkpoint(const std::string& path) const;
  static Session from_checkpoint(const nlohmann::json& doc, std::shared_ptr<Teacher> teacher);
  static Session load_checkpoint(const std::string& path, std::shared_ptr<Teacher> teacher);

  void set_observer(SessionObserver* obs) { observer_ = obs; }
  /// Per-step CSV log (episode, step, state, action, cumulative reward, next state).
  void set_transition_log(std::ostream* out);
  void set_pause_timeout(std::chrono::milliseconds t) { pause_timeout_ = t; }
  void set_teacher(std::shared_ptr<Teacher> teacher) { teacher_ = std::move(teacher); }

  const RunConfig& config() const { return cfg_; }
  Agent& agent() { return *agent_; }
  const Agent& agent() const { return *agent_; }
  int episodes_run() const { return episodes_run_; }

 private:
  struct Restore {};
  Session(RunConfig cfg, std::shared_ptr<Teacher> teacher, Restore);
  void build_agent();

  RunConfig cfg_;
  std::shared_ptr<Teacher> teacher_;
  std::unique_ptr<Agent> agent_;
  std::unique_ptr<Environment> env_;
  Rng rng_;
  int episodes_run_ = 0;
  long total_steps_ = 0;
  SessionObserver* observer_ = nullptr;
  std::ostream* transitions_ = nullptr;
  std::chrono::milliseconds pause_timeout_{std::chrono::minutes(10)};
};

/// Teacher matching the run configuration (oracle only; human teachers come
/// from the bridge).
std::shared_ptr<Teacher> make_oracle_teacher(const RunConfig& cfg);

/// Resumes teaching from the given fixed initial states, cycling through them.
std::vector<EpisodeMetrics> reinforce_train(Session& session, const std::vector<StateVec>& init_states, int episodes);

/// Deep Q-learning baseline with the same per-episode evaluation protocol.
/// Stops early once the evaluation mean reaches `stop_at` (when given).
struct DqnRunResult {
  std::vector<EpisodeMetrics> metrics;
  DqnAgent agent;
};
DqnRunResult run_dqn_baseline(const RunConfig& cfg, std::optional<double> stop_at = std::nullopt,
                              SessionObserver* observer = nullptr);

}  // namespace iil
