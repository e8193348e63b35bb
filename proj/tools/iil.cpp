// Command-line front end: pretrain, teach, eval, reinforce, baseline.

#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include <CLI11.hpp>

#include "iil/bridge.hpp"
#include "iil/session.hpp"

using namespace iil;

namespace {

std::vector<double> parse_values(const std::string& text) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw ConfigError("not a number: " + item);
    }
  }
  return out;
}

/// Several states separated by ';', entries by ','.
std::vector<StateVec> parse_states(const std::string& text) {
  std::vector<StateVec> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ';'))
    if (!item.empty()) out.push_back(parse_values(item));
  return out;
}

void save_json(const std::string& path, const nlohmann::json& doc) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << doc.dump(1) << '\n';
}

nlohmann::json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(path + ": " + e.what());
  }
}

PretrainResult load_pretrained(const std::string& path) {
  const auto doc = load_json(path);
  try {
    PretrainResult r{Fdm::from_json(doc.at("fdm")), load_transition_buffer(doc.at("experience"))};
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(path + ": " + e.what());
  }
}

void print_metrics(const EpisodeMetrics& m) {
  std::cout << "episode " << m.episode_index << "  teach " << m.teaching_reward << "  feedback " << m.feedback_rate
            << "  eval " << m.eval_mean_reward << '\n';
}

/// Human teaching: bridge up, wait for the browser, then run with it observing.
struct LiveTeaching {
  std::shared_ptr<HumanTeacher> teacher = std::make_shared<HumanTeacher>();
  std::unique_ptr<Bridge> bridge;

  void start(EnvKind env, int port, int tick_ms, int connect_timeout_s) {
    BridgeOptions opts;
    opts.port = static_cast<unsigned short>(port);
    opts.tick = std::chrono::milliseconds(tick_ms);
    bridge = std::make_unique<Bridge>(env, teacher, opts);
    bridge->start();
    std::cout << "waiting for a teaching client on ws://127.0.0.1:" << bridge->port() << '\n';
    if (!bridge->wait_for_client(std::chrono::seconds(connect_timeout_s)))
      throw SourceUnavailable("no teaching client connected; refusing to start");
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Interactive imitation learning workbench"};
  app.require_subcommand(1);

  // pretrain
  auto* pre = app.add_subcommand("pretrain", "Pre-train a forward dynamics model on random-policy data");
  std::string pre_env = "cartpole", pre_out;
  std::size_t pre_samples = 0;
  int pre_epochs = 20;
  std::uint64_t pre_seed = 0;
  pre->add_option("--env", pre_env, "cartpole | reacher | lander-discrete | lander-continuous");
  pre->add_option("--samples", pre_samples, "random transitions (environment default when omitted)");
  pre->add_option("--epochs", pre_epochs);
  pre->add_option("--seed", pre_seed);
  pre->add_option("--out", pre_out)->required();

  // teach
  auto* teach = app.add_subcommand("teach", "Teach an agent with a human or oracle teacher");
  std::string t_env = "cartpole", t_agent = "tips", t_teacher = "oracle", t_fdm, t_out, t_csv, t_transitions;
  int t_episodes = -1, t_b = 0, t_ifdm = 0, t_serve = -1, t_tick = 50, t_connect = 120;
  std::uint64_t t_seed = 0;
  double t_e = 0, t_e_fine = 0, t_sigma = 0, t_pf = -1, t_perr = 0, t_lr = 0;
  bool t_two_level = false, t_exhaustive = false;
  teach->add_option("--env", t_env);
  teach->add_option("--agent", t_agent, "dcoach | tips");
  teach->add_option("--teacher", t_teacher, "human | oracle");
  teach->add_option("--episodes", t_episodes);
  teach->add_option("--seed", t_seed);
  teach->add_option("--e", t_e, "error correction constant (coarse level)");
  teach->add_option("--e-fine", t_e_fine, "fine-level correction constant");
  teach->add_option("--b", t_b, "periodic batch update interval");
  teach->add_option("--ifdm-queries", t_ifdm, "TIPS action candidates");
  teach->add_option("--sigma", t_sigma, "Gaussian policy std (continuous actions)");
  teach->add_option("--lr", t_lr, "policy learning rate");
  teach->add_flag("--exhaustive", t_exhaustive, "score every discrete action");
  teach->add_option("--fdm", t_fdm, "pre-trained model from 'pretrain'");
  teach->add_option("--out", t_out, "checkpoint path");
  teach->add_option("--csv", t_csv, "metrics CSV");
  teach->add_option("--transitions", t_transitions, "per-step transition CSV");
  teach->add_option("--serve", t_serve, "bridge port for human teaching");
  teach->add_option("--tick-ms", t_tick, "real-time step interval for human teaching");
  teach->add_option("--connect-timeout", t_connect, "seconds to wait for the teaching client");
  teach->add_option("--p-feedback", t_pf, "oracle intervention probability");
  teach->add_option("--p-error", t_perr, "oracle signal flip probability");
  teach->add_flag("--two-level", t_two_level, "oracle uses fine signals and HOLD");

  // eval
  auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint without updates");
  std::string e_ckpt, e_mode = "uniform", e_values, e_csv;
  int e_episodes = 100;
  double e_hw = -1;
  std::uint64_t e_seed = 0;
  ev->add_option("--ckpt", e_ckpt)->required();
  ev->add_option("--episodes", e_episodes);
  ev->add_option("--init-mode", e_mode, "uniform | fixed");
  ev->add_option("--init-half-width", e_hw);
  ev->add_option("--init-values", e_values, "comma-separated initial state");
  ev->add_option("--seed", e_seed);
  ev->add_option("--csv", e_csv);

  // reinforce
  auto* rf = app.add_subcommand("reinforce", "Resume teaching from fixed initial states");
  std::string r_ckpt, r_values, r_teacher = "oracle", r_out, r_csv;
  int r_episodes = 10, r_serve = -1, r_tick = 50, r_connect = 120;
  rf->add_option("--ckpt", r_ckpt)->required();
  rf->add_option("--init-values", r_values, "states separated by ';'")->required();
  rf->add_option("--episodes", r_episodes);
  rf->add_option("--teacher", r_teacher);
  rf->add_option("--out", r_out)->required();
  rf->add_option("--csv", r_csv);
  rf->add_option("--serve", r_serve);
  rf->add_option("--tick-ms", r_tick);
  rf->add_option("--connect-timeout", r_connect);

  // baseline
  auto* bl = app.add_subcommand("baseline", "DQN baseline");
  std::string b_env = "cartpole", b_csv;
  int b_episodes = 1000;
  double b_gamma = 0.99, b_alpha = 1e-4, b_decay = 0.99941, b_stop = NAN;
  std::uint64_t b_seed = 0;
  bl->add_option("--env", b_env, "cartpole | lander-discrete");
  bl->add_option("--episodes", b_episodes);
  bl->add_option("--gamma", b_gamma);
  bl->add_option("--alpha", b_alpha);
  bl->add_option("--epsilon-decay", b_decay);
  bl->add_option("--seed", b_seed);
  bl->add_option("--stop-at", b_stop, "stop once the evaluation mean reaches this");
  bl->add_option("--csv", b_csv);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*pre) {
      const EnvKind env = env_kind_from_string(pre_env);
      RunConfig defaults = RunConfig::defaults(env, AgentKind::tips);
      Rng rng(pre_seed);
      auto res = pretrain_fdm(env, pre_samples ? pre_samples : defaults.fdm_samples, pre_epochs, defaults.fdm_pretrain,
                              rng, defaults.tips.experience_capacity);
      save_json(pre_out, {{"fdm", res.fdm.to_json()}, {"experience", dump_buffer(res.experience)}});
      std::cout << "saved " << pre_out << '\n';
    } else if (*teach) {
      const EnvKind env = env_kind_from_string(t_env);
      const AgentKind agent = agent_kind_from_string(t_agent);
      if (agent == AgentKind::dqn) throw ConfigError("use the baseline subcommand for DQN");
      RunConfig cfg = RunConfig::defaults(env, agent);
      cfg.teacher = teacher_kind_from_string(t_teacher);
      cfg.seed = t_seed;
      if (t_episodes >= 0) cfg.episodes = t_episodes;
      if (t_e > 0) {
        cfg.dcoach.e = cfg.tips.e_coarse = t_e;
        cfg.dcoach.e_fine = cfg.tips.e_fine = 0.2 * t_e;
      }
      if (t_e_fine > 0) cfg.dcoach.e_fine = cfg.tips.e_fine = t_e_fine;
      if (t_b > 0) cfg.dcoach.b = cfg.tips.b = t_b;
      if (t_ifdm > 0) cfg.tips.ifdm_queries = t_ifdm;
      if (t_lr > 0) cfg.dcoach.train.learning_rate = cfg.tips.policy_train.learning_rate = t_lr;
      cfg.dcoach.sigma = cfg.tips.sigma = t_sigma;
      cfg.tips.exhaustive = t_exhaustive;
      if (t_pf >= 0) cfg.oracle.p_feedback = t_pf;
      cfg.oracle.p_error = t_perr;
      cfg.oracle.two_level = t_two_level;
      cfg.validate();

      std::optional<PretrainResult> fdm;
      if (!t_fdm.empty()) fdm = load_pretrained(t_fdm);

      LiveTeaching live;
      std::shared_ptr<Teacher> teacher;
      if (cfg.teacher == TeacherKind::human) {
        if (t_serve < 0) throw ConfigError("human teaching needs --serve <port>");
        live.start(env, t_serve, t_tick, t_connect);
        teacher = live.teacher;
      } else {
        teacher = make_oracle_teacher(cfg);
      }
      Session session(cfg, teacher, std::move(fdm));
      if (live.bridge) session.set_observer(live.bridge.get());
      std::ofstream transitions;
      if (!t_transitions.empty()) {
        transitions.open(t_transitions);
        session.set_transition_log(&transitions);
      }
      std::vector<EpisodeMetrics> rows;
      for (int i = 0; i < cfg.episodes; ++i) {
        rows.push_back(session.run_teaching_episode());
        print_metrics(rows.back());
      }
      if (!t_csv.empty()) write_metrics_csv(t_csv, rows, cfg.eval_episodes);
      if (!t_out.empty()) session.save_checkpoint(t_out);
    } else if (*ev) {
      Session session = Session::load_checkpoint(e_ckpt, std::make_shared<HumanTeacher>());
      InitSpec init = session.config().eval_init;
      if (e_mode == "fixed") {
        init = InitSpec::fixed(parse_values(e_values));
      } else if (e_mode == "uniform") {
        if (e_hw >= 0) init = InitSpec::uniform(e_hw);
      } else {
        throw ConfigError("unknown init mode: " + e_mode);
      }
      const auto rewards = session.evaluate(e_episodes, init, e_seed);
      double mean = rewards.empty() ? 0.0 : std::accumulate(rewards.begin(), rewards.end(), 0.0) / rewards.size();
      double var = 0.0;
      for (double r : rewards) var += (r - mean) * (r - mean);
      if (rewards.size() > 1) var /= static_cast<double>(rewards.size() - 1);
      std::cout << "episodes " << rewards.size() << "  mean " << mean << "  variance " << var << '\n';
      if (!e_csv.empty()) {
        std::ofstream out(e_csv);
        out << "episode,reward\n";
        out.precision(10);
        for (std::size_t i = 0; i < rewards.size(); ++i) out << i + 1 << ',' << rewards[i] << '\n';
      }
    } else if (*rf) {
      const auto doc = load_json(r_ckpt);
      const RunConfig loaded = run_config_from_json(doc.at("run_config"));
      LiveTeaching live;
      std::shared_ptr<Teacher> teacher;
      if (teacher_kind_from_string(r_teacher) == TeacherKind::human) {
        if (r_serve < 0) throw ConfigError("human teaching needs --serve <port>");
        live.start(loaded.env, r_serve, r_tick, r_connect);
        teacher = live.teacher;
      } else {
        teacher = make_oracle_teacher(loaded);
      }
      Session session = Session::from_checkpoint(doc, teacher);
      if (live.bridge) session.set_observer(live.bridge.get());
      const auto rows = reinforce_train(session, parse_states(r_values), r_episodes);
      for (const auto& m : rows) print_metrics(m);
      if (!r_csv.empty()) write_metrics_csv(r_csv, rows, session.config().eval_episodes);
      session.save_checkpoint(r_out);
    } else if (*bl) {
      RunConfig cfg = RunConfig::defaults(env_kind_from_string(b_env), AgentKind::dqn);
      cfg.episodes = b_episodes;
      cfg.seed = b_seed;
      cfg.dqn.gamma = b_gamma;
      cfg.dqn.alpha = b_alpha;
      cfg.dqn.epsilon_decay = b_decay;
      std::optional<double> stop;
      if (!std::isnan(b_stop)) stop = b_stop;
      const auto res = run_dqn_baseline(cfg, stop);
      for (const auto& m : res.metrics) print_metrics(m);
      if (!b_csv.empty()) write_metrics_csv(b_csv, res.metrics, cfg.eval_episodes);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
