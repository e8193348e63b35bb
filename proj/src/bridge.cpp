#include "iil/bridge.hpp"

#include <cmath>
#include <condition_variable>
#include <deque>
#include <mutex>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

namespace iil {

namespace net = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = net::ip::tcp;

// ---- Messages --------------------------------------------------------------

nlohmann::json hello_message(EnvKind env) {
  return {{"kind", "hello"},
          {"env_kind", to_string(env)},
          {"state_dim", state_dim_of(env)},
          {"action_kind", to_string(action_kind_of(env))}};
}

nlohmann::json frame_geometry(EnvKind env, const StateVec& s, const std::vector<double>& last_action) {
  switch (env) {
    case EnvKind::cartpole: {
      const CartPoleParams p;
      return {{"cart_x", s[0]},
              {"pole_angle", s[2]},
              {"pole_length", 2.0 * p.half_pole_length},
              {"track_limit", p.position_limit}};
    }
    case EnvKind::reacher: {
      const auto [t1, t2] = reacher_joint_angles(s);
      const double ex = kReacherLink1 * std::cos(t1), ey = kReacherLink1 * std::sin(t1);
      const Point2 tip = reacher_end_effector(s);
      const ReacherParams p;
      return {{"segments", {{{0.0, 0.0}, {ex, ey}}, {{ex, ey}, {tip.x, tip.y}}}}, {"target", {p.target_x, p.target_y}}};
    }
    case EnvKind::lander_discrete:
    case EnvKind::lander_continuous: {
      const Lander lander(env == EnvKind::lander_continuous);
      EngineCommand cmd;
      if (last_action.size() == lander.action_dim()) {
        cmd = lander.decode(ActionVec{lander.action_kind(), last_action});
      }
      return {{"body", {{"x", s[0]}, {"y", s[1]}, {"angle", s[4]}}},
              {"legs", {s[6] > 0.0, s[7] > 0.0}},
              {"flames", {{"main", cmd.main}, {"side", cmd.side}}},
              {"pad_half_width", lander.params().pad_half_width}};
    }
  }
  return nlohmann::json::object();
}

nlohmann::json frame_message(const StepFrame& f, std::uint64_t seq) {
  return {{"kind", "frame"},
          {"seq", seq},
          {"env_kind", to_string(f.env)},
          {"episode", f.episode},
          {"step", f.step},
          {"state", f.state},
          {"reward_so_far", f.reward_so_far},
          {"mode", to_string(f.mode)},
          {"geometry", frame_geometry(f.env, f.state, f.last_action)}};
}

nlohmann::json episode_end_message(const EpisodeMetrics& m) {
  return {{"kind", "episode-end"},
          {"metrics",
           {{"episode", m.episode_index},
            {"teaching_reward", m.teaching_reward},
            {"feedback_rate", m.feedback_rate},
            {"eval_mean_reward", m.eval_mean_reward},
            {"eval_rewards", m.eval_rewards}}}};
}

nlohmann::json reminder_message(int episode) { return {{"kind", "reminder"}, {"episode", episode}}; }

std::vector<std::string> validate_frame(const nlohmann::json& m) {
  std::vector<std::string> bad;
  auto need = [&](const char* key, auto pred, const char* what) {
    if (!m.contains(key) || !pred(m.at(key))) bad.push_back(std::string(key) + " must be " + what);
  };
  if (!m.is_object()) return {"frame must be an object"};
  need("kind", [](const auto& v) { return v.is_string() && v == "frame"; }, "\"frame\"");
  need("seq", [](const auto& v) { return v.is_number_unsigned(); }, "a nonnegative integer");
  need("episode", [](const auto& v) { return v.is_number_integer() && v.template get<long>() >= 1; }, "a positive integer");
  need("step", [](const auto& v) { return v.is_number_integer() && v.template get<long>() >= 0; }, "a nonnegative integer");
  need("reward_so_far", [](const auto& v) { return v.is_number(); }, "a number");
  need("mode", [](const auto& v) { return v.is_string() && (v == "teaching" || v == "evaluating" || v == "paused"); },
       "teaching, evaluating or paused");
  need("geometry", [](const auto& v) { return v.is_object(); }, "an object");

  std::optional<EnvKind> env;
  if (m.contains("env_kind") && m.at("env_kind").is_string()) {
    try {
      env = env_kind_from_string(m.at("env_kind").get<std::string>());
    } catch (const Error&) {
    }
  }
  if (!env) {
    bad.push_back("env_kind must name an environment");
    return bad;
  }
  if (!m.contains("state") || !m.at("state").is_array() || m.at("state").size() != state_dim_of(*env)) {
    bad.push_back("state must be an array of length " + std::to_string(state_dim_of(*env)));
  } else {
    for (const auto& v : m.at("state"))
      if (!v.is_number()) {
        bad.push_back("state entries must be numbers");
        break;
      }
  }
  if (m.contains("geometry") && m.at("geometry").is_object()) {
    const auto& g = m.at("geometry");
    std::vector<const char*> keys;
    switch (*env) {
      case EnvKind::cartpole: keys = {"cart_x", "pole_angle", "pole_length", "track_limit"}; break;
      case EnvKind::reacher: keys = {"segments", "target"}; break;
      default: keys = {"body", "legs", "flames", "pad_half_width"}; break;
    }
    for (const char* k : keys)
      if (!g.contains(k)) bad.push_back(std::string("geometry lacks ") + k);
  }
  return bad;
}

std::optional<FeedbackSignal> signal_for_key(const std::string& key) {
  static const std::vector<std::pair<std::string, FeedbackSignal>> map{
      {"ArrowUp", FeedbackSignal::up},          {"ArrowDown", FeedbackSignal::down},
      {"ArrowLeft", FeedbackSignal::left},      {"ArrowRight", FeedbackSignal::right},
      {"z", FeedbackSignal::hold},              {"Z", FeedbackSignal::hold},
      {"x", FeedbackSignal::do_nothing},        {"X", FeedbackSignal::do_nothing},
      {"j", FeedbackSignal::fine_left},         {"J", FeedbackSignal::fine_left},
      {"l", FeedbackSignal::fine_right},        {"L", FeedbackSignal::fine_right},
      {"i", FeedbackSignal::fine_up},           {"I", FeedbackSignal::fine_up},
      {"k", FeedbackSignal::fine_down},         {"K", FeedbackSignal::fine_down}};
  for (const auto& [k, s] : map)
    if (k == key) return s;
  return std::nullopt;
}

KeyEvent parse_key_message(const nlohmann::json& m) {
  if (!m.is_object() || m.value("kind", "") != "key") throw ConfigError("not a key message");
  if (!m.contains("pressed") || !m.at("pressed").is_boolean()) throw ConfigError("key message needs a boolean 'pressed'");
  KeyEvent ev;
  ev.pressed = m.at("pressed").get<bool>();
  if (m.contains("client_time") && m.at("client_time").is_number()) ev.client_time = m.at("client_time").get<double>();
  std::optional<FeedbackSignal> sig;
  if (m.contains("signal") && m.at("signal").is_string())
    sig = signal_from_string(m.at("signal").get<std::string>());
  else if (m.contains("key") && m.at("key").is_string())
    sig = signal_for_key(m.at("key").get<std::string>());
  if (!sig || *sig == FeedbackSignal::null) throw ConfigError("key message names no valid signal");
  ev.signal = *sig;
  return ev;
}

// ---- Server ----------------------------------------------------------------

class Bridge::Impl {
 public:
  Impl(EnvKind env, std::shared_ptr<HumanTeacher> teacher, BridgeOptions opts)
      : env_(env), teacher_(std::move(teacher)), opts_(std::move(opts)), acceptor_(ioc_) {}

  ~Impl() { stop(); }

  void start() {
    boost::system::error_code ec;
    const tcp::endpoint ep(net::ip::make_address(opts_.host, ec), opts_.port);
    if (ec) throw Error("bad bridge host: " + opts_.host);
    acceptor_.open(ep.protocol(), ec);
    if (!ec) acceptor_.set_option(net::socket_base::reuse_address(true), ec);
    if (!ec) acceptor_.bind(ep, ec);
    if (!ec) acceptor_.listen(net::socket_base::max_listen_connections, ec);
    if (ec) throw Error("cannot listen on port " + std::to_string(opts_.port) + ": " + ec.message());
    port_ = acceptor_.local_endpoint().port();
    teacher_->set_episode_hook([this](int episode) { remind(episode); });
    do_accept();
    thread_ = std::thread([this] { ioc_.run(); });
  }

  void stop() {
    if (!thread_.joinable()) return;
    net::post(ioc_, [this] {
      boost::system::error_code ec;
      acceptor_.close(ec);
      if (ws_) ws_->next_layer().close(ec);
    });
    {
      std::lock_guard<std::mutex> lock(mu_);
      stopping_ = true;
    }
    cv_.notify_all();
    ioc_.stop();
    thread_.join();
    teacher_->set_episode_hook(nullptr);
    teacher_->set_connected(false);
  }

  unsigned short port() const { return port_; }

  bool wait_for_client(std::chrono::milliseconds timeout) {
    std::unique_lock<std::mutex> lock(mu_);
    return cv_.wait_for(lock, timeout, [this] { return connected_; });
  }

  void send(std::string text) {
    net::post(ioc_, [this, text = std::move(text)]() mutable {
      if (!ws_) return;
      outbox_.push_back(std::move(text));
      if (outbox_.size() == 1) do_write();
    });
  }

  void on_step(const StepFrame& frame) {
    std::uint64_t seq;
    {
      std::lock_guard<std::mutex> lock(mu_);
      seq = frames_++;
    }
    send(frame_message(frame, seq).dump());
    if (frame.mode != FrameMode::paused) std::this_thread::sleep_for(opts_.tick);
  }

  void on_episode_end(const EpisodeMetrics& m) { send(episode_end_message(m).dump()); }

  std::uint64_t frames_sent() const {
    std::lock_guard<std::mutex> lock(mu_);
    return frames_;
  }

 private:
  void remind(int episode) {
    std::unique_lock<std::mutex> lock(mu_);
    cv_.wait(lock, [this] { return connected_ || stopping_; });
    if (stopping_) return;
    const std::uint64_t before = acks_;
    lock.unlock();
    send(reminder_message(episode).dump());
    if (!opts_.wait_for_ack) return;
    lock.lock();
    cv_.wait(lock, [&] { return acks_ > before || stopping_; });
  }

  void do_accept() {
    acceptor_.async_accept([this](boost::system::error_code ec, tcp::socket sock) {
      if (ec) return;
      ws_ = std::make_unique<websocket::stream<tcp::socket>>(std::move(sock));
      ws_->async_accept([this](boost::system::error_code ec2) {
        if (ec2) {
          ws_.reset();
          do_accept();
          return;
        }
        outbox_.clear();
        outbox_.push_back(hello_message(env_).dump());
        do_write();
        {
          std::lock_guard<std::mutex> lock(mu_);
          connected_ = true;
        }
        teacher_->set_connected(true);
        cv_.notify_all();
        do_read();
      });
    });
  }

  void do_read() {
    ws_->async_read(rbuf_, [this](boost::system::error_code ec, std::size_t) {
      if (ec) {
        disconnect();
        return;
      }
      const std::string text = beast::buffers_to_string(rbuf_.data());
      rbuf_.consume(rbuf_.size());
      handle(text);
      do_read();
    });
  }

  void do_write() {
    ws_->text(true);
    ws_->async_write(net::buffer(outbox_.front()), [this](boost::system::error_code ec, std::size_t) {
      if (ec) return;  // the pending read reports the disconnect
      outbox_.pop_front();
      if (!outbox_.empty()) do_write();
    });
  }

  void handle(const std::string& text) {
    nlohmann::json msg = nlohmann::json::parse(text, nullptr, false);
    if (msg.is_discarded() || !msg.is_object()) return;
    const std::string kind = msg.value("kind", "");
    if (kind == "key") {
      try {
        const KeyEvent ev = parse_key_message(msg);
        teacher_->push_key(ev.signal, ev.pressed);
      } catch (const ConfigError&) {
      }
    } else if (kind == "ack") {
      {
        std::lock_guard<std::mutex> lock(mu_);
        ++acks_;
      }
      cv_.notify_all();
    }
  }

  void disconnect() {
    {
      std::lock_guard<std::mutex> lock(mu_);
      connected_ = false;
    }
    teacher_->set_connected(false);
    cv_.notify_all();
    ws_.reset();
    outbox_.clear();
    do_accept();
  }

  EnvKind env_;
  std::shared_ptr<HumanTeacher> teacher_;
  BridgeOptions opts_;
  net::io_context ioc_;
  tcp::acceptor acceptor_;
  std::thread thread_;
  unsigned short port_ = 0;

  // io-thread only
  std::unique_ptr<websocket::stream<tcp::socket>> ws_;
  beast::flat_buffer rbuf_;
  std::deque<std::string> outbox_;

  mutable std::mutex mu_;
  std::condition_variable cv_;
  bool connected_ = false;
  bool stopping_ = false;
  std::uint64_t acks_ = 0;
  std::uint64_t frames_ = 0;
};

Bridge::Bridge(EnvKind env, std::shared_ptr<HumanTeacher> teacher, BridgeOptions opts)
    : impl_(std::make_unique<Impl>(env, std::move(teacher), std::move(opts))) {}

Bridge::~Bridge() = default;

void Bridge::start() { impl_->start(); }
void Bridge::stop() { impl_->stop(); }
unsigned short Bridge::port() const { return impl_->port(); }
bool Bridge::wait_for_client(std::chrono::milliseconds timeout) { return impl_->wait_for_client(timeout); }
void Bridge::on_step(const StepFrame& frame) { impl_->on_step(frame); }
void Bridge::on_episode_end(const EpisodeMetrics& m) { impl_->on_episode_end(m); }
std::uint64_t Bridge::frames_sent() const { return impl_->frames_sent(); }

}  // namespace iil
