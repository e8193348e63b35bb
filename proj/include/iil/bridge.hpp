#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "iil/session.hpp"
#include "iil/teachers.hpp"

namespace iil {

// ---- Wire messages ---------------------------------------------------------

nlohmann::json hello_message(EnvKind env);
nlohmann::json frame_geometry(EnvKind env, const StateVec& state, const std::vector<double>& last_action);
nlohmann::json frame_message(const StepFrame& frame, std::uint64_t seq);
nlohmann::json episode_end_message(const EpisodeMetrics& m);
nlohmann::json reminder_message(int episode);

/// Problems found in a frame message; empty when it is valid.
std::vector<std::string> validate_frame(const nlohmann::json& msg);

/// Browser key name (ArrowLeft, z, j, ...) to signal; nullopt for unmapped keys.
std::optional<FeedbackSignal> signal_for_key(const std::string& key);

struct KeyEvent {
  FeedbackSignal signal = FeedbackSignal::null;
  bool pressed = false;
  double client_time = 0.0;
};

/// Parses {"kind":"key", "signal"|"key": ..., "pressed": bool}. Throws
/// ConfigError on malformed input.
KeyEvent parse_key_message(const nlohmann::json& msg);

// ---- Server ----------------------------------------------------------------

struct BridgeOptions {
  std::string host = "127.0.0.1";
  unsigned short port = 0;  // 0 picks a free port
  std::chrono::milliseconds tick{50};
  bool wait_for_ack = true;
};

/// WebSocket server for one teaching client. Streams a frame per environment
/// step (throttled to the tick), forwards key events to the human teacher and
/// holds each episode start until the client acknowledges the reminder.
class Bridge final : public SessionObserver {
 public:
  Bridge(EnvKind env, std::shared_ptr<HumanTeacher> teacher, BridgeOptions opts = {});
  ~Bridge() override;
  Bridge(const Bridge&) = delete;
  Bridge& operator=(const Bridge&) = delete;

  /// Binds and starts serving; throws Error when the port is unavailable.
  void start();
  void stop();
  unsigned short port() const;
  bool wait_for_client(std::chrono::milliseconds timeout);

  void on_step(const StepFrame& frame) override;
  void on_episode_end(const EpisodeMetrics& m) override;

  std::uint64_t frames_sent() const;

 private:
  class Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace iil
