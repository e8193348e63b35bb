#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "iil/envs.hpp"

namespace iil {

/// Corrective signals. The first seven values keep the keyboard encoding of the
/// original teaching scripts (NULL = 0 ... DO_NOTHING = 6); FINE_* variants are
/// the second, smaller correction level.
enum class FeedbackSignal : std::uint8_t {
  null = 0,
  up = 1,
  down = 2,
  left = 3,
  right = 4,
  hold = 5,
  do_nothing = 6,
  fine_left = 7,
  fine_right = 8,
  fine_up = 9,
  fine_down = 10,
};

inline constexpr int kSignalCount = 11;

std::string to_string(FeedbackSignal s);
std::optional<FeedbackSignal> signal_from_string(const std::string& name);

bool is_fine(FeedbackSignal s);
bool is_vertical(FeedbackSignal s);    // up/down and their fine variants
bool is_horizontal(FeedbackSignal s);  // left/right and their fine variants
/// Same direction at the coarse level (FINE_LEFT -> LEFT); others unchanged.
FeedbackSignal coarse(FeedbackSignal s);
/// Opposite direction at the same level; HOLD, DO_NOTHING and NULL map to themselves.
FeedbackSignal opposite(FeedbackSignal s);

/// Everything the teacher asserts on one step. Several directional keys can be
/// held at once (compound corrections on the continuous lander); `latest` is
/// the most recently asserted one, which single-signal environments use.
class Feedback {
 public:
  Feedback() = default;
  Feedback(FeedbackSignal s) {  // NOLINT(google-explicit-constructor)
    if (s != FeedbackSignal::null) signals_.push_back(s);
  }
  static Feedback of(std::initializer_list<FeedbackSignal> signals);

  bool empty() const { return signals_.empty(); }
  bool contains(FeedbackSignal s) const;
  FeedbackSignal latest() const { return signals_.empty() ? FeedbackSignal::null : signals_.back(); }
  const std::vector<FeedbackSignal>& signals() const { return signals_; }
  void add(FeedbackSignal s);
  void remove(FeedbackSignal s);

  /// Latest vertical / horizontal component, NULL when absent.
  FeedbackSignal vertical() const;
  FeedbackSignal horizontal() const;

  bool operator==(const Feedback& other) const;

 private:
  std::vector<FeedbackSignal> signals_;
};

std::string to_string(const Feedback& f);

/// Which space a learning agent interprets corrective signals in.
enum class AgentMode { action_space, state_space };

/// Keeps the signals a learner on `env` can act on: the latest directional
/// key (both axes at once on the continuous lander), or HOLD / DO_NOTHING where
/// the environment has a stop action. Cart-Pole only uses left/right.
Feedback applicable_feedback(EnvKind env, const Feedback& fb);

}  // namespace iil
