#include "iil/feedback.hpp"

#include <algorithm>
#include <array>

namespace iil {

namespace {
constexpr std::array<const char*, kSignalCount> kNames{
    "NULL", "UP", "DOWN", "LEFT", "RIGHT", "HOLD", "DO_NOTHING", "FINE_LEFT", "FINE_RIGHT", "FINE_UP", "FINE_DOWN"};
}

std::string to_string(FeedbackSignal s) { return kNames[static_cast<std::size_t>(s)]; }

std::optional<FeedbackSignal> signal_from_string(const std::string& name) {
  for (std::size_t i = 0; i < kNames.size(); ++i)
    if (name == kNames[i]) return static_cast<FeedbackSignal>(i);
  return std::nullopt;
}

bool is_fine(FeedbackSignal s) {
  return s == FeedbackSignal::fine_left || s == FeedbackSignal::fine_right || s == FeedbackSignal::fine_up ||
         s == FeedbackSignal::fine_down;
}

bool is_vertical(FeedbackSignal s) {
  return s == FeedbackSignal::up || s == FeedbackSignal::down || s == FeedbackSignal::fine_up ||
         s == FeedbackSignal::fine_down;
}

bool is_horizontal(FeedbackSignal s) {
  return s == FeedbackSignal::left || s == FeedbackSignal::right || s == FeedbackSignal::fine_left ||
         s == FeedbackSignal::fine_right;
}

FeedbackSignal coarse(FeedbackSignal s) {
  switch (s) {
    case FeedbackSignal::fine_left: return FeedbackSignal::left;
    case FeedbackSignal::fine_right: return FeedbackSignal::right;
    case FeedbackSignal::fine_up: return FeedbackSignal::up;
    case FeedbackSignal::fine_down: return FeedbackSignal::down;
    default: return s;
  }
}

FeedbackSignal opposite(FeedbackSignal s) {
  switch (s) {
    case FeedbackSignal::up: return FeedbackSignal::down;
    case FeedbackSignal::down: return FeedbackSignal::up;
    case FeedbackSignal::left: return FeedbackSignal::right;
    case FeedbackSignal::right: return FeedbackSignal::left;
    case FeedbackSignal::fine_up: return FeedbackSignal::fine_down;
    case FeedbackSignal::fine_down: return FeedbackSignal::fine_up;
    case FeedbackSignal::fine_left: return FeedbackSignal::fine_right;
    case FeedbackSignal::fine_right: return FeedbackSignal::fine_left;
    default: return s;
  }
}

Feedback Feedback::of(std::initializer_list<FeedbackSignal> signals) {
  Feedback f;
  for (auto s : signals) f.add(s);
  return f;
}

bool Feedback::contains(FeedbackSignal s) const {
  return std::find(signals_.begin(), signals_.end(), s) != signals_.end();
}

void Feedback::add(FeedbackSignal s) {
  if (s == FeedbackSignal::null) return;
  remove(s);
  signals_.push_back(s);
}

void Feedback::remove(FeedbackSignal s) { signals_.erase(std::remove(signals_.begin(), signals_.end(), s), signals_.end()); }

FeedbackSignal Feedback::vertical() const {
  for (auto it = signals_.rbegin(); it != signals_.rend(); ++it)
    if (is_vertical(*it)) return *it;
  return FeedbackSignal::null;
}

FeedbackSignal Feedback::horizontal() const {
  for (auto it = signals_.rbegin(); it != signals_.rend(); ++it)
    if (is_horizontal(*it)) return *it;
  return FeedbackSignal::null;
}

bool Feedback::operator==(const Feedback& other) const {
  if (signals_.size() != other.signals_.size()) return false;
  return std::all_of(signals_.begin(), signals_.end(), [&](FeedbackSignal s) { return other.contains(s); });
}

std::string to_string(const Feedback& f) {
  if (f.empty()) return "NULL";
  std::string out;
  for (auto s : f.signals()) {
    if (!out.empty()) out += "+";
    out += to_string(s);
  }
  return out;
}

namespace {
bool is_directional(FeedbackSignal s) { return is_vertical(s) || is_horizontal(s); }
}  // namespace

Feedback applicable_feedback(EnvKind env, const Feedback& fb) {
  const FeedbackSignal latest = fb.latest();
  switch (env) {
    case EnvKind::cartpole: {
      const FeedbackSignal h = fb.horizontal();
      return Feedback(h);
    }
    case EnvKind::reacher: {
      if (latest == FeedbackSignal::hold) return Feedback(latest);
      for (auto it = fb.signals().rbegin(); it != fb.signals().rend(); ++it)
        if (is_directional(*it)) return Feedback(*it);
      if (fb.contains(FeedbackSignal::hold)) return Feedback(FeedbackSignal::hold);
      return {};
    }
    case EnvKind::lander_discrete: {
      for (auto it = fb.signals().rbegin(); it != fb.signals().rend(); ++it)
        if (is_directional(*it) || *it == FeedbackSignal::hold || *it == FeedbackSignal::do_nothing)
          return Feedback(*it);
      return {};
    }
    case EnvKind::lander_continuous: {
      if (latest == FeedbackSignal::hold || latest == FeedbackSignal::do_nothing) return Feedback(latest);
      Feedback out;
      out.add(fb.vertical());
      out.add(fb.horizontal());
      if (out.empty() && (fb.contains(FeedbackSignal::hold) || fb.contains(FeedbackSignal::do_nothing)))
        return Feedback(fb.contains(FeedbackSignal::hold) ? FeedbackSignal::hold : FeedbackSignal::do_nothing);
      return out;
    }
  }
  return {};
}

}  // namespace iil
