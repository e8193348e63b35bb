#pragma once

#include <deque>
#include <vector>

#include <json.hpp>

#include "iil/common.hpp"
#include "iil/envs.hpp"

namespace iil {

struct DemoPair {
  StateVec state;
  ActionVec target_action;
};

struct Transition {
  StateVec state;
  ActionVec action;
  StateVec next_state;
};

/// FIFO store with a hard capacity; pushing into a full buffer evicts the
/// single oldest item.
template <class T>
class BoundedBuffer {
 public:
  explicit BoundedBuffer(std::size_t capacity = 1) : capacity_(capacity) {
    if (capacity_ == 0) throw ConfigError("buffer capacity must be positive");
  }

  void push(T item) {
    items_.push_back(std::move(item));
    if (items_.size() > capacity_) items_.pop_front();
  }

  /// n draws uniformly with replacement.
  std::vector<T> sample(std::size_t n, Rng& rng) const {
    if (items_.empty()) throw EmptyBuffer("cannot sample from an empty buffer");
    std::uniform_int_distribution<std::size_t> pick(0, items_.size() - 1);
    std::vector<T> out;
    out.reserve(n);
    for (std::size_t k = 0; k < n; ++k) out.push_back(items_[pick(rng)]);
    return out;
  }

  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return items_.empty(); }
  void clear() { items_.clear(); }
  const T& operator[](std::size_t i) const { return items_[i]; }
  auto begin() const { return items_.begin(); }
  auto end() const { return items_.end(); }

 private:
  std::size_t capacity_;
  std::deque<T> items_;
};

nlohmann::json to_json(const ActionVec& a);
ActionVec action_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const DemoPair& p);
nlohmann::json to_json(const Transition& t);
DemoPair demo_pair_from_json(const nlohmann::json& doc);
Transition transition_from_json(const nlohmann::json& doc);

template <class T>
nlohmann::json dump_buffer(const BoundedBuffer<T>& buf) {
  nlohmann::json doc;
  doc["capacity"] = buf.capacity();
  auto items = nlohmann::json::array();
  for (const auto& item : buf) items.push_back(to_json(item));
  doc["items"] = std::move(items);
  return doc;
}

BoundedBuffer<DemoPair> load_demo_buffer(const nlohmann::json& doc);
BoundedBuffer<Transition> load_transition_buffer(const nlohmann::json& doc);

}  // namespace iil
