#include "iil/buffers.hpp"

namespace iil {

nlohmann::json to_json(const ActionVec& a) {
  return nlohmann::json{{"kind", to_string(a.kind)}, {"values", a.values}};
}

ActionVec action_from_json(const nlohmann::json& doc) {
  ActionVec a;
  const auto kind = doc.at("kind").get<std::string>();
  if (kind == "discrete") {
    a.kind = ActionKind::discrete;
  } else if (kind == "continuous") {
    a.kind = ActionKind::continuous;
  } else {
    throw LoadError("unknown action kind '" + kind + "'");
  }
  a.values = doc.at("values").get<std::vector<double>>();
  return a;
}

nlohmann::json to_json(const DemoPair& p) {
  return nlohmann::json{{"state", p.state}, {"target_action", to_json(p.target_action)}};
}

nlohmann::json to_json(const Transition& t) {
  return nlohmann::json{{"state", t.state}, {"action", to_json(t.action)}, {"next_state", t.next_state}};
}

DemoPair demo_pair_from_json(const nlohmann::json& doc) {
  return DemoPair{doc.at("state").get<StateVec>(), action_from_json(doc.at("target_action"))};
}

Transition transition_from_json(const nlohmann::json& doc) {
  Transition t{doc.at("state").get<StateVec>(), action_from_json(doc.at("action")),
               doc.at("next_state").get<StateVec>()};
  if (t.state.size() != t.next_state.size()) throw LoadError("transition state lengths differ");
  return t;
}

namespace {

template <class T, class F>
BoundedBuffer<T> load_buffer(const nlohmann::json& doc, F&& parse) {
  try {
    BoundedBuffer<T> buf(doc.at("capacity").get<std::size_t>());
    for (const auto& item : doc.at("items")) buf.push(parse(item));
    return buf;
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(std::string("malformed buffer document: ") + e.what());
  }
}

}  // namespace

BoundedBuffer<DemoPair> load_demo_buffer(const nlohmann::json& doc) {
  return load_buffer<DemoPair>(doc, demo_pair_from_json);
}

BoundedBuffer<Transition> load_transition_buffer(const nlohmann::json& doc) {
  return load_buffer<Transition>(doc, transition_from_json);
}

}  // namespace iil
