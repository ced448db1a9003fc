#include "autoplay/world.hpp"

#include <sstream>

#include "autoplay/errors.hpp"

namespace autoplay {

nlohmann::json propToJson(const PropValue& v) {
  nlohmann::json j;
  std::visit([&j](const auto& x) { j = x; }, v);
  return j;
}

PropValue propFromJson(const nlohmann::json& j) {
  if (j.is_boolean()) return j.get<bool>();
  if (j.is_number_integer()) return j.get<int64_t>();
  if (j.is_array()) return j.get<std::vector<std::string>>();
  return j.get<std::string>();
}

int64_t propInt(const PropMap& m, const std::string& key, int64_t fallback) {
  auto it = m.find(key);
  if (it == m.end()) return fallback;
  if (const auto* p = std::get_if<int64_t>(&it->second)) return *p;
  return fallback;
}

bool propBool(const PropMap& m, const std::string& key, bool fallback) {
  auto it = m.find(key);
  if (it == m.end()) return fallback;
  if (const auto* p = std::get_if<bool>(&it->second)) return *p;
  return fallback;
}

std::string propStr(const PropMap& m, const std::string& key,
                    const std::string& fallback) {
  auto it = m.find(key);
  if (it == m.end()) return fallback;
  if (const auto* p = std::get_if<std::string>(&it->second)) return *p;
  return fallback;
}

std::vector<std::string> propList(const PropMap& m, const std::string& key) {
  auto it = m.find(key);
  if (it == m.end()) return {};
  if (const auto* p = std::get_if<std::vector<std::string>>(&it->second)) return *p;
  return {};
}

nlohmann::json WorldEntity::toJson() const {
  nlohmann::json props = nlohmann::json::object();
  for (const auto& [k, v] : properties) props[k] = propToJson(v);
  return {{"id", id},
          {"type", entityType},
          {"position", {position.x, position.y}},
          {"timestamp", timestamp},
          {"alive", alive},
          {"properties", props}};
}

WorldEntity WorldEntity::fromJson(const nlohmann::json& j) {
  WorldEntity e;
  e.id = j.at("id").get<std::string>();
  e.entityType = j.at("type").get<std::string>();
  e.position = {j.at("position").at(0).get<int>(), j.at("position").at(1).get<int>()};
  e.timestamp = j.at("timestamp").get<int64_t>();
  e.alive = j.at("alive").get<bool>();
  for (const auto& [k, v] : j.at("properties").items())
    e.properties[k] = propFromJson(v);
  return e;
}

const WorldEntity* WorldModel::find(const std::string& id) const {
  auto it = entities.find(id);
  return it == entities.end() ? nullptr : &it->second;
}

void WorldModel::mergeObservation(const WorldModel& obs) {
  if (obs.timestamp < timestamp)
    throw OutOfOrderObservation("observation timestamp " +
                                std::to_string(obs.timestamp) +
                                " is older than belief timestamp " +
                                std::to_string(timestamp));
  for (const auto& [id, incoming] : obs.entities) {
    auto it = entities.find(id);
    if (it == entities.end()) {
      entities.emplace(id, incoming);
      discoveryOrder.push_back(id);
    } else if (incoming.timestamp >= it->second.timestamp) {
      it->second = incoming;
    }
  }
  timestamp = obs.timestamp;
  agentPosition = obs.agentPosition;
  agentProperties = obs.agentProperties;
  if (agentId.empty()) agentId = obs.agentId;
}

uint64_t fnv1a(const std::string& s) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hexDigest(uint64_t d) {
  static const char* hex = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = hex[d & 0xf];
    d >>= 4;
  }
  return out;
}

namespace {

void encodeProp(std::ostringstream& os, const PropValue& v) {
  if (const auto* b = std::get_if<bool>(&v)) {
    os << (*b ? "T" : "F");
  } else if (const auto* i = std::get_if<int64_t>(&v)) {
    os << *i;
  } else if (const auto* s = std::get_if<std::string>(&v)) {
    os << '"' << *s << '"';
  } else {
    os << '[';
    for (const auto& x : std::get<std::vector<std::string>>(v)) os << x << ';';
    os << ']';
  }
}

}  // namespace

uint64_t WorldModel::digest() const {
  std::ostringstream os;
  os << agentId << '|' << timestamp << '|' << agentPosition.x << ','
     << agentPosition.y << '|';
  for (const auto& [k, v] : agentProperties) {
    os << k << '=';
    encodeProp(os, v);
    os << '|';
  }
  for (const auto& [id, e] : entities) {
    os << id << ':' << e.entityType << ':' << e.position.x << ','
       << e.position.y << ':' << e.timestamp << ':' << (e.alive ? 'a' : 'd')
       << ':';
    for (const auto& [k, v] : e.properties) {
      os << k << '=';
      encodeProp(os, v);
      os << ',';
    }
    os << '|';
  }
  return fnv1a(os.str());
}

nlohmann::json WorldModel::toJson() const {
  nlohmann::json ents = nlohmann::json::array();
  for (const auto& [id, e] : entities) ents.push_back(e.toJson());
  nlohmann::json props = nlohmann::json::object();
  for (const auto& [k, v] : agentProperties) props[k] = propToJson(v);
  return {{"agentId", agentId},
          {"timestamp", timestamp},
          {"agentPosition", {agentPosition.x, agentPosition.y}},
          {"agentProperties", props},
          {"entities", ents},
          {"discoveryOrder", discoveryOrder}};
}

WorldModel WorldModel::fromJson(const nlohmann::json& j) {
  WorldModel m;
  m.agentId = j.at("agentId").get<std::string>();
  m.timestamp = j.at("timestamp").get<int64_t>();
  m.agentPosition = {j.at("agentPosition").at(0).get<int>(),
                     j.at("agentPosition").at(1).get<int>()};
  for (const auto& [k, v] : j.at("agentProperties").items())
    m.agentProperties[k] = propFromJson(v);
  for (const auto& e : j.at("entities"))
    m.entities.emplace(e.at("id").get<std::string>(), WorldEntity::fromJson(e));
  if (j.contains("discoveryOrder"))
    m.discoveryOrder = j.at("discoveryOrder").get<std::vector<std::string>>();
  else
    for (const auto& [id, _] : m.entities) m.discoveryOrder.push_back(id);
  return m;
}

}  // namespace autoplay
