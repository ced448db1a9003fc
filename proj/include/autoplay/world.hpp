#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace autoplay {

struct Vec2 {
  int x = 0;
  int y = 0;

  bool operator==(const Vec2&) const = default;
  auto operator<=>(const Vec2&) const = default;
};

inline int manhattan(Vec2 a, Vec2 b) {
  return std::abs(a.x - b.x) + std::abs(a.y - b.y);
}

inline int chebyshev(Vec2 a, Vec2 b) {
  return std::max(std::abs(a.x - b.x), std::abs(a.y - b.y));
}

// Fixed scan order for 4-neighbourhoods. Everything that iterates neighbours
// (movement effects, access-cell choice, frontier checks) uses this order so
// that runs are reproducible.
inline constexpr Vec2 kNeighbourOrder[4] = {{0, -1}, {-1, 0}, {1, 0}, {0, 1}};

// Scalar-ish property value carried by entities and agents. The string-list
// alternative holds bag contents.
using PropValue = std::variant<bool, int64_t, std::string, std::vector<std::string>>;

using PropMap = std::map<std::string, PropValue>;

nlohmann::json propToJson(const PropValue& v);
PropValue propFromJson(const nlohmann::json& j);

int64_t propInt(const PropMap& m, const std::string& key, int64_t fallback = 0);
bool propBool(const PropMap& m, const std::string& key, bool fallback = false);
std::string propStr(const PropMap& m, const std::string& key,
                    const std::string& fallback = "");
std::vector<std::string> propList(const PropMap& m, const std::string& key);

// One observed game object. `alive == false` marks a tombstone: the object
// was seen destroyed or consumed and is retained for the agent's reasoning.
struct WorldEntity {
  std::string id;
  std::string entityType;
  Vec2 position;
  int64_t timestamp = 0;
  PropMap properties;
  bool alive = true;

  bool operator==(const WorldEntity&) const = default;

  nlohmann::json toJson() const;
  static WorldEntity fromJson(const nlohmann::json& j);
};

// Snapshot (as an observation) or accumulated belief (as agent state).
// Entities never leave the map once entered; newer observations of the same
// id replace the stored record wholesale.
struct WorldModel {
  std::string agentId;
  int64_t timestamp = 0;
  std::map<std::string, WorldEntity> entities;
  Vec2 agentPosition;
  PropMap agentProperties;
  // Entity ids in first-seen order; drives tie-breaking rules that say
  // "first discovered, first tried".
  std::vector<std::string> discoveryOrder;

  bool operator==(const WorldModel&) const = default;

  const WorldEntity* find(const std::string& id) const;

  // Folds an observation into this belief. Entities present in `obs` replace
  // their stored versions (including destroyed ones, which become
  // tombstones); entities absent from `obs` are retained unchanged.
  // Throws OutOfOrderObservation when `obs` is older than the belief.
  void mergeObservation(const WorldModel& obs);

  // Stable content hash over the canonical encoding.
  uint64_t digest() const;

  nlohmann::json toJson() const;
  static WorldModel fromJson(const nlohmann::json& j);
};

uint64_t fnv1a(const std::string& s);
std::string hexDigest(uint64_t d);

}  // namespace autoplay
