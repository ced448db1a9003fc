#pragma once

// Shared fixtures for the unit tests: a tiny deterministic environment and
// builders for hand-made observations.

#include <algorithm>
#include <string>
#include <vector>

#include "autoplay/agent.hpp"
#include "autoplay/errors.hpp"
#include "autoplay/world.hpp"

namespace testsupport {

using namespace autoplay;

inline WorldEntity makeEntity(std::string id, std::string type, Vec2 pos,
                              int64_t ts, bool alive = true) {
  WorldEntity e;
  e.id = std::move(id);
  e.entityType = std::move(type);
  e.position = pos;
  e.timestamp = ts;
  e.alive = alive;
  return e;
}

inline WorldModel makeObs(int64_t ts, std::vector<WorldEntity> ents,
                          Vec2 agentPos = {0, 0}) {
  WorldModel m;
  m.agentId = "agent";
  m.timestamp = ts;
  m.agentPosition = agentPos;
  for (WorldEntity& e : ents) {
    m.discoveryOrder.push_back(e.id);
    m.entities.emplace(e.id, std::move(e));
  }
  return m;
}

// One-dimensional five-cell corridor. 'a' and 'd' step left/right and
// saturate at the ends; every other key is rejected. Observations carry the
// grid context the navigation layer needs.
class LineWorld : public Environment {
 public:
  int x = 0;
  int64_t turn = 0;
  int commandsSeen = 0;
  int transportFailuresToThrow = 0;

  WorldModel observe(const std::string& agentId) override {
    WorldModel m;
    m.agentId = agentId;
    m.timestamp = turn;
    m.agentPosition = {x, 0};
    m.agentProperties["currentLevel"] = static_cast<int64_t>(0);
    m.agentProperties["worldWidth"] = static_cast<int64_t>(5);
    m.agentProperties["worldHeight"] = static_cast<int64_t>(1);
    m.agentProperties["viewDistance"] = static_cast<int64_t>(4);
    m.agentProperties["status"] = std::string("running");
    return m;
  }

  WorldModel command(const std::string& agentId, char key) override {
    if (transportFailuresToThrow > 0) {
      --transportFailuresToThrow;
      throw TransportError("dropped");
    }
    ++commandsSeen;
    ++turn;
    if (key == 'a')
      x = std::max(0, x - 1);
    else if (key == 'd')
      x = std::min(4, x + 1);
    else
      throw GameRuleError("unknown key");
    return observe(agentId);
  }
};

inline Tactic moveKey(std::string name, char key, Guard guard = nullptr) {
  if (!guard) guard = [](const AgentContext&) { return true; };
  return Tactic::action(std::move(name), std::move(guard),
                        [key](AgentContext&) { return key; });
}

}  // namespace testsupport
