#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "autoplay/agent.hpp"
#include "autoplay/minidungeon.hpp"

namespace autoplay {

// Movement key for a single step between 4-adjacent cells. Throws
// std::invalid_argument otherwise.
char directionKey(Vec2 from, Vec2 to);

// Per-cycle target lookup; nullopt while the target is not yet known.
using TargetFn = std::function<std::optional<Vec2>(const AgentContext&)>;

TargetFn fixedCell(Vec2 cell);
// Believed position of the entity, provided it sits on the agent's current
// level (cross-level navigation is impossible).
TargetFn believedEntityCell(std::string entityId);

// True when the agent stands next to `target` or a path over the known graph
// ends on one of its walkable 4-neighbours.
bool canReachAdjacent(const AgentContext& ctx, Vec2 target);

// One step along the cheapest known path to the target cell, or (with
// adjacentEnough) to its cheapest walkable 4-neighbour. Paths avoid cells
// occupied by living monsters when an alternative exists. Disabled while the
// target is unknown, already satisfied, or unreachable.
Tactic stepToward(std::string name, TargetFn target, bool adjacentEnough);

// One step towards the cheapest reachable frontier; disabled once the level
// holds no reachable unexplored space.
Tactic exploreStep();

// Single keypress into a 4-adjacent target cell (attack, press, interact).
// onBump, when set, runs right before the key is issued.
Tactic bumpTarget(std::string name, TargetFn target,
                  std::function<void(AgentContext&)> onBump = nullptr);

// Priority tactic keeping the agent alive while it works towards `entityId`:
// heal when hurt and holding a potion, rage when cornered, fight adjacent
// monsters while healthy, otherwise navigate towards the target, explore,
// and abort when nothing is left to try.
Tactic survivalTactic(const std::string& entityId);

// Achieved when the agent stands 4-adjacent to the entity's believed
// position; driven by the survival tactic.
GoalStructure entityInCloseRange(const std::string& entityId,
                                 int budget = GoalStructure::kDefaultBudget);

struct SolverSpec {
  std::string agentId;
  std::string resourceType;  // e.g. "scroll"
  std::string targetId;      // entity whose state must change
  std::function<bool(const WorldEntity&)> predicate;  // desired target state
  int maxRetries = 12;
  int goalBudget = GoalStructure::kDefaultBudget;
};

// Repeatedly fetches a not-yet-tried resource of the given type and applies
// it to the target until the predicate holds on the believed target state.
// Resources are tried in-bag first, then in discovery order; each instance
// at most once. Fails when retries run out with the predicate still false.
GoalStructure solver(const SolverSpec& spec);

// Succeeded once the agent deliberately bumps the entity in its changed
// state; for a cleansed shrine that step enters the portal.
GoalStructure interacted(const std::string& entityId,
                         int budget = GoalStructure::kDefaultBudget);

// Cleanse the first-level shrine, take its portal, cleanse the final shrine.
GoalStructure twoShrinePlaytest();

struct OracleViolation {
  std::string oracle;
  int stepIndex = -1;  // -1 for whole-trace oracles
  std::string detail;

  nlohmann::json toJson() const;
};

// Pure check over a recorded run. Either a per-step predicate, a whole-trace
// one, or both.
struct TraceOracle {
  std::string name;
  std::string severity = "error";
  // Returns violation detail, or nullopt when the step is fine.
  std::function<std::optional<std::string>(const TraceStep&)> stepCheck;
  // Whole-trace violations as (stepIndex, detail) pairs.
  std::function<std::vector<std::pair<int, std::string>>(
      const std::vector<TraceStep>&)>
      traceCheck;
};

// Health stays positive while the game runs, the bag never exceeds its
// capacity, the agent never stands in a wall, and (when monsters roam) the
// run eventually takes damage.
std::vector<TraceOracle> builtinOracles(bool expectMonsters);

std::vector<OracleViolation> checkTraceOracles(
    const std::vector<TraceStep>& trace, const std::vector<TraceOracle>& oracles);

struct PlaytestResult {
  bool won = false;
  std::string finalStatus;
  int cycles = 0;
  int64_t score = 0;
  std::vector<OracleViolation> oracleViolations;
  std::vector<AssertionViolation> assertionViolations;
  std::vector<TraceStep> trace;

  nlohmann::json toJson(bool includeTrace = false) const;
};

// Runs the two-shrine campaign with a solo agent on a fresh game.
PlaytestResult runShrinePlaytest(const GameConfig& config, uint64_t agentSeed,
                                 int maxCycles = 4000);

}  // namespace autoplay
