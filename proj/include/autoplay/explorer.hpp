#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "autoplay/agent.hpp"
#include "autoplay/playtest.hpp"

namespace autoplay {

// One executable choice derived from the current belief: either a single
// keypress or a scripted reach-and-interact goal against a named entity.
struct DerivedAction {
  enum class Kind { BasicCommand, CompoundTactic };

  Kind kind = Kind::BasicCommand;
  char key = 0;         // basic commands only
  std::string target;   // compound tactics only: the entity to interact with
  GoalStructure goal;   // compound tactics only: reach the target and bump it

  static DerivedAction basic(char k);
  static DerivedAction compound(std::string targetId, GoalStructure g);
};

// What the driver has already tried and seen, consulted by action selection.
struct ExplorationHistory {
  std::set<std::string> triedTargets;
  std::set<uint64_t> seenStates;
};

// Post-action check over the freshest observation; returns a detail string on
// violation.
struct ExplorationOracle {
  std::string name;
  std::function<std::optional<std::string>(const WorldModel& obs)> check;
};

struct ExplorationReport {
  int actions = 0;
  int uniqueInteractions = 0;
  std::vector<OracleViolation> violations;
  uint64_t seed = 0;
  bool crashed = false;

  nlohmann::json toJson() const;
};

struct ExplorerConfig {
  std::string agentId = "agent";
  int budget = 300;  // counts selected actions; a compound costs one
  uint64_t seed = 17;
  // Entity types worth a dedicated reach-and-interact action.
  std::set<std::string> interactableTypes = {"button", "shrine"};
  // Consecutive unchanged state digests before the stuck oracle fires.
  int stuckWindow = 50;
  // Deliberation budget for one compound tactic.
  int compoundBudget = GoalStructure::kDefaultBudget;
  // When set, a crash swaps in a fresh game (belief restarts, history stays)
  // instead of ending the run.
  std::function<std::unique_ptr<Environment>()> restartOnCrash;
};

// Enumerates the actions available right now: movement keys, item keys that
// currently have something to act on, and one compound per interactable whose
// position is reachable over the known graph. `nonce` uniquifies the memory
// flag the compound's bump sets, so repeat interactions with the same entity
// stay observable.
std::vector<DerivedAction> deriveActions(const AgentContext& ctx,
                                         const ExplorerConfig& cfg,
                                         int nonce = 0);

// Action selection: uniform over compounds whose target is untried; once every
// target has been tried, uniform over everything. Throws std::invalid_argument
// on an empty action set.
const DerivedAction& selectActionASM(const std::vector<DerivedAction>& actions,
                                     const ExplorationHistory& history,
                                     Rng& rng);

// Unscripted run: observe, grow the belief, derive, select, execute, then run
// the built-in crash and stuck oracles plus any custom ones. Returns after
// `cfg.budget` actions, a goal-less dead end is impossible (movement keys are
// always derivable), and a crash either ends the run or swaps in a fresh game
// per cfg.restartOnCrash.
ExplorationReport runExploratory(Environment& env, const ExplorerConfig& cfg,
                                 const std::vector<ExplorationOracle>& oracles = {});

}  // namespace autoplay
