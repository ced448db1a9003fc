#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "autoplay/navgraph.hpp"
#include "autoplay/rng.hpp"
#include "autoplay/world.hpp"

namespace autoplay {

// Everything a guard or effect may consult: the accumulated belief, one
// navigation graph per level grown from observations, and scratch memory for
// bookkeeping such as tried-entity marks.
struct AgentContext {
  WorldModel belief;
  std::map<int, NavGraph> nav;
  PropMap memory;

  int currentLevel() const {
    return static_cast<int>(propInt(belief.agentProperties, "currentLevel", 0));
  }
  NavGraph& navHere() { return nav[currentLevel()]; }
  const NavGraph* navHereIfAny() const {
    auto it = nav.find(currentLevel());
    return it == nav.end() ? nullptr : &it->second;
  }
  bool memFlag(const std::string& key) const { return propBool(memory, key, false); }
  void setMemFlag(const std::string& key) { memory[key] = true; }
};

using Guard = std::function<bool(const AgentContext&)>;
using Effect = std::function<char(AgentContext&)>;
using Predicate = std::function<bool(const AgentContext&)>;

struct PrimitiveAction {
  std::string name;
  Guard guard;
  Effect effect;
};

// Composable action-selection tree: a primitive action with a guard, a
// uniform choice over enabled leaves (ANYof), a left-to-right priority
// choice (FIRSTof), or the distinguished always-enabled abort.
class Tactic {
 public:
  enum class Kind { Action, AnyOf, FirstOf, Abort };

  static Tactic action(std::string name, Guard guard, Effect effect);
  static Tactic anyOf(std::vector<Tactic> children);
  static Tactic firstOf(std::vector<Tactic> children);
  static Tactic abort();

  Kind kind() const { return kind_; }
  const PrimitiveAction& primitive() const { return action_; }
  const std::vector<Tactic>& children() const { return children_; }

 private:
  Kind kind_ = Kind::Abort;
  PrimitiveAction action_;
  std::vector<Tactic> children_;
};

struct SelectedAction {
  bool abort = false;
  const PrimitiveAction* action = nullptr;  // null iff abort
};

// Resolves a tactic against the current context. ANYof draws uniformly over
// all enabled leaf candidates collected recursively; FIRSTof commits to its
// first child that has any enabled candidate (making it independent of the
// generator when its children are primitives); nullopt when nothing is
// enabled. The generator is only consumed when more than one candidate is in
// play.
std::optional<SelectedAction> selectAction(const Tactic& tactic,
                                           const AgentContext& ctx, Rng& rng);

enum class GoalStatus { Pending, InProgress, Succeeded, Failed };
enum class AgentStatus { Running, Succeeded, Failed };

// Goal tree: primitive goals pair a predicate with the tactic meant to make
// it true, under a deliberation-cycle budget. SEQ/FIRSTof/REPEAT combine
// them the usual way; REPEAT resets and re-runs its failed child up to
// maxRetries times.
class GoalStructure {
 public:
  enum class Kind { Primitive, Seq, FirstOf, Repeat };

  static GoalStructure goal(std::string name, Predicate predicate,
                            Tactic tactic, int budget = kDefaultBudget);
  static GoalStructure seq(std::vector<GoalStructure> children);
  static GoalStructure firstOf(std::vector<GoalStructure> children);
  static GoalStructure repeat(GoalStructure child, int maxRetries);

  static constexpr int kDefaultBudget = 150;

  Kind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  GoalStatus status() const { return status_; }
  int budgetLeft() const { return budgetLeft_; }
  int attemptsUsed() const { return attemptsUsed_; }
  const std::vector<GoalStructure>& children() const { return children_; }
  const Predicate& predicate() const { return predicate_; }
  const Tactic& tactic() const { return tactic_; }

 private:
  friend struct GoalEval;
  friend class TestAgent;

  void resetSubtree();

  Kind kind_ = Kind::Primitive;
  std::string name_;
  Predicate predicate_;
  Tactic tactic_ = Tactic::abort();
  int budgetInit_ = kDefaultBudget;
  int budgetLeft_ = kDefaultBudget;
  GoalStatus status_ = GoalStatus::Pending;
  std::vector<GoalStructure> children_;
  int maxRetries_ = 0;
  int attemptsUsed_ = 0;
};

struct GoalEvaluation {
  AgentStatus status = AgentStatus::Running;
  GoalStructure* current = nullptr;  // leftmost in-progress primitive goal
};

// Recomputes statuses bottom-up, performs REPEAT resets, and marks the
// unique current primitive goal in-progress.
GoalEvaluation evaluateGoal(GoalStructure& root);

// Boundary to a running game. Implementations may throw TransportError for
// delivery failures, GameRuleError for rejected commands, CrashError when
// the game itself fails.
class Environment {
 public:
  virtual ~Environment() = default;
  virtual WorldModel observe(const std::string& agentId) = 0;
  virtual WorldModel command(const std::string& agentId, char key) = 0;
};

// Folds one observation into a context: merges the belief, grows the level's
// navigation graph, and refreshes door passability. Shared by TestAgent and
// the exploratory driver.
void absorbObservation(AgentContext& ctx, const WorldModel& obs);

// One line per command the agent sent, with enough of the belief snapshot to
// run post-hoc oracles over the run.
struct TraceStep {
  int64_t turn = 0;  // deliberation cycle index, strictly increasing
  char command = 0;
  uint64_t beliefDigest = 0;
  Vec2 position;
  int hp = 0;
  int hpMax = 0;
  int bagSize = 0;
  int bagCapacity = 0;
  int score = 0;
  int level = 0;
  bool onWall = false;
  std::string gameStatus;
};

class TestAgent {
 public:
  TestAgent(std::string id, GoalStructure goal, uint64_t seed);

  // One deliberation cycle: observe, merge, grow navigation, check the
  // current goal predicate, otherwise select and send one command and charge
  // the goal's budget. Transport errors leave the agent unchanged.
  AgentStatus deliberate(Environment& env);

  // Runs cycles until the goal tree resolves or maxCycles is hit.
  AgentStatus run(Environment& env, int maxCycles);

  const std::string& id() const { return id_; }
  AgentContext& context() { return ctx_; }
  const AgentContext& context() const { return ctx_; }
  GoalStructure& goal() { return goal_; }
  const std::vector<TraceStep>& trace() const { return trace_; }
  int cycles() const { return cycleCount_; }
  Rng& rng() { return rng_; }

 private:
  void absorb(const WorldModel& obs);
  void recordStep(char command);

  std::string id_;
  AgentContext ctx_;
  GoalStructure goal_;
  Rng rng_;
  std::vector<TraceStep> trace_;
  int cycleCount_ = 0;
};

}  // namespace autoplay
