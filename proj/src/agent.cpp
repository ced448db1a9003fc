#include "autoplay/agent.hpp"

#include <stdexcept>

#include "autoplay/errors.hpp"

namespace autoplay {

Tactic Tactic::action(std::string name, Guard guard, Effect effect) {
  Tactic t;
  t.kind_ = Kind::Action;
  t.action_ = {std::move(name), std::move(guard), std::move(effect)};
  return t;
}

Tactic Tactic::anyOf(std::vector<Tactic> children) {
  if (children.empty()) throw std::invalid_argument("ANYof needs children");
  Tactic t;
  t.kind_ = Kind::AnyOf;
  t.children_ = std::move(children);
  return t;
}

Tactic Tactic::firstOf(std::vector<Tactic> children) {
  if (children.empty()) throw std::invalid_argument("FIRSTof needs children");
  Tactic t;
  t.kind_ = Kind::FirstOf;
  t.children_ = std::move(children);
  return t;
}

Tactic Tactic::abort() {
  Tactic t;
  t.kind_ = Kind::Abort;
  return t;
}

namespace {

// Collects the enabled leaf candidates of a tactic in tree order. FIRSTof
// contributes the candidates of its first child that has any.
void collectCandidates(const Tactic& t, const AgentContext& ctx,
                       std::vector<SelectedAction>& out) {
  switch (t.kind()) {
    case Tactic::Kind::Action:
      if (t.primitive().guard(ctx)) out.push_back({false, &t.primitive()});
      break;
    case Tactic::Kind::Abort:
      out.push_back({true, nullptr});
      break;
    case Tactic::Kind::AnyOf:
      for (const Tactic& c : t.children()) collectCandidates(c, ctx, out);
      break;
    case Tactic::Kind::FirstOf:
      for (const Tactic& c : t.children()) {
        size_t before = out.size();
        collectCandidates(c, ctx, out);
        if (out.size() > before) return;
      }
      break;
  }
}

}  // namespace

std::optional<SelectedAction> selectAction(const Tactic& tactic,
                                           const AgentContext& ctx, Rng& rng) {
  std::vector<SelectedAction> candidates;
  collectCandidates(tactic, ctx, candidates);
  if (candidates.empty()) return std::nullopt;
  if (candidates.size() == 1) return candidates[0];
  return candidates[rng.below(candidates.size())];
}

GoalStructure GoalStructure::goal(std::string name, Predicate predicate,
                                  Tactic tactic, int budget) {
  if (budget < 1) throw std::invalid_argument("goal budget must be >= 1");
  GoalStructure g;
  g.kind_ = Kind::Primitive;
  g.name_ = std::move(name);
  g.predicate_ = std::move(predicate);
  g.tactic_ = std::move(tactic);
  g.budgetInit_ = g.budgetLeft_ = budget;
  return g;
}

GoalStructure GoalStructure::seq(std::vector<GoalStructure> children) {
  if (children.empty()) throw std::invalid_argument("SEQ needs children");
  GoalStructure g;
  g.kind_ = Kind::Seq;
  g.name_ = "SEQ";
  g.children_ = std::move(children);
  return g;
}

GoalStructure GoalStructure::firstOf(std::vector<GoalStructure> children) {
  if (children.empty()) throw std::invalid_argument("FIRSTof needs children");
  GoalStructure g;
  g.kind_ = Kind::FirstOf;
  g.name_ = "FIRSTof";
  g.children_ = std::move(children);
  return g;
}

GoalStructure GoalStructure::repeat(GoalStructure child, int maxRetries) {
  if (maxRetries < 0) throw std::invalid_argument("maxRetries must be >= 0");
  GoalStructure g;
  g.kind_ = Kind::Repeat;
  g.name_ = "REPEAT";
  g.children_.push_back(std::move(child));
  g.maxRetries_ = maxRetries;
  return g;
}

void GoalStructure::resetSubtree() {
  status_ = GoalStatus::Pending;
  budgetLeft_ = budgetInit_;
  attemptsUsed_ = 0;
  for (GoalStructure& c : children_) c.resetSubtree();
}

struct GoalEval {
  // Returns the subtree status; fills `current` with the leftmost primitive
  // goal that still needs work.
  static GoalStatus eval(GoalStructure& g, GoalStructure*& current) {
    switch (g.kind_) {
      case GoalStructure::Kind::Primitive:
        if (g.status_ == GoalStatus::Pending ||
            g.status_ == GoalStatus::InProgress) {
          if (!current) {
            g.status_ = GoalStatus::InProgress;
            current = &g;
          }
          return GoalStatus::InProgress;
        }
        return g.status_;

      case GoalStructure::Kind::Seq: {
        for (GoalStructure& c : g.children_) {
          GoalStatus s = eval(c, current);
          if (s == GoalStatus::Failed) return g.status_ = GoalStatus::Failed;
          if (s != GoalStatus::Succeeded) return g.status_ = GoalStatus::InProgress;
        }
        return g.status_ = GoalStatus::Succeeded;
      }

      case GoalStructure::Kind::FirstOf: {
        for (GoalStructure& c : g.children_) {
          GoalStatus s = eval(c, current);
          if (s == GoalStatus::Succeeded) return g.status_ = GoalStatus::Succeeded;
          if (s != GoalStatus::Failed) return g.status_ = GoalStatus::InProgress;
        }
        return g.status_ = GoalStatus::Failed;
      }

      case GoalStructure::Kind::Repeat: {
        GoalStructure& c = g.children_[0];
        GoalStatus s = eval(c, current);
        if (s == GoalStatus::Succeeded) return g.status_ = GoalStatus::Succeeded;
        if (s == GoalStatus::Failed) {
          if (g.attemptsUsed_ < g.maxRetries_) {
            ++g.attemptsUsed_;
            c.resetSubtree();
            s = eval(c, current);
            return g.status_ = (s == GoalStatus::Succeeded ? GoalStatus::Succeeded
                                                          : GoalStatus::InProgress);
          }
          return g.status_ = GoalStatus::Failed;
        }
        return g.status_ = GoalStatus::InProgress;
      }
    }
    return GoalStatus::Failed;  // unreachable
  }
};

GoalEvaluation evaluateGoal(GoalStructure& root) {
  GoalStructure* current = nullptr;
  GoalStatus s = GoalEval::eval(root, current);
  GoalEvaluation out;
  out.current = current;
  out.status = s == GoalStatus::Succeeded ? AgentStatus::Succeeded
               : s == GoalStatus::Failed  ? AgentStatus::Failed
                                          : AgentStatus::Running;
  return out;
}

TestAgent::TestAgent(std::string id, GoalStructure goal, uint64_t seed)
    : id_(std::move(id)), goal_(std::move(goal)), rng_(seed) {
  ctx_.belief.agentId = id_;
}

void absorbObservation(AgentContext& ctx, const WorldModel& obs) {
  ctx.belief.mergeObservation(obs);
  int level = ctx.currentLevel();
  NavGraph& nav = ctx.nav[level];
  if (propInt(obs.agentProperties, "worldWidth", 0) > 0)
    nav.addObservedGeometry(obs);
  // Door passability tracks the latest believed state.
  for (const auto& [_, e] : ctx.belief.entities) {
    if (e.entityType != "door") continue;
    if (static_cast<int>(propInt(e.properties, "level", 0)) != level) continue;
    if (!nav.hasGridContext()) continue;
    int cell = nav.cellId(e.position);
    if (nav.hasNode(cell))
      nav.setBlocked(cell, !propBool(e.properties, "open", false));
  }
}

void TestAgent::absorb(const WorldModel& obs) { absorbObservation(ctx_, obs); }

void TestAgent::recordStep(char command) {
  const PropMap& p = ctx_.belief.agentProperties;
  TraceStep step;
  step.turn = cycleCount_;
  step.command = command;
  step.beliefDigest = ctx_.belief.digest();
  step.position = ctx_.belief.agentPosition;
  step.hp = static_cast<int>(propInt(p, "hp", 0));
  step.hpMax = static_cast<int>(propInt(p, "hpMax", 0));
  step.bagSize = static_cast<int>(propList(p, "bagContents").size());
  step.bagCapacity = static_cast<int>(propInt(p, "bagCapacity", 0));
  step.score = static_cast<int>(propInt(p, "score", 0));
  step.level = ctx_.currentLevel();
  step.gameStatus = propStr(p, "status", "running");
  for (const auto& [_, e] : ctx_.belief.entities) {
    if (e.entityType == "wall" && e.alive && e.position == step.position &&
        static_cast<int>(propInt(e.properties, "level", 0)) == step.level) {
      step.onWall = true;
      break;
    }
  }
  trace_.push_back(std::move(step));
}

AgentStatus TestAgent::deliberate(Environment& env) {
  GoalEvaluation eval = evaluateGoal(goal_);
  if (!eval.current) return eval.status;
  GoalStructure& cur = *eval.current;
  ++cycleCount_;

  WorldModel obs;
  try {
    obs = env.observe(id_);
  } catch (const TransportError&) {
    return eval.status;  // failed cycle, state untouched
  }
  absorb(obs);

  if (cur.predicate_(ctx_)) {
    cur.status_ = GoalStatus::Succeeded;
    return evaluateGoal(goal_).status;
  }

  std::optional<SelectedAction> sel = selectAction(cur.tactic_, ctx_, rng_);
  if (sel && sel->abort) {
    cur.status_ = GoalStatus::Failed;
    return evaluateGoal(goal_).status;
  }

  if (sel) {
    char key = sel->action->effect(ctx_);
    WorldModel after;
    try {
      after = env.command(id_, key);
    } catch (const TransportError&) {
      return evaluateGoal(goal_).status;  // failed cycle
    }
    absorb(after);
    recordStep(key);
    if (cur.predicate_(ctx_)) {
      cur.status_ = GoalStatus::Succeeded;
      return evaluateGoal(goal_).status;
    }
  }

  if (--cur.budgetLeft_ <= 0) cur.status_ = GoalStatus::Failed;
  return evaluateGoal(goal_).status;
}

AgentStatus TestAgent::run(Environment& env, int maxCycles) {
  AgentStatus s = evaluateGoal(goal_).status;
  for (int i = 0; i < maxCycles && s == AgentStatus::Running; ++i)
    s = deliberate(env);
  return s;
}

}  // namespace autoplay
