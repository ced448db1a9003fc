#include "autoplay/playtest.hpp"

#include <algorithm>
#include <stdexcept>

#include "autoplay/errors.hpp"

namespace autoplay {

char directionKey(Vec2 from, Vec2 to) {
  if (to == Vec2{from.x, from.y - 1}) return 'w';
  if (to == Vec2{from.x, from.y + 1}) return 's';
  if (to == Vec2{from.x - 1, from.y}) return 'a';
  if (to == Vec2{from.x + 1, from.y}) return 'd';
  throw std::invalid_argument("cells are not 4-adjacent");
}

TargetFn fixedCell(Vec2 cell) {
  return [cell](const AgentContext&) -> std::optional<Vec2> { return cell; };
}

TargetFn believedEntityCell(std::string entityId) {
  return [id = std::move(entityId)](const AgentContext& ctx) -> std::optional<Vec2> {
    const WorldEntity* e = ctx.belief.find(id);
    if (!e) return std::nullopt;
    if (propInt(e->properties, "level", 0) != ctx.currentLevel()) return std::nullopt;
    return e->position;
  };
}

namespace {

std::set<int> monsterCells(const AgentContext& ctx, const NavGraph& nav) {
  std::set<int> out;
  for (const auto& [id, e] : ctx.belief.entities) {
    if (e.entityType != "monster" || !e.alive) continue;
    if (propInt(e.properties, "level", 0) != ctx.currentLevel()) continue;
    out.insert(nav.cellId(e.position));
  }
  return out;
}

// Next cell on the cheapest known path to `target` (or to its cheapest
// walkable 4-neighbour). Monster squares are detoured around when possible.
std::optional<Vec2> nextStepToward(const AgentContext& ctx, Vec2 target,
                                   bool adjacentEnough) {
  const NavGraph* nav = ctx.navHereIfAny();
  if (!nav || !nav->hasGridContext()) return std::nullopt;
  Vec2 me = ctx.belief.agentPosition;
  if (!nav->inBounds(me)) return std::nullopt;
  int src = nav->cellId(me);
  if (!nav->hasNode(src)) return std::nullopt;

  std::vector<int> dsts;
  if (adjacentEnough) {
    for (Vec2 d : kNeighbourOrder) {
      Vec2 c{target.x + d.x, target.y + d.y};
      if (!nav->inBounds(c)) continue;
      int id = nav->cellId(c);
      if (id == src) return std::nullopt;  // already next to the target
      if (nav->hasNode(id) && !nav->isBlocked(id)) dsts.push_back(id);
    }
  } else {
    if (!nav->inBounds(target)) return std::nullopt;
    int id = nav->cellId(target);
    if (id != src && nav->hasNode(id) && !nav->isBlocked(id)) dsts.push_back(id);
  }
  if (dsts.empty()) return std::nullopt;

  std::set<int> avoid = monsterCells(ctx, *nav);
  avoid.erase(src);
  for (int pass = 0; pass < 2; ++pass) {
    std::optional<std::vector<int>> best;
    double bestCost = 0.0;
    for (int dst : dsts) {
      PathResult r = nav->findPathDetail(src, dst, pass == 0 ? &avoid : nullptr);
      if (r.path && r.path->size() >= 2 && (!best || r.cost < bestCost)) {
        best = std::move(r.path);
        bestCost = r.cost;
      }
    }
    if (best) return nav->cellOf((*best)[1]);
    if (avoid.empty()) break;
  }
  return std::nullopt;
}

std::optional<Vec2> nextExploreStep(const AgentContext& ctx) {
  const NavGraph* nav = ctx.navHereIfAny();
  if (!nav || !nav->hasGridContext()) return std::nullopt;
  Vec2 me = ctx.belief.agentPosition;
  if (!nav->inBounds(me)) return std::nullopt;
  int src = nav->cellId(me);
  if (!nav->hasNode(src)) return std::nullopt;
  std::optional<int> tgt = nav->nextExplorationTarget(src);
  if (!tgt || *tgt == src) return std::nullopt;

  std::set<int> avoid = monsterCells(ctx, *nav);
  avoid.erase(src);
  PathResult r = nav->findPathDetail(src, *tgt, &avoid);
  if (!r.path) r = nav->findPathDetail(src, *tgt);
  if (!r.path || r.path->size() < 2) return std::nullopt;
  return nav->cellOf((*r.path)[1]);
}

int64_t agentInt(const AgentContext& ctx, const std::string& key,
                 int64_t fallback = 0) {
  return propInt(ctx.belief.agentProperties, key, fallback);
}

bool bagHas(const AgentContext& ctx, const std::string& type,
            std::string* firstId = nullptr) {
  for (const std::string& id :
       propList(ctx.belief.agentProperties, "bagContents")) {
    const WorldEntity* e = ctx.belief.find(id);
    if (e && e->entityType == type) {
      if (firstId) *firstId = id;
      return true;
    }
  }
  return false;
}

bool bagHasUntried(const AgentContext& ctx, const std::string& type) {
  for (const std::string& id :
       propList(ctx.belief.agentProperties, "bagContents")) {
    const WorldEntity* e = ctx.belief.find(id);
    if (e && e->entityType == type && !ctx.memFlag("tried:" + id)) return true;
  }
  return false;
}

std::optional<Vec2> adjacentMonster(const AgentContext& ctx) {
  for (const auto& [id, e] : ctx.belief.entities) {
    if (e.entityType != "monster" || !e.alive) continue;
    if (propInt(e.properties, "level", 0) != ctx.currentLevel()) continue;
    if (manhattan(ctx.belief.agentPosition, e.position) == 1) return e.position;
  }
  return std::nullopt;
}

Tactic useHeal() {
  return Tactic::action(
      "useHeal",
      [](const AgentContext& ctx) {
        return 2 * agentInt(ctx, "hp") < agentInt(ctx, "hpMax") &&
               bagHas(ctx, "healpotion");
      },
      [](AgentContext&) { return 'e'; });
}

Tactic useRage() {
  return Tactic::action(
      "useRage",
      [](const AgentContext& ctx) {
        return bagHas(ctx, "ragepotion") && adjacentMonster(ctx).has_value() &&
               agentInt(ctx, "rageTurnsLeft") == 0;
      },
      [](AgentContext&) { return 'r'; });
}

Tactic attackAdjacent() {
  return Tactic::action(
      "attackAdjacent",
      [](const AgentContext& ctx) {
        return adjacentMonster(ctx).has_value() && agentInt(ctx, "hp") > 3;
      },
      [](AgentContext& ctx) {
        return directionKey(ctx.belief.agentPosition, *adjacentMonster(ctx));
      });
}

// First still-untried resource of the type: bag items first, then floor
// entities of the current level in discovery order.
std::optional<std::string> chosenResource(const AgentContext& ctx,
                                          const std::string& type) {
  for (const std::string& id :
       propList(ctx.belief.agentProperties, "bagContents")) {
    const WorldEntity* e = ctx.belief.find(id);
    if (e && e->entityType == type && !ctx.memFlag("tried:" + id)) return id;
  }
  for (const std::string& id : ctx.belief.discoveryOrder) {
    const WorldEntity* e = ctx.belief.find(id);
    if (!e || e->entityType != type || !e->alive) continue;
    if (propInt(e->properties, "level", 0) != ctx.currentLevel()) continue;
    if (ctx.memFlag("tried:" + id)) continue;
    return id;
  }
  return std::nullopt;
}

GoalStructure phiGoal(const std::string& name, const SolverSpec& spec) {
  auto pred = [spec](const AgentContext& ctx) {
    const WorldEntity* o = ctx.belief.find(spec.targetId);
    return o && spec.predicate(*o);
  };
  return GoalStructure::goal(name, pred, Tactic::abort(), 1);
}

}  // namespace

bool canReachAdjacent(const AgentContext& ctx, Vec2 target) {
  if (manhattan(ctx.belief.agentPosition, target) == 1) return true;
  return nextStepToward(ctx, target, true).has_value();
}

Tactic stepToward(std::string name, TargetFn target, bool adjacentEnough) {
  auto guard = [target, adjacentEnough](const AgentContext& ctx) {
    std::optional<Vec2> t = target(ctx);
    return t && nextStepToward(ctx, *t, adjacentEnough).has_value();
  };
  auto effect = [target, adjacentEnough](AgentContext& ctx) {
    Vec2 step = *nextStepToward(ctx, *target(ctx), adjacentEnough);
    return directionKey(ctx.belief.agentPosition, step);
  };
  return Tactic::action(std::move(name), std::move(guard), std::move(effect));
}

Tactic exploreStep() {
  return Tactic::action(
      "explore",
      [](const AgentContext& ctx) { return nextExploreStep(ctx).has_value(); },
      [](AgentContext& ctx) {
        return directionKey(ctx.belief.agentPosition, *nextExploreStep(ctx));
      });
}

Tactic bumpTarget(std::string name, TargetFn target,
                  std::function<void(AgentContext&)> onBump) {
  auto guard = [target](const AgentContext& ctx) {
    std::optional<Vec2> t = target(ctx);
    return t && manhattan(ctx.belief.agentPosition, *t) == 1;
  };
  auto effect = [target, onBump](AgentContext& ctx) {
    Vec2 t = *target(ctx);
    if (onBump) onBump(ctx);
    return directionKey(ctx.belief.agentPosition, t);
  };
  return Tactic::action(std::move(name), std::move(guard), std::move(effect));
}

Tactic survivalTactic(const std::string& entityId) {
  return Tactic::firstOf({
      useHeal(),
      useRage(),
      attackAdjacent(),
      stepToward("approach:" + entityId, believedEntityCell(entityId), true),
      exploreStep(),
      Tactic::abort(),
  });
}

GoalStructure entityInCloseRange(const std::string& entityId, int budget) {
  auto pred = [fn = believedEntityCell(entityId)](const AgentContext& ctx) {
    std::optional<Vec2> t = fn(ctx);
    return t && manhattan(ctx.belief.agentPosition, *t) == 1;
  };
  return GoalStructure::goal("closeTo:" + entityId, pred,
                             survivalTactic(entityId), budget);
}

GoalStructure solver(const SolverSpec& spec) {
  if (spec.targetId.empty()) throw std::invalid_argument("empty solver target");
  const std::string type = spec.resourceType;

  // Fetch stage: get an untried resource into the bag.
  auto haveResource = [type](const AgentContext& ctx) {
    return bagHasUntried(ctx, type);
  };
  TargetFn chosenCell = [type](const AgentContext& ctx) -> std::optional<Vec2> {
    std::optional<std::string> id = chosenResource(ctx, type);
    if (!id) return std::nullopt;
    const WorldEntity* e = ctx.belief.find(*id);
    if (!e || !e->alive) return std::nullopt;  // already carried
    return e->position;
  };
  Tactic freeSlot = Tactic::action(
      "freeBagSlot",
      [type](const AgentContext& ctx) {
        int64_t size =
            static_cast<int64_t>(propList(ctx.belief.agentProperties, "bagContents").size());
        return size >= agentInt(ctx, "bagCapacity", 1) &&
               (bagHas(ctx, "healpotion") || bagHas(ctx, "ragepotion"));
      },
      [](AgentContext& ctx) {
        if (agentInt(ctx, "hp") < agentInt(ctx, "hpMax") && bagHas(ctx, "healpotion"))
          return 'e';
        return bagHas(ctx, "ragepotion") ? 'r' : 'e';
      });
  // Standing on the resource without having picked it up (the bag was full
  // on arrival): step aside so the next approach triggers the pickup.
  Tactic stepAside = Tactic::action(
      "stepAside",
      [type, chosenCell](const AgentContext& ctx) {
        std::optional<Vec2> t = chosenCell(ctx);
        return t && *t == ctx.belief.agentPosition;
      },
      [](AgentContext& ctx) -> char {
        const NavGraph* nav = ctx.navHereIfAny();
        Vec2 me = ctx.belief.agentPosition;
        if (nav && nav->hasGridContext()) {
          for (Vec2 d : kNeighbourOrder) {
            Vec2 c{me.x + d.x, me.y + d.y};
            int id = nav->cellId(c);
            if (nav->inBounds(c) && nav->hasNode(id) && !nav->isBlocked(id))
              return directionKey(me, c);
          }
        }
        return 'w';
      });
  GoalStructure fetch = GoalStructure::goal(
      "fetch:" + type, haveResource,
      Tactic::firstOf({useHeal(), useRage(), attackAdjacent(), freeSlot,
                       stepAside, stepToward("goTo:" + type, chosenCell, false),
                       exploreStep(), Tactic::abort()}),
      spec.goalBudget);

  GoalStructure reach = entityInCloseRange(spec.targetId, spec.goalBudget);

  // Application stage: bump the target until the resource we brought is
  // spent (each attempt marks the consumed instance as tried) or the target
  // state already satisfies the predicate.
  auto applied = [spec, type](const AgentContext& ctx) {
    const WorldEntity* o = ctx.belief.find(spec.targetId);
    if (o && spec.predicate(*o)) return true;
    return !bagHasUntried(ctx, type);
  };
  TargetFn targetCell = believedEntityCell(spec.targetId);
  auto markTried = [type](AgentContext& ctx) {
    std::string first;
    if (bagHas(ctx, type, &first)) ctx.setMemFlag("tried:" + first);
  };
  GoalStructure apply = GoalStructure::goal(
      "apply:" + type + ":" + spec.targetId, applied,
      Tactic::firstOf({useHeal(), useRage(),
                       bumpTarget("useOn:" + spec.targetId, targetCell, markTried),
                       stepToward("closeIn:" + spec.targetId, targetCell, true),
                       Tactic::abort()}),
      spec.goalBudget);

  GoalStructure round = GoalStructure::seq(
      {std::move(fetch), std::move(reach), std::move(apply),
       phiGoal("recheck:" + spec.targetId, spec)});
  GoalStructure attempt = GoalStructure::firstOf(
      {phiGoal("phi:" + spec.targetId, spec), std::move(round)});
  return GoalStructure::repeat(std::move(attempt), spec.maxRetries);
}

GoalStructure interacted(const std::string& entityId, int budget) {
  const std::string flag = "interacted:" + entityId;
  auto pred = [flag](const AgentContext& ctx) { return ctx.memFlag(flag); };
  // Only a non-solid target can be entered; for shrines that means cleansed.
  TargetFn enterable = [entityId](const AgentContext& ctx) -> std::optional<Vec2> {
    const WorldEntity* e = ctx.belief.find(entityId);
    if (!e || propBool(e->properties, "solid", false)) return std::nullopt;
    if (propInt(e->properties, "level", 0) != ctx.currentLevel()) return std::nullopt;
    return e->position;
  };
  auto setFlag = [flag](AgentContext& ctx) { ctx.setMemFlag(flag); };
  Tactic tactic = Tactic::firstOf({
      useHeal(),
      useRage(),
      attackAdjacent(),
      bumpTarget("enter:" + entityId, enterable, setFlag),
      stepToward("approach:" + entityId, believedEntityCell(entityId), true),
      exploreStep(),
      Tactic::abort(),
  });
  return GoalStructure::goal("interacted:" + entityId, pred, std::move(tactic),
                             budget);
}

GoalStructure twoShrinePlaytest() {
  auto cleansed = [](const WorldEntity& e) {
    return propBool(e.properties, "cleansed", false);
  };
  SolverSpec first{"P0", "scroll", "SHRINE_0", cleansed};
  SolverSpec last{"P0", "scroll", "SHRINE_1", cleansed};
  return GoalStructure::seq(
      {solver(first), interacted("SHRINE_0"), solver(last)});
}

nlohmann::json OracleViolation::toJson() const {
  return {{"oracle", oracle}, {"stepIndex", stepIndex}, {"detail", detail}};
}

std::vector<TraceOracle> builtinOracles(bool expectMonsters) {
  std::vector<TraceOracle> out;
  out.push_back(
      {"hpPositive", "error",
       [](const TraceStep& s) -> std::optional<std::string> {
         if (s.gameStatus == "running" && s.hp <= 0)
           return "hp " + std::to_string(s.hp) + " in a running game";
         return std::nullopt;
       },
       nullptr});
  out.push_back(
      {"bagWithinCapacity", "error",
       [](const TraceStep& s) -> std::optional<std::string> {
         if (s.bagSize > s.bagCapacity)
           return "bag holds " + std::to_string(s.bagSize) + " of " +
                  std::to_string(s.bagCapacity);
         return std::nullopt;
       },
       nullptr});
  out.push_back(
      {"neverInWall", "error",
       [](const TraceStep& s) -> std::optional<std::string> {
         if (s.onWall)
           return "standing in a wall at (" + std::to_string(s.position.x) +
                  "," + std::to_string(s.position.y) + ")";
         return std::nullopt;
       },
       nullptr});
  if (expectMonsters)
    out.push_back(
        {"eventuallyHurt", "warning", nullptr,
         [](const std::vector<TraceStep>& trace) {
           std::vector<std::pair<int, std::string>> v;
           if (trace.empty()) return v;
           for (const TraceStep& s : trace)
             if (s.hp < s.hpMax) return v;
           v.emplace_back(-1, "health never dropped below its maximum");
           return v;
         }});
  return out;
}

std::vector<OracleViolation> checkTraceOracles(
    const std::vector<TraceStep>& trace,
    const std::vector<TraceOracle>& oracles) {
  std::vector<OracleViolation> out;
  for (const TraceOracle& o : oracles) {
    if (o.stepCheck)
      for (size_t i = 0; i < trace.size(); ++i)
        if (std::optional<std::string> d = o.stepCheck(trace[i]))
          out.push_back({o.name, static_cast<int>(i), *d});
    if (o.traceCheck)
      for (auto& [idx, detail] : o.traceCheck(trace))
        out.push_back({o.name, idx, detail});
  }
  return out;
}

nlohmann::json PlaytestResult::toJson(bool includeTrace) const {
  nlohmann::json j{{"status", finalStatus},
                   {"won", won},
                   {"cycles", cycles},
                   {"score", score}};
  j["oracleViolations"] = nlohmann::json::array();
  for (const OracleViolation& v : oracleViolations)
    j["oracleViolations"].push_back(v.toJson());
  j["assertionViolations"] = nlohmann::json::array();
  for (const AssertionViolation& v : assertionViolations)
    j["assertionViolations"].push_back(v.toJson());
  if (includeTrace) {
    j["trace"] = nlohmann::json::array();
    for (const TraceStep& s : trace)
      j["trace"].push_back({{"turn", s.turn},
                            {"command", std::string(1, s.command)},
                            {"position", {s.position.x, s.position.y}},
                            {"hp", s.hp},
                            {"bagSize", s.bagSize},
                            {"score", s.score},
                            {"level", s.level},
                            {"status", s.gameStatus},
                            {"beliefDigest", hexDigest(s.beliefDigest)}});
  }
  return j;
}

PlaytestResult runShrinePlaytest(const GameConfig& config, uint64_t agentSeed,
                                 int maxCycles) {
  MiniDungeon game(config);
  TestAgent agent("P0", twoShrinePlaytest(), agentSeed);
  AgentStatus st = AgentStatus::Running;
  while (agent.cycles() < maxCycles && st == AgentStatus::Running) {
    try {
      st = agent.deliberate(game);
    } catch (const GameRuleError&) {
      break;  // game ended with the goal unresolved
    }
  }

  PlaytestResult r;
  r.finalStatus = game.status();
  r.won = game.status() == "won";
  r.cycles = agent.cycles();
  r.score = propInt(agent.context().belief.agentProperties, "score", 0);
  r.trace = agent.trace();
  r.oracleViolations =
      checkTraceOracles(r.trace, builtinOracles(config.monstersPerLevel > 0));
  r.assertionViolations = game.violationLog();
  return r;
}

}  // namespace autoplay
