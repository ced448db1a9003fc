#include "autoplay/explorer.hpp"

#include <sstream>
#include <stdexcept>

#include "autoplay/errors.hpp"

namespace autoplay {

namespace {

// Hash of the parts of an observation that describe game state. Timestamps
// are excluded on purpose: a frozen game must hash identically turn after
// turn for the stuck oracle to see it.
uint64_t stateDigest(const WorldModel& obs) {
  std::ostringstream os;
  os << obs.agentPosition.x << ',' << obs.agentPosition.y << '|';
  for (const auto& [k, v] : obs.agentProperties)
    os << k << '=' << propToJson(v).dump() << '|';
  for (const auto& [id, e] : obs.entities) {
    os << id << ':' << e.entityType << ':' << e.position.x << ','
       << e.position.y << ':' << (e.alive ? 'a' : 'd') << ':';
    for (const auto& [k, v] : e.properties)
      os << k << '=' << propToJson(v).dump() << ',';
    os << '|';
  }
  return fnv1a(os.str());
}

bool holdingType(const AgentContext& ctx, const std::string& type) {
  for (const std::string& id : propList(ctx.belief.agentProperties, "bagContents")) {
    const WorldEntity* e = ctx.belief.find(id);
    if (e && e->entityType == type) return true;
  }
  return false;
}

GoalStructure interactGoal(const std::string& id, int budget, int nonce) {
  std::string flag = "explored:" + id + ":" + std::to_string(nonce);
  Predicate done = [flag](const AgentContext& c) { return c.memFlag(flag); };
  Tactic tactic = Tactic::firstOf({
      bumpTarget("interact:" + id, believedEntityCell(id),
                 [flag](AgentContext& c) { c.setMemFlag(flag); }),
      stepToward("reach:" + id, believedEntityCell(id), true),
      exploreStep(),
      Tactic::abort(),
  });
  return GoalStructure::goal("interact:" + id, std::move(done),
                             std::move(tactic), budget);
}

}  // namespace

DerivedAction DerivedAction::basic(char k) {
  DerivedAction a;
  a.kind = Kind::BasicCommand;
  a.key = k;
  return a;
}

DerivedAction DerivedAction::compound(std::string targetId, GoalStructure g) {
  DerivedAction a;
  a.kind = Kind::CompoundTactic;
  a.target = std::move(targetId);
  a.goal = std::move(g);
  return a;
}

std::vector<DerivedAction> deriveActions(const AgentContext& ctx,
                                         const ExplorerConfig& cfg, int nonce) {
  std::vector<DerivedAction> out;
  for (char k : {'w', 's', 'a', 'd'}) out.push_back(DerivedAction::basic(k));
  if (holdingType(ctx, "healpotion")) out.push_back(DerivedAction::basic('e'));
  if (holdingType(ctx, "ragepotion")) out.push_back(DerivedAction::basic('r'));

  for (const auto& [id, e] : ctx.belief.entities) {
    if (!e.alive) continue;
    if (!cfg.interactableTypes.count(e.entityType)) continue;
    if (propInt(e.properties, "level", 0) != ctx.currentLevel()) continue;
    if (!canReachAdjacent(ctx, e.position)) continue;
    out.push_back(
        DerivedAction::compound(id, interactGoal(id, cfg.compoundBudget, nonce)));
  }
  return out;
}

const DerivedAction& selectActionASM(const std::vector<DerivedAction>& actions,
                                     const ExplorationHistory& history,
                                     Rng& rng) {
  if (actions.empty())
    throw std::invalid_argument("no actions to select from");
  std::vector<const DerivedAction*> untried;
  for (const DerivedAction& a : actions)
    if (a.kind == DerivedAction::Kind::CompoundTactic &&
        !history.triedTargets.count(a.target))
      untried.push_back(&a);
  if (!untried.empty()) return *untried[rng.below(untried.size())];
  return actions[rng.below(actions.size())];
}

nlohmann::json ExplorationReport::toJson() const {
  nlohmann::json viols = nlohmann::json::array();
  for (const OracleViolation& v : violations) viols.push_back(v.toJson());
  return {{"actions", actions},
          {"uniqueInteractions", uniqueInteractions},
          {"violations", viols},
          {"seed", seed},
          {"crashed", crashed}};
}

ExplorationReport runExploratory(Environment& env, const ExplorerConfig& cfg,
                                 const std::vector<ExplorationOracle>& oracles) {
  if (cfg.budget < 0) throw std::invalid_argument("budget must be >= 0");

  Environment* cur = &env;
  std::unique_ptr<Environment> owned;

  ExplorationReport rep;
  rep.seed = cfg.seed;
  ExplorationHistory hist;
  Rng rng(cfg.seed ^ 0x6578706c6f7265ULL);
  AgentContext ctx;

  uint64_t lastDigest = 0;
  bool havePrev = false;
  int unchanged = 0;

  // Returns false when the run has to stop (crash with no fresh game).
  auto recordCrash = [&](int actionIndex, const char* what) {
    rep.crashed = true;
    rep.violations.push_back({"crash", actionIndex, what});
    if (!cfg.restartOnCrash) return false;
    owned = cfg.restartOnCrash();
    cur = owned.get();
    ctx = AgentContext{};
    havePrev = false;
    unchanged = 0;
    return true;
  };

  auto postAction = [&](int actionIndex) {
    WorldModel obs;
    try {
      obs = cur->observe(cfg.agentId);
    } catch (const CrashError& e) {
      return recordCrash(actionIndex, e.what());
    } catch (const TransportError& e) {
      return recordCrash(actionIndex, e.what());
    }
    absorbObservation(ctx, obs);
    uint64_t d = stateDigest(obs);
    hist.seenStates.insert(d);
    if (havePrev && d == lastDigest) {
      if (++unchanged >= cfg.stuckWindow) {
        rep.violations.push_back(
            {"stuck", actionIndex,
             "state digest unchanged for " + std::to_string(unchanged) +
                 " consecutive actions"});
        unchanged = 0;
      }
    } else {
      unchanged = 0;
    }
    lastDigest = d;
    havePrev = true;
    for (const ExplorationOracle& o : oracles)
      if (auto detail = o.check(obs))
        rep.violations.push_back({o.name, actionIndex, *detail});
    return true;
  };

  for (int a = 0; a < cfg.budget; ++a) {
    try {
      WorldModel obs = cur->observe(cfg.agentId);
      absorbObservation(ctx, obs);
    } catch (const CrashError& e) {
      if (!recordCrash(a, e.what())) break;
      continue;
    } catch (const TransportError& e) {
      if (!recordCrash(a, e.what())) break;
      continue;
    }

    std::vector<DerivedAction> actions = deriveActions(ctx, cfg, a);
    DerivedAction act = selectActionASM(actions, hist, rng);
    ++rep.actions;

    bool alive = true;
    if (act.kind == DerivedAction::Kind::BasicCommand) {
      try {
        cur->command(cfg.agentId, act.key);
      } catch (const GameRuleError&) {
        // A rejected key is a legitimate probe result, not a failure.
      } catch (const CrashError& e) {
        alive = recordCrash(a, e.what());
      } catch (const TransportError& e) {
        alive = recordCrash(a, e.what());
      }
    } else {
      hist.triedTargets.insert(act.target);
      TestAgent probe(cfg.agentId, std::move(act.goal), rng.nextU64());
      probe.context() = std::move(ctx);
      try {
        probe.run(*cur, cfg.compoundBudget + 10);
        ctx = std::move(probe.context());
      } catch (const GameRuleError&) {
        ctx = std::move(probe.context());
      } catch (const CrashError& e) {
        ctx = std::move(probe.context());
        alive = recordCrash(a, e.what());
      }
    }
    if (!alive) break;
    if (!postAction(a)) break;
  }

  rep.uniqueInteractions = static_cast<int>(hist.triedTargets.size());
  return rep;
}

}  // namespace autoplay
