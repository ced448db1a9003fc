#include "autoplay/mbt.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

#include "autoplay/errors.hpp"
#include "autoplay/levelgen.hpp"
#include "autoplay/playtest.hpp"
#include "autoplay/rng.hpp"

namespace autoplay {

int defaultMaxTestLength(const Efsm& efsm) {
  int t = static_cast<int>(efsm.transitions.size());
  return std::clamp(2 * t, 2, 200);
}

namespace {

// Generations without archive growth before a population is re-seeded from
// fresh random walks. Mutation only probes near the current lineages; the
// re-seed restores global exploration once local search has gone quiet.
constexpr int kStagnantGenerations = 10;

// Per-state transition lists, built once per search run.
struct SearchIndex {
  std::vector<std::vector<int>> outgoing;
  std::vector<std::vector<int>> doorCrossFrom;
};

SearchIndex buildIndex(const Efsm& e) {
  SearchIndex idx;
  idx.outgoing.assign(e.stateCount(), {});
  idx.doorCrossFrom.assign(e.stateCount(), {});
  for (int i = 0; i < static_cast<int>(e.transitions.size()); ++i) {
    idx.outgoing[e.transitions[i].src].push_back(i);
    if (e.transitions[i].kind == TransitionKind::DoorCross)
      idx.doorCrossFrom[e.transitions[i].src].push_back(i);
  }
  return idx;
}

void computeFacts(const Efsm& e, const SearchIndex& idx, const TestCase& test,
                  WalkFacts& f, std::vector<bool>& doors) {
  int nStates = e.stateCount();
  int nTrans = static_cast<int>(e.transitions.size());
  f.prefixLength = 0;
  f.visited.assign(nStates, false);
  f.visitedList.clear();
  f.fired.assign(nTrans, false);
  f.guardOpenAtSrc.assign(nTrans, false);
  doors.assign(e.variables.size(), false);

  int state = e.initialState;
  auto visit = [&](int s) {
    if (!f.visited[s]) {
      f.visited[s] = true;
      f.visitedList.push_back(s);
    }
    for (int t : idx.doorCrossFrom[s])
      if (doors[e.transitions[t].guardDoor]) f.guardOpenAtSrc[t] = true;
  };
  visit(state);
  for (int g : test) {
    if (g < 0 || g >= nTrans) break;
    const EfsmTransition& t = e.transitions[g];
    if (t.src != state) break;
    if (t.kind == TransitionKind::DoorCross && !doors[t.guardDoor]) break;
    for (int d : t.updateDoors) doors[d] = !doors[d];
    state = t.dst;
    f.fired[g] = true;
    ++f.prefixLength;
    visit(state);
  }
}

TestCase randomWalk(const Efsm& e, const SearchIndex& idx, Rng& rng, int maxLen,
                    std::vector<bool>& doors, std::vector<int>& enabled) {
  doors.assign(e.variables.size(), false);
  TestCase t;
  t.reserve(maxLen);
  int state = e.initialState;
  for (int i = 0; i < maxLen; ++i) {
    enabled.clear();
    for (int g : idx.outgoing[state]) {
      const EfsmTransition& tr = e.transitions[g];
      if (tr.kind == TransitionKind::DoorCross && !doors[tr.guardDoor]) continue;
      enabled.push_back(g);
    }
    if (enabled.empty()) break;
    int g = enabled[rng.below(enabled.size())];
    const EfsmTransition& tr = e.transitions[g];
    for (int d : tr.updateDoors) doors[d] = !doors[d];
    state = tr.dst;
    t.push_back(g);
  }
  return t;
}

// Per-position mutation at rate 1/length: replace, drop, or insert a step.
// Steps are drawn from the transitions enabled at that point of the walk, and
// parent steps the edited walk can no longer take are skipped, so offspring
// are feasible end to end and keep most of their length after an edit. An
// extra end slot (same rate) lets walks grow past their parent.
TestCase mutate(const Efsm& e, const SearchIndex& idx, const TestCase& parent,
                int maxLen, Rng& rng, std::vector<bool>& doors,
                std::vector<int>& enabled) {
  doors.assign(e.variables.size(), false);
  int state = e.initialState;
  TestCase out;
  out.reserve(parent.size() + 2);
  double p = 1.0 / static_cast<double>(std::max<size_t>(1, parent.size()));
  bool changed = false;

  auto enabledNow = [&]() {
    enabled.clear();
    for (int g : idx.outgoing[state]) {
      const EfsmTransition& tr = e.transitions[g];
      if (tr.kind == TransitionKind::DoorCross && !doors[tr.guardDoor]) continue;
      enabled.push_back(g);
    }
    return !enabled.empty();
  };
  auto apply = [&](int g) {
    const EfsmTransition& tr = e.transitions[g];
    for (int d : tr.updateDoors) doors[d] = !doors[d];
    state = tr.dst;
    out.push_back(g);
  };
  auto chains = [&](int g) {
    const EfsmTransition& tr = e.transitions[g];
    return tr.src == state &&
           (tr.kind != TransitionKind::DoorCross || doors[tr.guardDoor]);
  };

  for (size_t i = 0;
       i < parent.size() && static_cast<int>(out.size()) < maxLen; ++i) {
    if (rng.chance(p)) {
      changed = true;
      uint64_t op = rng.below(3);
      if (op == 0) {  // replace parent[i]
        if (enabledNow()) apply(enabled[rng.below(enabled.size())]);
        continue;
      }
      if (op == 1) continue;  // drop parent[i]
      // insert before parent[i], then fall through to the copy
      if (enabledNow()) apply(enabled[rng.below(enabled.size())]);
      if (static_cast<int>(out.size()) >= maxLen) break;
    }
    if (!chains(parent[i])) continue;
    apply(parent[i]);
  }
  if ((rng.chance(p) || !changed) && static_cast<int>(out.size()) < maxLen &&
      enabledNow())
    apply(enabled[rng.below(enabled.size())]);
  return out;
}

}  // namespace

WalkFacts walkFacts(const Efsm& efsm, const TestCase& test) {
  WalkFacts f;
  std::vector<bool> doors;
  computeFacts(efsm, buildIndex(efsm), test, f, doors);
  return f;
}

std::vector<int> minDistToStates(const Efsm& efsm,
                                 const std::vector<std::vector<int>>& dist,
                                 const WalkFacts& facts) {
  std::vector<int> md(efsm.stateCount(), Efsm::kUnreachable);
  for (int s : facts.visitedList) {
    const std::vector<int>& row = dist[s];
    for (size_t v = 0; v < md.size(); ++v)
      if (row[v] < md[v]) md[v] = row[v];
  }
  return md;
}

double transitionObjective(const Efsm& efsm, const std::vector<int>& md,
                           const WalkFacts& facts, int transition) {
  if (facts.fired[transition]) return 0.0;
  const EfsmTransition& t = efsm.transitions[transition];
  double approach = facts.visited[t.src]
                        ? 1.0
                        : static_cast<double>(md[t.src]);
  double bd = 0.0;
  if (t.kind == TransitionKind::DoorCross)
    bd = facts.guardOpenAtSrc[transition] ? 0.0 : 1.0;
  return approach + bd / (bd + 1.0);
}

TestSuite generateRandom(const Efsm& efsm, uint64_t seed, int budget,
                         int maxTestLength) {
  if (budget < 1) throw std::invalid_argument("budget must be >= 1");
  if (maxTestLength <= 0) maxTestLength = defaultMaxTestLength(efsm);
  TestSuite suite{"random", seed, budget, 0, efsm.digest(), {}};
  int nTrans = static_cast<int>(efsm.transitions.size());
  if (nTrans == 0) return suite;

  SearchIndex idx = buildIndex(efsm);
  Rng rng(seed ^ 0x72616e646f6dULL);
  std::vector<bool> covered(nTrans, false);
  int coveredCount = 0;
  std::vector<bool> doors;
  std::vector<int> enabled;
  while (suite.evaluationsUsed < budget && coveredCount < nTrans) {
    TestCase t = randomWalk(efsm, idx, rng, maxTestLength, doors, enabled);
    ++suite.evaluationsUsed;
    bool novel = false;
    for (int g : t)
      if (!covered[g]) {
        covered[g] = true;
        ++coveredCount;
        novel = true;
      }
    if (novel) suite.tests.push_back(std::move(t));
  }
  return suite;
}

TestSuite generateMuPlusLambda(const Efsm& efsm, uint64_t seed, int mu,
                               int lambda, int budget, int maxTestLength) {
  if (mu < 1 || lambda < 1)
    throw std::invalid_argument("mu and lambda must be >= 1");
  if (budget < 1) throw std::invalid_argument("budget must be >= 1");
  if (maxTestLength <= 0) maxTestLength = defaultMaxTestLength(efsm);
  TestSuite suite{"mulambda", seed, budget, 0, efsm.digest(), {}};
  int nTrans = static_cast<int>(efsm.transitions.size());
  if (nTrans == 0) return suite;

  SearchIndex idx = buildIndex(efsm);
  Rng rng(seed ^ 0x6d756c616d626461ULL);
  std::vector<bool> archCovered(nTrans, false);
  int archCount = 0;
  std::vector<bool> doors;
  std::vector<int> enabled;

  struct Ind {
    TestCase genes;
    WalkFacts facts;
    // Archive-novel transitions fired, scored when the individual was
    // evaluated (banking immediately consumes the novelty, so scoring later
    // would read zero for everyone).
    int novelty = 0;
  };

  // Bank the prefix up to the last archive-novel step, then mark it covered.
  auto bank = [&](const Ind& ind) {
    int lastNovel = -1;
    for (int i = 0; i < static_cast<int>(ind.genes.size()); ++i)
      if (!archCovered[ind.genes[i]]) lastNovel = i;
    if (lastNovel < 0) return;
    TestCase minimized(ind.genes.begin(), ind.genes.begin() + lastNovel + 1);
    for (int g : minimized)
      if (!archCovered[g]) {
        archCovered[g] = true;
        ++archCount;
      }
    suite.tests.push_back(std::move(minimized));
  };

  auto evaluate = [&](Ind& ind) {
    computeFacts(efsm, idx, ind.genes, ind.facts, doors);
    ind.genes.resize(ind.facts.prefixLength);
    ind.novelty = 0;
    for (int t = 0; t < nTrans; ++t)
      if (ind.facts.fired[t] && !archCovered[t]) ++ind.novelty;
    ++suite.evaluationsUsed;
    bank(ind);
  };

  std::vector<Ind> pop;
  auto seedPopulation = [&] {
    pop.clear();
    for (int i = 0;
         i < mu && suite.evaluationsUsed < budget && archCount < nTrans; ++i) {
      Ind ind;
      ind.genes = randomWalk(efsm, idx, rng, maxTestLength, doors, enabled);
      evaluate(ind);
      pop.push_back(std::move(ind));
    }
  };
  seedPopulation();

  int stagnantGens = 0;
  while (!pop.empty() && suite.evaluationsUsed < budget && archCount < nTrans) {
    int archBefore = archCount;
    std::vector<Ind> combined = pop;
    for (int j = 0; j < lambda && suite.evaluationsUsed < budget; ++j) {
      Ind child;
      child.genes = mutate(efsm, idx, pop[rng.below(pop.size())].genes,
                           maxTestLength, rng, doors, enabled);
      evaluate(child);
      combined.push_back(std::move(child));
      if (archCount >= nTrans) break;
    }
    std::stable_sort(combined.begin(), combined.end(),
                     [](const Ind& a, const Ind& b) {
                       if (a.novelty != b.novelty) return a.novelty > b.novelty;
                       return a.genes.size() < b.genes.size();
                     });
    combined.resize(std::min<size_t>(mu, combined.size()));
    pop = std::move(combined);
    // Mutation only probes near the current lineages; when the archive stops
    // growing, re-seed from fresh random walks (archive and budget persist).
    stagnantGens = archCount > archBefore ? 0 : stagnantGens + 1;
    if (stagnantGens >= kStagnantGenerations) {
      stagnantGens = 0;
      seedPopulation();
    }
  }
  return suite;
}

TestSuite generateMOSA(const Efsm& efsm, uint64_t seed, int populationSize,
                       int budget, int maxTestLength) {
  if (populationSize < 2)
    throw std::invalid_argument("population must be >= 2");
  if (budget < 1) throw std::invalid_argument("budget must be >= 1");
  if (maxTestLength <= 0) maxTestLength = defaultMaxTestLength(efsm);
  TestSuite suite{"mosa", seed, budget, 0, efsm.digest(), {}};
  int nTrans = static_cast<int>(efsm.transitions.size());
  if (nTrans == 0) return suite;

  SearchIndex idx = buildIndex(efsm);
  const std::vector<std::vector<int>> dist = efsm.distanceMatrix();
  Rng rng(seed ^ 0x6d6f7361ULL);
  std::vector<bool> covered(nTrans, false);
  int coveredCount = 0;
  std::vector<bool> doors;
  std::vector<int> enabled;

  struct Ind {
    TestCase genes;
    WalkFacts facts;
    std::vector<int> md;
    int rank = 0;
  };

  auto bank = [&](const Ind& ind) {
    int lastNovel = -1;
    for (int i = 0; i < static_cast<int>(ind.genes.size()); ++i)
      if (!covered[ind.genes[i]]) lastNovel = i;
    if (lastNovel < 0) return;
    TestCase minimized(ind.genes.begin(), ind.genes.begin() + lastNovel + 1);
    for (int g : minimized)
      if (!covered[g]) {
        covered[g] = true;
        ++coveredCount;
      }
    suite.tests.push_back(std::move(minimized));
  };

  auto evaluate = [&](Ind& ind) {
    computeFacts(efsm, idx, ind.genes, ind.facts, doors);
    ind.genes.resize(ind.facts.prefixLength);
    ind.md = minDistToStates(efsm, dist, ind.facts);
    ++suite.evaluationsUsed;
    bank(ind);
  };

  // Rank 0: per-objective best individuals (preference criterion), then
  // non-dominated fronts of the rest, objectives restricted to uncovered
  // transitions.
  std::vector<int> uncovered;
  std::vector<std::vector<double>> F;
  auto rank = [&](std::vector<Ind>& pop) {
    uncovered.clear();
    for (int t = 0; t < nTrans; ++t)
      if (!covered[t]) uncovered.push_back(t);
    int n = static_cast<int>(pop.size());
    if (n == 0 || uncovered.empty()) {
      for (Ind& ind : pop) ind.rank = 0;
      return;
    }
    F.assign(n, {});
    for (int i = 0; i < n; ++i) {
      F[i].resize(uncovered.size());
      for (size_t k = 0; k < uncovered.size(); ++k)
        F[i][k] = transitionObjective(efsm, pop[i].md, pop[i].facts,
                                      uncovered[k]);
    }
    std::vector<bool> preferred(n, false);
    for (size_t k = 0; k < uncovered.size(); ++k) {
      int best = 0;
      for (int i = 1; i < n; ++i) {
        if (F[i][k] < F[best][k] ||
            (F[i][k] == F[best][k] &&
             pop[i].genes.size() < pop[best].genes.size()))
          best = i;
      }
      preferred[best] = true;
    }
    auto dominates = [&](int a, int b) {
      bool strict = false;
      for (size_t k = 0; k < uncovered.size(); ++k) {
        if (F[a][k] > F[b][k]) return false;
        if (F[a][k] < F[b][k]) strict = true;
      }
      return strict;
    };
    std::vector<int> rest;
    for (int i = 0; i < n; ++i) {
      pop[i].rank = preferred[i] ? 0 : -1;
      if (!preferred[i]) rest.push_back(i);
    }
    int level = 1;
    while (!rest.empty()) {
      std::vector<int> front, later;
      for (int i : rest) {
        bool dominated = false;
        for (int j : rest)
          if (j != i && dominates(j, i)) {
            dominated = true;
            break;
          }
        (dominated ? later : front).push_back(i);
      }
      if (front.empty()) front = std::move(later), later = {};
      for (int i : front) pop[i].rank = level;
      rest = std::move(later);
      ++level;
    }
  };

  std::vector<Ind> pop;
  auto seedPopulation = [&] {
    pop.clear();
    for (int i = 0; i < populationSize && suite.evaluationsUsed < budget &&
                    coveredCount < nTrans;
         ++i) {
      Ind ind;
      ind.genes = randomWalk(efsm, idx, rng, maxTestLength, doors, enabled);
      evaluate(ind);
      pop.push_back(std::move(ind));
    }
    rank(pop);
  };
  seedPopulation();

  auto better = [](const Ind& a, const Ind& b) {
    if (a.rank != b.rank) return a.rank < b.rank;
    return a.genes.size() < b.genes.size();
  };

  int stagnantGens = 0;
  while (!pop.empty() && suite.evaluationsUsed < budget &&
         coveredCount < nTrans) {
    int coveredBefore = coveredCount;
    std::vector<Ind> combined = pop;
    for (int j = 0; j < populationSize && suite.evaluationsUsed < budget; ++j) {
      const Ind& a = pop[rng.below(pop.size())];
      const Ind& b = pop[rng.below(pop.size())];
      const Ind& parent = better(a, b) ? a : b;
      Ind child;
      child.genes =
          mutate(efsm, idx, parent.genes, maxTestLength, rng, doors, enabled);
      evaluate(child);
      combined.push_back(std::move(child));
      if (coveredCount >= nTrans) break;
    }
    rank(combined);
    std::stable_sort(combined.begin(), combined.end(),
                     [&](const Ind& a, const Ind& b) { return better(a, b); });
    combined.resize(std::min<size_t>(populationSize, combined.size()));
    pop = std::move(combined);
    stagnantGens = coveredCount > coveredBefore ? 0 : stagnantGens + 1;
    if (stagnantGens >= kStagnantGenerations) {
      stagnantGens = 0;
      seedPopulation();
    }
  }
  return suite;
}

TestSuite generateSuite(const Efsm& efsm, const std::string& strategy,
                        uint64_t seed, const GenParams& params) {
  if (strategy == "random")
    return generateRandom(efsm, seed, params.budget, params.maxTestLength);
  if (strategy == "mulambda")
    return generateMuPlusLambda(efsm, seed, params.mu, params.lambda,
                                params.budget, params.maxTestLength);
  if (strategy == "mosa")
    return generateMOSA(efsm, seed, params.populationSize, params.budget,
                        params.maxTestLength);
  throw std::invalid_argument("unknown strategy: " + strategy);
}

GoalStructure translateTest(const ButtonMaze& level, const Efsm& efsm,
                            const TestCase& test) {
  if (test.empty())
    return GoalStructure::goal(
        "empty", [](const AgentContext&) { return true; }, Tactic::abort(), 1);
  SimResult sim = simulate(efsm, test);
  if (!sim.feasible)
    throw std::invalid_argument("test is infeasible on the model");

  std::vector<GoalStructure> goals;
  std::map<std::string, int> presses;
  for (size_t k = 0; k < test.size(); ++k) {
    const EfsmTransition& t = efsm.transitions[test[k]];
    std::string tag = "g" + std::to_string(k);
    if (t.kind == TransitionKind::Toggle) {
      std::string button = efsm.stateNames[t.src];
      int expect = ++presses[button];
      auto pred = [button, expect](const AgentContext& ctx) {
        const WorldEntity* e = ctx.belief.find(button);
        return e && propInt(e->properties, "pressCount", 0) == expect;
      };
      Vec2 cell = level.buttonById(button)->pos;
      Tactic tac = Tactic::firstOf({
          bumpTarget("press:" + button, fixedCell(cell)),
          stepToward("goTo:" + button, fixedCell(cell), true),
          exploreStep(),
          Tactic::abort(),
      });
      goals.push_back(GoalStructure::goal(tag + ":press:" + button,
                                          std::move(pred), std::move(tac)));
    } else {
      std::string stateName = efsm.stateNames[t.dst];
      Vec2 cell = statePosition(level, stateName);
      auto pred = [cell](const AgentContext& ctx) {
        return ctx.belief.agentPosition == cell;
      };
      Tactic tac = Tactic::firstOf({
          stepToward("goTo:" + stateName, fixedCell(cell), false),
          exploreStep(),
          Tactic::abort(),
      });
      goals.push_back(GoalStructure::goal(tag + ":at:" + stateName,
                                          std::move(pred), std::move(tac)));
    }
  }
  return GoalStructure::seq(std::move(goals));
}

nlohmann::json ExecutionReport::toJson() const {
  nlohmann::json tests = nlohmann::json::array();
  for (const TestExecution& t : perTest) {
    nlohmann::json e{{"pass", t.pass}, {"cycles", t.cycles}};
    if (!t.pass) e["failingGoal"] = t.failingGoal;
    if (!t.conformance.empty()) e["conformance"] = t.conformance;
    tests.push_back(std::move(e));
  }
  return {{"nTests", nTests},
          {"nFails", nFails},
          {"totalCycles", totalCycles},
          {"conformanceViolations", conformanceViolations},
          {"tests", std::move(tests)}};
}

ExecutionReport executeSuite(const MazeFactory& freshGame, const Efsm& efsm,
                             const TestSuite& suite) {
  if (suite.modelDigest != efsm.digest())
    throw std::invalid_argument("suite was generated from a different model");
  {
    ButtonMaze probe = freshGame();
    if (buildEfsm(probe).digest() != efsm.digest())
      throw std::invalid_argument("level does not induce the given model");
  }

  ExecutionReport rep;
  for (size_t ti = 0; ti < suite.tests.size(); ++ti) {
    const TestCase& test = suite.tests[ti];
    SimResult sim = simulate(efsm, test);
    if (!sim.feasible)
      throw std::invalid_argument("test " + std::to_string(ti) +
                                  " is infeasible on the model");

    ButtonMaze game = freshGame();
    TestAgent agent("agent", translateTest(game, efsm, test),
                    suite.seed * 1000003ULL + ti);
    TestExecution ex;
    int achieved = 0;
    AgentStatus st = AgentStatus::Running;
    int cap = static_cast<int>(test.size() + 1) * GoalStructure::kDefaultBudget + 50;
    while (st == AgentStatus::Running && agent.cycles() < cap) {
      st = agent.deliberate(game);
      const std::vector<GoalStructure>& kids = agent.goal().children();
      int now = 0;
      for (const GoalStructure& k : kids) {
        if (k.status() != GoalStatus::Succeeded) break;
        ++now;
      }
      for (int i = achieved; i < now; ++i)
        if (game.doorVector() != sim.doorTrace[i + 1])
          ex.conformance.push_back("door state diverges from the model after goal " +
                                   std::to_string(i));
      achieved = now;
    }
    ex.pass = st == AgentStatus::Succeeded;
    ex.cycles = agent.cycles();
    if (!ex.pass) {
      const std::vector<GoalStructure>& kids = agent.goal().children();
      for (size_t i = 0; i < kids.size(); ++i)
        if (kids[i].status() == GoalStatus::Failed) {
          ex.failingGoal = static_cast<int>(i);
          break;
        }
    }
    rep.totalCycles += ex.cycles;
    rep.conformanceViolations += static_cast<int>(ex.conformance.size());
    if (!ex.pass) ++rep.nFails;
    rep.perTest.push_back(std::move(ex));
  }
  rep.nTests = static_cast<int>(suite.tests.size());
  return rep;
}

}  // namespace autoplay
