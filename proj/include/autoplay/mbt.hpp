#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "autoplay/agent.hpp"
#include "autoplay/buttonmaze.hpp"
#include "autoplay/efsm.hpp"

namespace autoplay {

// Default cap on abstract test length: room for twice a full transition
// tour, hard-capped at 200 steps.
int defaultMaxTestLength(const Efsm& efsm);

// Search-facing summary of one walk through the model. Tolerant of arbitrary
// index sequences: a step that is out of range, breaks the chain, or fails
// its guard ends the prefix, and the facts describe the prefix only.
struct WalkFacts {
  int prefixLength = 0;
  std::vector<bool> visited;        // per state
  std::vector<int> visitedList;     // distinct states, first-visit order
  std::vector<bool> fired;          // per transition
  std::vector<bool> guardOpenAtSrc; // per transition: guard door seen open
                                    // while standing at its source
};

WalkFacts walkFacts(const Efsm& efsm, const TestCase& test);

// Minimum hop count from any state the walk visited to each state, over the
// guard-free transition graph. Efsm::kUnreachable where no route exists.
std::vector<int> minDistToStates(const Efsm& efsm,
                                 const std::vector<std::vector<int>>& dist,
                                 const WalkFacts& facts);

// Per-transition search objective, minimized towards 0:
//   0 when the walk fired the transition;
//   otherwise hop distance to its source (plus 1 once the source itself was
//   reached without firing), plus the normalized guard distance x/(x+1),
//   where the guard distance of a door crossing is 0 if its door was ever
//   open while standing at the source and 1 otherwise.
double transitionObjective(const Efsm& efsm, const std::vector<int>& md,
                           const WalkFacts& facts, int transition);

struct GenParams {
  int budget = 50000;     // fitness evaluations (model walks)
  int maxTestLength = 0;  // 0 = defaultMaxTestLength
  int mu = 8;
  int lambda = 24;
  int populationSize = 20;
};

// Offline suite generation: pure random feasible walks, kept when they cover
// something new.
TestSuite generateRandom(const Efsm& efsm, uint64_t seed, int budget = 50000,
                         int maxTestLength = 0);

// (mu+lambda) evolution over transition sequences. Infeasible suffixes are
// repaired away by truncation; fitness is coverage novelty relative to the
// banked archive, shorter tests preferred on ties; the archive of minimized
// covering tests is the returned suite.
TestSuite generateMuPlusLambda(const Efsm& efsm, uint64_t seed, int mu = 8,
                               int lambda = 24, int budget = 50000,
                               int maxTestLength = 0);

// Many-objective search: one objective per uncovered transition (see
// transitionObjective), preference-first non-dominated ranking, archive of
// first-covering tests returned as the suite.
TestSuite generateMOSA(const Efsm& efsm, uint64_t seed,
                       int populationSize = 20, int budget = 50000,
                       int maxTestLength = 0);

// Dispatch by name: "random", "mulambda", "mosa".
TestSuite generateSuite(const Efsm& efsm, const std::string& strategy,
                        uint64_t seed, const GenParams& params = {});

// Turns one abstract test into a goal sequence an agent can run on the
// level: travel and door crossings become "stand on the state's cell" goals,
// toggles become "press count reached" goals, each with a navigate/explore
// tactic and the default per-goal budget. An empty test yields a trivially
// succeeding goal.
GoalStructure translateTest(const ButtonMaze& level, const Efsm& efsm,
                            const TestCase& test);

struct TestExecution {
  bool pass = false;
  int cycles = 0;
  int failingGoal = -1;                  // index into the test, -1 if passed
  std::vector<std::string> conformance;  // door-state mismatch descriptions
};

struct ExecutionReport {
  int nTests = 0;
  int nFails = 0;
  int64_t totalCycles = 0;
  int conformanceViolations = 0;
  std::vector<TestExecution> perTest;

  nlohmann::json toJson() const;
};

using MazeFactory = std::function<ButtonMaze()>;

// Runs every test of the suite on a fresh game instance. A test passes when
// its whole goal sequence succeeds within the per-goal budgets. After each
// achieved goal the game's door vector must equal the model simulation's
// door trace at that step; mismatches are recorded as conformance
// violations. Throws std::invalid_argument when the suite's model digest
// does not match `efsm`, when the level does not induce `efsm`, or when a
// test is infeasible on the model.
ExecutionReport executeSuite(const MazeFactory& freshGame, const Efsm& efsm,
                             const TestSuite& suite);

}  // namespace autoplay
