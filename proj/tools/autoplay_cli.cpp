// Single-binary command line for the testing toolkit: scripted playtests,
// level/model generation, model-based suite generation and execution,
// exploratory runs, and long assertion soaks.
//
// Exit codes: 0 success, 1 test failures or violations, 2 flag errors.
// With --json every report goes to stdout as a single JSON document whose
// only run-dependent field is mbt-run's "time".

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "autoplay/buttonmaze.hpp"
#include "autoplay/efsm.hpp"
#include "autoplay/errors.hpp"
#include "autoplay/explorer.hpp"
#include "autoplay/levelgen.hpp"
#include "autoplay/mbt.hpp"
#include "autoplay/minidungeon.hpp"
#include "autoplay/playtest.hpp"

using nlohmann::json;

namespace {

std::string readFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot read " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void writeFile(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

void emitDoc(const json& doc, bool asJson, const std::string& outPath,
             const std::string& textSummary) {
  if (!outPath.empty()) writeFile(outPath, doc.dump(2) + "\n");
  if (asJson)
    std::cout << doc.dump(2) << "\n";
  else
    std::cout << textSummary;
}

// Flags shared by every subcommand that consumes or fabricates a maze level.
struct LevelSource {
  std::string levelFile;
  int rooms = 4;
  int buttons = 4;
  int doors = 3;
  double wiring = 0.3;
  bool l1 = false;

  void attach(CLI::App* cmd) {
    cmd->add_option("--level", levelFile, "Level CSV file; omit to generate one")
        ->check(CLI::ExistingFile);
    cmd->add_option("--rooms", rooms, "Generated level: room count");
    cmd->add_option("--buttons", buttons, "Generated level: button count");
    cmd->add_option("--doors", doors, "Generated level: door count");
    cmd->add_option("--wiring", wiring, "Generated level: wiring density");
    cmd->add_flag("--l1", l1, "Generated level: use the large benchmark scale");
  }

  std::string csv(uint64_t seed) const {
    if (!levelFile.empty()) return readFile(levelFile);
    autoplay::LevelGenParams p;
    if (l1) {
      p = autoplay::levelScaleL1(seed);
    } else {
      p.rooms = rooms;
      p.buttons = buttons;
      p.doors = doors;
      p.wiringDensity = wiring;
      p.seed = seed;
    }
    return autoplay::generateLevel(p).csv;
  }
};

struct PlaytestArgs {
  uint64_t seed = 17;
  int levels = 2, grid = 20, monsters = 4, scrolls = 3, players = 1;
  int budget = 4000;
  std::string mutant, out;
  bool asJson = false, withTrace = false, assertions = true;
};

int cmdPlaytest(const PlaytestArgs& a) {
  autoplay::GameConfig cfg;
  cfg.levelCount = a.levels;
  cfg.gridSize = a.grid;
  cfg.monstersPerLevel = a.monsters;
  cfg.scrollsPerLevel = a.scrolls;
  cfg.playerCount = a.players;
  cfg.seed = a.seed;
  cfg.debugAssertions = a.assertions;
  if (a.mutant == "buggyMonsterMove")
    cfg.buggyMonsterMove = true;
  else if (a.mutant == "wallWalk")
    cfg.wallWalk = true;
  else if (!a.mutant.empty())
    throw std::invalid_argument("unknown mutant for playtest: " + a.mutant);

  autoplay::PlaytestResult r = autoplay::runShrinePlaytest(cfg, a.seed, a.budget);

  std::ostringstream text;
  text << "status: " << r.finalStatus << (r.won ? " (won)" : "") << "\n"
       << "cycles: " << r.cycles << "  score: " << r.score << "\n"
       << "oracle violations: " << r.oracleViolations.size()
       << "  assertion violations: " << r.assertionViolations.size() << "\n";
  for (const auto& v : r.oracleViolations)
    text << "  [oracle] " << v.oracle << " @" << v.stepIndex << ": " << v.detail
         << "\n";
  for (const auto& v : r.assertionViolations)
    text << "  [assert] " << v.check << " @turn " << v.turn << ": " << v.detail
         << "\n";
  emitDoc(r.toJson(a.withTrace), a.asJson, a.out, text.str());

  bool clean = r.won && r.oracleViolations.empty() && r.assertionViolations.empty();
  return clean ? 0 : 1;
}

struct GenLevelArgs {
  uint64_t seed = 17;
  LevelSource src;  // generation knobs only; --level is not attached here
  std::string out;
  bool asJson = false;
};

int cmdGenLevel(const GenLevelArgs& a) {
  autoplay::LevelGenParams p;
  if (a.src.l1) {
    p = autoplay::levelScaleL1(a.seed);
  } else {
    p.rooms = a.src.rooms;
    p.buttons = a.src.buttons;
    p.doors = a.src.doors;
    p.wiringDensity = a.src.wiring;
    p.seed = a.seed;
  }
  autoplay::GeneratedLevel g = autoplay::generateLevel(p);

  if (!a.out.empty()) {
    writeFile(a.out + ".csv", g.csv);
    writeFile(a.out + ".model.json", g.efsm.toJson().dump(2) + "\n");
  }
  json doc = {{"csv", g.csv},
              {"model", g.efsm.toJson()},
              {"states", g.efsm.stateCount()},
              {"transitions", g.efsm.transitions.size()},
              {"variables", g.efsm.variables.size()}};
  std::ostringstream text;
  text << "level: " << g.efsm.stateCount() << " states, "
       << g.efsm.transitions.size() << " transitions, "
       << g.efsm.variables.size() << " variables\n";
  if (!a.out.empty())
    text << "wrote " << a.out << ".csv and " << a.out << ".model.json\n";
  emitDoc(doc, a.asJson, "", text.str());
  return 0;
}

struct MbtGenArgs {
  uint64_t seed = 17;
  std::string strategy = "random";
  int budget = 50000;
  int maxLen = 0;
  std::string modelFile, out;
  LevelSource src;
  bool asJson = false;
};

int cmdMbtGen(const MbtGenArgs& a) {
  autoplay::Efsm efsm;
  if (!a.modelFile.empty())
    efsm = autoplay::Efsm::fromJson(json::parse(readFile(a.modelFile)));
  else
    efsm = autoplay::buildEfsm(
        autoplay::ButtonMaze::loadLevelCSV(a.src.csv(a.seed)));

  autoplay::GenParams gp;
  gp.budget = a.budget;
  gp.maxTestLength = a.maxLen;
  autoplay::TestSuite suite =
      autoplay::generateSuite(efsm, a.strategy, a.seed, gp);
  double cov = autoplay::coverage(efsm, suite.tests);

  json suiteJson = suite.toJson();
  if (!a.out.empty()) writeFile(a.out, suiteJson.dump(2) + "\n");
  json doc = {{"strategy", suite.strategy},
              {"seed", suite.seed},
              {"budget", suite.budget},
              {"evaluationsUsed", suite.evaluationsUsed},
              {"nTests", suite.tests.size()},
              {"coverage", cov},
              {"suite", suiteJson}};
  std::ostringstream text;
  text << "strategy " << suite.strategy << ": " << suite.tests.size()
       << " tests, coverage " << cov << ", " << suite.evaluationsUsed
       << " evaluations\n";
  if (!a.out.empty()) text << "wrote " << a.out << "\n";
  emitDoc(doc, a.asJson, "", text.str());
  return 0;
}

struct MbtRunArgs {
  uint64_t seed = 17;
  std::string suiteFile, out;
  LevelSource src;
  bool asJson = false;
};

int cmdMbtRun(const MbtRunArgs& a) {
  autoplay::TestSuite suite =
      autoplay::TestSuite::fromJson(json::parse(readFile(a.suiteFile)));
  std::string csv = a.src.csv(a.seed);
  auto fresh = [csv]() { return autoplay::ButtonMaze::loadLevelCSV(csv); };
  autoplay::Efsm efsm = autoplay::buildEfsm(fresh());

  auto t0 = std::chrono::steady_clock::now();
  autoplay::ExecutionReport rep = autoplay::executeSuite(fresh, efsm, suite);
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  json doc = rep.toJson();
  doc["time"] = secs;  // the one field that varies between identical runs
  std::ostringstream text;
  text << "executed " << rep.nTests << " tests in " << secs << "s: "
       << rep.nFails << " failed, " << rep.conformanceViolations
       << " conformance violations, " << rep.totalCycles << " cycles\n";
  emitDoc(doc, a.asJson, a.out, text.str());
  return (rep.nFails == 0 && rep.conformanceViolations == 0) ? 0 : 1;
}

struct ExploreArgs {
  uint64_t seed = 17;
  int budget = 300;
  std::string mutant, out;
  LevelSource src;
  bool asJson = false;
};

int cmdExplore(const ExploreArgs& a) {
  autoplay::ButtonMaze maze =
      autoplay::ButtonMaze::loadLevelCSV(a.src.csv(a.seed));
  if (a.mutant == "crashButton") {
    if (maze.buttons().empty())
      throw std::invalid_argument("crashButton needs a level with buttons");
    maze.injectCrashButton(maze.buttons().front().id);
  } else if (!a.mutant.empty()) {
    throw std::invalid_argument("unknown mutant for explore: " + a.mutant);
  }

  autoplay::ExplorerConfig ec;
  ec.budget = a.budget;
  ec.seed = a.seed;
  ec.interactableTypes = {"button"};
  autoplay::ExplorationReport rep = autoplay::runExploratory(maze, ec);

  std::ostringstream text;
  text << "actions: " << rep.actions
       << "  unique interactions: " << rep.uniqueInteractions
       << "  violations: " << rep.violations.size() << "\n";
  for (const auto& v : rep.violations)
    text << "  [" << v.oracle << "] @" << v.stepIndex << ": " << v.detail << "\n";
  emitDoc(rep.toJson(), a.asJson, a.out, text.str());
  return rep.violations.empty() ? 0 : 1;
}

struct SoakArgs {
  uint64_t seed = 17;
  int turns = 2000;
  int levels = 1, grid = 12, monsters = 8, scrolls = 3, players = 1;
  std::string mutant, out;
  bool asJson = false;
};

int cmdOracleSoak(const SoakArgs& a) {
  autoplay::GameConfig cfg;
  cfg.levelCount = a.levels;
  cfg.gridSize = a.grid;
  cfg.monstersPerLevel = a.monsters;
  cfg.scrollsPerLevel = a.scrolls;
  cfg.playerCount = a.players;
  cfg.debugAssertions = true;
  if (a.mutant == "buggyMonsterMove")
    cfg.buggyMonsterMove = true;
  else if (a.mutant == "wallWalk")
    cfg.wallWalk = true;
  else if (!a.mutant.empty())
    throw std::invalid_argument("unknown mutant for oracle-soak: " + a.mutant);

  // Random keys, movement-heavy; dead games are replaced and the turn count
  // carries on so the soak length is independent of luck.
  static const char kPool[] = {'w', 's', 'a', 'd', 'w', 's', 'a', 'd', 'e', 'r'};
  autoplay::Rng rng(a.seed ^ 0x736f616bULL);
  int64_t taken = 0, firstViolationTurn = -1;
  int episodes = 0;
  json viols = json::array();

  while (taken < a.turns) {
    cfg.seed = a.seed + static_cast<uint64_t>(episodes);
    autoplay::MiniDungeon game(cfg);
    ++episodes;
    size_t seen = 0;
    while (!game.over() && taken < a.turns) {
      char key = kPool[rng.below(sizeof(kPool))];
      try {
        game.command(game.nextPlayer(), key);
      } catch (const autoplay::GameRuleError&) {
        // Rejected keys still count: the soak measures commands sent.
      }
      ++taken;
      const auto& log = game.violationLog();
      for (; seen < log.size(); ++seen) {
        json v = log[seen].toJson();
        v["globalTurn"] = taken;
        viols.push_back(v);
        if (firstViolationTurn < 0) firstViolationTurn = taken;
      }
    }
  }

  json doc = {{"turns", taken},
              {"episodes", episodes},
              {"violations", viols},
              {"firstViolationTurn", firstViolationTurn},
              {"seed", a.seed}};
  std::ostringstream text;
  text << "soak: " << taken << " turns over " << episodes << " episodes, "
       << viols.size() << " violations";
  if (firstViolationTurn >= 0) text << " (first at turn " << firstViolationTurn << ")";
  text << "\n";
  emitDoc(doc, a.asJson, a.out, text.str());
  return viols.empty() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Agent-based game testing toolkit"};
  app.require_subcommand(1);

  PlaytestArgs pa;
  CLI::App* playtest = app.add_subcommand("playtest", "Scripted two-shrine playtest");
  playtest->add_option("--seed", pa.seed, "Game and agent seed");
  playtest->add_option("--levels", pa.levels, "Dungeon levels");
  playtest->add_option("--grid", pa.grid, "Grid size per level");
  playtest->add_option("--monsters", pa.monsters, "Monsters per level");
  playtest->add_option("--scrolls", pa.scrolls, "Scrolls per level");
  playtest->add_option("--players", pa.players, "Player count (1 or 2)")
      ->check(CLI::Range(1, 2));
  playtest->add_option("--budget", pa.budget, "Deliberation cycle cap");
  playtest->add_option("--mutant", pa.mutant,
                       "Implanted defect: buggyMonsterMove or wallWalk");
  playtest->add_option("--out", pa.out, "Write the JSON report to this file");
  playtest->add_flag("--json", pa.asJson, "JSON report on stdout");
  playtest->add_flag("--trace", pa.withTrace, "Include the command trace");
  playtest->add_flag("--assertions,!--no-assertions", pa.assertions,
                     "Run implanted assertions each turn");

  GenLevelArgs ga;
  CLI::App* genlevel = app.add_subcommand("genlevel", "Generate a maze level and its model");
  genlevel->add_option("--seed", ga.seed, "Generation seed");
  genlevel->add_option("--rooms", ga.src.rooms, "Room count");
  genlevel->add_option("--buttons", ga.src.buttons, "Button count");
  genlevel->add_option("--doors", ga.src.doors, "Door count");
  genlevel->add_option("--wiring", ga.src.wiring, "Wiring density in [0,1]");
  genlevel->add_flag("--l1", ga.src.l1, "Large benchmark scale");
  genlevel->add_option("--out", ga.out, "Basename for <out>.csv and <out>.model.json");
  genlevel->add_flag("--json", ga.asJson, "JSON document on stdout");

  MbtGenArgs ma;
  CLI::App* mbtgen = app.add_subcommand("mbt-gen", "Generate an abstract test suite");
  mbtgen->add_option("--seed", ma.seed, "Search (and level generation) seed");
  mbtgen->add_option("--strategy", ma.strategy, "random, mulambda, or mosa");
  mbtgen->add_option("--budget", ma.budget, "Fitness evaluation budget");
  mbtgen->add_option("--max-len", ma.maxLen, "Max test length (0 = automatic)");
  mbtgen->add_option("--model", ma.modelFile, "Model JSON file")
      ->check(CLI::ExistingFile);
  ma.src.attach(mbtgen);
  mbtgen->add_option("--out", ma.out, "Write the suite JSON to this file");
  mbtgen->add_flag("--json", ma.asJson, "JSON document on stdout");

  MbtRunArgs ra;
  CLI::App* mbtrun = app.add_subcommand("mbt-run", "Execute a suite against its level");
  mbtrun->add_option("--seed", ra.seed, "Level generation seed (must match mbt-gen)");
  mbtrun->add_option("--suite", ra.suiteFile, "Suite JSON file")
      ->required()
      ->check(CLI::ExistingFile);
  ra.src.attach(mbtrun);
  mbtrun->add_option("--out", ra.out, "Write the JSON report to this file");
  mbtrun->add_flag("--json", ra.asJson, "JSON report on stdout");

  ExploreArgs ea;
  CLI::App* explore = app.add_subcommand("explore", "Unscripted exploratory session");
  explore->add_option("--seed", ea.seed, "Selection (and level generation) seed");
  explore->add_option("--budget", ea.budget, "Action budget");
  explore->add_option("--mutant", ea.mutant, "Implanted defect: crashButton");
  ea.src.attach(explore);
  explore->add_option("--out", ea.out, "Write the JSON report to this file");
  explore->add_flag("--json", ea.asJson, "JSON report on stdout");

  SoakArgs sa;
  CLI::App* soak = app.add_subcommand("oracle-soak", "Long random-key assertion soak");
  soak->add_option("--seed", sa.seed, "Soak seed");
  soak->add_option("--turns", sa.turns, "Total commands to send");
  soak->add_option("--levels", sa.levels, "Dungeon levels");
  soak->add_option("--grid", sa.grid, "Grid size per level");
  soak->add_option("--monsters", sa.monsters, "Monsters per level");
  soak->add_option("--scrolls", sa.scrolls, "Scrolls per level");
  soak->add_option("--players", sa.players, "Player count (1 or 2)")
      ->check(CLI::Range(1, 2));
  soak->add_option("--mutant", sa.mutant,
                   "Implanted defect: buggyMonsterMove or wallWalk");
  soak->add_option("--out", sa.out, "Write the JSON report to this file");
  soak->add_flag("--json", sa.asJson, "JSON report on stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (playtest->parsed()) return cmdPlaytest(pa);
    if (genlevel->parsed()) return cmdGenLevel(ga);
    if (mbtgen->parsed()) return cmdMbtGen(ma);
    if (mbtrun->parsed()) return cmdMbtRun(ra);
    if (explore->parsed()) return cmdExplore(ea);
    if (soak->parsed()) return cmdOracleSoak(sa);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
