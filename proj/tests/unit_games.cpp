#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "autoplay/buttonmaze.hpp"
#include "autoplay/efsm.hpp"
#include "autoplay/errors.hpp"
#include "autoplay/levelgen.hpp"
#include "autoplay/minidungeon.hpp"
#include "autoplay/rng.hpp"
#include "autoplay/world.hpp"

using namespace autoplay;

namespace {

GameConfig miniConfig(uint64_t seed, int levels = 1, int grid = 10,
                      int monsters = 0) {
  GameConfig cfg;
  cfg.levelCount = levels;
  cfg.gridSize = grid;
  cfg.monstersPerLevel = monsters;
  cfg.scrollsPerLevel = 3;
  cfg.healPotionsPerLevel = 1;
  cfg.ragePotionsPerLevel = 1;
  cfg.seed = seed;
  return cfg;
}

// Key sequence to walk from `from` to `to` using the game's ground-truth wall
// layout; cells in `avoid` are impassable (the target never is). Breadth-first
// so the route length is minimal.
std::optional<std::vector<char>> routeKeys(const MiniDungeon& game, int level,
                                           Vec2 from, Vec2 to,
                                           const std::set<int>& avoid = {}) {
  int n = game.config().gridSize;
  auto idx = [n](Vec2 p) { return p.y * n + p.x; };
  if (from == to) return std::vector<char>{};
  std::vector<int> parent(static_cast<size_t>(n) * n, -1);
  std::vector<char> parentKey(static_cast<size_t>(n) * n, 0);
  std::deque<Vec2> q{from};
  parent[idx(from)] = idx(from);
  const char keys[4] = {'w', 'a', 'd', 's'};
  while (!q.empty()) {
    Vec2 cur = q.front();
    q.pop_front();
    if (cur == to) break;
    for (int i = 0; i < 4; ++i) {
      Vec2 next{cur.x + kNeighbourOrder[i].x, cur.y + kNeighbourOrder[i].y};
      if (game.wallAt(level, next)) continue;
      if (next != to && avoid.count(idx(next))) continue;
      if (parent[idx(next)] >= 0) continue;
      parent[idx(next)] = idx(cur);
      parentKey[idx(next)] = keys[i];
      q.push_back(next);
    }
  }
  if (parent[idx(to)] < 0) return std::nullopt;
  std::vector<char> out;
  for (Vec2 cur = to; cur != from;) {
    out.push_back(parentKey[idx(cur)]);
    int p = parent[idx(cur)];
    cur = {p % n, p / n};
  }
  std::reverse(out.begin(), out.end());
  return out;
}

struct ShrineRun {
  bool won = false;
  int scrollsConsumed = 0;
};

// Plays a monster-free single-level dungeon to completion: fetch scrolls one
// at a time and spend them at the shrine until it cleanses. Potions are dead
// weight in a one-slot bag, so routes dodge them and any accidental pickup is
// quaffed away.
ShrineRun playShrineLevel(MiniDungeon& game, int maxCommands) {
  ShrineRun run;
  auto hasPrefix = [](const std::string& s, const char* p) {
    return s.rfind(p, 0) == 0;
  };
  for (int sent = 0; sent < maxCommands;) {
    WorldModel obs = game.observe("P0");
    if (propStr(obs.agentProperties, "status") != "running") break;
    std::vector<std::string> bag = propList(obs.agentProperties, "bagContents");
    bool scrollInBag = false;
    for (const std::string& id : bag) scrollInBag |= hasPrefix(id, "S_");

    Vec2 shrinePos{-1, -1};
    bool shrineCleansed = false;
    std::vector<Vec2> scrolls;
    std::set<int> potionCells;
    int n = game.config().gridSize;
    for (const auto& [id, e] : obs.entities) {
      if (e.entityType == "shrine") {
        shrinePos = e.position;
        shrineCleansed = propBool(e.properties, "cleansed", false);
      } else if (e.entityType == "scroll" && e.alive) {
        scrolls.push_back(e.position);
      } else if ((e.entityType == "healpotion" || e.entityType == "ragepotion") &&
                 e.alive) {
        potionCells.insert(e.position.y * n + e.position.x);
      }
    }
    REQUIRE(shrinePos.x >= 0);
    REQUIRE_FALSE(shrineCleansed);  // level ends as won the moment it cleanses

    char key = 0;
    if (scrollInBag) {
      auto keys = routeKeys(game, 0, obs.agentPosition, shrinePos);
      REQUIRE(keys.has_value());
      REQUIRE_FALSE(keys->empty());
      key = keys->front();
    } else if (!bag.empty()) {
      key = hasPrefix(bag.front(), "HP_") ? 'e' : 'r';  // free the slot
    } else if (!scrolls.empty()) {
      std::sort(scrolls.begin(), scrolls.end());
      std::set<int> avoid = potionCells;
      avoid.insert(shrinePos.y * n + shrinePos.x);
      std::optional<std::vector<char>> keys;
      for (Vec2 s : scrolls) {
        keys = routeKeys(game, 0, obs.agentPosition, s, avoid);
        if (keys) break;
      }
      // A potion can plug the only corridor; walk over it and quaff later.
      for (Vec2 s : scrolls) {
        if (keys) break;
        keys = routeKeys(game, 0, obs.agentPosition, s,
                         {shrinePos.y * n + shrinePos.x});
      }
      REQUIRE(keys.has_value());
      REQUIRE_FALSE(keys->empty());
      key = keys->front();
    } else {
      break;  // out of scrolls with nothing in the bag: unwinnable
    }
    WorldModel after = game.command("P0", key);
    ++sent;
    std::vector<std::string> bagAfter =
        propList(after.agentProperties, "bagContents");
    if (scrollInBag && bagAfter.size() < bag.size()) ++run.scrollsConsumed;
  }
  run.won = game.status() == "won";
  return run;
}

char randomMoveKey(Rng& rng) {
  const char keys[] = {'w', 'a', 's', 'd', 'w', 'a', 's', 'd', 'e', 'r'};
  return keys[rng.belowInt(10)];
}

}  // namespace

TEST_CASE("dungeon configs are validated up front") {
  CHECK_THROWS_AS(MiniDungeon([] {
                    GameConfig c;
                    c.levelCount = 0;
                    return c;
                  }()),
                  std::invalid_argument);
  CHECK_THROWS_AS(MiniDungeon([] {
                    GameConfig c;
                    c.gridSize = 4;
                    return c;
                  }()),
                  std::invalid_argument);
  CHECK_THROWS_AS(MiniDungeon([] {
                    GameConfig c;
                    c.playerCount = 3;
                    return c;
                  }()),
                  std::invalid_argument);
  CHECK_THROWS_AS(MiniDungeon([] {
                    GameConfig c;
                    c.bagCapacity = 5;
                    return c;
                  }()),
                  std::invalid_argument);
  CHECK_THROWS_AS(MiniDungeon([] {
                    GameConfig c;
                    c.viewDistance = 0;
                    return c;
                  }()),
                  std::invalid_argument);
  CHECK_THROWS_AS(MiniDungeon([] {
                    GameConfig c;
                    c.scrollsPerLevel = 0;
                    return c;
                  }()),
                  std::invalid_argument);
  // More objects than a tiny level can hold.
  GameConfig packed = miniConfig(1, 1, 5, 40);
  CHECK_THROWS_AS(MiniDungeon{packed}, std::invalid_argument);
}

TEST_CASE("the same seed builds the same dungeon, twice") {
  MiniDungeon a(miniConfig(42, 2, 14, 3));
  MiniDungeon b(miniConfig(42, 2, 14, 3));
  CHECK(a.stateDigest() == b.stateDigest());
  MiniDungeon c(miniConfig(43, 2, 14, 3));
  CHECK(a.stateDigest() != c.stateDigest());
}

TEST_CASE("identical command scripts land on identical state digests") {
  MiniDungeon a(miniConfig(7, 1, 12, 3));
  MiniDungeon b(miniConfig(7, 1, 12, 3));
  Rng r1(5), r2(5);
  for (int i = 0; i < 60 && !a.over(); ++i) {
    a.command("P0", randomMoveKey(r1));
    b.command("P0", randomMoveKey(r2));
  }
  CHECK(a.stateDigest() == b.stateDigest());
  CHECK(a.turn() == b.turn());
}

TEST_CASE("every floor cell is reachable from the start") {
  for (uint64_t seed : {1, 2, 3, 4, 5, 6, 7, 8}) {
    MiniDungeon game(miniConfig(seed, 2, 20, 4));
    for (int level = 0; level < 2; ++level) {
      int n = game.config().gridSize;
      int floorCells = 0;
      for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x)
          if (!game.wallAt(level, {x, y})) ++floorCells;

      std::vector<bool> seen(static_cast<size_t>(n) * n, false);
      std::deque<Vec2> q{game.startCell(level)};
      seen[game.startCell(level).y * n + game.startCell(level).x] = true;
      int reached = 0;
      while (!q.empty()) {
        Vec2 cur = q.front();
        q.pop_front();
        ++reached;
        for (Vec2 d : kNeighbourOrder) {
          Vec2 next{cur.x + d.x, cur.y + d.y};
          if (game.wallAt(level, next) || seen[next.y * n + next.x]) continue;
          seen[next.y * n + next.x] = true;
          q.push_back(next);
        }
      }
      CHECK(reached == floorCells);
    }
  }
}

TEST_CASE("quitting ends the game and closes the door behind you") {
  MiniDungeon game(miniConfig(3));
  game.command("P0", 'q');
  CHECK(game.status() == "quit");
  CHECK(game.over());
  CHECK_THROWS_AS(game.command("P0", 'w'), GameRuleError);
}

TEST_CASE("an invalid key is rejected without touching the game") {
  MiniDungeon game(miniConfig(3, 1, 10, 2));
  uint64_t before = game.stateDigest();
  int64_t turnBefore = game.turn();
  CHECK_THROWS_AS(game.command("P0", 'x'), GameRuleError);
  CHECK(game.stateDigest() == before);
  CHECK(game.turn() == turnBefore);
}

TEST_CASE("walking into a wall wastes the turn but not the position") {
  MiniDungeon game(miniConfig(11, 1, 8, 0));
  // March right until a wall sits next to the player; the border guarantees
  // one within the grid.
  Vec2 pos = game.observe("P0").agentPosition;
  for (int i = 0; i < 8 && !game.wallAt(0, {pos.x + 1, pos.y}); ++i)
    pos = game.command("P0", 'd').agentPosition;
  REQUIRE(game.wallAt(0, {pos.x + 1, pos.y}));
  int64_t turnBefore = game.turn();
  WorldModel after = game.command("P0", 'd');
  CHECK(after.agentPosition == pos);
  CHECK(game.turn() == turnBefore + 1);
}

TEST_CASE("the wall-walk defect lets the player phase into walls") {
  GameConfig cfg = miniConfig(11, 1, 8, 0);
  cfg.wallWalk = true;
  MiniDungeon game(cfg);
  Vec2 pos = game.observe("P0").agentPosition;
  for (int i = 0; i < 8 && !game.wallAt(0, {pos.x + 1, pos.y}); ++i)
    pos = game.command("P0", 'd').agentPosition;
  REQUIRE(game.wallAt(0, {pos.x + 1, pos.y}));
  WorldModel after = game.command("P0", 'd');
  CHECK(after.agentPosition == Vec2{pos.x + 1, pos.y});
  CHECK(game.wallAt(0, after.agentPosition));
}

TEST_CASE("players alternate in the two-player game") {
  GameConfig cfg = miniConfig(5, 1, 12, 0);
  cfg.playerCount = 2;
  MiniDungeon game(cfg);
  CHECK(game.nextPlayer() == "P0");
  CHECK_THROWS_AS(game.command("P1", 'w'), GameRuleError);
  game.command("P0", 'w');
  CHECK(game.nextPlayer() == "P1");
  game.command("P1", 'w');
  CHECK(game.nextPlayer() == "P0");
}

TEST_CASE("observations stay within the view radius, with the boundary included") {
  MiniDungeon game(miniConfig(21, 1, 14, 4));
  int view = game.config().viewDistance;
  Rng rng(4);
  int boundaryWallsSeen = 0;
  for (int i = 0; i < 200 && !game.over(); ++i) {
    WorldModel obs = game.command("P0", randomMoveKey(rng));
    CHECK(obs.timestamp == game.turn());
    Vec2 at = obs.agentPosition;
    for (const auto& [id, e] : obs.entities) {
      if (id == "P0") continue;
      CHECK(chebyshev(e.position, at) <= view);
      CHECK(propInt(e.properties, "level", -1) == 0);
    }
    // Inclusion at exactly the radius: every wall on the view ring must be
    // reported. Walls are static, so the ground truth is exact.
    int n = game.config().gridSize;
    for (int y = std::max(0, at.y - view); y <= std::min(n - 1, at.y + view); ++y)
      for (int x = std::max(0, at.x - view); x <= std::min(n - 1, at.x + view); ++x) {
        if (chebyshev({x, y}, at) != view || !game.wallAt(0, {x, y})) continue;
        ++boundaryWallsSeen;
        bool found = false;
        for (const auto& [id, e] : obs.entities)
          if (e.entityType == "wall" && e.position == Vec2{x, y}) found = true;
        CHECK(found);
      }
  }
  CHECK(boundaryWallsSeen > 0);
}

TEST_CASE("scroll runs win the level and burn duds along the way") {
  int maxConsumed = 0;
  for (uint64_t seed : {1, 2, 3, 4, 5, 6, 7, 8, 9, 10}) {
    GameConfig cfg = miniConfig(seed, 1, 10, 0);
    cfg.viewDistance = 20;  // whole level visible, the test plays planner
    MiniDungeon game(cfg);
    ShrineRun run = playShrineLevel(game, 2000);
    CHECK(run.won);
    CHECK(run.scrollsConsumed >= 1);
    CHECK(run.scrollsConsumed <= 3);
    maxConsumed = std::max(maxConsumed, run.scrollsConsumed);
  }
  // With one holy scroll among three, some seed must burn a dud first.
  CHECK(maxConsumed >= 2);
}

TEST_CASE("long correct-engine runs raise no assertion violations") {
  for (uint64_t seed : {31, 32, 33, 34, 35}) {
    GameConfig cfg = miniConfig(seed, 1, 14, 4);
    cfg.debugAssertions = true;
    MiniDungeon game(cfg);
    Rng rng(seed * 3 + 1);
    for (int i = 0; i < 300 && !game.over(); ++i) {
      WorldModel obs = game.command("P0", randomMoveKey(rng));
      int hp = static_cast<int>(propInt(obs.agentProperties, "hp"));
      int hpMax = static_cast<int>(propInt(obs.agentProperties, "hpMax"));
      CHECK(hp >= 0);
      CHECK(hp <= hpMax);
      CHECK(propList(obs.agentProperties, "bagContents").size() <=
            static_cast<size_t>(propInt(obs.agentProperties, "bagCapacity")));
    }
    CHECK(game.violationLog().empty());
  }
}

TEST_CASE("a level without monsters is vacuously violation-free") {
  GameConfig cfg = miniConfig(9, 1, 10, 0);
  cfg.debugAssertions = true;
  MiniDungeon game(cfg);
  Rng rng(2);
  for (int i = 0; i < 100 && !game.over(); ++i)
    game.command("P0", randomMoveKey(rng));
  CHECK(game.violationLog().empty());
  CHECK(game.implantedAssertions().empty());
}

TEST_CASE("the buggy monster move is caught by the implanted assertions") {
  for (uint64_t seed : {41, 42, 43}) {
    GameConfig cfg = miniConfig(seed, 1, 12, 6);
    cfg.debugAssertions = true;
    cfg.buggyMonsterMove = true;
    MiniDungeon game(cfg);
    Rng rng(seed);
    for (int i = 0; i < 500 && !game.over(); ++i) {
      game.command("P0", randomMoveKey(rng));
      if (!game.violationLog().empty()) break;
    }
    CHECK_FALSE(game.violationLog().empty());
  }
}

namespace {

// Three rooms in a row; two passages between the first pair of rooms carry
// doors d0 and d2, the second pair is joined through d1.
const char* kThreeRoomCsv =
    "w,w,w,w,w,w,w,w,w,w,w\n"
    "w,f,f,f,d0,f,f,w,f,f,w\n"
    "w,b0,f,f,w,b2,f,d1,f,b3,w\n"
    "w,b1,f,f,d2,f,f,w,f,f,w\n"
    "w,w,w,w,w,w,w,w,w,w,w\n"
    "\n"
    "b0,d0\n"
    "b1,d2\n"
    "b1,d1\n"
    "b2,d0\n"
    "b2,d1\n"
    "b3,d2\n";

// Walks the maze agent along breadth-first routes; buttons and closed doors
// are impassable (bumping the final step is how a button gets pressed).
std::optional<std::vector<char>> mazeRoute(const ButtonMaze& maze, Vec2 from,
                                           Vec2 to) {
  int w = maze.width(), h = maze.height();
  auto idx = [w](Vec2 p) { return p.y * w + p.x; };
  auto passable = [&](Vec2 p) {
    if (maze.wallAt(p) || maze.buttonAt(p)) return false;
    if (const ButtonMaze::Door* d = maze.doorAt(p)) return d->open;
    return true;
  };
  if (from == to) return std::vector<char>{};
  std::vector<int> parent(static_cast<size_t>(w) * h, -1);
  std::vector<char> parentKey(static_cast<size_t>(w) * h, 0);
  std::deque<Vec2> q{from};
  parent[idx(from)] = idx(from);
  const char keys[4] = {'w', 'a', 'd', 's'};
  while (!q.empty()) {
    Vec2 cur = q.front();
    q.pop_front();
    for (int i = 0; i < 4; ++i) {
      Vec2 next{cur.x + kNeighbourOrder[i].x, cur.y + kNeighbourOrder[i].y};
      if (next.x < 0 || next.y < 0 || next.x >= w || next.y >= h) continue;
      if (next != to && !passable(next)) continue;
      if (parent[idx(next)] >= 0) continue;
      parent[idx(next)] = idx(cur);
      parentKey[idx(next)] = keys[i];
      q.push_back(next);
    }
  }
  if (parent[idx(to)] < 0) return std::nullopt;
  std::vector<char> out;
  for (Vec2 cur = to; cur != from;) {
    out.push_back(parentKey[idx(cur)]);
    int p = parent[idx(cur)];
    cur = {p % w, p / w};
  }
  std::reverse(out.begin(), out.end());
  return out;
}

void pressButton(ButtonMaze& maze, const std::string& buttonId) {
  const ButtonMaze::Button* b = maze.buttonById(buttonId);
  REQUIRE(b != nullptr);
  auto keys = mazeRoute(maze, maze.agentPosition(), b->pos);
  REQUIRE(keys.has_value());
  for (char k : *keys) maze.command("agent", k);
}

}  // namespace

TEST_CASE("the three-room level loads with its buttons and closed doors") {
  ButtonMaze maze = ButtonMaze::loadLevelCSV(kThreeRoomCsv);
  CHECK(maze.buttons().size() == 4);
  CHECK(maze.doors().size() == 3);
  CHECK(maze.wiring().size() == 6);
  for (const ButtonMaze::Door& d : maze.doors()) CHECK_FALSE(d.open);
  CHECK(maze.doorVector() == std::vector<bool>{false, false, false});
  CHECK(maze.width() == 11);
  CHECK(maze.height() == 5);
}

TEST_CASE("levels survive a save and load round trip") {
  ButtonMaze maze = ButtonMaze::loadLevelCSV(kThreeRoomCsv);
  std::string saved = maze.saveLevelCSV();
  ButtonMaze back = ButtonMaze::loadLevelCSV(saved);
  CHECK(back.sameLevel(maze));
  CHECK(back.saveLevelCSV() == saved);
}

TEST_CASE("malformed levels are rejected with positions") {
  try {
    ButtonMaze::loadLevelCSV("w,w,w\nw,z,w\nw,w,w\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line == 2);
    CHECK(e.column == 2);
  }
  // Wiring rows must reference entities that exist.
  CHECK_THROWS_AS(
      ButtonMaze::loadLevelCSV("w,w,w,w\nw,b0,f,w\nw,w,w,w\n\nb0,d9\n"),
      ParseError);
  CHECK_THROWS_AS(
      ButtonMaze::loadLevelCSV("w,w,w,w\nw,b0,f,w\nw,w,w,w\n\nb9,d0\n"),
      ParseError);
  CHECK_THROWS_AS(ButtonMaze::loadLevelCSV("w,w\nw,w,w\n"), ParseError);
  CHECK_THROWS_AS(ButtonMaze::loadLevelCSV(""), ParseError);
}

TEST_CASE("pressing a button toggles every wired door") {
  ButtonMaze maze = ButtonMaze::loadLevelCSV(kThreeRoomCsv);
  pressButton(maze, "b1");  // wired to d2 and d1
  CHECK(maze.doorVector() == std::vector<bool>{false, true, true});
  pressButton(maze, "b1");
  CHECK(maze.doorVector() == std::vector<bool>{false, false, false});
  pressButton(maze, "b0");  // wired to d0 alone
  CHECK(maze.doorVector() == std::vector<bool>{true, false, false});
}

TEST_CASE("closed doors block movement and open ones do not") {
  ButtonMaze maze = ButtonMaze::loadLevelCSV(kThreeRoomCsv);
  const ButtonMaze::Door* d0 = maze.doorById("d0");
  REQUIRE(d0 != nullptr);
  Vec2 side = maze.doorSides("d0").first;
  auto keys = mazeRoute(maze, maze.agentPosition(), side);
  REQUIRE(keys.has_value());
  for (char k : *keys) maze.command("agent", k);

  // Bump the closed door: the turn passes, the agent stays.
  int64_t before = maze.turn();
  WorldModel obs = maze.command("agent", 'd');  // door is to the right of its side
  CHECK(obs.agentPosition == side);
  CHECK(maze.turn() == before + 1);

  pressButton(maze, "b0");
  keys = mazeRoute(maze, maze.agentPosition(), side);
  REQUIRE(keys.has_value());
  for (char k : *keys) maze.command("agent", k);
  obs = maze.command("agent", 'd');
  CHECK(obs.agentPosition == d0->pos);  // standing in the doorway
}

TEST_CASE("every maze command bumps the process-wide command counter") {
  ButtonMaze maze = ButtonMaze::loadLevelCSV(kThreeRoomCsv);
  int64_t before = gameCommandCounter();
  maze.command("agent", 'w');
  maze.command("agent", 's');
  maze.command("agent", 'a');
  CHECK(gameCommandCounter() == before + 3);
}

TEST_CASE("bad keys and unknown agents are rejected") {
  ButtonMaze maze = ButtonMaze::loadLevelCSV(kThreeRoomCsv);
  CHECK_THROWS_AS(maze.command("agent", 'z'), GameRuleError);
  CHECK_THROWS_AS(maze.command("ghost", 'w'), GameRuleError);
  CHECK_THROWS_AS(maze.observe("ghost"), GameRuleError);
}

TEST_CASE("a crash button crashes the game when pressed") {
  ButtonMaze maze = ButtonMaze::loadLevelCSV(kThreeRoomCsv);
  maze.injectCrashButton("b0");
  const ButtonMaze::Button* b0 = maze.buttonById("b0");
  auto keys = mazeRoute(maze, maze.agentPosition(), b0->pos);
  REQUIRE(keys.has_value());
  for (size_t i = 0; i + 1 < keys->size(); ++i) maze.command("agent", (*keys)[i]);
  CHECK_THROWS_AS(maze.command("agent", keys->back()), CrashError);
}

TEST_CASE("access cells follow the fixed neighbour scan order") {
  // b0's up-neighbour is floor: chosen first.
  ButtonMaze up = ButtonMaze::loadLevelCSV("w,w,w\nw,f,w\nw,b0,w\nw,w,w\n");
  CHECK(up.accessCell("b0") == Vec2{1, 1});
  // Up is a wall and left is a wall: the right-hand floor wins over down.
  ButtonMaze right =
      ButtonMaze::loadLevelCSV("w,w,w,w\nw,w,b0,f\nw,w,f,w\n");
  CHECK(right.accessCell("b0") == Vec2{3, 1});
  CHECK_THROWS_AS(up.accessCell("b9"), std::out_of_range);
}

TEST_CASE("door sides come back lower coordinate first") {
  ButtonMaze maze = ButtonMaze::loadLevelCSV(kThreeRoomCsv);
  auto [first, second] = maze.doorSides("d0");
  CHECK(first == Vec2{3, 1});
  CHECK(second == Vec2{5, 1});
  auto [a, b] = maze.doorSides("d1");
  CHECK(a == Vec2{6, 2});
  CHECK(b == Vec2{8, 2});
}

TEST_CASE("the walkable grid covers floor and doors, not buttons or walls") {
  ButtonMaze maze = ButtonMaze::loadLevelCSV(kThreeRoomCsv);
  std::vector<std::vector<bool>> grid = maze.walkableGrid();
  CHECK(grid[1][1]);        // floor
  CHECK(grid[1][4]);        // door d0
  CHECK_FALSE(grid[2][1]);  // button b0
  CHECK_FALSE(grid[0][0]);  // wall
}

TEST_CASE("view distance zero exposes the whole level") {
  ButtonMaze maze = ButtonMaze::loadLevelCSV(kThreeRoomCsv);
  WorldModel whole = maze.observe("agent");
  int entityCount = 0;
  for (const auto& [id, e] : whole.entities)
    if (e.entityType != "wall") ++entityCount;
  CHECK(entityCount == 7);  // 4 buttons + 3 doors
  CHECK(whole.timestamp == maze.turn());

  maze.setViewDistance(1);
  WorldModel narrow = maze.observe("agent");
  for (const auto& [id, e] : narrow.entities)
    CHECK(chebyshev(e.position, narrow.agentPosition) <= 1);
}

namespace {

int findTransition(const Efsm& e, const std::string& src, const std::string& dst,
                   TransitionKind kind) {
  for (size_t i = 0; i < e.transitions.size(); ++i) {
    const EfsmTransition& t = e.transitions[i];
    if (t.kind == kind && e.stateNames[t.src] == src &&
        e.stateNames[t.dst] == dst)
      return static_cast<int>(i);
  }
  return -1;
}

}  // namespace

TEST_CASE("the three-room model has the expected shape") {
  Efsm e = buildEfsm(ButtonMaze::loadLevelCSV(kThreeRoomCsv));
  CHECK(e.stateCount() == 10);  // 4 buttons + 2 per door
  CHECK(e.variables == std::vector<std::string>{"d0", "d1", "d2"});
  CHECK(e.stateNames[e.initialState] == "b0");

  int travel = 0, cross = 0, toggle = 0;
  for (const EfsmTransition& t : e.transitions) {
    switch (t.kind) {
      case TransitionKind::Travel: ++travel; break;
      case TransitionKind::DoorCross: ++cross; break;
      case TransitionKind::Toggle: ++toggle; break;
    }
  }
  // Closed-door regions: {b0,b1,d0_a,d2_a}, {b2,d0_b,d2_b,d1_a}, {b3,d1_b};
  // ordered in-region pairs give 12+12+2 travels.
  CHECK(travel == 26);
  CHECK(cross == 6);  // both directions across each of the 3 doors
  CHECK(toggle == 4);
  for (const EfsmTransition& t : e.transitions) {
    if (t.kind == TransitionKind::DoorCross) CHECK(t.guardDoor >= 0);
    if (t.kind == TransitionKind::Toggle) {
      CHECK(t.src == t.dst);
      CHECK_FALSE(t.updateDoors.empty());
    }
  }
}

TEST_CASE("simulation follows guards and records door history") {
  Efsm e = buildEfsm(ButtonMaze::loadLevelCSV(kThreeRoomCsv));
  int toggleB0 = findTransition(e, "b0", "b0", TransitionKind::Toggle);
  int toD0a = findTransition(e, "b0", "d0_a", TransitionKind::Travel);
  int crossD0 = findTransition(e, "d0_a", "d0_b", TransitionKind::DoorCross);
  int toB2 = findTransition(e, "d0_b", "b2", TransitionKind::Travel);
  REQUIRE(toggleB0 >= 0);
  REQUIRE(toD0a >= 0);
  REQUIRE(crossD0 >= 0);
  REQUIRE(toB2 >= 0);

  SimResult ok = simulate(e, {toggleB0, toD0a, crossD0, toB2});
  CHECK(ok.feasible);
  CHECK(ok.prefixLength == 4);
  REQUIRE(ok.stateTrace.size() == 5);
  CHECK(ok.stateTrace.front() == e.initialState);
  CHECK(e.stateNames[ok.stateTrace.back()] == "b2");
  // d0 opens at the toggle and stays open.
  CHECK(ok.doorTrace[0] == std::vector<bool>{false, false, false});
  for (size_t k = 1; k < ok.doorTrace.size(); ++k)
    CHECK(ok.doorTrace[k] == std::vector<bool>{true, false, false});

  // Without the toggle the guard fails and the prefix stops short.
  SimResult blocked = simulate(e, {toD0a, crossD0, toB2});
  CHECK_FALSE(blocked.feasible);
  CHECK(blocked.prefixLength == 1);

  CHECK_THROWS_AS(simulate(e, {toD0a, toD0a}), std::invalid_argument);
  CHECK_THROWS_AS(simulate(e, {9999}), std::invalid_argument);
}

TEST_CASE("hop distances ignore guards and flag unreachable pairs") {
  Efsm e = buildEfsm(ButtonMaze::loadLevelCSV(kThreeRoomCsv));
  std::vector<std::vector<int>> d = e.distanceMatrix();
  int b0 = e.stateIndex("b0");
  int b3 = e.stateIndex("b3");
  int d1a = e.stateIndex("d1_a");
  CHECK(d[b0][b0] == 0);
  CHECK(d[b0][d1a] == 3);  // b0 → d0_a → d0_b → d1_a through the closed door
  CHECK(d[b0][b3] == 5);

  // Two sealed rooms can never reach each other.
  Efsm isolated = buildEfsm(ButtonMaze::loadLevelCSV(
      "w,w,w,w,w,w,w\nw,b0,f,w,f,b1,w\nw,w,w,w,w,w,w\n"));
  std::vector<std::vector<int>> di = isolated.distanceMatrix();
  CHECK(di[0][1] == Efsm::kUnreachable);
}

TEST_CASE("models and suites survive json round trips") {
  Efsm e = buildEfsm(ButtonMaze::loadLevelCSV(kThreeRoomCsv));
  Efsm back = Efsm::fromJson(e.toJson());
  CHECK(back.stateNames == e.stateNames);
  CHECK(back.variables == e.variables);
  CHECK(back.transitions == e.transitions);
  CHECK(back.initialState == e.initialState);
  CHECK(back.digest() == e.digest());

  Efsm tweaked = e;
  tweaked.transitions.pop_back();
  CHECK(tweaked.digest() != e.digest());

  TestSuite suite;
  suite.strategy = "random";
  suite.seed = 9;
  suite.budget = 100;
  suite.evaluationsUsed = 42;
  suite.modelDigest = e.digest();
  suite.tests = {{0, 1}, {2}};
  TestSuite sback = TestSuite::fromJson(suite.toJson());
  CHECK(sback.strategy == suite.strategy);
  CHECK(sback.seed == suite.seed);
  CHECK(sback.budget == suite.budget);
  CHECK(sback.evaluationsUsed == suite.evaluationsUsed);
  CHECK(sback.modelDigest == suite.modelDigest);
  CHECK(sback.tests == suite.tests);
}

TEST_CASE("coverage counts transitions fired by feasible prefixes only") {
  Efsm e = buildEfsm(ButtonMaze::loadLevelCSV(kThreeRoomCsv));
  int toggleB0 = findTransition(e, "b0", "b0", TransitionKind::Toggle);
  int toD0a = findTransition(e, "b0", "d0_a", TransitionKind::Travel);
  int crossD0 = findTransition(e, "d0_a", "d0_b", TransitionKind::DoorCross);

  CHECK(coverage(e, {}) == 0.0);
  std::vector<TestCase> suite = {{toggleB0, toD0a, crossD0}};
  std::vector<bool> covered = coveredTransitions(e, suite);
  CHECK(covered[toggleB0]);
  CHECK(covered[toD0a]);
  CHECK(covered[crossD0]);
  CHECK(std::count(covered.begin(), covered.end(), true) == 3);
  CHECK(coverage(e, suite) ==
        doctest::Approx(3.0 / static_cast<double>(e.transitions.size())));

  // The guard fails without the toggle: only the first step counts.
  std::vector<TestCase> blocked = {{toD0a, crossD0}};
  std::vector<bool> prefixOnly = coveredTransitions(e, blocked);
  CHECK(prefixOnly[toD0a]);
  CHECK_FALSE(prefixOnly[crossD0]);
  CHECK(coverage(e, blocked) ==
        doctest::Approx(1.0 / static_cast<double>(e.transitions.size())));
}

TEST_CASE("generated levels carry a faithful co-generated model") {
  GeneratedLevel lvl = generateLevel(LevelGenParams{4, 4, 3, 0.3, 17});
  CHECK(lvl.efsm.stateCount() == 10);  // buttons + 2 * doors
  ButtonMaze maze = ButtonMaze::loadLevelCSV(lvl.csv);
  CHECK(maze.buttons().size() == 4);
  CHECK(maze.doors().size() == 3);
  CHECK(buildEfsm(maze).digest() == lvl.efsm.digest());

  GeneratedLevel again = generateLevel(LevelGenParams{4, 4, 3, 0.3, 17});
  CHECK(again.csv == lvl.csv);
  CHECK(again.efsm.digest() == lvl.efsm.digest());
  GeneratedLevel other = generateLevel(LevelGenParams{4, 4, 3, 0.3, 18});
  CHECK(other.csv != lvl.csv);
}

TEST_CASE("state positions map back onto maze cells") {
  GeneratedLevel lvl = generateLevel(LevelGenParams{4, 4, 3, 0.3, 17});
  ButtonMaze maze = ButtonMaze::loadLevelCSV(lvl.csv);
  for (const std::string& name : lvl.efsm.stateNames) {
    Vec2 p = statePosition(maze, name);
    CHECK_FALSE(maze.wallAt(p));
    if (name.find('_') == std::string::npos) {
      CHECK(p == maze.accessCell(name));
    } else {
      std::string doorId = name.substr(0, name.find('_'));
      auto [a, b] = maze.doorSides(doorId);
      CHECK((p == a || p == b));
    }
  }
}

TEST_CASE("a doorless level yields an unguarded model") {
  GeneratedLevel lvl = generateLevel(LevelGenParams{3, 4, 0, 0.0, 5});
  CHECK(lvl.efsm.variables.empty());
  for (const EfsmTransition& t : lvl.efsm.transitions)
    CHECK(t.kind != TransitionKind::DoorCross);
  SimResult r = simulate(lvl.efsm, {0});
  for (const std::vector<bool>& doors : r.doorTrace) CHECK(doors.empty());
}

TEST_CASE("infeasible generator parameters are rejected") {
  CHECK_THROWS_AS(generateLevel(LevelGenParams{0, 4, 3, 0.3, 1}),
                  std::invalid_argument);
  CHECK_THROWS_AS(generateLevel(LevelGenParams{4, 0, 3, 0.3, 1}),
                  std::invalid_argument);
  CHECK_THROWS_AS(generateLevel(LevelGenParams{4, 4, 3, 1.5, 1}),
                  std::invalid_argument);
  CHECK_THROWS_AS(generateLevel(LevelGenParams{1, 9, 3, 0.3, 1}),
                  std::invalid_argument);
}

namespace {

// Product-space exploration of (state, door assignment): every transition the
// model admits from some reachable configuration is fireable.
std::vector<bool> fireableTransitions(const Efsm& e) {
  int doorCount = static_cast<int>(e.variables.size());
  std::vector<std::vector<int>> out = e.outgoing();
  std::set<std::pair<int, uint32_t>> seen;
  std::deque<std::pair<int, uint32_t>> q;
  std::vector<bool> fireable(e.transitions.size(), false);
  q.push_back({e.initialState, 0});
  seen.insert({e.initialState, 0});
  while (!q.empty()) {
    auto [state, doors] = q.front();
    q.pop_front();
    for (int idx : out[state]) {
      const EfsmTransition& t = e.transitions[idx];
      if (t.kind == TransitionKind::DoorCross &&
          !((doors >> t.guardDoor) & 1u))
        continue;
      fireable[idx] = true;
      uint32_t nextDoors = doors;
      for (int d : t.updateDoors) nextDoors ^= 1u << d;
      if (seen.insert({t.dst, nextDoors}).second) q.push_back({t.dst, nextDoors});
    }
  }
  (void)doorCount;
  return fireable;
}

}  // namespace

TEST_CASE("every transition of a generated model is fireable from the start") {
  for (uint64_t seed : {1, 2, 3, 4, 5}) {
    GeneratedLevel lvl = generateLevel(LevelGenParams{4, 4, 3, 0.5, seed});
    std::vector<bool> fireable = fireableTransitions(lvl.efsm);
    CHECK(std::count(fireable.begin(), fireable.end(), false) == 0);
  }
}

TEST_CASE("the large preset lands near its advertised scale") {
  GeneratedLevel lvl = generateLevel(levelScaleL1(3));
  double states = lvl.efsm.stateCount();
  double transitions = lvl.efsm.transitions.size();
  double vars = lvl.efsm.variables.size();
  CHECK(states >= 144 * 0.8);
  CHECK(states <= 144 * 1.2);
  CHECK(transitions >= 558 * 0.8);
  CHECK(transitions <= 558 * 1.2);
  CHECK(vars >= 40 * 0.8);
  CHECK(vars <= 40 * 1.2);
}
