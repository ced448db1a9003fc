#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "autoplay/agent.hpp"
#include "autoplay/rng.hpp"
#include "autoplay/world.hpp"

namespace autoplay {

// Process-wide count of commands executed by any in-process game. Offline
// steps (model-based suite generation) assert this stays flat while they run.
int64_t& gameCommandCounter();

struct GameConfig {
  int levelCount = 1;
  int gridSize = 20;
  int monstersPerLevel = 4;
  int scrollsPerLevel = 3;
  int healPotionsPerLevel = 2;
  int ragePotionsPerLevel = 1;
  int playerCount = 1;       // 1 or 2
  int bagCapacity = 2;       // 1 or 2
  int viewDistance = 3;      // Chebyshev radius
  uint64_t seed = 17;
  bool debugAssertions = false;
  // Implanted-defect switches used to validate the oracles.
  bool buggyMonsterMove = false;  // monster moves skip the occupancy check
  bool wallWalk = false;          // players may step into walls
};

struct AssertionViolation {
  std::string check;
  int64_t turn = 0;
  std::string detail;

  nlohmann::json toJson() const {
    return {{"check", check}, {"turn", turn}, {"detail", detail}};
  }
};

// Multi-level turn-based dungeon. Keys: w/a/s/d move (bumping attacks or
// interacts), e quaff heal potion, r quaff rage potion, q give up. After each
// player command every monster on that player's level acts. Each level holds
// one shrine; bumping it with a scroll in the bag consumes the scroll and
// cleanses the shrine iff the scroll is that level's unique holy one. A
// cleansed shrine is a portal to the next level; cleansing the last shrine
// wins the game.
class MiniDungeon : public Environment {
 public:
  explicit MiniDungeon(const GameConfig& config);

  WorldModel observe(const std::string& playerId) override;
  WorldModel command(const std::string& playerId, char key) override;

  // Consistency checks over the full game state: no two occupants share a
  // square, the incremental occupancy index matches entity positions, hp
  // within bounds. Run automatically after every command when
  // config.debugAssertions is set.
  std::vector<AssertionViolation> implantedAssertions() const;
  const std::vector<AssertionViolation>& violationLog() const { return violationLog_; }

  std::string status() const { return status_; }
  bool over() const { return status_ != "running"; }
  int64_t turn() const { return turn_; }
  const GameConfig& config() const { return config_; }
  std::string nextPlayer() const;

  bool wallAt(int level, Vec2 p) const;
  Vec2 startCell(int level) const;
  uint64_t stateDigest() const;
  nlohmann::json stateDigestJson() const;

 private:
  struct Player {
    std::string id;
    Vec2 pos;
    int level = 0;
    int hp = 0;
    int hpMax = 0;
    std::vector<std::string> bag;
    int score = 0;
    int rageTurnsLeft = 0;
    bool alive = true;
  };
  struct Monster {
    std::string id;
    Vec2 pos;
    int level = 0;
    int hp = 0;
    bool alive = true;
  };
  struct Item {
    std::string id;
    std::string type;  // scroll | healpotion | ragepotion
    Vec2 pos;          // last floor position
    int level = 0;
    bool onFloor = true;
    bool holy = false;  // meaningful for scrolls only; never observable
  };
  struct Shrine {
    std::string id;
    Vec2 pos;
    int level = 0;
    bool cleansed = false;
  };
  struct Level {
    std::vector<uint8_t> walls;  // row-major, 1 = wall
    Vec2 start;
  };

  void generate();
  void generateLevelGrid(int levelIndex);
  bool connected(const Level& lv, int floorCells) const;
  Player& playerRef(const std::string& id);
  Monster* monsterAt(int level, Vec2 p);
  Player* playerAt(int level, Vec2 p);
  Item* floorItemAt(int level, Vec2 p);
  Shrine* shrineAt(int level, Vec2 p);
  bool occupied(int level, Vec2 p) const;
  void moveOrInteract(Player& p, Vec2 dir);
  void quaff(Player& p, const std::string& itemType);
  void monsterPhase(int level);
  void teleport(Player& p, int toLevel);
  void runDebugAssertions();

  GameConfig config_;
  Rng rng_;
  std::vector<Level> levels_;
  std::vector<Player> players_;
  std::vector<Monster> monsters_;
  std::vector<Item> items_;
  std::vector<Shrine> shrines_;
  // Incremental occupant index, one string per cell per level ("" = free).
  // implantedAssertions() cross-checks it against entity positions.
  std::vector<std::vector<std::string>> occupancy_;
  int64_t turn_ = 0;
  std::string status_ = "running";
  int nextPlayerIdx_ = 0;
  std::vector<AssertionViolation> violationLog_;
};

}  // namespace autoplay
