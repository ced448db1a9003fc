#include "autoplay/minidungeon.hpp"

#include <algorithm>
#include <deque>
#include <sstream>
#include <stdexcept>

#include "autoplay/errors.hpp"

namespace autoplay {

int64_t& gameCommandCounter() {
  static int64_t counter = 0;
  return counter;
}

namespace {

constexpr int kMonsterHp = 3;
constexpr int kMonsterDamage = 1;
constexpr int kPlayerDamage = 1;
constexpr int kRagedDamage = 2;
constexpr int kPlayerHpMax = 20;
constexpr int kHealAmount = 5;
constexpr int kRageTurns = 9;
constexpr double kWallDensity = 0.15;

}  // namespace

MiniDungeon::MiniDungeon(const GameConfig& config)
    : config_(config), rng_(config.seed ^ 0x6d696e69647567ULL) {
  if (config_.levelCount < 1) throw std::invalid_argument("levelCount must be >= 1");
  if (config_.gridSize < 5) throw std::invalid_argument("gridSize must be >= 5");
  if (config_.playerCount < 1 || config_.playerCount > 2)
    throw std::invalid_argument("playerCount must be 1 or 2");
  if (config_.bagCapacity < 1 || config_.bagCapacity > 2)
    throw std::invalid_argument("bagCapacity must be 1 or 2");
  if (config_.viewDistance < 1)
    throw std::invalid_argument("viewDistance must be >= 1");
  if (config_.monstersPerLevel < 0 || config_.scrollsPerLevel < 1)
    throw std::invalid_argument("need >= 1 scroll per level");
  generate();
}

bool MiniDungeon::wallAt(int level, Vec2 p) const {
  int n = config_.gridSize;
  if (p.x < 0 || p.y < 0 || p.x >= n || p.y >= n) return true;
  return levels_[level].walls[p.y * n + p.x] != 0;
}

Vec2 MiniDungeon::startCell(int level) const { return levels_[level].start; }

void MiniDungeon::generateLevelGrid(int) {
  int n = config_.gridSize;
  Level lv;
  lv.walls.assign(n * n, 0);
  for (int i = 0; i < n; ++i) {
    lv.walls[i] = lv.walls[(n - 1) * n + i] = 1;
    lv.walls[i * n] = lv.walls[i * n + n - 1] = 1;
  }
  lv.start = {1, 1};

  // Interior walls are accepted one at a time, only while every floor cell
  // stays reachable from the start.
  std::vector<int> candidates;
  for (int y = 1; y < n - 1; ++y)
    for (int x = 1; x < n - 1; ++x)
      if (!(x == 1 && (y == 1 || y == 2))) candidates.push_back(y * n + x);
  rng_.shuffle(candidates);
  int target = static_cast<int>(kWallDensity * candidates.size());
  int placed = 0;
  int floorCells = n * n - 4 * (n - 1);
  for (int cell : candidates) {
    if (placed >= target) break;
    lv.walls[cell] = 1;
    if (connected(lv, floorCells - placed - 1))
      ++placed;
    else
      lv.walls[cell] = 0;
  }
  levels_.push_back(std::move(lv));
}

bool MiniDungeon::connected(const Level& lv, int floorCells) const {
  int n = config_.gridSize;
  std::vector<uint8_t> seen(n * n, 0);
  std::deque<int> queue{lv.start.y * n + lv.start.x};
  if (lv.walls[queue.front()]) return false;
  seen[queue.front()] = 1;
  int found = 0;
  while (!queue.empty()) {
    int cell = queue.front();
    queue.pop_front();
    ++found;
    int x = cell % n, y = cell / n;
    for (Vec2 d : kNeighbourOrder) {
      int nx = x + d.x, ny = y + d.y;
      if (nx < 0 || ny < 0 || nx >= n || ny >= n) continue;
      int nc = ny * n + nx;
      if (!lv.walls[nc] && !seen[nc]) {
        seen[nc] = 1;
        queue.push_back(nc);
      }
    }
  }
  return found == floorCells;
}

void MiniDungeon::generate() {
  int n = config_.gridSize;
  occupancy_.assign(config_.levelCount, std::vector<std::string>(n * n));

  for (int l = 0; l < config_.levelCount; ++l) {
    generateLevelGrid(l);
    Level& lv = levels_[l];

    std::vector<Vec2> free;
    for (int y = 1; y < n - 1; ++y)
      for (int x = 1; x < n - 1; ++x)
        if (!lv.walls[y * n + x] && !(Vec2{x, y} == lv.start) &&
            !(Vec2{x, y} == Vec2{1, 2}))
          free.push_back({x, y});
    rng_.shuffle(free);

    int needed = config_.monstersPerLevel + config_.scrollsPerLevel +
                 config_.healPotionsPerLevel + config_.ragePotionsPerLevel + 1;
    if (needed > static_cast<int>(free.size()))
      throw std::invalid_argument("config infeasible: more objects than floor cells");

    size_t next = 0;
    auto take = [&] { return free[next++]; };

    int holy = rng_.belowInt(config_.scrollsPerLevel);
    for (int k = 0; k < config_.scrollsPerLevel; ++k)
      items_.push_back({"S_" + std::to_string(l) + "_" + std::to_string(k),
                        "scroll", take(), l, true, k == holy});
    for (int k = 0; k < config_.healPotionsPerLevel; ++k)
      items_.push_back({"HP_" + std::to_string(l) + "_" + std::to_string(k),
                        "healpotion", take(), l, true, false});
    for (int k = 0; k < config_.ragePotionsPerLevel; ++k)
      items_.push_back({"RP_" + std::to_string(l) + "_" + std::to_string(k),
                        "ragepotion", take(), l, true, false});
    shrines_.push_back({"SHRINE_" + std::to_string(l), take(), l, false});
    for (int k = 0; k < config_.monstersPerLevel; ++k) {
      Monster m{"M_" + std::to_string(l) + "_" + std::to_string(k), take(), l,
                kMonsterHp, true};
      occupancy_[l][m.pos.y * n + m.pos.x] = m.id;
      monsters_.push_back(std::move(m));
    }
  }

  for (int p = 0; p < config_.playerCount; ++p) {
    Player pl;
    pl.id = "P" + std::to_string(p);
    pl.pos = p == 0 ? levels_[0].start : Vec2{1, 2};
    pl.level = 0;
    pl.hp = pl.hpMax = kPlayerHpMax;
    pl.score = 0;
    occupancy_[0][pl.pos.y * n + pl.pos.x] = pl.id;
    players_.push_back(std::move(pl));
  }
}

MiniDungeon::Player& MiniDungeon::playerRef(const std::string& id) {
  for (Player& p : players_)
    if (p.id == id) return p;
  throw GameRuleError("unknown player " + id);
}

MiniDungeon::Monster* MiniDungeon::monsterAt(int level, Vec2 p) {
  for (Monster& m : monsters_)
    if (m.alive && m.level == level && m.pos == p) return &m;
  return nullptr;
}

MiniDungeon::Player* MiniDungeon::playerAt(int level, Vec2 p) {
  for (Player& pl : players_)
    if (pl.alive && pl.level == level && pl.pos == p) return &pl;
  return nullptr;
}

MiniDungeon::Item* MiniDungeon::floorItemAt(int level, Vec2 p) {
  for (Item& it : items_)
    if (it.onFloor && it.level == level && it.pos == p) return &it;
  return nullptr;
}

MiniDungeon::Shrine* MiniDungeon::shrineAt(int level, Vec2 p) {
  for (Shrine& s : shrines_)
    if (s.level == level && s.pos == p) return &s;
  return nullptr;
}

bool MiniDungeon::occupied(int level, Vec2 p) const {
  int n = config_.gridSize;
  return !occupancy_[level][p.y * n + p.x].empty();
}

std::string MiniDungeon::nextPlayer() const {
  return players_[nextPlayerIdx_].id;
}

WorldModel MiniDungeon::command(const std::string& playerId, char key) {
  if (over()) throw GameRuleError("command after game over (status " + status_ + ")");
  Player& p = playerRef(playerId);
  if (!p.alive) throw GameRuleError("command from dead player " + playerId);
  if (players_[nextPlayerIdx_].id != playerId)
    throw GameRuleError("out of turn: expected " + players_[nextPlayerIdx_].id);

  switch (key) {
    case 'w': moveOrInteract(p, {0, -1}); break;
    case 's': moveOrInteract(p, {0, 1}); break;
    case 'a': moveOrInteract(p, {-1, 0}); break;
    case 'd': moveOrInteract(p, {1, 0}); break;
    case 'e': quaff(p, "healpotion"); break;
    case 'r': quaff(p, "ragepotion"); break;
    case 'q': status_ = "quit"; break;
    default:
      throw GameRuleError(std::string("invalid key '") + key + "'");
  }
  ++gameCommandCounter();
  ++turn_;

  if (status_ == "running") {
    monsterPhase(p.level);
    if (p.rageTurnsLeft > 0) --p.rageTurnsLeft;
    if (std::none_of(players_.begin(), players_.end(),
                     [](const Player& q) { return q.alive; }))
      status_ = "lost";
  }

  // Advance the turn order past dead players.
  if (config_.playerCount > 1) {
    for (int i = 0; i < config_.playerCount; ++i) {
      nextPlayerIdx_ = (nextPlayerIdx_ + 1) % config_.playerCount;
      if (players_[nextPlayerIdx_].alive) break;
    }
  }

  if (config_.debugAssertions) runDebugAssertions();
  return observe(playerId);
}

void MiniDungeon::moveOrInteract(Player& p, Vec2 dir) {
  int n = config_.gridSize;
  Vec2 to{p.pos.x + dir.x, p.pos.y + dir.y};
  if (wallAt(p.level, to)) {
    if (!config_.wallWalk) return;  // bump, turn still consumed
    if (to.x < 0 || to.y < 0 || to.x >= n || to.y >= n) return;
    // Implanted defect: walk straight into the wall cell.
    occupancy_[p.level][p.pos.y * n + p.pos.x].clear();
    p.pos = to;
    occupancy_[p.level][to.y * n + to.x] = p.id;
    return;
  }

  if (Monster* m = monsterAt(p.level, to)) {
    m->hp -= p.rageTurnsLeft > 0 ? kRagedDamage : kPlayerDamage;
    if (m->hp <= 0) {
      m->alive = false;
      occupancy_[m->level][m->pos.y * n + m->pos.x].clear();
      p.score += 10;
    }
    return;
  }

  if (playerAt(p.level, to)) return;  // friendly bump

  if (Shrine* s = shrineAt(p.level, to)) {
    if (!s->cleansed) {
      // Find the first scroll in the bag; it is consumed either way.
      auto scrollIt = std::find_if(p.bag.begin(), p.bag.end(), [&](const std::string& id) {
        for (const Item& it : items_)
          if (it.id == id) return it.type == "scroll";
        return false;
      });
      if (scrollIt == p.bag.end()) return;
      Item* used = nullptr;
      for (Item& it : items_)
        if (it.id == *scrollIt) used = &it;
      p.bag.erase(scrollIt);
      if (used->holy) {
        s->cleansed = true;
        p.score += 100;
        if (s->level == config_.levelCount - 1) status_ = "won";
      }
      return;
    }
    // Portal: step through to the next level.
    if (s->level < config_.levelCount - 1) teleport(p, s->level + 1);
    return;
  }

  occupancy_[p.level][p.pos.y * n + p.pos.x].clear();
  p.pos = to;
  occupancy_[p.level][to.y * n + to.x] = p.id;

  if (Item* it = floorItemAt(p.level, to)) {
    if (static_cast<int>(p.bag.size()) < config_.bagCapacity) {
      it->onFloor = false;
      p.bag.push_back(it->id);
      p.score += 5;
    }
  }
}

void MiniDungeon::teleport(Player& p, int toLevel) {
  int n = config_.gridSize;
  occupancy_[p.level][p.pos.y * n + p.pos.x].clear();
  Vec2 arrive = levels_[toLevel].start;
  if (occupied(toLevel, arrive) || shrineAt(toLevel, arrive)) {
    // Nearest free floor cell, breadth-first from the start cell.
    std::deque<Vec2> queue{arrive};
    std::vector<uint8_t> seen(n * n, 0);
    seen[arrive.y * n + arrive.x] = 1;
    while (!queue.empty()) {
      Vec2 c = queue.front();
      queue.pop_front();
      if (!occupied(toLevel, c) && !shrineAt(toLevel, c) && !wallAt(toLevel, c)) {
        arrive = c;
        break;
      }
      for (Vec2 d : kNeighbourOrder) {
        Vec2 nc{c.x + d.x, c.y + d.y};
        if (wallAt(toLevel, nc)) continue;
        if (!seen[nc.y * n + nc.x]) {
          seen[nc.y * n + nc.x] = 1;
          queue.push_back(nc);
        }
      }
    }
  }
  p.level = toLevel;
  p.pos = arrive;
  occupancy_[toLevel][arrive.y * n + arrive.x] = p.id;
}

void MiniDungeon::quaff(Player& p, const std::string& itemType) {
  auto bagIt = std::find_if(p.bag.begin(), p.bag.end(), [&](const std::string& id) {
    for (const Item& it : items_)
      if (it.id == id) return it.type == itemType;
    return false;
  });
  if (bagIt == p.bag.end()) return;  // nothing to quaff; turn still consumed
  p.bag.erase(bagIt);
  if (itemType == "healpotion")
    p.hp = std::min(p.hpMax, p.hp + kHealAmount);
  else
    p.rageTurnsLeft = kRageTurns + 1;  // decremented at end of this turn
}

void MiniDungeon::monsterPhase(int level) {
  int n = config_.gridSize;
  for (Monster& m : monsters_) {
    if (!m.alive || m.level != level) continue;

    Player* victim = nullptr;
    for (Player& pl : players_) {
      if (!pl.alive || pl.level != level) continue;
      if (manhattan(pl.pos, m.pos) == 1 && (!victim || pl.id < victim->id))
        victim = &pl;
    }
    if (victim) {
      victim->hp -= kMonsterDamage;
      if (victim->hp <= 0) {
        victim->hp = 0;
        victim->alive = false;
        occupancy_[level][victim->pos.y * n + victim->pos.x].clear();
      }
      continue;
    }

    std::vector<Vec2> moves;
    for (Vec2 d : kNeighbourOrder) {
      Vec2 to{m.pos.x + d.x, m.pos.y + d.y};
      if (wallAt(level, to)) continue;
      if (shrineAt(level, to)) continue;
      // The occupancy check the buggyMonsterMove defect removes.
      if (!config_.buggyMonsterMove && occupied(level, to)) continue;
      moves.push_back(to);
    }
    if (moves.empty()) continue;
    Vec2 to = moves[rng_.below(moves.size())];
    occupancy_[level][m.pos.y * n + m.pos.x].clear();
    m.pos = to;
    occupancy_[level][to.y * n + to.x] = m.id;
  }
}

std::vector<AssertionViolation> MiniDungeon::implantedAssertions() const {
  std::vector<AssertionViolation> out;
  int n = config_.gridSize;

  std::map<std::pair<int, int>, std::vector<std::string>> byCell;
  for (const Player& p : players_)
    if (p.alive) byCell[{p.level, p.pos.y * n + p.pos.x}].push_back(p.id);
  for (const Monster& m : monsters_)
    if (m.alive) byCell[{m.level, m.pos.y * n + m.pos.x}].push_back(m.id);

  for (const auto& [cell, ids] : byCell) {
    if (ids.size() > 1) {
      std::string who;
      for (const auto& id : ids) who += (who.empty() ? "" : ",") + id;
      out.push_back({"occupant-overlap", turn_,
                     "level " + std::to_string(cell.first) + " cell (" +
                         std::to_string(cell.second % n) + "," +
                         std::to_string(cell.second / n) + "): " + who});
    }
    const std::string& indexed = occupancy_[cell.first][cell.second];
    if (std::find(ids.begin(), ids.end(), indexed) == ids.end())
      out.push_back({"occupancy-index", turn_,
                     "index says '" + indexed + "' at level " +
                         std::to_string(cell.first) + " cell " +
                         std::to_string(cell.second)});
  }

  for (int l = 0; l < config_.levelCount; ++l)
    for (int cell = 0; cell < n * n; ++cell)
      if (!occupancy_[l][cell].empty() && !byCell.count({l, cell}))
        out.push_back({"occupancy-index", turn_,
                       "stale entry '" + occupancy_[l][cell] + "' at level " +
                           std::to_string(l) + " cell " + std::to_string(cell)});

  for (const Player& p : players_) {
    if (p.hp < 0 || p.hp > p.hpMax)
      out.push_back({"hp-bounds", turn_, p.id + " hp " + std::to_string(p.hp)});
    if (p.alive && wallAt(p.level, p.pos))
      out.push_back({"player-in-wall", turn_, p.id});
  }
  for (const Monster& m : monsters_)
    if (m.alive && (m.hp < 1 || m.hp > kMonsterHp))
      out.push_back({"hp-bounds", turn_, m.id + " hp " + std::to_string(m.hp)});

  return out;
}

void MiniDungeon::runDebugAssertions() {
  for (AssertionViolation& v : implantedAssertions())
    violationLog_.push_back(std::move(v));
}

WorldModel MiniDungeon::observe(const std::string& playerId) {
  const Player& p = playerRef(playerId);
  int n = config_.gridSize;
  int view = config_.viewDistance;

  WorldModel m;
  m.agentId = playerId;
  m.timestamp = turn_;
  m.agentPosition = p.pos;
  m.agentProperties = {
      {"hp", static_cast<int64_t>(p.hp)},
      {"hpMax", static_cast<int64_t>(p.hpMax)},
      {"bagContents", p.bag},
      {"bagCapacity", static_cast<int64_t>(config_.bagCapacity)},
      {"score", static_cast<int64_t>(p.score)},
      {"currentLevel", static_cast<int64_t>(p.level)},
      {"rageTurnsLeft", static_cast<int64_t>(p.rageTurnsLeft)},
      {"status", status_},
      {"worldWidth", static_cast<int64_t>(n)},
      {"worldHeight", static_cast<int64_t>(n)},
      {"viewDistance", static_cast<int64_t>(view)},
  };

  auto inView = [&](int level, Vec2 q) {
    return level == p.level && chebyshev(p.pos, q) <= view;
  };
  auto add = [&](WorldEntity e) { m.entities.emplace(e.id, std::move(e)); };

  for (const Player& other : players_) {
    if (other.id != p.id && !inView(other.level, other.pos)) continue;
    add({other.id, "player", other.pos, turn_,
         {{"level", static_cast<int64_t>(other.level)},
          {"hp", static_cast<int64_t>(other.hp)}},
         other.alive});
  }
  for (const Monster& mo : monsters_) {
    if (!inView(mo.level, mo.pos)) continue;
    add({mo.id, "monster", mo.pos, turn_,
         {{"level", static_cast<int64_t>(mo.level)},
          {"hp", static_cast<int64_t>(mo.hp)}},
         mo.alive});
  }
  for (const Item& it : items_) {
    if (!inView(it.level, it.pos)) continue;
    add({it.id, it.type, it.pos, turn_,
         {{"level", static_cast<int64_t>(it.level)}}, it.onFloor});
  }
  for (const Shrine& s : shrines_) {
    if (!inView(s.level, s.pos)) continue;
    add({s.id, "shrine", s.pos, turn_,
         {{"level", static_cast<int64_t>(s.level)},
          {"cleansed", s.cleansed},
          {"solid", !s.cleansed}},
         true});
  }
  for (int y = std::max(0, p.pos.y - view); y <= std::min(n - 1, p.pos.y + view); ++y)
    for (int x = std::max(0, p.pos.x - view); x <= std::min(n - 1, p.pos.x + view); ++x)
      if (levels_[p.level].walls[y * n + x])
        add({"W_" + std::to_string(p.level) + "_" + std::to_string(x) + "_" +
                 std::to_string(y),
             "wall",
             {x, y},
             turn_,
             {{"level", static_cast<int64_t>(p.level)}},
             true});

  return m;
}

uint64_t MiniDungeon::stateDigest() const {
  std::ostringstream os;
  os << turn_ << '|' << status_ << '|';
  for (const Player& p : players_)
    os << p.id << ':' << p.pos.x << ',' << p.pos.y << ':' << p.level << ':'
       << p.hp << ':' << p.score << ':' << p.rageTurnsLeft << ':'
       << (p.alive ? 'a' : 'd') << ':' << p.bag.size() << '|';
  for (const Monster& m : monsters_)
    os << m.id << ':' << m.pos.x << ',' << m.pos.y << ':' << m.hp << ':'
       << (m.alive ? 'a' : 'd') << '|';
  for (const Item& it : items_)
    os << it.id << ':' << (it.onFloor ? 'f' : 'x') << '|';
  for (const Shrine& s : shrines_)
    os << s.id << ':' << (s.cleansed ? 'c' : 'u') << '|';
  return fnv1a(os.str());
}

nlohmann::json MiniDungeon::stateDigestJson() const {
  nlohmann::json players = nlohmann::json::array();
  for (const Player& p : players_)
    players.push_back({{"id", p.id},
                       {"position", {p.pos.x, p.pos.y}},
                       {"level", p.level},
                       {"hp", p.hp},
                       {"score", p.score},
                       {"alive", p.alive}});
  return {{"turn", turn_},
          {"status", status_},
          {"digest", hexDigest(stateDigest())},
          {"players", players}};
}

}  // namespace autoplay
