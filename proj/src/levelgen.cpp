#include "autoplay/levelgen.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "autoplay/rng.hpp"

namespace autoplay {

namespace {

// Region labels over cells walkable with every door closed (floor only;
// button and door cells excluded). -1 = not part of any region.
std::vector<int> doorsClosedRegions(const ButtonMaze& maze) {
  int w = maze.width(), h = maze.height();
  std::vector<int> region(w * h, -1);
  auto passable = [&](Vec2 p) {
    return !maze.wallAt(p) && !maze.buttonAt(p) && !maze.doorAt(p);
  };
  int next = 0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (region[y * w + x] != -1 || !passable({x, y})) continue;
      std::deque<Vec2> queue{{x, y}};
      region[y * w + x] = next;
      while (!queue.empty()) {
        Vec2 c = queue.front();
        queue.pop_front();
        for (Vec2 d : kNeighbourOrder) {
          Vec2 n{c.x + d.x, c.y + d.y};
          if (n.x < 0 || n.y < 0 || n.x >= w || n.y >= h) continue;
          if (region[n.y * w + n.x] == -1 && passable(n)) {
            region[n.y * w + n.x] = next;
            queue.push_back(n);
          }
        }
      }
      ++next;
    }
  }
  return region;
}

}  // namespace

Vec2 statePosition(const ButtonMaze& maze, const std::string& stateName) {
  if (stateName.size() > 2 && stateName.compare(stateName.size() - 2, 2, "_a") == 0)
    return maze.doorSides(stateName.substr(0, stateName.size() - 2)).first;
  if (stateName.size() > 2 && stateName.compare(stateName.size() - 2, 2, "_b") == 0)
    return maze.doorSides(stateName.substr(0, stateName.size() - 2)).second;
  return maze.accessCell(stateName);
}

Efsm buildEfsm(const ButtonMaze& maze) {
  Efsm e;
  std::vector<int> region = doorsClosedRegions(maze);
  int w = maze.width();
  std::vector<int> stateRegion;

  for (const auto& b : maze.buttons()) {
    e.stateNames.push_back(b.id);
    Vec2 cell = maze.accessCell(b.id);
    stateRegion.push_back(region[cell.y * w + cell.x]);
  }
  for (const auto& d : maze.doors()) {
    auto [a, b] = maze.doorSides(d.id);
    e.stateNames.push_back(d.id + "_a");
    stateRegion.push_back(region[a.y * w + a.x]);
    e.stateNames.push_back(d.id + "_b");
    stateRegion.push_back(region[b.y * w + b.x]);
    e.variables.push_back(d.id);
  }
  if (e.stateNames.empty())
    throw std::invalid_argument("level has no buttons or doors to model");
  e.initialState = 0;

  std::map<std::string, int> doorVar;
  for (size_t i = 0; i < e.variables.size(); ++i)
    doorVar[e.variables[i]] = static_cast<int>(i);

  int n = e.stateCount();
  for (int u = 0; u < n; ++u)
    for (int v = 0; v < n; ++v)
      if (u != v && stateRegion[u] >= 0 && stateRegion[u] == stateRegion[v])
        e.transitions.push_back({u, v, TransitionKind::Travel, -1, {}});

  int doorBase = static_cast<int>(maze.buttons().size());
  for (size_t d = 0; d < maze.doors().size(); ++d) {
    int a = doorBase + static_cast<int>(2 * d);
    int var = doorVar.at(maze.doors()[d].id);
    e.transitions.push_back({a, a + 1, TransitionKind::DoorCross, var, {}});
    e.transitions.push_back({a + 1, a, TransitionKind::DoorCross, var, {}});
  }

  for (size_t b = 0; b < maze.buttons().size(); ++b) {
    std::vector<int> updates;
    for (const auto& [bid, did] : maze.wiring())
      if (bid == maze.buttons()[b].id) updates.push_back(doorVar.at(did));
    std::sort(updates.begin(), updates.end());
    int s = static_cast<int>(b);
    e.transitions.push_back({s, s, TransitionKind::Toggle, -1, std::move(updates)});
  }

  return e;
}

namespace {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[a] = b;
    return true;
  }
};

constexpr int kRoomSize = 5;

struct Layout {
  int roomCols = 0, roomRows = 0, width = 0, height = 0;
  std::vector<std::string> grid;  // tokens per cell

  int roomX(int rc) const { return rc * (kRoomSize + 1) + 1; }
  int roomY(int rr) const { return rr * (kRoomSize + 1) + 1; }
  std::string& at(Vec2 p) { return grid[p.y * width + p.x]; }
  const std::string& at(Vec2 p) const { return grid[p.y * width + p.x]; }

  bool floorish(Vec2 p) const {
    if (p.x < 0 || p.y < 0 || p.x >= width || p.y >= height) return false;
    const std::string& t = at(p);
    return t == "f" || t[0] == 'd';
  }

  // Connectivity of walkable cells (floor and doors, doors treated open),
  // used to reject button placements that would pinch off part of a room.
  bool fullyConnected() const {
    std::vector<uint8_t> seen(width * height, 0);
    int total = 0;
    Vec2 first{-1, -1};
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x)
        if (floorish({x, y})) {
          ++total;
          if (first.x < 0) first = {x, y};
        }
    if (total == 0) return false;
    std::deque<Vec2> queue{first};
    seen[first.y * width + first.x] = 1;
    int found = 0;
    while (!queue.empty()) {
      Vec2 c = queue.front();
      queue.pop_front();
      ++found;
      for (Vec2 d : kNeighbourOrder) {
        Vec2 nb{c.x + d.x, c.y + d.y};
        if (floorish(nb) && !seen[nb.y * width + nb.x]) {
          seen[nb.y * width + nb.x] = 1;
          queue.push_back(nb);
        }
      }
    }
    return found == total;
  }
};

}  // namespace

GeneratedLevel generateLevel(const LevelGenParams& params) {
  if (params.rooms < 1) throw std::invalid_argument("rooms must be >= 1");
  if (params.buttons < 0 || params.doors < 0)
    throw std::invalid_argument("negative entity count");
  if (params.doors > 0 && params.buttons == 0)
    throw std::invalid_argument("doors without buttons can never open");
  if (params.buttons + params.doors == 0)
    throw std::invalid_argument("level needs at least one button or door");
  if (params.buttons > params.rooms * 8)
    throw std::invalid_argument("too many buttons for the room count");
  if (params.wiringDensity < 0.0 || params.wiringDensity > 1.0)
    throw std::invalid_argument("wiringDensity must be in [0,1]");

  Rng rng(params.seed ^ 0x6c65766c67656eULL);

  Layout lay;
  lay.roomCols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(params.rooms))));
  lay.roomRows = (params.rooms + lay.roomCols - 1) / lay.roomCols;
  lay.width = lay.roomCols * (kRoomSize + 1) + 1;
  lay.height = lay.roomRows * (kRoomSize + 1) + 1;
  lay.grid.assign(lay.width * lay.height, "w");

  for (int r = 0; r < params.rooms; ++r) {
    int rr = r / lay.roomCols, rc = r % lay.roomCols;
    for (int y = 0; y < kRoomSize; ++y)
      for (int x = 0; x < kRoomSize; ++x)
        lay.at({lay.roomX(rc) + x, lay.roomY(rr) + y}) = "f";
  }

  // Adjacent room pairs with the wall strip separating them.
  struct Edge {
    int a, b;
    std::vector<Vec2> strip;
  };
  std::vector<Edge> edges;
  for (int r = 0; r < params.rooms; ++r) {
    int rr = r / lay.roomCols, rc = r % lay.roomCols;
    if (rc + 1 < lay.roomCols && r + 1 < params.rooms && (r + 1) % lay.roomCols != 0) {
      Edge e{r, r + 1, {}};
      int wallX = lay.roomX(rc) + kRoomSize;
      for (int y = 0; y < kRoomSize; ++y) e.strip.push_back({wallX, lay.roomY(rr) + y});
      edges.push_back(std::move(e));
    }
    if (r + lay.roomCols < params.rooms) {
      Edge e{r, r + lay.roomCols, {}};
      int wallY = lay.roomY(rr) + kRoomSize;
      for (int x = 0; x < kRoomSize; ++x) e.strip.push_back({lay.roomX(rc) + x, wallY});
      edges.push_back(std::move(e));
    }
  }

  std::vector<int> order(edges.size());
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);

  UnionFind uf(params.rooms);
  std::vector<int> treeEdges, spareEdges;
  for (int e : order)
    (uf.unite(edges[e].a, edges[e].b) ? treeEdges : spareEdges).push_back(e);

  // Door (or gap) punch positions; neighbouring strip cells of one punch are
  // kept solid so door sides stay unambiguous.
  std::set<std::pair<int, int>> usedCells;
  auto punch = [&](int e, const std::string& token) -> bool {
    std::vector<Vec2> candidates;
    for (Vec2 c : edges[e].strip) {
      bool nearUsed = false;
      for (Vec2 d : kNeighbourOrder)
        if (usedCells.count({c.x + d.x, c.y + d.y})) nearUsed = true;
      if (!usedCells.count({c.x, c.y}) && !nearUsed) candidates.push_back(c);
    }
    if (candidates.empty()) return false;
    Vec2 c = candidates[rng.below(candidates.size())];
    lay.at(c) = token;
    usedCells.insert({c.x, c.y});
    return true;
  };

  int doorsLeft = params.doors;
  int doorIndex = 0;
  for (int e : treeEdges) {
    if (doorsLeft > 0) {
      if (!punch(e, "d" + std::to_string(doorIndex)))
        throw std::invalid_argument("no room for a door on a connecting wall");
      ++doorIndex;
      --doorsLeft;
    } else if (!punch(e, "f")) {
      throw std::invalid_argument("no room for a gap on a connecting wall");
    }
  }
  std::vector<int> extraPool = spareEdges;
  for (int e : treeEdges) extraPool.push_back(e);
  size_t poolIdx = 0;
  while (doorsLeft > 0) {
    if (poolIdx >= extraPool.size())
      throw std::invalid_argument("not enough wall space for the requested doors");
    if (punch(extraPool[poolIdx], "d" + std::to_string(doorIndex))) {
      ++doorIndex;
      --doorsLeft;
    }
    ++poolIdx;
  }

  // Buttons round-robin across rooms, rejecting placements that disconnect
  // the floor or sit next to a door cell.
  for (int b = 0; b < params.buttons; ++b) {
    int room = b % params.rooms;
    int rr = room / lay.roomCols, rc = room % lay.roomCols;
    bool placed = false;
    for (int attempt = 0; attempt < 60 && !placed; ++attempt) {
      Vec2 c{lay.roomX(rc) + rng.belowInt(kRoomSize),
             lay.roomY(rr) + rng.belowInt(kRoomSize)};
      if (lay.at(c) != "f") continue;
      bool nextToSpecial = false;
      bool hasFloorNeighbour = false;
      for (Vec2 d : kNeighbourOrder) {
        Vec2 nb{c.x + d.x, c.y + d.y};
        const std::string& t = lay.at(nb);
        if (t[0] == 'd' || t[0] == 'b') nextToSpecial = true;
        if (t == "f") hasFloorNeighbour = true;
      }
      if (nextToSpecial || !hasFloorNeighbour) continue;
      lay.at(c) = "b" + std::to_string(b);
      if (lay.fullyConnected())
        placed = true;
      else
        lay.at(c) = "f";
    }
    if (!placed)
      throw std::invalid_argument("could not place button b" + std::to_string(b));
  }

  // Wiring starts from an independent density draw per button/door pair.
  std::vector<std::pair<int, int>> wires;
  for (int d = 0; d < params.doors; ++d)
    for (int b = 0; b < params.buttons; ++b)
      if (rng.chance(params.wiringDensity)) wires.push_back({b, d});

  auto renderCsv = [&](const std::vector<std::pair<int, int>>& ws) {
    std::ostringstream csv;
    for (int y = 0; y < lay.height; ++y) {
      for (int x = 0; x < lay.width; ++x) {
        if (x) csv << ',';
        csv << lay.at({x, y});
      }
      csv << '\n';
    }
    csv << '\n';
    std::vector<std::pair<int, int>> sorted = ws;
    std::sort(sorted.begin(), sorted.end());
    for (const auto& [b, d] : sorted) csv << 'b' << b << ",d" << d << '\n';
    return csv.str();
  };

  // Solvability pass: walk the door graph outward from the starting region
  // (the first-scanned button's, where the agent spawns) and make sure every
  // door met on the way is openable by a button already reachable, adding a
  // wire where the density draw left none. Idle buttons are preferred so
  // wires spread out. Without this the start region routinely has no button
  // opening any of its exits and most of the level is dead space.
  if (params.doors > 0) {
    ButtonMaze probe = ButtonMaze::loadLevelCSV(renderCsv(wires));
    std::vector<int> region = doorsClosedRegions(probe);
    auto regionAt = [&](Vec2 p) { return region[p.y * probe.width() + p.x]; };

    int nb = static_cast<int>(probe.buttons().size());
    int nd = static_cast<int>(probe.doors().size());
    std::vector<int> buttonNum(nb), buttonRegion(nb);
    std::vector<char> buttonWired(params.buttons, 0);
    for (const auto& [b, d] : wires) buttonWired[b] = 1;
    for (int i = 0; i < nb; ++i) {
      buttonNum[i] = std::stoi(probe.buttons()[i].id.substr(1));
      buttonRegion[i] = regionAt(probe.accessCell(probe.buttons()[i].id));
    }
    std::vector<std::pair<int, int>> doorRegions(nd);
    std::vector<int> doorNum(nd);
    for (int i = 0; i < nd; ++i) {
      auto [sideA, sideB] = probe.doorSides(probe.doors()[i].id);
      doorRegions[i] = {regionAt(sideA), regionAt(sideB)};
      doorNum[i] = std::stoi(probe.doors()[i].id.substr(1));
    }
    std::set<std::pair<int, int>> wireSet(wires.begin(), wires.end());

    std::set<int> reachable{buttonRegion[0]};
    std::vector<char> done(nd, 0);
    for (;;) {
      int pick = -1;
      for (int i = 0; i < nd && pick < 0; ++i)
        if (!done[i] && (reachable.count(doorRegions[i].first) ||
                         reachable.count(doorRegions[i].second)))
          pick = i;
      if (pick < 0) break;
      done[pick] = 1;
      bool openable = false;
      for (int i = 0; i < nb && !openable; ++i)
        if (reachable.count(buttonRegion[i]) &&
            wireSet.count({buttonNum[i], doorNum[pick]}))
          openable = true;
      if (!openable) {
        std::vector<int> cand, idle;
        for (int i = 0; i < nb; ++i)
          if (reachable.count(buttonRegion[i])) {
            cand.push_back(buttonNum[i]);
            if (!buttonWired[buttonNum[i]]) idle.push_back(buttonNum[i]);
          }
        const std::vector<int>& pool = idle.empty() ? cand : idle;
        int b = pool[rng.below(pool.size())];
        wires.push_back({b, doorNum[pick]});
        wireSet.insert({b, doorNum[pick]});
        buttonWired[b] = 1;
      }
      reachable.insert(doorRegions[pick].first);
      reachable.insert(doorRegions[pick].second);
    }

    // Doors the walk never met (degenerate geometry only) still get their
    // promised wire.
    for (int i = 0; i < nd; ++i) {
      bool wired = false;
      for (const auto& [b, d] : wires)
        if (d == doorNum[i]) wired = true;
      if (!wired) wires.push_back({rng.belowInt(params.buttons), doorNum[i]});
    }
  }

  // The walk above reads "openable" off the wiring alone, but a press flips
  // every door on the button's list, and buttons sharing toggle sets can lock
  // door parities together so that some door is never open while the agent
  // stands beside it. Where the full (state, door-vector) space is small
  // enough to enumerate, verify every model transition can actually fire from
  // the initial state and patch the wiring until it can. Each round targets a
  // blocked crossing whose near side is reachable and wires its door to a
  // button the agent can press, preferring idle buttons whose new single-door
  // toggle cannot create fresh coupling.
  constexpr int kExactRepairDoorLimit = 16;
  if (params.doors > 0 && params.doors <= kExactRepairDoorLimit) {
    std::set<std::pair<int, int>> wireSet(wires.begin(), wires.end());
    const int maxRounds = params.buttons * params.doors;
    for (int round = 0; round <= maxRounds; ++round) {
      Efsm efsm = buildEfsm(ButtonMaze::loadLevelCSV(renderCsv(wires)));
      auto outs = efsm.outgoing();
      std::vector<std::set<uint32_t>> seen(efsm.stateCount());
      std::vector<char> fireable(efsm.transitions.size(), 0);
      std::vector<std::pair<int, uint32_t>> stack;
      seen[efsm.initialState].insert(0);
      stack.push_back({efsm.initialState, 0});
      while (!stack.empty()) {
        auto [s, bits] = stack.back();
        stack.pop_back();
        for (int t : outs[s]) {
          const EfsmTransition& tr = efsm.transitions[t];
          uint32_t next = bits;
          if (tr.kind == TransitionKind::DoorCross) {
            if (!(bits >> tr.guardDoor & 1u)) continue;
          } else if (tr.kind == TransitionKind::Toggle) {
            for (int d : tr.updateDoors) next ^= 1u << d;
          }
          fireable[t] = 1;
          if (seen[tr.dst].insert(next).second) stack.push_back({tr.dst, next});
        }
      }

      // If every crossing out of reached territory fires, every state is
      // reached and unguarded transitions fire trivially, so this picks
      // nothing exactly when the level is fully exercisable.
      int blocked = -1;
      for (size_t t = 0; t < efsm.transitions.size() && blocked < 0; ++t) {
        const EfsmTransition& tr = efsm.transitions[t];
        if (!fireable[t] && tr.kind == TransitionKind::DoorCross &&
            !seen[tr.src].empty())
          blocked = static_cast<int>(t);
      }
      if (blocked < 0) break;

      int door = std::stoi(
          efsm.variables[efsm.transitions[blocked].guardDoor].substr(1));
      std::vector<int> cand, idle;
      for (const EfsmTransition& tr : efsm.transitions) {
        if (tr.kind != TransitionKind::Toggle || seen[tr.src].empty()) continue;
        int b = std::stoi(efsm.stateNames[tr.src].substr(1));
        if (wireSet.count({b, door})) continue;
        cand.push_back(b);
        if (tr.updateDoors.empty()) idle.push_back(b);
      }
      if (cand.empty()) break;
      const std::vector<int>& pool = idle.empty() ? cand : idle;
      int b = pool[rng.below(pool.size())];
      wires.push_back({b, door});
      wireSet.insert({b, door});
    }
  }

  GeneratedLevel out;
  out.csv = renderCsv(wires);
  out.efsm = buildEfsm(ButtonMaze::loadLevelCSV(out.csv));
  return out;
}

LevelGenParams levelScaleL1(uint64_t seed) {
  LevelGenParams p;
  p.rooms = 36;
  p.buttons = 64;
  p.doors = 40;
  p.wiringDensity = 0.04;
  p.seed = seed;
  return p;
}

}  // namespace autoplay
