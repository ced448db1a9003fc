#include "autoplay/buttonmaze.hpp"

#include <algorithm>
#include <sstream>

#include "autoplay/errors.hpp"
#include "autoplay/minidungeon.hpp"  // gameCommandCounter

namespace autoplay {

namespace {

// Cell token: returns type ('w', 'f', 'b', 'd') and index for b/d.
std::pair<char, int> parseCell(const std::string& token, int line, int col) {
  if (token == "w") return {'w', -1};
  if (token == "f") return {'f', -1};
  if (token.size() >= 2 && (token[0] == 'b' || token[0] == 'd')) {
    for (size_t i = 1; i < token.size(); ++i)
      if (!isdigit(static_cast<unsigned char>(token[i])))
        throw ParseError(line, col, "bad cell token '" + token + "'");
    return {token[0], std::stoi(token.substr(1))};
  }
  throw ParseError(line, col, "bad cell token '" + token + "'");
}

std::vector<std::string> splitCsvRow(const std::string& row) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : row) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r' && c != ' ') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

ButtonMaze ButtonMaze::loadLevelCSV(const std::string& text) {
  ButtonMaze maze;
  std::istringstream in(text);
  std::string line;
  int lineNo = 0;
  bool inGrid = true;
  std::map<int, Vec2> buttonCells, doorCells;
  std::vector<std::pair<int, int>> wires;
  std::vector<std::pair<int, int>> wireLines;

  while (std::getline(in, line)) {
    ++lineNo;
    std::string stripped = line;
    stripped.erase(std::remove(stripped.begin(), stripped.end(), '\r'),
                   stripped.end());
    if (stripped.empty()) {
      if (inGrid && maze.height_ > 0) inGrid = false;
      continue;
    }
    std::vector<std::string> cells = splitCsvRow(stripped);
    if (inGrid) {
      if (maze.width_ == 0)
        maze.width_ = static_cast<int>(cells.size());
      else if (static_cast<int>(cells.size()) != maze.width_)
        throw ParseError(lineNo, 1, "ragged grid row");
      int y = maze.height_;
      for (int x = 0; x < maze.width_; ++x) {
        auto [kind, index] = parseCell(cells[x], lineNo, x + 1);
        maze.walls_.push_back(kind == 'w' ? 1 : 0);
        if (kind == 'b') {
          if (buttonCells.count(index))
            throw ParseError(lineNo, x + 1, "duplicate button b" + std::to_string(index));
          buttonCells[index] = {x, y};
        } else if (kind == 'd') {
          if (doorCells.count(index))
            throw ParseError(lineNo, x + 1, "duplicate door d" + std::to_string(index));
          doorCells[index] = {x, y};
        }
      }
      ++maze.height_;
    } else {
      if (cells.size() != 2)
        throw ParseError(lineNo, 1, "wiring row must be 'b<i>,d<j>'");
      auto [bk, bi] = parseCell(cells[0], lineNo, 1);
      auto [dk, di] = parseCell(cells[1], lineNo, 2);
      if (bk != 'b' || dk != 'd')
        throw ParseError(lineNo, 1, "wiring row must be 'b<i>,d<j>'");
      wires.push_back({bi, di});
      wireLines.push_back({lineNo, 1});
    }
  }
  if (maze.height_ == 0) throw ParseError(1, 1, "empty level");

  for (const auto& [index, pos] : buttonCells)
    maze.buttons_.push_back({"b" + std::to_string(index), pos, 0});
  for (const auto& [index, pos] : doorCells)
    maze.doors_.push_back({"d" + std::to_string(index), pos, false});

  for (size_t i = 0; i < wires.size(); ++i) {
    auto [bi, di] = wires[i];
    if (!buttonCells.count(bi))
      throw ParseError(wireLines[i].first, 1,
                       "wiring references unknown button b" + std::to_string(bi));
    if (!doorCells.count(di))
      throw ParseError(wireLines[i].first, 2,
                       "wiring references unknown door d" + std::to_string(di));
    maze.wiring_.insert({"b" + std::to_string(bi), "d" + std::to_string(di)});
  }
  for (const auto& [b, d] : maze.wiring_) maze.wiresOfButton_.insert({b, d});

  maze.placeAgent();
  return maze;
}

void ButtonMaze::placeAgent() {
  if (!buttons_.empty()) {
    agentPos_ = accessCell(buttons_.front().id);
    return;
  }
  for (int y = 0; y < height_; ++y)
    for (int x = 0; x < width_; ++x)
      if (!walls_[y * width_ + x] && !doorAt({x, y})) {
        agentPos_ = {x, y};
        return;
      }
  throw ParseError(1, 1, "level has no floor");
}

std::string ButtonMaze::saveLevelCSV() const {
  std::ostringstream os;
  for (int y = 0; y < height_; ++y) {
    for (int x = 0; x < width_; ++x) {
      if (x) os << ',';
      Vec2 p{x, y};
      if (const Button* b = buttonAt(p))
        os << b->id;
      else if (const Door* d = doorAt(p))
        os << d->id;
      else
        os << (walls_[y * width_ + x] ? 'w' : 'f');
    }
    os << '\n';
  }
  os << '\n';
  for (const auto& [b, d] : wiring_) os << b << ',' << d << '\n';
  return os.str();
}

bool ButtonMaze::wallAt(Vec2 p) const {
  if (p.x < 0 || p.y < 0 || p.x >= width_ || p.y >= height_) return true;
  return walls_[p.y * width_ + p.x] != 0;
}

const ButtonMaze::Button* ButtonMaze::buttonAt(Vec2 p) const {
  for (const Button& b : buttons_)
    if (b.pos == p) return &b;
  return nullptr;
}

const ButtonMaze::Door* ButtonMaze::doorAt(Vec2 p) const {
  for (const Door& d : doors_)
    if (d.pos == p) return &d;
  return nullptr;
}

const ButtonMaze::Button* ButtonMaze::buttonById(const std::string& id) const {
  for (const Button& b : buttons_)
    if (b.id == id) return &b;
  return nullptr;
}

const ButtonMaze::Door* ButtonMaze::doorById(const std::string& id) const {
  for (const Door& d : doors_)
    if (d.id == id) return &d;
  return nullptr;
}

std::vector<bool> ButtonMaze::doorVector() const {
  std::vector<bool> v;
  v.reserve(doors_.size());
  for (const Door& d : doors_) v.push_back(d.open);
  return v;
}

Vec2 ButtonMaze::accessCell(const std::string& buttonId) const {
  const Button* b = buttonById(buttonId);
  if (!b) throw std::out_of_range("unknown button " + buttonId);
  for (Vec2 d : kNeighbourOrder) {
    Vec2 p{b->pos.x + d.x, b->pos.y + d.y};
    if (!wallAt(p) && !buttonAt(p) && !doorAt(p)) return p;
  }
  throw std::runtime_error("button " + buttonId + " has no adjacent floor");
}

std::pair<Vec2, Vec2> ButtonMaze::doorSides(const std::string& doorId) const {
  const Door* d = doorById(doorId);
  if (!d) throw std::out_of_range("unknown door " + doorId);
  std::vector<Vec2> sides;
  for (Vec2 n : kNeighbourOrder) {
    Vec2 p{d->pos.x + n.x, d->pos.y + n.y};
    if (!wallAt(p) && !buttonAt(p) && !doorAt(p)) sides.push_back(p);
  }
  if (sides.size() != 2)
    throw std::runtime_error("door " + doorId + " must have exactly two floor sides");
  std::sort(sides.begin(), sides.end(), [](Vec2 a, Vec2 b) {
    return std::pair{a.y, a.x} < std::pair{b.y, b.x};
  });
  return {sides[0], sides[1]};
}

bool ButtonMaze::sameLevel(const ButtonMaze& other) const {
  if (width_ != other.width_ || height_ != other.height_ ||
      walls_ != other.walls_ || wiring_ != other.wiring_)
    return false;
  auto cells = [](const std::vector<Button>& bs) {
    std::vector<std::pair<std::string, Vec2>> v;
    for (const Button& b : bs) v.push_back({b.id, b.pos});
    return v;
  };
  auto doorCells = [](const std::vector<Door>& ds) {
    std::vector<std::pair<std::string, Vec2>> v;
    for (const Door& d : ds) v.push_back({d.id, d.pos});
    return v;
  };
  return cells(buttons_) == cells(other.buttons_) &&
         doorCells(doors_) == doorCells(other.doors_);
}

std::vector<std::vector<bool>> ButtonMaze::walkableGrid() const {
  std::vector<std::vector<bool>> g(height_, std::vector<bool>(width_, false));
  for (int y = 0; y < height_; ++y)
    for (int x = 0; x < width_; ++x)
      g[y][x] = !walls_[y * width_ + x] && !buttonAt({x, y});
  return g;
}

void ButtonMaze::toggle(Button& b) {
  if (b.id == crashButtonId_)
    throw CrashError("game crashed while pressing " + b.id);
  ++b.pressCount;
  auto [lo, hi] = wiresOfButton_.equal_range(b.id);
  for (auto it = lo; it != hi; ++it)
    for (Door& d : doors_)
      if (d.id == it->second) d.open = !d.open;
}

WorldModel ButtonMaze::command(const std::string& agentId, char key) {
  if (agentId != "agent") throw GameRuleError("unknown agent " + agentId);
  Vec2 dir;
  switch (key) {
    case 'w': dir = {0, -1}; break;
    case 's': dir = {0, 1}; break;
    case 'a': dir = {-1, 0}; break;
    case 'd': dir = {1, 0}; break;
    default:
      throw GameRuleError(std::string("invalid key '") + key + "'");
  }
  Vec2 to{agentPos_.x + dir.x, agentPos_.y + dir.y};
  if (!wallAt(to)) {
    if (Button* b = const_cast<Button*>(buttonAt(to))) {
      toggle(*b);
    } else if (const Door* d = doorAt(to)) {
      if (d->open) agentPos_ = to;
    } else {
      agentPos_ = to;
    }
  }
  ++gameCommandCounter();
  ++turn_;
  return observe(agentId);
}

WorldModel ButtonMaze::observe(const std::string& agentId) {
  if (agentId != "agent") throw GameRuleError("unknown agent " + agentId);
  int view = viewDistance_ > 0 ? viewDistance_ : std::max(width_, height_);

  WorldModel m;
  m.agentId = agentId;
  m.timestamp = turn_;
  m.agentPosition = agentPos_;
  m.agentProperties = {
      {"currentLevel", static_cast<int64_t>(0)},
      {"status", std::string("running")},
      {"worldWidth", static_cast<int64_t>(width_)},
      {"worldHeight", static_cast<int64_t>(height_)},
      {"viewDistance", static_cast<int64_t>(view)},
  };

  auto inView = [&](Vec2 p) { return chebyshev(agentPos_, p) <= view; };
  for (const Button& b : buttons_)
    if (inView(b.pos))
      m.entities.emplace(
          b.id, WorldEntity{b.id,
                            "button",
                            b.pos,
                            turn_,
                            {{"level", static_cast<int64_t>(0)},
                             {"pressCount", static_cast<int64_t>(b.pressCount)},
                             {"solid", true}},
                            true});
  for (const Door& d : doors_)
    if (inView(d.pos))
      m.entities.emplace(d.id,
                         WorldEntity{d.id,
                                     "door",
                                     d.pos,
                                     turn_,
                                     {{"level", static_cast<int64_t>(0)},
                                      {"open", d.open}},
                                     true});
  for (int y = std::max(0, agentPos_.y - view);
       y <= std::min(height_ - 1, agentPos_.y + view); ++y)
    for (int x = std::max(0, agentPos_.x - view);
         x <= std::min(width_ - 1, agentPos_.x + view); ++x)
      if (walls_[y * width_ + x]) {
        std::string id = "W_" + std::to_string(x) + "_" + std::to_string(y);
        m.entities.emplace(
            id, WorldEntity{id,
                            "wall",
                            {x, y},
                            turn_,
                            {{"level", static_cast<int64_t>(0)}},
                            true});
      }
  return m;
}

uint64_t ButtonMaze::stateDigest() const {
  std::ostringstream os;
  os << turn_ << '|' << agentPos_.x << ',' << agentPos_.y << '|';
  for (const Button& b : buttons_) os << b.id << ':' << b.pressCount << '|';
  for (const Door& d : doors_) os << d.id << ':' << (d.open ? 'o' : 'c') << '|';
  return fnv1a(os.str());
}

}  // namespace autoplay
