#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "autoplay/agent.hpp"
#include "autoplay/world.hpp"

namespace autoplay {

// Grid maze of buttons wired many-to-many to doors. The agent moves with
// w/a/s/d; bumping a button toggles every door wired to it; a closed door
// cell is impassable, an open one is ordinary floor. All doors start closed.
//
// Level CSV layout: comma-separated grid rows using cells w (wall), f
// (floor), b<i> (button), d<i> (door); then a blank line; then one "b<i>,d<j>"
// wiring row per connection.
class ButtonMaze : public Environment {
 public:
  struct Button {
    std::string id;
    Vec2 pos;
    int pressCount = 0;
  };
  struct Door {
    std::string id;
    Vec2 pos;
    bool open = false;
  };

  static ButtonMaze loadLevelCSV(const std::string& text);
  std::string saveLevelCSV() const;

  WorldModel observe(const std::string& agentId) override;
  WorldModel command(const std::string& agentId, char key) override;

  int width() const { return width_; }
  int height() const { return height_; }
  bool wallAt(Vec2 p) const;
  Vec2 agentPosition() const { return agentPos_; }
  int64_t turn() const { return turn_; }
  const std::vector<Button>& buttons() const { return buttons_; }
  const std::vector<Door>& doors() const { return doors_; }
  const std::set<std::pair<std::string, std::string>>& wiring() const {
    return wiring_;
  }
  std::vector<bool> doorVector() const;
  const Button* buttonAt(Vec2 p) const;
  const Door* doorAt(Vec2 p) const;
  const Button* buttonById(const std::string& id) const;
  const Door* doorById(const std::string& id) const;

  // The designated floor cell from which a button is pressed: its first
  // 4-neighbour floor cell in scan order.
  Vec2 accessCell(const std::string& buttonId) const;
  // The two floor cells flanking a door cell, lower (y,x) first.
  std::pair<Vec2, Vec2> doorSides(const std::string& doorId) const;

  // Structural comparison: grid, entities, wiring (not runtime state).
  bool sameLevel(const ButtonMaze& other) const;

  // Grid of cells an agent could ever stand on (floor and door cells).
  std::vector<std::vector<bool>> walkableGrid() const;

  // Pressing this button raises CrashError instead of toggling.
  void injectCrashButton(const std::string& buttonId) { crashButtonId_ = buttonId; }

  // Chebyshev observation radius; 0 means the whole level is visible.
  void setViewDistance(int v) { viewDistance_ = v; }

  uint64_t stateDigest() const;

 private:
  void toggle(Button& b);
  void placeAgent();

  int width_ = 0;
  int height_ = 0;
  std::vector<uint8_t> walls_;
  std::vector<Button> buttons_;
  std::vector<Door> doors_;
  std::set<std::pair<std::string, std::string>> wiring_;
  std::multimap<std::string, std::string> wiresOfButton_;
  Vec2 agentPos_;
  int64_t turn_ = 0;
  int viewDistance_ = 0;
  std::string crashButtonId_;
};

}  // namespace autoplay
