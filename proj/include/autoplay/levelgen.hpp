#pragma once

#include <cstdint>
#include <string>

#include "autoplay/buttonmaze.hpp"
#include "autoplay/efsm.hpp"

namespace autoplay {

// Derives the finite-state model of a loaded level. States: one per button
// (named by the button id) plus <door>_a and <door>_b per door side; initial
// state is the lowest-indexed button. Travel transitions join states whose
// cells are mutually reachable with every door closed; doorCross joins a
// door's sides guarded on that door; one toggle self-loop per button updates
// its wired doors. Door order defines the variable vector.
Efsm buildEfsm(const ButtonMaze& maze);

// Maze position a state name denotes: a button's access cell or a door
// side's flanking cell.
Vec2 statePosition(const ButtonMaze& maze, const std::string& stateName);

struct LevelGenParams {
  int rooms = 4;
  int buttons = 4;
  int doors = 3;
  double wiringDensity = 0.3;
  uint64_t seed = 17;
};

struct GeneratedLevel {
  std::string csv;
  Efsm efsm;
};

// Seeded room-grid layout: rooms connected by a spanning tree whose edges
// carry doors (or plain gaps once doors run out), extra doors on non-tree
// walls, buttons scattered inside rooms without breaking floor connectivity,
// every door wired to at least one button. The returned model is
// buildEfsm(loadLevelCSV(csv)). Throws std::invalid_argument for infeasible
// parameter sets.
GeneratedLevel generateLevel(const LevelGenParams& params);

// Parameter set whose generated models land near 144 states / 558
// transitions / 40 variables.
LevelGenParams levelScaleL1(uint64_t seed);

}  // namespace autoplay
