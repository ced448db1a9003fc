#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "autoplay/buttonmaze.hpp"

namespace autoplay {

enum class TransitionKind { Travel, DoorCross, Toggle };

std::string transitionKindName(TransitionKind k);
TransitionKind transitionKindFromName(const std::string& name);

struct EfsmTransition {
  int src = 0;
  int dst = 0;
  TransitionKind kind = TransitionKind::Travel;
  int guardDoor = -1;              // doorCross only: door that must be open
  std::vector<int> updateDoors;    // toggle only: doors flipped

  bool operator==(const EfsmTransition&) const = default;
};

// Finite-state model of a ButtonMaze: one state per button, two per door
// (its two sides), boolean door variables all starting closed. Travel
// transitions join entity states mutually reachable with every door shut;
// doorCross joins a door's two sides under an "open" guard; toggle is a
// self-loop flipping the wired doors.
struct Efsm {
  std::vector<std::string> stateNames;
  int initialState = 0;
  std::vector<std::string> variables;  // door ids, index = variable id
  std::vector<EfsmTransition> transitions;

  int stateCount() const { return static_cast<int>(stateNames.size()); }
  int stateIndex(const std::string& name) const;

  nlohmann::json toJson() const;
  static Efsm fromJson(const nlohmann::json& j);
  uint64_t digest() const;

  // Transition indices leaving each state, in transition order.
  std::vector<std::vector<int>> outgoing() const;

  // All-pairs BFS hop counts over the state graph with guards ignored;
  // kUnreachable where there is no route.
  static constexpr int kUnreachable = 1 << 20;
  std::vector<std::vector<int>> distanceMatrix() const;
};

// A test case is a chained sequence of transition indices.
using TestCase = std::vector<int>;

struct SimResult {
  bool feasible = true;     // whole sequence executable
  int prefixLength = 0;     // executable prefix size
  std::vector<int> stateTrace;             // visited states, initial first
  std::vector<std::vector<bool>> doorTrace;  // doorTrace[k] = doors after k steps
};

// Walks a test case through the model. Throws std::invalid_argument when a
// step is out of range or does not chain from the current state; a failed
// guard merely ends the feasible prefix.
SimResult simulate(const Efsm& efsm, const TestCase& test);

struct TestSuite {
  std::string strategy;
  uint64_t seed = 0;
  int budget = 0;
  int evaluationsUsed = 0;
  uint64_t modelDigest = 0;
  std::vector<TestCase> tests;

  nlohmann::json toJson() const;
  static TestSuite fromJson(const nlohmann::json& j);
};

// Fraction of model transitions exercised by the feasible prefixes of the
// suite's tests.
double coverage(const Efsm& efsm, const std::vector<TestCase>& tests);
std::vector<bool> coveredTransitions(const Efsm& efsm,
                                     const std::vector<TestCase>& tests);

}  // namespace autoplay
