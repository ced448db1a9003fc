#pragma once

#include <stdexcept>
#include <string>

namespace autoplay {

// Base for anything raised while talking to a game environment.
struct EnvError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Delivery failure between agent and environment. Deliberation treats this as
// a failed cycle and leaves agent state untouched.
struct TransportError : EnvError {
  using EnvError::EnvError;
};

// Command rejected by the game rules (bad key, wrong player, game over).
struct GameRuleError : EnvError {
  using EnvError::EnvError;
};

// The game itself crashed (real defect or injected fault). Propagates out of
// deliberation so crash oracles can record it.
struct CrashError : EnvError {
  using EnvError::EnvError;
};

// Belief update received an observation older than the current belief.
struct OutOfOrderObservation : std::logic_error {
  using std::logic_error::logic_error;
};

// File ingestion failure with a position, for level and mesh loaders.
struct ParseError : std::runtime_error {
  ParseError(int line, int column, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ", col " +
                           std::to_string(column) + ": " + what),
        line(line),
        column(column) {}
  int line;
  int column;
};

}  // namespace autoplay
