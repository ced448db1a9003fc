#include "autoplay/efsm.hpp"

#include <deque>
#include <sstream>
#include <stdexcept>

#include "autoplay/world.hpp"

namespace autoplay {

std::string transitionKindName(TransitionKind k) {
  switch (k) {
    case TransitionKind::Travel: return "travel";
    case TransitionKind::DoorCross: return "doorCross";
    case TransitionKind::Toggle: return "toggle";
  }
  return "travel";
}

TransitionKind transitionKindFromName(const std::string& name) {
  if (name == "travel") return TransitionKind::Travel;
  if (name == "doorCross") return TransitionKind::DoorCross;
  if (name == "toggle") return TransitionKind::Toggle;
  throw std::invalid_argument("unknown transition kind '" + name + "'");
}

int Efsm::stateIndex(const std::string& name) const {
  for (size_t i = 0; i < stateNames.size(); ++i)
    if (stateNames[i] == name) return static_cast<int>(i);
  throw std::out_of_range("unknown state '" + name + "'");
}

nlohmann::json Efsm::toJson() const {
  nlohmann::json ts = nlohmann::json::array();
  for (const EfsmTransition& t : transitions) {
    nlohmann::json jt = {{"src", stateNames[t.src]},
                         {"dst", stateNames[t.dst]},
                         {"kind", transitionKindName(t.kind)}};
    if (t.kind == TransitionKind::DoorCross) jt["guard"] = variables[t.guardDoor];
    if (t.kind == TransitionKind::Toggle) {
      nlohmann::json up = nlohmann::json::array();
      for (int d : t.updateDoors) up.push_back(variables[d]);
      jt["update"] = up;
    }
    ts.push_back(jt);
  }
  return {{"states", stateNames},
          {"initialState", stateNames[initialState]},
          {"variables", variables},
          {"transitions", ts}};
}

Efsm Efsm::fromJson(const nlohmann::json& j) {
  Efsm e;
  e.stateNames = j.at("states").get<std::vector<std::string>>();
  e.variables = j.at("variables").get<std::vector<std::string>>();
  e.initialState = e.stateIndex(j.at("initialState").get<std::string>());
  auto varIndex = [&](const std::string& v) {
    for (size_t i = 0; i < e.variables.size(); ++i)
      if (e.variables[i] == v) return static_cast<int>(i);
    throw std::invalid_argument("unknown variable '" + v + "'");
  };
  for (const auto& jt : j.at("transitions")) {
    EfsmTransition t;
    t.src = e.stateIndex(jt.at("src").get<std::string>());
    t.dst = e.stateIndex(jt.at("dst").get<std::string>());
    t.kind = transitionKindFromName(jt.at("kind").get<std::string>());
    if (t.kind == TransitionKind::DoorCross)
      t.guardDoor = varIndex(jt.at("guard").get<std::string>());
    if (t.kind == TransitionKind::Toggle)
      for (const auto& v : jt.at("update"))
        t.updateDoors.push_back(varIndex(v.get<std::string>()));
    e.transitions.push_back(std::move(t));
  }
  return e;
}

uint64_t Efsm::digest() const {
  std::ostringstream os;
  for (const auto& s : stateNames) os << s << ';';
  os << '|' << initialState << '|';
  for (const auto& v : variables) os << v << ';';
  os << '|';
  for (const EfsmTransition& t : transitions) {
    os << t.src << '>' << t.dst << ':' << transitionKindName(t.kind) << ':'
       << t.guardDoor << ':';
    for (int d : t.updateDoors) os << d << ',';
    os << '|';
  }
  return fnv1a(os.str());
}

std::vector<std::vector<int>> Efsm::outgoing() const {
  std::vector<std::vector<int>> out(stateNames.size());
  for (size_t i = 0; i < transitions.size(); ++i)
    out[transitions[i].src].push_back(static_cast<int>(i));
  return out;
}

std::vector<std::vector<int>> Efsm::distanceMatrix() const {
  int n = stateCount();
  std::vector<std::vector<int>> adj(n);
  for (const EfsmTransition& t : transitions) adj[t.src].push_back(t.dst);
  std::vector<std::vector<int>> dist(n, std::vector<int>(n, kUnreachable));
  for (int s = 0; s < n; ++s) {
    dist[s][s] = 0;
    std::deque<int> queue{s};
    while (!queue.empty()) {
      int u = queue.front();
      queue.pop_front();
      for (int v : adj[u])
        if (dist[s][v] == kUnreachable) {
          dist[s][v] = dist[s][u] + 1;
          queue.push_back(v);
        }
    }
  }
  return dist;
}

SimResult simulate(const Efsm& efsm, const TestCase& test) {
  SimResult r;
  int state = efsm.initialState;
  std::vector<bool> doors(efsm.variables.size(), false);
  r.stateTrace.push_back(state);
  r.doorTrace.push_back(doors);
  for (size_t k = 0; k < test.size(); ++k) {
    int idx = test[k];
    if (idx < 0 || idx >= static_cast<int>(efsm.transitions.size()))
      throw std::invalid_argument("transition index out of range at step " +
                                  std::to_string(k));
    const EfsmTransition& t = efsm.transitions[idx];
    if (t.src != state)
      throw std::invalid_argument(
          "malformed test case: step " + std::to_string(k) + " leaves " +
          efsm.stateNames[t.src] + " but the walk is at " +
          efsm.stateNames[state]);
    if (t.kind == TransitionKind::DoorCross && !doors[t.guardDoor]) {
      r.feasible = false;
      return r;
    }
    if (t.kind == TransitionKind::Toggle)
      for (int d : t.updateDoors) doors[d] = !doors[d];
    state = t.dst;
    ++r.prefixLength;
    r.stateTrace.push_back(state);
    r.doorTrace.push_back(doors);
  }
  return r;
}

std::vector<bool> coveredTransitions(const Efsm& efsm,
                                     const std::vector<TestCase>& tests) {
  std::vector<bool> covered(efsm.transitions.size(), false);
  for (const TestCase& t : tests) {
    SimResult r = simulate(efsm, t);
    for (int k = 0; k < r.prefixLength; ++k) covered[t[k]] = true;
  }
  return covered;
}

double coverage(const Efsm& efsm, const std::vector<TestCase>& tests) {
  if (efsm.transitions.empty()) return 1.0;
  std::vector<bool> covered = coveredTransitions(efsm, tests);
  size_t n = 0;
  for (bool c : covered) n += c;
  return static_cast<double>(n) / static_cast<double>(covered.size());
}

nlohmann::json TestSuite::toJson() const {
  nlohmann::json ts = nlohmann::json::array();
  for (const TestCase& t : tests) ts.push_back(t);
  return {{"strategy", strategy},
          {"seed", seed},
          {"budget", budget},
          {"evaluationsUsed", evaluationsUsed},
          {"modelDigest", hexDigest(modelDigest)},
          {"tests", ts}};
}

TestSuite TestSuite::fromJson(const nlohmann::json& j) {
  TestSuite s;
  s.strategy = j.at("strategy").get<std::string>();
  s.seed = j.at("seed").get<uint64_t>();
  s.budget = j.at("budget").get<int>();
  s.evaluationsUsed = j.at("evaluationsUsed").get<int>();
  s.modelDigest = std::stoull(j.at("modelDigest").get<std::string>(), nullptr, 16);
  for (const auto& t : j.at("tests")) s.tests.push_back(t.get<TestCase>());
  return s;
}

}  // namespace autoplay
