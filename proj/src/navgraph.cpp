#include "autoplay/navgraph.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <sstream>
#include <stdexcept>

#include "autoplay/errors.hpp"

namespace autoplay {

TriangleMesh loadMesh(const std::string& text) {
  TriangleMesh mesh;
  std::istringstream in(text);
  std::string line;
  int lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag) || tag[0] == '#') continue;
    if (tag == "v") {
      double x, y;
      if (!(ls >> x >> y)) throw ParseError(lineNo, 1, "expected 'v x y'");
      mesh.vertices.push_back({x, y});
    } else if (tag == "t") {
      int i, j, k;
      if (!(ls >> i >> j >> k)) throw ParseError(lineNo, 1, "expected 't i j k'");
      int n = static_cast<int>(mesh.vertices.size());
      if (i < 0 || j < 0 || k < 0 || i >= n || j >= n || k >= n)
        throw ParseError(lineNo, 1, "triangle vertex index out of range");
      mesh.triangles.push_back({i, j, k});
    } else {
      throw ParseError(lineNo, 1, "unknown record '" + tag + "'");
    }
  }
  return mesh;
}

NavGraph NavGraph::fromGrid(const std::vector<std::vector<bool>>& walkable) {
  if (walkable.empty() || walkable[0].empty())
    throw std::invalid_argument("fromGrid: empty grid");
  size_t w = walkable[0].size();
  for (const auto& row : walkable)
    if (row.size() != w) throw std::invalid_argument("fromGrid: ragged grid");

  NavGraph g;
  g.gridW_ = static_cast<int>(w);
  g.gridH_ = static_cast<int>(walkable.size());
  for (int y = 0; y < g.gridH_; ++y) {
    for (int x = 0; x < g.gridW_; ++x) {
      int id = y * g.gridW_ + x;
      if (!walkable[y][x]) {
        g.knownUnwalkable_.insert(id);
        continue;
      }
      g.addNode(id, {static_cast<double>(x), static_cast<double>(y)});
      if (x > 0 && walkable[y][x - 1]) g.addEdge(id, id - 1, 1.0);
      if (y > 0 && walkable[y - 1][x]) g.addEdge(id, id - g.gridW_, 1.0);
    }
  }
  return g;
}

NavGraph NavGraph::fromMesh(const TriangleMesh& mesh) {
  NavGraph g;
  g.unitWeights_ = false;
  auto vertex = [&](int i) -> Vec2d {
    if (i < 0 || i >= static_cast<int>(mesh.vertices.size()))
      throw std::invalid_argument("fromMesh: vertex index out of range");
    return mesh.vertices[i];
  };

  for (size_t t = 0; t < mesh.triangles.size(); ++t) {
    const Triangle& tri = mesh.triangles[t];
    Vec2d a = vertex(tri.a), b = vertex(tri.b), c = vertex(tri.c);
    double cross = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
    if (cross == 0.0)
      throw std::invalid_argument("fromMesh: degenerate triangle " +
                                  std::to_string(t));
    g.addNode(static_cast<int>(t),
              {(a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0});
  }

  std::map<std::pair<int, int>, std::vector<int>> edgeOwners;
  for (size_t t = 0; t < mesh.triangles.size(); ++t) {
    const Triangle& tri = mesh.triangles[t];
    int vs[3] = {tri.a, tri.b, tri.c};
    for (int i = 0; i < 3; ++i) {
      int u = vs[i], v = vs[(i + 1) % 3];
      edgeOwners[{std::min(u, v), std::max(u, v)}].push_back(static_cast<int>(t));
    }
  }
  for (const auto& [edge, owners] : edgeOwners) {
    for (size_t i = 0; i < owners.size(); ++i) {
      for (size_t j = i + 1; j < owners.size(); ++j) {
        Vec2d p = g.position(owners[i]);
        Vec2d q = g.position(owners[j]);
        g.addEdge(owners[i], owners[j], std::hypot(p.x - q.x, p.y - q.y));
      }
    }
  }
  return g;
}

void NavGraph::addNode(int nodeId, Vec2d pos) {
  if (nodes_.emplace(nodeId, pos).second) adj_.emplace(nodeId, std::vector<std::pair<int, double>>{});
}

void NavGraph::addEdge(int a, int b, double weight) {
  requireNode(a);
  requireNode(b);
  if (weight < 0.0) throw std::invalid_argument("addEdge: negative weight");
  auto insertSorted = [](std::vector<std::pair<int, double>>& list, int to,
                         double w) {
    auto it = std::lower_bound(
        list.begin(), list.end(), to,
        [](const std::pair<int, double>& e, int id) { return e.first < id; });
    if (it != list.end() && it->first == to) return;
    list.insert(it, {to, w});
  };
  insertSorted(adj_[a], b, weight);
  insertSorted(adj_[b], a, weight);
  if (weight != 1.0) unitWeights_ = false;
}

void NavGraph::requireNode(int nodeId) const {
  if (!nodes_.count(nodeId))
    throw std::out_of_range("unknown nav node " + std::to_string(nodeId));
}

Vec2d NavGraph::position(int nodeId) const {
  requireNode(nodeId);
  return nodes_.at(nodeId);
}

size_t NavGraph::edgeCount() const {
  size_t directed = 0;
  for (const auto& [_, list] : adj_) directed += list.size();
  return directed / 2;
}

const std::vector<std::pair<int, double>>& NavGraph::neighbours(int nodeId) const {
  requireNode(nodeId);
  return adj_.at(nodeId);
}

void NavGraph::setBlocked(int nodeId, bool blocked) {
  requireNode(nodeId);
  if (blocked)
    blocked_.insert(nodeId);
  else
    blocked_.erase(nodeId);
}

void NavGraph::markExplored(int nodeId) {
  requireNode(nodeId);
  explored_.insert(nodeId);
}

void NavGraph::addObservedGeometry(const WorldModel& obs) {
  int w = static_cast<int>(propInt(obs.agentProperties, "worldWidth", 0));
  int h = static_cast<int>(propInt(obs.agentProperties, "worldHeight", 0));
  int view = static_cast<int>(propInt(obs.agentProperties, "viewDistance", 0));
  if (w <= 0 || h <= 0 || view <= 0)
    throw std::invalid_argument(
        "addObservedGeometry: observation lacks world dimensions");
  if (gridW_ == 0) {
    gridW_ = w;
    gridH_ = h;
  } else if (gridW_ != w || gridH_ != h) {
    throw std::invalid_argument("addObservedGeometry: world size changed");
  }

  // Cells inside the window carrying an entity that excludes walking. Door
  // cells stay walkable here; passability is handled by blocked flags.
  std::set<int> unwalkable;
  for (const auto& [_, e] : obs.entities) {
    if (!e.alive) continue;
    if (e.entityType == "wall" || propBool(e.properties, "solid", false))
      unwalkable.insert(cellId(e.position));
  }

  Vec2 p = obs.agentPosition;
  for (int y = std::max(0, p.y - view); y <= std::min(gridH_ - 1, p.y + view); ++y) {
    for (int x = std::max(0, p.x - view); x <= std::min(gridW_ - 1, p.x + view); ++x) {
      int id = y * gridW_ + x;
      if (unwalkable.count(id)) {
        knownUnwalkable_.insert(id);
        continue;
      }
      knownUnwalkable_.erase(id);
      if (!nodes_.count(id)) {
        addNode(id, {static_cast<double>(x), static_cast<double>(y)});
        for (Vec2 d : kNeighbourOrder) {
          Vec2 n{x + d.x, y + d.y};
          if (inBounds(n) && nodes_.count(cellId(n))) addEdge(id, cellId(n), 1.0);
        }
      }
      explored_.insert(id);
    }
  }
}

namespace {

struct QueueItem {
  double f;
  int node;
  bool operator>(const QueueItem& o) const {
    if (f != o.f) return f > o.f;
    return node > o.node;
  }
};

}  // namespace

PathResult NavGraph::findPathDetail(int src, int dst,
                                    const std::set<int>* avoid) const {
  requireNode(src);
  requireNode(dst);
  PathResult result;
  if (src == dst) {
    result.path = std::vector<int>{src};
    return result;
  }
  if (blocked_.count(dst)) return result;

  bool manhattanOk = unitWeights_ && gridW_ > 0;
  Vec2d goal = nodes_.at(dst);
  auto heuristic = [&](int n) {
    Vec2d p = nodes_.at(n);
    if (manhattanOk) return std::abs(p.x - goal.x) + std::abs(p.y - goal.y);
    return std::hypot(p.x - goal.x, p.y - goal.y);
  };

  std::map<int, double> gScore;
  std::map<int, int> cameFrom;
  std::priority_queue<QueueItem, std::vector<QueueItem>, std::greater<>> open;
  gScore[src] = 0.0;
  open.push({heuristic(src), src});

  while (!open.empty()) {
    auto [f, node] = open.top();
    open.pop();
    double g = gScore.at(node);
    if (f > g + heuristic(node) + 1e-12) continue;  // stale entry
    ++result.expansions;
    if (node == dst) {
      std::vector<int> path{dst};
      while (path.back() != src) path.push_back(cameFrom.at(path.back()));
      std::reverse(path.begin(), path.end());
      result.path = std::move(path);
      result.cost = g;
      return result;
    }
    for (const auto& [next, w] : adj_.at(node)) {
      if (next != dst &&
          (blocked_.count(next) || (avoid && avoid->count(next))))
        continue;
      double ng = g + w;
      auto it = gScore.find(next);
      if (it == gScore.end() || ng < it->second - 1e-12) {
        gScore[next] = ng;
        cameFrom[next] = node;
        open.push({ng + heuristic(next), next});
      }
    }
  }
  return result;
}

std::optional<std::vector<int>> NavGraph::findPath(int src, int dst) const {
  return findPathDetail(src, dst).path;
}

bool NavGraph::isFrontier(int nodeId) const {
  if (!explored_.count(nodeId)) return false;
  for (const auto& [next, _] : adj_.at(nodeId))
    if (!explored_.count(next)) return true;
  if (gridW_ > 0) {
    Vec2 c = cellOf(nodeId);
    for (Vec2 d : kNeighbourOrder) {
      Vec2 n{c.x + d.x, c.y + d.y};
      if (!inBounds(n)) continue;
      int id = cellId(n);
      if (!nodes_.count(id) && !knownUnwalkable_.count(id)) return true;
    }
  }
  return false;
}

std::vector<int> NavGraph::frontierNodes() const {
  std::vector<int> out;
  for (int id : explored_)
    if (isFrontier(id)) out.push_back(id);
  return out;
}

std::optional<int> NavGraph::nextExplorationTarget(int from) const {
  requireNode(from);
  std::vector<int> frontier = frontierNodes();
  if (frontier.empty()) return std::nullopt;

  // Uniform-cost search from `from`; blocked nodes impassable, `from` exempt.
  std::map<int, double> dist;
  std::priority_queue<QueueItem, std::vector<QueueItem>, std::greater<>> open;
  dist[from] = 0.0;
  open.push({0.0, from});
  while (!open.empty()) {
    auto [d, node] = open.top();
    open.pop();
    if (d > dist.at(node) + 1e-12) continue;
    for (const auto& [next, w] : adj_.at(node)) {
      if (blocked_.count(next)) continue;
      double nd = d + w;
      auto it = dist.find(next);
      if (it == dist.end() || nd < it->second - 1e-12) {
        dist[next] = nd;
        open.push({nd, next});
      }
    }
  }

  std::optional<int> best;
  double bestCost = 0.0;
  for (int id : frontier) {
    auto it = dist.find(id);
    if (it == dist.end()) continue;
    if (!best || it->second < bestCost - 1e-12 ||
        (std::abs(it->second - bestCost) <= 1e-12 && id < *best)) {
      best = id;
      bestCost = it->second;
    }
  }
  return best;
}

bool NavGraph::sameStructure(const NavGraph& other) const {
  if (nodes_.size() != other.nodes_.size()) return false;
  for (const auto& [id, pos] : nodes_) {
    auto it = other.nodes_.find(id);
    if (it == other.nodes_.end() || !(it->second == pos)) return false;
    const auto& a = adj_.at(id);
    const auto& b = other.adj_.at(id);
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i)
      if (a[i].first != b[i].first ||
          std::abs(a[i].second - b[i].second) > 1e-9)
        return false;
  }
  return true;
}

}  // namespace autoplay
