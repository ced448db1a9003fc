#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "autoplay/world.hpp"

namespace autoplay {

struct Vec2d {
  double x = 0.0;
  double y = 0.0;

  bool operator==(const Vec2d&) const = default;
};

struct Triangle {
  int a = 0;
  int b = 0;
  int c = 0;
};

struct TriangleMesh {
  std::vector<Vec2d> vertices;
  std::vector<Triangle> triangles;
};

// Plain-text mesh: one "v x y" line per vertex, one "t i j k" line per
// triangle with 0-based vertex indices. Blank lines and "#" comments allowed.
TriangleMesh loadMesh(const std::string& text);

struct PathResult {
  std::optional<std::vector<int>> path;
  double cost = 0.0;
  int expansions = 0;
};

// Walkability graph the agents navigate and explore over. Supports two
// regimes with the same API: seeded upfront from a known grid or mesh, or
// grown on the fly from observations. Growth is monotone: nodes and edges are
// never removed.
class NavGraph {
 public:
  // One node per true cell of `walkable`, indexed row-major (id = y*w + x),
  // 4-adjacent edges of weight 1. The grid must be non-empty and rectangular.
  static NavGraph fromGrid(const std::vector<std::vector<bool>>& walkable);

  // One node per triangle at its centroid; an edge joins triangles sharing an
  // edge, weighted by centroid distance. Rejects degenerate triangles.
  static NavGraph fromMesh(const TriangleMesh& mesh);

  // Grows the graph from one observation: cells inside the observation
  // window that carry no wall or solid entity become walkable nodes wired to
  // their existing 4-neighbours; wall/solid cells are remembered as
  // unwalkable. Every walkable cell in the window is marked explored.
  // The observation must carry worldWidth/worldHeight/viewDistance agent
  // properties. Repeating an observation is a no-op.
  void addObservedGeometry(const WorldModel& obs);

  // Least-cost path src..dst avoiding blocked nodes (src exempt; a blocked
  // dst is unreachable). Unit-weight grid graphs use a Manhattan heuristic,
  // everything else Euclidean. Equal-cost candidates pop lowest node id
  // first. Throws std::out_of_range for unknown ids.
  std::optional<std::vector<int>> findPath(int src, int dst) const;

  // findPath with expansion count, and an optional extra set of node ids to
  // treat as blocked for this query only (dst is never avoided).
  PathResult findPathDetail(int src, int dst,
                            const std::set<int>* avoid = nullptr) const;

  // Cheapest-to-reach frontier node from `from`, ties broken by smallest
  // node id; nullopt when no frontier is reachable. A frontier node is an
  // explored node adjacent to an unexplored node, or (for grid graphs grown
  // from observations) adjacent to an in-bounds cell whose walkability is
  // still unknown.
  std::optional<int> nextExplorationTarget(int from) const;

  void setBlocked(int nodeId, bool blocked);
  bool isBlocked(int nodeId) const { return blocked_.count(nodeId) > 0; }
  void markExplored(int nodeId);
  bool isExplored(int nodeId) const { return explored_.count(nodeId) > 0; }
  bool isFrontier(int nodeId) const;

  bool hasNode(int nodeId) const { return nodes_.count(nodeId) > 0; }
  Vec2d position(int nodeId) const;
  size_t nodeCount() const { return nodes_.size(); }
  size_t edgeCount() const;  // undirected count
  const std::map<int, Vec2d>& nodes() const { return nodes_; }
  const std::vector<std::pair<int, double>>& neighbours(int nodeId) const;

  bool hasGridContext() const { return gridW_ > 0; }
  int gridWidth() const { return gridW_; }
  int gridHeight() const { return gridH_; }
  int cellId(Vec2 c) const { return c.y * gridW_ + c.x; }
  Vec2 cellOf(int nodeId) const { return {nodeId % gridW_, nodeId / gridW_}; }
  bool inBounds(Vec2 c) const {
    return c.x >= 0 && c.y >= 0 && c.x < gridW_ && c.y < gridH_;
  }

  // Node/edge/weight equality, ignoring blocked and explored marks.
  bool sameStructure(const NavGraph& other) const;

  void addNode(int nodeId, Vec2d pos);
  void addEdge(int a, int b, double weight);

 private:
  void requireNode(int nodeId) const;
  std::vector<int> frontierNodes() const;

  std::map<int, Vec2d> nodes_;
  std::map<int, std::vector<std::pair<int, double>>> adj_;
  std::set<int> blocked_;
  std::set<int> explored_;
  bool unitWeights_ = true;

  // Grid context, present for grid-derived graphs (fromGrid or grown from
  // observations). knownUnwalkable_ records cells seen to be wall or solid;
  // a cell can migrate to a node later if it becomes walkable (a cleansed
  // shrine turning into a portal), never the other way.
  int gridW_ = 0;
  int gridH_ = 0;
  std::set<int> knownUnwalkable_;
};

}  // namespace autoplay
