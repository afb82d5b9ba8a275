#pragma once

// Grid shortest-path cost fields and the geometric observations built on them.

#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <queue>
#include <utility>
#include <vector>

#include "boir/error.hpp"
#include "boir/world.hpp"

namespace boir {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct Move {
  int dcol;
  int drow;
  bool diagonal;
};

inline constexpr std::array<Move, 8> kMoves{{
    {1, 0, false},
    {-1, 0, false},
    {0, 1, false},
    {0, -1, false},
    {1, 1, true},
    {1, -1, true},
    {-1, 1, true},
    {-1, -1, true},
}};

/// Cost of moving between two neighboring cells, or nothing if the move is
/// blocked. Diagonal moves need both orthogonal side cells free (no corner cutting).
inline std::optional<double> edge_cost(const OccupancyGrid& grid, CellIndex from, const Move& m) {
  const CellIndex to{from.col + m.dcol, from.row + m.drow};
  if (grid.occupied(from) || grid.occupied(to)) return std::nullopt;
  if (!m.diagonal) return grid.resolution();
  if (grid.occupied({from.col + m.dcol, from.row}) || grid.occupied({from.col, from.row + m.drow})) {
    return std::nullopt;
  }
  return grid.resolution() * std::numbers::sqrt2;
}

/// Marks every free cell within `radius` cells (Chebyshev) of an obstacle as occupied.
inline OccupancyGrid inflate_obstacles(const OccupancyGrid& grid, int radius) {
  if (radius <= 0) return grid;
  OccupancyGrid out = grid;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid.cells()[i] != Cell::Occupied) continue;
    const CellIndex c = grid.cell_at(i);
    for (int dr = -radius; dr <= radius; ++dr) {
      for (int dc = -radius; dc <= radius; ++dc) {
        const CellIndex n{c.col + dc, c.row + dr};
        if (out.contains(n)) out.set(n, Cell::Occupied);
      }
    }
  }
  return out;
}

/// Shortest path cost (meters) from every cell to one goal.
class CostField {
 public:
  CostField(GoalId goal, int width, int height, double resolution, std::vector<double> costs)
      : goal_(goal), width_(width), height_(height), resolution_(resolution), costs_(std::move(costs)) {}

  GoalId goal() const noexcept { return goal_; }
  const std::vector<double>& costs() const noexcept { return costs_; }

  double at(CellIndex c) const noexcept {
    if (c.col < 0 || c.row < 0 || c.col >= width_ || c.row >= height_) return kInfinity;
    return costs_[static_cast<std::size_t>(c.row) * static_cast<std::size_t>(width_) +
                  static_cast<std::size_t>(c.col)];
  }

 private:
  GoalId goal_;
  int width_;
  int height_;
  double resolution_;
  std::vector<double> costs_;
};

/// 8-connected Dijkstra from the goal cell. Occupied and unreachable cells cost +inf.
inline CostField dijkstra_field(const OccupancyGrid& grid, const Goal& goal) {
  const CellIndex source = grid.cell_of(goal.position);
  if (grid.occupied(source)) {
    throw InvalidArgument(std::string("goal '") + goal.label + "' lies on an occupied cell");
  }

  std::vector<double> cost(grid.size(), kInfinity);
  using Entry = std::pair<double, std::size_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  cost[grid.index(source)] = 0.0;
  open.emplace(0.0, grid.index(source));

  while (!open.empty()) {
    const auto [d, linear] = open.top();
    open.pop();
    if (d > cost[linear]) continue;
    const CellIndex c = grid.cell_at(linear);
    for (const Move& m : kMoves) {
      const auto step = edge_cost(grid, c, m);
      if (!step) continue;
      const CellIndex n{c.col + m.dcol, c.row + m.drow};
      const std::size_t ni = grid.index(n);
      const double candidate = d + *step;
      if (candidate < cost[ni]) {
        cost[ni] = candidate;
        open.emplace(candidate, ni);
      }
    }
  }
  return CostField(goal.id, grid.width(), grid.height(), grid.resolution(), std::move(cost));
}

inline std::vector<CostField> dijkstra_fields(const OccupancyGrid& grid, const std::vector<Goal>& goals) {
  std::vector<CostField> fields;
  fields.reserve(goals.size());
  for (const auto& g : goals) fields.push_back(dijkstra_field(grid, g));
  return fields;
}

/// Planner path length from the pose's cell to the field's goal.
inline double path_length(const CostField& field, const OccupancyGrid& grid, const Pose2D& pose) {
  const CellIndex c = grid.cell_of(pose.position());
  if (grid.occupied(c)) return kInfinity;
  return field.at(c);
}

/// Absolute angle between the robot heading and the direction to `target`, in [0, pi].
/// Coincident positions (within 1e-9 m) give 0.
inline double bearing_angle(const Pose2D& pose, Point2 target) {
  const double dx = target.x - pose.x();
  const double dy = target.y - pose.y();
  if (std::hypot(dx, dy) <= 1e-9) return 0.0;
  return std::abs(wrap_angle(std::atan2(dy, dx) - pose.heading()));
}

inline double bearing_angle(const Pose2D& pose, const Goal& goal) { return bearing_angle(pose, goal.position); }

inline double euclidean_distance(Point2 a, Point2 b) { return std::hypot(b.x - a.x, b.y - a.y); }

inline double euclidean_distance(const Pose2D& pose, const Goal& goal) {
  return euclidean_distance(pose.position(), goal.position);
}

/// Neighbor of `from` on a shortest path toward the field's goal; nothing at
/// the goal or where the goal is unreachable.
inline std::optional<CellIndex> descend(const CostField& field, const OccupancyGrid& grid, CellIndex from) {
  const double here = field.at(from);
  if (!std::isfinite(here) || here == 0.0) return std::nullopt;
  std::optional<CellIndex> best;
  double best_cost = kInfinity;
  for (const Move& m : kMoves) {
    const auto step = edge_cost(grid, from, m);
    if (!step) continue;
    const CellIndex n{from.col + m.dcol, from.row + m.drow};
    if (!(field.at(n) < here)) continue;
    const double through = field.at(n) + *step;
    if (through < best_cost) {
      best_cost = through;
      best = n;
    }
  }
  return best;
}

}  // namespace boir
