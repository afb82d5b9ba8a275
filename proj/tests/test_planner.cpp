#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "boir/planner.hpp"
#include "oracles.hpp"

using namespace boir;

namespace {

Goal goal_at(const OccupancyGrid& g, CellIndex c, GoalId id = 0) { return Goal{id, 'a', g.cell_center(c)}; }

}  // namespace

TEST(EdgeCost, StraightAndDiagonal) {
  const auto g = OccupancyGrid::empty(3, 3, 0.5);
  EXPECT_DOUBLE_EQ(*edge_cost(g, {1, 1}, Move{1, 0, false}), 0.5);
  EXPECT_DOUBLE_EQ(*edge_cost(g, {1, 1}, Move{1, 1, true}), 0.5 * std::sqrt(2.0));
  EXPECT_FALSE(edge_cost(g, {2, 2}, Move{1, 0, false}));
}

TEST(EdgeCost, NoCornerCutting) {
  auto g = OccupancyGrid::empty(3, 3, 1.0);
  g.set({1, 0}, Cell::Occupied);
  EXPECT_FALSE(edge_cost(g, {0, 0}, Move{1, 1, true}));
  EXPECT_TRUE(edge_cost(g, {0, 0}, Move{0, 1, false}));
}

TEST(Dijkstra, OpenThreeByThreeCorner) {
  const auto g = OccupancyGrid::empty(3, 3, 1.0);
  const auto field = dijkstra_field(g, goal_at(g, {2, 2}));
  EXPECT_DOUBLE_EQ(field.at({0, 0}), 2.0 * std::sqrt(2.0));
  EXPECT_DOUBLE_EQ(field.at({2, 2}), 0.0);
  EXPECT_DOUBLE_EQ(field.at({0, 2}), 2.0);
  EXPECT_DOUBLE_EQ(path_length(field, g, Pose2D(0.5, 0.5, 1.0)), 2.0 * std::sqrt(2.0));
}

TEST(Dijkstra, WallForcesDetourLongerThanEuclidean) {
  const MapData m = load_map(
      "resolution 1\n"
      ".....\n"
      ".a...\n"
      "####.\n"
      ".S...\n"
      ".....\n");
  const auto field = dijkstra_field(m.grid, m.goals[0]);
  const double detour = path_length(field, m.grid, m.start);
  EXPECT_GT(detour, euclidean_distance(m.start, m.goals[0]));
  EXPECT_DOUBLE_EQ(euclidean_distance(m.start, m.goals[0]), 2.0);
  // Corner rule keeps every step around the wall end axis-aligned: 3 east, 2 north, 3 west.
  EXPECT_DOUBLE_EQ(detour, 8.0);
}

TEST(Dijkstra, UnreachableIsInfinite) {
  const MapData m = load_map(
      "resolution 1\n"
      "a.#..\n"
      "..#.S\n"
      "..#..\n");
  const auto field = dijkstra_field(m.grid, m.goals[0]);
  EXPECT_TRUE(std::isinf(path_length(field, m.grid, m.start)));
  EXPECT_TRUE(std::isinf(field.at({2, 1})));
}

TEST(Dijkstra, GoalOnObstacleRejected) {
  auto g = OccupancyGrid::empty(3, 3, 1.0);
  g.set({1, 1}, Cell::Occupied);
  EXPECT_THROW(dijkstra_field(g, goal_at(g, {1, 1})), InvalidArgument);
}

TEST(Dijkstra, MatchesBellmanFordOnRandomGrids) {
  std::mt19937_64 rng(1234);
  for (int trial = 0; trial < 20; ++trial) {
    const auto grid = oracle::random_grid(15, 12, 0.5, 0.25, rng);
    std::vector<CellIndex> free;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (!grid.occupied(grid.cell_at(i))) free.push_back(grid.cell_at(i));
    }
    ASSERT_FALSE(free.empty());
    const CellIndex target = free[rng() % free.size()];
    const auto field = dijkstra_field(grid, goal_at(grid, target));
    const auto expected = oracle::bellman_ford(grid, target);
    for (std::size_t i = 0; i < grid.size(); ++i) EXPECT_EQ(field.costs()[i], expected[i]) << "cell " << i;
  }
}

TEST(Dijkstra, PathNeverShorterThanEuclideanSlack) {
  std::mt19937_64 rng(99);
  const auto grid = oracle::random_grid(20, 20, 0.5, 0.2, rng);
  std::vector<CellIndex> free;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!grid.occupied(grid.cell_at(i))) free.push_back(grid.cell_at(i));
  }
  const Goal goal = goal_at(grid, free.front());
  const auto field = dijkstra_field(grid, goal);
  for (const auto c : free) {
    const Pose2D p(grid.cell_center(c), 0.0);
    const double len = path_length(field, grid, p);
    if (std::isinf(len)) continue;
    EXPECT_GE(len, euclidean_distance(p, goal) - grid.resolution() * std::sqrt(2.0));
  }
}

TEST(Dijkstra, AlignedLinesMatchEuclidean) {
  const auto g = OccupancyGrid::empty(12, 12, 0.5);
  const Goal goal = goal_at(g, {6, 6});
  const auto field = dijkstra_field(g, goal);
  for (const auto& m : kMoves) {
    for (int k = 1; k <= 5; ++k) {
      const CellIndex c{6 + k * m.dcol, 6 + k * m.drow};
      const Pose2D p(g.cell_center(c), 0.0);
      EXPECT_NEAR(path_length(field, g, p), euclidean_distance(p, goal), 1e-9);
    }
  }
}

TEST(Bearing, Examples) {
  const Pose2D east(0.0, 0.0, 0.0);
  EXPECT_DOUBLE_EQ(bearing_angle(east, Point2{1.0, 0.0}), 0.0);
  EXPECT_NEAR(bearing_angle(east, Point2{0.0, 1.0}), kPi / 2.0, 1e-12);
  EXPECT_NEAR(bearing_angle(east, Point2{0.0, -1.0}), kPi / 2.0, 1e-12);
  EXPECT_NEAR(bearing_angle(east, Point2{-1.0, 0.0}), kPi, 1e-12);
  EXPECT_DOUBLE_EQ(bearing_angle(east, Point2{0.0, 0.0}), 0.0);
  const Pose2D north_west(1.0, 1.0, 3.0 * kPi / 4.0);
  EXPECT_NEAR(bearing_angle(north_west, Point2{0.0, 2.0}), 0.0, 1e-12);
  EXPECT_NEAR(bearing_angle(north_west, Point2{2.0, 0.0}), kPi, 1e-12);
}

TEST(Bearing, AlwaysInZeroPi) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (int i = 0; i < 1000; ++i) {
    const double a = bearing_angle(Pose2D(u(rng), u(rng), u(rng)), Point2{u(rng), u(rng)});
    EXPECT_GE(a, 0.0);
    EXPECT_LE(a, kPi);
  }
}

TEST(Descend, ReachesGoalMonotonically) {
  const MapData m = load_map(
      "resolution 1\n"
      ".....\n"
      ".a...\n"
      "####.\n"
      ".S...\n"
      ".....\n");
  const auto field = dijkstra_field(m.grid, m.goals[0]);
  CellIndex c = m.grid.cell_of(m.start.position());
  const CellIndex target = m.grid.cell_of(m.goals[0].position);
  int steps = 0;
  while (auto next = descend(field, m.grid, c)) {
    EXPECT_LT(field.at(*next), field.at(c));
    c = *next;
    ASSERT_LT(++steps, 50);
  }
  EXPECT_EQ(c, target);
}

TEST(Inflate, GrowsObstacles) {
  auto g = OccupancyGrid::empty(5, 5, 1.0);
  g.set({2, 2}, Cell::Occupied);
  const auto inflated = inflate_obstacles(g, 1);
  for (int r = 1; r <= 3; ++r) {
    for (int c = 1; c <= 3; ++c) EXPECT_TRUE(inflated.occupied({c, r}));
  }
  EXPECT_FALSE(inflated.occupied({0, 0}));
  EXPECT_FALSE(inflated.occupied({4, 2}));
}
