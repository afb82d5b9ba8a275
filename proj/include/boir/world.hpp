#pragma once

// Map, pose and goal data model plus the text map format.
//
// Map text format:
//
//   resolution 0.5
//   ##########
//   #a......b#
//   #...S....#
//   ##########
//
// Characters: '.' free, '#' occupied, 'S' start (free), 'a'-'z' goal (free).
// The first text row is the top of the map. World coordinates put the origin
// at the bottom-left corner with +x right and +y up, so text rows are flipped
// on load. A cell's continuous coordinate is its center.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "boir/error.hpp"

namespace boir {

/// Goals are addressed by their position in the map's goal list (sorted by label).
using GoalId = std::size_t;

inline constexpr double kPi = std::numbers::pi;

/// Wraps an angle to (-pi, pi].
inline double wrap_angle(double angle) {
  double wrapped = std::remainder(angle, 2.0 * kPi);
  if (wrapped <= -kPi) wrapped += 2.0 * kPi;
  return wrapped;
}

struct Point2 {
  double x{0.0};
  double y{0.0};

  friend bool operator==(const Point2&, const Point2&) = default;
};

class Pose2D {
 public:
  Pose2D() = default;
  Pose2D(double x, double y, double heading) : x_(x), y_(y), heading_(wrap_angle(heading)) {}
  Pose2D(Point2 position, double heading) : Pose2D(position.x, position.y, heading) {}

  double x() const noexcept { return x_; }
  double y() const noexcept { return y_; }
  /// Always in (-pi, pi].
  double heading() const noexcept { return heading_; }
  Point2 position() const noexcept { return {x_, y_}; }

  friend bool operator==(const Pose2D&, const Pose2D&) = default;

 private:
  double x_{0.0};
  double y_{0.0};
  double heading_{0.0};
};

enum class Cell : std::uint8_t { Free, Occupied };

struct CellIndex {
  int col{0};
  int row{0};

  friend bool operator==(const CellIndex&, const CellIndex&) = default;
};

class OccupancyGrid {
 public:
  OccupancyGrid(int width, int height, double resolution, std::vector<Cell> cells)
      : width_(width), height_(height), resolution_(resolution), cells_(std::move(cells)) {
    if (width_ < 1 || height_ < 1) throw InvalidArgument("grid dimensions must be at least 1x1");
    if (!(resolution_ > 0.0) || !std::isfinite(resolution_)) {
      throw InvalidArgument("grid resolution must be positive");
    }
    if (cells_.size() != static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_)) {
      throw InvalidArgument("cell count does not match width x height");
    }
  }

  /// An all-free grid.
  static OccupancyGrid empty(int width, int height, double resolution) {
    return OccupancyGrid(width, height, resolution,
                         std::vector<Cell>(static_cast<std::size_t>(std::max(width, 0)) *
                                               static_cast<std::size_t>(std::max(height, 0)),
                                           Cell::Free));
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  double resolution() const noexcept { return resolution_; }
  std::size_t size() const noexcept { return cells_.size(); }
  const std::vector<Cell>& cells() const noexcept { return cells_; }

  bool contains(CellIndex c) const noexcept {
    return c.col >= 0 && c.row >= 0 && c.col < width_ && c.row < height_;
  }

  /// Row-major linear index; row 0 is the bottom row in world space.
  std::size_t index(CellIndex c) const noexcept {
    return static_cast<std::size_t>(c.row) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(c.col);
  }

  CellIndex cell_at(std::size_t linear) const noexcept {
    return {static_cast<int>(linear % static_cast<std::size_t>(width_)),
            static_cast<int>(linear / static_cast<std::size_t>(width_))};
  }

  Cell at(CellIndex c) const {
    if (!contains(c)) throw OutOfBounds("cell outside grid");
    return cells_[index(c)];
  }

  /// Cells outside the grid count as occupied.
  bool occupied(CellIndex c) const noexcept {
    return !contains(c) || cells_[index(c)] == Cell::Occupied;
  }

  void set(CellIndex c, Cell value) {
    if (!contains(c)) throw OutOfBounds("cell outside grid");
    cells_[index(c)] = value;
  }

  Point2 cell_center(CellIndex c) const noexcept {
    return {(c.col + 0.5) * resolution_, (c.row + 0.5) * resolution_};
  }

  double world_width() const noexcept { return width_ * resolution_; }
  double world_height() const noexcept { return height_ * resolution_; }

  /// Cell containing a point, or nothing when the point lies outside [0, W*res] x [0, H*res].
  /// A point on an interior edge belongs to the higher-index cell; the outer
  /// edge belongs to the last cell.
  std::optional<CellIndex> try_cell_of(Point2 p) const noexcept {
    if (!(p.x >= 0.0 && p.y >= 0.0 && p.x <= world_width() && p.y <= world_height())) {
      return std::nullopt;
    }
    const int col = std::min(static_cast<int>(std::floor(p.x / resolution_)), width_ - 1);
    const int row = std::min(static_cast<int>(std::floor(p.y / resolution_)), height_ - 1);
    return CellIndex{col, row};
  }

  CellIndex cell_of(Point2 p) const {
    if (auto c = try_cell_of(p)) return *c;
    std::ostringstream msg;
    msg << "point (" << p.x << ", " << p.y << ") outside grid";
    throw OutOfBounds(msg.str());
  }

  friend bool operator==(const OccupancyGrid&, const OccupancyGrid&) = default;

 private:
  int width_;
  int height_;
  double resolution_;
  std::vector<Cell> cells_;
};

struct Goal {
  GoalId id{0};
  char label{'a'};
  Point2 position;

  friend bool operator==(const Goal&, const Goal&) = default;
};

struct MapData {
  OccupancyGrid grid;
  std::vector<Goal> goals;
  Pose2D start;
};

inline std::optional<GoalId> find_goal(const std::vector<Goal>& goals, char label) {
  for (const auto& g : goals) {
    if (g.label == label) return g.id;
  }
  return std::nullopt;
}

namespace detail {

inline std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t begin = 0;
  while (begin <= text.size()) {
    std::size_t end = text.find('\n', begin);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(begin, end - begin);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    if (end == text.size()) break;
    begin = end + 1;
  }
  // Trailing blank lines carry no rows.
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

}  // namespace detail

/// Parses map text. Throws ParseError naming the line/column of the first problem.
inline MapData load_map(std::string_view text) {
  const auto lines = detail::split_lines(text);
  if (lines.empty()) throw ParseError(1, 1, "empty map");

  double resolution = 0.0;
  {
    std::istringstream header{std::string(lines[0])};
    std::string keyword;
    std::string extra;
    if (!(header >> keyword) || keyword != "resolution") {
      throw ParseError(1, 1, "expected 'resolution <meters-per-cell>'");
    }
    if (!(header >> resolution) || !(resolution > 0.0) || !std::isfinite(resolution)) {
      throw ParseError(1, keyword.size() + 2, "resolution must be a positive number");
    }
    if (header >> extra) throw ParseError(1, 1, "unexpected text after resolution");
  }

  if (lines.size() < 2) throw ParseError(2, 1, "map has no rows");
  const std::size_t height = lines.size() - 1;
  const std::size_t width = lines[1].size();
  if (width == 0) throw ParseError(2, 1, "empty row");

  std::vector<Cell> cells(width * height, Cell::Free);
  struct Found {
    char label;
    CellIndex cell;
  };
  std::vector<Found> found;
  std::optional<CellIndex> start;

  for (std::size_t text_row = 0; text_row < height; ++text_row) {
    const std::string_view row_text = lines[text_row + 1];
    const std::size_t line_no = text_row + 2;
    if (row_text.size() != width) {
      throw ParseError(line_no, std::min(row_text.size(), width) + 1,
                       "ragged row: expected " + std::to_string(width) + " characters, got " +
                           std::to_string(row_text.size()));
    }
    const int world_row = static_cast<int>(height - 1 - text_row);
    for (std::size_t col = 0; col < width; ++col) {
      const char ch = row_text[col];
      const CellIndex cell{static_cast<int>(col), world_row};
      const std::size_t linear = static_cast<std::size_t>(world_row) * width + col;
      if (ch == '.') continue;
      if (ch == '#') {
        cells[linear] = Cell::Occupied;
      } else if (ch == 'S') {
        if (start) throw ParseError(line_no, col + 1, "duplicate start 'S'");
        start = cell;
      } else if (ch >= 'a' && ch <= 'z') {
        for (const auto& f : found) {
          if (f.label == ch) {
            throw ParseError(line_no, col + 1, std::string("duplicate goal label '") + ch + "'");
          }
        }
        found.push_back({ch, cell});
      } else {
        throw ParseError(line_no, col + 1, std::string("unknown character '") + ch + "'");
      }
    }
  }

  if (!start) throw ParseError(lines.size(), 1, "no start 'S' in map");
  if (found.empty()) throw ParseError(lines.size(), 1, "map has no goals");

  OccupancyGrid grid(static_cast<int>(width), static_cast<int>(height), resolution, std::move(cells));
  std::sort(found.begin(), found.end(), [](const Found& a, const Found& b) { return a.label < b.label; });
  std::vector<Goal> goals;
  goals.reserve(found.size());
  for (std::size_t i = 0; i < found.size(); ++i) {
    goals.push_back(Goal{i, found[i].label, grid.cell_center(found[i].cell)});
  }
  const Point2 s = grid.cell_center(*start);
  return MapData{std::move(grid), std::move(goals), Pose2D(s.x, s.y, 0.0)};
}

/// Inverse of load_map. Goals and start are written at the cells containing them.
inline std::string serialize_map(const MapData& map) {
  const auto& grid = map.grid;
  std::vector<std::string> rows(static_cast<std::size_t>(grid.height()),
                                std::string(static_cast<std::size_t>(grid.width()), '.'));
  auto put = [&](CellIndex c, char ch) {
    rows[static_cast<std::size_t>(grid.height() - 1 - c.row)][static_cast<std::size_t>(c.col)] = ch;
  };
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid.cells()[i] == Cell::Occupied) put(grid.cell_at(i), '#');
  }
  put(grid.cell_of(map.start.position()), 'S');
  for (const auto& g : map.goals) put(grid.cell_of(g.position), g.label);

  std::ostringstream out;
  out.precision(17);
  out << "resolution " << grid.resolution() << '\n';
  for (const auto& r : rows) out << r << '\n';
  return out.str();
}

}  // namespace boir
