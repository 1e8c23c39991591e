#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace pgspec {

enum class Cell : std::uint8_t { Unknown, Free, Occupied };

struct CellIndex {
  int x = 0;
  int y = 0;
  auto operator<=>(const CellIndex&) const = default;
};

// Ternary grid. Cell (x, y) covers [x*res, (x+1)*res) x [y*res, (y+1)*res) metres.
class OccupancyGrid {
 public:
  OccupancyGrid() = default;
  OccupancyGrid(int width, int height, double resolution, Cell fill = Cell::Unknown);

  int width() const { return width_; }
  int height() const { return height_; }
  double resolution() const { return resolution_; }

  bool in_bounds(CellIndex c) const { return c.x >= 0 && c.y >= 0 && c.x < width_ && c.y < height_; }
  Cell at(CellIndex c) const { return cells_[flat(c)]; }
  void set(CellIndex c, Cell v) { cells_[flat(c)] = v; }
  std::size_t flat(CellIndex c) const {
    return static_cast<std::size_t>(c.y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(c.x);
  }
  CellIndex unflat(std::size_t i) const {
    return {static_cast<int>(i % static_cast<std::size_t>(width_)), static_cast<int>(i / static_cast<std::size_t>(width_))};
  }
  std::size_t cell_count() const { return cells_.size(); }
  std::size_t count(Cell v) const;

  CellIndex cell_of(double x, double y) const;
  // Metric centre of a cell.
  double center_x(CellIndex c) const { return (c.x + 0.5) * resolution_; }
  double center_y(CellIndex c) const { return (c.y + 0.5) * resolution_; }

  bool operator==(const OccupancyGrid&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  double resolution_ = 1.0;
  std::vector<Cell> cells_;
};

// World format: header "width height resolution", then `height` rows of `width` characters,
// '#' occupied and '.' free ('?' unknown is accepted for belief dumps). Row r is y = r.
// Throws ParseError.
OccupancyGrid parse_world(std::string_view text);
std::string serialize_grid(const OccupancyGrid& g);

struct SensorModel {
  double range = 6.0;                  // metres
  double field_of_view = 3.14159265358979323846;  // radians, centred on heading
  int beams = 181;
};

// Ray-casts every beam from the pose: traversed cells within range become Free, the first
// Occupied world cell hit becomes Occupied and stops the beam. Returns the number of cells that
// changed from Unknown.
std::size_t sense(const OccupancyGrid& world, OccupancyGrid& belief, double x, double y, double heading,
                  const SensorModel& sensor = {});

struct Frontier {
  double centroid_x = 0.0;
  double centroid_y = 0.0;
  std::vector<CellIndex> members;
  std::size_t size() const { return members.size(); }
  // Member nearest the centroid (lowest (y, x) on ties); the navigation goal.
  CellIndex goal_cell(const OccupancyGrid& grid) const;
};

inline constexpr std::size_t kMinFrontierSize = 5;

// Frontier cells are Free cells 4-adjacent to an Unknown cell; clusters are 8-connected.
// `ignored` (flat indices, may be empty or sized to the grid) marks cells never treated as frontier.
// Clusters smaller than `min_size` are dropped; the rest are sorted by size descending then by
// lowest (y, x) centroid.
std::vector<Frontier> detect_frontiers(const OccupancyGrid& belief, std::size_t min_size = kMinFrontierSize,
                                       const std::vector<bool>& ignored = {});

// Single-source Dijkstra over Free cells, 8-connected with diagonal cost sqrt(2) (in cells) and no
// corner cutting past a blocked orthogonal neighbour.
class DistanceField {
 public:
  DistanceField(const OccupancyGrid& belief, CellIndex start);

  bool reachable(CellIndex c) const;
  // Cost in cells; +inf when unreachable.
  double cost(CellIndex c) const;
  // Start..goal inclusive; empty when unreachable.
  std::vector<CellIndex> path_to(CellIndex goal) const;

 private:
  const OccupancyGrid* grid_;
  std::vector<double> dist_;
  std::vector<std::int64_t> parent_;
};

// Minimum-cost path; Unknown and Occupied cells are impassable except the goal itself.
std::vector<CellIndex> plan_path(const OccupancyGrid& belief, CellIndex start, CellIndex goal);
// Sum of step costs in cells.
double path_cost(const std::vector<CellIndex>& path);

}  // namespace pgspec
