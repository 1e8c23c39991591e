#include "pgspec/occupancy_grid.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>

#include "pgspec/errors.hpp"

namespace pgspec {

OccupancyGrid::OccupancyGrid(int width, int height, double resolution, Cell fill)
    : width_(width), height_(height), resolution_(resolution) {
  if (width <= 0 || height <= 0 || !(resolution > 0.0)) throw std::invalid_argument("invalid grid geometry");
  cells_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
}

std::size_t OccupancyGrid::count(Cell v) const { return static_cast<std::size_t>(std::count(cells_.begin(), cells_.end(), v)); }

CellIndex OccupancyGrid::cell_of(double x, double y) const {
  return {static_cast<int>(std::floor(x / resolution_)), static_cast<int>(std::floor(y / resolution_))};
}

OccupancyGrid parse_world(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto nl = text.find('\n', pos);
    auto line = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
  }
  if (lines.empty()) throw ParseError(1, "empty world file");
  int width = 0;
  int height = 0;
  double res = 0.0;
  {
    const std::string header(lines[0]);
    char extra = 0;
    if (std::sscanf(header.c_str(), "%d %d %lf %c", &width, &height, &res, &extra) != 3 || width <= 0 ||
        height <= 0 || !(res > 0.0))
      throw ParseError(1, "header must be 'width height resolution'");
  }
  if (lines.size() < static_cast<std::size_t>(height) + 1) throw ParseError(lines.size(), "missing grid rows");
  OccupancyGrid g(width, height, res, Cell::Unknown);
  for (int y = 0; y < height; ++y) {
    const auto row = lines[static_cast<std::size_t>(y) + 1];
    const auto line_no = static_cast<std::size_t>(y) + 2;
    if (row.size() != static_cast<std::size_t>(width))
      throw ParseError(line_no, "row has " + std::to_string(row.size()) + " cells, expected " + std::to_string(width));
    for (int x = 0; x < width; ++x) {
      switch (row[static_cast<std::size_t>(x)]) {
        case '#':
          g.set({x, y}, Cell::Occupied);
          break;
        case '.':
          g.set({x, y}, Cell::Free);
          break;
        case '?':
          g.set({x, y}, Cell::Unknown);
          break;
        default:
          throw ParseError(line_no, "unexpected cell character");
      }
    }
  }
  for (std::size_t i = static_cast<std::size_t>(height) + 1; i < lines.size(); ++i)
    if (!lines[i].empty()) throw ParseError(i + 1, "trailing content after grid rows");
  return g;
}

std::string serialize_grid(const OccupancyGrid& g) {
  char header[64];
  std::snprintf(header, sizeof header, "%d %d %.12g\n", g.width(), g.height(), g.resolution());
  std::string out = header;
  for (int y = 0; y < g.height(); ++y) {
    for (int x = 0; x < g.width(); ++x) {
      const Cell c = g.at({x, y});
      out += c == Cell::Occupied ? '#' : c == Cell::Free ? '.' : '?';
    }
    out += '\n';
  }
  return out;
}

namespace {

// Amanatides-Woo traversal of one beam.
std::size_t cast_ray(const OccupancyGrid& world, OccupancyGrid& belief, double x0, double y0, double angle,
                     double range) {
  const double res = world.resolution();
  const double dx = std::cos(angle);
  const double dy = std::sin(angle);
  CellIndex c = world.cell_of(x0, y0);
  const int step_x = dx > 0 ? 1 : -1;
  const int step_y = dy > 0 ? 1 : -1;
  constexpr double inf = std::numeric_limits<double>::infinity();
  const double delta_x = dx != 0.0 ? res / std::abs(dx) : inf;
  const double delta_y = dy != 0.0 ? res / std::abs(dy) : inf;
  double next_x = dx != 0.0 ? ((dx > 0 ? (c.x + 1) * res : c.x * res) - x0) / dx : inf;
  double next_y = dy != 0.0 ? ((dy > 0 ? (c.y + 1) * res : c.y * res) - y0) / dy : inf;
  std::size_t changed = 0;
  double t = 0.0;
  while (t <= range && world.in_bounds(c)) {
    const bool hit = world.at(c) == Cell::Occupied;
    const Cell mark = hit ? Cell::Occupied : Cell::Free;
    if (belief.at(c) != mark) {
      if (belief.at(c) == Cell::Unknown) ++changed;
      belief.set(c, mark);
    }
    if (hit) break;
    if (next_x < next_y) {
      t = next_x;
      next_x += delta_x;
      c.x += step_x;
    } else {
      t = next_y;
      next_y += delta_y;
      c.y += step_y;
    }
  }
  return changed;
}

}  // namespace

std::size_t sense(const OccupancyGrid& world, OccupancyGrid& belief, double x, double y, double heading,
                  const SensorModel& sensor) {
  if (!world.in_bounds(world.cell_of(x, y))) throw std::invalid_argument("sensor pose outside the grid");
  std::size_t changed = 0;
  const int beams = std::max(sensor.beams, 1);
  for (int b = 0; b < beams; ++b) {
    const double frac = beams == 1 ? 0.5 : static_cast<double>(b) / (beams - 1);
    const double angle = heading - sensor.field_of_view / 2 + frac * sensor.field_of_view;
    changed += cast_ray(world, belief, x, y, angle, sensor.range);
  }
  return changed;
}

CellIndex Frontier::goal_cell(const OccupancyGrid& grid) const {
  CellIndex best = members.front();
  double best_d = std::numeric_limits<double>::infinity();
  for (const auto& c : members) {
    const double d = std::hypot(grid.center_x(c) - centroid_x, grid.center_y(c) - centroid_y);
    if (d < best_d || (d == best_d && std::pair(c.y, c.x) < std::pair(best.y, best.x))) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

std::vector<Frontier> detect_frontiers(const OccupancyGrid& belief, std::size_t min_size,
                                       const std::vector<bool>& ignored) {
  const std::size_t total = belief.cell_count();
  std::vector<bool> is_frontier(total, false);
  constexpr int n4[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
  for (std::size_t i = 0; i < total; ++i) {
    const CellIndex c = belief.unflat(i);
    if (belief.at(c) != Cell::Free) continue;
    if (!ignored.empty() && ignored[i]) continue;
    for (const auto& d : n4) {
      const CellIndex nb{c.x + d[0], c.y + d[1]};
      if (belief.in_bounds(nb) && belief.at(nb) == Cell::Unknown) {
        is_frontier[i] = true;
        break;
      }
    }
  }
  std::vector<Frontier> out;
  std::vector<bool> seen(total, false);
  for (std::size_t i = 0; i < total; ++i) {
    if (!is_frontier[i] || seen[i]) continue;
    Frontier f;
    std::queue<std::size_t> q;
    q.push(i);
    seen[i] = true;
    while (!q.empty()) {
      const auto cur = q.front();
      q.pop();
      const CellIndex c = belief.unflat(cur);
      f.members.push_back(c);
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          const CellIndex nb{c.x + dx, c.y + dy};
          if ((dx == 0 && dy == 0) || !belief.in_bounds(nb)) continue;
          const auto k = belief.flat(nb);
          if (is_frontier[k] && !seen[k]) {
            seen[k] = true;
            q.push(k);
          }
        }
    }
    if (f.members.size() < min_size) continue;
    std::sort(f.members.begin(), f.members.end(),
              [](const CellIndex& a, const CellIndex& b) { return std::pair(a.y, a.x) < std::pair(b.y, b.x); });
    double sx = 0.0;
    double sy = 0.0;
    for (const auto& c : f.members) {
      sx += belief.center_x(c);
      sy += belief.center_y(c);
    }
    f.centroid_x = sx / static_cast<double>(f.members.size());
    f.centroid_y = sy / static_cast<double>(f.members.size());
    out.push_back(std::move(f));
  }
  std::stable_sort(out.begin(), out.end(), [](const Frontier& a, const Frontier& b) {
    if (a.size() != b.size()) return a.size() > b.size();
    return std::pair(a.centroid_y, a.centroid_x) < std::pair(b.centroid_y, b.centroid_x);
  });
  return out;
}

DistanceField::DistanceField(const OccupancyGrid& belief, CellIndex start) : grid_(&belief) {
  const std::size_t total = belief.cell_count();
  dist_.assign(total, std::numeric_limits<double>::infinity());
  parent_.assign(total, -1);
  if (!belief.in_bounds(start) || belief.at(start) != Cell::Free) return;
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  const auto s = belief.flat(start);
  dist_[s] = 0.0;
  pq.emplace(0.0, s);
  const double diag = std::sqrt(2.0);
  while (!pq.empty()) {
    const auto [d, cur] = pq.top();
    pq.pop();
    if (d > dist_[cur]) continue;
    const CellIndex c = belief.unflat(cur);
    // Unknown cells are reachable as goals but never expanded.
    if (belief.at(c) != Cell::Free) continue;
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0) continue;
        const CellIndex nb{c.x + dx, c.y + dy};
        if (!belief.in_bounds(nb) || belief.at(nb) == Cell::Occupied) continue;
        if (dx != 0 && dy != 0 &&
            (belief.at({c.x + dx, c.y}) != Cell::Free || belief.at({c.x, c.y + dy}) != Cell::Free))
          continue;
        const double nd = d + (dx != 0 && dy != 0 ? diag : 1.0);
        const auto k = belief.flat(nb);
        if (nd < dist_[k]) {
          dist_[k] = nd;
          parent_[k] = static_cast<std::int64_t>(cur);
          pq.emplace(nd, k);
        }
      }
  }
}

bool DistanceField::reachable(CellIndex c) const { return grid_->in_bounds(c) && std::isfinite(dist_[grid_->flat(c)]); }

double DistanceField::cost(CellIndex c) const {
  return grid_->in_bounds(c) ? dist_[grid_->flat(c)] : std::numeric_limits<double>::infinity();
}

std::vector<CellIndex> DistanceField::path_to(CellIndex goal) const {
  if (!reachable(goal)) return {};
  std::vector<CellIndex> path;
  for (std::int64_t k = static_cast<std::int64_t>(grid_->flat(goal)); k >= 0; k = parent_[static_cast<std::size_t>(k)])
    path.push_back(grid_->unflat(static_cast<std::size_t>(k)));
  std::reverse(path.begin(), path.end());
  return path;
}

std::vector<CellIndex> plan_path(const OccupancyGrid& belief, CellIndex start, CellIndex goal) {
  return DistanceField(belief, start).path_to(goal);
}

double path_cost(const std::vector<CellIndex>& path) {
  double c = 0.0;
  for (std::size_t i = 1; i < path.size(); ++i) {
    const int dx = std::abs(path[i].x - path[i - 1].x);
    const int dy = std::abs(path[i].y - path[i - 1].y);
    c += (dx + dy == 2) ? std::sqrt(2.0) : 1.0;
  }
  return c;
}

}  // namespace pgspec
