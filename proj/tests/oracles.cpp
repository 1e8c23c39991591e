#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <set>

namespace oracle {

namespace {

int find(std::vector<int>& p, int x) {
  while (p[x] != x) x = p[x] = p[p[x]];
  return x;
}

}  // namespace

std::int64_t count_spanning_trees(int n, const EdgeList& edges) {
  if (n == 1) return 1;
  const int m = static_cast<int>(edges.size());
  const int k = n - 1;
  if (m < k) return 0;
  std::int64_t count = 0;
  std::vector<int> pick(k);
  std::iota(pick.begin(), pick.end(), 0);
  while (true) {
    std::vector<int> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    bool acyclic = true;
    for (int i : pick) {
      const int a = find(parent, edges[i].first);
      const int b = find(parent, edges[i].second);
      if (a == b) {
        acyclic = false;
        break;
      }
      parent[a] = b;
    }
    if (acyclic) ++count;
    int i = k - 1;
    while (i >= 0 && pick[i] == m - k + i) --i;
    if (i < 0) break;
    ++pick[i];
    for (int j = i + 1; j < k; ++j) pick[j] = pick[j - 1] + 1;
  }
  return count;
}

std::int64_t bareiss_det(std::vector<std::vector<std::int64_t>> a) {
  const int n = static_cast<int>(a.size());
  if (n == 0) return 1;
  std::int64_t sign = 1;
  std::int64_t prev = 1;
  for (int k = 0; k < n - 1; ++k) {
    if (a[k][k] == 0) {
      int s = k + 1;
      while (s < n && a[s][k] == 0) ++s;
      if (s == n) return 0;
      std::swap(a[k], a[s]);
      sign = -sign;
    }
    for (int i = k + 1; i < n; ++i)
      for (int j = k + 1; j < n; ++j) a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
    prev = a[k][k];
  }
  return sign * a[n - 1][n - 1];
}

std::vector<std::vector<std::int64_t>> int_laplacian(int n, const EdgeList& edges) {
  std::vector<std::vector<std::int64_t>> L(n, std::vector<std::int64_t>(n, 0));
  for (auto [a, b] : edges) {
    ++L[a][a];
    ++L[b][b];
    --L[a][b];
    --L[b][a];
  }
  return L;
}

std::vector<std::vector<std::int64_t>> drop_row_col(const std::vector<std::vector<std::int64_t>>& a, int k) {
  std::vector<std::vector<std::int64_t>> r;
  for (int i = 0; i < static_cast<int>(a.size()); ++i) {
    if (i == k) continue;
    std::vector<std::int64_t> row;
    for (int j = 0; j < static_cast<int>(a.size()); ++j)
      if (j != k) row.push_back(a[i][j]);
    r.push_back(row);
  }
  return r;
}

pgspec::Matrix kron(const pgspec::Matrix& a, const pgspec::Matrix& b) {
  pgspec::Matrix r(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      for (int k = 0; k < b.rows(); ++k)
        for (int l = 0; l < b.cols(); ++l) r(i * b.rows() + k, j * b.cols() + l) = a(i, j) * b(k, l);
  return r;
}

double kirchhoff_by_resistance(const pgspec::Matrix& L) {
  const auto n = L.rows();
  const pgspec::Matrix J = pgspec::Matrix::Constant(n, n, 1.0 / static_cast<double>(n));
  const pgspec::Matrix pinv = (L + J).inverse() - J;
  double kf = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) kf += pinv(i, i) + pinv(j, j) - 2.0 * pinv(i, j);
  return kf;
}

EdgeList random_connected(std::mt19937_64& rng, int n, int extra) {
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::set<std::pair<int, int>> seen;
  EdgeList e;
  auto add = [&](int a, int b) {
    const auto key = std::minmax(a, b);
    if (a == b || seen.count(key)) return;
    seen.insert(key);
    e.emplace_back(a, b);
  };
  for (int i = 1; i < n; ++i) {
    std::uniform_int_distribution<int> pick(0, i - 1);
    add(order[pick(rng)], order[i]);
  }
  std::uniform_int_distribution<int> any(0, n - 1);
  const int max_edges = n * (n - 1) / 2;
  for (int t = 0; t < extra * 4 && static_cast<int>(e.size()) < std::min(max_edges, n - 1 + extra); ++t)
    add(any(rng), any(rng));
  return e;
}

EdgeList random_graph(std::mt19937_64& rng, int n, double p) {
  std::bernoulli_distribution coin(p);
  EdgeList e;
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      if (coin(rng)) e.emplace_back(a, b);
  return e;
}

int components(int n, const EdgeList& edges) {
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  int c = n;
  for (auto [a, b] : edges) {
    const int ra = find(parent, a);
    const int rb = find(parent, b);
    if (ra != rb) {
      parent[ra] = rb;
      --c;
    }
  }
  return c;
}

pgspec::PoseGraph to_pose_graph(int n, const EdgeList& edges, const pgspec::InfoMatrix& phi) {
  pgspec::PoseGraph g(phi.dim());
  for (int i = 0; i < n; ++i) g.add_vertex();
  for (auto [a, b] : edges)
    g.add_edge(pgspec::Edge{pgspec::VertexId{static_cast<std::size_t>(a)}, pgspec::VertexId{static_cast<std::size_t>(b)}, phi,
                            std::nullopt, false});
  return g;
}

double grid_path_cost(const pgspec::OccupancyGrid& g, pgspec::CellIndex start, pgspec::CellIndex goal) {
  const double inf = std::numeric_limits<double>::infinity();
  const int w = g.width();
  const int h = g.height();
  std::vector<double> d(static_cast<std::size_t>(w * h), inf);
  auto idx = [w](int x, int y) { return static_cast<std::size_t>(y * w + x); };
  auto free = [&](int x, int y) { return g.at({x, y}) == pgspec::Cell::Free; };
  auto enterable = [&](int x, int y) {
    return free(x, y) || (x == goal.x && y == goal.y && g.at({x, y}) != pgspec::Cell::Occupied);
  };
  d[idx(start.x, start.y)] = 0.0;
  bool changed = true;
  while (changed) {
    changed = false;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const double here = d[idx(x, y)];
        if (here == inf) continue;
        if (!free(x, y) && !(x == start.x && y == start.y)) continue;
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            if (dx == 0 && dy == 0) continue;
            const int nx = x + dx;
            const int ny = y + dy;
            if (nx < 0 || ny < 0 || nx >= w || ny >= h || !enterable(nx, ny)) continue;
            if (dx != 0 && dy != 0 && (!free(x + dx, y) || !free(x, y + dy))) continue;
            const double c = here + ((dx != 0 && dy != 0) ? std::sqrt(2.0) : 1.0);
            if (c < d[idx(nx, ny)] - 1e-12) {
              d[idx(nx, ny)] = c;
              changed = true;
            }
          }
      }
  }
  return d[idx(goal.x, goal.y)];
}

int frontier_clusters(const pgspec::OccupancyGrid& g, std::size_t min_size) {
  const int w = g.width();
  const int h = g.height();
  auto is_frontier = [&](int x, int y) {
    if (g.at({x, y}) != pgspec::Cell::Free) return false;
    const int dx[] = {1, -1, 0, 0};
    const int dy[] = {0, 0, 1, -1};
    for (int k = 0; k < 4; ++k) {
      const int nx = x + dx[k];
      const int ny = y + dy[k];
      if (nx >= 0 && ny >= 0 && nx < w && ny < h && g.at({nx, ny}) == pgspec::Cell::Unknown) return true;
    }
    return false;
  };
  std::vector<int> seen(static_cast<std::size_t>(w * h), 0);
  std::function<std::size_t(int, int)> fill = [&](int x, int y) -> std::size_t {
    if (x < 0 || y < 0 || x >= w || y >= h) return 0;
    auto& s = seen[static_cast<std::size_t>(y * w + x)];
    if (s || !is_frontier(x, y)) return 0;
    s = 1;
    std::size_t c = 1;
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx)
        if (dx || dy) c += fill(x + dx, y + dy);
    return c;
  };
  int clusters = 0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (fill(x, y) >= min_size) ++clusters;
  return clusters;
}

}  // namespace oracle
