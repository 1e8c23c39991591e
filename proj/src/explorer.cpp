#include "pgspec/explorer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "pgspec/dataset_io.hpp"
#include "pgspec/errors.hpp"
#include "pgspec/spectral_criteria.hpp"

namespace pgspec {

using nlohmann::json;

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double wrap_angle(double a) { return std::remainder(a, 2.0 * std::numbers::pi); }

}  // namespace

ExplorerParams ExplorerParams::from_config(const KeyValueConfig& kv) {
  ExplorerParams p;
  p.decay = kv.get_double("decay", p.decay);
  p.k_unknown = kv.get_double("k_unknown", p.k_unknown);
  p.k_occupied = kv.get_double("k_occupied", p.k_occupied);
  p.neighborhood_radius = kv.get_double("neighborhood_radius", p.neighborhood_radius);
  p.loop_threshold = kv.get_double("loop_threshold", p.loop_threshold);
  p.node_spacing = kv.get_double("node_spacing", p.node_spacing);
  p.loop_attach_radius = kv.get_double("loop_attach_radius", p.loop_attach_radius);
  p.loop_min_separation = static_cast<std::size_t>(kv.get_int("loop_min_separation", static_cast<long long>(p.loop_min_separation)));
  p.sigma_xy = kv.get_double("sigma_xy", p.sigma_xy);
  p.sigma_theta = kv.get_double("sigma_theta", p.sigma_theta);
  p.loop_closure_radius = kv.get_double("loop_closure_radius", p.loop_closure_radius);
  p.loop_gain = kv.get_double("loop_gain", p.loop_gain);
  p.loop_info_scale = kv.get_double("loop_info_scale", p.loop_info_scale);
  p.initial_reveal_radius = kv.get_double("initial_reveal_radius", p.initial_reveal_radius);
  p.goal_clear_radius = kv.get_double("goal_clear_radius", p.goal_clear_radius);
  if (kv.contains("start_x")) p.start_x = kv.get_double("start_x", 0.0);
  if (kv.contains("start_y")) p.start_y = kv.get_double("start_y", 0.0);
  p.sensor.range = kv.get_double("sensor_range", p.sensor.range);
  p.sensor.field_of_view = kv.get_double("sensor_fov", p.sensor.field_of_view);
  p.sensor.beams = static_cast<int>(kv.get_int("sensor_beams", p.sensor.beams));
  if (!(p.node_spacing > 0.0) || !(p.decay > 0.0) || p.decay > 1.0 || p.sensor.beams < 1 ||
      !(p.neighborhood_radius > 0.0) || p.loop_gain < 0.0 || p.loop_gain > 1.0 || !(p.sensor.range > 0.0))
    throw std::invalid_argument("explorer parameters out of range");
  const KeyValueConfig known = KeyValueConfig::parse(ExplorerParams{}.to_config_text() + "start_x = 0\nstart_y = 0\n");
  for (const auto& [key, value] : kv.values())
    if (!known.contains(key)) throw std::invalid_argument("unknown explorer parameter '" + key + "'");
  return p;
}

std::string ExplorerParams::to_config_text() const {
  std::ostringstream out;
  auto put = [&out](const char* k, double v) { out << k << " = " << format_number(v) << '\n'; };
  put("decay", decay);
  put("k_unknown", k_unknown);
  put("k_occupied", k_occupied);
  put("neighborhood_radius", neighborhood_radius);
  put("loop_threshold", loop_threshold);
  put("node_spacing", node_spacing);
  put("loop_attach_radius", loop_attach_radius);
  put("loop_min_separation", static_cast<double>(loop_min_separation));
  put("sigma_xy", sigma_xy);
  put("sigma_theta", sigma_theta);
  put("loop_closure_radius", loop_closure_radius);
  put("loop_gain", loop_gain);
  put("loop_info_scale", loop_info_scale);
  put("initial_reveal_radius", initial_reveal_radius);
  put("goal_clear_radius", goal_clear_radius);
  if (start_x) put("start_x", *start_x);
  if (start_y) put("start_y", *start_y);
  put("sensor_range", sensor.range);
  put("sensor_fov", sensor.field_of_view);
  put("sensor_beams", sensor.beams);
  return out.str();
}

std::string policy_name(Policy p) { return p == Policy::GraphDopt ? "dopt" : "closest"; }

Policy parse_policy(const std::string& s) {
  if (s == "dopt" || s == "graph-dopt") return Policy::GraphDopt;
  if (s == "closest") return Policy::ClosestFrontier;
  throw std::invalid_argument("unknown policy '" + s + "'");
}

namespace {

struct Neighborhood {
  double unknown = 0.0;
  double occupied = 0.0;
};

Neighborhood neighborhood_fractions(const OccupancyGrid& belief, Point2 p, double radius) {
  const double res = belief.resolution();
  const CellIndex lo = belief.cell_of(p.x - radius, p.y - radius);
  const CellIndex hi = belief.cell_of(p.x + radius, p.y + radius);
  std::size_t total = 0;
  std::size_t unknown = 0;
  std::size_t occupied = 0;
  for (int y = std::max(lo.y, 0); y <= std::min(hi.y, belief.height() - 1); ++y)
    for (int x = std::max(lo.x, 0); x <= std::min(hi.x, belief.width() - 1); ++x) {
      const double cx = (x + 0.5) * res - p.x;
      const double cy = (y + 0.5) * res - p.y;
      if (cx * cx + cy * cy > radius * radius) continue;
      ++total;
      const Cell c = belief.at({x, y});
      if (c == Cell::Unknown) ++unknown;
      if (c == Cell::Occupied) ++occupied;
    }
  if (total == 0) return {};
  return {static_cast<double>(unknown) / static_cast<double>(total),
          static_cast<double>(occupied) / static_cast<double>(total)};
}

// Points every `spacing` metres of arc length along the path (strictly before its end), then the end.
std::vector<Point2> place_nodes(const OccupancyGrid& grid, const std::vector<CellIndex>& path, double spacing) {
  std::vector<Point2> pts;
  if (path.empty()) return pts;
  double travelled = 0.0;
  double next_mark = spacing;
  for (std::size_t i = 1; i < path.size(); ++i) {
    const Point2 a{grid.center_x(path[i - 1]), grid.center_y(path[i - 1])};
    const Point2 b{grid.center_x(path[i]), grid.center_y(path[i])};
    const double len = std::hypot(b.x - a.x, b.y - a.y);
    while (next_mark < travelled + len - 1e-9) {
      const double f = (next_mark - travelled) / len;
      pts.push_back({a.x + f * (b.x - a.x), a.y + f * (b.y - a.y)});
      next_mark += spacing;
    }
    travelled += len;
  }
  pts.push_back({grid.center_x(path.back()), grid.center_y(path.back())});
  return pts;
}

}  // namespace

HallucinatedGraph hallucinate_graph(const PoseGraph& current, std::span<const Point2> node_positions,
                                    std::size_t anchor, const std::vector<CellIndex>& path,
                                    const OccupancyGrid& belief, const InfoMatrix& last_phi,
                                    const ExplorerParams& params) {
  if (path.empty()) throw std::invalid_argument("hallucination needs a non-empty path");
  if (anchor >= current.n() || node_positions.size() != current.n())
    throw std::invalid_argument("hallucination anchor or positions inconsistent with the graph");
  HallucinatedGraph h;
  h.edges.reserve(current.m() + 2 * path.size());
  for (const auto& e : current.edges())
    h.edges.push_back({e.from.value, e.to.value, edge_weight(e.info, WeightScheme::matched(0.0))});
  const double base = edge_weight(last_phi, WeightScheme::matched(0.0));
  h.nodes = place_nodes(belief, path, params.node_spacing);
  std::size_t prev = anchor;
  std::size_t next_id = current.n();
  for (std::size_t s = 1; s <= h.nodes.size(); ++s) {
    const Point2 p = h.nodes[s - 1];
    const auto nb = neighborhood_fractions(belief, p, params.neighborhood_radius);
    const double w = base * std::pow(params.decay, static_cast<double>(s)) * (1.0 + params.k_unknown * nb.unknown) *
                     (1.0 + params.k_occupied * nb.occupied);
    const std::size_t id = next_id++;
    h.edges.push_back({prev, id, w});
    h.step_weights.push_back(w);
    if (nb.occupied > params.loop_threshold && anchor + 1 >= params.loop_min_separation) {
      const std::size_t last_old = anchor + 1 - params.loop_min_separation;  // exclusive bound
      std::optional<std::size_t> best;
      double best_d = params.loop_attach_radius;
      for (std::size_t j = 0; j < last_old; ++j) {
        const double d = std::hypot(node_positions[j].x - p.x, node_positions[j].y - p.y);
        if (d <= best_d && (!best || d < best_d)) {
          best = j;
          best_d = d;
        }
      }
      if (best) {
        h.edges.push_back({*best, id, w});
        ++h.loop_edges;
      }
    }
    prev = id;
  }
  h.n = next_id;
  return h;
}

double utility_dopt(std::size_t n, std::span<const WeightedEdge> edges) {
  const double log_t = log_spanning_tree_count(n, edges);
  if (!std::isfinite(log_t)) return kNegInf;
  const auto dn = static_cast<double>(n);
  return std::exp((std::log(dn) + log_t) / dn);
}

double utility_dopt(const HallucinatedGraph& g) { return utility_dopt(g.n, g.edges); }

std::optional<std::size_t> select_action(std::span<const CandidatePlan> candidates, Policy policy) {
  if (candidates.empty()) return std::nullopt;
  std::size_t best = 0;
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    if (policy == Policy::GraphDopt) {
      if (candidates[i].utility > candidates[best].utility) best = i;
    } else {
      if (candidates[i].path_cost < candidates[best].path_cost) best = i;
    }
  }
  return best;
}

namespace {

// Simulated SLAM: ground-truth and drifting estimated node poses over a growing pose-graph.
class SlamState {
 public:
  SlamState(const ExplorerParams& params, std::uint64_t seed, Pose2 start)
      : params_(params),
        rng_(seed),
        odometry_info_(info_from_sigmas(std::vector<double>{params.sigma_xy, params.sigma_xy, params.sigma_theta})),
        loop_info_(odometry_info_.scaled(params.loop_info_scale)) {
    graph_.add_vertex(start);
    truth_.push_back(start);
    estimate_.push_back(start);
  }

  // Adds a node at `truth` with a noisy odometry edge from the previous node, then tries a loop closure.
  void add_node(Pose2 truth) {
    const Pose2 prev_t = truth_.back();
    const Pose2 prev_e = estimate_.back();
    const double c = std::cos(prev_t.theta);
    const double s = std::sin(prev_t.theta);
    const double dx = truth.x - prev_t.x;
    const double dy = truth.y - prev_t.y;
    double lx = c * dx + s * dy;
    double ly = -s * dx + c * dy;
    double lth = wrap_angle(truth.theta - prev_t.theta);
    const double scale = std::sqrt(std::max(std::hypot(dx, dy), 1e-6) / params_.node_spacing);
    std::normal_distribution<double> n_xy(0.0, params_.sigma_xy * scale);
    std::normal_distribution<double> n_th(0.0, params_.sigma_theta * scale);
    lx += n_xy(rng_);
    ly += n_xy(rng_);
    lth += n_th(rng_);
    const double ce = std::cos(prev_e.theta);
    const double se = std::sin(prev_e.theta);
    const Pose2 est{prev_e.x + ce * lx - se * ly, prev_e.y + se * lx + ce * ly, wrap_angle(prev_e.theta + lth)};
    const VertexId prev_id{graph_.n() - 1};
    const VertexId id = graph_.add_vertex(est);
    graph_.add_edge(Edge{prev_id, id, odometry_info_, Pose2{lx, ly, lth}, false});
    truth_.push_back(truth);
    estimate_.push_back(est);
    try_loop_closure();
  }

  const PoseGraph& graph() const { return graph_; }
  const std::vector<Pose2>& truth() const { return truth_; }
  const std::vector<Pose2>& estimate() const { return estimate_; }
  const InfoMatrix& last_phi() const { return graph_.edges().empty() ? odometry_info_ : graph_.edges().back().info; }
  std::size_t loop_closures() const { return loop_closures_; }

  std::vector<Point2> positions() const {
    std::vector<Point2> p;
    p.reserve(truth_.size());
    for (const auto& t : truth_) p.push_back({t.x, t.y});
    return p;
  }

  double max_position_error() const {
    double worst = 0.0;
    for (std::size_t i = 0; i < truth_.size(); ++i)
      worst = std::max(worst, std::hypot(estimate_[i].x - truth_[i].x, estimate_[i].y - truth_[i].y));
    return worst;
  }

 private:
  void try_loop_closure() {
    const std::size_t k = truth_.size() - 1;
    if (k < params_.loop_min_separation) return;
    std::optional<std::size_t> best;
    double best_d = params_.loop_closure_radius;
    for (std::size_t j = 0; j + params_.loop_min_separation <= k; ++j) {
      const double d = std::hypot(truth_[j].x - truth_[k].x, truth_[j].y - truth_[k].y);
      if (d <= best_d && (!best || d < best_d)) {
        best = j;
        best_d = d;
      }
    }
    if (!best) return;
    const std::size_t j = *best;
    graph_.add_edge(Edge{VertexId{j}, VertexId{k}, loop_info_, std::nullopt, false});
    ++loop_closures_;
    // Shrink the drift of every node on the closed segment toward ground truth.
    const double keep = 1.0 - params_.loop_gain;
    for (std::size_t i = j + 1; i <= k; ++i) {
      estimate_[i].x = truth_[i].x + keep * (estimate_[i].x - truth_[i].x);
      estimate_[i].y = truth_[i].y + keep * (estimate_[i].y - truth_[i].y);
      estimate_[i].theta = wrap_angle(truth_[i].theta + keep * wrap_angle(estimate_[i].theta - truth_[i].theta));
    }
  }

  const ExplorerParams& params_;
  std::mt19937_64 rng_;
  InfoMatrix odometry_info_;
  InfoMatrix loop_info_;
  PoseGraph graph_{3};
  std::vector<Pose2> truth_;
  std::vector<Pose2> estimate_;
  std::size_t loop_closures_ = 0;
};

CellIndex choose_start(const OccupancyGrid& world, const ExplorerParams& params) {
  if (params.start_x && params.start_y) {
    const CellIndex c = world.cell_of(*params.start_x, *params.start_y);
    if (!world.in_bounds(c) || world.at(c) != Cell::Free) throw std::invalid_argument("start pose is not a free cell");
    return c;
  }
  const double mx = world.width() * world.resolution() / 2;
  const double my = world.height() * world.resolution() / 2;
  std::optional<CellIndex> best;
  double best_d = std::numeric_limits<double>::infinity();
  for (int y = 0; y < world.height(); ++y)
    for (int x = 0; x < world.width(); ++x) {
      if (world.at({x, y}) != Cell::Free) continue;
      const double d = std::hypot(world.center_x({x, y}) - mx, world.center_y({x, y}) - my);
      if (d < best_d) {
        best_d = d;
        best = CellIndex{x, y};
      }
    }
  if (!best) throw std::invalid_argument("world has no free cell");
  return *best;
}

ExplorationMetrics measure(const OccupancyGrid& world, const OccupancyGrid& belief, const SlamState& slam,
                           double distance) {
  ExplorationMetrics m;
  int min_x = belief.width();
  int min_y = belief.height();
  int max_x = -1;
  int max_y = -1;
  std::size_t seen_free = 0;
  std::size_t world_free = 0;
  for (int y = 0; y < belief.height(); ++y)
    for (int x = 0; x < belief.width(); ++x) {
      const Cell w = world.at({x, y});
      const Cell b = belief.at({x, y});
      if (w == Cell::Free) ++world_free;
      if (b == Cell::Unknown) continue;
      if (b == Cell::Free && w == Cell::Free) ++seen_free;
      min_x = std::min(min_x, x);
      min_y = std::min(min_y, y);
      max_x = std::max(max_x, x);
      max_y = std::max(max_y, y);
    }
  if (max_x >= 0) {
    m.map_width = (max_x - min_x + 1) * belief.resolution();
    m.map_height = (max_y - min_y + 1) * belief.resolution();
  }
  m.coverage = world_free ? 100.0 * static_cast<double>(seen_free) / static_cast<double>(world_free) : 0.0;
  m.rmse = slam.max_position_error();
  const GraphHealth h = graph_health_metrics(slam.graph());
  m.avg_degree = h.avg_degree;
  m.norm_tree_connectivity = h.norm_tree_connectivity;
  m.nodes = slam.graph().n();
  m.edges = slam.graph().m();
  m.loop_closures = slam.loop_closures();
  m.distance = distance;
  return m;
}

json metrics_json(const ExplorationMetrics& m) {
  return {{"map_size", {round_sig12(m.map_width), round_sig12(m.map_height)}},
          {"coverage", round_sig12(m.coverage)},
          {"rmse", round_sig12(m.rmse)},
          {"avg_degree", round_sig12(m.avg_degree)},
          {"norm_tree_connectivity", round_sig12(m.norm_tree_connectivity)},
          {"nodes", m.nodes},
          {"edges", m.edges},
          {"loop_closures", m.loop_closures},
          {"distance", round_sig12(m.distance)}};
}

json point_json(double x, double y) { return json::array({round_sig12(x), round_sig12(y)}); }

}  // namespace

EpisodeResult run_episode(const OccupancyGrid& world, Policy policy, int budget, std::uint64_t seed,
                          const ExplorerParams& params) {
  if (budget < 1) throw std::invalid_argument("budget must be >= 1");
  const double res = world.resolution();
  const CellIndex start = choose_start(world, params);
  Pose2 robot{world.center_x(start), world.center_y(start), 0.0};

  OccupancyGrid belief(world.width(), world.height(), res, Cell::Unknown);
  for (int y = 0; y < world.height(); ++y)
    for (int x = 0; x < world.width(); ++x)
      if (std::hypot(world.center_x({x, y}) - robot.x, world.center_y({x, y}) - robot.y) <= params.initial_reveal_radius)
        belief.set({x, y}, world.at({x, y}));
  for (int q = 0; q < 4; ++q) sense(world, belief, robot.x, robot.y, q * std::numbers::pi / 2, params.sensor);

  SlamState slam(params, seed, robot);
  std::vector<bool> retired(belief.cell_count(), false);
  double distance = 0.0;
  double since_node = 0.0;

  EpisodeResult result;
  result.unknown_cells.push_back(belief.count(Cell::Unknown));
  {
    json header;
    header["policy"] = policy_name(policy);
    header["budget"] = budget;
    header["seed"] = seed;
    header["params"] = params.to_config_text();
    result.log.push_back(header.dump());
  }

  for (int step = 0; step < budget; ++step) {
    const auto frontiers = detect_frontiers(belief, kMinFrontierSize, retired);
    if (frontiers.empty()) {
      result.complete = true;
      break;
    }
    const CellIndex here = belief.cell_of(robot.x, robot.y);
    const DistanceField field(belief, here);
    const auto positions = slam.positions();
    const std::size_t anchor = slam.graph().n() - 1;
    std::vector<CandidatePlan> candidates;
    for (std::size_t r = 0; r < frontiers.size(); ++r) {
      CandidatePlan plan;
      plan.frontier_rank = r;
      plan.goal = frontiers[r];
      plan.goal_cell = frontiers[r].goal_cell(belief);
      if (!field.reachable(plan.goal_cell)) continue;
      plan.path = field.path_to(plan.goal_cell);
      plan.path_cost = field.cost(plan.goal_cell) * res;
      if (policy == Policy::GraphDopt) {
        plan.hallucinated =
            hallucinate_graph(slam.graph(), positions, anchor, plan.path, belief, slam.last_phi(), params);
        plan.utility = utility_dopt(*plan.hallucinated);
      }
      candidates.push_back(std::move(plan));
    }
    const auto chosen = select_action(candidates, policy);
    json record;
    record["step"] = step;
    record["robot"] = point_json(robot.x, robot.y);
    json fr = json::array();
    for (const auto& f : frontiers) fr.push_back({{"centroid", point_json(f.centroid_x, f.centroid_y)}, {"size", f.size()}});
    record["frontiers"] = fr;
    json cand = json::array();
    for (const auto& c : candidates) {
      json cj{{"frontier", c.frontier_rank},
              {"goal", point_json(belief.center_x(c.goal_cell), belief.center_y(c.goal_cell))},
              {"cost", round_sig12(c.path_cost)}};
      cj["utility"] = c.hallucinated ? json(round_sig12(c.utility)) : json(nullptr);
      if (c.hallucinated) cj["predicted_loops"] = c.hallucinated->loop_edges;
      cand.push_back(std::move(cj));
    }
    record["candidates"] = cand;
    if (!chosen) {
      result.trapped = true;
      record["chosen"] = nullptr;
      record["metrics"] = metrics_json(measure(world, belief, slam, distance));
      result.log.push_back(record.dump());
      break;
    }
    const CandidatePlan& plan = candidates[*chosen];
    record["chosen"] = *chosen;

    for (std::size_t i = 1; i < plan.path.size(); ++i) {
      if (i + 1 < plan.path.size() && belief.at(plan.path[i]) != Cell::Free) ++result.non_free_moves;
      const double nx = belief.center_x(plan.path[i]);
      const double ny = belief.center_y(plan.path[i]);
      const double len = std::hypot(nx - robot.x, ny - robot.y);
      robot = {nx, ny, std::atan2(ny - robot.y, nx - robot.x)};
      distance += len;
      since_node += len;
      sense(world, belief, robot.x, robot.y, robot.theta, params.sensor);
      if (since_node >= params.node_spacing - 1e-9) {
        slam.add_node(robot);
        since_node = 0.0;
      }
    }
    if (since_node > 1e-9) {
      slam.add_node(robot);
      since_node = 0.0;
    }
    const double clear = params.goal_clear_radius;
    for (int y = 0; y < belief.height(); ++y)
      for (int x = 0; x < belief.width(); ++x)
        if (std::hypot(belief.center_x({x, y}) - robot.x, belief.center_y({x, y}) - robot.y) <= clear)
          retired[belief.flat({x, y})] = true;

    result.steps = static_cast<std::size_t>(step) + 1;
    result.unknown_cells.push_back(belief.count(Cell::Unknown));
    record["metrics"] = metrics_json(measure(world, belief, slam, distance));
    result.log.push_back(record.dump());
  }
  result.metrics = measure(world, belief, slam, distance);
  result.graph = slam.graph();
  result.truth = slam.truth();
  result.estimate = slam.estimate();
  return result;
}

}  // namespace pgspec
