#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pgspec/config.hpp"
#include "pgspec/core_graph.hpp"
#include "pgspec/occupancy_grid.hpp"

namespace pgspec {

// Tunable constants of the simulator. Every field can be overridden from a key=value file using
// the field name as key.
struct ExplorerParams {
  // Predicted information along hallucinated paths.
  double decay = 0.95;             // per hallucinated step
  double k_unknown = 0.5;          // gain on the unknown fraction around a node
  double k_occupied = 1.0;         // gain on the occupied fraction around a node
  double neighborhood_radius = 3.0;
  double loop_threshold = 0.05;    // occupied fraction that triggers a predicted loop closure
  double node_spacing = 1.0;
  double loop_attach_radius = 2.0;
  // Graph nodes closer than this many indices to the newest node are not loop-closure targets.
  std::size_t loop_min_separation = 10;

  // Simulated SLAM.
  double sigma_xy = 0.3;
  double sigma_theta = 0.063;
  double loop_closure_radius = 1.0;
  double loop_gain = 0.5;          // fraction of drift removed on the closed loop segment
  double loop_info_scale = 2.0;    // loop closures carry this multiple of the odometry information
  double initial_reveal_radius = 1.0;
  double goal_clear_radius = 1.0;  // frontier cells this close to a reached goal are retired
  std::optional<double> start_x;
  std::optional<double> start_y;
  SensorModel sensor;

  static ExplorerParams from_config(const KeyValueConfig& kv);
  // key=value rendering of every field (stable order).
  std::string to_config_text() const;
};

enum class Policy { ClosestFrontier, GraphDopt };

std::string policy_name(Policy p);
// "closest" or "dopt"; throws std::invalid_argument otherwise.
Policy parse_policy(const std::string& s);

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

// Current graph extended with predicted nodes along a candidate path.
struct HallucinatedGraph {
  std::size_t n = 0;                 // real + hallucinated nodes
  std::vector<WeightedEdge> edges;   // real edges first, then hallucinated ones
  std::vector<Point2> nodes;         // positions of the hallucinated nodes
  std::vector<double> step_weights;  // weight of each hallucinated odometry edge
  std::size_t loop_edges = 0;
};

// Real-graph weights are D-opt(phi_j). Hallucinated nodes sit every `node_spacing` metres of
// path arc length plus one at the goal and chain from `anchor`. Step s (1-based) gets
// phi_s = last_phi * decay^s * (1 + k_unknown*u) * (1 + k_occupied*o) with u/o the unknown/occupied
// fractions within `neighborhood_radius`; when o > loop_threshold an extra edge of the same
// weight joins the nearest real node within `loop_attach_radius` that is at least
// `loop_min_separation` indices older than the anchor.
HallucinatedGraph hallucinate_graph(const PoseGraph& current, std::span<const Point2> node_positions,
                                    std::size_t anchor, const std::vector<CellIndex>& path,
                                    const OccupancyGrid& belief, const InfoMatrix& last_phi,
                                    const ExplorerParams& params);

// (n t)^(1/n) evaluated in the log domain; -inf when disconnected.
double utility_dopt(const HallucinatedGraph& g);
double utility_dopt(std::size_t n, std::span<const WeightedEdge> edges);

struct CandidatePlan {
  std::size_t frontier_rank = 0;  // position in the frontier sort order
  Frontier goal;
  CellIndex goal_cell;
  std::vector<CellIndex> path;
  double path_cost = 0.0;  // metres
  std::optional<HallucinatedGraph> hallucinated;
  double utility = 0.0;
};

// GraphDopt: largest utility; ClosestFrontier: smallest path cost. Ties keep the earliest
// candidate. Empty input returns nullopt (exploration complete).
std::optional<std::size_t> select_action(std::span<const CandidatePlan> candidates, Policy policy);

struct ExplorationMetrics {
  double map_width = 0.0;   // metres, bounding box of observed cells
  double map_height = 0.0;
  double coverage = 0.0;    // % of world free cells observed
  double rmse = 0.0;        // max node position error, metres
  double avg_degree = 0.0;
  double norm_tree_connectivity = 0.0;
  std::size_t nodes = 0;
  std::size_t edges = 0;
  std::size_t loop_closures = 0;
  double distance = 0.0;    // metres travelled
};

struct EpisodeResult {
  ExplorationMetrics metrics;
  std::vector<std::string> log;  // JSON lines; the first one records the parameters
  std::size_t steps = 0;
  bool complete = false;  // no frontiers left
  bool trapped = false;   // frontiers left but none reachable
  PoseGraph graph{3};
  // Per graph node: ground-truth and estimated poses.
  std::vector<Pose2> truth;
  std::vector<Pose2> estimate;
  // Unknown belief cells after the initial scan and after each executed step.
  std::vector<std::size_t> unknown_cells;
  // Executed path cells (goal excluded) that were not Free in the belief when entered.
  std::size_t non_free_moves = 0;
};

// Decision loop: sense, detect frontiers, plan, score, select, execute with odometry noise, close loops.
// Fully determined by (world, policy, budget, seed, params).
EpisodeResult run_episode(const OccupancyGrid& world, Policy policy, int budget, std::uint64_t seed,
                          const ExplorerParams& params = {});

}  // namespace pgspec
