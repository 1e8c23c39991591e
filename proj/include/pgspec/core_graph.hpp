#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Geometry>

namespace pgspec {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using IntMatrix = Eigen::MatrixXi;

// Dense vertex index, 0..n-1.
struct VertexId {
  std::size_t value = 0;
  auto operator<=>(const VertexId&) const = default;
};

struct Pose2 {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
  bool operator==(const Pose2&) const = default;
};

struct Pose3 {
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
  Eigen::Quaterniond rotation = Eigen::Quaterniond::Identity();
  bool operator==(const Pose3& o) const {
    return translation == o.translation && rotation.coeffs() == o.rotation.coeffs();
  }
};

using Pose = std::variant<Pose2, Pose3>;

struct Vertex {
  VertexId id;
  std::optional<Pose> pose;
  bool operator==(const Vertex&) const = default;
};

// Symmetric l x l information matrix (inverse covariance), l in {3, 6}.
class InfoMatrix {
 public:
  InfoMatrix() = default;
  // Throws std::invalid_argument unless square, l in {3,6} and symmetric within 1e-12 relative.
  explicit InfoMatrix(Matrix entries);

  static InfoMatrix identity(int dim);
  static InfoMatrix diagonal(std::span<const double> diag);

  int dim() const { return static_cast<int>(entries_.rows()); }
  const Matrix& matrix() const { return entries_; }
  double operator()(int r, int c) const { return entries_(r, c); }

  // Ascending eigenvalues.
  Vector eigenvalues() const;
  bool is_positive_definite() const;

  InfoMatrix scaled(double factor) const;

  bool operator==(const InfoMatrix& o) const { return entries_ == o.entries_; }

 private:
  Matrix entries_;
};

struct Edge {
  VertexId from;
  VertexId to;
  InfoMatrix info;
  std::optional<Pose> relative_pose;
  // Set when the information matrix is not positive definite (kept for ingestion only).
  bool non_pd = false;
  bool operator==(const Edge&) const = default;
};

// Pose-graph G = (V, E). Edges are stored directed; all matrix constructions treat them as undirected.
class PoseGraph {
 public:
  explicit PoseGraph(int ell = 3);

  // Appends a vertex with the next dense id; `original_id` is the dataset id (defaults to the dense id).
  VertexId add_vertex(std::optional<Pose> pose = std::nullopt,
                      std::optional<std::int64_t> original_id = std::nullopt);
  // Throws StructuralError for self loops, dangling endpoints or block size mismatch.
  // Non-PD information is rejected unless `allow_non_pd`, in which case the edge is flagged.
  void add_edge(Edge edge, bool allow_non_pd = false);

  std::size_t n() const { return vertices_.size(); }
  std::size_t m() const { return edges_.size(); }
  int ell() const { return ell_; }

  const std::vector<Vertex>& vertices() const { return vertices_; }
  const std::vector<Edge>& edges() const { return edges_; }
  std::int64_t original_id(VertexId v) const { return original_ids_.at(v.value); }
  const std::vector<std::int64_t>& original_ids() const { return original_ids_; }

  bool operator==(const PoseGraph&) const = default;

 private:
  int ell_;
  std::vector<Vertex> vertices_;
  std::vector<Edge> edges_;
  std::vector<std::int64_t> original_ids_;
};

// Per-edge scalar weighting of the Laplacian.
struct WeightScheme {
  enum class Kind { Unit, MaxEig, Matched };
  Kind kind = Kind::Unit;
  double p = 0.0;  // only meaningful for Matched; must be <= 1 (or -inf)

  static WeightScheme unit() { return {Kind::Unit, 0.0}; }
  static WeightScheme max_eig() { return {Kind::MaxEig, 0.0}; }
  // Throws std::invalid_argument for p > 1.
  static WeightScheme matched(double p);

  std::string name() const;
  bool operator==(const WeightScheme&) const = default;
};

// Undirected weighted edge between dense vertex indices.
struct WeightedEdge {
  std::size_t a = 0;
  std::size_t b = 0;
  double w = 1.0;
};

// Symmetric n x n (weighted) Laplacian with zero row sums.
class LaplacianMatrix {
 public:
  // Throws std::invalid_argument on invariant violation (asymmetric, non-zero row sums,
  // positive off-diagonal entries).
  LaplacianMatrix(Matrix entries, WeightScheme scheme, std::size_t edge_count = 0);

  std::size_t size() const { return static_cast<std::size_t>(entries_.rows()); }
  // Number of edges it was built from (parallel edges counted separately); 0 if unknown.
  std::size_t edge_count() const { return edge_count_; }
  const Matrix& matrix() const { return entries_; }
  const WeightScheme& scheme() const { return scheme_; }
  double trace() const { return entries_.trace(); }

 private:
  Matrix entries_;
  WeightScheme scheme_;
  std::size_t edge_count_;
};

// Eigenvalues <= this are treated as zero: 1e-9 relative to the largest eigenvalue (floored at 1).
double zero_tolerance(double largest_eigenvalue);

IntMatrix adjacency_matrix(const PoseGraph& g);
// Column j holds +1 at `from` and -1 at `to` of edge j.
IntMatrix incidence_matrix(const PoseGraph& g);

// Weighted Laplacian; `weights` must have one positive entry per edge.
LaplacianMatrix laplacian(const PoseGraph& g, std::span<const double> weights,
                          WeightScheme scheme = WeightScheme::unit());
LaplacianMatrix unit_laplacian(const PoseGraph& g);
LaplacianMatrix laplacian(std::size_t n, std::span<const WeightedEdge> edges,
                          WeightScheme scheme = WeightScheme::unit());

// Deletes row and column `drop`. Throws std::invalid_argument for n < 2 or drop out of range.
Matrix reduced_laplacian(const LaplacianMatrix& L, VertexId drop);

bool is_connected(const PoseGraph& g);
std::size_t component_count(const PoseGraph& g);
// Connectivity read off the sparsity pattern of a Laplacian.
bool is_connected(const LaplacianMatrix& L);

}  // namespace pgspec
