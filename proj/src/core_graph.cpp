#include "pgspec/core_graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <stdexcept>

#include "pgspec/errors.hpp"

namespace pgspec {

InfoMatrix::InfoMatrix(Matrix entries) : entries_(std::move(entries)) {
  if (entries_.rows() != entries_.cols()) throw std::invalid_argument("information matrix must be square");
  if (entries_.rows() != 3 && entries_.rows() != 6)
    throw std::invalid_argument("information matrix dimension must be 3 or 6");
  const double scale = std::max(entries_.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
  if ((entries_ - entries_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw std::invalid_argument("information matrix is not symmetric");
}

InfoMatrix InfoMatrix::identity(int dim) { return InfoMatrix(Matrix::Identity(dim, dim)); }

InfoMatrix InfoMatrix::diagonal(std::span<const double> diag) {
  Vector d(static_cast<Eigen::Index>(diag.size()));
  for (std::size_t i = 0; i < diag.size(); ++i) d(static_cast<Eigen::Index>(i)) = diag[i];
  return InfoMatrix(d.asDiagonal().toDenseMatrix());
}

Vector InfoMatrix::eigenvalues() const {
  Eigen::SelfAdjointEigenSolver<Matrix> es(entries_, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

bool InfoMatrix::is_positive_definite() const {
  if (entries_.size() == 0) return false;
  Eigen::LLT<Matrix> llt(entries_);
  return llt.info() == Eigen::Success && eigenvalues()(0) > 0.0;
}

InfoMatrix InfoMatrix::scaled(double factor) const {
  InfoMatrix out = *this;
  out.entries_ *= factor;
  return out;
}

PoseGraph::PoseGraph(int ell) : ell_(ell) {
  if (ell != 3 && ell != 6) throw std::invalid_argument("block dimension must be 3 or 6");
}

VertexId PoseGraph::add_vertex(std::optional<Pose> pose, std::optional<std::int64_t> original_id) {
  VertexId id{vertices_.size()};
  if (pose) {
    if (auto* p3 = std::get_if<Pose3>(&*pose)) {
      if (std::abs(p3->rotation.norm() - 1.0) > 1e-9)
        throw std::invalid_argument("vertex orientation quaternion is not unit norm");
    }
  }
  vertices_.push_back(Vertex{id, std::move(pose)});
  original_ids_.push_back(original_id.value_or(static_cast<std::int64_t>(id.value)));
  return id;
}

void PoseGraph::add_edge(Edge edge, bool allow_non_pd) {
  if (edge.from == edge.to) throw StructuralError("self-loop edge on vertex " + std::to_string(edge.from.value));
  if (edge.from.value >= n() || edge.to.value >= n())
    throw StructuralError("edge references a missing vertex");
  if (edge.info.dim() != ell_) throw StructuralError("edge information block size differs from graph block size");
  edge.non_pd = !edge.info.is_positive_definite();
  if (edge.non_pd && !allow_non_pd) throw std::invalid_argument("edge information matrix is not positive definite");
  edges_.push_back(std::move(edge));
}

WeightScheme WeightScheme::matched(double p) {
  if (!(p <= 1.0)) throw std::invalid_argument("matched weight order must satisfy p <= 1");
  return {Kind::Matched, p};
}

std::string WeightScheme::name() const {
  switch (kind) {
    case Kind::Unit:
      return "unit";
    case Kind::MaxEig:
      return "maxeig";
    case Kind::Matched: {
      if (std::isinf(p)) return "matched:-inf";
      char buf[48];
      std::snprintf(buf, sizeof buf, "matched:%.12g", p);
      return buf;
    }
  }
  return "unknown";
}

LaplacianMatrix::LaplacianMatrix(Matrix entries, WeightScheme scheme, std::size_t edge_count)
    : entries_(std::move(entries)), scheme_(scheme), edge_count_(edge_count) {
  if (entries_.rows() != entries_.cols()) throw std::invalid_argument("Laplacian must be square");
  if (entries_.rows() == 0) return;
  const double scale = entries_.cwiseAbs().maxCoeff();
  const double tol = 1e-9 * std::max(scale, std::numeric_limits<double>::min());
  if ((entries_ - entries_.transpose()).cwiseAbs().maxCoeff() > tol)
    throw std::invalid_argument("Laplacian is not symmetric");
  if (entries_.rowwise().sum().cwiseAbs().maxCoeff() > tol)
    throw std::invalid_argument("Laplacian row sums are not zero");
  for (Eigen::Index i = 0; i < entries_.rows(); ++i)
    for (Eigen::Index k = 0; k < entries_.cols(); ++k)
      if (i != k && entries_(i, k) > 0.0) throw std::invalid_argument("Laplacian has a positive off-diagonal entry");
}

double zero_tolerance(double largest_eigenvalue) { return 1e-9 * std::max(largest_eigenvalue, 1.0); }

IntMatrix adjacency_matrix(const PoseGraph& g) {
  const auto n = static_cast<Eigen::Index>(g.n());
  IntMatrix a = IntMatrix::Zero(n, n);
  for (const auto& e : g.edges()) {
    a(e.from.value, e.to.value) = 1;
    a(e.to.value, e.from.value) = 1;
  }
  return a;
}

IntMatrix incidence_matrix(const PoseGraph& g) {
  IntMatrix q = IntMatrix::Zero(static_cast<Eigen::Index>(g.n()), static_cast<Eigen::Index>(g.m()));
  for (std::size_t j = 0; j < g.m(); ++j) {
    const auto& e = g.edges()[j];
    q(e.from.value, j) = 1;
    q(e.to.value, j) = -1;
  }
  return q;
}

LaplacianMatrix laplacian(std::size_t n, std::span<const WeightedEdge> edges, WeightScheme scheme) {
  Matrix L = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (const auto& e : edges) {
    if (!(e.w > 0.0)) throw std::invalid_argument("edge weights must be positive");
    if (e.a >= n || e.b >= n) throw StructuralError("weighted edge references a missing vertex");
    if (e.a == e.b) throw StructuralError("self-loop in weighted edge list");
    L(e.a, e.a) += e.w;
    L(e.b, e.b) += e.w;
    L(e.a, e.b) -= e.w;
    L(e.b, e.a) -= e.w;
  }
  return LaplacianMatrix(std::move(L), scheme, edges.size());
}

LaplacianMatrix laplacian(const PoseGraph& g, std::span<const double> weights, WeightScheme scheme) {
  if (weights.size() != g.m()) throw std::invalid_argument("need exactly one weight per edge");
  std::vector<WeightedEdge> edges;
  edges.reserve(g.m());
  for (std::size_t j = 0; j < g.m(); ++j)
    edges.push_back({g.edges()[j].from.value, g.edges()[j].to.value, weights[j]});
  return laplacian(g.n(), edges, scheme);
}

LaplacianMatrix unit_laplacian(const PoseGraph& g) {
  const std::vector<double> ones(g.m(), 1.0);
  return laplacian(g, ones, WeightScheme::unit());
}

Matrix reduced_laplacian(const LaplacianMatrix& L, VertexId drop) {
  const auto n = static_cast<Eigen::Index>(L.size());
  if (n < 2) throw std::invalid_argument("reduced Laplacian needs at least two vertices");
  const auto d = static_cast<Eigen::Index>(drop.value);
  if (d >= n) throw std::invalid_argument("dropped vertex out of range");
  std::vector<Eigen::Index> keep;
  keep.reserve(n - 1);
  for (Eigen::Index i = 0; i < n; ++i)
    if (i != d) keep.push_back(i);
  return L.matrix()(keep, keep);
}

namespace {

// Breadth-first component labelling over an adjacency list.
std::size_t count_components(const std::vector<std::vector<std::size_t>>& adj) {
  const std::size_t n = adj.size();
  std::vector<bool> seen(n, false);
  std::size_t components = 0;
  std::queue<std::size_t> frontier;
  for (std::size_t s = 0; s < n; ++s) {
    if (seen[s]) continue;
    ++components;
    seen[s] = true;
    frontier.push(s);
    while (!frontier.empty()) {
      const auto v = frontier.front();
      frontier.pop();
      for (auto u : adj[v])
        if (!seen[u]) {
          seen[u] = true;
          frontier.push(u);
        }
    }
  }
  return components;
}

std::vector<std::vector<std::size_t>> adjacency_list(const PoseGraph& g) {
  std::vector<std::vector<std::size_t>> adj(g.n());
  for (const auto& e : g.edges()) {
    adj[e.from.value].push_back(e.to.value);
    adj[e.to.value].push_back(e.from.value);
  }
  return adj;
}

}  // namespace

std::size_t component_count(const PoseGraph& g) { return count_components(adjacency_list(g)); }

bool is_connected(const PoseGraph& g) { return g.n() >= 1 && component_count(g) == 1; }

bool is_connected(const LaplacianMatrix& L) {
  const auto n = L.size();
  if (n == 0) return false;
  std::vector<std::vector<std::size_t>> adj(n);
  const auto& M = L.matrix();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = i + 1; k < n; ++k)
      if (M(i, k) < 0.0) {
        adj[i].push_back(k);
        adj[k].push_back(i);
      }
  return count_components(adj) == 1;
}

}  // namespace pgspec
