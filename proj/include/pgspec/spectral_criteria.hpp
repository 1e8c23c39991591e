#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "pgspec/core_graph.hpp"

namespace pgspec {

// Optimality criteria of the Kiefer family. `ETilde` is the max-eigenvalue limit (p -> +inf).
enum class Criterion { T, D, A, E, ETilde };

inline constexpr Criterion kAllCriteria[] = {Criterion::T, Criterion::D, Criterion::A, Criterion::E,
                                             Criterion::ETilde};

std::string_view criterion_name(Criterion c);
// Order p of the criterion: 1, 0, -1, -inf, +inf.
double criterion_order(Criterion c);

// Ascending eigenvalues of a symmetric PSD matrix, with the count of (numerically) zero values.
struct Spectrum {
  std::vector<double> values;
  std::size_t zero_count = 0;

  static Spectrum of(const Matrix& symmetric);
  std::span<const double> nonzero() const { return std::span(values).subspan(zero_count); }
  double largest() const { return values.empty() ? 0.0 : values.back(); }
};

// Power mean of order p over `values`; p = 0 is the geometric mean, p = -inf the minimum and
// p = +inf the maximum. Orders in (1, inf) are rejected. Throws SingularSpectrum when p <= 0 and a
// value is not strictly positive.
double utility_p(std::span<const double> values, double p);

double t_opt(std::span<const double> values);
double d_opt(std::span<const double> values);
double a_opt(std::span<const double> values);
double e_opt(std::span<const double> values);
double e_tilde_opt(std::span<const double> values);

enum class Source { FIM, Laplacian };

struct OptimalityReport {
  double t_opt = 0.0;
  double d_opt = 0.0;
  double a_opt = 0.0;
  double e_opt = 0.0;
  double e_tilde_opt = 0.0;
  Source source = Source::Laplacian;
  std::size_t n = 0;
  std::size_t m = 0;
  // Spectrum metadata: total eigenvalue count and how many were dropped as zero.
  std::size_t spectrum_size = 0;
  std::size_t zero_count = 0;
  bool connected = true;

  double value(Criterion c) const;
};

// Criteria in the normalisation the closed forms use: sums over the non-zero eigenvalues divided by
// the full dimension (n for L, n*l for Y) instead of the non-zero count. T(L) = trace/n,
// D(L) = (n t)^(1/n), A(L) = n / sum(1/mu) which is n^2/Kf for unit weights.
struct FullDimCriteria {
  double t_opt = 0.0;
  double d_opt = 0.0;
  double a_opt = 0.0;
  double e_opt = 0.0;
};

// Power mean of order p over `nonzero` with the sum normalised by `total_count` instead of nonzero.size().
double utility_p_normalized(std::span<const double> nonzero, std::size_t total_count, double p);

// Log of the (weighted) spanning-tree count via the log-determinant of the reduced Laplacian.
// Returns -inf for a disconnected graph.
double log_spanning_tree_count(const LaplacianMatrix& L);
// Same quantity from an edge list using a sparse factorisation.
double log_spanning_tree_count(std::size_t n, std::span<const WeightedEdge> edges);

// Second-smallest eigenvalue; 0 for disconnected graphs. Throws std::invalid_argument for n < 2.
double algebraic_connectivity(const LaplacianMatrix& L);

// n * sum_{k>=2} 1/mu_k for a unit-weight Laplacian; +inf when disconnected.
double kirchhoff_index(const LaplacianMatrix& L);

// Scalar edge weight of an information matrix under a scheme. Throws std::invalid_argument if
// phi is not positive definite.
double edge_weight(const InfoMatrix& phi, WeightScheme scheme);
std::vector<double> edge_weights(const PoseGraph& g, WeightScheme scheme);
LaplacianMatrix weighted_laplacian(const PoseGraph& g, WeightScheme scheme);

// nl x nl Fisher information: block (i,i) += phi_j, blocks (i,k),(k,i) -= phi_j per edge.
class BlockInfoMatrix {
 public:
  BlockInfoMatrix(Matrix entries, int block_dim, std::size_t n, std::size_t m);

  const Matrix& matrix() const { return entries_; }
  int block_dim() const { return block_dim_; }
  std::size_t n() const { return n_; }
  std::size_t m() const { return m_; }

 private:
  Matrix entries_;
  int block_dim_;
  std::size_t n_;
  std::size_t m_;
};

BlockInfoMatrix assemble_fim(const PoseGraph& g);

inline constexpr std::size_t kDefaultFimDimLimit = 6000;

// Full dense eigensolve of Y; drops exactly l zero eigenvalues. Throws DisconnectedGraph when the
// zero count differs from l and SizeLimitExceeded above `dim_limit`.
OptimalityReport criteria_from_fim(const BlockInfoMatrix& Y, std::size_t dim_limit = kDefaultFimDimLimit);
FullDimCriteria full_dim_from_fim(const BlockInfoMatrix& Y, std::size_t dim_limit = kDefaultFimDimLimit);

// Criteria over the non-zero Laplacian spectrum. T uses the trace, D the log-determinant and E the
// Fiedler value. With `phi_bar` each criterion is multiplied by the same criterion of phi_bar, which
// is exact for L (x) phi_bar. A disconnected graph yields a report with connected = false and every
// criterion but e_tilde set to 0.
OptimalityReport criteria_from_laplacian(const LaplacianMatrix& L,
                                         const std::optional<InfoMatrix>& phi_bar = std::nullopt);
FullDimCriteria full_dim_from_laplacian(const LaplacianMatrix& L);

struct BoundViolation {
  Criterion criterion;
  double fim_value;
  double laplacian_value;
  double relative_gap;
};

struct BoundCheck {
  std::vector<BoundViolation> violations;
  bool ok() const { return violations.empty(); }
};

// Flags every criterion where the FIM value exceeds the Laplacian value by more than `slack` relative.
BoundCheck verify_bound(const OptimalityReport& fim, const OptimalityReport& lap, double slack = 1e-9);

struct GraphHealth {
  double avg_degree = 0.0;
  double norm_tree_connectivity = 0.0;
};

// d = 2m/n and tau = log t(G) / log t(K_n) on unit weights; tau = 0 when disconnected or n < 3.
GraphHealth graph_health_metrics(const PoseGraph& g);

}  // namespace pgspec
