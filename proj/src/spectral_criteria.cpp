#include "pgspec/spectral_criteria.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "pgspec/errors.hpp"

namespace pgspec {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_positive(std::span<const double> values) {
  for (double v : values)
    if (!(v > 0.0)) throw SingularSpectrum("non-positive eigenvalue in a p <= 0 utility");
}

// Relative comparison of two non-negative quantities.
double relative_excess(double fim, double lap) {
  const double scale = std::max({std::abs(fim), std::abs(lap), std::numeric_limits<double>::min()});
  return (fim - lap) / scale;
}

}  // namespace

std::string_view criterion_name(Criterion c) {
  switch (c) {
    case Criterion::T:
      return "T";
    case Criterion::D:
      return "D";
    case Criterion::A:
      return "A";
    case Criterion::E:
      return "E";
    case Criterion::ETilde:
      return "E~";
  }
  return "?";
}

double criterion_order(Criterion c) {
  switch (c) {
    case Criterion::T:
      return 1.0;
    case Criterion::D:
      return 0.0;
    case Criterion::A:
      return -1.0;
    case Criterion::E:
      return -kInf;
    case Criterion::ETilde:
      return kInf;
  }
  return 0.0;
}

Spectrum Spectrum::of(const Matrix& symmetric) {
  Spectrum s;
  if (symmetric.rows() == 0) return s;
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetric, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw std::runtime_error("symmetric eigensolver did not converge");
  const Vector& ev = es.eigenvalues();
  s.values.assign(ev.data(), ev.data() + ev.size());
  const double tol = zero_tolerance(s.values.back());
  s.zero_count = static_cast<std::size_t>(
      std::count_if(s.values.begin(), s.values.end(), [tol](double v) { return v <= tol; }));
  return s;
}

double utility_p_normalized(std::span<const double> values, std::size_t total_count, double p) {
  if (values.empty()) throw std::invalid_argument("utility of an empty spectrum");
  if (p > 1.0 && p != kInf) throw std::invalid_argument("utility order must satisfy p <= 1");
  if (p == kInf) return *std::max_element(values.begin(), values.end());
  if (p == -kInf) {
    require_positive(values);
    return *std::min_element(values.begin(), values.end());
  }
  if (p <= 0.0) require_positive(values);
  const auto count = static_cast<double>(total_count);
  if (p == 0.0) {
    double log_sum = 0.0;
    for (double v : values) log_sum += std::log(v);
    return std::exp(log_sum / count);
  }
  double sum = 0.0;
  for (double v : values) sum += std::pow(v, p);
  return std::pow(sum / count, 1.0 / p);
}

double utility_p(std::span<const double> values, double p) {
  return utility_p_normalized(values, values.size(), p);
}

double t_opt(std::span<const double> values) { return utility_p(values, 1.0); }
double d_opt(std::span<const double> values) { return utility_p(values, 0.0); }
double a_opt(std::span<const double> values) { return utility_p(values, -1.0); }
double e_opt(std::span<const double> values) { return utility_p(values, -kInf); }
double e_tilde_opt(std::span<const double> values) { return utility_p(values, kInf); }

double OptimalityReport::value(Criterion c) const {
  switch (c) {
    case Criterion::T:
      return t_opt;
    case Criterion::D:
      return d_opt;
    case Criterion::A:
      return a_opt;
    case Criterion::E:
      return e_opt;
    case Criterion::ETilde:
      return e_tilde_opt;
  }
  return 0.0;
}

double log_spanning_tree_count(const LaplacianMatrix& L) {
  if (L.size() == 0) throw std::invalid_argument("empty Laplacian");
  if (L.size() == 1) return 0.0;
  if (!is_connected(L)) return -kInf;
  const Matrix reduced = reduced_laplacian(L, VertexId{L.size() - 1});
  Eigen::LLT<Matrix> llt(reduced);
  if (llt.info() != Eigen::Success) throw SingularSpectrum("reduced Laplacian is not positive definite");
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

double log_spanning_tree_count(std::size_t n, std::span<const WeightedEdge> edges) {
  if (n == 0) throw std::invalid_argument("empty graph");
  if (n == 1) return 0.0;
  // Union-find connectivity check before factorising.
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  std::size_t components = n;
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(4 * edges.size());
  const auto last = n - 1;
  for (const auto& e : edges) {
    if (!(e.w > 0.0)) throw std::invalid_argument("edge weights must be positive");
    if (e.a >= n || e.b >= n || e.a == e.b) throw StructuralError("invalid weighted edge");
    const auto ra = find(e.a);
    const auto rb = find(e.b);
    if (ra != rb) {
      parent[ra] = rb;
      --components;
    }
    // Grounding the last vertex removes its row and column.
    if (e.a != last) triplets.emplace_back(e.a, e.a, e.w);
    if (e.b != last) triplets.emplace_back(e.b, e.b, e.w);
    if (e.a != last && e.b != last) {
      triplets.emplace_back(e.a, e.b, -e.w);
      triplets.emplace_back(e.b, e.a, -e.w);
    }
  }
  if (components != 1) return -kInf;
  const auto dim = static_cast<Eigen::Index>(last);
  Eigen::SparseMatrix<double> reduced(dim, dim);
  reduced.setFromTriplets(triplets.begin(), triplets.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(reduced);
  if (ldlt.info() != Eigen::Success) throw SingularSpectrum("sparse factorisation of the reduced Laplacian failed");
  const Vector d = ldlt.vectorD();
  if ((d.array() <= 0.0).any()) throw SingularSpectrum("reduced Laplacian is not positive definite");
  return d.array().log().sum();
}

double algebraic_connectivity(const LaplacianMatrix& L) {
  if (L.size() < 2) throw std::invalid_argument("algebraic connectivity needs n >= 2");
  const Spectrum s = Spectrum::of(L.matrix());
  const double mu2 = s.values[1];
  return mu2 <= zero_tolerance(s.largest()) ? 0.0 : mu2;
}

double kirchhoff_index(const LaplacianMatrix& L) {
  if (L.scheme().kind != WeightScheme::Kind::Unit)
    throw std::invalid_argument("Kirchhoff index is defined on the unit-weight Laplacian");
  if (L.size() < 2) return 0.0;
  if (!is_connected(L)) return kInf;
  const Spectrum s = Spectrum::of(L.matrix());
  if (s.zero_count != 1) return kInf;
  double inv_sum = 0.0;
  for (double mu : s.nonzero()) inv_sum += 1.0 / mu;
  return static_cast<double>(L.size()) * inv_sum;
}

double edge_weight(const InfoMatrix& phi, WeightScheme scheme) {
  if (!phi.is_positive_definite()) throw std::invalid_argument("edge information matrix is not positive definite");
  switch (scheme.kind) {
    case WeightScheme::Kind::Unit:
      return 1.0;
    case WeightScheme::Kind::MaxEig: {
      const Vector ev = phi.eigenvalues();
      return ev(ev.size() - 1);
    }
    case WeightScheme::Kind::Matched: {
      const Vector ev = phi.eigenvalues();
      return utility_p(std::span<const double>(ev.data(), static_cast<std::size_t>(ev.size())), scheme.p);
    }
  }
  return 1.0;
}

std::vector<double> edge_weights(const PoseGraph& g, WeightScheme scheme) {
  std::vector<double> w;
  w.reserve(g.m());
  for (const auto& e : g.edges()) w.push_back(edge_weight(e.info, scheme));
  return w;
}

LaplacianMatrix weighted_laplacian(const PoseGraph& g, WeightScheme scheme) {
  const auto w = edge_weights(g, scheme);
  return laplacian(g, w, scheme);
}

BlockInfoMatrix::BlockInfoMatrix(Matrix entries, int block_dim, std::size_t n, std::size_t m)
    : entries_(std::move(entries)), block_dim_(block_dim), n_(n), m_(m) {
  if (entries_.rows() != entries_.cols() || entries_.rows() != static_cast<Eigen::Index>(n * block_dim))
    throw std::invalid_argument("block information matrix has inconsistent dimensions");
}

BlockInfoMatrix assemble_fim(const PoseGraph& g) {
  const int l = g.ell();
  const auto dim = static_cast<Eigen::Index>(g.n()) * l;
  Matrix Y = Matrix::Zero(dim, dim);
  for (const auto& e : g.edges()) {
    if (e.info.dim() != l) throw StructuralError("mixed block dimensions in FIM assembly");
    const auto i = static_cast<Eigen::Index>(e.from.value) * l;
    const auto k = static_cast<Eigen::Index>(e.to.value) * l;
    const Matrix& phi = e.info.matrix();
    Y.block(i, i, l, l) += phi;
    Y.block(k, k, l, l) += phi;
    Y.block(i, k, l, l) -= phi;
    Y.block(k, i, l, l) -= phi;
  }
  return BlockInfoMatrix(std::move(Y), l, g.n(), g.m());
}

namespace {

Spectrum fim_spectrum(const BlockInfoMatrix& Y, std::size_t dim_limit) {
  const auto dim = static_cast<std::size_t>(Y.matrix().rows());
  if (dim > dim_limit)
    throw SizeLimitExceeded("FIM dimension " + std::to_string(dim) + " exceeds limit " + std::to_string(dim_limit));
  Spectrum s = Spectrum::of(Y.matrix());
  if (s.zero_count != static_cast<std::size_t>(Y.block_dim()))
    throw DisconnectedGraph("FIM has " + std::to_string(s.zero_count) + " zero eigenvalues, expected " +
                            std::to_string(Y.block_dim()));
  return s;
}

}  // namespace

OptimalityReport criteria_from_fim(const BlockInfoMatrix& Y, std::size_t dim_limit) {
  const Spectrum s = fim_spectrum(Y, dim_limit);
  const auto nz = s.nonzero();
  OptimalityReport r;
  r.source = Source::FIM;
  r.n = Y.n();
  r.m = Y.m();
  r.spectrum_size = s.values.size();
  r.zero_count = s.zero_count;
  r.t_opt = t_opt(nz);
  r.d_opt = d_opt(nz);
  r.a_opt = a_opt(nz);
  r.e_opt = e_opt(nz);
  r.e_tilde_opt = e_tilde_opt(nz);
  return r;
}

FullDimCriteria full_dim_from_fim(const BlockInfoMatrix& Y, std::size_t dim_limit) {
  const Spectrum s = fim_spectrum(Y, dim_limit);
  const auto nz = s.nonzero();
  const std::size_t total = s.values.size();
  return {utility_p_normalized(nz, total, 1.0), utility_p_normalized(nz, total, 0.0),
          utility_p_normalized(nz, total, -1.0), e_opt(nz)};
}

OptimalityReport criteria_from_laplacian(const LaplacianMatrix& L, const std::optional<InfoMatrix>& phi_bar) {
  const std::size_t n = L.size();
  if (n < 2) throw std::invalid_argument("Laplacian criteria need n >= 2");
  const Spectrum s = Spectrum::of(L.matrix());
  OptimalityReport r;
  r.source = Source::Laplacian;
  r.n = n;
  r.m = L.edge_count();
  r.spectrum_size = s.values.size();
  r.zero_count = s.zero_count;
  r.e_tilde_opt = s.largest();
  if (!is_connected(L) || s.zero_count != 1) {
    r.connected = false;
    if (phi_bar) {
      const Vector ev = phi_bar->eigenvalues();
      r.e_tilde_opt *= ev(ev.size() - 1);
    }
    return r;
  }
  const auto nz = s.nonzero();
  const auto nonzero_count = static_cast<double>(n - 1);
  r.t_opt = L.trace() / nonzero_count;
  r.d_opt = std::exp((std::log(static_cast<double>(n)) + log_spanning_tree_count(L)) / nonzero_count);
  r.a_opt = a_opt(nz);
  r.e_opt = nz.front();
  if (phi_bar) {
    const Vector ev = phi_bar->eigenvalues();
    const std::span<const double> rho(ev.data(), static_cast<std::size_t>(ev.size()));
    r.t_opt *= t_opt(rho);
    r.d_opt *= d_opt(rho);
    r.a_opt *= a_opt(rho);
    r.e_opt *= e_opt(rho);
    r.e_tilde_opt *= e_tilde_opt(rho);
  }
  return r;
}

FullDimCriteria full_dim_from_laplacian(const LaplacianMatrix& L) {
  const std::size_t n = L.size();
  if (n < 2) throw std::invalid_argument("Laplacian criteria need n >= 2");
  if (!is_connected(L)) throw DisconnectedGraph("full-dimension criteria need a connected graph");
  const Spectrum s = Spectrum::of(L.matrix());
  const auto nz = s.nonzero();
  const auto dn = static_cast<double>(n);
  double inv_sum = 0.0;
  for (double mu : nz) inv_sum += 1.0 / mu;
  FullDimCriteria f;
  f.t_opt = L.trace() / dn;
  f.d_opt = std::exp((std::log(dn) + log_spanning_tree_count(L)) / dn);
  f.a_opt = dn / inv_sum;
  f.e_opt = nz.front();
  return f;
}

BoundCheck verify_bound(const OptimalityReport& fim, const OptimalityReport& lap, double slack) {
  BoundCheck check;
  for (Criterion c : kAllCriteria) {
    const double f = fim.value(c);
    const double l = lap.value(c);
    const double gap = relative_excess(f, l);
    if (gap > slack) check.violations.push_back({c, f, l, gap});
  }
  return check;
}

GraphHealth graph_health_metrics(const PoseGraph& g) {
  GraphHealth h;
  if (g.n() == 0) return h;
  h.avg_degree = 2.0 * static_cast<double>(g.m()) / static_cast<double>(g.n());
  if (g.n() < 3 || !is_connected(g)) return h;
  std::vector<WeightedEdge> edges;
  edges.reserve(g.m());
  for (const auto& e : g.edges()) edges.push_back({e.from.value, e.to.value, 1.0});
  const double log_t = log_spanning_tree_count(g.n(), edges);
  const auto dn = static_cast<double>(g.n());
  h.norm_tree_connectivity = log_t / ((dn - 2.0) * std::log(dn));
  return h;
}

}  // namespace pgspec
