#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "pgspec/core_graph.hpp"
#include "pgspec/spectral_criteria.hpp"

namespace pgspec {

enum class Dimension { TwoD, ThreeD };

// Where a dataset lives and what it is expected to contain. Exactly one of path/text is used
// (text wins when both are set).
struct DatasetDescriptor {
  std::optional<std::filesystem::path> path;
  std::optional<std::string> text;
  std::optional<Dimension> dimension;
  std::optional<std::size_t> declared_n;
  std::optional<std::size_t> declared_m;
};

struct ParsedGraph {
  PoseGraph graph;
  Dimension dimension = Dimension::TwoD;
  std::size_t unknown_records = 0;  // lines with an unrecognised tag, skipped
  std::size_t non_pd_edges = 0;     // edges kept but flagged
};

// Text pose-graph format, one record per line:
//   VERTEX_SE2 id x y theta
//   EDGE_SE2 i j dx dy dtheta I11 I12 I13 I22 I23 I33
//   VERTEX_SE3:QUAT id x y z qx qy qz qw
//   EDGE_SE3:QUAT i j x y z qx qy qz qw I11 I12 .. I16 I22 .. I66
// Information entries are the row-major upper triangle. Blank lines and '#' comments are ignored.
// Dataset ids are remapped to dense indices in order of appearance.
// Throws ParseError (with line) for malformed fields and StructuralError for dangling edges,
// duplicate vertex ids or mixed 2D/3D records.
ParsedGraph parse_pose_graph(std::string_view text);

// Reads the file or inline text and checks declared dimension and counts.
ParsedGraph load_dataset(const DatasetDescriptor& descriptor);

// Writes the format above with shortest round-trip number formatting. Missing poses are written as identity.
std::string serialize_pose_graph(const PoseGraph& g);

// First k vertices and every edge with both endpoints among them.
PoseGraph truncate_prefix(const PoseGraph& g, std::size_t k);

enum class SynthKind { Chain, ChainWithLoops };

struct RandomizedPhi {
  std::uint64_t seed = 0;
};

struct SynthSpec {
  SynthKind kind = SynthKind::Chain;
  std::size_t n = 2;
  std::variant<InfoMatrix, RandomizedPhi> phi = RandomizedPhi{};
  int ell = 3;             // used by RandomizedPhi; a constant phi fixes its own dimension
  std::uint64_t seed = 0;  // loop-closure placement
};

// Chain: n-1 odometry edges along a planar circuit. ChainWithLoops additionally closes seeded
// loops between vertices one lap apart. Randomised phi has eigenvalues log-uniform in [1, 300].
PoseGraph synth_graph(const SynthSpec& spec);

// Random SPD matrix: Haar-ish rotation of a diagonal with log-uniform eigenvalues in [lo, hi].
InfoMatrix random_spd(std::mt19937_64& rng, int dim, double lo = 1.0, double hi = 300.0);

// Information matrix of independent noise with the given standard deviations.
InfoMatrix info_from_sigmas(std::span<const double> sigmas);

struct ResultRow {
  std::size_t step = 0;
  std::size_t n = 0;
  std::size_t m = 0;
  std::optional<OptimalityReport> fim;
  OptimalityReport lap;
  std::optional<double> us_fim;
  double us_lap = 0.0;
};

enum class SeriesFormat { CSV, JSON };

inline constexpr std::string_view kSeriesCsvHeader = "step,n,m,t_fim,d_fim,e_fim,t_lap,d_lap,e_lap,us_fim,us_lap";

std::string export_series(const std::vector<ResultRow>& rows, SeriesFormat format);
// Parses the CSV schema back (criteria not in the schema are left at 0).
std::vector<ResultRow> read_series_csv(std::string_view text);

// 12 significant digits, the repo-wide numeric output precision.
std::string format_number(double v);
// v rounded to 12 significant digits (for JSON emission).
double round_sig12(double v);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace pgspec
