#include "pgspec/dataset_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include <json.hpp>

#include "pgspec/errors.hpp"

namespace pgspec {

namespace {

constexpr std::string_view kVertex2 = "VERTEX_SE2";
constexpr std::string_view kEdge2 = "EDGE_SE2";
constexpr std::string_view kVertex3 = "VERTEX_SE3:QUAT";
constexpr std::string_view kEdge3 = "EDGE_SE3:QUAT";

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

double parse_double(std::string_view tok, std::size_t line) {
  double v = 0.0;
  const char* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v))
    throw ParseError(line, "malformed number '" + std::string(tok) + "'");
  return v;
}

std::int64_t parse_int(std::string_view tok, std::size_t line) {
  std::int64_t v = 0;
  const char* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, v);
  if (ec != std::errc() || ptr != end) throw ParseError(line, "malformed integer '" + std::string(tok) + "'");
  return v;
}

std::string shortest(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

// Quaternion from x y z w; renormalised if slightly off, rejected if far from unit.
Eigen::Quaterniond parse_quaternion(const std::vector<std::string_view>& tok, std::size_t first, std::size_t line) {
  Eigen::Quaterniond q(parse_double(tok[first + 3], line), parse_double(tok[first], line),
                       parse_double(tok[first + 1], line), parse_double(tok[first + 2], line));
  const double deviation = std::abs(q.norm() - 1.0);
  if (deviation > 1e-3) throw ParseError(line, "quaternion is not unit norm");
  if (deviation > 1e-12) q.normalize();
  return q;
}

InfoMatrix unpack_upper(const std::vector<std::string_view>& tok, std::size_t first, int dim, std::size_t line) {
  Matrix m(dim, dim);
  std::size_t t = first;
  for (int r = 0; r < dim; ++r)
    for (int c = r; c < dim; ++c) {
      m(r, c) = parse_double(tok[t++], line);
      m(c, r) = m(r, c);
    }
  return InfoMatrix(std::move(m));
}

struct EdgeRecord {
  std::size_t line;
  std::int64_t from;
  std::int64_t to;
  Pose measurement;
  InfoMatrix info;
};

}  // namespace

ParsedGraph parse_pose_graph(std::string_view text) {
  std::optional<Dimension> dim;
  std::vector<std::pair<std::int64_t, Pose>> vertex_records;
  std::vector<std::size_t> vertex_lines;
  std::vector<EdgeRecord> edge_records;
  std::size_t unknown = 0;

  auto set_dim = [&](Dimension d, std::size_t line) {
    if (dim && *dim != d) throw StructuralError("line " + std::to_string(line) + ": mixed 2D and 3D records");
    dim = d;
  };
  auto require_fields = [](const std::vector<std::string_view>& tok, std::size_t count, std::size_t line) {
    if (tok.size() != count)
      throw ParseError(line, "expected " + std::to_string(count - 1) + " fields after " + std::string(tok[0]) +
                                 ", got " + std::to_string(tok.size() - 1));
  };

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    const std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    const auto tok = split_ws(line);
    if (tok.empty() || tok[0].front() == '#') continue;
    const std::string_view tag = tok[0];
    if (tag == kVertex2) {
      require_fields(tok, 5, line_no);
      set_dim(Dimension::TwoD, line_no);
      vertex_records.emplace_back(
          parse_int(tok[1], line_no),
          Pose2{parse_double(tok[2], line_no), parse_double(tok[3], line_no), parse_double(tok[4], line_no)});
      vertex_lines.push_back(line_no);
    } else if (tag == kEdge2) {
      require_fields(tok, 12, line_no);
      set_dim(Dimension::TwoD, line_no);
      edge_records.push_back({line_no, parse_int(tok[1], line_no), parse_int(tok[2], line_no),
                              Pose2{parse_double(tok[3], line_no), parse_double(tok[4], line_no),
                                    parse_double(tok[5], line_no)},
                              unpack_upper(tok, 6, 3, line_no)});
    } else if (tag == kVertex3) {
      require_fields(tok, 9, line_no);
      set_dim(Dimension::ThreeD, line_no);
      Pose3 p;
      p.translation = {parse_double(tok[2], line_no), parse_double(tok[3], line_no), parse_double(tok[4], line_no)};
      p.rotation = parse_quaternion(tok, 5, line_no);
      vertex_records.emplace_back(parse_int(tok[1], line_no), p);
      vertex_lines.push_back(line_no);
    } else if (tag == kEdge3) {
      require_fields(tok, 31, line_no);
      set_dim(Dimension::ThreeD, line_no);
      Pose3 p;
      p.translation = {parse_double(tok[3], line_no), parse_double(tok[4], line_no), parse_double(tok[5], line_no)};
      p.rotation = parse_quaternion(tok, 6, line_no);
      edge_records.push_back(
          {line_no, parse_int(tok[1], line_no), parse_int(tok[2], line_no), p, unpack_upper(tok, 10, 6, line_no)});
    } else {
      ++unknown;
    }
  }

  const Dimension d = dim.value_or(Dimension::TwoD);
  ParsedGraph out{PoseGraph(d == Dimension::TwoD ? 3 : 6), d, unknown, 0};
  std::unordered_map<std::int64_t, VertexId> dense;
  for (std::size_t i = 0; i < vertex_records.size(); ++i) {
    const auto& [id, pose] = vertex_records[i];
    if (dense.contains(id))
      throw StructuralError("line " + std::to_string(vertex_lines[i]) + ": duplicate vertex id " + std::to_string(id));
    dense.emplace(id, out.graph.add_vertex(pose, id));
  }
  for (auto& rec : edge_records) {
    const auto f = dense.find(rec.from);
    const auto t = dense.find(rec.to);
    if (f == dense.end() || t == dense.end())
      throw StructuralError("line " + std::to_string(rec.line) + ": edge references a missing vertex");
    if (f->second == t->second)
      throw StructuralError("line " + std::to_string(rec.line) + ": self-loop edge");
    Edge e{f->second, t->second, std::move(rec.info), std::move(rec.measurement), false};
    out.graph.add_edge(std::move(e), /*allow_non_pd=*/true);
    if (out.graph.edges().back().non_pd) ++out.non_pd_edges;
  }
  return out;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ParsedGraph load_dataset(const DatasetDescriptor& descriptor) {
  std::string text;
  if (descriptor.text) {
    text = *descriptor.text;
  } else if (descriptor.path) {
    text = read_text_file(*descriptor.path);
  } else {
    throw std::invalid_argument("dataset descriptor has neither path nor text");
  }
  ParsedGraph parsed = parse_pose_graph(text);
  if (descriptor.dimension && *descriptor.dimension != parsed.dimension)
    throw StructuralError("dataset dimension differs from the declared one");
  if (descriptor.declared_n && *descriptor.declared_n != parsed.graph.n())
    throw StructuralError("parsed " + std::to_string(parsed.graph.n()) + " vertices, declared " +
                          std::to_string(*descriptor.declared_n));
  if (descriptor.declared_m && *descriptor.declared_m != parsed.graph.m())
    throw StructuralError("parsed " + std::to_string(parsed.graph.m()) + " edges, declared " +
                          std::to_string(*descriptor.declared_m));
  return parsed;
}

std::string serialize_pose_graph(const PoseGraph& g) {
  std::string out;
  const bool three_d = g.ell() == 6;
  auto put = [&out](double v) {
    out += ' ';
    out += shortest(v);
  };
  auto put_pose = [&](const std::optional<Pose>& pose) {
    if (three_d) {
      const Pose3 p = pose ? std::get<Pose3>(*pose) : Pose3{};
      put(p.translation.x());
      put(p.translation.y());
      put(p.translation.z());
      put(p.rotation.x());
      put(p.rotation.y());
      put(p.rotation.z());
      put(p.rotation.w());
    } else {
      const Pose2 p = pose ? std::get<Pose2>(*pose) : Pose2{};
      put(p.x);
      put(p.y);
      put(p.theta);
    }
  };
  for (const auto& v : g.vertices()) {
    out += three_d ? kVertex3 : kVertex2;
    out += ' ' + std::to_string(g.original_id(v.id));
    put_pose(v.pose);
    out += '\n';
  }
  for (const auto& e : g.edges()) {
    out += three_d ? kEdge3 : kEdge2;
    out += ' ' + std::to_string(g.original_id(e.from)) + ' ' + std::to_string(g.original_id(e.to));
    put_pose(e.relative_pose);
    for (int r = 0; r < e.info.dim(); ++r)
      for (int c = r; c < e.info.dim(); ++c) put(e.info(r, c));
    out += '\n';
  }
  return out;
}

PoseGraph truncate_prefix(const PoseGraph& g, std::size_t k) {
  if (k < 1 || k > g.n()) throw std::invalid_argument("prefix size out of range");
  PoseGraph out(g.ell());
  for (std::size_t i = 0; i < k; ++i) out.add_vertex(g.vertices()[i].pose, g.original_ids()[i]);
  for (const auto& e : g.edges())
    if (e.from.value < k && e.to.value < k) out.add_edge(e, /*allow_non_pd=*/true);
  return out;
}

InfoMatrix random_spd(std::mt19937_64& rng, int dim, double lo, double hi) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Matrix g(dim, dim);
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c) g(r, c) = gauss(rng);
  const Matrix q = Eigen::HouseholderQR<Matrix>(g).householderQ();
  Vector eig(dim);
  const double log_lo = std::log(lo);
  const double log_hi = std::log(hi);
  for (int i = 0; i < dim; ++i) eig(i) = std::exp(log_lo + (log_hi - log_lo) * unit(rng));
  Matrix m = q * eig.asDiagonal() * q.transpose();
  m = 0.5 * (m + m.transpose()).eval();
  return InfoMatrix(std::move(m));
}

InfoMatrix info_from_sigmas(std::span<const double> sigmas) {
  std::vector<double> diag;
  for (double s : sigmas) diag.push_back(1.0 / (s * s));
  return InfoMatrix::diagonal(diag);
}

namespace {

// Position on a rectangular circuit with perimeter `period` metres, one vertex per metre.
Pose2 circuit_pose(std::size_t i, std::size_t period) {
  const double side_x = std::ceil(static_cast<double>(period) / 4.0 + static_cast<double>(period % 4) / 4.0);
  const double side_y = static_cast<double>(period) / 2.0 - side_x;
  double s = static_cast<double>(i % period);
  const double lap_offset = 0.05 * static_cast<double>(i / period);
  if (s < side_x) return {s, lap_offset, 0.0};
  s -= side_x;
  if (s < side_y) return {side_x, s + lap_offset, std::numbers::pi / 2};
  s -= side_y;
  if (s < side_x) return {side_x - s, side_y + lap_offset, std::numbers::pi};
  s -= side_x;
  return {0.0, side_y - s + lap_offset, -std::numbers::pi / 2};
}

Pose relative(const Pose& a, const Pose& b) {
  if (const auto* pa = std::get_if<Pose2>(&a)) {
    const auto& pb = std::get<Pose2>(b);
    const double dx = pb.x - pa->x;
    const double dy = pb.y - pa->y;
    const double c = std::cos(pa->theta);
    const double s = std::sin(pa->theta);
    return Pose2{c * dx + s * dy, -s * dx + c * dy, std::remainder(pb.theta - pa->theta, 2.0 * std::numbers::pi)};
  }
  const auto& pa3 = std::get<Pose3>(a);
  const auto& pb3 = std::get<Pose3>(b);
  Pose3 r;
  r.rotation = (pa3.rotation.conjugate() * pb3.rotation).normalized();
  r.translation = pa3.rotation.conjugate() * (pb3.translation - pa3.translation);
  return r;
}

}  // namespace

PoseGraph synth_graph(const SynthSpec& spec) {
  if (spec.n < 2) throw std::invalid_argument("synthetic graphs need n >= 2");
  const auto* constant = std::get_if<InfoMatrix>(&spec.phi);
  const int ell = constant ? constant->dim() : spec.ell;
  std::mt19937_64 phi_rng(constant ? 0 : std::get<RandomizedPhi>(spec.phi).seed);
  std::mt19937_64 loop_rng(spec.seed);
  auto next_phi = [&]() { return constant ? *constant : random_spd(phi_rng, ell); };

  const std::size_t period = std::clamp<std::size_t>(spec.n / 3, 4, 40);
  PoseGraph g(ell);
  for (std::size_t i = 0; i < spec.n; ++i) {
    const Pose2 p2 = circuit_pose(i, period);
    if (ell == 3) {
      g.add_vertex(p2);
    } else {
      Pose3 p3;
      p3.translation = {p2.x, p2.y, 0.0};
      p3.rotation = Eigen::Quaterniond(Eigen::AngleAxisd(p2.theta, Eigen::Vector3d::UnitZ()));
      g.add_vertex(p3);
    }
  }
  auto connect = [&](std::size_t a, std::size_t b) {
    const auto& va = g.vertices()[a];
    const auto& vb = g.vertices()[b];
    g.add_edge(Edge{va.id, vb.id, next_phi(), relative(*va.pose, *vb.pose), false});
  };
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> jitter(-1, 1);
  for (std::size_t i = 1; i < spec.n; ++i) {
    connect(i - 1, i);
    if (spec.kind == SynthKind::ChainWithLoops && i >= period && unit(loop_rng) < 0.35) {
      const long long target = static_cast<long long>(i - period) + jitter(loop_rng);
      if (target >= 0 && static_cast<std::size_t>(target) + 1 < i) connect(static_cast<std::size_t>(target), i);
    }
  }
  return g;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

double round_sig12(double v) {
  if (!std::isfinite(v)) return v;
  return std::strtod(format_number(v).c_str(), nullptr);
}

namespace {

nlohmann::json report_json(const OptimalityReport& r) {
  return {{"t", round_sig12(r.t_opt)}, {"d", round_sig12(r.d_opt)}, {"a", round_sig12(r.a_opt)},
          {"e", round_sig12(r.e_opt)}, {"e_tilde", round_sig12(r.e_tilde_opt)}};
}

}  // namespace

std::string export_series(const std::vector<ResultRow>& rows, SeriesFormat format) {
  if (format == SeriesFormat::JSON) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : rows) {
      nlohmann::json j;
      j["step"] = r.step;
      j["n"] = r.n;
      j["m"] = r.m;
      j["fim"] = r.fim ? report_json(*r.fim) : nlohmann::json(nullptr);
      j["lap"] = report_json(r.lap);
      j["us_fim"] = r.us_fim ? nlohmann::json(round_sig12(*r.us_fim)) : nlohmann::json(nullptr);
      j["us_lap"] = round_sig12(r.us_lap);
      arr.push_back(std::move(j));
    }
    return arr.dump(1) + "\n";
  }
  std::string out(kSeriesCsvHeader);
  out += '\n';
  for (const auto& r : rows) {
    out += std::to_string(r.step) + ',' + std::to_string(r.n) + ',' + std::to_string(r.m) + ',';
    if (r.fim) {
      out += format_number(r.fim->t_opt) + ',' + format_number(r.fim->d_opt) + ',' + format_number(r.fim->e_opt) + ',';
    } else {
      out += ",,,";
    }
    out += format_number(r.lap.t_opt) + ',' + format_number(r.lap.d_opt) + ',' + format_number(r.lap.e_opt) + ',';
    out += (r.us_fim ? format_number(*r.us_fim) : std::string()) + ',' + format_number(r.us_lap) + '\n';
  }
  return out;
}

std::vector<ResultRow> read_series_csv(std::string_view text) {
  std::vector<ResultRow> rows;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    const std::size_t nl = text.find('\n', pos);
    const std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    ++line_no;
    if (line.empty()) continue;
    if (line_no == 1) {
      if (line != kSeriesCsvHeader) throw ParseError(1, "unexpected series header");
      continue;
    }
    std::vector<std::string_view> f;
    std::size_t s = 0;
    while (true) {
      const std::size_t c = line.find(',', s);
      f.push_back(line.substr(s, c == std::string_view::npos ? line.size() - s : c - s));
      if (c == std::string_view::npos) break;
      s = c + 1;
    }
    if (f.size() != 11) throw ParseError(line_no, "expected 11 columns");
    ResultRow r;
    r.step = static_cast<std::size_t>(parse_int(f[0], line_no));
    r.n = static_cast<std::size_t>(parse_int(f[1], line_no));
    r.m = static_cast<std::size_t>(parse_int(f[2], line_no));
    if (!f[3].empty()) {
      OptimalityReport fim;
      fim.source = Source::FIM;
      fim.t_opt = parse_double(f[3], line_no);
      fim.d_opt = parse_double(f[4], line_no);
      fim.e_opt = parse_double(f[5], line_no);
      r.fim = fim;
    }
    r.lap.t_opt = parse_double(f[6], line_no);
    r.lap.d_opt = parse_double(f[7], line_no);
    r.lap.e_opt = parse_double(f[8], line_no);
    if (!f[9].empty()) r.us_fim = parse_double(f[9], line_no);
    r.us_lap = parse_double(f[10], line_no);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace pgspec
