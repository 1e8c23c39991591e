#include "pgspec/cli.hpp"

#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pgspec/config.hpp"
#include "pgspec/dataset_io.hpp"
#include "pgspec/equivalence_bench.hpp"
#include "pgspec/errors.hpp"
#include "pgspec/explorer.hpp"
#include "pgspec/occupancy_grid.hpp"
#include "pgspec/spectral_criteria.hpp"

namespace pgspec {

using nlohmann::json;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct AuditFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

template <class F>
auto as_usage(F&& f) {
  try {
    return f();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << text;
}

json report_json(const OptimalityReport& r) {
  return {{"t", round_sig12(r.t_opt)},     {"d", round_sig12(r.d_opt)},
          {"a", round_sig12(r.a_opt)},     {"e", round_sig12(r.e_opt)},
          {"e_tilde", round_sig12(r.e_tilde_opt)}, {"spectrum_size", r.spectrum_size},
          {"zero_count", r.zero_count},    {"connected", r.connected}};
}

json full_dim_json(const FullDimCriteria& p) {
  return {{"t", round_sig12(p.t_opt)}, {"d", round_sig12(p.d_opt)}, {"a", round_sig12(p.a_opt)},
          {"e", round_sig12(p.e_opt)}};
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) parts.push_back(item);
  return parts;
}

double to_double(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw UsageError("not a number: '" + s + "'");
  }
  if (used != s.size()) throw UsageError("not a number: '" + s + "'");
  return v;
}

// ---- analyze

struct AnalyzeOptions {
  std::string file;
  std::string weights = "unit";
  std::string route = "both";
  std::string format = "json";
  std::string out;
};

int do_analyze(const AnalyzeOptions& o, std::ostream& out, std::ostream& err) {
  const WeightScheme scheme = as_usage([&] { return parse_weight_scheme(o.weights); });
  if (o.route != "fim" && o.route != "laplacian" && o.route != "both") throw UsageError("--route must be fim, laplacian or both");
  const ParsedGraph parsed = load_dataset(DatasetDescriptor{o.file, std::nullopt, std::nullopt, std::nullopt, std::nullopt});
  const PoseGraph& g = parsed.graph;
  if (g.n() < 2) throw StructuralError("graph needs at least 2 vertices");
  if (parsed.non_pd_edges > 0) throw StructuralError(std::to_string(parsed.non_pd_edges) + " edges have non positive-definite information");

  const bool connected = is_connected(g);
  if (!connected) err << "warning: graph is disconnected; criteria are partial\n";

  std::optional<OptimalityReport> lap;
  std::optional<FullDimCriteria> lap_full;
  std::optional<OptimalityReport> lap_scaled;
  std::optional<OptimalityReport> fim;
  std::optional<FullDimCriteria> fim_full;
  const std::vector<double> weights = edge_weights(g, scheme);

  if (o.route != "fim") {
    const LaplacianMatrix L = weighted_laplacian(g, scheme);
    lap = criteria_from_laplacian(L);
    if (connected) lap_full = full_dim_from_laplacian(L);
    if (scheme.kind == WeightScheme::Kind::Unit && g.m() > 0) lap_scaled = criteria_from_laplacian(L, g.edges().front().info);
  }
  if (o.route != "laplacian") {
    if (!connected) {
      err << "warning: FIM route skipped for a disconnected graph\n";
    } else {
      try {
        const BlockInfoMatrix Y = assemble_fim(g);
        fim = criteria_from_fim(Y);
        fim_full = full_dim_from_fim(Y);
      } catch (const SizeLimitExceeded& e) {
        err << "warning: FIM route skipped: " << e.what() << '\n';
      }
    }
  }
  const GraphHealth health = graph_health_metrics(g);
  std::optional<BoundCheck> bound;
  if (fim && lap && scheme.kind == WeightScheme::Kind::MaxEig) bound = verify_bound(*fim, *lap);

  if (o.format == "csv") {
    std::string text = "route,t,d,a,e,e_tilde,avg_degree,norm_tree_connectivity\n";
    auto row = [&](const char* name, const OptimalityReport& r) {
      text += std::string(name) + ',' + format_number(r.t_opt) + ',' + format_number(r.d_opt) + ',' +
              format_number(r.a_opt) + ',' + format_number(r.e_opt) + ',' + format_number(r.e_tilde_opt) + ',' +
              format_number(health.avg_degree) + ',' + format_number(health.norm_tree_connectivity) + '\n';
    };
    if (fim) row("fim", *fim);
    if (lap) row("laplacian", *lap);
    if (lap_scaled) row("laplacian_scaled", *lap_scaled);
    emit(text, o.out, out);
  } else if (o.format == "json") {
    json j;
    j["n"] = g.n();
    j["m"] = g.m();
    j["ell"] = g.ell();
    j["connected"] = connected;
    j["weights_scheme"] = scheme.name();
    json w = json::array();
    for (double v : weights) w.push_back(round_sig12(v));
    j["edge_weights"] = w;
    if (fim) {
      j["fim"] = report_json(*fim);
      j["fim"]["full_dimension"] = full_dim_json(*fim_full);
    }
    if (lap) {
      j["laplacian"] = report_json(*lap);
      if (lap_full) j["laplacian"]["full_dimension"] = full_dim_json(*lap_full);
    }
    if (lap_scaled) j["laplacian_scaled"] = report_json(*lap_scaled);
    j["health"] = {{"avg_degree", round_sig12(health.avg_degree)},
                   {"norm_tree_connectivity", round_sig12(health.norm_tree_connectivity)}};
    if (bound) {
      json v = json::array();
      for (const auto& b : bound->violations)
        v.push_back({{"criterion", criterion_name(b.criterion)}, {"relative_gap", round_sig12(b.relative_gap)}});
      j["bound"] = {{"ok", bound->ok()}, {"violations", v}};
    }
    emit(j.dump(1) + "\n", o.out, out);
  } else {
    throw UsageError("--format must be json or csv");
  }
  if (bound && !bound->ok()) throw AuditFailure("FIM exceeds the MaxEig Laplacian bound");
  return kExitOk;
}

// ---- compare

struct CompareOptions {
  std::string file;
  std::string weights;
  std::size_t stride = 0;
  std::size_t cap = 0;
  std::string config;
  std::string format = "csv";
  std::string out;
};

int do_compare(const CompareOptions& o, std::ostream& out, std::ostream& err) {
  ExperimentConfig cfg = as_usage([&] {
    return o.config.empty() ? ExperimentConfig{} : ExperimentConfig::from_config(KeyValueConfig::parse(read_text_file(o.config)));
  });
  if (!o.weights.empty()) cfg.scheme = as_usage([&] { return parse_weight_scheme(o.weights); });
  if (o.stride > 0) cfg.stride = o.stride;
  if (o.cap > 0) cfg.fim_route_cap = o.cap;
  if (o.format != "csv" && o.format != "json") throw UsageError("--format must be csv or json");

  const ParsedGraph parsed = load_dataset(DatasetDescriptor{o.file, std::nullopt, std::nullopt, std::nullopt, std::nullopt});
  as_usage([&] {
    cfg.validate(parsed.graph.ell());
    return 0;
  });
  if (parsed.non_pd_edges > 0) throw StructuralError(std::to_string(parsed.non_pd_edges) + " edges have non positive-definite information");
  const RunResult run = incremental_run(parsed.graph, cfg);
  emit(export_series(run.rows, o.format == "json" ? SeriesFormat::JSON : SeriesFormat::CSV), o.out, out);

  err << "rows " << run.rows.size() << ", skipped_disconnected " << run.skipped_disconnected << ", fim_beyond_cap "
      << run.fim_beyond_cap << '\n';
  for (Criterion c : cfg.criteria)
    err << "max_gap_" << criterion_name(c) << ' ' << format_number(max_relative_gap(run.rows, c)) << '\n';

  std::vector<AuditViolation> violations;
  if (cfg.scheme.kind == WeightScheme::Kind::Unit) violations = audit_equivalence(run.rows, cfg.criteria);
  if (cfg.scheme.kind == WeightScheme::Kind::MaxEig) violations = audit_bounds(run.rows, cfg.criteria);
  err << "audit_violations " << violations.size() << '\n';
  if (!violations.empty()) {
    const auto& v = violations.front();
    throw AuditFailure("audit failed at step " + std::to_string(v.step) + " (" + std::string(criterion_name(v.criterion)) +
                       ", gap " + format_number(v.relative_gap) + ")");
  }
  return kExitOk;
}

// ---- bench

struct BenchOptions {
  std::string sizes = "50,100,200,400";
  int ell = 3;
  int repeats = 5;
  std::uint64_t seed = 1;
  std::string out;
};

int do_bench(const BenchOptions& o, std::ostream& out, std::ostream&) {
  if (o.repeats < 3) throw UsageError("--repeats must be at least 3");
  if (o.ell != 3 && o.ell != 6) throw UsageError("--ell must be 3 or 6");
  std::vector<std::size_t> sizes;
  for (const auto& s : split(o.sizes, ',')) {
    const double v = to_double(s);
    if (v < 2 || v != static_cast<double>(static_cast<std::size_t>(v))) throw UsageError("bad size '" + s + "'");
    sizes.push_back(static_cast<std::size_t>(v));
  }
  if (sizes.empty()) throw UsageError("--sizes is empty");
  for (std::size_t i = 1; i < sizes.size(); ++i)
    if (sizes[i] <= sizes[i - 1]) throw UsageError("--sizes must be strictly ascending");
  const BenchSummary s = timing_sweep(sizes, o.ell, o.repeats, o.seed);
  json pts = json::array();
  for (const auto& p : s.points)
    pts.push_back({{"n", p.n},
                   {"median_us_fim", round_sig12(p.median_us_fim)},
                   {"median_us_lap", round_sig12(p.median_us_lap)},
                   {"speedup", round_sig12(p.speedup)}});
  json j{{"ell", s.ell}, {"points", pts}, {"monotone", s.monotone}, {"violation_count", s.violation_count}};
  emit(j.dump(1) + "\n", o.out, out);
  if (!s.monotone) throw AuditFailure("speedup is not monotone in n");
  return kExitOk;
}

// ---- gen

struct GenOptions {
  std::string kind = "chain";
  std::size_t n = 100;
  std::uint64_t seed = 0;
  std::string phi = "constant";
  int ell = 3;
  std::string out;
};

InfoMatrix constant_phi(int ell) {
  // Odometry information of the synthetic experiments: diag(11.11, 11.11, 250) in the plane.
  if (ell == 3) return InfoMatrix::diagonal(std::vector<double>{11.11, 11.11, 250.0});
  return InfoMatrix::diagonal(std::vector<double>{11.11, 11.11, 11.11, 250.0, 250.0, 250.0});
}

int do_gen(const GenOptions& o, std::ostream& out, std::ostream&) {
  if (o.ell != 3 && o.ell != 6) throw UsageError("--ell must be 3 or 6");
  if (o.n < 2) throw UsageError("--n must be at least 2");
  SynthSpec spec;
  if (o.kind == "chain")
    spec.kind = SynthKind::Chain;
  else if (o.kind == "loops")
    spec.kind = SynthKind::ChainWithLoops;
  else
    throw UsageError("--kind must be chain or loops");
  spec.n = o.n;
  spec.ell = o.ell;
  spec.seed = o.seed;
  if (o.phi == "constant") {
    spec.phi = constant_phi(o.ell);
  } else if (o.phi == "random") {
    spec.phi = RandomizedPhi{o.seed};
  } else if (o.phi.rfind("diag:", 0) == 0) {
    std::vector<double> d;
    for (const auto& s : split(o.phi.substr(5), ',')) d.push_back(to_double(s));
    if (static_cast<int>(d.size()) != o.ell) throw UsageError("diag: needs exactly ell entries");
    spec.phi = as_usage([&] { return InfoMatrix::diagonal(d); });
  } else {
    throw UsageError("--phi must be constant, random or diag:<v1,...>");
  }
  emit(serialize_pose_graph(as_usage([&] { return synth_graph(spec); })), o.out, out);
  return kExitOk;
}

// ---- explore

struct ExploreOptions {
  std::string world;
  std::string policy = "dopt";
  int budget = 200;
  std::uint64_t seed = 0;
  std::string config;
  std::string log;
  std::string out;
};

int do_explore(const ExploreOptions& o, std::ostream& out, std::ostream& err) {
  const Policy policy = as_usage([&] { return parse_policy(o.policy); });
  if (o.budget < 1) throw UsageError("--budget must be at least 1");
  ExplorerParams params;
  if (!o.config.empty()) params = ExplorerParams::from_config(KeyValueConfig::parse(read_text_file(o.config)));
  const OccupancyGrid world = parse_world(read_text_file(o.world));
  const EpisodeResult r = run_episode(world, policy, o.budget, o.seed, params);
  if (!o.log.empty()) {
    std::string text;
    for (const auto& line : r.log) text += line + '\n';
    emit(text, o.log, out);
  }
  const auto& m = r.metrics;
  json j{{"policy", policy_name(policy)},
         {"seed", o.seed},
         {"budget", o.budget},
         {"steps", r.steps},
         {"complete", r.complete},
         {"trapped", r.trapped},
         {"map_size", {round_sig12(m.map_width), round_sig12(m.map_height)}},
         {"coverage", round_sig12(m.coverage)},
         {"rmse", round_sig12(m.rmse)},
         {"avg_degree", round_sig12(m.avg_degree)},
         {"norm_tree_connectivity", round_sig12(m.norm_tree_connectivity)},
         {"nodes", m.nodes},
         {"edges", m.edges},
         {"loop_closures", m.loop_closures},
         {"distance", round_sig12(m.distance)}};
  if (r.trapped) err << "warning: robot trapped with unreachable frontiers\n";
  emit(j.dump(1) + "\n", o.out, out);
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Pose-graph optimality criteria: FIM vs graph Laplacian, and graph-based exploration"};
  app.require_subcommand(1);

  AnalyzeOptions ao;
  auto* analyze = app.add_subcommand("analyze", "Optimality criteria and graph health of a pose-graph file");
  analyze->add_option("file", ao.file, "pose-graph file")->required();
  analyze->add_option("--weights", ao.weights, "unit | maxeig | matched:<p>");
  analyze->add_option("--route", ao.route, "fim | laplacian | both");
  analyze->add_option("--format", ao.format, "json | csv");
  analyze->add_option("--out", ao.out, "output file (default stdout)");

  CompareOptions co;
  auto* compare = app.add_subcommand("compare", "Incremental FIM vs Laplacian series with audit");
  compare->add_option("file", co.file, "pose-graph file")->required();
  compare->add_option("--weights", co.weights, "unit | maxeig | matched:<p>");
  compare->add_option("--stride", co.stride, "evaluate every k edges");
  compare->add_option("--cap", co.cap, "largest n*l for the FIM route");
  compare->add_option("--config", co.config, "key = value experiment config");
  compare->add_option("--format", co.format, "csv | json");
  compare->add_option("--out", co.out, "output file (default stdout)");

  BenchOptions bo;
  auto* bench = app.add_subcommand("bench", "Timing sweep of both routes");
  bench->add_option("--sizes", bo.sizes, "comma-separated ascending vertex counts");
  bench->add_option("--ell", bo.ell, "block size (3 or 6)");
  bench->add_option("--repeats", bo.repeats, "timed repetitions per size (>= 3)");
  bench->add_option("--seed", bo.seed, "graph seed");
  bench->add_option("--out", bo.out, "output file (default stdout)");

  GenOptions go;
  auto* gen = app.add_subcommand("gen", "Synthetic pose-graph");
  gen->add_option("--kind", go.kind, "chain | loops");
  gen->add_option("--n", go.n, "vertex count");
  gen->add_option("--seed", go.seed, "seed");
  gen->add_option("--phi", go.phi, "constant | random | diag:<v1,...>");
  gen->add_option("--ell", go.ell, "block size (3 or 6)");
  gen->add_option("--out", go.out, "output file (default stdout)");

  ExploreOptions eo;
  auto* explore = app.add_subcommand("explore", "Simulated exploration episode");
  explore->add_option("world", eo.world, "world grid file")->required();
  explore->add_option("--policy", eo.policy, "dopt | closest");
  explore->add_option("--budget", eo.budget, "decision steps");
  explore->add_option("--seed", eo.seed, "odometry noise seed");
  explore->add_option("--config", eo.config, "key = value explorer constants");
  explore->add_option("--log", eo.log, "trajectory log (JSON lines)");
  explore->add_option("--out", eo.out, "metrics file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (*analyze) return do_analyze(ao, out, err);
    if (*compare) return do_compare(co, out, err);
    if (*bench) return do_bench(bo, out, err);
    if (*gen) return do_gen(go, out, err);
    if (*explore) return do_explore(eo, out, err);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const AuditFailure& e) {
    err << "audit failure: " << e.what() << '\n';
    return kExitAudit;
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace pgspec
