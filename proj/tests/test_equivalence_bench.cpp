#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "pgspec/config.hpp"
#include "pgspec/dataset_io.hpp"
#include "pgspec/equivalence_bench.hpp"
#include "pgspec/errors.hpp"

using namespace pgspec;

namespace {

InfoMatrix frh_phi() {
  const std::vector<double> d{11.11, 11.11, 250.0};
  return InfoMatrix::diagonal(d);
}

PoseGraph chain(std::size_t n, SynthKind kind = SynthKind::Chain, std::uint64_t seed = 0) {
  SynthSpec s;
  s.kind = kind;
  s.n = n;
  s.phi = frh_phi();
  s.seed = seed;
  return synth_graph(s);
}

PoseGraph random_loops(std::size_t n, std::uint64_t seed) {
  SynthSpec s;
  s.kind = SynthKind::ChainWithLoops;
  s.n = n;
  s.phi = RandomizedPhi{seed};
  s.seed = seed;
  return synth_graph(s);
}

bool same_values(const std::vector<ResultRow>& a, const std::vector<ResultRow>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].step != b[i].step || a[i].n != b[i].n || a[i].m != b[i].m) return false;
    for (Criterion c : kAllCriteria) {
      if (a[i].lap.value(c) != b[i].lap.value(c)) return false;
      if (a[i].fim.has_value() != b[i].fim.has_value()) return false;
      if (a[i].fim && a[i].fim->value(c) != b[i].fim->value(c)) return false;
    }
  }
  return true;
}

}  // namespace

TEST_SUITE("equivalence_bench") {
  TEST_CASE("weight scheme parsing") {
    CHECK(parse_weight_scheme("unit") == WeightScheme::unit());
    CHECK(parse_weight_scheme("maxeig") == WeightScheme::max_eig());
    CHECK(parse_weight_scheme("matched:0") == WeightScheme::matched(0.0));
    CHECK(parse_weight_scheme("matched:-1") == WeightScheme::matched(-1.0));
    CHECK(std::isinf(parse_weight_scheme("matched:-inf").p));
    CHECK_THROWS_AS(parse_weight_scheme("matched:2"), std::invalid_argument);
    CHECK_THROWS_AS(parse_weight_scheme("matched:x"), std::invalid_argument);
    CHECK_THROWS_AS(parse_weight_scheme("bogus"), std::invalid_argument);
  }

  TEST_CASE("config file and validation") {
    const auto kv = KeyValueConfig::parse("# run\nweights = maxeig\ncriteria = T,E\nstride = 5\ncap = 900\nseed = 3\n");
    const ExperimentConfig c = ExperimentConfig::from_config(kv);
    CHECK(c.scheme == WeightScheme::max_eig());
    REQUIRE(c.criteria.size() == 2);
    CHECK(c.criteria[1] == Criterion::E);
    CHECK(c.stride == 5);
    CHECK(c.fim_route_cap == 900);
    CHECK(c.seed == 3);
    ExperimentConfig bad;
    bad.stride = 0;
    CHECK_THROWS_AS(bad.validate(3), std::invalid_argument);
    ExperimentConfig small;
    small.fim_route_cap = 5;
    CHECK_THROWS_AS(small.validate(3), std::invalid_argument);
    CHECK_NOTHROW(small.validate(2));
    CHECK_THROWS_AS(KeyValueConfig::parse("stride 5\n"), ParseError);
  }

  TEST_CASE("unit scheme on a constant chain: routes agree at every step") {
    ExperimentConfig cfg;
    const RunResult r = incremental_run(chain(120), cfg);
    CHECK(r.rows.size() == 119);
    CHECK(r.skipped_disconnected == 0);
    CHECK(audit_equivalence(r.rows, cfg.criteria).empty());
    CHECK(max_relative_gap(r.rows, Criterion::T) <= 1e-6);
    CHECK(max_relative_gap(r.rows, Criterion::D) <= 1e-6);
    CHECK(max_relative_gap(r.rows, Criterion::E) <= 1e-4);
    for (const auto& row : r.rows) {
      CHECK(ordering_holds(*row.fim));
      CHECK(ordering_holds(row.lap));
      CHECK(row.us_fim.has_value());
    }
  }

  TEST_CASE("stride, last step and the FIM cap") {
    ExperimentConfig cfg;
    cfg.stride = 7;
    cfg.fim_route_cap = 60;  // n <= 20
    const RunResult r = incremental_run(chain(50), cfg);
    CHECK(r.rows.back().step == 49);
    for (std::size_t i = 0; i + 1 < r.rows.size(); ++i) {
      CHECK(r.rows[i].step % 7 == 0);
      CHECK(r.rows[i].step < r.rows[i + 1].step);
    }
    for (const auto& row : r.rows) CHECK(row.fim.has_value() == (row.n <= 20));
    CHECK(r.fim_beyond_cap > 0);
    const std::string csv = export_series(r.rows, SeriesFormat::CSV);
    CHECK(csv.find("\n49,50,49,,,,") != std::string::npos);
  }

  TEST_CASE("disconnected prefixes are skipped and counted") {
    PoseGraph g(3);
    for (int i = 0; i < 4; ++i) g.add_vertex();
    const auto I = InfoMatrix::identity(3);
    g.add_edge(Edge{VertexId{0}, VertexId{1}, I, std::nullopt, false});
    g.add_edge(Edge{VertexId{2}, VertexId{3}, I, std::nullopt, false});
    g.add_edge(Edge{VertexId{1}, VertexId{2}, I, std::nullopt, false});
    const RunResult r = incremental_run(g, ExperimentConfig{});
    CHECK(r.skipped_disconnected == 1);
    REQUIRE(r.rows.size() == 2);
    CHECK(r.rows[1].n == 4);
  }

  TEST_CASE("MaxEig on randomised loopy graphs never violates the bound") {
    ExperimentConfig cfg;
    cfg.scheme = WeightScheme::max_eig();
    cfg.stride = 3;
    const RunResult r = incremental_run(random_loops(200, 5), cfg);
    const Criterion all[] = {Criterion::T, Criterion::D, Criterion::A, Criterion::E, Criterion::ETilde};
    CHECK(audit_bounds(r.rows, all).empty());
  }

  TEST_CASE("audit_bounds flags one inflated row") {
    ExperimentConfig cfg;
    cfg.scheme = WeightScheme::max_eig();
    cfg.stride = 10;
    RunResult r = incremental_run(random_loops(60, 2), cfg);
    REQUIRE(r.rows.size() > 2);
    r.rows[1].fim->d_opt = 2.0 * r.rows[1].lap.d_opt;
    const auto v = audit_bounds(r.rows, cfg.criteria);
    REQUIRE(v.size() == 1);
    CHECK(v[0].step == r.rows[1].step);
    CHECK(v[0].criterion == Criterion::D);
  }

  TEST_CASE("unit audit fails when information varies") {
    ExperimentConfig cfg;
    cfg.stride = 5;
    const RunResult r = incremental_run(random_loops(40, 1), cfg);
    CHECK_FALSE(audit_equivalence(r.rows, cfg.criteria).empty());
  }

  TEST_CASE("matched weights overlap on a constant prefix for their own order") {
    // First 30 edges share phi-bar; the rest carry random information.
    PoseGraph g(3);
    std::mt19937_64 rng(9);
    for (int i = 0; i < 60; ++i) g.add_vertex();
    for (int i = 1; i < 60; ++i)
      g.add_edge(Edge{VertexId{static_cast<std::size_t>(i - 1)}, VertexId{static_cast<std::size_t>(i)},
                      i <= 30 ? frh_phi() : random_spd(rng, 3), std::nullopt, false});
    // Trees keep T and D exact for any information, so the varying part needs loops.
    for (int i = 35; i < 60; i += 5)
      g.add_edge(Edge{VertexId{static_cast<std::size_t>(i - 5)}, VertexId{static_cast<std::size_t>(i)},
                      random_spd(rng, 3), std::nullopt, false});
    const std::pair<double, Criterion> orders[] = {{1.0, Criterion::T}, {0.0, Criterion::D},
                                                   {-1.0, Criterion::A},
                                                   {-std::numeric_limits<double>::infinity(), Criterion::E}};
    for (auto [p, crit] : orders) {
      ExperimentConfig cfg;
      cfg.scheme = WeightScheme::matched(p);
      cfg.criteria = {crit};
      const RunResult r = incremental_run(g, cfg);
      std::vector<ResultRow> prefix;
      std::vector<ResultRow> rest;
      for (const auto& row : r.rows) (row.m <= 30 ? prefix : rest).push_back(row);
      CHECK(max_relative_gap(prefix, crit) <= (crit == Criterion::E ? 1e-4 : 1e-9));
      // Trace is linear, so T agrees for any information.
      if (crit == Criterion::T)
        CHECK(max_relative_gap(rest, crit) <= 1e-9);
      else
        CHECK(max_relative_gap(rest, crit) > 1e-6);
    }
  }

  TEST_CASE("runs are deterministic apart from timing") {
    ExperimentConfig cfg;
    cfg.scheme = WeightScheme::max_eig();
    cfg.stride = 4;
    const PoseGraph g = random_loops(80, 4);
    CHECK(same_values(incremental_run(g, cfg).rows, incremental_run(g, cfg).rows));
  }

  TEST_CASE("timing sweep") {
    CHECK_THROWS_AS(timing_sweep({10, 20}, 3, 2), std::invalid_argument);
    CHECK_THROWS_AS(timing_sweep({20, 10}, 3, 3), std::invalid_argument);
    CHECK_THROWS_AS(timing_sweep({10}, 4, 3), std::invalid_argument);
    const BenchSummary single = timing_sweep({30}, 3, 3);
    CHECK(single.points.size() == 1);
    CHECK(single.monotone);
    const BenchSummary s = timing_sweep({2, 20, 80}, 3, 3);
    REQUIRE(s.points.size() == 3);
    CHECK(s.violation_count == 0);
    for (const auto& p : s.points) {
      CHECK(p.median_us_fim > 0);
      CHECK(p.median_us_lap > 0);
    }
    CHECK(s.points[2].speedup > 1.0);
  }
}
