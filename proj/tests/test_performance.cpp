#include <doctest.h>

#include <cmath>
#include <deque>
#include <filesystem>
#include <fstream>
#include <vector>

#include "mcn/performance.hpp"
#include "mcn/random.hpp"

using namespace mcn;

namespace {

ConstellationConfig reference() { return {24, 36, 0, deg_to_rad(53.0), 1000.0}; }

// Plain ring over one plane; used where geometry does not matter.
IslGraph ring(int m, double capacity_gbps) {
  const ConstellationConfig cfg(1, m, 0, deg_to_rad(53.0), 1000.0);
  std::vector<IslEdge> edges;
  for (int i = 0; i < m; ++i) edges.push_back({i, (i + 1) % m, {0, 1}});
  return IslGraph(cfg, edges, capacity_gbps);
}

std::vector<int> bfs_hops(const IslGraph& g, int src) {
  std::vector<int> dist(static_cast<std::size_t>(g.node_count()), -1);
  std::deque<int> q{src};
  dist[src] = 0;
  while (!q.empty()) {
    const int u = q.front();
    q.pop_front();
    for (const auto& e : g.edges()) {
      const int v = e.a == u ? e.b : e.b == u ? e.a : -1;
      if (v >= 0 && dist[v] < 0) {
        dist[v] = dist[u] + 1;
        q.push_back(v);
      }
    }
  }
  return dist;
}

}  // namespace

TEST_SUITE("performance") {
  TEST_CASE("capacity of all-up, all-down and half-up traces") {
    const auto g = build_topology(reference(), Motif::parse("(1,0)"));
    AvailabilityTrace trace(g.edge_count(), 20, 10.0);
    CHECK(capacity(g, trace, 0.0) == doctest::Approx(17280.0));
    CHECK(all_up_capacity(g) == doctest::Approx(17280.0));
    for (std::size_t e = 0; e < g.edge_count(); ++e)
      for (int k = 10; k < 20; ++k) trace.series(e)[k] = 0;
    CHECK(capacity(g, trace, 150.0) == 0.0);
    CHECK(mean_capacity(g, trace) == doctest::Approx(8640.0));
    for (std::size_t e = 0; e < g.edge_count(); e += 2) trace.series(e)[0] = 0;
    CHECK(capacity(g, trace, 0.0) == doctest::Approx(8640.0));
    CHECK_THROWS_AS(capacity(g, trace, 1e6), ValidationError);
  }

  TEST_CASE("gravity model skips empty cells") {
    PopulationGrid grid{{{{0.0, 0.0}, 9.0}, {{40.0, 100.0}, 1.0}, {{-40.0, -60.0}, 0.0}}, 5.0};
    const auto demands = gravity_demands(grid, 500, 10.0, 3);
    REQUIRE(demands.size() == 500);
    int cross = 0;
    for (const auto& d : demands) {
      CHECK(d.gbps > 0.0);
      CHECK(d.gbps <= 10.0);
      const bool src0 = std::abs(d.src.lat) <= 2.5 && std::abs(d.src.lon) <= 2.5;
      const bool src1 = std::abs(d.src.lat - 40.0) <= 2.5 && std::abs(d.src.lon - 100.0) <= 2.5;
      const bool dst0 = std::abs(d.dst.lat) <= 2.5 && std::abs(d.dst.lon) <= 2.5;
      const bool dst1 = std::abs(d.dst.lat - 40.0) <= 2.5 && std::abs(d.dst.lon - 100.0) <= 2.5;
      cross += (src0 && dst1) || (src1 && dst0);
    }
    CHECK(cross == 500);
  }

  TEST_CASE("gravity model rejects empty population and is seeded") {
    PopulationGrid zero{{{{0.0, 0.0}, 0.0}, {{10.0, 10.0}, 0.0}}, 5.0};
    CHECK_THROWS_AS(gravity_demands(zero, 10, 10.0, 1), ValidationError);
    PopulationGrid two{{{{0.0, 0.0}, 1.0}, {{10.0, 10.0}, 1.0}}, 5.0};
    const auto a = gravity_demands(two, 50, 10.0, 8), b = gravity_demands(two, 50, 10.0, 8);
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].gbps == b[i].gbps);
      CHECK(a[i].src.lat == b[i].src.lat);
    }
  }

  TEST_CASE("world grid demands stay within (0, c]") {
    const auto grid = load_population_csv(std::filesystem::path(MCN_DATA_DIR) / "world_population_5deg.csv");
    CHECK(grid.cells.size() > 100);
    const auto demands = gravity_demands(grid, 5000, 10.0, 1);
    CHECK(demands.size() == 5000);
    for (const auto& d : demands) {
      CHECK(d.gbps > 0.0);
      CHECK(d.gbps <= 10.0);
    }
  }

  TEST_CASE("demand CSV round trip") {
    PopulationGrid two{{{{0.0, 0.0}, 1.0}, {{10.0, 10.0}, 1.0}}, 5.0};
    const auto demands = gravity_demands(two, 20, 10.0, 4);
    const auto path = std::filesystem::temp_directory_path() / "mcn_demands_roundtrip.csv";
    write_demands_csv(path, demands);
    const auto back = read_demands_csv(path);
    REQUIRE(back.size() == demands.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
      CHECK(back[i].id == demands[i].id);
      CHECK(std::abs(back[i].gbps - demands[i].gbps) <= 5e-7);
      CHECK(std::abs(back[i].dst.lon - demands[i].dst.lon) <= 5e-7);
    }
    std::filesystem::remove(path);
  }

  TEST_CASE("route to self is empty") {
    const auto g = build_topology(reference(), Motif::parse("(1,-1)"));
    const NetworkSnapshot snap(g, 0.0);
    const auto r = route(snap, 17, 17, RouteMetric::ShortestDistance);
    CHECK(r.hop_count() == 0);
    CHECK(r.prop_length == 0.0);
    CHECK(r.hops == std::vector<int>{17});
  }

  TEST_CASE("ring tie goes through the smaller neighbour") {
    const auto g = ring(8, 10.0);
    const NetworkSnapshot snap(g, 0.0);
    const auto r = route(snap, 0, 4, RouteMetric::MinimumHop);
    CHECK(r.hop_count() == 4);
    CHECK(r.hops == std::vector<int>{0, 1, 2, 3, 4});
  }

  TEST_CASE("minimum hop matches BFS on a 4x4 torus") {
    const ConstellationConfig cfg(4, 4, 0, deg_to_rad(53.0), 1000.0);
    const auto g = build_topology(cfg, Motif::parse("(1,0)"));
    const NetworkSnapshot snap(g, 0.0);
    const int far = flat_index({2, 2}, cfg);
    CHECK(route(snap, 0, far, RouteMetric::MinimumHop).hop_count() == 4);
    for (int s = 0; s < cfg.size(); ++s) {
      const auto oracle = bfs_hops(g, s);
      for (int d = 0; d < cfg.size(); ++d)
        CHECK(route(snap, s, d, RouteMetric::MinimumHop).hop_count() == oracle[d]);
    }
  }

  TEST_CASE("down links make routes unreachable") {
    const auto g = ring(6, 10.0);
    AvailabilityTrace trace(g.edge_count(), 10, 10.0);
    trace.series(0)[0] = 0;
    trace.series(3)[0] = 0;
    const NetworkSnapshot snap(g, 0.0, trace);
    CHECK_THROWS_AS(route(snap, 0, 3, RouteMetric::MinimumHop), Unreachable);
    CHECK(route(snap, 1, 3, RouteMetric::MinimumHop).hop_count() == 2);
  }

  TEST_CASE("single edge stretch is about one") {
    const auto cfg = reference();
    const auto g = build_topology(cfg, Motif::parse("(1,0)"));
    const NetworkSnapshot snap(g, 0.0);
    const auto r = route(snap, 0, 1, RouteMetric::ShortestDistance);
    REQUIRE(r.hop_count() == 1);
    // Oracle: chord over arc for adjacent slots, 10 degrees apart.
    const double angle = 2 * kPi / 36;
    const double want = 2 * std::sin(angle / 2) / angle;
    CHECK(path_stretch(r) == doctest::Approx(want).epsilon(1e-9));
    CHECK(std::abs(path_stretch(r) - 1.0) < 0.02);
    CHECK_THROWS_AS(path_stretch(PathRecord{}), ValidationError);
  }

  TEST_CASE("RTT arithmetic") {
    PathRecord r;
    r.edges.assign(10, 0);
    r.prop_length = 0.020 * kLightSpeedKmS;
    CHECK(rtt_ms(r, 5.0) == doctest::Approx(140.0));
    CHECK(rtt_ms(r, 0.0) == doctest::Approx(40.0));
  }

  TEST_CASE("SDP and MHP trade length for hops") {
    const auto g = build_topology(reference(), Motif::parse("(1,0)+(1,-1)"));
    const NetworkSnapshot snap(g, 321.0);
    Rng rng(17);
    for (int i = 0; i < 60; ++i) {
      const int s = static_cast<int>(rng.uniform() * g.node_count());
      const int d = static_cast<int>(rng.uniform() * g.node_count());
      const auto sdp = route(snap, s, d, RouteMetric::ShortestDistance);
      const auto mhp = route(snap, s, d, RouteMetric::MinimumHop);
      CHECK(sdp.prop_length <= mhp.prop_length + 1e-6);
      CHECK(mhp.hop_count() <= sdp.hop_count());
      if (s != d) CHECK(path_stretch(sdp) >= 0.99);
    }
  }

  TEST_CASE("doubling back increases stretch") {
    const auto g = build_topology(reference(), Motif::parse("(1,0)"));
    const NetworkSnapshot snap(g, 0.0);
    const auto direct = route(snap, 0, 2, RouteMetric::ShortestDistance);
    PathRecord detour = direct;
    detour.prop_length += 2 * snap.edge_length(static_cast<std::size_t>(direct.edges.front()));
    CHECK(path_stretch(detour) > path_stretch(direct));
  }

  TEST_CASE("nearest satellite attachment") {
    const auto g = build_topology(reference(), Motif::parse("(1,0)"));
    const NetworkSnapshot snap(g, 100.0);
    for (GeoPoint p : {GeoPoint{0, 0}, GeoPoint{35, 139}, GeoPoint{-33, 151}, GeoPoint{51, 0}}) {
      const auto got = snap.attach(p);
      REQUIRE(got.has_value());
      const auto ground = ground_point_inertial(p.lat, p.lon, 100.0);
      int best = 0;
      for (int s = 1; s < g.node_count(); ++s)
        if ((snap.position(s) - ground).norm() < (snap.position(best) - ground).norm()) best = s;
      CHECK(*got == best);
    }
    // No satellite of a 53 degree shell is visible from the pole at a 60 degree mask.
    CHECK_FALSE(snap.attach({90, 0}, 60.0).has_value());
  }

  TEST_CASE("throughput of a single demand") {
    const auto g = ring(6, 10.0);
    const NetworkSnapshot snap(g, 0.0);
    const std::vector<AttachedDemand> d{{0, 0, 3, 7.5}};
    const auto r = throughput(snap, d);
    CHECK(r.carried == doctest::Approx(7.5));
    CHECK(r.max_flow_bound == doctest::Approx(7.5));
  }

  TEST_CASE("shared bottleneck saturates") {
    const ConstellationConfig cfg(1, 3, 0, deg_to_rad(53.0), 1000.0);
    const IslGraph line(cfg, {{0, 1, {0, 1}}, {1, 2, {0, 1}}}, 10.0);
    const NetworkSnapshot snap(line, 0.0);
    const std::vector<AttachedDemand> d{{0, 0, 2, 8.0}, {1, 0, 2, 8.0}};
    const auto r = throughput(snap, d);
    CHECK(r.carried == doctest::Approx(10.0));
    CHECK(r.carried_per_demand[0] == doctest::Approx(8.0));
    CHECK(r.carried_per_demand[1] == doctest::Approx(2.0));
    CHECK(r.max_flow_bound == doctest::Approx(10.0));
  }

  TEST_CASE("four-cycle antipodal demands reach the bound") {
    const auto g = ring(4, 1.0);
    const NetworkSnapshot snap(g, 0.0);
    const std::vector<AttachedDemand> d{{0, 0, 2, 1.0}, {1, 2, 0, 1.0}};
    const auto r = throughput(snap, d);
    CHECK(r.carried == doctest::Approx(2.0));
    CHECK(r.max_flow_bound == doctest::Approx(2.0));
  }

  TEST_CASE("local demands never use links") {
    const auto g = ring(4, 1.0);
    const NetworkSnapshot snap(g, 0.0);
    const std::vector<AttachedDemand> d{{0, 1, 1, 5.0}};
    const auto r = throughput(snap, d);
    CHECK(r.carried == 0.0);
    CHECK(r.local_demands == 1);
  }

  TEST_CASE("throughput bounded and monotone in load") {
    const auto cfg = reference();
    const auto g = build_topology(cfg, Motif::parse("(1,-1)"));
    const NetworkSnapshot snap(g, 0.0);
    Rng rng(99);
    std::vector<AttachedDemand> all;
    for (int i = 0; i < 3000; ++i)
      all.push_back({i, static_cast<int>(rng.uniform() * 864), static_cast<int>(rng.uniform() * 864),
                     rng.uniform_open_closed() * 10.0});
    double prev = 0.0;
    for (std::size_t n : {100u, 400u, 1600u, 3000u}) {
      const auto r = throughput(snap, std::span(all).first(n));
      CHECK(r.carried >= prev - 1e-6);
      CHECK(r.carried <= r.max_flow_bound + 1e-6);
      CHECK(r.carried <= r.capacity + 1e-6);
      prev = r.carried;
    }
  }

  TEST_CASE("pearson correlation") {
    const std::vector<double> x{1, 2, 3, 4, 5};
    const std::vector<double> y{2, 4, 6, 8, 10};
    const std::vector<double> z{5, 4, 3, 2, 1};
    const std::vector<double> w{1, 3, 2, 5, 4};
    CHECK(pearson(x, y) == doctest::Approx(1.0));
    CHECK(pearson(x, z) == doctest::Approx(-1.0));
    CHECK(pearson(x, w) == doctest::Approx(0.8));
    CHECK_THROWS_AS(pearson(std::span(x).first(1), std::span(y).first(1)), ValidationError);
  }

  TEST_CASE("period mean edge length of coplanar links is the chord") {
    const ConstellationConfig cfg(1, 12, 0, deg_to_rad(53.0), 1000.0);
    std::vector<IslEdge> edges;
    for (int i = 0; i < 12; ++i) edges.push_back({i, (i + 1) % 12, {0, 1}});
    const IslGraph g(cfg, edges, 10.0);
    const double chord = 2 * cfg.orbit_radius() * std::sin(kPi / 12);
    CHECK(period_mean_edge_length(g, 12) == doctest::Approx(chord).epsilon(1e-9));
  }
}
