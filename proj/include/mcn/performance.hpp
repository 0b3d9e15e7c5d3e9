#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mcn/dynamics.hpp"
#include "mcn/geometry.hpp"
#include "mcn/structure.hpp"

namespace mcn {

struct GeoPoint {
  double lat = 0.0;  // deg
  double lon = 0.0;  // deg
};

struct PopulationCell {
  GeoPoint center;
  double population = 0.0;
};

struct PopulationGrid {
  std::vector<PopulationCell> cells;
  /// Cell edge in degrees; demand endpoints are jittered uniformly inside the cell.
  double cell_size_deg = 5.0;
};

/// CSV with header `lat,lon,population`.
PopulationGrid load_population_csv(const std::filesystem::path& path, double cell_size_deg = 5.0);

struct TrafficDemand {
  int id = 0;
  GeoPoint src;
  GeoPoint dst;
  double gbps = 0.0;
};

/// Gravity-model demands: pair (i, j), i != j, drawn with probability proportional to p_i * p_j;
/// bandwidth uniform on (0, capacity].
std::vector<TrafficDemand> gravity_demands(const PopulationGrid& grid, int count,
                                           double capacity_gbps, std::uint64_t seed);

void write_demands_csv(const std::filesystem::path& path, std::span<const TrafficDemand> demands);
std::vector<TrafficDemand> read_demands_csv(const std::filesystem::path& path);

/// Satellite positions, edge lengths and link states of a graph at one epoch.
class NetworkSnapshot {
 public:
  NetworkSnapshot(const IslGraph& graph, double t);
  NetworkSnapshot(const IslGraph& graph, double t, const AvailabilityTrace& trace);

  const IslGraph& graph() const { return *graph_; }
  double epoch() const { return t_; }
  const Vec3& position(int sat) const { return positions_[sat]; }
  double edge_length(std::size_t e) const { return lengths_[e]; }
  bool edge_up(std::size_t e) const { return up_[e] != 0; }
  double mean_edge_length() const;
  /// Sum of capacities of up edges, Gbps.
  double capacity() const;

  /// Nearest satellite to a ground point; with a mask, only satellites at or above
  /// `min_elevation_deg` qualify.
  std::optional<int> attach(const GeoPoint& p, std::optional<double> min_elevation_deg = {}) const;

 private:
  const IslGraph* graph_;
  double t_;
  std::vector<Vec3> positions_;
  std::vector<double> lengths_;
  std::vector<std::uint8_t> up_;
};

enum class RouteMetric { ShortestDistance, MinimumHop };
std::string to_string(RouteMetric m);

struct PathRecord {
  std::vector<int> hops;   // satellites, source first
  std::vector<int> edges;  // graph edge indices along the path
  double prop_length = 0.0;
  double geo_length = 0.0;
  int hop_count() const { return static_cast<int>(edges.size()); }
};

class Unreachable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shortest path over up edges. Equal-cost ties prefer the smaller predecessor index.
PathRecord route(const NetworkSnapshot& snap, int src, int dst, RouteMetric metric);

/// Same, restricted to edges whose `usable` entry is nonzero.
PathRecord route(const NetworkSnapshot& snap, int src, int dst, RouteMetric metric,
                 std::span<const std::uint8_t> usable);

/// Propagation length over great-circle length between the endpoint satellites.
double path_stretch(const PathRecord& record);

/// Round-trip time in ms with a fixed per-hop queuing delay.
double rtt_ms(const PathRecord& record, double queue_delay_per_hop_ms);

double capacity(const IslGraph& graph, const AvailabilityTrace& trace, double t);
double all_up_capacity(const IslGraph& graph);
/// Capacity averaged over every trace sample.
double mean_capacity(const IslGraph& graph, const AvailabilityTrace& trace);

/// Edge length averaged over `samples` epochs evenly spread across one orbital period.
double period_mean_edge_length(const IslGraph& graph, int samples = 36);

struct AttachedDemand {
  int id = 0;
  int src = 0;
  int dst = 0;
  double gbps = 0.0;
};

std::vector<AttachedDemand> attach_demands(const NetworkSnapshot& snap,
                                           std::span<const TrafficDemand> demands,
                                           std::optional<double> min_elevation_deg = {});

struct ThroughputResult {
  double carried = 0.0;
  double max_flow_bound = 0.0;
  double capacity = 0.0;
  std::vector<double> carried_per_demand;
  int local_demands = 0;  // endpoints on the same satellite; they never touch an ISL
};

/// Greedy allocation in demand order: each demand takes the shortest path over edges with
/// residual capacity and carries min(demand, bottleneck). Also reports the super-source /
/// super-sink max-flow bound on the same up edges.
ThroughputResult throughput(const NetworkSnapshot& snap, std::span<const AttachedDemand> demands);

/// Max flow on the undirected up-edge network from a set of weighted sources to sinks.
double max_flow_bound(const NetworkSnapshot& snap, std::span<const AttachedDemand> demands);

double pearson(std::span<const double> x, std::span<const double> y);

}  // namespace mcn
