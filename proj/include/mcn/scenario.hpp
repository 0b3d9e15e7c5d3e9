#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mcn/dynamics.hpp"
#include "mcn/geometry.hpp"
#include "mcn/optimizer.hpp"
#include "mcn/performance.hpp"
#include "mcn/structure.hpp"

namespace mcn {

/// Artifact version written into every manifest.
std::string artifact_version();

/// Lattice-driven constellation: (N_M, lattice, grid) resolved through prm_gen.
struct GeneratorSpec {
  int max_sats = 0;
  LatticeKind lattice = LatticeKind::L3;
  GridMode grid = GridMode::Plus;
  /// Pattern for the L2/L4 phase search; defaults to the first scenario motif.
  std::optional<SpanningPattern> pattern;
};

struct TrafficSpec {
  std::filesystem::path population;
  double cell_size_deg = 5.0;
  int demand_count = 500;
  /// Pre-generated demands; overrides the gravity model when set.
  std::optional<std::filesystem::path> demand_file;
  std::optional<double> min_elevation_deg;
  std::vector<int> loads{100, 200, 400, 800, 1600, 3200, 6400, 12800};
};

struct SweepSpec {
  std::vector<int> phase_factors;
  std::vector<double> queue_delays_ms{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  /// Routing epochs spread over one slot period T / M_P.
  int epochs = 4;
  RouteMetric metric = RouteMetric::ShortestDistance;
};

struct AvailabilitySpec {
  std::vector<ConnectionFeature> features;
  int replications = 5;
  bool export_trace = false;
};

struct OptimizerSpec {
  int max_iterations = 100;
  std::vector<LatticeKind> lattices{std::begin(kAllLattices), std::end(kAllLattices)};
  int merge_count = 1;
  int split_count = 1;
  /// Satellite budget for prm_gen; 0 means the base constellation size.
  int max_sats = 0;
  double horizon_periods = 1.0;
  int length_samples = 36;
  std::vector<Motif> baselines;
};

struct Scenario {
  std::string name;
  std::filesystem::path source;
  /// Resolved through prm_gen when a generator is configured.
  ConstellationConfig constellation;
  std::optional<GeneratorSpec> generator;
  std::vector<Motif> motifs;
  /// Structure used by single-structure experiments (throughput, per-demand results).
  Motif primary;
  double capacity_gbps = kDefaultIslCapacityGbps;
  AvailabilityModel dynamics;
  double horizon_periods = 2.0;
  TrafficSpec traffic;
  SweepSpec sweeps;
  AvailabilitySpec availability;
  OptimizerSpec optimizer;
  std::uint64_t seed = 1;

  /// Features whose ASR share one min-max scale: every candidate motif feature.
  std::vector<ConnectionFeature> normalization_features() const;
  int horizon_steps() const;
};

/// Parses YAML (or JSON) text; `base_dir` resolves relative file references.
Scenario parse_scenario(const std::string& text, const std::filesystem::path& base_dir,
                        const std::string& source_name = "<string>");
Scenario load_scenario(const std::filesystem::path& path);

/// Scenario with every default materialised, as stable JSON.
std::string scenario_json(const Scenario& s);
/// 16 hex digits; stable across runs and platforms.
std::string scenario_hash(const Scenario& s);

/// Bundled fixture by name, e.g. "reference-24x36".
std::filesystem::path fixture_path(const std::string& name);
/// Accepts a path or a bundled fixture name.
std::filesystem::path resolve_scenario(const std::string& name_or_path);

enum class Experiment {
  Availability,
  Capacity,
  StretchVsF,
  LengthStretchCorr,
  RttSweep,
  ThroughputLoad,
  Optimize,
  Pareto
};
std::string to_string(Experiment e);
Experiment parse_experiment(const std::string& text);
std::vector<Experiment> all_experiments();

struct OutputFile {
  std::string name;
  std::size_t rows = 0;  // data rows, header excluded; 0 for JSON
};

struct RunManifest {
  std::string scenario_hash;
  std::uint64_t seed = 0;
  std::string version;
  std::string experiment;
  std::vector<OutputFile> outputs;
  std::vector<std::string> warnings;
};

/// Runs one experiment into `out_dir` (created if needed) and writes manifest.json there.
RunManifest run_experiment(const Scenario& scenario, Experiment experiment,
                           const std::filesystem::path& out_dir);

struct FeatureAvailability {
  ConnectionFeature feature;
  int order = 0;
  std::size_t edges = 0;
  double mean_ra = 0.0;
  double mean_asr = 0.0;       // km^2/s
  double mean_asr_norm = 0.0;  // ASR*
};

/// Per-feature availability averaged over the scenario's replications. The ASR scale spans
/// the candidate features and the studied ones together.
std::vector<FeatureAvailability> feature_availability(const Scenario& s,
                                                      const std::vector<ConnectionFeature>& features);

/// Fits the fail coefficient so the mean R_a over `features` meets `target`, on the
/// candidate-feature ASR scale (extended only by requested features outside it).
CalibrationResult calibrate_availability(const Scenario& s,
                                         const std::vector<ConnectionFeature>& features,
                                         double target, double tolerance = 1e-3);

struct CapacityRow {
  std::string motif;
  GridMode grid = GridMode::Plus;
  std::size_t edges = 0;
  double mean_ra = 0.0;
  double all_up_gbps = 0.0;
  double mean_capacity_gbps = 0.0;
  double ratio = 0.0;
};
std::vector<CapacityRow> capacity_study(const Scenario& s);

struct StretchPoint {
  int phase_factor = 0;
  std::string motif;
  double mean_isl_length = 0.0;  // km, over the routing epochs
  double mean_stretch = 0.0;
  double median_stretch = 0.0;
  double fraction_within_1_5 = 0.0;
  double mean_hops = 0.0;
  double mean_prop_length = 0.0;  // km
  std::size_t paths = 0;
};

/// Demands of the scenario (file or gravity model), `count` overriding demand_count when > 0.
std::vector<TrafficDemand> scenario_demands(const Scenario& s, int count = 0);

/// Routes the demands on `graph` at the scenario's epochs (all links up).
StretchPoint stretch_study(const Scenario& s, const IslGraph& graph,
                           const std::vector<TrafficDemand>& demands);

struct RttPoint {
  std::string motif;
  double mean_isl_length = 0.0;
  double queue_delay_ms = 0.0;
  double mean_rtt_ms = 0.0;
  double mean_hops = 0.0;
};
std::vector<RttPoint> rtt_study(const Scenario& s);

struct LoadPoint {
  int load = 0;
  double carried_gbps = 0.0;
  double max_flow_gbps = 0.0;
  double capacity_gbps = 0.0;
  int local_demands = 0;
};
/// Throughput of the primary motif at each load, on the unreliable snapshot at t = 0.
std::vector<LoadPoint> throughput_study(const Scenario& s, std::vector<std::string>* warnings = nullptr);

DesignSpace design_space(const Scenario& s);
OptimizerConfig optimizer_config(const Scenario& s);

}  // namespace mcn
