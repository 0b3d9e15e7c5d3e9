#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>

#include <fmt/format.h>
#include <json.hpp>

#include "mcn/random.hpp"
#include "mcn/scenario.hpp"

namespace mcn {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

class CsvFile {
 public:
  CsvFile(const fs::path& dir, std::string name, const std::string& header)
      : name_(std::move(name)), out_(dir / name_) {
    if (!out_) throw std::runtime_error("cannot write " + (dir / name_).string());
    out_ << header << '\n';
  }
  template <typename... Args>
  void row(fmt::format_string<Args...> f, Args&&... args) {
    out_ << fmt::format(f, std::forward<Args>(args)...) << '\n';
    ++rows_;
  }
  OutputFile close() {
    out_.close();
    return {name_, rows_};
  }

 private:
  std::string name_;
  std::ofstream out_;
  std::size_t rows_ = 0;
};

OutputFile write_json(const fs::path& dir, const std::string& name, const json& j) {
  std::ofstream out(dir / name);
  if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
  out << j.dump(2) << '\n';
  return {name, 0};
}

std::string quoted(const std::string& s) { return "\"" + s + "\""; }

// Walker shells put satellites of different planes on the same point at orbit crossings;
// stretch between such endpoints is meaningless, so they are treated like local demands.
constexpr double kColocatedKm = 1.0;

bool colocated(const NetworkSnapshot& snap, int a, int b) {
  return a == b || (snap.position(a) - snap.position(b)).norm() < kColocatedKm;
}

std::vector<double> routing_epochs(const Scenario& s, const ConstellationConfig& cfg) {
  // A shift of one slot period maps the constellation onto itself.
  const double slot = cfg.period() / cfg.sats_per_plane();
  std::vector<double> out;
  for (int k = 0; k < s.sweeps.epochs; ++k) out.push_back(slot * k / s.sweeps.epochs);
  return out;
}

AsrField scenario_field(const Scenario& s) {
  const auto feats = s.normalization_features();
  return AsrField(s.constellation, feats, s.dynamics.step, s.horizon_steps());
}

AvailabilityModel model_with_seed(const Scenario& s, std::uint64_t seed) {
  auto m = s.dynamics;
  m.seed = seed;
  return m;
}

double horizon_seconds(const Scenario& s) { return s.horizon_steps() * s.dynamics.step; }

struct RoutedPaths {
  std::vector<PathRecord> paths;
  std::vector<int> demand_ids;
  double mean_isl_length = 0.0;
};

RoutedPaths route_demands(const Scenario& s, const IslGraph& graph,
                          const std::vector<TrafficDemand>& demands) {
  RoutedPaths out;
  const auto epochs = routing_epochs(s, graph.config());
  for (double t : epochs) {
    NetworkSnapshot snap(graph, t);
    out.mean_isl_length += snap.mean_edge_length() / static_cast<double>(epochs.size());
    const auto attached = attach_demands(snap, demands, s.traffic.min_elevation_deg);
    for (const auto& d : attached) {
      if (colocated(snap, d.src, d.dst)) continue;
      try {
        out.paths.push_back(route(snap, d.src, d.dst, s.sweeps.metric));
        out.demand_ids.push_back(d.id);
      } catch (const Unreachable&) {
        throw Infeasible(fmt::format("ISL graph is disconnected: demand {} cannot be routed", d.id));
      }
    }
  }
  return out;
}

StretchPoint summarise(const RoutedPaths& r) {
  StretchPoint p;
  p.mean_isl_length = r.mean_isl_length;
  p.paths = r.paths.size();
  if (r.paths.empty()) return p;
  std::size_t within = 0;
  std::vector<double> lambdas;
  for (const auto& path : r.paths) {
    const double lambda = path_stretch(path);
    lambdas.push_back(lambda);
    p.mean_stretch += lambda;
    p.mean_hops += path.hop_count();
    p.mean_prop_length += path.prop_length;
    if (lambda <= 1.5) ++within;
  }
  const double n = static_cast<double>(r.paths.size());
  p.mean_stretch /= n;
  p.mean_hops /= n;
  p.mean_prop_length /= n;
  p.fraction_within_1_5 = static_cast<double>(within) / n;
  const auto mid = lambdas.begin() + static_cast<long>(lambdas.size() / 2);
  std::nth_element(lambdas.begin(), mid, lambdas.end());
  p.median_stretch = *mid;
  if (lambdas.size() % 2 == 0) p.median_stretch = 0.5 * (*mid + *std::max_element(lambdas.begin(), mid));
  return p;
}

std::vector<StretchPoint> stretch_sweep(const Scenario& s, const std::vector<TrafficDemand>& demands) {
  if (s.sweeps.phase_factors.empty()) throw ValidationError("sweeps.phase_factors: empty sweep");
  std::vector<StretchPoint> out;
  for (int f : s.sweeps.phase_factors) {
    const auto cfg = s.constellation.with_phase_factor(f);
    for (const auto& m : s.motifs) {
      const auto graph = build_topology(cfg, m, s.capacity_gbps);
      auto p = stretch_study(s, graph, demands);
      p.phase_factor = f;
      p.motif = m.to_string();
      out.push_back(p);
    }
  }
  return out;
}

struct FeatureSim {
  ConnectionFeature feature;
  IslGraph graph;
};

double feature_mean_ra(const Scenario& s, const AsrField& field, const FeatureSim& fs,
                       double alpha, std::vector<double>* per_edge = nullptr) {
  double sum = 0.0;
  if (per_edge) per_edge->assign(fs.graph.edge_count(), 0.0);
  for (int r = 0; r < s.availability.replications; ++r) {
    auto model = model_with_seed(s, derive_seed(s.seed, fmt::format("availability/{}", r)));
    model.fail_coefficient = alpha;
    const auto trace = simulate_availability(fs.graph, field, field.range(), model, horizon_seconds(s));
    sum += mean_availability(trace);
    if (per_edge)
      for (std::size_t e = 0; e < fs.graph.edge_count(); ++e)
        (*per_edge)[e] += availability_ratio(trace, e) / s.availability.replications;
  }
  return sum / s.availability.replications;
}

AsrField field_with(const Scenario& s, const std::vector<ConnectionFeature>& extra) {
  auto feats = s.normalization_features();
  for (const auto& f : extra)
    if (std::find(feats.begin(), feats.end(), f) == feats.end()) feats.push_back(f);
  std::sort(feats.begin(), feats.end());
  return AsrField(s.constellation, feats, s.dynamics.step, s.horizon_steps());
}

std::vector<FeatureSim> feature_sims(const Scenario& s, const std::vector<ConnectionFeature>& features) {
  std::vector<FeatureSim> out;
  for (const auto& f : features) out.push_back({f, feature_topology(s.constellation, f, s.capacity_gbps)});
  return out;
}

// Structure-level metrics shared by the optimize experiment's comparison table.
struct StructureMetrics {
  std::string label;
  CandidateStructure structure;
  double mean_isl_length = 0.0;
  double mean_ra = 0.0;
  double mean_capacity = 0.0;
  double all_up_capacity = 0.0;
  StretchPoint stretch;
  std::vector<double> rtt;  // per queue delay
  double throughput = 0.0;
};

StructureMetrics structure_metrics(const Scenario& s, const std::string& label,
                                   const CandidateStructure& c, const AsrNormalizer& norm,
                                   const std::vector<TrafficDemand>& demands) {
  StructureMetrics m{label, c};
  const auto graph = build_topology(c.config, c.motif, s.capacity_gbps);
  m.mean_isl_length = period_mean_edge_length(graph, s.optimizer.length_samples);
  const int steps = static_cast<int>(std::floor(s.horizon_periods * c.config.period() / s.dynamics.step + 1e-9));
  AsrField field(c.config, c.motif.pattern().all_features(), s.dynamics.step, steps);
  const auto model = model_with_seed(s, derive_seed(s.seed, "compare/" + c.encoding()));
  const auto trace = simulate_availability(graph, field, norm, model, steps * s.dynamics.step);
  m.mean_ra = mean_availability(trace);
  m.mean_capacity = mean_capacity(graph, trace);
  m.all_up_capacity = all_up_capacity(graph);

  const auto routed = route_demands(s, graph, demands);
  m.stretch = summarise(routed);
  for (double d : s.sweeps.queue_delays_ms) {
    double sum = 0.0;
    for (const auto& p : routed.paths) sum += rtt_ms(p, d);
    m.rtt.push_back(routed.paths.empty() ? 0.0 : sum / routed.paths.size());
  }
  NetworkSnapshot snap(graph, 0.0, trace);
  const auto attached = attach_demands(snap, demands, s.traffic.min_elevation_deg);
  m.throughput = throughput(snap, attached).carried;
  return m;
}

double pct(double now, double before) { return before == 0.0 ? 0.0 : 100.0 * (now - before) / before; }

}  // namespace

std::string to_string(Experiment e) {
  switch (e) {
    case Experiment::Availability: return "availability";
    case Experiment::Capacity: return "capacity";
    case Experiment::StretchVsF: return "stretch_vs_F";
    case Experiment::LengthStretchCorr: return "length_stretch_corr";
    case Experiment::RttSweep: return "rtt_sweep";
    case Experiment::ThroughputLoad: return "throughput_load";
    case Experiment::Optimize: return "optimize";
    case Experiment::Pareto: return "pareto";
  }
  return "unknown";
}

std::vector<Experiment> all_experiments() {
  return {Experiment::Availability, Experiment::Capacity,       Experiment::StretchVsF,
          Experiment::LengthStretchCorr, Experiment::RttSweep, Experiment::ThroughputLoad,
          Experiment::Optimize,     Experiment::Pareto};
}

Experiment parse_experiment(const std::string& text) {
  for (auto e : all_experiments())
    if (to_string(e) == text) return e;
  std::string names;
  for (auto e : all_experiments()) names += (names.empty() ? "" : ", ") + to_string(e);
  throw ValidationError("unknown experiment '" + text + "' (expected one of " + names + ")");
}

std::vector<FeatureAvailability> feature_availability(const Scenario& s,
                                                      const std::vector<ConnectionFeature>& features) {
  const auto field = field_with(s, features);
  const auto norm = field.range();
  std::vector<FeatureAvailability> out;
  for (const auto& sim : feature_sims(s, features)) {
    FeatureAvailability fa;
    fa.feature = sim.feature;
    fa.order = feature_order(sim.feature);
    fa.edges = sim.graph.edge_count();
    fa.mean_ra = feature_mean_ra(s, field, sim, s.dynamics.fail_coefficient);
    double raw = 0.0, scaled = 0.0;
    std::size_t n = 0;
    for (int a = 0; a < s.constellation.size(); ++a)
      for (float v : field.samples(sim.feature, a)) {
        raw += v;
        scaled += norm(v);
        ++n;
      }
    fa.mean_asr = raw / n;
    fa.mean_asr_norm = scaled / n;
    out.push_back(fa);
  }
  return out;
}

CalibrationResult calibrate_availability(const Scenario& s,
                                         const std::vector<ConnectionFeature>& features,
                                         double target, double tolerance) {
  if (features.empty()) throw ValidationError("calibration needs at least one feature");
  const auto field = field_with(s, features);
  const auto sims = feature_sims(s, features);
  return calibrate_fail_coefficient(
      target,
      [&](double alpha) {
        double sum = 0.0;
        for (const auto& sim : sims) sum += feature_mean_ra(s, field, sim, alpha);
        return sum / sims.size();
      },
      tolerance);
}

std::vector<CapacityRow> capacity_study(const Scenario& s) {
  const auto field = scenario_field(s);
  std::vector<CapacityRow> out;
  for (const auto& m : s.motifs) {
    const auto graph = build_topology(s.constellation, m, s.capacity_gbps);
    const auto model = model_with_seed(s, derive_seed(s.seed, "capacity/" + m.to_string()));
    const auto trace = simulate_availability(graph, field, field.range(), model, horizon_seconds(s));
    CapacityRow row;
    row.motif = m.to_string();
    row.grid = m.grid_mode();
    row.edges = graph.edge_count();
    row.mean_ra = mean_availability(trace);
    row.all_up_gbps = all_up_capacity(graph);
    row.mean_capacity_gbps = mean_capacity(graph, trace);
    row.ratio = row.mean_capacity_gbps / row.all_up_gbps;
    out.push_back(row);
  }
  return out;
}

std::vector<TrafficDemand> scenario_demands(const Scenario& s, int count) {
  const int n = count > 0 ? count : s.traffic.demand_count;
  if (s.traffic.demand_file) {
    auto all = read_demands_csv(*s.traffic.demand_file);
    if (static_cast<int>(all.size()) > n) all.resize(static_cast<std::size_t>(n));
    return all;
  }
  if (n == 0) return {};
  const auto grid = load_population_csv(s.traffic.population, s.traffic.cell_size_deg);
  return gravity_demands(grid, n, s.capacity_gbps, derive_seed(s.seed, "demands"));
}

StretchPoint stretch_study(const Scenario& s, const IslGraph& graph,
                           const std::vector<TrafficDemand>& demands) {
  return summarise(route_demands(s, graph, demands));
}

std::vector<RttPoint> rtt_study(const Scenario& s) {
  if (s.sweeps.queue_delays_ms.empty()) throw ValidationError("sweeps.queue_delays_ms: empty sweep");
  const auto demands = scenario_demands(s);
  std::vector<RttPoint> out;
  for (const auto& m : s.motifs) {
    const auto graph = build_topology(s.constellation, m, s.capacity_gbps);
    const auto routed = route_demands(s, graph, demands);
    const auto summary = summarise(routed);
    for (double d : s.sweeps.queue_delays_ms) {
      double sum = 0.0;
      for (const auto& p : routed.paths) sum += rtt_ms(p, d);
      out.push_back({m.to_string(), routed.mean_isl_length, d,
                     routed.paths.empty() ? 0.0 : sum / routed.paths.size(), summary.mean_hops});
    }
  }
  return out;
}

std::vector<LoadPoint> throughput_study(const Scenario& s, std::vector<std::string>* warnings) {
  if (s.traffic.loads.empty()) throw ValidationError("traffic.loads: empty sweep");
  const int max_load = s.traffic.loads.back();
  const auto demands = scenario_demands(s, std::max(max_load, 1));
  if (demands.empty() && warnings) warnings->push_back("no demands available; throughput is 0");
  if (static_cast<int>(demands.size()) < max_load && warnings)
    warnings->push_back(fmt::format("only {} demands available; larger loads are truncated", demands.size()));

  const auto graph = build_topology(s.constellation, s.primary, s.capacity_gbps);
  const auto field = scenario_field(s);
  const auto model = model_with_seed(s, derive_seed(s.seed, "throughput/availability"));
  const auto trace = simulate_availability(graph, field, field.range(), model, horizon_seconds(s));
  NetworkSnapshot snap(graph, 0.0, trace);
  const auto attached = attach_demands(snap, demands, s.traffic.min_elevation_deg);

  std::vector<LoadPoint> out;
  for (int load : s.traffic.loads) {
    const auto n = std::min(static_cast<std::size_t>(load), attached.size());
    const std::span<const AttachedDemand> prefix(attached.data(), n);
    const auto r = throughput(snap, prefix);
    out.push_back({load, r.carried, r.max_flow_bound, r.capacity, r.local_demands});
  }
  return out;
}

DesignSpace design_space(const Scenario& s) {
  DesignSpace d{s.constellation, s.optimizer.max_sats, s.motifs};
  d.lattices = s.optimizer.lattices;
  d.dynamics = model_with_seed(s, derive_seed(s.seed, "objective"));
  d.horizon_periods = s.optimizer.horizon_periods;
  d.length_samples = s.optimizer.length_samples;
  d.capacity_gbps = s.capacity_gbps;
  return d;
}

OptimizerConfig optimizer_config(const Scenario& s) {
  OptimizerConfig c;
  c.max_iterations = s.optimizer.max_iterations;
  c.lattices = s.optimizer.lattices;
  c.merge_count = s.optimizer.merge_count;
  c.split_count = s.optimizer.split_count;
  c.seed = s.seed;
  return c;
}

RunManifest run_experiment(const Scenario& s, Experiment experiment, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  RunManifest man{scenario_hash(s), s.seed, artifact_version(), to_string(experiment), {}, {}};
  const auto& cfg = s.constellation;

  switch (experiment) {
    case Experiment::Availability: {
      const auto& feats = s.availability.features;
      const auto field = field_with(s, feats);
      const auto norm = field.range();
      const auto sims = feature_sims(s, feats);
      CsvFile table(out_dir, "availability_features.csv",
                    "feature,order,edges,mean_R_a,mean_ASR_km2_s,mean_ASR_norm");
      CsvFile summary(out_dir, "availability_summary.csv", "edge_id,feature,R_a,mean_ASR");
      std::optional<CsvFile> trace_csv;
      if (s.availability.export_trace) trace_csv.emplace(out_dir, "availability_trace.csv", "edge_id,t,Y");
      std::size_t edge_id = 0;
      for (const auto& sim : sims) {
        for (const auto& w : sim.graph.warnings()) man.warnings.push_back(w);
        std::vector<double> per_edge;
        const double ra = feature_mean_ra(s, field, sim, s.dynamics.fail_coefficient, &per_edge);
        double raw_total = 0.0, scaled_total = 0.0;
        std::size_t n_total = 0;
        std::optional<AvailabilityTrace> first;
        if (trace_csv)
          first = simulate_availability(
              sim.graph, field, norm,
              model_with_seed(s, derive_seed(s.seed, "availability/0")), horizon_seconds(s));
        for (std::size_t e = 0; e < sim.graph.edge_count(); ++e) {
          const auto samples = field.samples(sim.feature, sim.graph.edge(e).a);
          double raw = 0.0;
          for (float v : samples) {
            raw += v;
            scaled_total += norm(v);
          }
          raw_total += raw;
          n_total += samples.size();
          summary.row("{},{},{:.6f},{:.6f}", edge_id + e, quoted(to_string(sim.feature)), per_edge[e],
                      raw / samples.size());
          if (first)
            for (int k = 0; k < first->steps(); ++k)
              trace_csv->row("{},{:.1f},{}", edge_id + e, k * s.dynamics.step, first->up(e, k) ? 1 : 0);
        }
        edge_id += sim.graph.edge_count();
        table.row("{},{},{},{:.6f},{:.6f},{:.6f}", quoted(to_string(sim.feature)), feature_order(sim.feature),
                  sim.graph.edge_count(), ra, raw_total / n_total, scaled_total / n_total);
      }
      man.outputs.push_back(table.close());
      man.outputs.push_back(summary.close());
      if (trace_csv) man.outputs.push_back(trace_csv->close());
      break;
    }
    case Experiment::Capacity: {
      const auto rows = capacity_study(s);
      CsvFile csv(out_dir, "capacity.csv",
                  "motif,grid,edges,mean_R_a,all_up_gbps,mean_capacity_gbps,ratio");
      for (const auto& r : rows)
        csv.row("{},{},{},{:.6f},{:.3f},{:.3f},{:.6f}", quoted(r.motif), to_string(r.grid), r.edges,
                r.mean_ra, r.all_up_gbps, r.mean_capacity_gbps, r.ratio);
      man.outputs.push_back(csv.close());
      break;
    }
    case Experiment::StretchVsF:
    case Experiment::LengthStretchCorr: {
      const auto demands = scenario_demands(s);
      const auto points = stretch_sweep(s, demands);
      CsvFile csv(out_dir, "stretch_vs_F.csv",
                  "F,motif,mean_isl_length_km,mean_stretch,median_stretch,frac_stretch_le_1_5,mean_hops,paths");
      for (const auto& p : points)
        csv.row("{},{},{:.3f},{:.6f},{:.6f},{:.6f},{:.4f},{}", p.phase_factor, quoted(p.motif),
                p.mean_isl_length, p.mean_stretch, p.median_stretch, p.fraction_within_1_5, p.mean_hops,
                p.paths);
      man.outputs.push_back(csv.close());
      if (experiment == Experiment::LengthStretchCorr) {
        CsvFile corr(out_dir, "length_stretch_corr.csv",
                     "motif,pearson,pearson_median_stretch,points,length_range_km");
        for (const auto& m : s.motifs) {
          std::vector<double> len, str, med;
          for (const auto& p : points)
            if (p.motif == m.to_string()) {
              len.push_back(p.mean_isl_length);
              str.push_back(p.mean_stretch);
              med.push_back(p.median_stretch);
            }
          const double r = len.size() >= 2 ? pearson(len, str) : 0.0;
          const double r_med = len.size() >= 2 ? pearson(len, med) : 0.0;
          const auto [lo, hi] = std::minmax_element(len.begin(), len.end());
          corr.row("{},{:.6f},{:.6f},{},{:.3f}", quoted(m.to_string()), r, r_med, len.size(), *hi - *lo);
        }
        man.outputs.push_back(corr.close());
      }
      break;
    }
    case Experiment::RttSweep: {
      const auto points = rtt_study(s);
      CsvFile csv(out_dir, "rtt_sweep.csv", "motif,mean_isl_length_km,queue_delay_ms,mean_rtt_ms,mean_hops");
      for (const auto& p : points)
        csv.row("{},{:.3f},{:.3f},{:.6f},{:.4f}", quoted(p.motif), p.mean_isl_length, p.queue_delay_ms,
                p.mean_rtt_ms, p.mean_hops);
      man.outputs.push_back(csv.close());
      break;
    }
    case Experiment::ThroughputLoad: {
      const auto points = throughput_study(s, &man.warnings);
      CsvFile csv(out_dir, "throughput_load.csv",
                  "load,carried_gbps,max_flow_bound_gbps,capacity_gbps,local_demands");
      for (const auto& p : points)
        csv.row("{},{:.6f},{:.6f},{:.3f},{}", p.load, p.carried_gbps, p.max_flow_gbps, p.capacity_gbps,
                p.local_demands);
      man.outputs.push_back(csv.close());

      // Per-demand records for the scenario's demand count on the primary structure.
      const auto demands = scenario_demands(s);
      write_demands_csv(out_dir / "demands.csv", demands);
      man.outputs.push_back({"demands.csv", demands.size()});
      const auto graph = build_topology(cfg, s.primary, s.capacity_gbps);
      const auto field = scenario_field(s);
      const auto trace = simulate_availability(
          graph, field, field.range(), model_with_seed(s, derive_seed(s.seed, "throughput/availability")),
          horizon_seconds(s));
      NetworkSnapshot snap(graph, 0.0, trace);
      const auto attached = attach_demands(snap, demands, s.traffic.min_elevation_deg);
      const auto tp = throughput(snap, attached);
      const double d = s.sweeps.queue_delays_ms.empty() ? 0.0 : s.sweeps.queue_delays_ms.front();
      CsvFile res(out_dir, "results.csv", "demand_id,hops,L_prop_km,L_geo_km,stretch,rtt_ms,carried_gbps");
      for (std::size_t i = 0; i < attached.size(); ++i) {
        const auto& a = attached[i];
        if (colocated(snap, a.src, a.dst)) {
          res.row("{},0,0.000,0.000,,0.000,{:.6f}", a.id, tp.carried_per_demand[i]);
          continue;
        }
        try {
          const auto p = route(snap, a.src, a.dst, s.sweeps.metric);
          res.row("{},{},{:.3f},{:.3f},{:.6f},{:.6f},{:.6f}", a.id, p.hop_count(), p.prop_length,
                  p.geo_length, path_stretch(p), rtt_ms(p, d), tp.carried_per_demand[i]);
        } catch (const Unreachable&) {
          res.row("{},,,,,,{:.6f}", a.id, tp.carried_per_demand[i]);
        }
      }
      man.outputs.push_back(res.close());
      break;
    }
    case Experiment::Optimize: {
      ObjectiveEvaluator evaluator(design_space(s));
      const auto result = smlopt(evaluator, optimizer_config(s));
      const auto frontier = pareto_frontier(evaluator);
      const auto demands = scenario_demands(s);

      std::vector<StructureMetrics> rows;
      int idx = 1;
      for (const auto& b : s.optimizer.baselines) {
        const CandidateStructure c{b, LatticeKind::L1, cfg};
        rows.push_back(structure_metrics(s, fmt::format("S{}", idx++), c, evaluator.normalizer(), demands));
      }
      rows.push_back(structure_metrics(s, fmt::format("S{}", idx), result.best, evaluator.normalizer(), demands));

      CsvFile cmp(out_dir, "comparison.csv",
                  "structure,motif,lattice,n_planes,sats_per_plane,phase_factor,mean_isl_length_km,mean_R_a,"
                  "mean_capacity_gbps,all_up_capacity_gbps,mean_stretch,frac_stretch_le_1_5,throughput_gbps");
      CsvFile rtt(out_dir, "comparison_rtt.csv", "structure,queue_delay_ms,mean_rtt_ms");
      for (const auto& r : rows) {
        const auto& c = r.structure.config;
        cmp.row("{},{},{},{},{},{},{:.3f},{:.6f},{:.3f},{:.3f},{:.6f},{:.6f},{:.6f}", r.label,
                quoted(r.structure.motif.to_string()), to_string(r.structure.lattice), c.n_planes(),
                c.sats_per_plane(), c.phase_factor(), r.mean_isl_length, r.mean_ra, r.mean_capacity,
                r.all_up_capacity, r.stretch.mean_stretch, r.stretch.fraction_within_1_5, r.throughput);
        for (std::size_t i = 0; i < s.sweeps.queue_delays_ms.size(); ++i)
          rtt.row("{},{:.3f},{:.6f}", r.label, s.sweeps.queue_delays_ms[i], r.rtt[i]);
      }
      man.outputs.push_back(cmp.close());
      man.outputs.push_back(rtt.close());

      CsvFile log(out_dir, "optimizer_log.csv",
                  "lattice,iteration,proposed,proposed_score,accepted,current,current_score");
      for (const auto& e : result.log)
        log.row("{},{},{},{:.9e},{},{},{:.9e}", to_string(e.lattice), e.iteration, quoted(e.proposed),
                e.proposed_score, e.accepted ? 1 : 0, quoted(e.current), e.current_score);
      man.outputs.push_back(log.close());

      const auto& best = result.best;
      json j;
      j["motif"] = best.motif.to_string();
      j["lattice"] = to_string(best.lattice);
      j["n_planes"] = best.config.n_planes();
      j["sats_per_plane"] = best.config.sats_per_plane();
      j["phase_factor"] = best.config.phase_factor();
      j["score"] = result.report.score;
      j["mean_availability"] = result.report.mean_availability;
      j["mean_isl_length_km"] = result.report.mean_isl_length;
      j["evaluations"] = evaluator.evaluations();
      json deltas = json::array();
      const auto& opt = rows.back();
      for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
        const auto& b = rows[i];
        json rtt_pct = json::array();
        for (std::size_t k = 0; k < b.rtt.size(); ++k) rtt_pct.push_back(pct(opt.rtt[k], b.rtt[k]));
        deltas.push_back({{"baseline", b.label},
                          {"motif", b.structure.motif.to_string()},
                          {"capacity_pct", pct(opt.mean_capacity, b.mean_capacity)},
                          {"throughput_pct", pct(opt.throughput, b.throughput)},
                          {"stretch_pct", pct(opt.stretch.mean_stretch, b.stretch.mean_stretch)},
                          {"rtt_pct", rtt_pct}});
      }
      j["deltas_vs_baselines"] = deltas;
      json fr = json::array();
      for (const auto& p : frontier)
        fr.push_back({{"encoding", p.encoding},
                      {"mean_isl_length_km", p.mean_isl_length},
                      {"mean_availability", p.mean_availability}});
      j["frontier"] = fr;
      json lj = json::array();
      for (const auto& e : result.log)
        lj.push_back({{"lattice", to_string(e.lattice)},
                      {"iteration", e.iteration},
                      {"proposed", e.proposed},
                      {"proposed_score", e.proposed_score},
                      {"accepted", e.accepted},
                      {"current", e.current},
                      {"current_score", e.current_score}});
      j["iterations"] = lj;
      man.outputs.push_back(write_json(out_dir, "optimizer.json", j));
      break;
    }
    case Experiment::Pareto: {
      ObjectiveEvaluator evaluator(design_space(s));
      const auto frontier = pareto_frontier(evaluator);
      std::set<std::string> on;
      for (const auto& p : frontier) on.insert(p.encoding);
      CsvFile csv(out_dir, "pareto.csv",
                  "encoding,lattice,motif,n_planes,sats_per_plane,phase_factor,mean_isl_length_km,"
                  "mean_R_a,score,on_frontier");
      for (const auto& c : evaluator.candidates()) {
        const auto r = evaluator.evaluate(c);
        csv.row("{},{},{},{},{},{},{:.3f},{:.6f},{:.9e},{}", quoted(c.encoding()), to_string(c.lattice),
                quoted(c.motif.to_string()), c.config.n_planes(), c.config.sats_per_plane(),
                c.config.phase_factor(), r.mean_isl_length, r.mean_availability, r.score,
                on.count(c.encoding()) ? 1 : 0);
      }
      man.outputs.push_back(csv.close());
      break;
    }
  }

  json mj;
  mj["scenario_hash"] = man.scenario_hash;
  mj["seed"] = man.seed;
  mj["artifact_version"] = man.version;
  mj["experiment"] = man.experiment;
  json outs = json::array();
  for (const auto& o : man.outputs) outs.push_back({{"file", o.name}, {"rows", o.rows}});
  mj["outputs"] = outs;
  mj["warnings"] = man.warnings;
  mj["scenario"] = json::parse(scenario_json(s));
  write_json(out_dir, "manifest.json", mj);
  return man;
}

}  // namespace mcn
