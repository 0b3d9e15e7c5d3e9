#include "mcn/scenario.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#ifndef MCN_VERSION
#define MCN_VERSION "0.0.0"
#endif
#ifndef MCN_DATA_DIR
#define MCN_DATA_DIR "data"
#endif
#ifndef MCN_SCENARIO_DIR
#define MCN_SCENARIO_DIR "scenarios"
#endif

namespace mcn {

std::string artifact_version() { return MCN_VERSION; }

namespace {

namespace fs = std::filesystem;

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw ValidationError(path + ": " + msg);
}

std::string join(const std::string& parent, const std::string& key) {
  return parent.empty() ? key : parent + "." + key;
}

void check_keys(const YAML::Node& node, const std::string& path,
                std::initializer_list<const char*> allowed) {
  if (!node.IsMap()) fail(path.empty() ? "<root>" : path, "expected a mapping");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
      fail(join(path, key), "unknown field");
  }
}

template <typename T>
T convert(const YAML::Node& node, const std::string& path) {
  if (!node.IsScalar()) fail(path, "expected a scalar");
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    fail(path, "cannot read '" + node.Scalar() + "' as the expected type");
  }
}

template <typename T>
T get(const YAML::Node& parent, const std::string& path, const char* key, T fallback) {
  const auto node = parent[key];
  if (!node || node.IsNull()) return fallback;
  return convert<T>(node, join(path, key));
}

template <typename T>
T require(const YAML::Node& parent, const std::string& path, const char* key) {
  const auto node = parent[key];
  if (!node || node.IsNull()) fail(join(path, key), "required field is missing");
  return convert<T>(node, join(path, key));
}

template <typename T>
std::vector<T> get_list(const YAML::Node& parent, const std::string& path, const char* key,
                        std::vector<T> fallback) {
  const auto node = parent[key];
  if (!node || node.IsNull()) return fallback;
  const auto p = join(path, key);
  if (!node.IsSequence()) fail(p, "expected a list");
  std::vector<T> out;
  for (std::size_t i = 0; i < node.size(); ++i)
    out.push_back(convert<T>(node[i], fmt::format("{}[{}]", p, i)));
  return out;
}

YAML::Node section(const YAML::Node& root, const char* key) {
  const auto node = root[key];
  if (!node || node.IsNull()) return YAML::Node(YAML::NodeType::Map);
  return node;
}

template <typename T, typename F>
T wrap(const std::string& path, F&& f) {
  try {
    return f();
  } catch (const ValidationError& e) {
    fail(path, e.what());
  }
}

void positive(double v, const std::string& path) {
  if (!(v > 0.0)) fail(path, "must be > 0");
}

bool feature_fits(const ConnectionFeature& f, const ConstellationConfig& cfg) {
  const int np = cfg.n_planes(), mp = cfg.sats_per_plane();
  if (std::abs(f.dx) >= np || std::abs(f.dy) >= mp) return false;
  return !(((f.dx % np) + np) % np == 0 && ((f.dy % mp) + mp) % mp == 0);
}

std::vector<ConnectionFeature> default_study_features() {
  std::vector<ConnectionFeature> out;
  for (int o = 1; o <= 3; ++o) {
    out.push_back({0, -o});
    for (int y : {1, 0, -1, -2}) out.push_back({o, o * y});
  }
  return out;
}

fs::path resolve_file(const std::string& ref, const fs::path& base_dir, const std::string& path) {
  const fs::path p(ref);
  std::vector<fs::path> tries;
  if (p.is_absolute()) {
    tries.push_back(p);
  } else {
    tries.push_back(base_dir / p);
    tries.push_back(fs::path(MCN_DATA_DIR) / p);
  }
  for (const auto& t : tries)
    if (fs::is_regular_file(t)) return t;
  fail(path, "file '" + ref + "' not found");
}

std::vector<Motif> parse_motifs(const YAML::Node& node, const std::string& path) {
  if (!node || node.IsNull()) return enumerate_candidate_motifs();
  if (!node.IsSequence() || node.size() == 0) fail(path, "expected a nonempty list of motifs");
  std::vector<Motif> out;
  for (std::size_t i = 0; i < node.size(); ++i) {
    const auto p = fmt::format("{}[{}]", path, i);
    const auto text = convert<std::string>(node[i], p);
    out.push_back(wrap<Motif>(p, [&] { return Motif::parse(text); }));
  }
  return out;
}

}  // namespace

std::vector<ConnectionFeature> Scenario::normalization_features() const {
  std::set<ConnectionFeature> feats;
  for (const auto& m : motifs)
    for (const auto& f : m.pattern().all_features()) feats.insert(f);
  for (const auto& f : primary.pattern().all_features()) feats.insert(f);
  return {feats.begin(), feats.end()};
}

int Scenario::horizon_steps() const {
  return static_cast<int>(std::floor(horizon_periods * constellation.period() / dynamics.step + 1e-9));
}

Scenario parse_scenario(const std::string& text, const fs::path& base_dir,
                        const std::string& source_name) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ValidationError(source_name + ": " + e.what());
  }
  if (!root || root.IsNull()) throw ValidationError(source_name + ": empty scenario");
  check_keys(root, "", {"name", "seed", "constellation", "isl", "dynamics", "traffic", "sweeps",
                        "availability", "optimizer"});

  const auto name = get<std::string>(root, "", "name", fs::path(source_name).stem().string());
  const auto seed = get<std::uint64_t>(root, "", "seed", 1);

  // isl first: a generator may need the motif for its phase search.
  const auto isl = section(root, "isl");
  check_keys(isl, "isl", {"capacity_gbps", "motifs", "primary"});
  auto motifs = parse_motifs(isl["motifs"], "isl.motifs");
  Motif primary = motifs.front();
  if (isl["primary"]) {
    const auto t = convert<std::string>(isl["primary"], "isl.primary");
    primary = wrap<Motif>("isl.primary", [&] { return Motif::parse(t); });
  }
  const double capacity = get<double>(isl, "isl", "capacity_gbps", kDefaultIslCapacityGbps);
  positive(capacity, "isl.capacity_gbps");

  const auto c = root["constellation"];
  if (!c) fail("constellation", "required field is missing");
  check_keys(c, "constellation", {"planes", "sats_per_plane", "phase_factor", "inclination_deg",
                                  "altitude_km", "kind", "generator"});
  const double incl = require<double>(c, "constellation", "inclination_deg");
  const double alt = require<double>(c, "constellation", "altitude_km");
  const auto kind = wrap<WalkerKind>("constellation.kind", [&] {
    return parse_walker_kind(get<std::string>(c, "constellation", "kind", "delta"));
  });
  std::optional<GeneratorSpec> generator;
  if (c["generator"]) {
    const auto g = c["generator"];
    check_keys(g, "constellation.generator", {"max_sats", "lattice", "grid", "pattern"});
    GeneratorSpec spec;
    spec.max_sats = require<int>(g, "constellation.generator", "max_sats");
    spec.lattice = wrap<LatticeKind>("constellation.generator.lattice", [&] {
      return parse_lattice(require<std::string>(g, "constellation.generator", "lattice"));
    });
    spec.grid = wrap<GridMode>("constellation.generator.grid", [&] {
      return parse_grid_mode(get<std::string>(g, "constellation.generator", "grid",
                                              to_string(primary.grid_mode())));
    });
    if (g["pattern"]) {
      const auto t = convert<std::string>(g["pattern"], "constellation.generator.pattern");
      spec.pattern = wrap<SpanningPattern>("constellation.generator.pattern",
                                           [&] { return SpanningPattern::parse(t); });
    }
    generator = spec;
  }

  const bool needs_base = !generator || generator->lattice == LatticeKind::L1 ||
                          generator->lattice == LatticeKind::L2 ||
                          generator->lattice == LatticeKind::L4;
  const int planes = needs_base ? require<int>(c, "constellation", "planes")
                                : get<int>(c, "constellation", "planes", 1);
  const int sats = needs_base ? require<int>(c, "constellation", "sats_per_plane")
                              : get<int>(c, "constellation", "sats_per_plane",
                                         std::max(1, generator->max_sats));
  const int phase = get<int>(c, "constellation", "phase_factor", 0);
  auto cfg = wrap<ConstellationConfig>("constellation", [&] {
    return ConstellationConfig(planes, sats, phase, deg_to_rad(incl), alt, kind);
  });
  if (generator) {
    const SpanningPattern pattern = generator->pattern.value_or(primary.pattern());
    cfg = wrap<ConstellationConfig>("constellation.generator", [&] {
      return prm_gen(cfg, generator->max_sats, generator->lattice, generator->grid, &pattern);
    });
  }

  Scenario s{name, fs::path(source_name), cfg, generator, motifs, primary};
  s.capacity_gbps = capacity;
  s.seed = seed;

  const auto d = section(root, "dynamics");
  check_keys(d, "dynamics", {"fail_coefficient", "recovery_time_s", "step_s", "horizon_periods"});
  s.dynamics.fail_coefficient = get<double>(d, "dynamics", "fail_coefficient", 0.05);
  s.dynamics.recovery_time = get<double>(d, "dynamics", "recovery_time_s", 60.0);
  s.dynamics.step = get<double>(d, "dynamics", "step_s", 10.0);
  s.dynamics.seed = seed;
  s.horizon_periods = get<double>(d, "dynamics", "horizon_periods", 2.0);
  wrap<int>("dynamics", [&] { s.dynamics.validate(); return 0; });
  positive(s.horizon_periods, "dynamics.horizon_periods");
  if (s.horizon_steps() < 10) fail("dynamics.horizon_periods", "horizon must cover at least 10 steps");

  const auto t = section(root, "traffic");
  check_keys(t, "traffic", {"population", "cell_size_deg", "demands", "demand_file",
                            "min_elevation_deg", "loads"});
  s.traffic.population = resolve_file(
      get<std::string>(t, "traffic", "population", "world_population_5deg.csv"), base_dir,
      "traffic.population");
  s.traffic.cell_size_deg = get<double>(t, "traffic", "cell_size_deg", 5.0);
  positive(s.traffic.cell_size_deg, "traffic.cell_size_deg");
  s.traffic.demand_count = get<int>(t, "traffic", "demands", 500);
  if (s.traffic.demand_count < 0) fail("traffic.demands", "must be >= 0");
  if (t["demand_file"])
    s.traffic.demand_file = resolve_file(convert<std::string>(t["demand_file"], "traffic.demand_file"),
                                         base_dir, "traffic.demand_file");
  if (t["min_elevation_deg"]) {
    const double e = convert<double>(t["min_elevation_deg"], "traffic.min_elevation_deg");
    if (e < -90.0 || e > 90.0) fail("traffic.min_elevation_deg", "must lie in [-90, 90]");
    s.traffic.min_elevation_deg = e;
  }
  s.traffic.loads = get_list<int>(t, "traffic", "loads", s.traffic.loads);
  for (std::size_t i = 0; i < s.traffic.loads.size(); ++i)
    if (s.traffic.loads[i] < 0) fail(fmt::format("traffic.loads[{}]", i), "must be >= 0");
  std::sort(s.traffic.loads.begin(), s.traffic.loads.end());

  const auto sw = section(root, "sweeps");
  check_keys(sw, "sweeps", {"phase_factors", "queue_delays_ms", "epochs", "metric"});
  std::vector<int> default_f;
  for (int f = 0; f < cfg.n_planes(); f += 3) default_f.push_back(f);
  s.sweeps.phase_factors = get_list<int>(sw, "sweeps", "phase_factors", default_f);
  s.sweeps.queue_delays_ms = get_list<double>(sw, "sweeps", "queue_delays_ms", s.sweeps.queue_delays_ms);
  for (std::size_t i = 0; i < s.sweeps.queue_delays_ms.size(); ++i)
    if (s.sweeps.queue_delays_ms[i] < 0.0)
      fail(fmt::format("sweeps.queue_delays_ms[{}]", i), "must be >= 0");
  s.sweeps.epochs = get<int>(sw, "sweeps", "epochs", 4);
  if (s.sweeps.epochs < 1) fail("sweeps.epochs", "must be >= 1");
  const auto metric = get<std::string>(sw, "sweeps", "metric", "sdp");
  if (metric == "sdp" || metric == "shortest-distance") s.sweeps.metric = RouteMetric::ShortestDistance;
  else if (metric == "mhp" || metric == "min-hop") s.sweeps.metric = RouteMetric::MinimumHop;
  else fail("sweeps.metric", "expected 'sdp' or 'mhp'");

  const auto a = section(root, "availability");
  check_keys(a, "availability", {"features", "replications", "export_trace"});
  if (a["features"]) {
    const auto texts = get_list<std::string>(a, "availability", "features", {});
    if (texts.empty()) fail("availability.features", "expected a nonempty list");
    for (std::size_t i = 0; i < texts.size(); ++i) {
      const auto p = fmt::format("availability.features[{}]", i);
      s.availability.features.push_back(
          wrap<ConnectionFeature>(p, [&] { return parse_feature(texts[i]); }));
      if (!feature_fits(s.availability.features.back(), cfg))
        fail(p, "feature does not fit the constellation");
    }
  } else {
    s.availability.features = default_study_features();
  }
  s.availability.replications = get<int>(a, "availability", "replications", 5);
  if (s.availability.replications < 1) fail("availability.replications", "must be >= 1");
  s.availability.export_trace = get<bool>(a, "availability", "export_trace", false);

  const auto o = section(root, "optimizer");
  check_keys(o, "optimizer", {"max_iterations", "lattices", "merge_count", "split_count",
                              "max_sats", "horizon_periods", "length_samples", "baselines"});
  s.optimizer.max_iterations = get<int>(o, "optimizer", "max_iterations", 100);
  if (s.optimizer.max_iterations < 1) fail("optimizer.max_iterations", "must be >= 1");
  if (o["lattices"]) {
    const auto texts = get_list<std::string>(o, "optimizer", "lattices", {});
    if (texts.empty()) fail("optimizer.lattices", "expected a nonempty list");
    s.optimizer.lattices.clear();
    for (std::size_t i = 0; i < texts.size(); ++i)
      s.optimizer.lattices.push_back(wrap<LatticeKind>(fmt::format("optimizer.lattices[{}]", i),
                                                       [&] { return parse_lattice(texts[i]); }));
  }
  s.optimizer.merge_count = get<int>(o, "optimizer", "merge_count", 1);
  s.optimizer.split_count = get<int>(o, "optimizer", "split_count", 1);
  if (s.optimizer.merge_count < 1) fail("optimizer.merge_count", "must be >= 1");
  if (s.optimizer.split_count < 1) fail("optimizer.split_count", "must be >= 1");
  s.optimizer.max_sats = get<int>(o, "optimizer", "max_sats", cfg.size());
  if (s.optimizer.max_sats < 4) fail("optimizer.max_sats", "must be >= 4");
  s.optimizer.horizon_periods = get<double>(o, "optimizer", "horizon_periods", 1.0);
  positive(s.optimizer.horizon_periods, "optimizer.horizon_periods");
  s.optimizer.length_samples = get<int>(o, "optimizer", "length_samples", 36);
  if (s.optimizer.length_samples < 1) fail("optimizer.length_samples", "must be >= 1");
  if (o["baselines"]) {
    s.optimizer.baselines = parse_motifs(o["baselines"], "optimizer.baselines");
  } else {
    for (const char* b : {"(1,0)", "(1,-1)", "(1,0)+(1,-1)"}) s.optimizer.baselines.push_back(Motif::parse(b));
  }

  for (const auto& m : s.motifs)
    wrap<int>("isl.motifs", [&] { build_topology(cfg, m, capacity); return 0; });
  wrap<int>("isl.primary", [&] { build_topology(cfg, s.primary, capacity); return 0; });
  return s;
}

Scenario load_scenario(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError(path.string() + ": cannot open scenario file");
  std::stringstream buf;
  buf << in.rdbuf();
  auto s = parse_scenario(buf.str(), path.parent_path(), path.string());
  s.source = path;
  return s;
}

std::string scenario_json(const Scenario& s) {
  using json = nlohmann::ordered_json;
  const auto& c = s.constellation;
  json j;
  j["name"] = s.name;
  j["seed"] = s.seed;
  json cj;
  cj["planes"] = c.n_planes();
  cj["sats_per_plane"] = c.sats_per_plane();
  cj["phase_factor"] = c.phase_factor();
  cj["inclination_deg"] = rad_to_deg(c.inclination());
  cj["altitude_km"] = c.altitude();
  cj["kind"] = to_string(c.kind());
  if (s.generator) {
    json g;
    g["max_sats"] = s.generator->max_sats;
    g["lattice"] = to_string(s.generator->lattice);
    g["grid"] = to_string(s.generator->grid);
    if (s.generator->pattern) g["pattern"] = s.generator->pattern->to_string();
    cj["generator"] = g;
  }
  j["constellation"] = cj;
  json motifs = json::array();
  for (const auto& m : s.motifs) motifs.push_back(m.to_string());
  j["isl"] = {{"capacity_gbps", s.capacity_gbps}, {"motifs", motifs}, {"primary", s.primary.to_string()}};
  j["dynamics"] = {{"fail_coefficient", s.dynamics.fail_coefficient},
                   {"recovery_time_s", s.dynamics.recovery_time},
                   {"step_s", s.dynamics.step},
                   {"horizon_periods", s.horizon_periods}};
  json tj;
  tj["population"] = s.traffic.population.filename().string();
  tj["cell_size_deg"] = s.traffic.cell_size_deg;
  tj["demands"] = s.traffic.demand_count;
  if (s.traffic.demand_file) tj["demand_file"] = s.traffic.demand_file->filename().string();
  if (s.traffic.min_elevation_deg) tj["min_elevation_deg"] = *s.traffic.min_elevation_deg;
  tj["loads"] = s.traffic.loads;
  j["traffic"] = tj;
  j["sweeps"] = {{"phase_factors", s.sweeps.phase_factors},
                 {"queue_delays_ms", s.sweeps.queue_delays_ms},
                 {"epochs", s.sweeps.epochs},
                 {"metric", to_string(s.sweeps.metric)}};
  json feats = json::array();
  for (const auto& f : s.availability.features) feats.push_back(to_string(f));
  j["availability"] = {{"features", feats},
                       {"replications", s.availability.replications},
                       {"export_trace", s.availability.export_trace}};
  json lats = json::array();
  for (auto l : s.optimizer.lattices) lats.push_back(to_string(l));
  json base = json::array();
  for (const auto& m : s.optimizer.baselines) base.push_back(m.to_string());
  j["optimizer"] = {{"max_iterations", s.optimizer.max_iterations},
                    {"lattices", lats},
                    {"merge_count", s.optimizer.merge_count},
                    {"split_count", s.optimizer.split_count},
                    {"max_sats", s.optimizer.max_sats},
                    {"horizon_periods", s.optimizer.horizon_periods},
                    {"length_samples", s.optimizer.length_samples},
                    {"baselines", base}};
  return j.dump(2);
}

std::string scenario_hash(const Scenario& s) {
  const auto text = scenario_json(s);
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001B3ULL;
  }
  return fmt::format("{:016x}", h);
}

fs::path fixture_path(const std::string& name) {
  return fs::path(MCN_SCENARIO_DIR) / (name + ".yaml");
}

fs::path resolve_scenario(const std::string& name_or_path) {
  const fs::path p(name_or_path);
  if (fs::is_regular_file(p)) return p;
  const auto fixture = fixture_path(name_or_path);
  if (fs::is_regular_file(fixture)) return fixture;
  throw ValidationError(name_or_path + ": no such scenario file or bundled fixture");
}

}  // namespace mcn
