#include "mcn/structure.hpp"

#include <algorithm>
#include <cctype>
#include <limits>
#include <numeric>
#include <set>
#include <utility>

namespace mcn {

namespace {

int mod(int v, int n) { return ((v % n) + n) % n; }

// Signed representative in (-n/2, n/2].
int signed_offset(int v, int n) {
  const int r = mod(v, n);
  return 2 * r > n ? r - n : r;
}

std::string strip_spaces(const std::string& s) {
  std::string out;
  for (char c : s)
    if (!std::isspace(static_cast<unsigned char>(c))) out.push_back(c);
  return out;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

}  // namespace

std::string to_string(const ConnectionFeature& f) {
  return "(" + std::to_string(f.dx) + "," + std::to_string(f.dy) + ")";
}

ConnectionFeature parse_feature(const std::string& text) {
  const std::string s = strip_spaces(text);
  const auto comma = s.find(',');
  if (s.size() < 5 || s.front() != '(' || s.back() != ')' || comma == std::string::npos)
    throw ValidationError("malformed connection feature '" + text + "', expected (x,y)");
  try {
    std::size_t used_x = 0, used_y = 0;
    const std::string xs = s.substr(1, comma - 1);
    const std::string ys = s.substr(comma + 1, s.size() - comma - 2);
    ConnectionFeature f{std::stoi(xs, &used_x), std::stoi(ys, &used_y)};
    if (used_x != xs.size() || used_y != ys.size()) throw std::invalid_argument("trailing");
    return f;
  } catch (const std::exception&) {
    throw ValidationError("malformed connection feature '" + text + "', expected (x,y)");
  }
}

ConnectionFeature feature_between(SatelliteId a, SatelliteId b, const ConstellationConfig& cfg) {
  const int np = cfg.n_planes();
  const int mp = cfg.sats_per_plane();
  const int dx = mod(b.plane - a.plane, np);
  const int dy = mod(b.slot - a.slot, mp);
  if (dx == 0) return {0, -std::min(dy, mp - dy)};

  const ConnectionFeature fwd{dx, signed_offset(dy, mp)};
  const ConnectionFeature back{np - dx, signed_offset(-dy, mp)};
  if (fwd.dx != back.dx) return fwd.dx < back.dx ? fwd : back;
  return fwd.dy <= back.dy ? fwd : back;
}

ConnectionFeature canonical(const ConnectionFeature& f, const ConstellationConfig& cfg) {
  return feature_between({0, 0}, {mod(f.dx, cfg.n_planes()), mod(f.dy, cfg.sats_per_plane())},
                         cfg);
}

int feature_order(const ConnectionFeature& f) {
  if (f.dx == 0 && f.dy == 0) throw ValidationError("order undefined for feature (0,0)");
  return std::gcd(std::abs(f.dx), std::abs(f.dy));
}

std::string to_string(GridMode g) { return g == GridMode::Plus ? "+grid" : "*grid"; }

GridMode parse_grid_mode(const std::string& text) {
  const std::string s = lower(strip_spaces(text));
  if (s == "+grid" || s == "plus" || s == "+") return GridMode::Plus;
  if (s == "*grid" || s == "star" || s == "*") return GridMode::Star;
  throw ValidationError("unknown grid mode '" + text + "' (expected +grid or *grid)");
}

SpanningPattern::SpanningPattern(std::vector<ConnectionFeature> inter,
                                 std::vector<ConnectionFeature> extra_intra) {
  intra_.push_back(kNearestIntra);
  for (const auto& f : extra_intra) {
    if (!f.intra_plane() || f.dy == 0)
      throw ValidationError("intra-plane feature must be (0,y) with y != 0, got " +
                            mcn::to_string(f));
    if (f == kNearestIntra || f == ConnectionFeature{0, 1}) continue;
    if (std::find(intra_.begin(), intra_.end(), f) != intra_.end())
      throw ValidationError("duplicate feature " + mcn::to_string(f));
    intra_.push_back(f);
  }
  for (const auto& f : inter) {
    if (f.dx <= 0)
      throw ValidationError("inter-plane feature needs x > 0, got " + mcn::to_string(f));
    if (std::find(inter_.begin(), inter_.end(), f) != inter_.end())
      throw ValidationError("duplicate feature " + mcn::to_string(f));
    inter_.push_back(f);
  }
  if (inter_.empty() || inter_.size() > 2)
    throw ValidationError("a spanning pattern needs one (+Grid) or two (*Grid) inter-plane features");
  if (nominal_degree() > kMaxIslsPerSatellite)
    throw ValidationError("spanning pattern exceeds " + std::to_string(kMaxIslsPerSatellite) +
                          " ISLs per satellite");
  std::sort(inter_.begin(), inter_.end(), [](const auto& l, const auto& r) {
    return l.dx != r.dx ? l.dx < r.dx : l.dy > r.dy;
  });
  std::sort(intra_.begin() + 1, intra_.end(),
            [](const auto& l, const auto& r) { return l.dy > r.dy; });
}

SpanningPattern SpanningPattern::parse(const std::string& text) {
  std::string s = strip_spaces(text);
  if (s.size() >= 2 && s.front() == '{' && s.back() == '}') s = s.substr(1, s.size() - 2);
  std::vector<ConnectionFeature> inter, intra;
  std::size_t pos = 0;
  while (pos < s.size()) {
    const auto close = s.find(')', pos);
    if (s[pos] != '(' || close == std::string::npos)
      throw ValidationError("malformed spanning pattern '" + text + "'");
    const auto f = parse_feature(s.substr(pos, close - pos + 1));
    (f.intra_plane() ? intra : inter).push_back(f);
    pos = close + 1;
    if (pos < s.size()) {
      if (s[pos] != '+' && s[pos] != ',')
        throw ValidationError("malformed spanning pattern '" + text + "'");
      ++pos;
    }
  }
  return SpanningPattern(std::move(inter), std::move(intra));
}

std::vector<ConnectionFeature> SpanningPattern::all_features() const {
  std::vector<ConnectionFeature> out = intra_;
  out.insert(out.end(), inter_.begin(), inter_.end());
  return out;
}

std::string SpanningPattern::to_string() const {
  std::string out;
  for (const auto& f : inter_) {
    if (!out.empty()) out += "+";
    out += mcn::to_string(f);
  }
  for (std::size_t i = 1; i < intra_.size(); ++i) out += "+" + mcn::to_string(intra_[i]);
  return out;
}

Motif::Motif(SpanningPattern pattern) : patterns_{std::move(pattern)} {}

Motif::Motif(std::vector<SpanningPattern> patterns) : patterns_(std::move(patterns)) {
  if (patterns_.size() != 1)
    throw ValidationError("only single-satellite motifs (|M| = 1) are supported");
}

std::string to_string(LatticeKind k) { return "L" + std::to_string(static_cast<int>(k)); }

LatticeKind parse_lattice(const std::string& text) {
  const std::string s = lower(strip_spaces(text));
  if (s.size() == 2 && s[0] == 'l' && s[1] >= '1' && s[1] <= '5')
    return static_cast<LatticeKind>(s[1] - '0');
  throw ValidationError("unknown lattice '" + text + "' (expected L1..L5)");
}

bool lattice_compatible(LatticeKind lattice, GridMode grid) {
  switch (lattice) {
    case LatticeKind::L1: return true;
    case LatticeKind::L2:
    case LatticeKind::L3: return grid == GridMode::Plus;
    case LatticeKind::L4:
    case LatticeKind::L5: return grid == GridMode::Star;
  }
  return false;
}

double lattice_aspect_ratio(double inclination, WalkerKind kind, bool hexagonal) {
  // Walker star halves the RAAN spread, which doubles the target ratio.
  double rho = std::sin(inclination) * (kind == WalkerKind::Star ? 2.0 : 1.0);
  if (hexagonal) rho *= std::sqrt(3.0) / 2.0;
  return rho;
}

namespace {

int reduce_phase(double raw, int n_planes) {
  const double r = std::fmod(raw, static_cast<double>(n_planes));
  return mod(static_cast<int>(r), n_planes);
}

// Deviation angle of an inter-plane link seen from satellite (0,0) as it crosses the equator.
double equatorial_deviation(const ConstellationConfig& cfg, const ConnectionFeature& f) {
  const auto sats = generate_constellation(cfg);
  const SatelliteId target{mod(f.dx, cfg.n_planes()), mod(f.dy, cfg.sats_per_plane())};
  const auto obs = propagate(sats[0], 0.0);
  const auto tgt = propagate(sats[flat_index(target, cfg)], 0.0);
  return relative_geometry(obs, tgt).deviation;
}

ConstellationConfig align_phase(const ConstellationConfig& base, const SpanningPattern& pattern) {
  int best_f = 0;
  double best = std::numeric_limits<double>::infinity();
  for (int f = 0; f < base.n_planes(); ++f) {
    const auto cfg = base.with_phase_factor(f);
    double worst = 0.0;
    for (const auto& feat : pattern.inter())
      worst = std::max(worst, std::abs(equatorial_deviation(cfg, feat) - kPi / 2));
    if (worst < best - 1e-12) {
      best = worst;
      best_f = f;
    }
  }
  return base.with_phase_factor(best_f);
}

}  // namespace

ConstellationConfig prm_gen(const ConstellationConfig& base, int max_sats, LatticeKind lattice,
                            GridMode grid, const SpanningPattern* pattern) {
  if (!lattice_compatible(lattice, grid))
    throw ValidationError(to_string(lattice) + " is not compatible with " + to_string(grid));
  if (max_sats < 4) throw ValidationError("max_sats must be >= 4");
  if (lattice == LatticeKind::L1) return base;

  if (lattice == LatticeKind::L2 || lattice == LatticeKind::L4) {
    if (pattern == nullptr)
      throw ValidationError(to_string(lattice) + " parameter generation needs a spanning pattern");
    if (pattern->grid_mode() != grid)
      throw ValidationError("spanning pattern grid mode does not match requested grid");
    if (base.size() > max_sats)
      throw ValidationError("base constellation exceeds the satellite budget");
    return align_phase(base, *pattern);
  }

  const bool hex = lattice == LatticeKind::L5;
  const double i = base.inclination();
  const double rho = lattice_aspect_ratio(i, base.kind(), hex);
  const int m = std::max(1, static_cast<int>(std::floor(std::sqrt(rho * max_sats))));
  const int n = std::max(1, max_sats / m);

  const double cot_i = std::tan(kPi / 2 - i);
  int f = 0;
  if (!hex) {
    // floor(N - N / tan(pi/2 - i)); undefined for polar orbits, where we keep F = 0.
    if (std::abs(cot_i) > 1e-12) f = reduce_phase(std::floor(n - n / cot_i), n);
  } else {
    f = reduce_phase(-std::floor(n * cot_i - 0.5), n);
  }
  return ConstellationConfig(n, m, f, i, base.altitude(), base.kind());
}

IslGraph::IslGraph(ConstellationConfig config, std::vector<IslEdge> edges, double capacity_gbps,
                   std::vector<std::string> warnings)
    : config_(std::move(config)),
      edges_(std::move(edges)),
      capacity_gbps_(capacity_gbps),
      warnings_(std::move(warnings)) {
  const int n = config_.size();
  std::vector<std::vector<Incidence>> adj(static_cast<std::size_t>(n));
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    const auto& ed = edges_[e];
    if (ed.a == ed.b) throw ValidationError("self-loop in ISL graph");
    adj[ed.a].push_back({ed.b, static_cast<int>(e)});
    adj[ed.b].push_back({ed.a, static_cast<int>(e)});
  }
  offsets_.assign(static_cast<std::size_t>(n) + 1, 0);
  for (int v = 0; v < n; ++v) {
    auto& row = adj[v];
    std::sort(row.begin(), row.end(),
              [](const Incidence& l, const Incidence& r) { return l.neighbor < r.neighbor; });
    offsets_[v + 1] = offsets_[v] + static_cast<int>(row.size());
    incidence_.insert(incidence_.end(), row.begin(), row.end());
  }
}

namespace {

void check_feature(const ConnectionFeature& f, const ConstellationConfig& cfg) {
  if (std::abs(f.dx) >= cfg.n_planes() || std::abs(f.dy) >= cfg.sats_per_plane())
    throw ValidationError("feature " + to_string(f) + " does not fit a " +
                          std::to_string(cfg.n_planes()) + "x" +
                          std::to_string(cfg.sats_per_plane()) + " constellation");
  if (mod(f.dx, cfg.n_planes()) == 0 && mod(f.dy, cfg.sats_per_plane()) == 0)
    throw ValidationError("feature " + to_string(f) + " reduces to a self-loop");
}

IslGraph realise(const ConstellationConfig& cfg, const std::vector<ConnectionFeature>& features,
                 double capacity_gbps) {
  for (const auto& f : features) check_feature(f, cfg);
  std::vector<IslEdge> edges;
  std::vector<std::string> warnings;
  std::set<std::pair<int, int>> seen;
  const int np = cfg.n_planes(), mp = cfg.sats_per_plane();
  for (const auto& f : features) {
    bool collided = false;
    for (int n = 0; n < np; ++n) {
      for (int m = 0; m < mp; ++m) {
        const int a = flat_index({n, m}, cfg);
        const int b = flat_index({mod(n + f.dx, np), mod(m + f.dy, mp)}, cfg);
        if (!seen.insert({std::min(a, b), std::max(a, b)}).second) {
          collided = true;
          continue;
        }
        edges.push_back({a, b, f});
      }
    }
    if (collided)
      warnings.push_back("feature " + to_string(f) + " produces coincident links on a " +
                         std::to_string(np) + "x" + std::to_string(mp) +
                         " constellation; duplicates merged and node degree reduced");
  }
  return IslGraph(cfg, std::move(edges), capacity_gbps, std::move(warnings));
}

}  // namespace

IslGraph build_topology(const ConstellationConfig& config, const Motif& motif,
                        double capacity_gbps) {
  return realise(config, motif.pattern().all_features(), capacity_gbps);
}

IslGraph feature_topology(const ConstellationConfig& config, const ConnectionFeature& feature,
                          double capacity_gbps) {
  return realise(config, {feature}, capacity_gbps);
}

std::vector<Motif> enumerate_candidate_motifs(GridMode grid) {
  const std::vector<std::vector<ConnectionFeature>> plus = {
      {{1, 1}}, {{1, 0}}, {{1, -1}}, {{1, -2}}};
  const std::vector<std::vector<ConnectionFeature>> star = {
      {{1, 1}, {1, 0}},  {{1, 0}, {1, -1}}, {{1, -1}, {1, -2}},
      {{1, 1}, {1, -1}}, {{1, 0}, {1, -2}}, {{1, 1}, {1, -2}}};
  std::vector<Motif> out;
  for (const auto& inter : grid == GridMode::Plus ? plus : star)
    out.emplace_back(SpanningPattern(inter));
  return out;
}

std::vector<Motif> enumerate_candidate_motifs() {
  auto out = enumerate_candidate_motifs(GridMode::Plus);
  auto star = enumerate_candidate_motifs(GridMode::Star);
  out.insert(out.end(), star.begin(), star.end());
  return out;
}

}  // namespace mcn
