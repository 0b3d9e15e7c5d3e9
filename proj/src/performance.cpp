#include "mcn/performance.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <queue>
#include <sstream>

#include <fmt/format.h>

#include "mcn/random.hpp"

namespace mcn {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) {
    field.erase(0, field.find_first_not_of(" \t\r"));
    field.erase(field.find_last_not_of(" \t\r") + 1);
    out.push_back(field);
  }
  return out;
}

double parse_number(const std::string& s, const std::string& where) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ValidationError(where + ": '" + s + "' is not a number");
  }
}

}  // namespace

PopulationGrid load_population_csv(const std::filesystem::path& path, double cell_size_deg) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open population grid " + path.string());
  std::string line;
  if (!std::getline(in, line) || split_csv_line(line) != std::vector<std::string>{"lat", "lon", "population"})
    throw ValidationError(path.string() + ": expected header lat,lon,population");
  PopulationGrid grid;
  grid.cell_size_deg = cell_size_deg;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto f = split_csv_line(line);
    const std::string where = path.string() + ":" + std::to_string(row);
    if (f.size() != 3) throw ValidationError(where + ": expected 3 fields");
    PopulationCell c{{parse_number(f[0], where), parse_number(f[1], where)},
                     parse_number(f[2], where)};
    if (std::abs(c.center.lat) > 90.0 || std::abs(c.center.lon) > 180.0)
      throw ValidationError(where + ": coordinates out of range");
    if (c.population < 0.0) throw ValidationError(where + ": negative population");
    grid.cells.push_back(c);
  }
  return grid;
}

std::vector<TrafficDemand> gravity_demands(const PopulationGrid& grid, int count,
                                           double capacity_gbps, std::uint64_t seed) {
  if (count < 0) throw ValidationError("demand count must be >= 0");
  if (grid.cells.empty()) throw ValidationError("population grid is empty");
  if (!(capacity_gbps > 0.0)) throw ValidationError("ISL capacity must be > 0");
  std::vector<double> cumulative;
  double total = 0.0;
  int populated = 0;
  for (const auto& c : grid.cells) {
    total += c.population;
    populated += c.population > 0.0 ? 1 : 0;
    cumulative.push_back(total);
  }
  if (!(total > 0.0)) throw ValidationError("population grid has no population");
  if (populated < 2) throw ValidationError("gravity model needs at least two populated cells");

  Rng rng(seed);
  auto pick = [&] {
    const double u = rng.uniform() * total;
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    return static_cast<std::size_t>(std::min<std::ptrdiff_t>(
        it - cumulative.begin(), static_cast<std::ptrdiff_t>(cumulative.size()) - 1));
  };
  auto jitter = [&](const GeoPoint& c) {
    const double h = 0.5 * grid.cell_size_deg;
    GeoPoint p{c.lat + rng.uniform(-h, h), c.lon + rng.uniform(-h, h)};
    p.lat = std::clamp(p.lat, -90.0, 90.0);
    if (p.lon > 180.0) p.lon -= 360.0;
    if (p.lon < -180.0) p.lon += 360.0;
    return p;
  };

  std::vector<TrafficDemand> out;
  out.reserve(static_cast<std::size_t>(count));
  while (static_cast<int>(out.size()) < count) {
    const auto i = pick();
    const auto j = pick();
    if (i == j) continue;
    TrafficDemand d;
    d.id = static_cast<int>(out.size());
    d.src = jitter(grid.cells[i].center);
    d.dst = jitter(grid.cells[j].center);
    d.gbps = capacity_gbps * rng.uniform_open_closed();
    out.push_back(d);
  }
  return out;
}

void write_demands_csv(const std::filesystem::path& path, std::span<const TrafficDemand> demands) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "id,src_lat,src_lon,dst_lat,dst_lon,gbps\n";
  for (const auto& d : demands)
    out << fmt::format("{},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f}\n", d.id, d.src.lat, d.src.lon,
                       d.dst.lat, d.dst.lon, d.gbps);
}

std::vector<TrafficDemand> read_demands_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open demand file " + path.string());
  std::string line;
  std::vector<TrafficDemand> out;
  if (!std::getline(in, line)) return out;
  if (split_csv_line(line) !=
      std::vector<std::string>{"id", "src_lat", "src_lon", "dst_lat", "dst_lon", "gbps"})
    throw ValidationError(path.string() + ": expected header id,src_lat,src_lon,dst_lat,dst_lon,gbps");
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto f = split_csv_line(line);
    const std::string where = path.string() + ":" + std::to_string(row);
    if (f.size() != 6) throw ValidationError(where + ": expected 6 fields");
    TrafficDemand d;
    d.id = static_cast<int>(parse_number(f[0], where));
    d.src = {parse_number(f[1], where), parse_number(f[2], where)};
    d.dst = {parse_number(f[3], where), parse_number(f[4], where)};
    d.gbps = parse_number(f[5], where);
    if (!(d.gbps > 0.0)) throw ValidationError(where + ": bandwidth must be > 0");
    out.push_back(d);
  }
  return out;
}

NetworkSnapshot::NetworkSnapshot(const IslGraph& graph, double t)
    : graph_(&graph), t_(t), up_(graph.edge_count(), 1) {
  const auto sats = generate_constellation(graph.config());
  positions_.reserve(sats.size());
  for (const auto& s : sats) positions_.push_back(propagate(s, t).position);
  lengths_.reserve(graph.edge_count());
  for (const auto& e : graph.edges()) lengths_.push_back((positions_[e.a] - positions_[e.b]).norm());
}

NetworkSnapshot::NetworkSnapshot(const IslGraph& graph, double t, const AvailabilityTrace& trace)
    : NetworkSnapshot(graph, t) {
  if (trace.edge_count() != graph.edge_count())
    throw ValidationError("availability trace does not match the graph");
  const int k = trace.step_at(t);
  for (std::size_t e = 0; e < up_.size(); ++e) up_[e] = trace.up(e, k) ? 1 : 0;
}

double NetworkSnapshot::mean_edge_length() const {
  if (lengths_.empty()) return 0.0;
  return std::accumulate(lengths_.begin(), lengths_.end(), 0.0) /
         static_cast<double>(lengths_.size());
}

double NetworkSnapshot::capacity() const {
  double c = 0.0;
  for (std::size_t e = 0; e < up_.size(); ++e)
    if (up_[e]) c += graph_->capacity(e);
  return c;
}

std::optional<int> NetworkSnapshot::attach(const GeoPoint& p,
                                           std::optional<double> min_elevation_deg) const {
  const Vec3 g = ground_point_inertial(p.lat, p.lon, t_);
  const Vec3 up = g.unit();
  std::optional<int> best;
  double best_d = std::numeric_limits<double>::infinity();
  for (int s = 0; s < static_cast<int>(positions_.size()); ++s) {
    const Vec3 d = positions_[s] - g;
    const double dist = d.norm();
    if (min_elevation_deg) {
      const double elev = rad_to_deg(std::asin(std::clamp(d.dot(up) / dist, -1.0, 1.0)));
      if (elev < *min_elevation_deg) continue;
    }
    if (dist < best_d) {
      best_d = dist;
      best = s;
    }
  }
  return best;
}

std::string to_string(RouteMetric m) { return m == RouteMetric::ShortestDistance ? "sdp" : "mhp"; }

PathRecord route(const NetworkSnapshot& snap, int src, int dst, RouteMetric metric) {
  std::vector<std::uint8_t> all(snap.graph().edge_count(), 1);
  return route(snap, src, dst, metric, all);
}

PathRecord route(const NetworkSnapshot& snap, int src, int dst, RouteMetric metric,
                 std::span<const std::uint8_t> usable) {
  const auto& g = snap.graph();
  const int n = g.node_count();
  if (src < 0 || dst < 0 || src >= n || dst >= n) throw ValidationError("route endpoint out of range");
  PathRecord rec;
  rec.hops.push_back(src);
  if (src == dst) return rec;

  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(static_cast<std::size_t>(n), kInf);
  std::vector<int> pred(static_cast<std::size_t>(n), -1), pred_edge(static_cast<std::size_t>(n), -1);
  std::vector<std::uint8_t> done(static_cast<std::size_t>(n), 0);
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  dist[src] = 0.0;
  pq.push({0.0, src});
  while (!pq.empty()) {
    const auto [d, u] = pq.top();
    pq.pop();
    if (done[u]) continue;
    done[u] = 1;
    if (u == dst) break;
    for (const auto& inc : g.incident(u)) {
      if (!snap.edge_up(inc.edge) || !usable[inc.edge]) continue;
      const double w = metric == RouteMetric::ShortestDistance ? snap.edge_length(inc.edge) : 1.0;
      const double nd = d + w;
      const double tol = 1e-9 * std::max(1.0, nd);
      const int v = inc.neighbor;
      if (nd < dist[v] - tol) {
        dist[v] = nd;
        pred[v] = u;
        pred_edge[v] = inc.edge;
        pq.push({nd, v});
      } else if (!done[v] && std::abs(nd - dist[v]) <= tol && u < pred[v]) {
        pred[v] = u;
        pred_edge[v] = inc.edge;
      }
    }
  }
  if (!done[dst]) throw Unreachable(fmt::format("no up path from satellite {} to {}", src, dst));

  std::vector<int> nodes, edges;
  for (int v = dst; v != src; v = pred[v]) {
    nodes.push_back(v);
    edges.push_back(pred_edge[v]);
  }
  nodes.push_back(src);
  std::reverse(nodes.begin(), nodes.end());
  std::reverse(edges.begin(), edges.end());
  rec.hops = std::move(nodes);
  rec.edges = std::move(edges);
  for (int e : rec.edges) rec.prop_length += snap.edge_length(e);
  rec.geo_length = arc_length(snap.position(src), snap.position(dst));
  return rec;
}

double path_stretch(const PathRecord& record) {
  if (!(record.geo_length > 0.0))
    throw ValidationError("path stretch undefined for coincident endpoints");
  return record.prop_length / record.geo_length;
}

double rtt_ms(const PathRecord& record, double queue_delay_per_hop_ms) {
  const double prop_ms = record.prop_length / kLightSpeedKmS * 1000.0;
  return 2.0 * prop_ms + 2.0 * record.hop_count() * queue_delay_per_hop_ms;
}

double capacity(const IslGraph& graph, const AvailabilityTrace& trace, double t) {
  if (trace.edge_count() != graph.edge_count())
    throw ValidationError("availability trace does not match the graph");
  if (t < 0.0 || t > trace.horizon()) throw ValidationError("capacity epoch outside trace horizon");
  const int k = trace.step_at(t);
  double c = 0.0;
  for (std::size_t e = 0; e < graph.edge_count(); ++e)
    if (trace.up(e, k)) c += graph.capacity(e);
  return c;
}

double all_up_capacity(const IslGraph& graph) {
  double c = 0.0;
  for (std::size_t e = 0; e < graph.edge_count(); ++e) c += graph.capacity(e);
  return c;
}

double mean_capacity(const IslGraph& graph, const AvailabilityTrace& trace) {
  if (trace.edge_count() != graph.edge_count())
    throw ValidationError("availability trace does not match the graph");
  double c = 0.0;
  for (std::size_t e = 0; e < graph.edge_count(); ++e)
    c += graph.capacity(e) * availability_ratio(trace, e);
  return c;
}

double period_mean_edge_length(const IslGraph& graph, int samples) {
  if (samples < 1) throw ValidationError("need at least one length sample");
  const double period = graph.config().period();
  double sum = 0.0;
  for (int k = 0; k < samples; ++k) sum += NetworkSnapshot(graph, period * k / samples).mean_edge_length();
  return sum / samples;
}

std::vector<AttachedDemand> attach_demands(const NetworkSnapshot& snap,
                                           std::span<const TrafficDemand> demands,
                                           std::optional<double> min_elevation_deg) {
  std::vector<AttachedDemand> out;
  out.reserve(demands.size());
  for (const auto& d : demands) {
    const auto s = snap.attach(d.src, min_elevation_deg);
    const auto t = snap.attach(d.dst, min_elevation_deg);
    if (!s || !t) throw Unreachable(fmt::format("demand {} has no visible satellite", d.id));
    out.push_back({d.id, *s, *t, d.gbps});
  }
  return out;
}

namespace {

// Dinic max flow on a directed arc list.
class MaxFlow {
 public:
  explicit MaxFlow(int n) : head_(static_cast<std::size_t>(n), -1), level_(n), it_(n) {}

  void add_arc(int u, int v, double cap) {
    arcs_.push_back({v, head_[u], cap});
    head_[u] = static_cast<int>(arcs_.size()) - 1;
    arcs_.push_back({u, head_[v], 0.0});
    head_[v] = static_cast<int>(arcs_.size()) - 1;
  }

  double run(int s, int t) {
    double flow = 0.0;
    while (bfs(s, t)) {
      it_ = head_;
      while (true) {
        const double f = dfs(s, t, std::numeric_limits<double>::infinity());
        if (!(f > kEps)) break;
        flow += f;
      }
    }
    return flow;
  }

 private:
  static constexpr double kEps = 1e-9;
  struct Arc {
    int to;
    int next;
    double cap;
  };

  bool bfs(int s, int t) {
    std::fill(level_.begin(), level_.end(), -1);
    std::queue<int> q;
    level_[s] = 0;
    q.push(s);
    while (!q.empty()) {
      const int u = q.front();
      q.pop();
      for (int a = head_[u]; a != -1; a = arcs_[a].next)
        if (arcs_[a].cap > kEps && level_[arcs_[a].to] < 0) {
          level_[arcs_[a].to] = level_[u] + 1;
          q.push(arcs_[a].to);
        }
    }
    return level_[t] >= 0;
  }

  double dfs(int u, int t, double pushed) {
    if (u == t) return pushed;
    for (int& a = it_[u]; a != -1; a = arcs_[a].next) {
      Arc& arc = arcs_[a];
      if (arc.cap > kEps && level_[arc.to] == level_[u] + 1) {
        const double f = dfs(arc.to, t, std::min(pushed, arc.cap));
        if (f > kEps) {
          arc.cap -= f;
          arcs_[a ^ 1].cap += f;
          return f;
        }
      }
    }
    return 0.0;
  }

  std::vector<int> head_;
  std::vector<Arc> arcs_;
  std::vector<int> level_;
  std::vector<int> it_;
};

}  // namespace

double max_flow_bound(const NetworkSnapshot& snap, std::span<const AttachedDemand> demands) {
  const auto& g = snap.graph();
  const int n = g.node_count();
  const int source = n, sink = n + 1;
  std::vector<double> out_demand(static_cast<std::size_t>(n), 0.0), in_demand(static_cast<std::size_t>(n), 0.0);
  for (const auto& d : demands) {
    if (d.src == d.dst) continue;
    out_demand[d.src] += d.gbps;
    in_demand[d.dst] += d.gbps;
  }
  MaxFlow mf(n + 2);
  for (std::size_t e = 0; e < g.edge_count(); ++e) {
    if (!snap.edge_up(e)) continue;
    mf.add_arc(g.edge(e).a, g.edge(e).b, g.capacity(e));
    mf.add_arc(g.edge(e).b, g.edge(e).a, g.capacity(e));
  }
  for (int v = 0; v < n; ++v) {
    if (out_demand[v] > 0.0) mf.add_arc(source, v, out_demand[v]);
    if (in_demand[v] > 0.0) mf.add_arc(v, sink, in_demand[v]);
  }
  return mf.run(source, sink);
}

ThroughputResult throughput(const NetworkSnapshot& snap, std::span<const AttachedDemand> demands) {
  constexpr double kResidualEps = 1e-9;
  const auto& g = snap.graph();
  ThroughputResult res;
  res.capacity = snap.capacity();
  res.carried_per_demand.assign(demands.size(), 0.0);
  std::vector<double> residual(g.edge_count());
  std::vector<std::uint8_t> usable(g.edge_count());
  for (std::size_t e = 0; e < g.edge_count(); ++e) {
    residual[e] = snap.edge_up(e) ? g.capacity(e) : 0.0;
    usable[e] = residual[e] > kResidualEps ? 1 : 0;
  }
  for (std::size_t i = 0; i < demands.size(); ++i) {
    const auto& d = demands[i];
    if (d.src == d.dst) {
      ++res.local_demands;
      continue;
    }
    PathRecord path;
    try {
      path = route(snap, d.src, d.dst, RouteMetric::ShortestDistance, usable);
    } catch (const Unreachable&) {
      continue;
    }
    double bottleneck = std::numeric_limits<double>::infinity();
    for (int e : path.edges) bottleneck = std::min(bottleneck, residual[e]);
    const double carried = std::min(d.gbps, bottleneck);
    for (int e : path.edges) {
      residual[e] -= carried;
      if (residual[e] <= kResidualEps) usable[e] = 0;
    }
    res.carried_per_demand[i] = carried;
    res.carried += carried;
  }
  res.max_flow_bound = max_flow_bound(snap, demands);
  return res;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw ValidationError("pearson needs two equal series of length >= 2");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace mcn
