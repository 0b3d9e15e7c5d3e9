#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mcn/geometry.hpp"

namespace mcn {

/// Plane/slot offset phi_(x,y): satellite (n, m) links to (n + x, m + y), both modular.
struct ConnectionFeature {
  int dx = 0;
  int dy = 0;

  auto operator<=>(const ConnectionFeature&) const = default;

  bool intra_plane() const { return dx == 0; }
};

/// "(x,y)" with explicit sign on y, e.g. "(1,-1)".
std::string to_string(const ConnectionFeature& f);
ConnectionFeature parse_feature(const std::string& text);

/// Canonical feature realised by the pair (a, b); symmetric in a and b.
///
/// Inter-plane pairs are oriented so that x is the shorter way round the plane ring
/// (x <= N_P/2); y is then the signed slot offset in (-M_P/2, M_P/2]. When both
/// orientations give the same x, the one with the smaller signed y wins.
/// Intra-plane pairs use y = -min(d, M_P - d).
ConnectionFeature feature_between(SatelliteId a, SatelliteId b, const ConstellationConfig& cfg);

/// Canonical representative of a feature under cfg.
ConnectionFeature canonical(const ConnectionFeature& f, const ConstellationConfig& cfg);

/// gcd(|x|, |y|); throws on (0,0).
int feature_order(const ConnectionFeature& f);

enum class GridMode { Plus, Star };
std::string to_string(GridMode g);
GridMode parse_grid_mode(const std::string& text);

/// Features one satellite realises. The nearest intra-plane link (0,-1) is always implied.
class SpanningPattern {
 public:
  SpanningPattern(std::vector<ConnectionFeature> inter,
                  std::vector<ConnectionFeature> extra_intra = {});

  static SpanningPattern parse(const std::string& text);

  /// Intra-plane features including the implied (0,-1).
  const std::vector<ConnectionFeature>& intra() const { return intra_; }
  const std::vector<ConnectionFeature>& inter() const { return inter_; }
  std::vector<ConnectionFeature> all_features() const;

  GridMode grid_mode() const { return inter_.size() == 1 ? GridMode::Plus : GridMode::Star; }
  /// ISLs per satellite when wraparound is non-degenerate.
  int nominal_degree() const { return 2 * static_cast<int>(intra_.size() + inter_.size()); }

  /// Inter-plane features joined by '+', extra intra features appended.
  std::string to_string() const;

  auto operator<=>(const SpanningPattern&) const = default;

 private:
  std::vector<ConnectionFeature> intra_;
  std::vector<ConnectionFeature> inter_;
};

inline constexpr ConnectionFeature kNearestIntra{0, -1};
inline constexpr int kMaxIslsPerSatellite = 6;

/// Repeating unit of spanning patterns. Only single-satellite motifs are supported.
class Motif {
 public:
  explicit Motif(SpanningPattern pattern);
  explicit Motif(std::vector<SpanningPattern> patterns);

  static Motif parse(const std::string& text) { return Motif(SpanningPattern::parse(text)); }

  const std::vector<SpanningPattern>& patterns() const { return patterns_; }
  const SpanningPattern& pattern() const { return patterns_.front(); }
  std::size_t size() const { return patterns_.size(); }
  GridMode grid_mode() const { return pattern().grid_mode(); }
  std::string to_string() const { return pattern().to_string(); }

  auto operator<=>(const Motif&) const = default;

 private:
  std::vector<SpanningPattern> patterns_;
};

enum class LatticeKind { L1 = 1, L2, L3, L4, L5 };
std::string to_string(LatticeKind k);
LatticeKind parse_lattice(const std::string& text);
inline constexpr LatticeKind kAllLattices[] = {LatticeKind::L1, LatticeKind::L2, LatticeKind::L3,
                                               LatticeKind::L4, LatticeKind::L5};

/// L1 accepts either grid mode; L2/L3 pair with +Grid, L4/L5 with *Grid.
bool lattice_compatible(LatticeKind lattice, GridMode grid);

/// Lattice-conforming constellation parameters.
///
/// `base` supplies inclination, altitude and Walker kind; L1 returns it unchanged and
/// L2/L4 keep its plane/slot counts and only pick F. L2/L4 need the pattern whose
/// inter-plane features the phase search aligns.
ConstellationConfig prm_gen(const ConstellationConfig& base, int max_sats, LatticeKind lattice,
                            GridMode grid, const SpanningPattern* pattern = nullptr);

/// Aspect ratio M_P/N_P targeted by L3 (or L5 when `hexagonal`).
double lattice_aspect_ratio(double inclination, WalkerKind kind, bool hexagonal);

struct IslEdge {
  int a = 0;
  int b = 0;
  /// Feature as applied from a (b = a + feature).
  ConnectionFeature feature;
};

/// Undirected ISL graph over flat satellite indices. Immutable once built.
class IslGraph {
 public:
  IslGraph(ConstellationConfig config, std::vector<IslEdge> edges, double capacity_gbps,
           std::vector<std::string> warnings = {});

  const ConstellationConfig& config() const { return config_; }
  int node_count() const { return config_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  const std::vector<IslEdge>& edges() const { return edges_; }
  const IslEdge& edge(std::size_t i) const { return edges_[i]; }
  double capacity(std::size_t /*edge*/) const { return capacity_gbps_; }
  double edge_capacity_gbps() const { return capacity_gbps_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

  struct Incidence {
    int neighbor;
    int edge;
  };
  /// Incident edges of a node, sorted by neighbor index.
  std::span<const Incidence> incident(int node) const {
    return {incidence_.data() + offsets_[node], incidence_.data() + offsets_[node + 1]};
  }
  int degree(int node) const { return offsets_[node + 1] - offsets_[node]; }

 private:
  ConstellationConfig config_;
  std::vector<IslEdge> edges_;
  double capacity_gbps_;
  std::vector<std::string> warnings_;
  std::vector<int> offsets_;
  std::vector<Incidence> incidence_;
};

inline constexpr double kDefaultIslCapacityGbps = 10.0;

/// Graph realising the motif on every satellite; coincident edges are merged with a warning.
IslGraph build_topology(const ConstellationConfig& config, const Motif& motif,
                        double capacity_gbps = kDefaultIslCapacityGbps);

/// Graph holding only the edges of a single feature (availability studies).
IslGraph feature_topology(const ConstellationConfig& config, const ConnectionFeature& feature,
                          double capacity_gbps = kDefaultIslCapacityGbps);

std::vector<Motif> enumerate_candidate_motifs(GridMode grid);
/// +Grid candidates followed by *Grid candidates.
std::vector<Motif> enumerate_candidate_motifs();

}  // namespace mcn
