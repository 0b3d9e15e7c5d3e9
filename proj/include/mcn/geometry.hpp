#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace mcn {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kEarthRadiusKm = 6378.137;
inline constexpr double kEarthMuKm3s2 = 398600.4418;
inline constexpr double kEarthRotationRadS = 7.2921159e-5;
inline constexpr double kLightSpeedKmS = 299792.458;

inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

/// Raised for configurations or inputs that violate a documented precondition.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  Vec3 cross(const Vec3& o) const {
    return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
  }
  double norm() const { return std::sqrt(dot(*this)); }
  Vec3 unit() const { return *this * (1.0 / norm()); }
};

enum class WalkerKind { Delta, Star };

std::string to_string(WalkerKind kind);
WalkerKind parse_walker_kind(const std::string& text);

/// Walker constellation N_P*M_P/N_P/F/i at a single altitude.
class ConstellationConfig {
 public:
  ConstellationConfig(int n_planes, int sats_per_plane, int phase_factor,
                      double inclination_rad, double altitude_km,
                      WalkerKind kind = WalkerKind::Delta);

  int n_planes() const { return n_planes_; }
  int sats_per_plane() const { return sats_per_plane_; }
  /// Phase factor reduced into [0, n_planes).
  int phase_factor() const { return phase_factor_; }
  double inclination() const { return inclination_; }
  double altitude() const { return altitude_; }
  WalkerKind kind() const { return kind_; }

  int size() const { return n_planes_ * sats_per_plane_; }
  double orbit_radius() const { return kEarthRadiusKm + altitude_; }
  /// RAAN gap between adjacent planes.
  double raan_spacing() const;
  /// Phase offset between same-slot satellites of adjacent planes.
  double phase_bias() const;
  /// Mean motion in rad/s.
  double angular_rate() const;
  double period() const;

  ConstellationConfig with_phase_factor(int f) const;

  bool operator==(const ConstellationConfig&) const = default;

 private:
  int n_planes_;
  int sats_per_plane_;
  int phase_factor_;
  double inclination_;
  double altitude_;
  WalkerKind kind_;
};

struct SatelliteId {
  int plane = 0;
  int slot = 0;

  auto operator<=>(const SatelliteId&) const = default;
};

inline int flat_index(SatelliteId id, const ConstellationConfig& cfg) {
  return id.plane * cfg.sats_per_plane() + id.slot;
}
inline SatelliteId satellite_at(int index, const ConstellationConfig& cfg) {
  return {index / cfg.sats_per_plane(), index % cfg.sats_per_plane()};
}

/// Circular-orbit elements at epoch 0.
struct OrbitalElements {
  double radius = 0.0;          // km
  double inclination = 0.0;     // rad
  double raan = 0.0;            // rad
  double arg_latitude = 0.0;    // rad, at t = 0
  double angular_rate = 0.0;    // rad/s
};

struct Satellite {
  SatelliteId id;
  OrbitalElements elements;
};

struct SatelliteState {
  Vec3 position;   // km, inertial
  Vec3 velocity;   // km/s, inertial
  double epoch = 0.0;
};

/// Target as seen from an observer's VVLH frame (+x velocity, +z nadir).
struct RelativeGeometry {
  double range = 0.0;
  double azimuth = 0.0;
  double elevation = 0.0;
  double deviation = 0.0;
};

std::vector<Satellite> generate_constellation(const ConstellationConfig& config);

SatelliteState propagate(const OrbitalElements& elements, double t);
inline SatelliteState propagate(const Satellite& sat, double t) {
  return propagate(sat.elements, t);
}

/// States of every satellite at time t, indexed by flat index.
std::vector<SatelliteState> propagate_all(const std::vector<Satellite>& sats, double t);

double deviation_angle(double azimuth, double elevation);

RelativeGeometry relative_geometry(const SatelliteState& observer,
                                   const SatelliteState& target);

/// Great-circle arc between two points on a common sphere centred at the origin.
double arc_length(const Vec3& a, const Vec3& b);

/// Earth-fixed point (geodetic on a spherical Earth) expressed in the inertial frame at t.
Vec3 ground_point_inertial(double lat_deg, double lon_deg, double t);

}  // namespace mcn
