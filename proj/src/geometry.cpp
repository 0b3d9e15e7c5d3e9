#include "mcn/geometry.hpp"

#include <algorithm>

namespace mcn {

std::string to_string(WalkerKind kind) {
  return kind == WalkerKind::Delta ? "delta" : "star";
}

WalkerKind parse_walker_kind(const std::string& text) {
  std::string lower = text;
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "delta") return WalkerKind::Delta;
  if (lower == "star") return WalkerKind::Star;
  throw ValidationError("unknown walker kind '" + text + "' (expected delta or star)");
}

ConstellationConfig::ConstellationConfig(int n_planes, int sats_per_plane, int phase_factor,
                                         double inclination_rad, double altitude_km,
                                         WalkerKind kind)
    : n_planes_(n_planes),
      sats_per_plane_(sats_per_plane),
      phase_factor_(0),
      inclination_(inclination_rad),
      altitude_(altitude_km),
      kind_(kind) {
  if (n_planes < 1) throw ValidationError("n_planes must be >= 1");
  if (sats_per_plane < 1) throw ValidationError("sats_per_plane must be >= 1");
  if (!(altitude_km > 0.0)) throw ValidationError("altitude must be > 0 km");
  if (!(inclination_rad > 0.0) || inclination_rad > kPi / 2 + 1e-12)
    throw ValidationError("inclination must lie in (0, pi/2]");
  phase_factor_ = ((phase_factor % n_planes) + n_planes) % n_planes;
}

double ConstellationConfig::raan_spacing() const {
  const double span = kind_ == WalkerKind::Delta ? 2.0 * kPi : kPi;
  return span / n_planes_;
}

double ConstellationConfig::phase_bias() const {
  return 2.0 * kPi * phase_factor_ / (static_cast<double>(sats_per_plane_) * n_planes_);
}

double ConstellationConfig::angular_rate() const {
  const double r = orbit_radius();
  return std::sqrt(kEarthMuKm3s2 / (r * r * r));
}

double ConstellationConfig::period() const { return 2.0 * kPi / angular_rate(); }

ConstellationConfig ConstellationConfig::with_phase_factor(int f) const {
  return ConstellationConfig(n_planes_, sats_per_plane_, f, inclination_, altitude_, kind_);
}

std::vector<Satellite> generate_constellation(const ConstellationConfig& config) {
  std::vector<Satellite> sats;
  sats.reserve(static_cast<std::size_t>(config.size()));
  const double raan_step = config.raan_spacing();
  const double bias = config.phase_bias();
  const double rate = config.angular_rate();
  for (int n = 0; n < config.n_planes(); ++n) {
    for (int m = 0; m < config.sats_per_plane(); ++m) {
      OrbitalElements el;
      el.radius = config.orbit_radius();
      el.inclination = config.inclination();
      el.raan = n * raan_step;
      el.arg_latitude = 2.0 * kPi * m / config.sats_per_plane() + n * bias;
      el.angular_rate = rate;
      sats.push_back({{n, m}, el});
    }
  }
  return sats;
}

SatelliteState propagate(const OrbitalElements& el, double t) {
  const double u = el.arg_latitude + el.angular_rate * t;
  const double cO = std::cos(el.raan), sO = std::sin(el.raan);
  const double cu = std::cos(u), su = std::sin(u);
  const double ci = std::cos(el.inclination), si = std::sin(el.inclination);
  const double r = el.radius;
  const double v = r * el.angular_rate;
  SatelliteState s;
  s.position = {r * (cO * cu - sO * su * ci), r * (sO * cu + cO * su * ci), r * su * si};
  s.velocity = {v * (-cO * su - sO * cu * ci), v * (-sO * su + cO * cu * ci), v * cu * si};
  s.epoch = t;
  return s;
}

std::vector<SatelliteState> propagate_all(const std::vector<Satellite>& sats, double t) {
  std::vector<SatelliteState> out;
  out.reserve(sats.size());
  for (const auto& s : sats) out.push_back(propagate(s.elements, t));
  return out;
}

double deviation_angle(double azimuth, double elevation) {
  const double c = std::clamp(std::cos(azimuth) * std::cos(elevation), -1.0, 1.0);
  return std::acos(c);
}

RelativeGeometry relative_geometry(const SatelliteState& observer, const SatelliteState& target) {
  const Vec3 d = target.position - observer.position;
  const double range = d.norm();
  if (!(range > 1e-9)) throw ValidationError("relative geometry undefined for coincident satellites");

  const Vec3 x_axis = observer.velocity.unit();
  const Vec3 z_axis = (observer.position * -1.0).unit();
  const Vec3 y_axis = z_axis.cross(x_axis);
  const double dx = d.dot(x_axis);
  const double dy = d.dot(y_axis);
  const double dz = d.dot(z_axis);

  RelativeGeometry g;
  g.range = range;
  g.azimuth = std::atan2(dy, dx);
  g.elevation = std::atan2(-dz, std::hypot(dx, dy));
  // Equal to deviation_angle(azimuth, elevation); atan2 keeps precision where acos flattens.
  g.deviation = std::atan2(std::hypot(dy, dz), dx);
  return g;
}

double arc_length(const Vec3& a, const Vec3& b) {
  const double r = 0.5 * (a.norm() + b.norm());
  // atan2 form stays accurate for nearly coincident and nearly antipodal points.
  const double angle = std::atan2(a.cross(b).norm(), a.dot(b));
  return r * angle;
}

Vec3 ground_point_inertial(double lat_deg, double lon_deg, double t) {
  const double lat = deg_to_rad(lat_deg);
  const double lon = deg_to_rad(lon_deg) + kEarthRotationRadS * t;
  return {kEarthRadiusKm * std::cos(lat) * std::cos(lon),
          kEarthRadiusKm * std::cos(lat) * std::sin(lon), kEarthRadiusKm * std::sin(lat)};
}

}  // namespace mcn
