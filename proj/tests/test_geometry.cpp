#include <doctest.h>

#include <cmath>

#include "mcn/geometry.hpp"

using namespace mcn;

namespace {

// Independent oracle: perifocal circle rotated by R3(raan) * R1(i).
Vec3 oracle_position(double r, double incl, double raan, double u) {
  const double xp = r * std::cos(u), yp = r * std::sin(u);
  return {xp * std::cos(raan) - yp * std::cos(incl) * std::sin(raan),
          xp * std::sin(raan) + yp * std::cos(incl) * std::cos(raan), yp * std::sin(incl)};
}

ConstellationConfig reference() { return {24, 36, 0, deg_to_rad(53.0), 1000.0}; }

}  // namespace

TEST_SUITE("geometry") {
  TEST_CASE("config validation") {
    CHECK_THROWS_AS(ConstellationConfig(0, 36, 0, 0.9, 1000.0), ValidationError);
    CHECK_THROWS_AS(ConstellationConfig(24, 0, 0, 0.9, 1000.0), ValidationError);
    CHECK_THROWS_AS(ConstellationConfig(24, 36, 0, 0.9, 0.0), ValidationError);
    CHECK_THROWS_AS(ConstellationConfig(24, 36, 0, 0.0, 1000.0), ValidationError);
    CHECK_THROWS_AS(ConstellationConfig(24, 36, 0, kPi / 2 + 0.01, 1000.0), ValidationError);
    CHECK_NOTHROW(ConstellationConfig(24, 36, 0, kPi / 2, 1000.0));
  }

  TEST_CASE("phase factor reduced modulo N_P") {
    CHECK(ConstellationConfig(21, 27, -1, 0.9, 630.0).phase_factor() == 20);
    CHECK(ConstellationConfig(24, 36, 25, 0.9, 1000.0).phase_factor() == 1);
    CHECK(ConstellationConfig(24, 36, 3, 0.9, 1000.0) == ConstellationConfig(24, 36, 27, 0.9, 1000.0));
  }

  TEST_CASE("spacing and phase bias") {
    const auto cfg = reference();
    CHECK(cfg.raan_spacing() == doctest::Approx(deg_to_rad(15.0)).epsilon(1e-14));
    const ConstellationConfig oneweb(12, 49, 0, deg_to_rad(87.9), 1200.0, WalkerKind::Star);
    CHECK(oneweb.raan_spacing() == doctest::Approx(kPi / 12).epsilon(1e-14));
    const ConstellationConfig f3(24, 36, 3, deg_to_rad(53.0), 1000.0);
    CHECK(f3.phase_bias() == doctest::Approx(2 * kPi * 3 / (36.0 * 24.0)).epsilon(1e-14));
  }

  TEST_CASE("Kepler period for 1000 km") {
    CHECK(reference().period() == doctest::Approx(6307.1194).epsilon(1e-7));
  }

  TEST_CASE("generate_constellation layout") {
    const auto sats = generate_constellation(reference());
    REQUIRE(sats.size() == 864);
    CHECK(sats[36].elements.raan - sats[0].elements.raan == doctest::Approx(deg_to_rad(15.0)));

    const ConstellationConfig single(4, 1, 0, deg_to_rad(53.0), 1000.0);
    const auto four = generate_constellation(single);
    REQUIRE(four.size() == 4);
    for (int n = 0; n < 4; ++n) {
      CHECK(four[n].elements.arg_latitude == doctest::Approx(0.0));
      CHECK(four[n].elements.raan == doctest::Approx(n * kPi / 2));
    }
  }

  TEST_CASE("positions match the rotation oracle") {
    const ConstellationConfig cfg(24, 36, 5, deg_to_rad(53.0), 1000.0);
    const auto sats = generate_constellation(cfg);
    const double r = cfg.orbit_radius();
    for (int idx : {0, 1, 37, 500, 863}) {
      const auto id = satellite_at(idx, cfg);
      const double u0 = 2 * kPi * id.slot / 36 + id.plane * 2 * kPi * 5 / 864.0;
      const double raan = id.plane * 2 * kPi / 24;
      for (double t : {0.0, 1234.5}) {
        const auto got = propagate(sats[idx], t).position;
        const auto want = oracle_position(r, cfg.inclination(), raan, u0 + cfg.angular_rate() * t);
        CHECK((got - want).norm() < 1e-6);
      }
    }
  }

  TEST_CASE("circular orbit radius, speed and periodicity") {
    const auto cfg = reference();
    const auto sats = generate_constellation(cfg);
    for (const auto& s : sats) {
      const auto st = propagate(s, 777.0);
      CHECK(st.position.norm() == doctest::Approx(7378.137).epsilon(1e-12));
      CHECK(st.velocity.norm() == doctest::Approx(7.35013863).epsilon(1e-8));
      CHECK(st.position.dot(st.velocity) == doctest::Approx(0.0).epsilon(1e-6));
    }
    const auto a = propagate(sats[123], 0.0).position;
    const auto b = propagate(sats[123], cfg.period()).position;
    CHECK((a - b).norm() < 1e-6);
  }

  TEST_CASE("deviation angle identities") {
    CHECK(deviation_angle(0.0, 0.0) == 0.0);
    for (double beta : {-1.2, -0.3, 0.0, 0.4, 1.5}) CHECK(std::abs(deviation_angle(kPi / 2, beta) - kPi / 2) < 1e-12);
    for (double a : {-2.0, -0.5, 0.3, 1.1})
      for (double b : {-1.0, 0.2, 0.9}) {
        CHECK(deviation_angle(a, b) == doctest::Approx(deviation_angle(-a, b)));
        CHECK(deviation_angle(a, b) == doctest::Approx(deviation_angle(a, -b)));
        CHECK(deviation_angle(a, b) == doctest::Approx(std::acos(std::cos(a) * std::cos(b))));
      }
  }

  TEST_CASE("relative geometry in the VVLH frame") {
    const Vec3 pos{7000.0, 0.0, 0.0};
    const Vec3 vel{0.0, 7.5, 0.0};
    const SatelliteState obs{pos, vel, 0.0};

    const auto ahead = relative_geometry(obs, {pos + Vec3{0.0, 100.0, 0.0}, vel, 0.0});
    CHECK(ahead.range == doctest::Approx(100.0));
    CHECK(std::abs(ahead.azimuth) < 1e-12);
    CHECK(std::abs(ahead.elevation) < 1e-12);
    CHECK(std::abs(ahead.deviation) < 1e-12);

    // Nadir is +z, so a target toward Earth sits at elevation -pi/2.
    const auto below = relative_geometry(obs, {Vec3{6900.0, 0.0, 0.0}, vel, 0.0});
    CHECK(below.elevation == doctest::Approx(-kPi / 2));
    CHECK(below.deviation == doctest::Approx(kPi / 2));

    const auto behind = relative_geometry(obs, {pos + Vec3{0.0, -50.0, 0.0}, vel, 0.0});
    CHECK(behind.deviation == doctest::Approx(kPi));

    CHECK_THROWS_AS(relative_geometry(obs, obs), ValidationError);
  }

  TEST_CASE("coplanar pair is a rigid rotation") {
    const auto cfg = reference();
    const auto sats = generate_constellation(cfg);
    const auto& a = sats[flat_index({3, 4}, cfg)];
    const auto& b = sats[flat_index({3, 7}, cfg)];
    const auto g0 = relative_geometry(propagate(a, 0.0), propagate(b, 0.0));
    for (int k = 1; k <= 100; ++k) {
      const double t = k * cfg.period() / 37.0;
      const auto g = relative_geometry(propagate(a, t), propagate(b, t));
      CHECK(std::abs(g.range - g0.range) / g0.range < 1e-9);
      CHECK(std::abs(g.deviation - g0.deviation) < 1e-9);
    }
  }

  TEST_CASE("phase factor periodicity") {
    const ConstellationConfig a(24, 36, 2, deg_to_rad(53.0), 1000.0);
    const ConstellationConfig b(24, 36, 26, deg_to_rad(53.0), 1000.0);
    const auto sa = generate_constellation(a), sb = generate_constellation(b);
    for (std::size_t i = 0; i < sa.size(); ++i)
      CHECK((propagate(sa[i], 10.0).position - propagate(sb[i], 10.0).position).norm() < 1e-9);
  }

  TEST_CASE("arc length and ground points") {
    const double r = 7000.0;
    CHECK(arc_length({r, 0, 0}, {0, r, 0}) == doctest::Approx(r * kPi / 2));
    CHECK(arc_length({r, 0, 0}, {-r, 0, 0}) == doctest::Approx(r * kPi));
    CHECK(arc_length({r, 0, 0}, {r, 0, 0}) == doctest::Approx(0.0));

    const auto g0 = ground_point_inertial(0.0, 0.0, 0.0);
    CHECK((g0 - Vec3{kEarthRadiusKm, 0, 0}).norm() < 1e-9);
    const auto pole = ground_point_inertial(90.0, 45.0, 1000.0);
    CHECK(pole.z == doctest::Approx(kEarthRadiusKm));
    const double quarter = (kPi / 2) / kEarthRotationRadS;
    const auto g1 = ground_point_inertial(0.0, 0.0, quarter);
    CHECK((g1 - Vec3{0, kEarthRadiusKm, 0}).norm() < 1e-6);
  }

  TEST_CASE("walker kind parsing") {
    CHECK(parse_walker_kind("delta") == WalkerKind::Delta);
    CHECK(parse_walker_kind("star") == WalkerKind::Star);
    CHECK_THROWS_AS(parse_walker_kind("rosette"), ValidationError);
  }
}
