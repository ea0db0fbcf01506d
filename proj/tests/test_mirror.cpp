#include <cmath>

#include "doctest.h"
#include "generators.hpp"
#include "qmghost/mirror.hpp"

using namespace qmg;

namespace {

// Frozen from a 50-digit ray-intersection computation, independent of the
// closed-form calculators.
constexpr double kQ = 0.4561161523465056;
constexpr double kM = -0.5438838476534944;

double component_gap(const Ray& a, const Ray& b) {
  return std::max({std::abs(a.origin.x - b.origin.x), std::abs(a.origin.y - b.origin.y),
                   std::abs(a.origin.z - b.origin.z), std::abs(a.direction.x - b.direction.x),
                   std::abs(a.direction.y - b.direction.y), std::abs(a.direction.z - b.direction.z),
                   std::abs(a.omega - b.omega)});
}

}  // namespace

TEST_CASE("crossing transform: collinear degenerate") {
  const PumpModel pump = PumpModel::plane(1.0);
  const Ray s{{0, 0, 0}, {0, 0, 1}, 0.5, {7, false}};
  const Ray i = crossing_transform(s, pump, Vec3{});
  CHECK(i.omega == 0.5);
  CHECK(i.direction == Vec3{0, 0, 1});
  CHECK(i.pol.label == 7);
  CHECK(i.pol.conjugated);
}

TEST_CASE("crossing transform: equal angles on the opposite side") {
  const PumpModel pump = PumpModel::plane(2.0);
  const double st = 0.1;
  const Ray s{{0, 0, 0}, {st, 0, std::sqrt(1 - st * st)}, 1.0, {}};
  const Ray i = crossing_transform(s, pump, Vec3{});
  CHECK(i.omega == 1.0);
  CHECK(i.direction.x == doctest::Approx(-0.1).epsilon(1e-15));
  CHECK(i.direction.y == 0);
  CHECK(i.direction.z == doctest::Approx(std::sqrt(0.99)).epsilon(1e-15));
}

TEST_CASE("crossing transform: transverse matching for a non-degenerate split") {
  const PumpModel pump = PumpModel::plane(3.0);
  const Ray s{{0, 0, 0}, {0.3, 0, std::sqrt(0.91)}, 2.0, {}};
  const Ray i = crossing_transform(s, pump, Vec3{});
  CHECK(i.omega == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(i.direction.x == doctest::Approx(-0.6).epsilon(1e-14));
  CHECK(i.direction.z == doctest::Approx(0.8).epsilon(1e-14));
}

TEST_CASE("crossing transform is an involution on random valid rays") {
  testgen::Draw draw(21);
  for (int n = 0; n < 5000; ++n) {
    const bool sph = n % 2 == 0;
    const double omega_p = draw.uniform(0.5, 2);
    const PumpModel pump = sph ? PumpModel::spherical(omega_p, draw.uniform(0.5, 5) * (n % 4 == 0 ? -1 : 1))
                               : PumpModel::plane(omega_p);
    const Vec3 x{draw.uniform(-0.2, 0.2), draw.uniform(-0.2, 0.2), 0};
    const double omega_s = omega_p * draw.uniform(0.05, 0.95);
    const double omega_i = omega_p - omega_s;
    const Vec3 u = normalized(local_pump_wavevector(pump, x));
    // Keep the idler propagating: sin(theta_s) * omega_s < omega_i.
    const double max_sin = std::min(0.95, 0.95 * omega_i / omega_s);
    const Ray s{x, draw.direction_near(u, std::asin(max_sin)), omega_s, {1, false}};
    const Ray i = crossing_transform(s, pump, x);
    const Ray back = crossing_transform(i, pump, x);
    CHECK(component_gap(back, s) < 1e-12);
    CHECK(back.pol == s.pol);
  }
}

TEST_CASE("crossing transform domain errors") {
  const PumpModel pump = PumpModel::plane(1.0);
  auto kind_of = [&](const Ray& s, Vec3 x) {
    try {
      crossing_transform(s, pump, x);
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::Io;  // sentinel: no throw
  };
  CHECK(kind_of(Ray{{0, 0, 0}, {0, 0, 1}, 1.0, {}}, {}) == ErrorKind::FrequencyDomain);
  CHECK(kind_of(Ray{{0, 0, 0}, {0, 0, 1}, 0.0, {}}, {}) == ErrorKind::FrequencyDomain);
  // 0.8 * sin(60 deg) exceeds the idler's 0.2.
  CHECK(kind_of(Ray{{0, 0, 0}, {std::sqrt(0.75), 0, 0.5}, 0.8, {}}, {}) == ErrorKind::Evanescent);
  CHECK(kind_of(Ray{{0, 0, 0}, {0, 0, -1}, 0.5, {}}, {}) == ErrorKind::Domain);
  CHECK(kind_of(Ray{{1, 0, 0}, {0, 0, 1}, 0.5, {}}, {}) == ErrorKind::Domain);
}

TEST_CASE("sqm_image closed forms") {
  SqmParams sym = matched_sqm_params(1.0, 1.0, 0.5, 0.5, 0.0);
  ImagingSolution s = sqm_image(sym);
  CHECK(s.q == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(s.M == doctest::Approx(-1.0).epsilon(1e-15));

  const SqmParams gen = matched_sqm_params(2.0, 1.0, 2.0, 1.0, std::asin(0.3), 1e-3);
  CHECK(std::sin(gen.theta_pi) == doctest::Approx(0.6).epsilon(1e-15));
  s = sqm_image(gen);
  CHECK(std::abs(s.q - kQ) < 1e-14);
  CHECK(std::abs(s.M - kM) < 1e-14);
  REQUIRE(s.h_image);
  CHECK(*s.h_image == doctest::Approx(kM * 1e-3).epsilon(1e-14));

  // Zero angles reduce to the paraxial law exactly.
  SqmParams flat = gen;
  flat.theta_ps = flat.theta_pi = 0;
  const ImagingSolution full = sqm_image(flat);
  const ImagingSolution par = sqm_image_paraxial(2.0, 1.0, 2.0, 1.0);
  CHECK(full.q == par.q);
  CHECK(full.M == par.M);

  // Object at the focal distance: a/p = (a + b)/R.
  SqmParams focal = sym;
  focal.p = 0.5;
  CHECK_THROWS_AS(sqm_image(focal), Error);
}

TEST_CASE("sqm_image approaches the plane law as R grows") {
  const SqmParams base = matched_sqm_params(0.7, 1.0, 0.6, 0.4, 0.25);
  const double a = base.omega_s * std::cos(base.theta_ps);
  const double b = base.omega_i * std::cos(base.theta_pi);
  double prev = INFINITY;
  for (double R : {1e2, 1e4, 1e6, 1e8}) {
    SqmParams p = base;
    p.R = R;
    const ImagingSolution s = sqm_image(p);
    const double gap = std::abs(s.q + p.p * b / a);
    CHECK(gap < prev);
    prev = gap;
    CHECK(std::abs(s.M - 1) < 10 * p.p / R);
  }
  CHECK(prev < 1e-8);
}

TEST_CASE("sqm_image_paraxial") {
  ImagingSolution s = sqm_image_paraxial(2.0, 2.0, 0.5, 0.5);
  CHECK(s.q == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(s.M == doctest::Approx(-1.0).epsilon(1e-15));

  s = sqm_image_paraxial(2.0, 1.0, 2.0, 1.0);
  CHECK(s.q == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(s.M == doctest::Approx(-0.5).epsilon(1e-15));

  // Degenerate pairs follow the classical mirror equation for any p.
  for (double p : {0.3, 0.9, 1.7, 4.0, 11.0}) {
    const ImagingSolution m = sqm_image_paraxial(p, 1.3, 0.5, 0.5);
    CHECK(1 / p + 1 / m.q == doctest::Approx(2 / 1.3).epsilon(1e-14));
  }
  CHECK_THROWS_AS(sqm_image_paraxial(0.65, 1.3, 0.5, 0.5), Error);
}

TEST_CASE("pqm_image") {
  ImagingSolution s = pqm_image(0.5, 0.5, 0.5);
  CHECK(s.q == -0.5);
  CHECK(s.M == 1.0);
  s = pqm_image(0.6, 2.0, 1.0);
  CHECK(s.q == doctest::Approx(-0.3).epsilon(1e-15));
  CHECK(s.M == 1.0);

  testgen::Draw draw(9);
  for (int n = 0; n < 1000; ++n) {
    const double z = draw.log_uniform(1e-3, 1e3);
    const double ws = draw.uniform(0.01, 0.99);
    const ImagingSolution r = pqm_image(z, ws, 1 - ws);
    CHECK(r.M == 1.0);
    CHECK(std::abs(r.q + z * (1 - ws) / ws) <= 1e-12 * std::abs(r.q));
  }
  CHECK_THROWS_AS(pqm_image(0.0, 0.5, 0.5), Error);
}

TEST_CASE("ghost_thin_lens") {
  ImagingSolution s = ghost_thin_lens(600, 400);
  CHECK(s.q == doctest::Approx(1200).epsilon(1e-15));
  CHECK(s.M == doctest::Approx(2).epsilon(1e-15));
  s = ghost_thin_lens(800, 400);
  CHECK(s.q == doctest::Approx(800).epsilon(1e-15));
  CHECK(s.M == doctest::Approx(1).epsilon(1e-15));
  try {
    ghost_thin_lens(400, 400);
    FAIL("expected image at infinity");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ImageAtInfinity);
  }
  // Object inside the focal length: virtual image, upright.
  s = ghost_thin_lens(200, 400);
  CHECK(s.q == doctest::Approx(-400));
  CHECK(s.M == doctest::Approx(-2));
}
