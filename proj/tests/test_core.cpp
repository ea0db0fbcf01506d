#include <cmath>
#include <numbers>

#include "doctest.h"
#include "generators.hpp"
#include "qmghost/core.hpp"

using namespace qmg;

TEST_CASE("wavevector scales the unit direction by omega / c") {
  Ray r{{0, 0, 0}, {0, 0, 1}, 1.0, {}};
  CHECK(wavevector(r) == Vec3{0, 0, 1});

  r.omega = 2;
  r.direction = {0.6, 0, 0.8};
  const Vec3 k = wavevector(r);
  CHECK(k.x == doctest::Approx(1.2).epsilon(1e-15));
  CHECK(k.y == 0);
  CHECK(k.z == doctest::Approx(1.6).epsilon(1e-15));

  r.omega = 3;
  r.direction = {0, 0, 1};
  CHECK(norm(wavevector(r)) == 3);

  r.omega = 2;
  CHECK(wavevector(r, UnitSystem::si()).z == doctest::Approx(2 / 299792458.0).epsilon(1e-15));
}

TEST_CASE("angle_to_axis") {
  const Vec3 z{0, 0, 1};
  CHECK(angle_to_axis(Vec3{0, 0, 1}, z) == 0);
  CHECK(angle_to_axis(Vec3{1, 0, 0}, z) == doctest::Approx(std::numbers::pi / 2).epsilon(1e-15));
  CHECK(angle_to_axis(Vec3{0.6, 0, 0.8}, z) == doctest::Approx(std::acos(0.8)).epsilon(1e-14));
  CHECK(angle_to_axis(Vec3{0, 0, -2}, z) == doctest::Approx(std::numbers::pi).epsilon(1e-15));
  // atan2 keeps tiny angles that acos would round to zero.
  CHECK(angle_to_axis(Vec3{1e-10, 0, 1}, z) == doctest::Approx(1e-10).epsilon(1e-12));
  CHECK_THROWS_AS(angle_to_axis(Vec3{}, z), Error);
}

TEST_CASE("ray validation") {
  Ray ok{{0, 0, 0}, {0.6, 0, 0.8}, 1.0, {}};
  CHECK_NOTHROW(ok.validate());
  Ray bad_dir = ok;
  bad_dir.direction = {1, 1, 0};
  CHECK_THROWS_AS(bad_dir.validate(), Error);
  Ray bad_omega = ok;
  bad_omega.omega = 0;
  CHECK_THROWS_AS(bad_omega.validate(), Error);
}

TEST_CASE("frames are orthonormal and right handed for random axes") {
  testgen::Draw draw(11);
  for (int i = 0; i < 1000; ++i) {
    const Vec3 a = draw.unit_vector();
    const Frame f = Frame::from_axis(a);
    CHECK(std::abs(dot(f.e1, f.e2)) < 1e-14);
    CHECK(std::abs(dot(f.e1, f.axis)) < 1e-14);
    CHECK(std::abs(norm(f.e1) - 1) < 1e-14);
    CHECK(norm(cross(f.e1, f.e2) - f.axis) < 1e-14);
    const Vec3 v{0.3, -0.2, 0.9};
    CHECK(norm(f.to_world(f.to_local(v)) - v) < 1e-14);
  }
  const Frame lab = Frame::from_axis({0, 0, 1});
  CHECK(lab.e1 == Vec3{1, 0, 0});
  CHECK(lab.e2 == Vec3{0, 1, 0});
}

TEST_CASE("pump models") {
  const PumpModel plane = PumpModel::plane(1.0);
  CHECK(plane.kind == PumpModel::Kind::Plane);
  CHECK_NOTHROW(plane.validate());

  const PumpModel concave = PumpModel::spherical(1.0, 2.0);
  CHECK(concave.curvature_center == Vec3{0, 0, 2});
  const PumpModel convex = PumpModel::spherical(1.0, -2.0);
  CHECK(convex.curvature_center == Vec3{0, 0, -2});

  CHECK_THROWS_AS(PumpModel::plane(0.0), Error);
  CHECK_THROWS_AS(PumpModel::spherical(1.0, 0.0), Error);
  CHECK_THROWS_AS(PumpModel::plane(1.0, {0, 0, 0}), Error);
}

TEST_CASE("error kinds have names") {
  CHECK(std::string(to_string(ErrorKind::ImageAtInfinity)) != "");
  const Error e(ErrorKind::Evanescent, "x");
  CHECK(e.kind() == ErrorKind::Evanescent);
}
