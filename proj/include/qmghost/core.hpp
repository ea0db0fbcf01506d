#pragma once

#include <cmath>
#include <concepts>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace qmg {

enum class ErrorKind {
  Domain,              // argument outside an operation's domain
  DegenerateGeometry,  // e.g. crystal point at the pump's curvature center
  FrequencyDomain,     // signal frequency at or above the pump frequency
  Evanescent,          // required transverse momentum exceeds |k|
  ImageAtInfinity,
  NonAdvancing,        // ray does not move toward the next plane
  UnsupportedFold,
  NoIntersection,
  NoFeature,
  UndefinedContrast,
  SamplingExhausted,
  Config,
  Io,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

template <std::floating_point T>
struct Vec3T {
  T x{}, y{}, z{};

  constexpr Vec3T() = default;
  constexpr Vec3T(T x_, T y_, T z_) : x(x_), y(y_), z(z_) {}

  template <std::floating_point U>
  constexpr explicit Vec3T(const Vec3T<U>& o)
      : x(static_cast<T>(o.x)), y(static_cast<T>(o.y)), z(static_cast<T>(o.z)) {}

  constexpr Vec3T operator+(const Vec3T& o) const { return {x + o.x, y + o.y, z + o.z}; }
  constexpr Vec3T operator-(const Vec3T& o) const { return {x - o.x, y - o.y, z - o.z}; }
  constexpr Vec3T operator-() const { return {-x, -y, -z}; }
  constexpr Vec3T operator*(T s) const { return {x * s, y * s, z * s}; }
  constexpr Vec3T operator/(T s) const { return {x / s, y / s, z / s}; }
  constexpr Vec3T& operator+=(const Vec3T& o) { x += o.x; y += o.y; z += o.z; return *this; }
  constexpr bool operator==(const Vec3T&) const = default;
};

template <std::floating_point T>
constexpr Vec3T<T> operator*(T s, const Vec3T<T>& v) { return v * s; }

template <std::floating_point T>
constexpr T dot(const Vec3T<T>& a, const Vec3T<T>& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

template <std::floating_point T>
constexpr Vec3T<T> cross(const Vec3T<T>& a, const Vec3T<T>& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

template <std::floating_point T>
T norm(const Vec3T<T>& v) { return std::hypot(v.x, v.y, v.z); }

template <std::floating_point T>
Vec3T<T> normalized(const Vec3T<T>& v) {
  const T n = norm(v);
  if (!(n > T(0))) throw Error(ErrorKind::Domain, "cannot normalize a zero vector");
  return v / n;
}

using Vec3 = Vec3T<double>;
using Vec3L = Vec3T<long double>;

struct Vec2 {
  double x{}, y{};
  bool operator==(const Vec2&) const = default;
};

/// Speed of light in the active unit system. Normalized mode uses c = 1 with
/// frequencies expressed in units of the pump frequency.
struct UnitSystem {
  enum class Mode { Normalized, SI };
  Mode mode = Mode::Normalized;
  double c = 1.0;

  static constexpr UnitSystem normalized() { return {Mode::Normalized, 1.0}; }
  static constexpr UnitSystem si() { return {Mode::SI, 299792458.0}; }
};

/// Inert polarization label. It travels with a ray and is never transformed
/// except for the conjugation flag toggled by the crossing transform.
struct PolTag {
  std::uint32_t label = 0;
  bool conjugated = false;
  bool operator==(const PolTag&) const = default;
};

template <std::floating_point T>
struct RayT {
  Vec3T<T> origin;
  Vec3T<T> direction;  // unit norm
  T omega{};
  PolTag pol{};

  /// Throws Domain if direction is not unit (1e-12) or omega is not positive.
  void validate() const {
    if (!(omega > T(0))) throw Error(ErrorKind::Domain, "ray omega must be positive");
    if (std::abs(norm(direction) - T(1)) > T(1e-12))
      throw Error(ErrorKind::Domain, "ray direction must have unit norm");
  }
};

using Ray = RayT<double>;
using RayL = RayT<long double>;

template <std::floating_point T>
Vec3T<T> wavevector(const RayT<T>& ray, UnitSystem units = UnitSystem::normalized()) {
  return ray.direction * (ray.omega / static_cast<T>(units.c));
}

/// Angle in [0, pi] between v and a unit axis.
template <std::floating_point T>
T angle_to_axis(const Vec3T<T>& v, const Vec3T<T>& axis) {
  const T n = norm(v);
  if (!(n > T(0))) throw Error(ErrorKind::Domain, "angle_to_axis: zero vector");
  // atan2 of the cross/dot pair keeps precision near 0 and pi where acos does not.
  return std::atan2(norm(cross(v, axis)), dot(v, axis));
}

/// Component of v perpendicular to the unit vector u.
template <std::floating_point T>
Vec3T<T> transverse_part(const Vec3T<T>& v, const Vec3T<T>& u) {
  return v - u * dot(v, u);
}

/// Right-handed orthonormal frame (e1, e2, axis). For axis = +z this is the
/// lab frame.
struct Frame {
  Vec3 e1{1, 0, 0};
  Vec3 e2{0, 1, 0};
  Vec3 axis{0, 0, 1};

  static Frame from_axis(const Vec3& axis);

  Vec3 to_local(const Vec3& v) const { return {dot(v, e1), dot(v, e2), dot(v, axis)}; }
  Vec3 to_world(const Vec3& v) const { return e1 * v.x + e2 * v.y + axis * v.z; }
};

struct PumpModel {
  enum class Kind { Plane, Spherical };

  Kind kind = Kind::Plane;
  Vec3 axis{0, 0, 1};
  double omega_p = 1.0;
  // Point where the pump axis pierces the crystal plane.
  Vec3 vertex{0, 0, 0};
  // Spherical only. R > 0: the wave converges toward curvature_center, which
  // sits downstream at vertex + R * axis (concave quantum mirror). R < 0: the
  // wave diverges from a center upstream of the crystal (convex).
  Vec3 curvature_center{0, 0, 0};
  double R = 0.0;

  static PumpModel plane(double omega_p, Vec3 axis = {0, 0, 1}, Vec3 vertex = {0, 0, 0});
  static PumpModel spherical(double omega_p, double R, Vec3 axis = {0, 0, 1},
                             Vec3 vertex = {0, 0, 0});

  void validate() const;
};

struct PhotonPair {
  Ray signal;
  Ray idler;
  Vec3 birth_point;
  Vec3 local_pump_k;
};

}  // namespace qmg
