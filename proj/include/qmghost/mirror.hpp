#pragma once

#include <optional>

#include "qmghost/core.hpp"
#include "qmghost/spdc.hpp"

namespace qmg {

/// Crossing-symmetric transform of a signal ray into the idler it is paired
/// with at `crystal_point`: omega -> omega_p - omega, transverse wavevector
/// (relative to the local pump direction) negated, longitudinal part on-shell
/// and forward. The signal is given in its forward orientation, leaving the
/// crystal. Applying the transform twice returns the input ray.
template <std::floating_point T>
RayT<T> crossing_transform(const RayT<T>& signal, const PumpModel& pump,
                           const Vec3T<T>& crystal_point,
                           UnitSystem units = UnitSystem::normalized()) {
  const T omega_p = static_cast<T>(pump.omega_p);
  if (!(signal.omega > T(0)) || !(signal.omega < omega_p))
    throw Error(ErrorKind::FrequencyDomain, "signal frequency must lie in (0, omega_p)");

  // The signal line must pass through the crystal point.
  const Vec3T<T> offset = crystal_point - signal.origin;
  const T miss = norm(cross(offset, signal.direction));
  if (miss > T(1e-9) * std::max(T(1), norm(offset)))
    throw Error(ErrorKind::Domain, "signal ray does not pass through the crystal point");

  const Vec3T<T> kp = local_pump_wavevector(pump, crystal_point, units);
  const T c = static_cast<T>(units.c);
  const Vec3T<T> u = kp / (omega_p / c);
  const Vec3T<T> ks = wavevector(signal, units);
  if (!(dot(ks, u) > T(0)))
    throw Error(ErrorKind::Domain, "signal must propagate forward relative to the local pump");

  const Vec3T<T> kt = transverse_part(ks, u);
  const T omega_i = omega_p - signal.omega;
  const T ki = omega_i / c;
  const T t2 = dot(kt, kt);
  if (!(t2 < ki * ki))
    throw Error(ErrorKind::Evanescent, "idler transverse momentum exceeds omega_i / c");
  const Vec3T<T> k_idler = -kt + u * std::sqrt(ki * ki - t2);

  RayT<T> idler;
  idler.origin = crystal_point;
  idler.direction = normalized(k_idler);
  idler.omega = omega_i;
  idler.pol = PolTag{signal.pol.label, !signal.pol.conjugated};
  return idler;
}

struct SqmParams {
  double p = 1;        // object distance from the crystal plane
  double R = 1;        // pump curvature radius (signed)
  double omega_s = 0.5;
  double omega_i = 0.5;
  double theta_ps = 0;  // chief signal angle to the pump axis
  double theta_pi = 0;  // chief idler angle to the pump axis
  double h = 0;         // object height

  double omega_p() const { return omega_s + omega_i; }
};

struct ImagingSolution {
  double q = 0;  // image distance; negative means a virtual image behind the mirror plane
  double M = 0;  // transverse magnification
  std::optional<double> h_image;
};

/// Idler chief angle fixed by transverse matching: omega_s sin(theta_ps) = omega_i sin(theta_pi).
double matched_idler_angle(double omega_s, double omega_i, double theta_ps);

/// Builds SqmParams with theta_pi derived from theta_ps.
SqmParams matched_sqm_params(double p, double R, double omega_s, double omega_i,
                             double theta_ps, double h = 0);

ImagingSolution sqm_image(const SqmParams& params);
ImagingSolution sqm_image_paraxial(double p, double R, double omega_s, double omega_i);

/// Plane quantum mirror: Z_s, Z_i are distances along the chief rays.
ImagingSolution pqm_image(double Z_s, double omega_s, double omega_i);

/// Thin lens in front of a plane quantum mirror; q holds S_i.
ImagingSolution ghost_thin_lens(double S_o, double f);

}  // namespace qmg
