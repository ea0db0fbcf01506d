#include "qmghost/core.hpp"

namespace qmg {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Domain: return "domain";
    case ErrorKind::DegenerateGeometry: return "degenerate-geometry";
    case ErrorKind::FrequencyDomain: return "frequency-domain";
    case ErrorKind::Evanescent: return "evanescent";
    case ErrorKind::ImageAtInfinity: return "image-at-infinity";
    case ErrorKind::NonAdvancing: return "non-advancing";
    case ErrorKind::UnsupportedFold: return "unsupported-fold";
    case ErrorKind::NoIntersection: return "no-intersection";
    case ErrorKind::NoFeature: return "no-feature";
    case ErrorKind::UndefinedContrast: return "undefined-contrast";
    case ErrorKind::SamplingExhausted: return "sampling-exhausted";
    case ErrorKind::Config: return "config";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

Frame Frame::from_axis(const Vec3& axis_in) {
  Frame f;
  f.axis = normalized(axis_in);
  // Pick the lab axis least aligned with the optical axis as the seed for e1,
  // so that axis = +z reproduces the lab x/y basis exactly.
  const Vec3 seed = std::abs(f.axis.x) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
  f.e1 = normalized(transverse_part(seed, f.axis));
  f.e2 = cross(f.axis, f.e1);
  return f;
}

PumpModel PumpModel::plane(double omega_p, Vec3 axis, Vec3 vertex) {
  PumpModel p;
  p.kind = Kind::Plane;
  p.omega_p = omega_p;
  p.axis = normalized(axis);
  p.vertex = vertex;
  p.validate();
  return p;
}

PumpModel PumpModel::spherical(double omega_p, double R, Vec3 axis, Vec3 vertex) {
  PumpModel p;
  p.kind = Kind::Spherical;
  p.omega_p = omega_p;
  p.axis = normalized(axis);
  p.vertex = vertex;
  p.R = R;
  p.curvature_center = vertex + p.axis * R;
  p.validate();
  return p;
}

void PumpModel::validate() const {
  if (!(omega_p > 0) || !std::isfinite(omega_p))
    throw Error(ErrorKind::Domain, "pump omega_p must be positive and finite");
  if (std::abs(norm(axis) - 1.0) > 1e-12)
    throw Error(ErrorKind::Domain, "pump axis must be a unit vector");
  if (kind == Kind::Spherical && (R == 0.0 || !std::isfinite(R)))
    throw Error(ErrorKind::Domain, "spherical pump needs a finite nonzero R");
}

}  // namespace qmg
