#include "qmghost/mirror.hpp"

#include <numbers>

namespace qmg {

namespace {

void require_frequencies(double omega_s, double omega_i) {
  if (!(omega_s > 0) || !(omega_i > 0))
    throw Error(ErrorKind::FrequencyDomain, "signal and idler frequencies must be positive");
}

void require_angle(double theta, const char* name) {
  if (!(theta >= 0) || !(theta < std::numbers::pi / 2))
    throw Error(ErrorKind::Domain, std::string(name) + " must lie in [0, pi/2)");
}

}  // namespace

double matched_idler_angle(double omega_s, double omega_i, double theta_ps) {
  require_frequencies(omega_s, omega_i);
  require_angle(theta_ps, "theta_ps");
  const double s = omega_s * std::sin(theta_ps) / omega_i;
  if (!(s < 1)) throw Error(ErrorKind::Evanescent, "no real idler angle matches theta_ps");
  return std::asin(s);
}

SqmParams matched_sqm_params(double p, double R, double omega_s, double omega_i,
                             double theta_ps, double h) {
  SqmParams params;
  params.p = p;
  params.R = R;
  params.omega_s = omega_s;
  params.omega_i = omega_i;
  params.theta_ps = theta_ps;
  params.theta_pi = matched_idler_angle(omega_s, omega_i, theta_ps);
  params.h = h;
  return params;
}

ImagingSolution sqm_image(const SqmParams& params) {
  if (!(params.p > 0)) throw Error(ErrorKind::Domain, "object distance p must be positive");
  if (params.R == 0 || !std::isfinite(params.R))
    throw Error(ErrorKind::Domain, "sqm_image needs a finite nonzero R");
  require_frequencies(params.omega_s, params.omega_i);
  require_angle(params.theta_ps, "theta_ps");
  require_angle(params.theta_pi, "theta_pi");

  const double a = params.omega_s * std::cos(params.theta_ps);
  const double b = params.omega_i * std::cos(params.theta_pi);
  // a/p + b/q = (a + b)/R
  const double denom = (a + b) / params.R - a / params.p;
  if (denom == 0) throw Error(ErrorKind::ImageAtInfinity, "spherical quantum mirror: image at infinity");

  ImagingSolution sol;
  sol.q = b / denom;
  sol.M = -sol.q * a / (params.p * b);
  sol.h_image = sol.M * params.h;
  return sol;
}

ImagingSolution sqm_image_paraxial(double p, double R, double omega_s, double omega_i) {
  if (!(p > 0)) throw Error(ErrorKind::Domain, "object distance p must be positive");
  if (R == 0 || !std::isfinite(R)) throw Error(ErrorKind::Domain, "sqm_image_paraxial needs a finite nonzero R");
  require_frequencies(omega_s, omega_i);

  const double denom = (omega_s + omega_i) / R - omega_s / p;
  if (denom == 0) throw Error(ErrorKind::ImageAtInfinity, "spherical quantum mirror: image at infinity");

  ImagingSolution sol;
  sol.q = omega_i / denom;
  sol.M = -sol.q * omega_s / (p * omega_i);
  return sol;
}

ImagingSolution pqm_image(double Z_s, double omega_s, double omega_i) {
  if (!(Z_s > 0)) throw Error(ErrorKind::Domain, "Z_s must be positive");
  require_frequencies(omega_s, omega_i);
  ImagingSolution sol;
  sol.q = -Z_s * omega_i / omega_s;
  // -omega_s Z_i / (omega_i Z_s) reduces to 1 once Z_i is substituted.
  sol.M = 1.0;
  return sol;
}

ImagingSolution ghost_thin_lens(double S_o, double f) {
  if (!(S_o > 0) || !(f > 0)) throw Error(ErrorKind::Domain, "ghost_thin_lens needs S_o > 0 and f > 0");
  if (S_o == f) throw Error(ErrorKind::ImageAtInfinity, "object at the focal plane: image at infinity");
  ImagingSolution sol;
  sol.q = S_o * f / (S_o - f);
  sol.M = sol.q / S_o;
  return sol;
}

}  // namespace qmg
