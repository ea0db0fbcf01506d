#include "qmghost/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace qmg {

namespace {

using LD = long double;

struct LineCrossing {
  Vec3L point;
  LD skew;
};

// Midpoint of the common perpendicular of two lines. The cross-product form
// avoids the a*c - b*b cancellation for nearly parallel lines.
LineCrossing closest_point(const Vec3L& p1, const Vec3L& d1, const Vec3L& p2, const Vec3L& d2) {
  const Vec3L n = cross(d1, d2);
  const LD den = dot(n, n);
  if (!(den > LD(1e-30) * dot(d1, d1) * dot(d2, d2)))
    throw Error(ErrorKind::NoIntersection, "idler rays are parallel: image at infinity");
  const Vec3L w = p2 - p1;
  const LD s = dot(cross(w, d2), n) / den;
  const LD t = dot(cross(w, d1), n) / den;
  const Vec3L q1 = p1 + d1 * s;
  const Vec3L q2 = p2 + d2 * t;
  return {(q1 + q2) * LD(0.5), norm(q1 - q2)};
}

struct OracleFrame {
  Vec3L vertex, e1, e2, axis;
};

OracleFrame oracle_frame(const PumpModel& pump) {
  const Frame f = Frame::from_axis(pump.axis);
  return {Vec3L(pump.vertex), Vec3L(f.e1), Vec3L(f.e2), Vec3L(f.axis)};
}

LineCrossing idler_crossing(const Vec3L& object, const OracleFrame& fr, const PumpModel& pump, LD omega_s,
                            LD separation, Pencil pencil) {
  const Vec3L split = (pencil == Pencil::Sagittal ? fr.e2 : fr.e1) * (separation / 2);
  const Vec3L x1 = fr.vertex - split;
  const Vec3L x2 = fr.vertex + split;
  auto idler_from = [&](const Vec3L& x) {
    RayL signal{x, normalized(object - x), omega_s, {}};
    return crossing_transform(signal, pump, x);
  };
  const RayL i1 = idler_from(x1);
  const RayL i2 = idler_from(x2);
  return closest_point(i1.origin, i1.direction, i2.origin, i2.direction);
}

}  // namespace

OracleResult raytrace_image_point(const SourcePoint& source, const PumpModel& pump, const ChiefAngles& chief,
                                  const OracleOptions& options) {
  pump.validate();
  if (source.p == 0) throw Error(ErrorKind::Domain, "object must not sit on the crystal plane");
  if (!(options.separation_rel > 0)) throw Error(ErrorKind::Domain, "separation must be positive");

  const OracleFrame fr = oracle_frame(pump);
  const LD p = source.p;
  const Vec3L object = fr.vertex + fr.axis * p + fr.e1 * (p * std::tan(LD(chief.theta_ps))) + fr.e2 * LD(source.h);
  const LD sep = LD(options.separation_rel) * std::abs(p);

  LineCrossing c = idler_crossing(object, fr, pump, source.omega_s, sep, options.pencil);
  if (options.extrapolate) {
    // Symmetric pair: the crossing is even in the separation, so one
    // Richardson step removes the leading sep^2 term.
    const LineCrossing half = idler_crossing(object, fr, pump, source.omega_s, sep / 2, options.pencil);
    c.point = (half.point * LD(4) - c.point) / LD(3);
    c.skew = std::max(c.skew, half.skew);
  }

  const Vec3L rel = c.point - fr.vertex;
  OracleResult out;
  out.q_hat = static_cast<double>(dot(rel, fr.axis));
  out.h_image_hat = static_cast<double>(dot(rel, fr.e2));
  out.x_image_hat = static_cast<double>(dot(rel, fr.e1));
  out.skew = static_cast<double>(c.skew);

  const double omega_i = pump.omega_p - source.omega_s;
  double q_law = 0, M_law = 0;
  if (pump.kind == PumpModel::Kind::Plane) {
    const ImagingSolution s = pqm_image(source.p / std::cos(chief.theta_ps), source.omega_s, omega_i);
    q_law = s.q * std::cos(chief.theta_pi);
    M_law = s.M;
  } else {
    SqmParams params;
    params.p = source.p;
    params.R = pump.R;
    params.omega_s = source.omega_s;
    params.omega_i = omega_i;
    params.theta_ps = chief.theta_ps;
    params.theta_pi = chief.theta_pi;
    params.h = source.h;
    const ImagingSolution s = sqm_image(params);
    q_law = s.q;
    M_law = s.M;
  }
  out.residual_q = std::abs(out.q_hat - q_law);
  out.residual_h = std::abs(out.h_image_hat - M_law * source.h);
  return out;
}

namespace {

PumpModel pump_for(const SqmParams& params) {
  const double omega_p = params.omega_s + params.omega_i;
  return std::isfinite(params.R) ? PumpModel::spherical(omega_p, params.R) : PumpModel::plane(omega_p);
}

}  // namespace

SqmResidual residual_sqm(const SqmParams& params, double h, const OracleOptions& options) {
  const PumpModel pump = pump_for(params);
  const OracleResult r = raytrace_image_point({h, params.p, params.omega_s}, pump,
                                              {params.theta_ps, params.theta_pi}, options);
  return {r.residual_q, r.residual_h};
}

SqmResidual residual_paraxial(double p, double R, double omega_s, double omega_i, double h,
                              const OracleOptions& options) {
  const PumpModel pump = PumpModel::spherical(omega_s + omega_i, R);
  OracleOptions opts = options;
  opts.pencil = Pencil::Meridional;
  const double theta_ps = std::atan2(std::abs(h), p);
  const OracleResult r = raytrace_image_point({0.0, p, omega_s}, pump, {theta_ps, 0.0}, opts);
  const ImagingSolution law = sqm_image_paraxial(p, R, omega_s, omega_i);
  // The object tip sits at p * tan(theta_ps) = |h| along e1.
  return {std::abs(r.q_hat - law.q), std::abs(r.x_image_hat - law.M * std::abs(h))};
}

FitResult fit_loglog(std::span<const double> x, std::span<const double> y, double floor) {
  if (x.size() != y.size()) throw Error(ErrorKind::Domain, "fit_loglog: size mismatch");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(y[i] > floor) || !(x[i] > 0)) continue;
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  FitResult fit;
  fit.points = lx.size();
  if (lx.size() < 3) {
    fit.degenerate = true;
    return fit;
  }
  const double n = static_cast<double>(lx.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = syy > 0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return fit;
}

ConvergenceReport convergence_order(const SqmParams& params, std::span<const double> h_list,
                                    const OracleOptions& options) {
  if (h_list.size() < 4) throw Error(ErrorKind::Domain, "convergence_order needs at least four heights");
  const auto [lo, hi] = std::minmax_element(h_list.begin(), h_list.end());
  if (!(*lo > 0) || *hi / *lo < 100 - 1e-9)
    throw Error(ErrorKind::Domain, "heights must be positive and span two decades");
  if (*hi > params.p / 10) throw Error(ErrorKind::Domain, "heights must stay well below p");

  ConvergenceReport report;
  std::vector<double> dq, dh;
  for (double h : h_list) {
    const SqmResidual r = residual_sqm(params, h, options);
    report.residuals.push_back(r);
    dq.push_back(r.dq);
    dh.push_back(r.dh);
  }
  const double floor = kResidualFloorRel * std::abs(params.p);
  report.q = fit_loglog(h_list, dq, floor);
  report.h = fit_loglog(h_list, dh, floor);
  return report;
}

double mirror_calibration_deviation(double R, std::span<const double> p_values) {
  const PumpModel pump = PumpModel::spherical(1.0, R);
  double worst = 0;
  for (double p : p_values) {
    const OracleResult r = raytrace_image_point({1e-6 * p, p, 0.5}, pump, {0, 0});
    const double lhs = 1 / p + 1 / r.q_hat;
    worst = std::max(worst, std::abs(lhs - 2 / R) / std::abs(2 / R));
  }
  return worst;
}

FitResult plane_limit_order(const SqmParams& params, std::span<const double> R_values) {
  const double a = params.omega_s * std::cos(params.theta_ps);
  const double b = params.omega_i * std::cos(params.theta_pi);
  const double q_plane = -params.p * b / a;
  std::vector<double> inv_r, dev;
  for (double R : R_values) {
    SqmParams s = params;
    s.R = R;
    inv_r.push_back(1 / std::abs(R));
    dev.push_back(std::abs(sqm_image(s).q - q_plane) / std::abs(q_plane));
  }
  return fit_loglog(inv_r, dev, 0.0);
}

SqmParams random_sqm_case(std::uint64_t seed, std::uint64_t index) {
  CounterRng rng(seed, index);
  for (;;) {
    const double R = (rng.uniform() < 0.75 ? 1.0 : -1.0) * std::exp(std::log(0.5) + rng.uniform() * std::log(4.0));
    const double p = std::abs(R) * std::exp(std::log(0.3) + rng.uniform() * std::log(10.0 / 0.3));
    const double omega_s = 0.2 + 0.6 * rng.uniform();
    const double omega_i = 1.0 - omega_s;
    const double theta_ps = 0.6 * rng.uniform();
    if (omega_s * std::sin(theta_ps) / omega_i > 0.8) continue;
    const SqmParams params = matched_sqm_params(p, R, omega_s, omega_i, theta_ps);
    const double a = omega_s * std::cos(theta_ps), b = omega_i * std::cos(params.theta_pi);
    const double denom = (a + b) / R - a / p;
    if (denom == 0) continue;
    const double q = b / denom;
    if (std::abs(q) < 0.02 * p || std::abs(q) > 50 * p) continue;
    return params;
  }
}

namespace {

SweepRow sweep_one(const SqmParams& params, std::span<const double> h_rel, const OracleOptions& options) {
  std::vector<double> h(h_rel.begin(), h_rel.end());
  for (auto& v : h) v *= params.p;
  return {params, convergence_order(params, h, options)};
}

}  // namespace

std::vector<SweepRow> run_law_sweep_serial(std::span<const SqmParams> cases, std::span<const double> h_rel,
                                           const OracleOptions& options) {
  std::vector<SweepRow> rows;
  rows.reserve(cases.size());
  for (const auto& c : cases) rows.push_back(sweep_one(c, h_rel, options));
  return rows;
}

std::vector<SweepRow> run_law_sweep(std::span<const SqmParams> cases, std::span<const double> h_rel, int workers,
                                    const OracleOptions& options) {
  std::vector<SweepRow> rows(cases.size());
  const auto n = static_cast<std::int64_t>(cases.size());
  bool failed = false;
  Error first_error(ErrorKind::Domain, "");
#pragma omp parallel for schedule(dynamic, 8) num_threads(std::max(1, workers))
  for (std::int64_t i = 0; i < n; ++i) {
    try {
      rows[i] = sweep_one(cases[i], h_rel, options);
    } catch (const Error& e) {
#pragma omp critical(qmg_sweep_error)
      if (!failed) {
        failed = true;
        first_error = e;
      }
    }
  }
  if (failed) throw first_error;
  return rows;
}

std::string residual_sweep_csv(std::span<const SweepRow> rows, std::span<const double> h_rel,
                               const std::string& config_hash, std::uint64_t seed) {
  char buf[512];
  std::snprintf(buf, sizeof buf, "# seed=%llu config_hash=%s\n", static_cast<unsigned long long>(seed),
                config_hash.c_str());
  std::string out = buf;
  out += "case,p,R,omega_s,omega_i,theta_ps,theta_pi";
  for (std::size_t k = 0; k < h_rel.size(); ++k) {
    std::snprintf(buf, sizeof buf, ",dq_h%zu,dh_h%zu", k, k);
    out += buf;
  }
  out += ",slope_q,r2_q,slope_h,degenerate_q\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& s = rows[i].params;
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g", i, s.p, s.R, s.omega_s, s.omega_i,
                  s.theta_ps, s.theta_pi);
    out += buf;
    for (const auto& r : rows[i].report.residuals) {
      std::snprintf(buf, sizeof buf, ",%.17g,%.17g", r.dq, r.dh);
      out += buf;
    }
    const auto& rep = rows[i].report;
    std::snprintf(buf, sizeof buf, ",%.17g,%.17g,%.17g,%d\n", rep.q.slope, rep.q.r2, rep.h.slope,
                  rep.q.degenerate ? 1 : 0);
    out += buf;
  }
  return out;
}

}  // namespace qmg
