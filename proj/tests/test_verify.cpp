#include <cmath>
#include <vector>

#include "doctest.h"
#include "qmghost/verify.hpp"

using namespace qmg;

namespace {

constexpr double kQ = 0.4561161523465056;  // frozen high-precision oracle value
constexpr double kM = -0.5438838476534944;

const SqmParams& generic_case() {
  static const SqmParams p = matched_sqm_params(2.0, 1.0, 2.0, 1.0, std::asin(0.3));
  return p;
}

}  // namespace

TEST_CASE("fitter self-test") {
  const std::vector<double> h{1e-5, 1e-4, 1e-3, 1e-2};
  std::vector<double> r;
  for (double v : h) r.push_back(v * v);
  FitResult f = fit_loglog(h, r, 0);
  CHECK(f.slope == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(f.r2 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_FALSE(f.degenerate);

  f = fit_loglog(h, r, 1e-7);  // only two points above the floor
  CHECK(f.degenerate);
  CHECK(f.points == 2);
}

TEST_CASE("oracle: degenerate plane pump images at -Z_s with M = 1") {
  const PumpModel plane = PumpModel::plane(1.0);
  for (double h : {1e-6, 1e-3, 0.05}) {
    const OracleResult r = raytrace_image_point({h, 0.5, 0.5}, plane, {0, 0});
    CHECK(std::abs(r.q_hat + 0.5) < 1e-12 * 0.5);
    CHECK(std::abs(r.h_image_hat - h) < 1e-12 * 0.5);
    CHECK(r.residual_q < 1e-12 * 0.5);
  }
  // Tilted chief ray: the law is exact at any height.
  const SqmParams tilted = matched_sqm_params(0.8, INFINITY, 0.5, 0.5, 0.4);
  for (double h : {1e-6, 1e-3, 0.05}) {
    const SqmResidual r = residual_sqm(tilted, h * 0.8);
    CHECK(r.dq < 1e-12 * 0.8);
    CHECK(r.dh < 1e-12 * 0.8);
  }
}

TEST_CASE("oracle: center of curvature images onto itself, inverted") {
  const double R = 1.5;
  const PumpModel pump = PumpModel::spherical(1.0, R);
  const double h = 1e-6 * R;
  const OracleResult r = raytrace_image_point({h, R, 0.5}, pump, {0, 0});
  CHECK(std::abs(r.q_hat - R) < 1e-9 * R);
  CHECK(std::abs(r.h_image_hat + h) < 1e-9 * R);
  CHECK(r.residual_q < 1e-9 * R);
  CHECK(r.residual_h < 1e-9 * R);
}

TEST_CASE("oracle reproduces the frozen generic case") {
  const SqmParams& c = generic_case();
  const PumpModel pump = PumpModel::spherical(3.0, 1.0);
  const OracleResult r = raytrace_image_point({1e-6 * c.p, c.p, c.omega_s}, pump, {c.theta_ps, c.theta_pi});
  CHECK(std::abs(r.q_hat - kQ) < 1e-9);
  CHECK(std::abs(r.h_image_hat - kM * 1e-6 * c.p) < 1e-12);
  // The chief ray itself lands at M times the object's e1 offset.
  CHECK(std::abs(r.x_image_hat - kM * c.p * std::tan(c.theta_ps)) < 1e-9);
  // The two idler lines of a finite pencil are slightly skew (astigmatism);
  // the gap shrinks linearly with the pencil width.
  CHECK(r.skew < 1e-9 * c.p);
  OracleOptions narrow;
  narrow.separation_rel = 1e-5;
  const OracleResult rn = raytrace_image_point({1e-6 * c.p, c.p, c.omega_s}, pump, {c.theta_ps, c.theta_pi}, narrow);
  CHECK(r.skew / rn.skew == doctest::Approx(10.0).epsilon(0.02));
}

TEST_CASE("residual scaling in h") {
  const SqmParams& c = generic_case();
  const double h = 1e-3 * c.p;
  const SqmResidual full = residual_sqm(c, h);
  const SqmResidual half = residual_sqm(c, h / 2);
  CHECK(full.dq / half.dq == doctest::Approx(4.0).epsilon(0.01));
  // Height residual is odd in h, so its leading term is cubic.
  CHECK(full.dh / half.dh == doctest::Approx(8.0).epsilon(0.01));

  // Object tip in the plane of incidence, paraxial laws: q quadratic, height
  // again odd in h and so cubic.
  const double hp = 1e-3 * 2.0;
  const SqmResidual pf = residual_paraxial(2.0, 1.0, 2.0, 1.0, hp);
  const SqmResidual ph = residual_paraxial(2.0, 1.0, 2.0, 1.0, hp / 2);
  CHECK(pf.dq / ph.dq == doctest::Approx(4.0).epsilon(0.02));
  CHECK(pf.dh / ph.dh == doctest::Approx(8.0).epsilon(0.02));
  CHECK(residual_paraxial(2.0, 1.0, 2.0, 1.0, 1e-5 * 2.0).dq < 1e-8);
}

TEST_CASE("degenerate symmetric cases sit near the floor") {
  for (double R : {0.5, 1.0, 3.0}) {
    const SqmParams p = matched_sqm_params(R, R, 0.5, 0.5, 0.0);
    CHECK(residual_sqm(p, 1e-6 * R).dq < 1e-9 * R);
  }
}

TEST_CASE("convergence order") {
  const SqmParams& c = generic_case();
  const std::vector<double> h{1e-5 * c.p, 1e-4 * c.p, 1e-3 * c.p, 1e-2 * c.p};
  const ConvergenceReport rep = convergence_order(c, h);
  CHECK(rep.q.slope == doctest::Approx(2.0).epsilon(0.05));
  CHECK(rep.q.r2 > 0.999);
  CHECK(rep.h.slope == doctest::Approx(3.0).epsilon(0.05));
  CHECK(rep.residuals.size() == 4);

  // Exact case: residuals at the floor, reported as a degenerate fit.
  const SqmParams plane = matched_sqm_params(0.5, INFINITY, 0.5, 0.5, 0.3);
  const std::vector<double> hp{5e-6, 5e-5, 5e-4, 5e-3};
  const ConvergenceReport exact = convergence_order(plane, hp);
  CHECK(exact.q.degenerate);
  CHECK(exact.h.degenerate);

  // A non-degenerate plane mirror is not stigmatic: quadratic again.
  const SqmParams skewed = matched_sqm_params(0.5, INFINITY, 0.6, 0.4, 0.3);
  CHECK(convergence_order(skewed, hp).q.slope == doctest::Approx(2.0).epsilon(0.05));

  const std::vector<double> few{1e-5, 1e-4, 1e-3};
  CHECK_THROWS_AS(convergence_order(c, few), Error);
  const std::vector<double> narrow{1e-4, 2e-4, 4e-4, 8e-4};
  CHECK_THROWS_AS(convergence_order(c, narrow), Error);
  const std::vector<double> large{1e-3, 1e-2, 1e-1, 1.0};
  CHECK_THROWS_AS(convergence_order(c, large), Error);
}

TEST_CASE("mirror calibration and plane limit") {
  const double ps[] = {0.6, 1.0, 2.5, 5.0, 10.0};
  for (double R : {0.5, 1.0, 2.0}) {
    std::vector<double> scaled;
    for (double p : ps) scaled.push_back(p * R);
    CHECK(mirror_calibration_deviation(R, scaled) < 1e-9);
  }
  const double Rs[] = {1e2, 1e3, 1e4, 1e5, 1e6};
  const FitResult f = plane_limit_order(matched_sqm_params(1.0, 1.0, 0.7, 0.3, 0.2), Rs);
  CHECK(f.slope == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("oracle reports parallel idler rays") {
  // On-axis object at the focal point, tiny pencil: the idler pair leaves parallel.
  const PumpModel pump = PumpModel::spherical(1.0, 2.0);
  OracleOptions opts;
  opts.separation_rel = 1e-7;
  opts.extrapolate = false;
  try {
    raytrace_image_point({0.0, 1.0, 0.5}, pump, {0, 0}, opts);
    FAIL("expected parallel idler rays");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NoIntersection);
  }
  CHECK_THROWS_AS(raytrace_image_point({0.0, 0.0, 0.5}, pump, {0, 0}), Error);
}

TEST_CASE("random cases and sweeps") {
  const SqmParams a = random_sqm_case(3, 17);
  const SqmParams b = random_sqm_case(3, 17);
  CHECK(a.p == b.p);
  CHECK(a.R == b.R);
  CHECK(a.omega_s + a.omega_i == doctest::Approx(1.0));

  std::vector<SqmParams> cases;
  for (int i = 0; i < 64; ++i) cases.push_back(random_sqm_case(3, i));
  const std::vector<double> h_rel{1e-5, 1e-4, 1e-3, 1e-2};
  const auto serial = run_law_sweep_serial(cases, h_rel);
  const auto par = run_law_sweep(cases, h_rel, 4);
  CHECK(residual_sweep_csv(serial, h_rel, "abc", 3) == residual_sweep_csv(par, h_rel, "abc", 3));
  for (const auto& row : serial) {
    if (row.report.q.degenerate) continue;
    CHECK(row.report.q.slope == doctest::Approx(2.0).epsilon(0.05));
  }
}
