#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qmghost/mirror.hpp"

namespace qmg {

/// Object point for the brute-force oracle. It sits at axial distance p from
/// the crystal plane, on the signal chief ray leaving the vertex at theta_ps
/// (tilt along the frame's e1), displaced by h along e2.
struct SourcePoint {
  double h = 0;
  double p = 1;
  double omega_s = 0.5;
};

struct ChiefAngles {
  double theta_ps = 0;
  double theta_pi = 0;
};

enum class Pencil {
  Sagittal,    // crystal points split along e2, across the plane of incidence
  Meridional,  // crystal points split along e1, in the plane of incidence
};

struct OracleOptions {
  double separation_rel = 1e-4;  // crystal-point separation / p
  bool extrapolate = true;       // Richardson step in the separation
  Pencil pencil = Pencil::Sagittal;
};

struct OracleResult {
  double q_hat = 0;        // axial coordinate of the idler crossing point
  double h_image_hat = 0;  // its e2 coordinate
  double x_image_hat = 0;  // its e1 coordinate (chief-ray image)
  double skew = 0;         // closest distance between the two idler lines
  double residual_q = 0;
  double residual_h = 0;
};

/// Casts two signal rays from the object point to two crystal points around
/// the vertex, maps each through crossing_transform with the local pump, and
/// intersects the idler lines (closest-point midpoint). Residuals are against
/// sqm_image, or pqm_image for a plane pump.
OracleResult raytrace_image_point(const SourcePoint& source, const PumpModel& pump,
                                  const ChiefAngles& chief, const OracleOptions& options = {});

struct SqmResidual {
  double dq = 0;
  double dh = 0;
};

/// Oracle-vs-law residuals at object height h. A non-finite params.R selects a
/// plane pump.
SqmResidual residual_sqm(const SqmParams& params, double h, const OracleOptions& options = {});

/// Object tip at height h in the plane of incidence, chief ray through the
/// vertex, meridional pencil; residuals against the paraxial laws.
SqmResidual residual_paraxial(double p, double R, double omega_s, double omega_i, double h,
                              const OracleOptions& options = {});

struct FitResult {
  double slope = 0;
  double intercept = 0;
  double r2 = 0;
  std::size_t points = 0;
  bool degenerate = false;  // fewer than three residuals above the floor
};

/// Least-squares slope of log(y) against log(x), ignoring y below `floor`.
FitResult fit_loglog(std::span<const double> x, std::span<const double> y, double floor);

struct ConvergenceReport {
  FitResult q;
  FitResult h;
  std::vector<SqmResidual> residuals;
};

/// h_list needs at least four values spanning two decades, all below p / 10.
ConvergenceReport convergence_order(const SqmParams& params, std::span<const double> h_list,
                                    const OracleOptions& options = {});

/// Residual floor used by convergence_order, relative to p.
inline constexpr double kResidualFloorRel = 1e-13;

/// Degenerate symmetric oracle against 1/p + 1/q = 2/R; returns the largest
/// relative deviation over the given object distances.
double mirror_calibration_deviation(double R, std::span<const double> p_values);

/// Fitted order of |q(R) - q_plane| / |q_plane| in 1/R for sqm_image.
FitResult plane_limit_order(const SqmParams& params, std::span<const double> R_values);

/// Random SQM cases with matched chief angles, a pure function of (seed, index).
SqmParams random_sqm_case(std::uint64_t seed, std::uint64_t index);

struct SweepRow {
  SqmParams params;
  ConvergenceReport report;
};

std::vector<SweepRow> run_law_sweep(std::span<const SqmParams> cases, std::span<const double> h_rel,
                                    int workers, const OracleOptions& options = {});
std::vector<SweepRow> run_law_sweep_serial(std::span<const SqmParams> cases, std::span<const double> h_rel,
                                           const OracleOptions& options = {});

std::string residual_sweep_csv(std::span<const SweepRow> rows, std::span<const double> h_rel,
                               const std::string& config_hash, std::uint64_t seed);

}  // namespace qmg
