#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qmghost/optics.hpp"
#include "qmghost/spdc.hpp"

namespace qmg {

struct Histogram2D {
  int nx = 0;
  int ny = 0;
  double pitch = 0;
  std::vector<std::uint64_t> counts;  // row-major, index iy * nx + ix

  Histogram2D() = default;
  Histogram2D(int nx_, int ny_, double pitch_)
      : nx(nx_), ny(ny_), pitch(pitch_), counts(static_cast<std::size_t>(nx_) * ny_, 0) {}

  std::uint64_t& at(int ix, int iy) { return counts[static_cast<std::size_t>(iy) * nx + ix]; }
  std::uint64_t at(int ix, int iy) const { return counts[static_cast<std::size_t>(iy) * nx + ix]; }
  std::uint64_t total() const;
  Histogram2D& operator+=(const Histogram2D& o);
  bool operator==(const Histogram2D&) const = default;
};

/// Optional Poisson background, added per pixel after pair accumulation.
/// Accidental coincidences also register as idler singles.
struct Background {
  double dark_mean_per_pixel = 0;
  double accidental_mean_per_pixel = 0;
};

struct Scene {
  PumpModel pump;
  SpdcConfig spdc;
  Arm signal_arm;
  Arm idler_arm;
  std::uint64_t n_pairs = 0;
  std::uint64_t seed = 0;
  Background background;

  /// Throws Config for structural problems: idler-arm masks, a signal arm not
  /// ending in a bucket, an idler arm without a scanning detector, or arms
  /// anchored on different planes.
  void validate() const;
  const ScanningDetector& detector() const;
};

struct CoincidenceImage {
  Histogram2D coincidence;
  Histogram2D singles_idler;
  std::uint64_t singles_signal_bucket = 0;
  std::uint64_t n_emitted = 0;

  bool operator==(const CoincidenceImage&) const = default;
};

CoincidenceImage run_simulation(const Scene& scene, int workers);
CoincidenceImage run_simulation_serial(const Scene& scene);

/// Klyshko single-arm run: each sampled idler is carried to its detector
/// plane, time-reversed, and traced through `folded`. `coincidence` holds the
/// folded classical image (start pixels of rays reaching the bucket),
/// `singles_idler` all start pixels.
CoincidenceImage run_folded(const Scene& scene, const Arm& folded, std::uint64_t seed, int workers);

struct ScaleGrid {
  double min = 0.5;
  double max = 4.0;
  double step = 0.01;
  int supersample = 16;
};

struct MagnificationEstimate {
  double M_hat = 0;       // magnitude of the best scale
  double confidence = 0;  // peak normalized cross-correlation
  bool inverted = false;
};

/// Sweeps the scale grid for both image orientations and returns the scale
/// whose predicted transmission map best correlates with the image.
/// Throws NoFeature when the peak correlation is below 0.2.
MagnificationEstimate estimate_magnification(const Histogram2D& image, const Mask& object,
                                             const ScaleGrid& grid = {});

/// (max - min) / (max + min) of the box-smoothed histogram, over cells where
/// the box fits inside the grid.
double image_contrast(const Histogram2D& hist, int box = 3);

struct ChiSquareResult {
  double statistic = 0;
  std::size_t pixels = 0;
  double reduced = 0;
};

/// Two independent Poisson images with equal expectations: sum of
/// (a - b)^2 / (a + b) over pixels whose mean count is at least min_counts.
ChiSquareResult compare_images(const Histogram2D& a, const Histogram2D& b, double min_counts = 20);

struct ExportMeta {
  std::string label;
  std::string config_hash;
  std::uint64_t seed = 0;
};

std::string histogram_csv(const Histogram2D& hist, const ExportMeta& meta);
/// Binary P5, 8-bit, normalized to the maximum count, top row = +y.
std::string histogram_pgm(const Histogram2D& hist, const ExportMeta& meta);

}  // namespace qmg
