#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "qmghost/core.hpp"

namespace qmg {

// Element operations below work in arm-local coordinates: optical axis +z,
// transverse plane (x, y), the arm starting on the crystal plane at z = 0.

struct GrayImage {
  int width = 0;
  int height = 0;
  int maxval = 255;
  std::vector<std::uint16_t> pixels;  // row-major, row 0 at the top
};

/// Reads binary (P5) or ASCII (P2) portable graymaps.
GrayImage read_pgm(std::istream& in);
GrayImage read_pgm_file(const std::string& path);

class Mask {
 public:
  struct Rect {
    Vec2 center;
    Vec2 size;
  };
  struct Disk {
    Vec2 center;
    double radius = 0;
  };
  struct Polygon {
    std::vector<Vec2> vertices;
  };
  using Shape = std::variant<Rect, Disk, Polygon>;

  /// Bitmap mask; pixel (col,row) covers a pitch x pitch cell, row 0 at +y.
  struct Raster {
    int width = 0;
    int height = 0;
    double pitch = 0;
    Vec2 center;
    std::vector<std::uint8_t> open;
  };

  static Mask open();
  static Mask opaque();
  /// Union of open shapes on an opaque background.
  static Mask shapes(std::vector<Shape> shapes);
  static Mask raster(Raster raster);
  /// Pixels at or above half of maxval are open.
  static Mask from_pgm(const GrayImage& image, double pitch, Vec2 center = {});
  /// Two slits of the given width and height, centers at +-separation/2 on x.
  static Mask double_slit(double separation, double width, double height);

  bool transmits(Vec2 p) const;

  /// Open fraction of an axis-aligned rectangle, estimated on an n x n grid
  /// of sample points.
  double coverage(Vec2 lo, Vec2 hi, int n) const;

 private:
  enum class Kind { Open, Opaque, Shapes, Raster };
  Kind kind_ = Kind::Open;
  std::vector<Shape> shapes_;
  Raster raster_;
};

struct FreeSpace {
  double d = 0;
};
struct ThinLens {
  double f = 0;
  double aperture_radius = std::numeric_limits<double>::infinity();
};
struct MaskElement {
  Mask mask;
};
struct BucketDetector {
  double radius = 0;
};
struct ScanningDetector {
  int nx = 0;
  int ny = 0;
  double pitch = 0;

  /// Row-major pixel index (iy * nx + ix) of a transverse hit, grid centered
  /// on the axis; nullopt outside the grid.
  std::optional<std::size_t> pixel_of(Vec2 hit) const;
  Vec2 pixel_center(int ix, int iy) const;
};
/// Plane quantum mirror left in place of the crystal by a Klyshko fold.
/// In unfolded coordinates it maps every ray onto itself.
struct PlaneMirror {};

using Element = std::variant<FreeSpace, ThinLens, MaskElement, BucketDetector, ScanningDetector, PlaneMirror>;

enum class ArmId { Signal, Idler, Folded };
const char* to_string(ArmId id);

class Arm {
 public:
  Arm() = default;
  /// Throws Config unless the sequence ends in exactly one detector and all
  /// element parameters are in range.
  Arm(ArmId id, std::vector<Element> elements, Vec3 axis = {0, 0, 1}, Vec3 anchor = {0, 0, 0});

  ArmId id() const { return id_; }
  const std::vector<Element>& elements() const { return elements_; }
  const Frame& frame() const { return frame_; }
  const Vec3& anchor() const { return anchor_; }

  /// Total free-space length.
  double length() const;
  /// Axial distance from the arm start to element `index`.
  double position_of(std::size_t index) const;

  bool has_mask() const;
  const Element& detector() const { return elements_.back(); }
  const ScanningDetector* scanning_detector() const { return std::get_if<ScanningDetector>(&elements_.back()); }

  Ray to_local(const Ray& world) const;

 private:
  ArmId id_ = ArmId::Signal;
  std::vector<Element> elements_;
  Frame frame_;
  Vec3 anchor_;
};

enum class Fate { Detected, Absorbed, Missed };

struct DetectionEvent {
  ArmId arm = ArmId::Signal;
  Vec2 transverse_hit;  // valid unless absorbed
  Fate fate = Fate::Missed;
  std::optional<std::size_t> pixel;  // scanning detectors only

  bool absorbed() const { return fate == Fate::Absorbed; }
  bool detected() const { return fate == Fate::Detected; }
};

/// Advances the ray to the plane an axial distance d further along +z.
Ray propagate(const Ray& ray, double d);

/// Paraxial thin-lens kick at the ray's current plane; nullopt when the hit
/// falls outside the aperture.
std::optional<Ray> apply_thin_lens(const Ray& ray, double f,
                                   double aperture_radius = std::numeric_limits<double>::infinity());

bool apply_mask(const Ray& ray, const Mask& mask);

/// Traces a world-frame ray through the arm.
DetectionEvent trace(const Ray& ray, const Arm& arm);
/// Same, for a ray already expressed in arm-local coordinates.
DetectionEvent trace_local(const Ray& local_ray, const Arm& arm);

/// Folds a degenerate plane-pump two-arm setup into one classical arm:
/// the idler arm reversed (detector first), the crystal replaced by a
/// PlaneMirror, then the signal arm. Throws UnsupportedFold otherwise.
Arm fold_klyshko(const Arm& signal_arm, const Arm& idler_arm, const PumpModel& pump,
                 double omega_s_min, double omega_s_max);

/// Time-reverses an idler ray sitting on the idler detector plane and
/// expresses it in folded-arm coordinates (origin at z = 0).
Ray klyshko_back_ray(const Ray& idler_at_detector_local);

}  // namespace qmg
