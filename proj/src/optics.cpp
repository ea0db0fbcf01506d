#include "qmghost/optics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>

namespace qmg {

// ---------------------------------------------------------------------------
// PGM

namespace {

void skip_ws_and_comments(std::istream& in) {
  for (;;) {
    const int c = in.peek();
    if (c == '#') {
      std::string discard;
      std::getline(in, discard);
    } else if (c != EOF && std::isspace(c)) {
      in.get();
    } else {
      return;
    }
  }
}

int read_header_int(std::istream& in) {
  skip_ws_and_comments(in);
  int v = -1;
  if (!(in >> v) || v < 0) throw Error(ErrorKind::Io, "malformed PGM header");
  return v;
}

}  // namespace

GrayImage read_pgm(std::istream& in) {
  char magic[2] = {0, 0};
  in.read(magic, 2);
  if (!in || magic[0] != 'P' || (magic[1] != '2' && magic[1] != '5'))
    throw Error(ErrorKind::Io, "not a P2/P5 PGM image");
  GrayImage img;
  img.width = read_header_int(in);
  img.height = read_header_int(in);
  img.maxval = read_header_int(in);
  if (img.width == 0 || img.height == 0 || img.maxval == 0 || img.maxval > 65535)
    throw Error(ErrorKind::Io, "unsupported PGM dimensions or maxval");
  const std::size_t n = static_cast<std::size_t>(img.width) * img.height;
  img.pixels.resize(n);
  if (magic[1] == '2') {
    for (auto& px : img.pixels) {
      int v = 0;
      skip_ws_and_comments(in);
      if (!(in >> v) || v < 0 || v > img.maxval) throw Error(ErrorKind::Io, "truncated P2 raster");
      px = static_cast<std::uint16_t>(v);
    }
  } else {
    in.get();  // single whitespace after maxval
    const bool wide = img.maxval > 255;
    for (auto& px : img.pixels) {
      const int hi = in.get();
      const int lo = wide ? in.get() : 0;
      if (!in) throw Error(ErrorKind::Io, "truncated P5 raster");
      px = static_cast<std::uint16_t>(wide ? (hi << 8) | lo : hi);
    }
  }
  return img;
}

GrayImage read_pgm_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
  return read_pgm(in);
}

// ---------------------------------------------------------------------------
// Mask

Mask Mask::open() { return Mask{}; }

Mask Mask::opaque() {
  Mask m;
  m.kind_ = Kind::Opaque;
  return m;
}

Mask Mask::shapes(std::vector<Shape> shapes) {
  Mask m;
  m.kind_ = Kind::Shapes;
  m.shapes_ = std::move(shapes);
  return m;
}

Mask Mask::raster(Raster raster) {
  if (raster.width <= 0 || raster.height <= 0 || !(raster.pitch > 0) ||
      raster.open.size() != static_cast<std::size_t>(raster.width) * raster.height)
    throw Error(ErrorKind::Config, "raster mask dimensions are inconsistent");
  Mask m;
  m.kind_ = Kind::Raster;
  m.raster_ = std::move(raster);
  return m;
}

Mask Mask::from_pgm(const GrayImage& image, double pitch, Vec2 center) {
  Raster r;
  r.width = image.width;
  r.height = image.height;
  r.pitch = pitch;
  r.center = center;
  r.open.resize(image.pixels.size());
  for (std::size_t i = 0; i < image.pixels.size(); ++i)
    r.open[i] = 2 * static_cast<int>(image.pixels[i]) >= image.maxval ? 1 : 0;
  return raster(std::move(r));
}

Mask Mask::double_slit(double separation, double width, double height) {
  return shapes({Rect{{-separation / 2, 0}, {width, height}}, Rect{{separation / 2, 0}, {width, height}}});
}

namespace {

bool inside(const Mask::Rect& r, Vec2 p) {
  return std::abs(p.x - r.center.x) <= r.size.x / 2 && std::abs(p.y - r.center.y) <= r.size.y / 2;
}

bool inside(const Mask::Disk& d, Vec2 p) {
  const double dx = p.x - d.center.x, dy = p.y - d.center.y;
  return dx * dx + dy * dy <= d.radius * d.radius;
}

// Even-odd crossing rule.
bool inside(const Mask::Polygon& poly, Vec2 p) {
  const auto& v = poly.vertices;
  bool in = false;
  for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
    if ((v[i].y > p.y) != (v[j].y > p.y) &&
        p.x < (v[j].x - v[i].x) * (p.y - v[i].y) / (v[j].y - v[i].y) + v[i].x)
      in = !in;
  }
  return in;
}

}  // namespace

bool Mask::transmits(Vec2 p) const {
  switch (kind_) {
    case Kind::Open: return true;
    case Kind::Opaque: return false;
    case Kind::Shapes:
      return std::any_of(shapes_.begin(), shapes_.end(), [&](const Shape& s) {
        return std::visit([&](const auto& shape) { return inside(shape, p); }, s);
      });
    case Kind::Raster: {
      const auto& r = raster_;
      const double col = std::floor((p.x - r.center.x) / r.pitch + r.width / 2.0);
      const double row = std::floor((r.center.y - p.y) / r.pitch + r.height / 2.0);
      if (col < 0 || row < 0 || col >= r.width || row >= r.height) return false;
      return r.open[static_cast<std::size_t>(row) * r.width + static_cast<std::size_t>(col)] != 0;
    }
  }
  return false;
}

double Mask::coverage(Vec2 lo, Vec2 hi, int n) const {
  int open_count = 0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const Vec2 p{lo.x + (hi.x - lo.x) * (i + 0.5) / n, lo.y + (hi.y - lo.y) * (j + 0.5) / n};
      open_count += transmits(p) ? 1 : 0;
    }
  return static_cast<double>(open_count) / (n * n);
}

// ---------------------------------------------------------------------------
// Detectors and arms

std::optional<std::size_t> ScanningDetector::pixel_of(Vec2 hit) const {
  const double fx = std::floor(hit.x / pitch + nx / 2.0);
  const double fy = std::floor(hit.y / pitch + ny / 2.0);
  if (!(fx >= 0 && fy >= 0 && fx < nx && fy < ny)) return std::nullopt;
  return static_cast<std::size_t>(fy) * nx + static_cast<std::size_t>(fx);
}

Vec2 ScanningDetector::pixel_center(int ix, int iy) const {
  return {(ix + 0.5 - nx / 2.0) * pitch, (iy + 0.5 - ny / 2.0) * pitch};
}

const char* to_string(ArmId id) {
  switch (id) {
    case ArmId::Signal: return "signal";
    case ArmId::Idler: return "idler";
    case ArmId::Folded: return "folded";
  }
  return "unknown";
}

namespace {

bool is_detector(const Element& e) {
  return std::holds_alternative<BucketDetector>(e) || std::holds_alternative<ScanningDetector>(e);
}

}  // namespace

Arm::Arm(ArmId id, std::vector<Element> elements, Vec3 axis, Vec3 anchor)
    : id_(id), elements_(std::move(elements)), frame_(Frame::from_axis(axis)), anchor_(anchor) {
  if (elements_.empty() || !is_detector(elements_.back()))
    throw Error(ErrorKind::Config, std::string(to_string(id)) + " arm must end in a detector");
  const auto detectors = std::count_if(elements_.begin(), elements_.end(), is_detector);
  if (detectors != 1)
    throw Error(ErrorKind::Config, std::string(to_string(id)) + " arm must contain exactly one detector");
  for (const auto& e : elements_) {
    if (const auto* fs = std::get_if<FreeSpace>(&e); fs && !(fs->d > 0))
      throw Error(ErrorKind::Config, "free-space length must be positive");
    if (const auto* lens = std::get_if<ThinLens>(&e)) {
      if (lens->f == 0 || !std::isfinite(lens->f)) throw Error(ErrorKind::Config, "lens focal length must be finite and nonzero");
      if (!(lens->aperture_radius > 0)) throw Error(ErrorKind::Config, "lens aperture radius must be positive");
    }
    if (const auto* b = std::get_if<BucketDetector>(&e); b && !(b->radius > 0))
      throw Error(ErrorKind::Config, "bucket radius must be positive");
    if (const auto* s = std::get_if<ScanningDetector>(&e); s && (s->nx <= 0 || s->ny <= 0 || !(s->pitch > 0)))
      throw Error(ErrorKind::Config, "scanning detector needs nx, ny > 0 and pitch > 0");
  }
}

double Arm::length() const { return position_of(elements_.size()); }

double Arm::position_of(std::size_t index) const {
  double z = 0;
  for (std::size_t i = 0; i < index && i < elements_.size(); ++i)
    if (const auto* fs = std::get_if<FreeSpace>(&elements_[i])) z += fs->d;
  return z;
}

bool Arm::has_mask() const {
  return std::any_of(elements_.begin(), elements_.end(),
                     [](const Element& e) { return std::holds_alternative<MaskElement>(e); });
}

Ray Arm::to_local(const Ray& world) const {
  Ray r = world;
  r.origin = frame_.to_local(world.origin - anchor_);
  r.direction = frame_.to_local(world.direction);
  return r;
}

// ---------------------------------------------------------------------------
// Element operations

Ray propagate(const Ray& ray, double d) {
  if (!(d > 0)) throw Error(ErrorKind::Domain, "propagation distance must be positive");
  if (!(ray.direction.z > 0)) throw Error(ErrorKind::NonAdvancing, "ray does not advance along the axis");
  Ray out = ray;
  const double t = d / ray.direction.z;
  out.origin = {ray.origin.x + ray.direction.x * t, ray.origin.y + ray.direction.y * t, ray.origin.z + d};
  return out;
}

std::optional<Ray> apply_thin_lens(const Ray& ray, double f, double aperture_radius) {
  const double x = ray.origin.x, y = ray.origin.y;
  if (x * x + y * y > aperture_radius * aperture_radius) return std::nullopt;
  if (!(ray.direction.z > 0)) throw Error(ErrorKind::NonAdvancing, "ray does not cross the lens plane forward");
  const double sx = ray.direction.x / ray.direction.z - x / f;
  const double sy = ray.direction.y / ray.direction.z - y / f;
  Ray out = ray;
  out.direction = normalized(Vec3{sx, sy, 1.0});
  return out;
}

bool apply_mask(const Ray& ray, const Mask& mask) { return mask.transmits({ray.origin.x, ray.origin.y}); }

DetectionEvent trace_local(const Ray& local_ray, const Arm& arm) {
  DetectionEvent ev;
  ev.arm = arm.id();
  Ray r = local_ray;
  for (const auto& element : arm.elements()) {
    if (const auto* fs = std::get_if<FreeSpace>(&element)) {
      r = propagate(r, fs->d);
    } else if (const auto* lens = std::get_if<ThinLens>(&element)) {
      auto out = apply_thin_lens(r, lens->f, lens->aperture_radius);
      if (!out) {
        ev.fate = Fate::Absorbed;
        return ev;
      }
      r = *out;
    } else if (const auto* m = std::get_if<MaskElement>(&element)) {
      if (!apply_mask(r, m->mask)) {
        ev.fate = Fate::Absorbed;
        return ev;
      }
    } else if (const auto* bucket = std::get_if<BucketDetector>(&element)) {
      ev.transverse_hit = {r.origin.x, r.origin.y};
      const double rr = r.origin.x * r.origin.x + r.origin.y * r.origin.y;
      ev.fate = rr <= bucket->radius * bucket->radius ? Fate::Detected : Fate::Missed;
    } else if (const auto* scan = std::get_if<ScanningDetector>(&element)) {
      ev.transverse_hit = {r.origin.x, r.origin.y};
      ev.pixel = scan->pixel_of(ev.transverse_hit);
      ev.fate = ev.pixel ? Fate::Detected : Fate::Missed;
    }
    // PlaneMirror: identity in unfolded coordinates.
  }
  return ev;
}

DetectionEvent trace(const Ray& ray, const Arm& arm) { return trace_local(arm.to_local(ray), arm); }

Arm fold_klyshko(const Arm& signal_arm, const Arm& idler_arm, const PumpModel& pump,
                 double omega_s_min, double omega_s_max) {
  if (pump.kind != PumpModel::Kind::Plane)
    throw Error(ErrorKind::UnsupportedFold, "Klyshko folding needs a plane pump");
  const double half = pump.omega_p / 2;
  const double tol = 1e-12 * pump.omega_p;
  if (std::abs(omega_s_min - half) > tol || std::abs(omega_s_max - half) > tol)
    throw Error(ErrorKind::UnsupportedFold, "Klyshko folding needs degenerate pairs (omega_s = omega_i)");
  if (norm(signal_arm.anchor() - idler_arm.anchor()) > 1e-12 ||
      norm(signal_arm.frame().axis - idler_arm.frame().axis) > 1e-12)
    throw Error(ErrorKind::UnsupportedFold, "arms must share the crystal plane and axis");

  std::vector<Element> folded;
  const auto& idler = idler_arm.elements();
  for (auto it = idler.rbegin() + 1; it != idler.rend(); ++it) folded.push_back(*it);
  folded.emplace_back(PlaneMirror{});
  for (const auto& e : signal_arm.elements()) folded.push_back(e);
  return Arm(ArmId::Folded, std::move(folded), signal_arm.frame().axis, signal_arm.anchor());
}

Ray klyshko_back_ray(const Ray& idler_at_detector_local) {
  Ray r = idler_at_detector_local;
  r.origin.z = 0;
  // Reversal negates the direction; unfolding flips the axial component back.
  r.direction = {-r.direction.x, -r.direction.y, r.direction.z};
  return r;
}

}  // namespace qmg
