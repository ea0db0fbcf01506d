#include "qmghost/coincidence.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace qmg {

std::uint64_t Histogram2D::total() const {
  std::uint64_t t = 0;
  for (auto c : counts) t += c;
  return t;
}

Histogram2D& Histogram2D::operator+=(const Histogram2D& o) {
  for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += o.counts[i];
  return *this;
}

void Scene::validate() const {
  pump.validate();
  spdc.validate(pump);
  if (idler_arm.has_mask())
    throw Error(ErrorKind::Config, "object must be in signal arm only");
  if (!std::holds_alternative<BucketDetector>(signal_arm.detector()))
    throw Error(ErrorKind::Config, "signal arm must end in a bucket detector");
  if (!idler_arm.scanning_detector())
    throw Error(ErrorKind::Config, "idler arm must end in a scanning detector");
  if (norm(signal_arm.anchor() - idler_arm.anchor()) > 1e-12)
    throw Error(ErrorKind::Config, "signal and idler arms must start on the same crystal plane");
  if (background.dark_mean_per_pixel < 0 || background.accidental_mean_per_pixel < 0)
    throw Error(ErrorKind::Config, "background means must be non-negative");
}

const ScanningDetector& Scene::detector() const { return *idler_arm.scanning_detector(); }

namespace {

constexpr std::uint64_t kBackgroundStream = 0xb4c6a9d2e1f03857ULL;

struct Tally {
  Histogram2D coincidence;
  Histogram2D singles;
  std::uint64_t bucket = 0;

  explicit Tally(const ScanningDetector& d) : coincidence(d.nx, d.ny, d.pitch), singles(d.nx, d.ny, d.pitch) {}

  Tally& operator+=(const Tally& o) {
    coincidence += o.coincidence;
    singles += o.singles;
    bucket += o.bucket;
    return *this;
  }
};

void accumulate_pair(const Scene& scene, std::uint64_t seed, std::uint64_t i, Tally& t) {
  CounterRng rng(seed, i);
  const PhotonPair pair = sample_pair(scene.pump, scene.spdc, rng);
  const DetectionEvent s = trace(pair.signal, scene.signal_arm);
  const DetectionEvent d = trace(pair.idler, scene.idler_arm);
  if (s.detected()) ++t.bucket;
  if (d.detected()) {
    ++t.singles.counts[*d.pixel];
    if (s.detected()) ++t.coincidence.counts[*d.pixel];
  }
}

// The idler's state on its detector plane, in idler-arm coordinates.
std::optional<Ray> idler_at_detector(const Ray& world, const Arm& idler_arm) {
  Ray r = idler_arm.to_local(world);
  const auto& elements = idler_arm.elements();
  for (std::size_t k = 0; k + 1 < elements.size(); ++k) {
    if (const auto* fs = std::get_if<FreeSpace>(&elements[k])) {
      r = propagate(r, fs->d);
    } else if (const auto* lens = std::get_if<ThinLens>(&elements[k])) {
      auto out = apply_thin_lens(r, lens->f, lens->aperture_radius);
      if (!out) return std::nullopt;
      r = *out;
    }
  }
  return r;
}

void accumulate_folded(const Scene& scene, const Arm& folded, std::uint64_t seed, std::uint64_t i, Tally& t) {
  CounterRng rng(seed, i);
  const PhotonPair pair = sample_pair(scene.pump, scene.spdc, rng);
  const auto at_detector = idler_at_detector(pair.idler, scene.idler_arm);
  if (!at_detector) return;
  const auto pixel = scene.detector().pixel_of({at_detector->origin.x, at_detector->origin.y});
  if (!pixel) return;
  ++t.singles.counts[*pixel];
  const DetectionEvent ev = trace_local(klyshko_back_ray(*at_detector), folded);
  if (ev.detected()) {
    ++t.bucket;
    ++t.coincidence.counts[*pixel];
  }
}

template <class Kernel>
Tally run_pairs(const Scene& scene, std::uint64_t n, int workers, Kernel kernel) {
  Tally total(scene.detector());
  const auto count = static_cast<std::int64_t>(n);
  bool failed = false;
  Error first_error(ErrorKind::Domain, "");
#pragma omp parallel num_threads(std::max(1, workers))
  {
    Tally local(scene.detector());
#pragma omp for schedule(static)
    for (std::int64_t i = 0; i < count; ++i) {
      try {
        kernel(static_cast<std::uint64_t>(i), local);
      } catch (const Error& e) {
#pragma omp critical(qmg_pair_error)
        if (!failed) {
          failed = true;
          first_error = e;
        }
      }
    }
    // Integer sums: merge order cannot change the result.
#pragma omp critical(qmg_pair_merge)
    total += local;
  }
  if (failed) throw first_error;
  return total;
}

void add_background(const Scene& scene, CoincidenceImage& img) {
  const Background& bg = scene.background;
  if (bg.dark_mean_per_pixel == 0 && bg.accidental_mean_per_pixel == 0) return;
  for (std::size_t p = 0; p < img.singles_idler.counts.size(); ++p) {
    CounterRng rng(scene.seed ^ kBackgroundStream, p);
    std::uint64_t dark = 0, accidental = 0;
    if (bg.dark_mean_per_pixel > 0) dark = std::poisson_distribution<std::uint64_t>(bg.dark_mean_per_pixel)(rng);
    if (bg.accidental_mean_per_pixel > 0)
      accidental = std::poisson_distribution<std::uint64_t>(bg.accidental_mean_per_pixel)(rng);
    img.singles_idler.counts[p] += dark + accidental;
    img.coincidence.counts[p] += accidental;
  }
}

CoincidenceImage to_image(Tally&& t, std::uint64_t n) {
  CoincidenceImage img;
  img.coincidence = std::move(t.coincidence);
  img.singles_idler = std::move(t.singles);
  img.singles_signal_bucket = t.bucket;
  img.n_emitted = n;
  return img;
}

}  // namespace

CoincidenceImage run_simulation(const Scene& scene, int workers) {
  scene.validate();
  Tally t = run_pairs(scene, scene.n_pairs, workers,
                      [&](std::uint64_t i, Tally& local) { accumulate_pair(scene, scene.seed, i, local); });
  CoincidenceImage img = to_image(std::move(t), scene.n_pairs);
  add_background(scene, img);
  return img;
}

CoincidenceImage run_simulation_serial(const Scene& scene) {
  scene.validate();
  Tally t(scene.detector());
  for (std::uint64_t i = 0; i < scene.n_pairs; ++i) accumulate_pair(scene, scene.seed, i, t);
  CoincidenceImage img = to_image(std::move(t), scene.n_pairs);
  add_background(scene, img);
  return img;
}

CoincidenceImage run_folded(const Scene& scene, const Arm& folded, std::uint64_t seed, int workers) {
  scene.validate();
  Tally t = run_pairs(scene, scene.n_pairs, workers,
                      [&](std::uint64_t i, Tally& local) { accumulate_folded(scene, folded, seed, i, local); });
  return to_image(std::move(t), scene.n_pairs);
}

// ---------------------------------------------------------------------------
// Analysis

namespace {

double ncc(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma, db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa == 0 || sbb == 0) return 0;
  return sab / std::sqrt(saa * sbb);
}

}  // namespace

MagnificationEstimate estimate_magnification(const Histogram2D& image, const Mask& object, const ScaleGrid& grid) {
  if (image.total() == 0) throw Error(ErrorKind::Domain, "estimate_magnification: empty image");
  if (!(grid.min > 0) || !(grid.max >= grid.min) || !(grid.step > 0) || grid.supersample < 1)
    throw Error(ErrorKind::Domain, "estimate_magnification: invalid scale grid");

  std::vector<double> observed(image.counts.begin(), image.counts.end());
  std::vector<double> predicted(observed.size());
  const ScanningDetector det{image.nx, image.ny, image.pitch};

  MagnificationEstimate best;
  best.confidence = -2;
  const int steps = static_cast<int>(std::floor((grid.max - grid.min) / grid.step + 1e-9));
  for (int k = 0; k <= steps; ++k) {
    const double s = grid.min + k * grid.step;
    for (const bool inverted : {false, true}) {
      const double sign = inverted ? -1.0 : 1.0;
      for (int iy = 0; iy < image.ny; ++iy)
        for (int ix = 0; ix < image.nx; ++ix) {
          const Vec2 c = det.pixel_center(ix, iy);
          const double half = image.pitch / 2;
          const Vec2 a{sign * (c.x - half) / s, sign * (c.y - half) / s};
          const Vec2 b{sign * (c.x + half) / s, sign * (c.y + half) / s};
          const Vec2 lo{std::min(a.x, b.x), std::min(a.y, b.y)};
          const Vec2 hi{std::max(a.x, b.x), std::max(a.y, b.y)};
          predicted[static_cast<std::size_t>(iy) * image.nx + ix] = object.coverage(lo, hi, grid.supersample);
        }
      const double score = ncc(predicted, observed);
      if (score > best.confidence) {
        best.confidence = score;
        best.M_hat = s;
        best.inverted = inverted;
      }
    }
  }
  if (best.confidence < 0.2)
    throw Error(ErrorKind::NoFeature, "no scale correlates with the object (peak < 0.2)");
  return best;
}

double image_contrast(const Histogram2D& hist, int box) {
  if (box < 1 || box > hist.nx || box > hist.ny)
    throw Error(ErrorKind::Domain, "smoothing box does not fit in the histogram");
  if (hist.total() == 0) throw Error(ErrorKind::UndefinedContrast, "contrast of an all-zero histogram");

  // Summed-area table for the box means.
  const int nx = hist.nx, ny = hist.ny;
  std::vector<double> sat(static_cast<std::size_t>(nx + 1) * (ny + 1), 0.0);
  auto S = [&](int x, int y) -> double& { return sat[static_cast<std::size_t>(y) * (nx + 1) + x]; };
  for (int y = 0; y < ny; ++y)
    for (int x = 0; x < nx; ++x)
      S(x + 1, y + 1) = static_cast<double>(hist.at(x, y)) + S(x, y + 1) + S(x + 1, y) - S(x, y);

  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (int y = 0; y + box <= ny; ++y)
    for (int x = 0; x + box <= nx; ++x) {
      const double sum = S(x + box, y + box) - S(x, y + box) - S(x + box, y) + S(x, y);
      lo = std::min(lo, sum);
      hi = std::max(hi, sum);
    }
  if (hi + lo == 0) return 0;
  return (hi - lo) / (hi + lo);
}

ChiSquareResult compare_images(const Histogram2D& a, const Histogram2D& b, double min_counts) {
  if (a.nx != b.nx || a.ny != b.ny) throw Error(ErrorKind::Domain, "compare_images: grid mismatch");
  ChiSquareResult r;
  for (std::size_t i = 0; i < a.counts.size(); ++i) {
    const double x = static_cast<double>(a.counts[i]), y = static_cast<double>(b.counts[i]);
    if ((x + y) / 2 < min_counts) continue;
    r.statistic += (x - y) * (x - y) / (x + y);
    ++r.pixels;
  }
  r.reduced = r.pixels ? r.statistic / static_cast<double>(r.pixels) : 0;
  return r;
}

std::string histogram_csv(const Histogram2D& hist, const ExportMeta& meta) {
  char head[512];
  std::snprintf(head, sizeof head,
                "# label=%s nx=%d ny=%d pitch=%.17g seed=%llu config_hash=%s order=row-major(iy,ix)\n",
                meta.label.c_str(), hist.nx, hist.ny, hist.pitch,
                static_cast<unsigned long long>(meta.seed), meta.config_hash.c_str());
  std::string out = head;
  for (int iy = 0; iy < hist.ny; ++iy) {
    for (int ix = 0; ix < hist.nx; ++ix) {
      if (ix) out += ',';
      out += std::to_string(hist.at(ix, iy));
    }
    out += '\n';
  }
  return out;
}

std::string histogram_pgm(const Histogram2D& hist, const ExportMeta& meta) {
  std::uint64_t peak = 0;
  for (auto c : hist.counts) peak = std::max(peak, c);
  char head[512];
  std::snprintf(head, sizeof head, "P5\n# label=%s seed=%llu config_hash=%s\n%d %d\n255\n", meta.label.c_str(),
                static_cast<unsigned long long>(meta.seed), meta.config_hash.c_str(), hist.nx, hist.ny);
  std::string out = head;
  for (int iy = hist.ny - 1; iy >= 0; --iy)
    for (int ix = 0; ix < hist.nx; ++ix) {
      const std::uint64_t c = hist.at(ix, iy);
      const auto v = peak ? static_cast<unsigned>((255 * c + peak / 2) / peak) : 0u;
      out += static_cast<char>(static_cast<unsigned char>(v));
    }
  return out;
}

}  // namespace qmg
