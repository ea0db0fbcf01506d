#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "generators.hpp"
#include "scenes.hpp"

using namespace qmg;

TEST_CASE("no pairs, empty histograms") {
  const CoincidenceImage img = run_simulation(testscene::pittman(0, 1), 2);
  CHECK(img.coincidence.total() == 0);
  CHECK(img.singles_idler.total() == 0);
  CHECK(img.singles_signal_bucket == 0);
  CHECK(img.coincidence.nx == 40);
}

TEST_CASE("opaque object: singles but no coincidences") {
  Scene s = testscene::pittman(20000, 2);
  s.signal_arm = Arm(ArmId::Signal, {FreeSpace{1.0}, MaskElement{Mask::opaque()}, BucketDetector{0.05}});
  const CoincidenceImage img = run_simulation(s, 2);
  CHECK(img.singles_idler.total() > 0);
  CHECK(img.coincidence.total() == 0);
}

TEST_CASE("coincidences never exceed singles") {
  for (std::uint64_t seed : {3u, 4u}) {
    Scene s = testscene::pittman(50000, seed);
    s.background.dark_mean_per_pixel = 0.5;
    s.background.accidental_mean_per_pixel = 0.2;
    const CoincidenceImage img = run_simulation(s, 3);
    for (std::size_t i = 0; i < img.coincidence.counts.size(); ++i)
      CHECK(img.coincidence.counts[i] <= img.singles_idler.counts[i]);
    s.background = {};
    const CoincidenceImage clean = run_simulation(s, 3);
    CHECK(clean.coincidence.total() <= clean.singles_signal_bucket);
    CHECK(img.singles_idler.total() > clean.singles_idler.total());
  }
}

TEST_CASE("worker count does not change the result") {
  const Scene s = testscene::pittman(60000, 5);
  const CoincidenceImage ref = run_simulation_serial(s);
  for (int w : {1, 2, 4, 8}) CHECK(run_simulation(s, w) == ref);
  Scene bg = s;
  bg.background.accidental_mean_per_pixel = 1.5;
  CHECK(run_simulation(bg, 4) == run_simulation_serial(bg));
}

TEST_CASE("scene validation") {
  Scene s = testscene::pittman(10, 1);
  s.idler_arm = Arm(ArmId::Idler, {FreeSpace{0.4}, MaskElement{Mask::open()}, FreeSpace{0.4},
                                   ScanningDetector{4, 4, 1e-4}});
  try {
    s.validate();
    FAIL("idler mask accepted");
  } catch (const Error& e) {
    CHECK(std::string(e.what()) == "object must be in signal arm only");
  }
  s = testscene::pittman(10, 1);
  s.signal_arm = Arm(ArmId::Signal, {FreeSpace{1}, ScanningDetector{4, 4, 1e-4}});
  CHECK_THROWS_AS(s.validate(), Error);
  s = testscene::pittman(10, 1);
  s.idler_arm = Arm(ArmId::Idler, {FreeSpace{1}, BucketDetector{1}});
  CHECK_THROWS_AS(s.validate(), Error);
}

TEST_CASE("ghost image of the double slit: slit images twice as far apart") {
  const CoincidenceImage img = run_simulation(testscene::pittman(1000000, 11), 4);
  // Column centroids of the two halves of the coincidence image.
  double left = 0, lw = 0, right = 0, rw = 0;
  const auto& h = img.coincidence;
  for (int iy = 0; iy < h.ny; ++iy)
    for (int ix = 0; ix < h.nx; ++ix) {
      const double x = (ix + 0.5 - h.nx / 2.0) * h.pitch;
      const double c = static_cast<double>(h.at(ix, iy));
      if (x < 0) {
        left += c * x;
        lw += c;
      } else {
        right += c * x;
        rw += c;
      }
    }
  const double separation = right / rw - left / lw;
  CHECK(separation == doctest::Approx(2 * 1e-3).epsilon(0.02));
}

TEST_CASE("magnification estimate on an exactly scaled object") {
  const Mask object = Mask::shapes({Mask::Rect{{-3e-4, 1e-4}, {2e-4, 6e-4}}, Mask::Disk{{4e-4, -2e-4}, 2e-4}});
  Histogram2D img(48, 48, 5e-5);
  for (int iy = 0; iy < img.ny; ++iy)
    for (int ix = 0; ix < img.nx; ++ix) {
      const Vec2 c{(ix + 0.5 - 24) * 5e-5, (iy + 0.5 - 24) * 5e-5};
      img.at(ix, iy) = object.transmits({c.x / 2.0, c.y / 2.0}) ? 100 : 0;
    }
  ScaleGrid grid;
  grid.min = 1.0;
  grid.max = 3.0;
  const MagnificationEstimate m = estimate_magnification(img, object, grid);
  CHECK(std::abs(m.M_hat - 2.0) <= grid.step + 1e-12);
  CHECK_FALSE(m.inverted);
  CHECK(m.confidence > 0.9);

  // The same image rotated by 180 degrees is an inverted copy.
  Histogram2D flipped(48, 48, 5e-5);
  for (int iy = 0; iy < 48; ++iy)
    for (int ix = 0; ix < 48; ++ix) flipped.at(ix, iy) = img.at(47 - ix, 47 - iy);
  const MagnificationEstimate f = estimate_magnification(flipped, object, grid);
  CHECK(std::abs(f.M_hat - 2.0) <= grid.step + 1e-12);
  CHECK(f.inverted);
}

TEST_CASE("magnification estimate rejects featureless images") {
  Histogram2D noise(32, 32, 1e-4);
  CounterRng rng(1, 2);
  for (auto& c : noise.counts) c = 50 + rng() % 7;
  try {
    estimate_magnification(noise, testscene::pittman_object());
    FAIL("noise produced a feature");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NoFeature);
  }
  CHECK_THROWS_AS(estimate_magnification(Histogram2D(8, 8, 1e-4), testscene::pittman_object()), Error);
}

TEST_CASE("image contrast") {
  Histogram2D flat(10, 10, 1.0);
  for (auto& c : flat.counts) c = 7;
  CHECK(image_contrast(flat) == 0);

  Histogram2D split(10, 10, 1.0);
  for (int iy = 0; iy < 10; ++iy)
    for (int ix = 5; ix < 10; ++ix) split.at(ix, iy) = 9;
  CHECK(image_contrast(split, 3) == 1);
  CHECK(image_contrast(split, 1) == 1);
  // A box wider than either half mixes them.
  CHECK(image_contrast(split, 10) == 0);

  CHECK_THROWS_AS(image_contrast(flat, 11), Error);
  try {
    image_contrast(Histogram2D(4, 4, 1.0));
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UndefinedContrast);
  }
}

TEST_CASE("chi-square between images") {
  Histogram2D a(20, 20, 1.0), b(20, 20, 1.0);
  for (auto& c : a.counts) c = 100;
  b = a;
  ChiSquareResult r = compare_images(a, b);
  CHECK(r.statistic == 0);
  CHECK(r.pixels == 400);

  // Two independent Poisson draws with a common mean.
  CounterRng rng(17, 0);
  double sum = 0;
  const int reps = 20;
  for (int k = 0; k < reps; ++k) {
    for (std::size_t i = 0; i < a.counts.size(); ++i) {
      a.counts[i] = std::poisson_distribution<std::uint64_t>(150)(rng);
      b.counts[i] = std::poisson_distribution<std::uint64_t>(150)(rng);
    }
    sum += compare_images(a, b).reduced;
  }
  CHECK(sum / reps == doctest::Approx(1.0).epsilon(0.05));

  // Low-count pixels are excluded.
  Histogram2D lo(2, 1, 1.0), lo2(2, 1, 1.0);
  lo.counts = {5, 40};
  lo2.counts = {9, 30};
  r = compare_images(lo, lo2, 20);
  CHECK(r.pixels == 1);
  CHECK(r.statistic == doctest::Approx(100.0 / 70));
  CHECK_THROWS_AS(compare_images(lo, Histogram2D(3, 1, 1.0)), Error);
}

TEST_CASE("folded run matches the two-arm coincidence image pair by pair") {
  const Scene s = testscene::pittman(200000, 21);
  const Arm folded = fold_klyshko(s.signal_arm, s.idler_arm, s.pump, 0.5, 0.5);
  // Same stream: identical pairs, so the images must agree exactly.
  const CoincidenceImage two_arm = run_simulation(s, 2);
  const CoincidenceImage single = run_folded(s, folded, s.seed, 2);
  CHECK(single.coincidence == two_arm.coincidence);
  CHECK(single.singles_idler == two_arm.singles_idler);
}

TEST_CASE("exports carry hash and seed") {
  Histogram2D h(3, 2, 1e-4);
  h.at(0, 0) = 1;
  h.at(2, 1) = 4;
  const ExportMeta meta{"coincidence", "00ff00ff00ff00ff", 99};
  const std::string csv = histogram_csv(h, meta);
  CHECK(csv.find("seed=99") != std::string::npos);
  CHECK(csv.find("config_hash=00ff00ff00ff00ff") != std::string::npos);
  CHECK(csv.find("\n1,0,0\n0,0,4\n") != std::string::npos);

  std::istringstream pgm(histogram_pgm(h, meta));
  const GrayImage g = read_pgm(pgm);
  CHECK(g.width == 3);
  CHECK(g.height == 2);
  // Top row is +y (iy = 1).
  CHECK(g.pixels[2] == 255);
  CHECK(g.pixels[3] == 64);
}
