#include "qmghost/run.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <ostream>

#include "json.hpp"

namespace qmg {

namespace {

using json = nlohmann::json;

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

class Writer {
 public:
  Writer(const std::string& dir, RunOutcome& outcome) : dir_(dir), outcome_(outcome) {
    if (!dir_.empty()) {
      std::error_code ec;
      std::filesystem::create_directories(dir_, ec);
      if (ec) throw Error(ErrorKind::Io, "cannot create output directory " + dir_ + ": " + ec.message());
    }
  }

  bool enabled() const { return !dir_.empty(); }

  void write(const std::string& name, const std::string& bytes) {
    const std::string path = (std::filesystem::path(dir_) / name).string();
    std::ofstream f(path, std::ios::binary);
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw Error(ErrorKind::Io, "cannot write " + path);
    outcome_.artifacts.push_back(path);
  }

 private:
  std::string dir_;
  RunOutcome& outcome_;
};

struct Checks {
  json list = json::array();
  bool failed = false;

  void add(const std::string& name, std::optional<double> value, const std::string& bound, bool ok) {
    json c = {{"name", name}, {"bound", bound}};
    if (value) {
      c["value"] = *value;
      c["status"] = ok ? "pass" : "fail";
      failed |= !ok;
    } else {
      c["value"] = nullptr;
      c["status"] = "skipped";
    }
    list.push_back(c);
  }
};

json base_report(const RunConfig& cfg) {
  return {{"mode", to_string(cfg.mode)},
          {"config_hash", cfg.hash},
          {"seed", cfg.seed},
          {"config", json::parse(cfg.canonical)},
          {"metadata", {{"generated_at", utc_now()}, {"workers", cfg.workers}}}};
}

std::optional<double> contrast_or_null(const Histogram2D& h, int box) {
  try {
    return image_contrast(h, box);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::UndefinedContrast) return std::nullopt;
    throw;
  }
}

void emit_report(Writer& w, std::ostream& out, const std::string& name, const json& report) {
  const std::string text = report.dump(2) + "\n";
  if (w.enabled()) w.write(name, text);
  else out << text;
}

int run_simulate(const RunConfig& cfg, std::ostream& out, std::ostream& log, RunOutcome& outcome) {
  const AnalysisConfig& a = cfg.analysis;
  Writer w(cfg.output_dir, outcome);
  const CoincidenceImage img = run_simulation(cfg.scene, cfg.workers);
  log << "simulated " << img.n_emitted << " pairs: " << img.coincidence.total() << " coincidences, "
      << img.singles_idler.total() << " idler singles\n";

  if (w.enabled()) {
    const ExportMeta cm{"coincidence", cfg.hash, cfg.seed};
    const ExportMeta sm{"singles_idler", cfg.hash, cfg.seed};
    w.write("coincidence.csv", histogram_csv(img.coincidence, cm));
    w.write("singles_idler.csv", histogram_csv(img.singles_idler, sm));
    w.write("coincidence.pgm", histogram_pgm(img.coincidence, cm));
    w.write("singles_idler.pgm", histogram_pgm(img.singles_idler, sm));
  }

  const auto singles_c = contrast_or_null(img.singles_idler, a.smoothing_box);
  const auto coinc_c = contrast_or_null(img.coincidence, a.smoothing_box);

  json mag = nullptr;
  std::optional<double> m_hat;
  if (cfg.object && img.coincidence.total() > 0) {
    try {
      const MagnificationEstimate m = estimate_magnification(img.coincidence, *cfg.object, a.scale_grid);
      m_hat = m.M_hat;
      mag = {{"M_hat", m.M_hat}, {"confidence", m.confidence}, {"inverted", m.inverted}};
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NoFeature) throw;
      log << "magnification: " << e.what() << "\n";
    }
  }

  Checks checks;
  checks.add("singles_contrast", singles_c, "< " + std::to_string(a.max_singles_contrast),
             singles_c && *singles_c < a.max_singles_contrast);
  checks.add("coincidence_contrast", coinc_c, "> " + std::to_string(a.min_coincidence_contrast),
             coinc_c && *coinc_c > a.min_coincidence_contrast);
  if (a.expected_magnification) {
    const double e = *a.expected_magnification;
    checks.add("magnification", m_hat,
               std::to_string(e) + " +- " + std::to_string(a.magnification_tolerance),
               m_hat && std::abs(*m_hat - e) <= a.magnification_tolerance);
  }

  json report = base_report(cfg);
  report["counts"] = {{"n_emitted", img.n_emitted},
                      {"coincidence_total", img.coincidence.total()},
                      {"singles_idler_total", img.singles_idler.total()},
                      {"singles_signal_bucket", img.singles_signal_bucket}};
  report["contrast"] = {{"box", a.smoothing_box},
                        {"singles_idler", singles_c ? json(*singles_c) : json(nullptr)},
                        {"coincidence", coinc_c ? json(*coinc_c) : json(nullptr)}};
  report["magnification"] = mag;
  report["checks"] = checks.list;
  report["pass"] = !checks.failed;
  emit_report(w, out, "report.json", report);
  return checks.failed ? kExitThreshold : kExitOk;
}

int run_verify(const RunConfig& cfg, std::ostream& out, std::ostream& log, RunOutcome& outcome) {
  const SweepConfig& s = cfg.sweep;
  Writer w(cfg.output_dir, outcome);

  std::vector<SqmParams> cases;
  cases.reserve(s.cases);
  for (std::uint64_t i = 0; i < s.cases; ++i) cases.push_back(random_sqm_case(cfg.seed, i));
  const std::vector<SweepRow> rows = run_law_sweep(cases, s.h_rel, cfg.workers);
  if (w.enabled()) w.write("residuals.csv", residual_sweep_csv(rows, s.h_rel, cfg.hash, cfg.seed));

  double q_lo = INFINITY, q_hi = -INFINITY, h_lo = INFINITY, h_hi = -INFINITY;
  std::size_t degenerate = 0;
  json failures = json::array();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const ConvergenceReport& r = rows[i].report;
    if (r.q.degenerate) {
      // Exact cases: every residual must sit at the floor.
      ++degenerate;
      double worst = 0;
      for (const auto& res : r.residuals) worst = std::max(worst, res.dq);
      if (!(worst < 1e-9 * std::abs(rows[i].params.p)))
        failures.push_back({{"case", i}, {"reason", "degenerate fit above floor"}, {"max_dq", worst}});
      continue;
    }
    q_lo = std::min(q_lo, r.q.slope);
    q_hi = std::max(q_hi, r.q.slope);
    if (!r.h.degenerate) {
      h_lo = std::min(h_lo, r.h.slope);
      h_hi = std::max(h_hi, r.h.slope);
    }
    if (!(r.q.slope >= s.slope_min && r.q.slope <= s.slope_max))
      failures.push_back({{"case", i}, {"reason", "q slope out of band"}, {"slope", r.q.slope}});
  }

  // Limits that close the family of laws.
  const double calib_p[] = {0.6, 1.0, 2.0, 5.0, 10.0};
  const double calib = mirror_calibration_deviation(1.0, calib_p);
  const double plane_R[] = {1e2, 1e3, 1e4, 1e5, 1e6};
  const FitResult plane = plane_limit_order(matched_sqm_params(1.0, 1.0, 0.6, 0.4, 0.2), plane_R);

  Checks checks;
  checks.add("q_slope_band", rows.empty() ? std::nullopt : std::optional<double>(double(failures.size())),
             "0 cases outside [" + std::to_string(s.slope_min) + ", " + std::to_string(s.slope_max) + "]",
             failures.empty());
  checks.add("mirror_calibration_rel", calib, "< 1e-9", calib < 1e-9);
  checks.add("plane_limit_order", plane.slope, "1 +- 0.1", std::abs(plane.slope - 1) <= 0.1);

  json report = base_report(cfg);
  auto range = [](double lo, double hi) { return lo <= hi ? json::array({lo, hi}) : json(nullptr); };
  report["cases"] = rows.size();
  report["h_rel"] = s.h_rel;
  report["q_slope_range"] = range(q_lo, q_hi);
  report["h_slope_range"] = range(h_lo, h_hi);
  report["degenerate_fits"] = degenerate;
  report["failures"] = failures;
  report["checks"] = checks.list;
  report["pass"] = !checks.failed;
  emit_report(w, out, "convergence.json", report);
  log << "verified " << rows.size() << " cases, " << failures.size() << " outside the slope band\n";
  return checks.failed ? kExitThreshold : kExitOk;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

int run_lens(const RunConfig& cfg, std::ostream& out, RunOutcome& outcome) {
  const LensSweep& l = cfg.lens;
  Writer w(cfg.output_dir, outcome);
  std::string table = "# config_hash=" + cfg.hash + " seed=" + std::to_string(cfg.seed) + "\n";
  table += "S_o,f,S_i,M,note\n";
  const auto n = static_cast<long>(std::floor((l.so_max - l.so_min) / l.so_step + 1e-9));
  for (long k = 0; k <= n; ++k) {
    const double so = l.so_min + static_cast<double>(k) * l.so_step;
    try {
      const ImagingSolution s = ghost_thin_lens(so, l.f);
      table += fmt(so) + "," + fmt(l.f) + "," + fmt(s.q) + "," + fmt(s.M) + ",\n";
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::ImageAtInfinity) throw;
      table += fmt(so) + "," + fmt(l.f) + ",inf,,image at infinity\n";
    }
  }
  if (w.enabled()) w.write("lens_law.csv", table);
  else out << table;
  return kExitOk;
}

int run_fold(const RunConfig& cfg, std::ostream& out, std::ostream& log, RunOutcome& outcome) {
  const AnalysisConfig& a = cfg.analysis;
  Writer w(cfg.output_dir, outcome);
  const Scene& scene = cfg.scene;
  const Arm folded = fold_klyshko(scene.signal_arm, scene.idler_arm, scene.pump, scene.spdc.omega_s_min,
                                  scene.spdc.omega_s_max);
  const CoincidenceImage two_arm = run_simulation(scene, cfg.workers);
  const CoincidenceImage single = run_folded(scene, folded, cfg.fold_seed, cfg.workers);
  const ChiSquareResult chi = compare_images(two_arm.coincidence, single.coincidence, a.min_counts);
  log << "fold-check: reduced chi-square " << chi.reduced << " over " << chi.pixels << " pixels\n";

  if (w.enabled()) {
    w.write("coincidence.csv", histogram_csv(two_arm.coincidence, {"coincidence", cfg.hash, cfg.seed}));
    w.write("folded.csv", histogram_csv(single.coincidence, {"folded", cfg.hash, cfg.fold_seed}));
  }

  Checks checks;
  checks.add("reduced_chi2", chi.pixels ? std::optional<double>(chi.reduced) : std::nullopt,
             "[" + std::to_string(a.chi2_min) + ", " + std::to_string(a.chi2_max) + "]",
             chi.reduced >= a.chi2_min && chi.reduced <= a.chi2_max);
  if (chi.pixels == 0) {
    checks.failed = true;
    log << "fold-check: no pixel reaches " << a.min_counts << " mean counts\n";
  }

  json report = base_report(cfg);
  report["fold_seed"] = cfg.fold_seed;
  report["chi_square"] = {{"statistic", chi.statistic}, {"pixels", chi.pixels}, {"reduced", chi.reduced},
                          {"min_counts", a.min_counts}};
  report["counts"] = {{"two_arm_coincidence", two_arm.coincidence.total()},
                      {"folded", single.coincidence.total()}};
  report["checks"] = checks.list;
  report["pass"] = !checks.failed;
  emit_report(w, out, "fold_report.json", report);
  return checks.failed ? kExitThreshold : kExitOk;
}

}  // namespace

RunOutcome run(const RunConfig& config, std::ostream& out, std::ostream& log) {
  RunOutcome outcome;
  try {
    switch (config.mode) {
      case RunMode::Simulate: outcome.exit_code = run_simulate(config, out, log, outcome); break;
      case RunMode::VerifyLaws: outcome.exit_code = run_verify(config, out, log, outcome); break;
      case RunMode::LensLaw: outcome.exit_code = run_lens(config, out, outcome); break;
      case RunMode::FoldCheck: outcome.exit_code = run_fold(config, out, log, outcome); break;
    }
  } catch (const Error& e) {
    log << "error [" << to_string(e.kind()) << "]: " << e.what() << "\n";
    outcome.exit_code = kExitError;
  }
  return outcome;
}

}  // namespace qmg
