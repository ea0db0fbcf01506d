#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qmghost/coincidence.hpp"
#include "qmghost/verify.hpp"

namespace qmg {

enum class RunMode { Simulate, VerifyLaws, LensLaw, FoldCheck };
const char* to_string(RunMode mode);

/// Thresholds and estimator settings. Contrast bounds are engineering
/// choices, not physical constants.
struct AnalysisConfig {
  int smoothing_box = 5;
  ScaleGrid scale_grid;
  std::optional<double> expected_magnification;
  double magnification_tolerance = 0.05;
  double max_singles_contrast = 0.1;
  double min_coincidence_contrast = 0.8;
  double chi2_min = 0.8;
  double chi2_max = 1.2;
  double min_counts = 20;
};

struct SweepConfig {
  std::uint64_t cases = 200;
  std::vector<double> h_rel{1e-5, 1e-4, 1e-3, 1e-2};  // heights as fractions of p
  double slope_min = 1.9;
  double slope_max = 2.1;
};

/// Lens-law table; lengths in whatever unit the caller uses consistently.
struct LensSweep {
  double f = 0;
  double so_min = 0;
  double so_max = 0;
  double so_step = 0;
};

struct RunConfig {
  RunMode mode = RunMode::Simulate;
  UnitSystem units = UnitSystem::normalized();
  std::uint64_t seed = 0;
  int workers = 1;
  std::string output_dir;

  Scene scene;                  // simulate, fold-check
  std::optional<Mask> object;   // first mask of the signal arm
  std::uint64_t fold_seed = 0;  // fold-check: independent stream for the folded run
  SweepConfig sweep;            // verify-laws
  LensSweep lens;               // lens-law
  AnalysisConfig analysis;

  /// Canonical JSON of the validated config with defaults filled in.
  std::string canonical;
  /// FNV-1a of the canonical form without output_dir and workers, so it
  /// identifies the experiment rather than the invocation.
  std::string hash;
};

/// Raised with every problem found, each prefixed by its field path.
class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<std::string> issues);
  const std::vector<std::string>& issues() const { return issues_; }

 private:
  std::vector<std::string> issues_;
};

/// Command-line values that take precedence over the file.
struct ConfigOverrides {
  std::optional<RunMode> mode;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> n_pairs;
  std::optional<std::string> output_dir;
  std::optional<int> workers;
};

RunConfig parse_config(const std::string& json_text, const ConfigOverrides& overrides = {},
                       const std::string& base_dir = ".");
RunConfig load_config(const std::string& path, const ConfigOverrides& overrides = {});

RunConfig lens_law_config(const LensSweep& sweep);

std::string fnv1a_hex(const std::string& bytes);

}  // namespace qmg
